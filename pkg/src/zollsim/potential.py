"""Real potentials on S^2.

Two representations are supported: a polynomial in the ambient coordinates
(x1, x2, x3) restricted to the unit sphere, and a list of complex
spherical-harmonic coefficients obeying c_{l,-m} = (-1)^m conj(c_{l,m}).
On a Tannery surface the potential is read through the same chart, i.e. as
a function of (theta, phi).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import harmonics as sh
from .geometry import unit_sphere_point


@dataclass(frozen=True)
class Potential:
    kind: str
    terms: tuple = ()  # ((coef, i, j, k), ...) for kind == "polynomial"
    coeffs: tuple = ()  # flat harmonic coefficients for kind == "harmonic"

    def __post_init__(self):
        if self.kind == "polynomial":
            object.__setattr__(self, "terms", tuple(
                (float(c), int(i), int(j), int(k)) for c, i, j, k in self.terms))
        elif self.kind == "harmonic":
            c = np.asarray(self.coeffs, dtype=complex)
            lmax = int(round(np.sqrt(c.size))) - 1
            if sh.basis_size(lmax) != c.size:
                raise ValueError("harmonic coefficient list has no square length")
            ls, ms = sh.degrees_orders(lmax)
            partner = c[sh.index(ls, -ms)]
            if not np.allclose(partner, (-1.0) ** ms * np.conj(c), atol=1e-12):
                raise ValueError("harmonic coefficients violate the reality constraint")
            object.__setattr__(self, "coeffs", tuple(c))
        else:
            raise ValueError(f"unknown potential kind {self.kind!r}")

    # constructors -------------------------------------------------------
    @classmethod
    def polynomial(cls, terms):
        return cls("polynomial", terms=tuple(terms))

    @classmethod
    def constant(cls, c):
        return cls.polynomial([(c, 0, 0, 0)])

    @classmethod
    def monomial(cls, i, j, k, coef=1.0):
        return cls.polynomial([(coef, i, j, k)])

    @classmethod
    def harmonic(cls, coeffs):
        return cls("harmonic", coeffs=tuple(coeffs))

    @classmethod
    def from_expression(cls, text):
        """Parse e.g. ``"x3**2 + 0.5*x1*x2"`` (variables x1, x2, x3)."""
        import sympy

        x1, x2, x3 = sympy.symbols("x1 x2 x3")
        poly = sympy.Poly(sympy.sympify(text.replace("^", "**")), x1, x2, x3)
        return cls.polynomial([(float(c), *e) for e, c in poly.terms()])

    @classmethod
    def from_record(cls, rec):
        if isinstance(rec, str):
            return cls.from_expression(rec)
        kind = rec.get("kind", "polynomial")
        if kind == "polynomial":
            if "expr" in rec:
                return cls.from_expression(rec["expr"])
            return cls.polynomial(rec["terms"])
        if kind == "harmonic":
            return cls.harmonic([complex(*z) if isinstance(z, (list, tuple)) else complex(z)
                                 for z in rec["coeffs"]])
        raise ValueError(f"unknown potential kind {kind!r}")

    def to_record(self):
        if self.kind == "polynomial":
            return {"kind": "polynomial", "terms": [list(t) for t in self.terms]}
        return {"kind": "harmonic", "coeffs": [[z.real, z.imag] for z in self.coeffs]}

    # properties ---------------------------------------------------------
    @property
    def degree(self):
        if self.kind == "polynomial":
            return max((i + j + k for c, i, j, k in self.terms if c != 0), default=0)
        lmax = int(round(np.sqrt(len(self.coeffs)))) - 1
        nz = np.nonzero(np.abs(self.coeffs) > 0)[0]
        return int(sh.degrees_orders(lmax)[0][nz].max()) if nz.size else 0

    @property
    def parity(self):
        """'even', 'odd' or None under x -> -x."""
        if self.kind == "polynomial":
            degs = {(i + j + k) % 2 for c, i, j, k in self.terms if c != 0}
        else:
            lmax = int(round(np.sqrt(len(self.coeffs)))) - 1
            ls = sh.degrees_orders(lmax)[0]
            degs = {int(l) % 2 for l, c in zip(ls, self.coeffs) if c != 0}
        if degs <= {0}:
            return "even"
        if degs == {1}:
            return "odd"
        return None

    @property
    def is_constant(self):
        return self.degree == 0

    # evaluation ---------------------------------------------------------
    def __call__(self, xyz):
        """Evaluate at points of R^3 (last axis of length 3)."""
        xyz = np.asarray(xyz, dtype=float)
        if self.kind == "polynomial":
            out = np.zeros(xyz.shape[:-1])
            for c, i, j, k in self.terms:
                out = out + c * xyz[..., 0] ** i * xyz[..., 1] ** j * xyz[..., 2] ** k
            return out
        lmax = int(round(np.sqrt(len(self.coeffs)))) - 1
        flat = xyz.reshape(-1, 3)
        vals = sh.ylm_ambient(lmax, flat) @ np.asarray(self.coeffs)
        return vals.real.reshape(xyz.shape[:-1])

    def on_chart(self, theta, phi):
        return self(unit_sphere_point(np.asarray(theta, float), np.asarray(phi, float)))

    def sup_bounds(self, n=200):
        """Approximate (min, max) of V on a dense sphere sample."""
        th = np.arccos(np.linspace(-1, 1, n))
        ph = np.linspace(0, 2 * np.pi, 2 * n, endpoint=False)
        vals = self.on_chart(th[:, None], ph[None, :])
        return float(vals.min()), float(vals.max())


def x3_squared():
    return Potential.monomial(0, 0, 2)
