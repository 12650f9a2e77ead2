"""Metric data for the round sphere and Tannery surfaces of revolution.

A Tannery surface is S^2 with the metric

    g = (1 + sigma(cos theta))^2 dtheta^2 + sin^2 theta dphi^2

where sigma is odd with sigma(1) = 0.  Phase points are stored as 4-vectors
``(theta, phi, p_theta, p_phi)`` in the spherical chart; every function here
accepts anything ``np.asarray`` turns into a trailing axis of length 4.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from numpy.polynomial import polynomial as npoly

POLE_MARGIN = 1e-6
PERIOD = 2.0 * np.pi


class ChartError(ValueError):
    """Raised when a point is too close to a pole of the spherical chart."""


class PhasePoint(NamedTuple):
    theta: float
    phi: float
    p_theta: float
    p_phi: float


@dataclass(frozen=True)
class RevolutionProfile:
    """Odd polynomial sigma(c) = sum_k coeffs[k] c^k."""

    coeffs: tuple = (0.0,)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        object.__setattr__(self, "coeffs", tuple(float(x) for x in c))
        if np.any(c[0::2] != 0.0):
            raise ValueError("profile must be odd: even coefficients must vanish")
        if abs(c.sum()) > 1e-12 * max(1.0, np.abs(c).sum()):
            raise ValueError(f"profile must satisfy sigma(1) = 0, got {c.sum():.3e}")
        # Chebyshev-Lobatto sample
        sample = np.cos(np.pi * np.arange(2049) / 2048)
        if np.min(1.0 + npoly.polyval(sample, c)) <= 0.0:
            raise ValueError("metric not positive: 1 + sigma(c) must be > 0 on [-1, 1]")

    @classmethod
    def from_odd(cls, odd):
        """Build from coefficients of c, c^3, c^5, ..."""
        c = np.zeros(2 * len(odd))
        c[1::2] = odd
        return cls(tuple(c))

    @classmethod
    def cubic(cls, a):
        """sigma(c) = a c (1 - c^2)."""
        return cls((0.0, a, 0.0, -a))

    @property
    def odd_coeffs(self):
        return list(self.coeffs[1::2])

    @property
    def is_zero(self):
        return not any(self.coeffs)

    def __call__(self, c):
        return npoly.polyval(c, self.coeffs)

    def deriv(self, c, order=1):
        return npoly.polyval(c, npoly.polyder(self.coeffs, order))


@dataclass(frozen=True)
class ZollSurface:
    kind: str = "canonical"
    profile: RevolutionProfile = field(default_factory=RevolutionProfile)

    def __post_init__(self):
        if self.kind not in ("canonical", "tannery"):
            raise ValueError(f"unknown surface kind {self.kind!r}")
        if self.kind == "canonical" and not self.profile.is_zero:
            raise ValueError("canonical sphere must have a zero profile")

    period = PERIOD

    @classmethod
    def canonical(cls):
        return cls("canonical")

    @classmethod
    def tannery(cls, profile):
        if not isinstance(profile, RevolutionProfile):
            profile = RevolutionProfile.from_odd(profile)
        return cls("tannery", profile)

    @property
    def is_canonical(self):
        return self.kind == "canonical"

    def to_record(self):
        return {"kind": self.kind, "sigma": self.profile.odd_coeffs}

    @classmethod
    def from_record(cls, rec):
        kind = rec.get("kind", "canonical")
        if kind == "canonical":
            return cls.canonical()
        return cls.tannery(RevolutionProfile.from_odd(rec.get("sigma", [])))


def _check_chart(theta):
    s = np.sin(theta)
    if np.any(s < POLE_MARGIN) or np.any(np.asarray(theta) <= 0) or np.any(np.asarray(theta) >= np.pi):
        raise ChartError("point within the pole margin of the spherical chart")
    return s


def profile_factor(surface, theta):
    """D(theta) = 1 + sigma(cos theta) and dD/dtheta."""
    c = np.cos(theta)
    prof = surface.profile
    return 1.0 + prof(c), -np.sin(theta) * prof.deriv(c)


def metric_inverse(surface, theta):
    """Diagonal inverse metric (g^{theta theta}, g^{phi phi})."""
    s = _check_chart(theta)
    d, _ = profile_factor(surface, theta)
    return 1.0 / d**2, 1.0 / s**2


def curvature(surface, theta):
    """Gaussian curvature K(theta)."""
    c = np.cos(theta)
    prof = surface.profile
    d = 1.0 + prof(c)
    return (d - c * prof.deriv(c)) / d**3


def curvature_dtheta(surface, theta):
    """dK/dtheta, the only nonzero component of dK."""
    c = np.cos(theta)
    prof = surface.profile
    sig, sig1, sig2 = prof(c), prof.deriv(c), prof.deriv(c, 2)
    d = 1.0 + sig
    num = d - c * sig1
    dk_dc = (-c * sig2 * d - 3.0 * num * sig1) / d**4
    return -np.sin(theta) * dk_dc


def hamiltonian_p0(surface, rho):
    """p0 = |xi|^2 / 2."""
    rho = np.asarray(rho, dtype=float)
    gtt, gpp = metric_inverse(surface, rho[..., 0])
    return 0.5 * (gtt * rho[..., 2] ** 2 + gpp * rho[..., 3] ** 2)


def covector_norm(surface, rho):
    return np.sqrt(2.0 * hamiltonian_p0(surface, rho))


def perp(surface, rho):
    """Rotate xi by +pi/2 in the fibre.

    The pair (xi, xi_perp) is positively oriented for the area form
    (1 + sigma) sin(theta) dtheta ^ dphi and |xi_perp| = |xi|.
    """
    rho = np.asarray(rho, dtype=float)
    th, pt, pp = rho[..., 0], rho[..., 2], rho[..., 3]
    s = _check_chart(th)
    if np.any((pt == 0) & (pp == 0)):
        raise ValueError("perp of the zero covector is undefined")
    d, _ = profile_factor(surface, th)
    return np.stack([-pp * d / s, pt * s / d], axis=-1)


def curvature_pairing(surface, rho):
    """g*(dK, xi_perp); 1-homogeneous in xi."""
    rho = np.asarray(rho, dtype=float)
    th = rho[..., 0]
    gtt, _ = metric_inverse(surface, th)
    return gtt * curvature_dtheta(surface, th) * perp(surface, rho)[..., 0]


def cometric(surface, rho, a, b):
    """g*(a, b) for covectors a, b at the base point of rho."""
    gtt, gpp = metric_inverse(surface, np.asarray(rho, dtype=float)[..., 0])
    a, b = np.asarray(a), np.asarray(b)
    return gtt * a[..., 0] * b[..., 0] + gpp * a[..., 1] * b[..., 1]


def hamilton_rhs(surface, rho):
    """Hamilton's equations of p0 in the chart (pole margin not checked)."""
    th, _, pt, pp = rho
    s, c = np.sin(th), np.cos(th)
    d, dd = profile_factor(surface, th)
    return np.array([
        pt / d**2,
        pp / s**2,
        pt**2 * dd / d**3 + pp**2 * c / s**3,
        0.0,
    ])


def unit_sphere_point(theta, phi):
    theta, phi = np.broadcast_arrays(theta, phi)
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def chart_frame(theta, phi):
    """Unit vectors e_theta, e_phi of the round-sphere chart."""
    ct, st = np.cos(theta), np.sin(theta)
    cp, sp = np.cos(phi), np.sin(phi)
    e_t = np.stack([ct * cp, ct * sp, -st], axis=-1)
    e_p = np.stack([-sp, cp, np.zeros_like(sp)], axis=-1)
    return e_t, e_p


def sphere_to_ambient(rho):
    """Round sphere: chart phase point -> (position, velocity) in R^3."""
    rho = np.asarray(rho, dtype=float)
    th, ph, pt, pp = rho[..., 0], rho[..., 1], rho[..., 2], rho[..., 3]
    x = unit_sphere_point(th, ph)
    e_t, e_p = chart_frame(th, ph)
    v = pt[..., None] * e_t + (pp / np.sin(th))[..., None] * e_p
    return x, v


def sphere_from_ambient(x, v):
    """Round sphere: (position, velocity) in R^3 -> chart phase point."""
    x, v = np.asarray(x, dtype=float), np.asarray(v, dtype=float)
    th = np.arccos(np.clip(x[..., 2], -1.0, 1.0))
    ph = np.arctan2(x[..., 1], x[..., 0]) % (2 * np.pi)
    e_t, e_p = chart_frame(th, ph)
    pt = np.sum(v * e_t, axis=-1)
    pp = np.sin(th) * np.sum(v * e_p, axis=-1)
    return np.stack([th, ph, pt, pp], axis=-1)


def gauss_bonnet(surface, n=256):
    """Integral of K dA by Gauss-Legendre in theta (phi integral is 2 pi)."""
    x, w = np.polynomial.legendre.leggauss(n)
    th = 0.5 * np.pi * (x + 1.0)
    d, _ = profile_factor(surface, th)
    return 2 * np.pi * 0.5 * np.pi * np.sum(w * curvature(surface, th) * d * np.sin(th))
