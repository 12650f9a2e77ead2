"""Schrodinger evolution under P_eps(hbar) on the round sphere and its
diagnostics: geodesic-concentrated states, position densities, tube masses,
circle fits, transport against the effective flow and the Loschmidt echo.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import harmonics as sh
from . import radon as rd
from . import spectral as sp
from .geometry import ZollSurface

TAU_LAWS = ("eps^-2", "hbar/eps^2", "const*eps^-2", "value")
LMAX_PAD = 16
TRUNCATION_LIMIT = 1e-8


class PlanError(ValueError):
    pass


@dataclass
class EvolutionPlan:
    hbar: float
    eps: float
    tau_law: str = "eps^-2"
    times: np.ndarray = field(default_factory=lambda: np.linspace(0.0, 1.0, 33))
    lmax: int = 0
    tau_const: float = 1.0
    eps_exponent: float | None = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if self.hbar <= 0 or self.eps < 0:
            raise PlanError("hbar must be positive and eps non-negative")
        if self.tau_law not in TAU_LAWS:
            raise PlanError(f"tau_law must be one of {TAU_LAWS}, got {self.tau_law!r}")
        if self.lmax < 1:
            raise PlanError("lmax must be >= 1")

    @classmethod
    def for_cluster(cls, l, eps_exponent=0.5, tau_law="eps^-2", times=None, lmax=None,
                    tau_const=1.0):
        """hbar = 1/sqrt(l(l+1)), eps = hbar^eps_exponent, lmax = l + 16."""
        hbar = sp.hbar_for_cluster(l)
        if times is None:
            times = np.linspace(0, 1, 33) if tau_law == "eps^-2" else np.linspace(0, 2 * np.pi, 65)
        return cls(hbar, hbar**eps_exponent, tau_law, times, lmax or l + LMAX_PAD,
                   tau_const, eps_exponent)

    @property
    def tau(self):
        if self.tau_law == "value":
            return self.tau_const
        if self.eps == 0:
            raise PlanError("eps = 0 only makes sense with tau_law='value'")
        if self.tau_law == "eps^-2":
            return self.eps**-2
        if self.tau_law == "hbar/eps^2":
            return self.hbar / self.eps**2
        return self.tau_const * self.eps**-2

    def validate_echo(self):
        """The echo regime needs eps << sqrt(hbar) (exponent > 1/2)."""
        if self.eps_exponent is not None:
            if self.eps_exponent <= 0.5:
                raise PlanError("echo requires eps = hbar^a with a > 1/2")
        elif self.eps >= np.sqrt(self.hbar):
            raise PlanError("echo requires eps << sqrt(hbar)")


class Propagator:
    """exp(-i T H / hbar) from a shared block eigen-decomposition."""

    def __init__(self, H, hbar):
        self.hbar = hbar
        self.decomposition = sp.decompose(H)

    def apply(self, state, T):
        c = sp._coeffs(state)
        lmax = state.lmax if isinstance(state, sp.HarmonicState) else \
            int(round(np.sqrt(len(c)))) - 1
        if T == 0:
            return sp.HarmonicState(np.array(c, dtype=complex), lmax)
        out = self.decomposition.apply_function(lambda w: np.exp(-1j * T * w / self.hbar), c)
        return sp.HarmonicState(out, lmax)


def propagate(H, hbar, state, T):
    prop = H if isinstance(H, Propagator) else Propagator(H, hbar)
    return prop.apply(state, T)


def truncation_weight(state):
    """Weight carried by the top two degrees of the basis."""
    return float(np.sum(state.shell_weights()[-2:]))


def check_truncation(weight, limit=TRUNCATION_LIMIT):
    if weight >= limit:
        raise PlanError(f"lmax too small: top-shell weight {weight:.2e} >= {limit:.0e}")


def shrinking_halfwidth(l, w_ref=0.35, l_ref=20):
    """Tube half-width following the l^{-1/2} width of a degree-l geodesic state."""
    return w_ref * np.sqrt(l_ref / l)


def _frame(n):
    n = np.asarray(n, dtype=float)
    n = n / np.linalg.norm(n)
    a = np.array([1.0, 0.0, 0.0]) if abs(n[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    u = np.cross(a, n)
    u /= np.linalg.norm(u)
    if np.allclose(n, [0, 0, 1]):
        u = np.array([1.0, 0.0, 0.0])
    v = np.cross(n, u)
    return u, v, n


def geodesic_state(basis, n, l):
    """Highest-weight state of degree l concentrated on the circle with normal n.

    The state is ((u + i v) . x)^l with (u, v, n) a right-handed frame, i.e.
    Y_ll rotated so that its circle of concentration has normal n; with this
    orientation the semiclassical limit travels the circle with x cross v = n.
    """
    if l > basis.lmax:
        raise ValueError("degree exceeds the basis")
    u, v, _ = _frame(n)
    pts = basis.points()
    samples = (pts @ (u + 1j * v)) ** l
    return sp.analyze(basis, samples).normalized()


@lru_cache(maxsize=8)
def _density_basis(lmax):
    return sp.HarmonicBasis(2 * lmax)


@dataclass
class DensityField:
    """|u|^2 sampled on a grid that integrates it exactly."""

    basis: sp.HarmonicBasis
    values: np.ndarray

    def total(self):
        return float(self.basis.integrate(self.values))

    def __add__(self, other):
        return DensityField(self.basis, self.values + other.values)

    def __rmul__(self, a):
        return DensityField(self.basis, a * self.values)


def position_density(basis, state):
    dbasis = _density_basis(basis.lmax)
    padded = np.zeros(dbasis.size, dtype=complex)
    padded[: basis.size] = sp._coeffs(state)
    return DensityField(dbasis, np.abs(sp.synthesize(dbasis, padded)) ** 2)


def uniform_density(lmax):
    dbasis = _density_basis(lmax)
    return DensityField(dbasis, np.full(dbasis.grid_shape, 1 / (4 * np.pi)))


def _tube_kernel(lmax, halfwidth):
    """int_{-s}^{s} P_l(t) dt with s = sin(halfwidth), l = 0..lmax."""
    s = np.sin(halfwidth)
    ls = np.arange(lmax + 1)
    out = np.empty(lmax + 1)
    out[0] = 2 * s
    for l in ls[1:]:
        up = sh.legendre_p(l + 1, s) - sh.legendre_p(l + 1, -s)
        dn = sh.legendre_p(l - 1, s) - sh.legendre_p(l - 1, -s)
        out[l] = (up - dn) / (2 * l + 1)
    return out


def tube_mass(density, n, halfwidth):
    """Mass of the density within angular distance ``halfwidth`` of the great
    circle with normal n (Funk-Hecke, exact for bandlimited densities)."""
    if not 0 < halfwidth < np.pi / 2:
        raise ValueError("halfwidth must lie in (0, pi/2)")
    b = density.basis
    coeffs = sp.analyze(b, density.values).coeffs
    kern = _tube_kernel(b.lmax, halfwidth)[b.ls]
    yn = sh.ylm_ambient(b.lmax, np.asarray(n, dtype=float)[None, :])[0]
    return float(np.real(2 * np.pi * np.sum(kern * coeffs * yn)))


def tube_mass_quadrature(density, n, halfwidth):
    """Grid-quadrature version of ``tube_mass`` (first-order accurate)."""
    pts = density.basis.points()
    inside = np.abs(pts @ np.asarray(n, dtype=float)) <= np.sin(halfwidth)
    return float(density.basis.integrate(density.values * inside))


def second_moment(density):
    pts = density.basis.points()
    wts = density.basis.area_weights() * density.values
    return np.einsum("jk,jka,jkb->ab", wts, pts, pts)


def circle_fit(density, isotropy_tol=1e-6):
    """Unit normal minimizing int (n.x)^2 density; None for isotropic densities.

    Sign convention: n_3 >= 0, then n_1 >= 0, then n_2 >= 0.
    """
    m = second_moment(density)
    w, v = np.linalg.eigh(m)
    if w[1] - w[0] < isotropy_tol * np.trace(m):
        return None
    n = v[:, 0]
    for k in (2, 0, 1):
        if abs(n[k]) > 1e-12:
            return n if n[k] > 0 else -n
    return n


def angle_between_normals(a, b):
    """Angle between two unoriented great circles."""
    c = abs(float(np.dot(a, b)) / (np.linalg.norm(a) * np.linalg.norm(b)))
    return float(np.arccos(min(c, 1.0)))


@dataclass
class TransportReport:
    l: int
    times: np.ndarray
    fitted: np.ndarray
    predicted: np.ndarray
    angular_error: np.ndarray
    tube_mass: np.ndarray
    initial_tube_mass: np.ndarray
    max_truncation: float
    halfwidth: float

    def rows(self):
        return np.column_stack([self.times, self.fitted, self.predicted,
                                self.angular_error, self.tube_mass])

    header = ("t", "fit_n1", "fit_n2", "fit_n3", "pred_n1", "pred_n2", "pred_n3",
              "angular_error", "tube_mass")

    @property
    def mean_initial_tube_mass(self):
        return float(np.mean(self.initial_tube_mass))


def predicted_normals(V, n0, times, tol=rd.DEFAULT_FLOW_TOL):
    """Normals of phi_V^t(Gamma0) on the round sphere at the scaled times."""
    s2 = ZollSurface.canonical()
    rho0 = rd.phase_point_from_normal(n0)
    times = np.asarray(times, dtype=float)
    if times[-1] == 0:
        return np.tile(rd.geodesic_normal_chart(s2, rho0), (len(times), 1))
    path = rd.effective_flow(s2, V, rho0, times[-1], tol=tol, t_eval=times)
    return rd.geodesic_normal_chart(s2, path)


def transport_experiment(plan, V, n0, l, halfwidth=0.35, initial_halfwidth=None):
    """Evolve geodesic_state(n0, l) at tau = eps^-2 and compare with phi_V^t.

    Tube masses use ``halfwidth`` around the predicted circle and, around the
    fixed initial circle, ``initial_halfwidth`` (default: the shrinking width
    ``shrinking_halfwidth(l, halfwidth)``).
    """
    if plan.tau_law != "eps^-2":
        raise PlanError("transport experiments use tau = eps^-2")
    basis = sp.HarmonicBasis(plan.lmax)
    prop = Propagator(sp.hamiltonian_matrix(basis, plan.hbar, plan.eps, V), plan.hbar)
    u0 = geodesic_state(basis, n0, l)
    pred = predicted_normals(V, n0, plan.times)
    n0 = np.asarray(n0, float) / np.linalg.norm(n0)
    w0 = initial_halfwidth or shrinking_halfwidth(l, halfwidth)
    fitted, err, mass, mass0, trunc = [], [], [], [], 0.0
    for t, npred in zip(plan.times, pred):
        ut = prop.apply(u0, t * plan.tau)
        trunc = max(trunc, truncation_weight(ut))
        dens = position_density(basis, ut)
        nf = circle_fit(dens)
        if nf is None:
            nf = np.full(3, np.nan)
        elif np.dot(nf, npred) < 0:
            nf = -nf
        fitted.append(nf)
        err.append(angle_between_normals(nf, npred))
        mass.append(tube_mass(dens, npred, halfwidth))
        mass0.append(tube_mass(dens, n0, w0))
    check_truncation(trunc)
    return TransportReport(l, plan.times, np.array(fitted), pred, np.array(err),
                           np.array(mass), np.array(mass0), trunc, halfwidth)


@dataclass
class EchoSeries:
    times: np.ndarray
    values: np.ndarray
    plan: EvolutionPlan
    predicted: np.ndarray | None = None

    header = ("t", "re_F", "im_F", "abs_F", "predicted_abs_F")

    def rows(self):
        pred = self.predicted if self.predicted is not None else np.full(len(self.times), np.nan)
        return np.column_stack([self.times, self.values.real, self.values.imag,
                                np.abs(self.values), pred])


def loschmidt(plan, V, state, basis=None):
    """F(t) = <exp(-i t tau P_eps / hbar) u, exp(-i t tau P_0 / hbar) u>."""
    if basis is None:
        basis = sp.HarmonicBasis(plan.lmax)
    pert = Propagator(sp.hamiltonian_matrix(basis, plan.hbar, plan.eps, V), plan.hbar)
    free = Propagator(sp.free_hamiltonian(basis, plan.hbar), plan.hbar)
    vals, trunc = [], 0.0
    for t in plan.times:
        T = t * plan.tau if t != 0 else 0.0
        v = pert.apply(state, T)
        trunc = max(trunc, truncation_weight(v))
        vals.append(v.inner(free.apply(state, T)))
    check_truncation(trunc)
    return EchoSeries(plan.times, np.array(vals), plan)


def superposition(*states):
    c = sum(s.coeffs for s in states)
    return sp.HarmonicState(c, states[0].lmax).normalized()


def echo_prediction(radon_values, weights, times):
    """mu0(exp(i t I(V))) for an initial measure that is a weighted sum of
    closed geodesics carrying the given Radon values."""
    w = np.asarray(weights, dtype=float)
    w = w / w.sum()
    J = np.asarray(radon_values, dtype=float)
    return np.exp(1j * np.outer(times, J)) @ w
