"""Geodesic flow of p0 = |xi|^2/2 on Zoll surfaces.

The flow is integrated with an adaptive embedded Runge-Kutta method
(DOP853) in the spherical chart.  Two special cases avoid the chart poles:

* on the round sphere, a great circle that comes close to the z-axis pole
  is integrated in a chart whose polar axis is a permuted coordinate axis;
* on a Tannery surface, meridians (p_phi = 0) are integrated in an unfolded
  arc-angle psi along the full great circle through both poles.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from . import geometry as geo
from .geometry import ChartError

DEFAULT_TOL = 1e-10
DEFAULT_SAMPLES = 256

# below this value of sin(theta_min) the round sphere is integrated in a rotated chart
_ROTATE_BELOW = 0.5
_MERIDIAN_TOL = 1e-14
# solver tolerances are set this much below the requested accuracy: global
# error accumulates over a period and dense output between steps is less
# accurate than the step endpoints
_SOLVER_TOL_FACTOR = 1e-2

# cyclic axis permutations: _PERM[k] sends axis k to the chart's z axis
_PERM = {
    0: np.array([[0, 1, 0], [0, 0, 1], [1, 0, 0]], dtype=float),
    1: np.array([[0, 0, 1], [1, 0, 0], [0, 1, 0]], dtype=float),
    2: np.eye(3),
}


class GeodesicError(RuntimeError):
    pass


@dataclass
class Geodesic:
    rho0: np.ndarray
    energy: float
    s: np.ndarray
    samples: np.ndarray  # (N, 4) chart phase points
    positions: np.ndarray  # (N, 3) points of the unit sphere carrying the chart
    tol: float
    method: str
    energies: np.ndarray | None = None  # p0 measured at each sample

    @property
    def period(self):
        return self.s[1] * len(self.s)

    def rows(self):
        """CSV rows (s, theta, phi, p_theta, p_phi, E)."""
        e = self.energies if self.energies is not None else np.full(len(self.s), self.energy)
        return np.column_stack([self.s, self.samples, e])


def _as_rho(rho):
    rho = np.array(rho, dtype=float)
    if rho.shape != (4,):
        raise ValueError(f"phase point must have 4 components, got shape {rho.shape}")
    return rho


def _sin_theta_min(surface, rho):
    return abs(rho[3]) / geo.covector_norm(surface, rho)


def _integrate(rhs, y0, s, tol, t_eval=None, dense=False):
    tol = max(tol * _SOLVER_TOL_FACTOR, 2.5e-14)
    sol = solve_ivp(rhs, (0.0, s), y0, method="DOP853", rtol=tol, atol=tol,
                    t_eval=t_eval, dense_output=dense)
    if sol.status != 0:
        raise GeodesicError(f"integration failed: {sol.message}")
    return sol


def _chart_rhs(surface):
    return lambda t, y: geo.hamilton_rhs(surface, y)


def _meridian_rhs(surface):
    prof = surface.profile

    def rhs(t, y):
        psi, p = y
        c = np.cos(psi)
        d = 1.0 + prof(c)
        dd = -np.sin(psi) * prof.deriv(c)
        return [p / d**2, p**2 * dd / d**3]

    return rhs


def _meridian_to_chart(psi, p, phi0):
    psi = np.mod(psi, 2 * np.pi)
    north = psi < np.pi
    th = np.where(north, psi, 2 * np.pi - psi)
    ph = np.where(north, phi0, phi0 + np.pi) % (2 * np.pi)
    pt = np.where(north, p, -p)
    return np.stack([th, ph, pt, np.zeros_like(th)], axis=-1)


def _is_meridian(surface, rho):
    return (not surface.is_canonical) and _sin_theta_min(surface, rho) < _MERIDIAN_TOL


def _rotated_axis(rho):
    x, v = geo.sphere_to_ambient(rho)
    n = np.cross(x, v)
    return int(np.argmax(np.abs(n)))


def _sphere_rotated(rho, fn):
    """Apply ``fn`` to rho expressed in a chart with a better-placed pole."""
    k = _rotated_axis(rho)
    rot = _PERM[k]
    x, v = geo.sphere_to_ambient(rho)
    out = fn(geo.sphere_from_ambient(rot @ x, rot @ v))
    xs, vs = geo.sphere_to_ambient(out)
    return geo.sphere_from_ambient(xs @ rot, vs @ rot)


def flow(surface, rho0, s, tol=DEFAULT_TOL):
    """phi^s(rho0): the geodesic flow at time s."""
    rho0 = _as_rho(rho0)
    if s == 0:
        return rho0.copy()
    if _is_meridian(surface, rho0):
        sol = _integrate(_meridian_rhs(surface), [rho0[0], rho0[2]], s, tol)
        return _meridian_to_chart(sol.y[0, -1], sol.y[1, -1], rho0[1])
    geo._check_chart(rho0[0])
    smin = _sin_theta_min(surface, rho0)
    if surface.is_canonical and smin < _ROTATE_BELOW:
        return _sphere_rotated(rho0, lambda r: _chart_flow(surface, r, s, tol))
    if smin < geo.POLE_MARGIN:
        raise ChartError("geodesic enters the pole margin; no rotated chart on this surface")
    return _chart_flow(surface, rho0, s, tol)


def _chart_flow(surface, rho, s, tol):
    sol = _integrate(_chart_rhs(surface), rho, s, tol)
    return sol.y[:, -1]


def _great_circle(rho0, s):
    """Exact round-sphere flow sampled at the times s."""
    x0, v0 = geo.sphere_to_ambient(rho0)
    speed = np.linalg.norm(v0)
    u = v0 / speed
    a = np.outer(np.cos(speed * s), x0) + np.outer(np.sin(speed * s), u)
    b = speed * (np.outer(-np.sin(speed * s), x0) + np.outer(np.cos(speed * s), u))
    return a, b


def trajectory(surface, rho0, n=DEFAULT_SAMPLES, tol=DEFAULT_TOL):
    """n samples equispaced in time over one period 2 pi / |xi|."""
    rho0 = _as_rho(rho0)
    if n < 16:
        raise ValueError("trajectory needs at least 16 samples")
    energy = float(geo.hamiltonian_p0(surface, rho0))
    period = surface.period / np.sqrt(2 * energy)
    s = period * np.arange(n) / n
    if surface.is_canonical:
        x, v = _great_circle(rho0, s)
        samples = geo.sphere_from_ambient(x, v)
        samples[0] = rho0
        # constant speed is exact for the closed form
        return Geodesic(rho0, energy, s, samples, x, tol, "great-circle", np.full(n, energy))
    if _is_meridian(surface, rho0):
        sol = _integrate(_meridian_rhs(surface), [rho0[0], rho0[2]], s[-1], tol, t_eval=s)
        samples = _meridian_to_chart(sol.y[0], sol.y[1], rho0[1])
        x = geo.unit_sphere_point(sol.y[0], np.full(n, rho0[1]))
        e = 0.5 * sol.y[1] ** 2 / geo.profile_factor(surface, sol.y[0])[0] ** 2
        return Geodesic(rho0, energy, s, samples, x, tol, "meridian", e)
    if _sin_theta_min(surface, rho0) < geo.POLE_MARGIN:
        raise ChartError("geodesic enters the pole margin")
    sol = _integrate(_chart_rhs(surface), rho0, s[-1], tol, t_eval=s)
    samples = sol.y.T.copy()
    x = geo.unit_sphere_point(samples[:, 0], samples[:, 1])
    return Geodesic(rho0, energy, s, samples, x, tol, "chart", geo.hamiltonian_p0(surface, samples))


def chart_distance(a, b):
    """Distance between chart phase points with angles wrapped."""
    d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    d[..., :2] = (d[..., :2] + np.pi) % (2 * np.pi) - np.pi
    return np.linalg.norm(d, axis=-1)


def closure_defect(surface, rho0, tol=DEFAULT_TOL):
    """|phi^{2pi/|xi|}(rho0) - rho0| in chart coordinates."""
    rho0 = _as_rho(rho0)
    period = surface.period / geo.covector_norm(surface, rho0)
    return float(chart_distance(flow(surface, rho0, period, tol), rho0))


def _directional(fn, y, v):
    # complex-step derivative of fn at y in direction v
    h = 1e-30
    return np.imag(fn(y + 1j * h * v)) / h


def tangent_flow(surface, rho0, s, v0, tol=DEFAULT_TOL):
    """d(phi^s)_{rho0} v0 by integrating the variational equations."""
    rho0 = _as_rho(rho0)
    v0 = np.asarray(v0, dtype=float)
    if s == 0:
        return v0.copy()
    geo._check_chart(rho0[0])
    if _sin_theta_min(surface, rho0) < 1e-3:
        raise ChartError("tangent flow is only integrated in the native chart")

    def f(y):
        return geo.hamilton_rhs(surface, y)

    def rhs(t, z):
        y, w = z[:4], z[4:]
        return np.concatenate([f(y), _directional(f, y, w)])

    sol = _integrate(rhs, np.concatenate([rho0, v0]), s, tol)
    return sol.y[4:, -1]


def hamiltonian_field(surface, rho):
    return geo.hamilton_rhs(surface, _as_rho(rho))


def random_unit_phase_point(surface, rng, margin=0.05):
    """A random unit-speed (E = 1/2) phase point with sin(theta) > margin."""
    while True:
        th = np.arccos(rng.uniform(-1.0, 1.0))
        if np.sin(th) > margin:
            break
    ph = rng.uniform(0, 2 * np.pi)
    alpha = rng.uniform(0, 2 * np.pi)
    d, _ = geo.profile_factor(surface, th)
    return np.array([th, ph, d * np.cos(alpha), np.sin(th) * np.sin(alpha)])
