"""Geodesic Radon transform, its Hamiltonian flow, critical sets and caustics.

Sign convention: the symplectic form is dp ^ dq in the chart and the
Hamiltonian field of L is X_L = (dL/dp, -dL/dq).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from . import geometry as geo
from . import geodesic as gd

DEFAULT_STEP = 1e-4
DEFAULT_FLOW_TOL = 1e-9


def radon(surface, V, rho, n=gd.DEFAULT_SAMPLES, tol=gd.DEFAULT_TOL):
    """Average of V over the closed geodesic through rho (trapezoid rule)."""
    traj = gd.trajectory(surface, rho, n, tol)
    return float(np.mean(V(traj.positions)))


def radon_is_homogeneous(surface, V, rho, lam, n=gd.DEFAULT_SAMPLES):
    """|I(V)(x, lam xi) - I(V)(x, xi)|; should be below 1e-9."""
    if lam <= 0:
        raise ValueError("lam must be positive")
    rho = np.asarray(rho, dtype=float)
    scaled = rho.copy()
    scaled[2:] *= lam
    return abs(radon(surface, V, scaled, n) - radon(surface, V, rho, n))


def chart_gradient(fn, rho, h=DEFAULT_STEP):
    """Central differences in the 4 chart directions, one Richardson level."""
    rho = np.asarray(rho, dtype=float)
    out = np.empty(4)
    for k in range(4):
        e = np.zeros(4)
        e[k] = 1.0
        d1 = (fn(rho + h * e) - fn(rho - h * e)) / (2 * h)
        d2 = (fn(rho + 0.5 * h * e) - fn(rho - 0.5 * h * e)) / h
        out[k] = (4.0 * d2 - d1) / 3.0
    return out


def _grad_tol(surface):
    # the geodesic solver already runs well below the requested tolerance
    return gd.DEFAULT_TOL


def radon_grad(surface, V, rho, h=DEFAULT_STEP, n=gd.DEFAULT_SAMPLES):
    """Gradient of I(V) in chart coordinates (theta, phi, p_theta, p_phi)."""
    if h <= 0:
        raise ValueError("h must be positive")
    geo._check_chart(np.asarray(rho, dtype=float)[0])
    tol = _grad_tol(surface)
    return chart_gradient(lambda r: radon(surface, V, r, n, tol), rho, h)


def hamiltonian_vector(grad):
    """X_L from the chart gradient of L."""
    return np.array([grad[2], grad[3], -grad[0], -grad[1]])


def effective_field(surface, V, rho, h=DEFAULT_STEP, n=gd.DEFAULT_SAMPLES):
    return hamiltonian_vector(radon_grad(surface, V, rho, h, n))


def effective_flow(surface, V, rho0, t, tol=DEFAULT_FLOW_TOL, h=DEFAULT_STEP,
                   n=gd.DEFAULT_SAMPLES, t_eval=None):
    """phi_V^t(rho0): the Hamiltonian flow of I(V).

    With ``t_eval`` the states at all requested times are returned, shape
    (len(t_eval), 4).
    """
    rho0 = np.asarray(rho0, dtype=float)
    if t == 0 and t_eval is None:
        return rho0.copy()
    sol = solve_ivp(lambda _, y: effective_field(surface, V, y, h, n), (0.0, t), rho0,
                    method="DOP853", rtol=tol, atol=tol, t_eval=t_eval)
    if sol.status != 0:
        raise gd.GeodesicError(f"effective flow failed: {sol.message}")
    if t_eval is not None:
        return sol.y.T.copy()
    return sol.y[:, -1]


def geodesic_normal_chart(surface, rho):
    """Unit normal x cross v of the great circle through rho (round sphere only)."""
    if not surface.is_canonical:
        raise NotImplementedError("the normal-vector chart exists only on the round sphere")
    x, v = geo.sphere_to_ambient(rho)
    n = np.cross(x, v)
    norm = np.linalg.norm(n, axis=-1, keepdims=True)
    if np.any(norm == 0):
        raise ValueError("zero covector has no geodesic normal")
    return n / norm


def phase_point_from_normal(n, speed=1.0):
    """A phase point on the great circle with unit normal n.

    The base point is chosen on the circle as far as possible from the chart
    poles, so the point is never inside the pole margin.
    """
    n = np.asarray(n, dtype=float)
    n = n / np.linalg.norm(n)
    z = np.array([0.0, 0.0, 1.0])
    x0 = np.cross(z, n)
    if np.linalg.norm(x0) < 1e-12:
        x0 = np.array([1.0, 0.0, 0.0])
    x0 /= np.linalg.norm(x0)
    v0 = speed * np.cross(n, x0)
    return geo.sphere_from_ambient(x0, v0)


def equator_phase_point(surface, phi0, alpha):
    """Unit phase point on theta = pi/2 heading at angle alpha from east.

    On the round sphere the geodesic normal has polar angle alpha.
    """
    d, _ = geo.profile_factor(surface, np.pi / 2)
    return np.array([np.pi / 2, phi0 % (2 * np.pi), -d * np.sin(alpha), np.cos(alpha)])


@dataclass
class CriticalCandidate:
    phi0: float
    alpha: float
    rho: np.ndarray
    residual: float

    def row(self):
        return [self.phi0, self.alpha, *self.rho, self.residual]


@dataclass
class CriticalScan:
    degenerate: bool
    candidates: list = field(default_factory=list)
    resolution: int = 0

    @property
    def message(self):
        if self.degenerate:
            return "degenerate: C(V) = M"
        return f"{len(self.candidates)} candidate critical geodesics"


def critical_scan(surface, V, resolution=32, degenerate_tol=1e-8, max_iter=50):
    """Scan geodesic space for critical points of I(V).

    Geodesics are parametrized by the longitude phi0 where they cross the
    equator and the heading alpha in (0, pi) (the polar angle of the normal
    on the round sphere).  Grid-local minima of |grad I(V)| below
    10 (grid spacing)^2 are refined by coordinate descent.
    """
    if resolution < 16:
        raise ValueError("resolution must be at least 16")
    n_a, n_p = resolution, 2 * resolution
    spacing = np.pi / resolution
    alphas = (np.arange(n_a) + 0.5) * spacing
    phis = np.arange(n_p) * spacing

    cache = {}

    def resid(phi0, alpha):
        key = (round(phi0 % (2 * np.pi), 13), round(alpha, 13))
        if key not in cache:
            rho = equator_phase_point(surface, phi0, alpha)
            cache[key] = float(np.linalg.norm(radon_grad(surface, V, rho)))
        return cache[key]

    grid = np.array([[resid(p, a) for p in phis] for a in alphas])
    if grid.max() < degenerate_tol:
        return CriticalScan(True, [], resolution)

    threshold = 10.0 * spacing**2
    # alpha is extended by reflection: alpha -> -alpha, pi - alpha duplicate boundary cells
    padded = np.pad(grid, ((1, 1), (0, 0)), mode="edge")
    cands = []
    for i in range(n_a):
        for j in range(n_p):
            v = grid[i, j]
            if v > threshold:
                continue
            neigh = [grid[i, (j - 1) % n_p], grid[i, (j + 1) % n_p],
                     padded[i, j], padded[i + 2, j]]
            if not all(v <= w for w in neigh):
                continue
            # cells next to an already refined point belong to the same critical
            # family; the first one found in scan order represents it
            here = _param_normal(phis[j], alphas[i])
            if any(_angle(here, _param_normal(p, a)) <= 1.5 * spacing for p, a, _ in cands):
                continue
            cands.append(_refine(resid, phis[j], alphas[i], spacing, max_iter))
    out = []
    for phi0, alpha, r in cands:
        rho = equator_phase_point(surface, phi0, alpha)
        if any(_angle(_param_normal(c.phi0, c.alpha), _param_normal(phi0, alpha)) < 0.1 * spacing
               for c in out):
            continue
        out.append(CriticalCandidate(phi0 % (2 * np.pi), alpha, rho, r))
    return CriticalScan(False, out, resolution)


def _param_normal(phi0, alpha):
    """Normal of the round-sphere geodesic with parameters (phi0, alpha)."""
    return np.array([np.sin(alpha) * np.sin(phi0), -np.sin(alpha) * np.cos(phi0), np.cos(alpha)])


def _angle(a, b):
    return float(np.arccos(np.clip(a @ b, -1.0, 1.0)))


def _refine(resid, phi0, alpha, step, max_iter):
    best = resid(phi0, alpha)
    for _ in range(max_iter):
        moved = False
        for dp, da in ((step, 0), (-step, 0), (0, step), (0, -step)):
            a = min(max(alpha + da, 0.0), np.pi)
            r = resid(phi0 + dp, a)
            if r < best:
                best, phi0, alpha, moved = r, phi0 + dp, a, True
                break
        if not moved:
            step *= 0.5
            if step < 1e-10:
                break
    return phi0, alpha, best


@dataclass
class CausticScan:
    zeros: list
    inside_critical: bool
    s: np.ndarray
    pairing: np.ndarray

    @property
    def message(self):
        if self.inside_critical:
            return "orbit inside Crit(L)"
        return f"{len(self.zeros)} caustic points per period"


def caustic_pairing(surface, L, rho, h=DEFAULT_STEP):
    """g(dpi X_L, dpi W) = <xi_perp, dL/dp> at rho."""
    grad = chart_gradient(L, rho, h)
    xp = geo.perp(surface, rho)
    return float(xp[0] * grad[2] + xp[1] * grad[3])


def caustic_scan(surface, V, rho0, n_grid=64, L=None, xtol=1e-8, zero_tol=1e-9):
    """Zeros of the caustic pairing along one period of the geodesic through rho0.

    ``L`` overrides the function whose flow defines the invariant torus; by
    default L = I(V).
    """
    rho0 = np.asarray(rho0, dtype=float)
    if L is None:
        tol = _grad_tol(surface)
        L = lambda r: radon(surface, V, r, tol=tol)  # noqa: E731
    period = surface.period / geo.covector_norm(surface, rho0)

    nudge = 1e-2 * period / n_grid

    def F(s):
        try:
            return caustic_pairing(surface, L, gd.flow(surface, rho0, s))
        except geo.ChartError:
            # sample on a chart pole: the pairing is continuous, step off it
            return caustic_pairing(surface, L, gd.flow(surface, rho0, s + nudge))

    s = period * np.arange(n_grid + 1) / n_grid
    vals = np.array([F(x) for x in s[:-1]] + [0.0])
    vals[-1] = vals[0]
    scale = max(1.0, float(np.max(np.abs(vals))))
    if np.max(np.abs(vals)) < zero_tol:
        return CausticScan([], True, s, vals)
    zeros = []
    for k in range(n_grid):
        a, b = vals[k], vals[k + 1]
        if a == 0.0:
            zeros.append(float(s[k]))
        elif a * b < 0 and abs(a) + abs(b) > zero_tol * scale:
            zeros.append(float(brentq(F, s[k], s[k + 1], xtol=xtol)))
    return CausticScan(zeros, False, s, vals)
