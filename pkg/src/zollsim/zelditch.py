"""Jacobi fields along closed geodesics and Zelditch's q0 on C_{2pi} surfaces.

Along a unit-speed closed geodesic x(t), t in [0, 2 pi]:

    q0 = 1/(8 pi) int K dt + 1/(24 pi) int Kp ft^2 R dt
    R  = ft int_0^t Kp f^3 ds - 3 f int_0^t ft Kp f^2 ds

with ft, f the Jacobi solutions of f'' + K f = 0 started at (1, 0) and
(0, 1) and Kp = g*(dK, xi_perp).  The geodesic and both Jacobi solutions are
integrated together as one ODE system and sampled on a shared uniform grid;
the inner integrals use the cumulative trapezoid rule on that grid.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid, solve_ivp, trapezoid

from . import geometry as geo
from . import geodesic as gd

DEFAULT_GRID = 2048
_TOL = 1e-11


@dataclass
class JacobiSolution:
    t: np.ndarray
    ft: np.ndarray
    dft: np.ndarray
    f: np.ndarray
    df: np.ndarray
    K: np.ndarray
    kpair: np.ndarray  # curvature pairing Kp along the geodesic
    branch: str

    def wronskian(self):
        return self.ft * self.df - self.dft * self.f


def unit_speed(surface, rho0):
    rho0 = np.array(rho0, dtype=float)
    rho0[2:] /= geo.covector_norm(surface, rho0)
    return rho0


def _jacobi_block(k, y):
    ft, dft, f, df = y
    return [dft, -k * ft, df, -k * f]


def jacobi_solve(surface, rho0, n=DEFAULT_GRID, tol=_TOL):
    """Both Jacobi solutions along the unit-speed geodesic through rho0."""
    if n < 64:
        raise ValueError("Jacobi grid needs at least 64 intervals")
    rho0 = unit_speed(surface, rho0)
    t = 2 * np.pi * np.arange(n + 1) / n
    jac0 = [1.0, 0.0, 0.0, 1.0]

    if surface.is_canonical:
        # K = 1 everywhere, so the base point is irrelevant to the Jacobi equation
        sol = solve_ivp(lambda _, y: _jacobi_block(1.0, y), (0, t[-1]), jac0,
                        method="DOP853", rtol=tol, atol=tol, t_eval=t)
        k = np.ones_like(t)
        kp = np.zeros_like(t)
        branch = "canonical"
        jac = sol.y
    elif abs(rho0[3]) < gd._MERIDIAN_TOL:
        prof = surface.profile

        def rhs(_, y):
            psi, p = y[0], y[1]
            c = np.cos(psi)
            d = 1.0 + prof(c)
            dd = -np.sin(psi) * prof.deriv(c)
            return [p / d**2, p**2 * dd / d**3, *_jacobi_block(geo.curvature(surface, psi), y[2:])]

        sol = solve_ivp(rhs, (0, t[-1]), [rho0[0], rho0[2], *jac0], method="DOP853",
                        rtol=tol, atol=tol, t_eval=t)
        k = geo.curvature(surface, sol.y[0])
        # xi_perp is along dphi and dK along dtheta on a meridian
        kp = np.zeros_like(t)
        branch = "meridian"
        jac = sol.y[2:]
    else:
        if abs(rho0[3]) < geo.POLE_MARGIN:
            raise geo.ChartError("geodesic enters the pole margin")

        def rhs(_, y):
            return [*geo.hamilton_rhs(surface, y[:4]),
                    *_jacobi_block(geo.curvature(surface, y[0]), y[4:])]

        sol = solve_ivp(rhs, (0, t[-1]), [*rho0, *jac0], method="DOP853",
                        rtol=tol, atol=tol, t_eval=t)
        rho = sol.y[:4].T
        k = geo.curvature(surface, rho[:, 0])
        kp = geo.curvature_pairing(surface, rho)
        branch = "chart"
        jac = sol.y[4:]
    if sol.status != 0:
        raise gd.GeodesicError(f"Jacobi integration failed: {sol.message}")
    return JacobiSolution(t, jac[0], jac[1], jac[2], jac[3], k, kp, branch)


def r_factor(jac):
    """R(t) sampled on the Jacobi grid."""
    kp = jac.kpair
    i1 = cumulative_trapezoid(kp * jac.f**3, jac.t, initial=0.0)
    i2 = cumulative_trapezoid(jac.ft * kp * jac.f**2, jac.t, initial=0.0)
    return jac.ft * i1 - 3.0 * jac.f * i2


def q0(surface, rho0, n=DEFAULT_GRID):
    """Zelditch's q0 at rho0 (0-homogeneous: xi is rescaled to unit speed)."""
    jac = jacobi_solve(surface, rho0, n)
    first = trapezoid(jac.K, jac.t) / (8 * np.pi)
    second = trapezoid(jac.kpair * jac.ft**2 * r_factor(jac), jac.t) / (24 * np.pi)
    return float(first + second)


def equator_point(surface, phi0=0.0, direction=1.0):
    """Unit phase point on the equator geodesic theta = pi/2."""
    return np.array([np.pi / 2, phi0, 0.0, direction])


def meridian_point(surface, theta0=np.pi / 3, phi0=0.0, direction=1.0):
    """Unit phase point on the meridian phi = phi0 (p_phi = 0)."""
    d, _ = geo.profile_factor(surface, theta0)
    return np.array([theta0, phi0, direction * d, 0.0])


def tilted_point(surface, tilt, phi0=0.0):
    """Unit phase point on the equator heading at angle ``tilt`` from east."""
    d, _ = geo.profile_factor(surface, np.pi / 2)
    return np.array([np.pi / 2, phi0, -d * np.sin(tilt), np.cos(tilt)])


def q0_sweep(surface, tilts, n=DEFAULT_GRID):
    """Rows (tilt, q0) over geodesics through the equator point phi = 0."""
    rows = []
    for a in tilts:
        rho = tilted_point(surface, a)
        if abs(np.cos(a)) < gd._MERIDIAN_TOL:
            rho = meridian_point(surface, np.pi / 2, 0.0, -np.sign(np.sin(a)) or 1.0)
        rows.append((float(a), q0(surface, rho, n)))
    return rows
