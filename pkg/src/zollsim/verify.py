"""Structural invariant suite run by ``zollsim verify``.

Each check returns the worst observed defect and the tolerance it is held
to; ``run_suite`` collects them into ``CheckResult`` rows.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import evolve as ev
from . import geodesic as gd
from . import geometry as geo
from . import radon as rd
from . import spectral as sp
from . import zelditch as zd
from .potential import Potential


@dataclass
class CheckResult:
    module: str
    name: str
    defect: float
    tol: float
    seconds: float

    @property
    def passed(self):
        return bool(np.isfinite(self.defect) and self.defect <= self.tol)

    def line(self):
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag}  {self.module}.{self.name}: defect {self.defect:.3e} (tol {self.tol:.1e})"


def fixture_surfaces():
    return [
        geo.ZollSurface.canonical(),
        geo.ZollSurface.tannery(geo.RevolutionProfile.cubic(0.3)),
        geo.ZollSurface.tannery([0.2, -0.1, -0.1]),
    ]


# geometry -------------------------------------------------------------------

def _round_curvature(rng):
    th = np.linspace(1e-3, np.pi - 1e-3, 1000)
    return np.max(np.abs(geo.curvature(geo.ZollSurface.canonical(), th) - 1)), 1e-15


def _equator_curvature(rng):
    return max(abs(geo.curvature(s, np.pi / 2) - 1) for s in fixture_surfaces()), 1e-15


def _perp_isometry(rng):
    worst = 0.0
    for s in fixture_surfaces():
        th = np.arccos(rng.uniform(-0.99, 0.99, 10_000))
        rho = np.column_stack([th, rng.uniform(0, 2 * np.pi, th.size), rng.normal(size=(th.size, 2))])
        xi, xp = rho[:, 2:], geo.perp(s, rho)
        nrm = geo.cometric(s, rho, xi, xi)
        worst = max(worst, np.max(np.abs(geo.cometric(s, rho, xi, xp)) / nrm),
                    np.max(np.abs(geo.cometric(s, rho, xp, xp) - nrm) / nrm))
    return worst, 1e-12


def _gauss_bonnet(rng):
    return max(abs(geo.gauss_bonnet(s) - 4 * np.pi) for s in fixture_surfaces()), 1e-8


# geodesic -------------------------------------------------------------------

def _energy_and_clairaut(rng):
    worst = 0.0
    for s in fixture_surfaces()[1:]:
        for _ in range(3):
            rho = gd.random_unit_phase_point(s, rng, margin=0.2)
            for t in (-4 * np.pi, 1.3, 4 * np.pi):
                out = gd.flow(s, rho, t)
                d = max(abs(geo.hamiltonian_p0(s, out) - 0.5), abs(out[3] - rho[3]))
                worst = max(worst, d / (gd.DEFAULT_TOL * (1 + abs(t))))
    return worst, 1.0


def _group_law(rng):
    worst = 0.0
    for s in fixture_surfaces():
        rho = gd.random_unit_phase_point(s, rng, margin=0.2)
        a, b = rng.uniform(0.2, 3.0, 2)
        lhs = gd.flow(s, gd.flow(s, rho, a), b)
        worst = max(worst, gd.chart_distance(lhs, gd.flow(s, rho, a + b)))
    return worst, 2 * gd.DEFAULT_TOL


def _closure(rng):
    worst = 0.0
    for s in fixture_surfaces():
        for _ in range(4):
            worst = max(worst, gd.closure_defect(s, gd.random_unit_phase_point(s, rng)))
    return worst, 1e-6


# radon ----------------------------------------------------------------------

def _radon_flow_invariance(rng):
    V = Potential.from_expression("x3**2 + 0.4*x1*x2 + 0.2*x1")
    worst = 0.0
    for s in fixture_surfaces():
        rho = gd.random_unit_phase_point(s, rng, margin=0.2)
        base = rd.radon(s, V, rho)
        for t in (0.3, 1.7, np.pi):
            worst = max(worst, abs(rd.radon(s, V, gd.flow(s, rho, t)) - base))
    return worst, 1e-9


def _radon_homogeneity(rng):
    V = Potential.from_expression("x3**2 + 0.3*x1*x3")
    worst = 0.0
    for s in fixture_surfaces():
        rho = gd.random_unit_phase_point(s, rng, margin=0.2)
        for lam in (0.5, 2.0, 10.0):
            worst = max(worst, rd.radon_is_homogeneous(s, V, rho, lam))
    return worst, 1e-9


def _commuting_flows(rng):
    s2 = geo.ZollSurface.canonical()
    V = Potential.from_expression("x3**2 + 0.5*x1**2")
    rho = rd.phase_point_from_normal([0.3, 0.4, 0.8])
    sg, t = 1.1, 0.6
    a = gd.flow(s2, rd.effective_flow(s2, V, rho, t), sg)
    b = rd.effective_flow(s2, V, gd.flow(s2, rho, sg), t)
    energy = abs(geo.hamiltonian_p0(s2, rd.effective_flow(s2, V, rho, t)) - 0.5)
    return max(gd.chart_distance(a, b), energy), 10 * rd.DEFAULT_FLOW_TOL


# zelditch -------------------------------------------------------------------

def _wronskian(rng):
    worst = 0.0
    for s in fixture_surfaces():
        for rho in (zd.equator_point(s), zd.meridian_point(s), zd.tilted_point(s, 0.7)):
            jac = zd.jacobi_solve(s, rho, 512)
            worst = max(worst, np.max(np.abs(jac.wronskian() - 1)))
    return worst, 1e-8


# spectral -------------------------------------------------------------------

def _gram(rng):
    b = sp.HarmonicBasis(24)
    Y = np.stack([sp.synthesize(b, np.eye(b.size)[k]) for k in range(b.size)])
    w = b.area_weights()
    gram = np.einsum("ajk,bjk,jk->ab", Y.conj(), Y, w)
    return np.max(np.abs(gram - np.eye(b.size))), 1e-12


def _round_trip_parseval(rng):
    b = sp.HarmonicBasis(40)
    c = rng.normal(size=b.size) + 1j * rng.normal(size=b.size)
    f = sp.synthesize(b, c)
    rt = np.max(np.abs(sp.analyze(b, f).coeffs - c)) / np.max(np.abs(c))
    pars = abs(b.integrate(np.abs(f) ** 2) - np.vdot(c, c).real) / np.vdot(c, c).real
    return max(rt, pars), 1e-11


def _hermitian_and_average(rng):
    b = sp.HarmonicBasis(30)
    V = Potential.from_expression("x3**2 + 0.7*x1*x2 - 0.2*x2 + x1**3")
    H = sp.hamiltonian_matrix(b, 0.05, 0.3, V)
    avg = sp.quantum_average(b, V).data
    free = sp.free_hamiltonian(b, 0.05).data
    comm = np.max(np.abs(avg @ free - free @ avg))
    return max(H.hermiticity_defect(), comm / max(1.0, np.abs(free).max())), 1e-12


def _eig_residual(rng):
    b = sp.HarmonicBasis(20)
    H = sp.hamiltonian_matrix(b, 0.05, 0.3, Potential.from_expression("x3**2 + x1*x2"))
    w, v = sp.eig(H)
    h = H.data
    res = np.max(np.linalg.norm(h @ v - v * w, axis=0)) / np.linalg.norm(h, 2)
    unit = np.max(np.abs(v.conj().T @ v - np.eye(len(w))))
    return max(res, unit), 1e-9


# evolve ---------------------------------------------------------------------

def _evolution_fixture():
    l = 12
    plan = ev.EvolutionPlan.for_cluster(l)
    b = sp.HarmonicBasis(plan.lmax)
    V = Potential.from_expression("x3**2 + 0.5*x1*x2")
    prop = ev.Propagator(sp.hamiltonian_matrix(b, plan.hbar, plan.eps, V), plan.hbar)
    return plan, prop, ev.geodesic_state(b, [0.2, 0.5, 0.8], l)


def _unitarity(rng):
    plan, prop, u = _evolution_fixture()
    return max(abs(prop.apply(u, T).norm - 1) for T in np.linspace(0, 3 * plan.tau, 7)), 1e-9


def _group_law_quantum(rng):
    plan, prop, u = _evolution_fixture()
    T1, T2 = 0.7 * plan.tau, 1.9 * plan.tau
    return np.max(np.abs(prop.apply(prop.apply(u, T1), T2).coeffs - prop.apply(u, T1 + T2).coeffs)), 1e-8


def _echo_bounds(rng):
    l = 12
    plan = ev.EvolutionPlan.for_cluster(l, eps_exponent=0.7, tau_law="hbar/eps^2",
                                        times=np.linspace(0, 2 * np.pi, 17))
    b = sp.HarmonicBasis(plan.lmax)
    u = ev.superposition(ev.geodesic_state(b, [0, 0, 1], l), ev.geodesic_state(b, [1, 0, 0], l))
    F = ev.loschmidt(plan, Potential.from_expression("x3**2"), u, b).values
    return max(abs(F[0] - 1), max(np.max(np.abs(F)) - 1, 0.0)), 1e-14


CHECKS: list[tuple[str, str, Callable]] = [
    ("geometry", "round_curvature", _round_curvature),
    ("geometry", "equator_curvature", _equator_curvature),
    ("geometry", "perp_isometry", _perp_isometry),
    ("geometry", "gauss_bonnet", _gauss_bonnet),
    ("geodesic", "energy_clairaut_scaled", _energy_and_clairaut),
    ("geodesic", "flow_group_law", _group_law),
    ("geodesic", "zoll_closure", _closure),
    ("radon", "flow_invariance", _radon_flow_invariance),
    ("radon", "zero_homogeneity", _radon_homogeneity),
    ("radon", "commuting_flows", _commuting_flows),
    ("zelditch", "wronskian", _wronskian),
    ("spectral", "discrete_orthonormality", _gram),
    ("spectral", "round_trip_parseval", _round_trip_parseval),
    ("spectral", "hermitian_commuting_average", _hermitian_and_average),
    ("spectral", "eig_residual_unitary", _eig_residual),
    ("evolve", "unitarity", _unitarity),
    ("evolve", "propagator_group_law", _group_law_quantum),
    ("evolve", "echo_bounds", _echo_bounds),
]


def run_suite(seed=0, only=None):
    results = []
    for module, name, fn in CHECKS:
        if only and module not in only:
            continue
        rng = np.random.default_rng([seed, len(results)])
        t0 = time.perf_counter()
        defect, tol = fn(rng)
        results.append(CheckResult(module, name, float(defect), tol, time.perf_counter() - t0))
    return results
