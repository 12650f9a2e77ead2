import numpy as np
import pytest

from zollsim import evolve as ev
from zollsim import spectral as sp
from zollsim.potential import Potential


@pytest.fixture(scope="module")
def small():
    l = 12
    plan = ev.EvolutionPlan.for_cluster(l)
    basis = sp.HarmonicBasis(plan.lmax)
    V = Potential.from_expression("x3**2 + 0.5*x1*x2")
    H = sp.hamiltonian_matrix(basis, plan.hbar, plan.eps, V)
    return l, plan, basis, ev.Propagator(H, plan.hbar)


# plans ----------------------------------------------------------------------

def test_plan_defaults():
    plan = ev.EvolutionPlan.for_cluster(20)
    assert plan.hbar == pytest.approx(1 / np.sqrt(420))
    assert plan.eps == pytest.approx(plan.hbar**0.5)
    assert plan.lmax == 20 + ev.LMAX_PAD
    assert plan.tau == pytest.approx(plan.eps**-2)


@pytest.mark.parametrize("law", ev.TAU_LAWS)
def test_tau_laws(law):
    plan = ev.EvolutionPlan(0.05, 0.1, law, lmax=4, tau_const=3.0)
    expected = {"eps^-2": 100.0, "hbar/eps^2": 5.0, "const*eps^-2": 300.0, "value": 3.0}[law]
    assert plan.tau == pytest.approx(expected)


@pytest.mark.parametrize("kwargs", [dict(hbar=0, eps=0.1), dict(hbar=0.1, eps=-1.0),
                                    dict(hbar=0.1, eps=0.1, tau_law="bogus"),
                                    dict(hbar=0.1, eps=0.1, lmax=0)])
def test_plan_rejects(kwargs):
    kwargs.setdefault("lmax", 4)
    with pytest.raises(ev.PlanError):
        ev.EvolutionPlan(**kwargs)


def test_zero_eps_needs_value_law():
    with pytest.raises(ev.PlanError):
        ev.EvolutionPlan(0.1, 0.0, "eps^-2", lmax=4).tau
    assert ev.EvolutionPlan(0.1, 0.0, "value", lmax=4, tau_const=2.0).tau == 2.0


def test_echo_regime_validation():
    with pytest.raises(ev.PlanError):
        ev.EvolutionPlan.for_cluster(20, eps_exponent=0.5).validate_echo()
    ev.EvolutionPlan.for_cluster(20, eps_exponent=0.7).validate_echo()
    with pytest.raises(ev.PlanError):
        ev.EvolutionPlan(0.01, 0.2, lmax=4).validate_echo()


# propagation ----------------------------------------------------------------

def test_zero_time_is_exact_copy(small):
    l, plan, basis, prop = small
    u = ev.geodesic_state(basis, [0.3, 0.1, 0.9], l)
    out = prop.apply(u, 0.0)
    assert np.array_equal(out.coeffs, u.coeffs)
    assert out.coeffs is not u.coeffs


def test_eigenvector_is_stationary(small):
    l, plan, basis, prop = small
    w, v = prop.decomposition.dense()
    k = np.argmin(np.abs(w - 0.5))
    u = sp.HarmonicState(v[:, k].copy(), basis.lmax)
    T = 3.7 * plan.tau
    out = prop.apply(u, T)
    np.testing.assert_allclose(out.coeffs, np.exp(-1j * T * w[k] / plan.hbar) * u.coeffs,
                               atol=1e-10)


def test_group_law_and_unitarity(small):
    l, plan, basis, prop = small
    u = ev.geodesic_state(basis, [0.6, -0.2, 0.7], l)
    a, b = 0.4 * plan.tau, 1.3 * plan.tau
    np.testing.assert_allclose(prop.apply(prop.apply(u, a), b).coeffs,
                               prop.apply(u, a + b).coeffs, atol=1e-9)
    assert prop.apply(u, b).norm == pytest.approx(1.0, abs=1e-12)


def test_propagate_accepts_matrix(small):
    l, plan, basis, prop = small
    u = ev.geodesic_state(basis, [0, 0, 1], l)
    H = sp.free_hamiltonian(basis, plan.hbar)
    out = ev.propagate(H, plan.hbar, u, 2.0)
    lam = 0.5 * plan.hbar**2 * l * (l + 1)
    np.testing.assert_allclose(out.coeffs, np.exp(-2j * lam / plan.hbar) * u.coeffs, atol=1e-12)


# states and densities -------------------------------------------------------

def test_north_geodesic_state_is_top_weight():
    basis = sp.HarmonicBasis(14)
    u = ev.geodesic_state(basis, [0, 0, 1], 10)
    k = basis.index(10, 10)
    assert abs(u.coeffs[k]) == pytest.approx(1.0, abs=1e-12)
    assert np.linalg.norm(np.delete(u.coeffs, k)) < 1e-12


@pytest.mark.parametrize("n", [[0, 0, 1], [1, 0, 0], [0.3, -0.5, 0.81]])
def test_geodesic_state_lives_in_one_cluster(n):
    basis = sp.HarmonicBasis(16)
    u = ev.geodesic_state(basis, n, 9)
    w = u.shell_weights()
    assert w[9] == pytest.approx(1.0, abs=1e-12)
    assert ev.truncation_weight(u) < 1e-20


def test_geodesic_state_rejects_high_degree():
    with pytest.raises(ValueError):
        ev.geodesic_state(sp.HarmonicBasis(5), [0, 0, 1], 6)


def test_equator_state_concentrates():
    basis = sp.HarmonicBasis(24)
    dens = ev.position_density(basis, ev.geodesic_state(basis, [0, 0, 1], 20))
    assert dens.total() == pytest.approx(1.0, abs=1e-12)
    assert ev.tube_mass(dens, [0, 0, 1], 0.35) > 0.95
    # axisymmetric, peaked on the equator
    v = dens.values
    assert np.max(np.abs(v - v[:, :1])) < 1e-12 * v.max()
    th = np.arccos(dens.basis.points()[:, 0, 2])
    assert abs(th[np.argmax(v[:, 0])] - np.pi / 2) < 0.1


def test_density_mean_mode():
    basis = sp.HarmonicBasis(10)
    dens = ev.position_density(basis, ev.geodesic_state(basis, [1, 2, 2], 7))
    c00 = sp.analyze(dens.basis, dens.values).coeffs[0]
    assert c00 == pytest.approx(1 / np.sqrt(4 * np.pi), abs=1e-12)


def test_uniform_tube_masses():
    dens = ev.uniform_density(8)
    # |n.x| <= 1/2 covers half the sphere
    assert ev.tube_mass(dens, [0, 0, 1], np.pi / 6) == pytest.approx(0.5, abs=1e-12)
    for w in (0.1, 0.5, 1.2):
        assert ev.tube_mass(dens, [1, 1, 0], w) == pytest.approx(np.sin(w), abs=1e-12)


def test_tube_mass_matches_quadrature():
    basis = sp.HarmonicBasis(16)
    dens = ev.position_density(basis, ev.geodesic_state(basis, [0.2, 0.4, 0.9], 12))
    exact = ev.tube_mass(dens, [0.2, 0.4, 0.9] / np.linalg.norm([0.2, 0.4, 0.9]), 0.4)
    approx = ev.tube_mass_quadrature(dens, [0.2, 0.4, 0.9] / np.linalg.norm([0.2, 0.4, 0.9]), 0.4)
    assert abs(exact - approx) < 0.03


def test_far_tube_is_nearly_empty():
    basis = sp.HarmonicBasis(36)
    dens = ev.position_density(basis, ev.geodesic_state(basis, [0, 0, 1], 30))
    # a steeply tilted thin tube meets the equator only near +-e2
    assert ev.tube_mass(dens, [0, 0, 1], 0.3) > 0.95
    assert ev.tube_mass(dens, [np.sin(1.2), 0, np.cos(1.2)], 0.05) < 0.2


def test_tube_rejects_bad_width():
    with pytest.raises(ValueError):
        ev.tube_mass(ev.uniform_density(4), [0, 0, 1], np.pi / 2)


@pytest.mark.parametrize("n", [[0, 0, 1], [0.8, 0.0, 0.6], [0.3, -0.5, 0.81]])
def test_circle_fit_recovers_normal(n):
    basis = sp.HarmonicBasis(36)
    dens = ev.position_density(basis, ev.geodesic_state(basis, n, 30))
    fit = ev.circle_fit(dens)
    assert ev.angle_between_normals(fit, n) < 0.02
    assert fit[2] >= 0


def test_circle_fit_isotropic_sentinel():
    assert ev.circle_fit(ev.uniform_density(6)) is None


def test_circle_fit_mixture_follows_majority():
    basis = sp.HarmonicBasis(26)
    a = ev.position_density(basis, ev.geodesic_state(basis, [0, 0, 1], 20))
    b = ev.position_density(basis, ev.geodesic_state(basis, [1, 0, 0], 20))
    fit = ev.circle_fit(0.9 * a + 0.1 * b)
    assert ev.angle_between_normals(fit, [0, 0, 1]) < 1e-8


def test_angle_between_unoriented_normals():
    assert ev.angle_between_normals([0, 0, 1], [0, 0, -2]) == pytest.approx(0.0)
    assert ev.angle_between_normals([0, 0, 1], [1, 0, 0]) == pytest.approx(np.pi / 2)


def test_shrinking_halfwidth():
    assert ev.shrinking_halfwidth(20) == pytest.approx(0.35)
    assert ev.shrinking_halfwidth(80) == pytest.approx(0.175)


def test_truncation_check():
    ev.check_truncation(1e-9)
    with pytest.raises(ev.PlanError):
        ev.check_truncation(1e-8)


# transport ------------------------------------------------------------------

def test_transport_rejects_other_tau_law():
    plan = ev.EvolutionPlan.for_cluster(10, tau_law="hbar/eps^2")
    with pytest.raises(ev.PlanError):
        ev.transport_experiment(plan, Potential.from_expression("x3**2"), [0, 0, 1], 10)


def test_odd_potential_does_not_move_circle():
    l = 20
    plan = ev.EvolutionPlan.for_cluster(l, times=np.linspace(0, 1, 5))
    n0 = [np.sqrt(0.75), 0, 0.5]
    rep = ev.transport_experiment(plan, Potential.from_expression("x3 + x1*x2*x3"), n0, l)
    np.testing.assert_allclose(rep.predicted, np.tile(n0, (5, 1)), atol=1e-9)
    assert rep.angular_error.max() < 0.05
    assert rep.rows().shape == (5, len(rep.header))


def test_axial_potential_keeps_polar_angle():
    l = 20
    plan = ev.EvolutionPlan.for_cluster(l, times=np.linspace(0, 1, 5))
    rep = ev.transport_experiment(plan, Potential.from_expression("x3**2"),
                                  [np.sqrt(0.75), 0, 0.5], l)
    assert np.max(np.abs(rep.predicted[:, 2] - 0.5)) < 1e-9
    assert np.max(np.abs(rep.fitted[:, 2] - 0.5)) < 0.05
    assert rep.max_truncation < ev.TRUNCATION_LIMIT
    assert rep.tube_mass.min() > 0.9


# echo -----------------------------------------------------------------------

def _echo_plan(l, times=np.linspace(0, 2 * np.pi, 9)):
    return ev.EvolutionPlan.for_cluster(l, eps_exponent=0.7, tau_law="hbar/eps^2", times=times)


def test_echo_constant_potential_is_pure_phase():
    l = 12
    plan = _echo_plan(l)
    basis = sp.HarmonicBasis(plan.lmax)
    u = ev.geodesic_state(basis, [0.3, 0.4, 0.8], l)
    c = 0.7
    F = ev.loschmidt(plan, Potential.constant(c), u, basis).values
    # P_eps = P_0 + eps^2 c, so F(t) = exp(i t tau eps^2 c / hbar) = exp(i t c)
    np.testing.assert_allclose(F, np.exp(1j * plan.times * c), atol=1e-12)


def test_echo_without_perturbation_is_one():
    l = 10
    plan = ev.EvolutionPlan(sp.hbar_for_cluster(l), 0.0, "value",
                            np.linspace(0, 5, 6), l + ev.LMAX_PAD, tau_const=3.0)
    basis = sp.HarmonicBasis(plan.lmax)
    u = ev.geodesic_state(basis, [1, 0, 0], l)
    F = ev.loschmidt(plan, Potential.from_expression("x3**2"), u, basis).values
    np.testing.assert_allclose(F, 1.0, atol=1e-14)


def test_echo_bounded_and_starts_at_one():
    l = 14
    plan = _echo_plan(l)
    basis = sp.HarmonicBasis(plan.lmax)
    u = ev.superposition(ev.geodesic_state(basis, [0, 0, 1], l),
                         ev.geodesic_state(basis, [1, 0, 0], l))
    series = ev.loschmidt(plan, Potential.from_expression("x3**2 + 0.3*x1*x2"), u, basis)
    assert series.values[0] == pytest.approx(1.0, abs=1e-14)
    assert np.all(np.abs(series.values) <= 1 + 1e-12)
    assert series.rows().shape == (len(plan.times), 5)


def test_echo_prediction_formula():
    t = np.linspace(0, 2 * np.pi, 7)
    F = ev.echo_prediction([0.5, 0.0], [1, 1], t)
    np.testing.assert_allclose(np.abs(F), np.abs(np.cos(t / 4)), atol=1e-15)
    np.testing.assert_allclose(ev.echo_prediction([1.3], [2.0], t), np.exp(1.3j * t))


def test_superposition_is_normalized():
    basis = sp.HarmonicBasis(8)
    u = ev.superposition(ev.geodesic_state(basis, [0, 0, 1], 5),
                         ev.geodesic_state(basis, [0, 1, 0], 5))
    assert u.norm == pytest.approx(1.0)
