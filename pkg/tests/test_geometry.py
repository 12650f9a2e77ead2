import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from zollsim import geometry as geo
from zollsim.geometry import ChartError, RevolutionProfile, ZollSurface

angles = st.floats(0.01, np.pi - 0.01)
cubic_a = st.floats(-0.45, 0.45)


def test_metric_inverse_round_sphere(sphere):
    assert geo.metric_inverse(sphere, np.pi / 2) == pytest.approx((1.0, 1.0), abs=1e-15)
    assert geo.metric_inverse(sphere, np.pi / 4) == pytest.approx((1.0, 2.0), rel=1e-14)


def test_metric_inverse_cubic_profile(tannery):
    # sigma(1/2) = 0.3 * 0.5 * 0.75 = 0.1125
    gtt, gpp = geo.metric_inverse(tannery, np.pi / 3)
    assert gtt == pytest.approx(1.1125**-2, rel=1e-14)
    assert gpp == pytest.approx(4 / 3, rel=1e-14)


def test_curvature_values(sphere, tannery):
    th = np.linspace(1e-3, np.pi - 1e-3, 1000)
    assert np.max(np.abs(geo.curvature(sphere, th) - 1)) == 0.0
    # sigma(1/2) = 0.1125, sigma'(1/2) = 0.3 (1 - 3/4) = 0.075
    k = (1.1125 - 0.5 * 0.075) / 1.1125**3
    assert geo.curvature(tannery, np.pi / 3) == pytest.approx(k, rel=1e-14)
    assert geo.curvature(tannery, np.pi / 3) == pytest.approx(0.7807, abs=5e-5)


@given(a=cubic_a)
def test_equator_curvature_is_one(a):
    s = ZollSurface.tannery(RevolutionProfile.cubic(a))
    assert geo.curvature(s, np.pi / 2) == pytest.approx(1.0, abs=1e-15)


@given(a=cubic_a, th=angles)
def test_curvature_derivative_matches_finite_difference(a, th):
    s = ZollSurface.tannery(RevolutionProfile.cubic(a))
    h = 1e-5
    fd = (geo.curvature(s, th + h) - geo.curvature(s, th - h)) / (2 * h)
    assert geo.curvature_dtheta(s, th) == pytest.approx(fd, abs=1e-8)


def test_perp_examples(sphere):
    rho = np.array([np.pi / 2, 0.0, 1.0, 0.0])
    xp = geo.perp(sphere, rho)
    assert geo.cometric(sphere, rho, rho[2:], xp) == pytest.approx(0.0, abs=1e-15)
    assert geo.cometric(sphere, rho, xp, xp) == pytest.approx(1.0)
    twice = geo.perp(sphere, np.r_[rho[:2], xp])
    np.testing.assert_allclose(twice, -rho[2:], atol=1e-15)


def test_perp_isometry_random(any_surface, rng):
    n = 10_000
    th = np.arccos(rng.uniform(-0.99, 0.99, n))
    rho = np.column_stack([th, rng.uniform(0, 2 * np.pi, n), rng.normal(size=(n, 2))])
    xi, xp = rho[:, 2:], geo.perp(any_surface, rho)
    nrm = geo.cometric(any_surface, rho, xi, xi)
    assert np.max(np.abs(geo.cometric(any_surface, rho, xi, xp)) / nrm) < 1e-12
    assert np.max(np.abs(geo.cometric(any_surface, rho, xp, xp) / nrm - 1)) < 1e-12


def test_perp_orientation(tannery):
    # (xi, xi_perp) positively oriented for d theta ^ d phi after raising indices
    rho = np.array([1.1, 0.3, 0.4, 0.2])
    gtt, gpp = geo.metric_inverse(tannery, rho[0])
    xp = geo.perp(tannery, rho)
    a = np.array([gtt * rho[2], gpp * rho[3]])
    b = np.array([gtt * xp[0], gpp * xp[1]])
    assert a[0] * b[1] - a[1] * b[0] > 0


def test_perp_zero_covector(sphere):
    with pytest.raises(ValueError):
        geo.perp(sphere, [1.0, 0.0, 0.0, 0.0])


def test_curvature_pairing(sphere, tannery, rng):
    rho = np.array([1.0, 0.2, 0.3, 0.7])
    assert geo.curvature_pairing(sphere, rho) == 0.0
    doubled = np.r_[rho[:2], 2 * rho[2:]]
    assert geo.curvature_pairing(tannery, doubled) == pytest.approx(2 * geo.curvature_pairing(tannery, rho))
    # xi along d theta: xi_perp is along d phi, so the pairing with dK (a d theta form) vanishes
    assert geo.curvature_pairing(tannery, [1.0, 0.0, 1.0, 0.0]) == pytest.approx(0.0, abs=1e-15)
    # xi along d phi: pairing is g^{tt} dK/dtheta times the d theta part of xi_perp
    h = 1e-6
    dk = (geo.curvature(tannery, 1.0 + h) - geo.curvature(tannery, 1.0 - h)) / (2 * h)
    gtt, _ = geo.metric_inverse(tannery, 1.0)
    d, _ = geo.profile_factor(tannery, 1.0)
    expected = gtt * dk * (-1.0 * d / np.sin(1.0))
    assert geo.curvature_pairing(tannery, [1.0, 0.0, 0.0, 1.0]) == pytest.approx(expected, rel=1e-8)


def test_hamiltonian(sphere, tannery, rng):
    assert geo.hamiltonian_p0(sphere, [np.pi / 2, 0, 0, 1]) == pytest.approx(0.5)
    rho = np.array([0.9, 1.0, 0.3, -0.4])
    gtt, gpp = geo.metric_inverse(tannery, rho[0])
    assert abs(geo.hamiltonian_p0(tannery, rho) - 0.5 * (gtt * 0.09 + gpp * 0.16)) < 1e-14
    scaled = np.r_[rho[:2], 3 * rho[2:]]
    assert geo.hamiltonian_p0(tannery, scaled) == pytest.approx(9 * geo.hamiltonian_p0(tannery, rho))


@settings(max_examples=30)
@given(odd=st.lists(st.floats(-0.3, 0.3), min_size=1, max_size=3))
def test_gauss_bonnet_for_admissible_profiles(odd):
    odd = list(odd) + [-sum(odd)]
    try:
        s = ZollSurface.tannery(odd)
    except ValueError:
        return  # not positive; rejected at construction
    assert abs(geo.gauss_bonnet(s) - 4 * np.pi) < 1e-8
    th = np.linspace(0.01, np.pi - 0.01, 200)
    assert np.all(np.asarray(geo.metric_inverse(s, th)) > 0)


def test_profile_validation():
    with pytest.raises(ValueError, match="odd"):
        RevolutionProfile((0.1, 0.2, 0.0, -0.2))
    with pytest.raises(ValueError, match="sigma\\(1\\)"):
        RevolutionProfile.from_odd([0.3])
    with pytest.raises(ValueError, match="positive"):
        RevolutionProfile.from_odd([3.0, -3.0])
    with pytest.raises(ValueError):
        ZollSurface("canonical", RevolutionProfile.cubic(0.1))


def test_chart_margin(sphere):
    with pytest.raises(ChartError):
        geo.metric_inverse(sphere, 1e-8)
    with pytest.raises(ChartError):
        geo.curvature_pairing(sphere, [np.pi, 0, 1, 0])


def test_surface_record_roundtrip(tannery, sphere):
    for s in (tannery, sphere):
        assert ZollSurface.from_record(s.to_record()) == s


def test_ambient_roundtrip(rng):
    rho = np.column_stack([np.arccos(rng.uniform(-0.9, 0.9, 50)), rng.uniform(0, 2 * np.pi, 50),
                           rng.normal(size=(50, 2))])
    x, v = geo.sphere_to_ambient(rho)
    np.testing.assert_allclose(np.sum(x * v, axis=1), 0, atol=1e-14)
    np.testing.assert_allclose(geo.sphere_from_ambient(x, v), rho, atol=1e-12)
