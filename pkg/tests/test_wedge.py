import logging

import numpy as np
import pytest

from solvers.wedge import (
    MatrixFactor, WedgeSpec, apex_limit, build_matrix_factors, chi_closed, chi_series, eval_wedge_field,
    factorization_residual, far_field_amplitude, plus_at_origin, solve_wedge_rhp, wedge_rhp_residual,
)
from utils.errors import DomainError
from utils.profiles import PowerProfile

RIGHT = np.pi / 2


def closed_t_inf(lam, angle, t1, t2):
    share = 2.0 * np.arctan(lam ** (-np.pi / (2.0 * angle))) / np.pi
    return share * t1 + (1.0 - share) * t2


@pytest.fixture(scope="module")
def benchmark():
    return solve_wedge_rhp(WedgeSpec(RIGHT, 1.0, 2.0, 0.0, 1.0))


@pytest.fixture(scope="module")
def forced_spec():
    return WedgeSpec.power_law(RIGHT, 1.0, 2.0, t1=0.2, t2=1.0, c=(0.3, 0.2), gamma=(1.0, 0.5),
                               d=(0.1, 0.0), kappa=(3.0, 2.0))


@pytest.fixture(scope="module")
def forced(forced_spec):
    return solve_wedge_rhp(forced_spec)


def test_spec_rejects_inverted_ratio():
    with pytest.raises(DomainError):
        WedgeSpec(RIGHT, 2.0, 1.0)


def test_spec_rejects_bad_mu_and_profiles():
    with pytest.raises(DomainError):
        WedgeSpec(RIGHT, 1.0, 2.0, mu=(0, 0))
    with pytest.raises(DomainError):
        WedgeSpec(RIGHT, 1.0, 2.0, f1_profile=PowerProfile(1.0, 1.0, 1.0))
    with pytest.raises(DomainError):
        WedgeSpec(RIGHT, 1.0, 2.0, t2_profile=PowerProfile(1.0, 1.0, 1.0))


def test_sigma_outside_strip_is_clipped(caplog):
    spec = WedgeSpec(RIGHT, 1.0, 2.0, sigma=1.5)
    with caplog.at_level(logging.WARNING):
        assert spec.strip_sigma() == pytest.approx(0.5)
    assert "outside" in caplog.text
    assert WedgeSpec(RIGHT, 1.0, 2.0, sigma=0.3).strip_sigma() == 0.3


def test_factor_rejects_ratio_below_one():
    with pytest.raises(DomainError):
        MatrixFactor('plus', 0.5, RIGHT)


@pytest.mark.parametrize("which", ["first", "second"])
@pytest.mark.parametrize("mu", [0, 1])
def test_series_matches_closed_form(which, mu):
    rng = np.random.default_rng(7)
    s = rng.uniform(0.05, 0.9, 10) + 1j * rng.uniform(-10.0, 10.0, 10)
    series = chi_series(s, mu, which, 2.0, RIGHT)
    closed = chi_closed(s, mu, which, 2.0, RIGHT)
    np.testing.assert_allclose(series, closed, rtol=1e-10)


def test_series_at_unit_ratio_uses_closed_form():
    s = np.array([0.3 + 1.0j, 0.2 - 4.0j])
    np.testing.assert_allclose(chi_series(s, 1, 'second', 1.0, 1.0), chi_closed(s, 1, 'second', 1.0, 1.0))


def test_series_rejects_gamma_pole():
    with pytest.raises(DomainError):
        chi_series(0.0, 0, 'first', 2.0, RIGHT)
    with pytest.raises(DomainError):
        chi_series(2.0, 0, 'second', 2.0, RIGHT)


@pytest.mark.parametrize("lam, angle", [(2.0, RIGHT), (1.0, RIGHT), (3.0, 1.2), (1.5, 4.0)])
def test_plus_factor_at_origin(lam, angle):
    plus = MatrixFactor('plus', lam, angle)
    x0 = plus(0.0)
    root = lam ** (-np.pi / (2 * angle))
    assert x0[1, 0] == pytest.approx(2 * np.arctan(root), abs=1e-10)
    assert x0[1, 1] == pytest.approx(2 / root + 2 * np.arctan(root), abs=1e-10)
    assert x0[0, 0] == pytest.approx(-np.pi + x0[1, 0], abs=1e-10)
    assert x0[0, 1] == pytest.approx(-np.pi + x0[1, 1], abs=1e-10)
    np.testing.assert_allclose(x0, plus_at_origin(lam, angle), atol=1e-10)
    assert np.linalg.det(x0) == pytest.approx(-2 * np.pi / root, abs=1e-10)


def test_factorization_identity_on_contour():
    plus, minus = build_matrix_factors(WedgeSpec(RIGHT, 1.0, 2.0))
    s = 0.5 + 1j * np.linspace(-20.0, 20.0, 30)
    assert factorization_residual(plus, minus, s) < 1e-8
    assert plus.det_error(s) < 1e-9 * abs(plus.det)
    assert minus.det_error(s) < 1e-9 * abs(minus.det)


def test_factor_outside_its_half_plane_rejected():
    plus, minus = build_matrix_factors(WedgeSpec(RIGHT, 1.0, 2.0))
    with pytest.raises(DomainError):
        plus(1.2)
    with pytest.raises(DomainError):
        minus(-0.3)


@pytest.mark.parametrize("lam, angle, t1, t2", [(2.0, RIGHT, 0.0, 1.0), (3.0, 1.0, 0.0, 2.0),
                                                (2.0, 4.5, 0.7, -0.4)])
def test_temperature_at_infinity_closed_form(lam, angle, t1, t2):
    solution = solve_wedge_rhp(WedgeSpec(angle, 1.0, lam, t1, t2))
    assert solution.t_inf == pytest.approx(closed_t_inf(lam, angle, t1, t2), abs=1e-12)


def test_equal_segments_give_mean_level():
    solution = solve_wedge_rhp(WedgeSpec(1.3, 1.5, 1.5, 0.0, 1.0))
    assert solution.t_inf == pytest.approx(0.5, abs=1e-12)


def test_benchmark_temperature_at_infinity(benchmark):
    assert benchmark.t_inf == pytest.approx(1 - 2 / np.pi * np.arctan(0.5), abs=1e-12)
    assert benchmark.growth_residual() < 1e-12


def test_boundary_relation_residual(forced):
    assert wedge_rhp_residual(forced, np.linspace(-20.0, 20.0, 50)) < 1e-8


def test_inadmissible_poles_removed(forced):
    residues = forced.pole_residues()
    assert len(residues) == 4
    assert max(residues.values()) < 1e-8


def test_residue_and_quadrature_splits_agree(forced_spec, forced):
    quadrature = solve_wedge_rhp(forced_spec, method='quadrature')
    assert quadrature.t_inf == pytest.approx(forced.t_inf, abs=1e-7)
    s = np.array([0.1 + 1.0j, 0.5 + 0.7j, 0.9 - 2.0j])
    np.testing.assert_allclose(quadrature.v(s), forced.v(s), atol=1e-6)


def test_near_and_far_routes_agree(forced):
    r = np.array([0.5, 1.5, 3.0])
    theta = RIGHT / 3
    near = eval_wedge_field(forced, r, theta, route='near')
    far = eval_wedge_field(forced, r, theta, route='far')
    np.testing.assert_allclose(near, far, atol=1e-8)


def test_field_independent_of_column_assignment(forced_spec, forced):
    swapped = solve_wedge_rhp(WedgeSpec.power_law(RIGHT, 1.0, 2.0, t1=0.2, t2=1.0, c=(0.3, 0.2),
                                                  gamma=(1.0, 0.5), d=(0.1, 0.0), kappa=(3.0, 2.0),
                                                  mu=(1, 0)))
    assert swapped.t_inf == pytest.approx(forced.t_inf, abs=1e-10)
    r = np.tile([0.4, 0.8, 1.5, 2.5, 4.0], 2)
    theta = np.repeat([RIGHT / 4, RIGHT / 2], 5)
    np.testing.assert_allclose(eval_wedge_field(swapped, r, theta), eval_wedge_field(forced, r, theta), atol=1e-6)


def test_apex_limit(benchmark):
    for theta in (RIGHT / 4, RIGHT / 2, 3 * RIGHT / 4):
        u = eval_wedge_field(benchmark, 1e-3, theta)[0]
        assert u == pytest.approx(apex_limit(benchmark, theta), abs=1e-3)


def test_far_field_decay(benchmark):
    r = np.array([20.0, 40.0, 80.0])
    u = eval_wedge_field(benchmark, r, RIGHT / 4)
    slope = np.polyfit(np.log(r), np.log(np.abs(u)), 1)[0]
    assert slope == pytest.approx(-np.pi / RIGHT, rel=0.05)
    amplitude = far_field_amplitude(benchmark)
    assert u[1] == pytest.approx(amplitude * np.cos(np.pi / 4) * 40.0 ** (-2), rel=1e-3)


def test_midline_far_field_decays_faster(benchmark):
    r = np.array([10.0, 20.0, 40.0])
    u = eval_wedge_field(benchmark, r, RIGHT / 2)
    assert np.all(np.abs(u) > 0)
    slope = np.polyfit(np.log(r), np.log(np.abs(u)), 1)[0]
    assert slope == pytest.approx(-2 * np.pi / RIGHT, rel=0.1)


def test_edge_flux_transform_decays_like_inverse_root(benchmark):
    tau = np.array([1e2, 1e3, 1e4])
    phi = benchmark.phi_minus(benchmark.sigma + 1j * tau)
    for component in phi:
        slope = np.polyfit(np.log(tau), np.log(np.abs(component)), 1)[0]
        assert slope == pytest.approx(-0.5, abs=0.05)


def test_field_rejects_bad_points(benchmark):
    with pytest.raises(DomainError):
        eval_wedge_field(benchmark, 0.0, 0.3)
    with pytest.raises(DomainError):
        eval_wedge_field(benchmark, 1.0, 2.0)
    with pytest.raises(DomainError):
        eval_wedge_field(benchmark, 1.0, 0.3, route='middle')


@pytest.mark.slow
def test_dirichlet_data_recovered(forced):
    r = np.array([0.3, 0.7])
    u1 = eval_wedge_field(forced, r, 0.0)
    np.testing.assert_allclose(u1, 0.2 + 0.3 * r - forced.t_inf, atol=1e-4)
    r2 = np.array([0.5, 1.5])
    u2 = eval_wedge_field(forced, r2, RIGHT, route='near')
    np.testing.assert_allclose(u2, 1.0 + 0.2 * np.sqrt(r2 / 2.0) - forced.t_inf, atol=1e-4)


@pytest.mark.slow
def test_flux_data_recovered(forced):
    r = np.array([1.5, 3.0])
    np.testing.assert_allclose(forced.normal_flux(r, side=1), 0.1 * r ** -4.0, atol=1e-4)
    np.testing.assert_allclose(forced.normal_flux(np.array([3.0]), side=2), 0.0, atol=1e-4)


@pytest.mark.slow
def test_matches_finite_difference_oracle(benchmark):
    from solvers.oracle_fd import laplace_wedge_fd
    oracle = laplace_wedge_fd(benchmark.spec)
    assert oracle.meta['far_field'] == pytest.approx(benchmark.t_inf, abs=oracle.tolerance(1e-2))
    r = np.array([1.5, 0.5, 3.0])
    theta = np.array([RIGHT / 4, RIGHT / 2, RIGHT / 3])
    expected = benchmark.temperature(r, theta)
    np.testing.assert_allclose(oracle.sample(r, theta), expected, atol=oracle.tolerance(1e-2))
