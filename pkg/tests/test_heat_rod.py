import gc
import math
import weakref

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis.strategies import floats

from solvers.heat_rod import (
    LaplaceRod, RodSpec, SourceTerm, interface_residuals, laplace_pair, rational_factor_pair,
    solve_general_n, solve_two_part, steady_limit, two_part_coeffs,
)
from utils.errors import DomainError
from utils.profiles import BoxProfile, GaussianProfile, ZeroProfile
from utils.special_fn import erfc


def poisson_gaussian(x, t, width=1.0, a=1.0):
    spread = width ** 2 + 4 * a ** 2 * t
    return width / np.sqrt(spread) * np.exp(-np.asarray(x) ** 2 / spread)


@pytest.fixture(scope="module")
def benchmark_spec():
    return RodSpec([0.0], [1.0, 2.0], [1.0, 3.0], initial=BoxProfile(-1.0, 1.0))


@pytest.fixture(scope="module")
def three_segment_spec():
    return RodSpec([-0.5, 0.5], [1.0, 2.0, 1.0], [1.0, 3.0, 1.0], initial=BoxProfile(-1.0, 1.0))


def test_material_constants():
    coeffs = two_part_coeffs(RodSpec([0.0], [1.0, 2.0], [1.0, 3.0]))
    assert coeffs.lambda0 == pytest.approx(2.5)
    assert coeffs.lambda_plus + coeffs.lambda_minus == pytest.approx(1.0)
    assert coeffs.lambda1 == pytest.approx((1.5 - 1.0) / 2.5)
    matched = two_part_coeffs(RodSpec([0.0], [1.0, 2.0], [1.0, 2.0]))
    assert matched.lambda1 == 0.0


def test_spec_from_material_properties():
    spec = RodSpec.from_material([0.0], k=[1.0, 4.0], rho=[1.0, 2.0], heat_capacity=0.5)
    assert spec.a == pytest.approx([math.sqrt(2.0), 2.0])
    with pytest.raises(DomainError):
        RodSpec([0.0], [1.0, 1.0], [1.0, 4.0], rho=[1.0, 2.0], heat_capacity=0.5)


def test_spec_rejects_bad_segments():
    with pytest.raises(DomainError):
        RodSpec([0.5, 0.0], [1.0, 1.0, 1.0], [1.0, 1.0, 1.0])
    with pytest.raises(DomainError):
        RodSpec([0.0], [1.0, -1.0], [1.0, 1.0])


def test_steady_limit_closed_forms():
    equal = RodSpec([0.0], [1.0, 2.0], [1.0, 3.0], gamma_minus=0.7, gamma_plus=0.7)
    assert steady_limit(equal) == pytest.approx(0.7)
    symmetric = RodSpec([0.0], [1.5, 1.5], [2.0, 2.0], gamma_minus=0.2, gamma_plus=1.0)
    assert steady_limit(symmetric) == pytest.approx(0.6)
    assert steady_limit(RodSpec([0.0], [1.0, 2.0], [1.0, 3.0], gamma_plus=1.0)) == pytest.approx(0.6)


def test_steady_limit_reached_at_long_times():
    spec = RodSpec([0.0], [1.0, 2.0], [1.0, 3.0], gamma_minus=0.0, gamma_plus=1.0)
    solution = solve_two_part(spec)
    far = solution(np.linspace(-2.0, 2.0, 9), 1e7)
    near = solution(np.linspace(-0.15, 0.15, 7), 1e4)
    assert np.max(np.abs(far - 0.6)) < 1e-3
    assert np.max(np.abs(near - 0.6)) < 1e-3


def test_poisson_reduction():
    spec = RodSpec([0.0], [1.0, 1.0], [1.0, 1.0], initial=GaussianProfile(0.0, 1.0))
    solution = solve_two_part(spec)
    for t in (0.05, 0.3, 1.0, 4.0):
        x = np.linspace(-3.0, 3.0, 5)
        np.testing.assert_allclose(solution(x, t), poisson_gaussian(x, t), atol=1e-8)


def test_levels_only_give_erfc_terms():
    spec = RodSpec([0.0], [1.0, 2.0], [1.0, 3.0], gamma_minus=0.0, gamma_plus=1.0)
    solution = solve_two_part(spec)
    coeffs = solution.coeffs
    t = 0.4
    assert solution.u(0.8, t)[0] == pytest.approx(-coeffs.lambda_minus * erfc(0.8 / (2 * 2.0 * math.sqrt(t))))
    assert solution.u(-0.3, t)[0] == pytest.approx(coeffs.lambda_plus * erfc(0.3 / (2 * math.sqrt(t))))


def test_two_part_interface_conditions(benchmark_spec):
    spec = RodSpec([0.0], [1.0, 2.0], [1.0, 3.0], initial=BoxProfile(-1.0, 1.0), gamma_minus=0.2, gamma_plus=1.0)
    for row in interface_residuals(solve_two_part(spec), 0.5):
        assert abs(row['jump'] - row['expected_jump']) < 1e-6
        assert row['expected_jump'] == pytest.approx(0.8)
        assert abs(row['flux']) < 1e-6


def test_heat_kernel_positivity(benchmark_spec):
    values = solve_two_part(benchmark_spec)(np.linspace(-4.0, 4.0, 33), 0.3)
    assert values.min() >= -1e-10


def test_rational_factor_pair():
    spec = RodSpec([0.0], [1.0, 2.0], [1.0, 3.0])
    p = 1.5 + 0.5j
    pair = rational_factor_pair(spec, 0, p)
    s = 1j * np.linspace(-10.0, 10.0, 20)
    target = (4.0 * s ** 2 - p) / (s ** 2 - p)
    assert np.max(np.abs(pair.ratio(s) - target)) < 1e-12
    zero = np.sqrt(p) / 2.0
    assert abs(pair.plus(zero) * (zero ** 2 - p)) < 1e-12
    uniform = rational_factor_pair(RodSpec([0.0], [1.3, 1.3], [1.0, 1.0]), 0, p)
    assert np.allclose(uniform.plus(s), 1.0) and np.allclose(uniform.minus(s), 1.0)


def test_closed_form_interface_values_match_green_system():
    spec = RodSpec([0.0], [1.0, 2.0], [1.0, 3.0], initial=BoxProfile(-1.0, 1.0), gamma_minus=0.3, gamma_plus=1.0)
    coeffs = two_part_coeffs(spec)
    rod = LaplaceRod(spec)
    for p in (2.0 + 0.0j, 1.0 + 3.0j, -0.5 + 4.0j):
        expected = coeffs.interface_values(p)
        right, right_slope = rod.transform(p, (0.0,), 1)
        left, left_slope = rod.transform(p, (0.0,), -1)
        assert right[0] - 1.0 / p == pytest.approx(expected['u_plus'], abs=1e-10)
        assert left[0] - 0.3 / p == pytest.approx(expected['u_minus'], abs=1e-10)
        assert right_slope[0] == pytest.approx(expected['du_plus'], abs=1e-10)
        assert left_slope[0] == pytest.approx(expected['du_minus'], abs=1e-10)
        assert coeffs.beta0(p) == pytest.approx(expected['u_minus'] - 4.0 * expected['u_plus'])


def test_laplace_pair_bounded_at_removable_points():
    spec = RodSpec([0.0], [1.0, 2.0], [1.0, 3.0], initial=BoxProfile(-1.0, 1.0), gamma_plus=1.0)
    p = 2.0 + 1.0j
    right = np.sqrt(p) / 2.0
    left = -np.sqrt(p)
    u_minus_near, _ = laplace_pair(spec, right + 1e-6, p)
    u_minus_far, _ = laplace_pair(spec, right + 1e-3j, p)
    _, u_plus_near = laplace_pair(spec, left - 1e-6, p)
    _, u_plus_far = laplace_pair(spec, left + 1e-3j, p)
    assert np.isfinite(u_minus_near) and np.isfinite(u_plus_near)
    assert abs(u_minus_near - u_minus_far) < 1e-2 * max(1.0, abs(u_minus_far))
    assert abs(u_plus_near - u_plus_far) < 1e-2 * max(1.0, abs(u_plus_far))


def test_removable_point_balances_interface_jumps():
    spec = RodSpec([0.0], [1.0, 2.0], [1.0, 3.0], initial=BoxProfile(-1.0, 1.0), gamma_plus=1.0)
    coeffs = two_part_coeffs(spec)
    p = 2.0 + 1.0j
    s = np.sqrt(p) / 2.0
    v = coeffs.interface_values(p)
    # a_plus^2 (du_plus + s u_plus) through the jumps; U- has no pole at s = sqrt(p) / a_plus
    right_side = v["du_minus"] + s * v["u_minus"] - coeffs.beta1(p) - s * coeffs.beta0(p)
    assert right_side == pytest.approx(coeffs.h_minus(p), rel=1e-10, abs=1e-12)


def test_general_n_requires_two_breakpoints(benchmark_spec):
    with pytest.raises(DomainError):
        solve_general_n(benchmark_spec)


def test_transform_cache_belongs_to_the_rod(three_segment_spec):
    rod = LaplaceRod(three_segment_spec)
    first = rod.transform(2.0 + 1.0j, (0.25, 0.75))
    assert rod.transform(2.0 + 1.0j, (0.25, 0.75)) is first
    assert LaplaceRod(three_segment_spec)._transforms == {}
    released = weakref.ref(rod)
    del rod, first
    gc.collect()
    assert released() is None


def test_general_n_interface_conditions(three_segment_spec):
    for row in interface_residuals(solve_general_n(three_segment_spec), 0.5):
        assert abs(row['value']) < 1e-6
        assert abs(row['flux']) < 1e-6


def test_general_n_merges_to_two_part(benchmark_spec):
    merged = RodSpec([0.0, 0.5], [1.0, 2.0, 2.0], [1.0, 3.0, 3.0], initial=BoxProfile(-1.0, 1.0))
    x = np.linspace(-1.5, 1.5, 7)
    np.testing.assert_allclose(solve_general_n(merged)(x, 0.5), solve_two_part(benchmark_spec)(x, 0.5), atol=1e-6)


def test_general_n_homogeneous_rod():
    spec = RodSpec([-0.5, 0.5], [1.0, 1.0, 1.0], [1.0, 1.0, 1.0], initial=GaussianProfile(0.0, 1.0))
    x = np.linspace(-2.0, 2.0, 9)
    np.testing.assert_allclose(solve_general_n(spec)(x, 0.5), poisson_gaussian(x, 0.5), atol=1e-6)


def test_source_term_routes_agree():
    source = SourceTerm(GaussianProfile(0.2, 0.5), rate=0.5)
    two = RodSpec([0.0], [1.0, 2.0], [1.0, 3.0], source=source)
    three = RodSpec([0.0, 0.7], [1.0, 2.0, 2.0], [1.0, 3.0, 3.0], source=source)
    x = np.array([-0.8, 0.4, 1.2])
    np.testing.assert_allclose(solve_two_part(two)(x, 0.4), solve_general_n(three)(x, 0.4), atol=1e-5)


@pytest.fixture(scope="module")
def two_mode_source():
    # g(x, t) = G(x; 0.2, 0.5) e^{-t/2} + 2 G(x; -0.6, 0.3) e^{-2t}, not a product of x and t factors
    return [SourceTerm(GaussianProfile(0.2, 0.5), rate=0.5), SourceTerm(GaussianProfile(-0.6, 0.3, 2.0), rate=2.0)]


def test_source_modes_normalize_to_a_tuple(two_mode_source):
    single = RodSpec([0.0], [1.0, 2.0], [1.0, 3.0], source=two_mode_source[0])
    assert single.source == (two_mode_source[0],)
    assert RodSpec([0.0], [1.0, 2.0], [1.0, 3.0], source=None).sources == ()
    idle = SourceTerm(ZeroProfile(), rate=1.0)
    assert RodSpec([0.0], [1.0, 2.0], [1.0, 3.0], source=[idle, *two_mode_source]).sources == tuple(two_mode_source)


def test_two_mode_source_routes_agree(two_mode_source):
    two = RodSpec([0.0], [1.0, 2.0], [1.0, 3.0], source=two_mode_source)
    three = RodSpec([0.0, 0.7], [1.0, 2.0, 2.0], [1.0, 3.0, 3.0], source=two_mode_source)
    x = np.array([-0.8, 0.4, 1.2])
    np.testing.assert_allclose(solve_two_part(two)(x, 0.4), solve_general_n(three)(x, 0.4), atol=1e-5)


def test_source_modes_superpose(two_mode_source):
    x = np.array([-0.6, 0.1, 0.9])

    def field(source):
        return solve_two_part(RodSpec([0.0], [1.0, 2.0], [1.0, 3.0], source=source))(x, 0.4)

    np.testing.assert_allclose(field(two_mode_source), field(two_mode_source[0]) + field(two_mode_source[1]),
                               atol=1e-12)


@settings(max_examples=10, deadline=None)
@given(floats(min_value=0.05, max_value=2.0))
def test_homogeneous_rod_matches_poisson_at_random_times(t):
    spec = RodSpec([0.0], [1.0, 1.0], [1.0, 1.0], initial=GaussianProfile(0.0, 1.0))
    assert solve_two_part(spec)(0.7, t)[0] == pytest.approx(poisson_gaussian(0.7, t), abs=1e-8)


@pytest.mark.slow
def test_two_part_matches_crank_nicolson(benchmark_spec):
    from solvers.oracle_fd import heat_cn
    oracle = heat_cn(benchmark_spec, 0.5)
    x = np.array([-0.25, 0.25])
    np.testing.assert_allclose(solve_two_part(benchmark_spec)(x, 0.5), oracle.sample(x), atol=1e-3)


@pytest.mark.slow
def test_general_n_matches_crank_nicolson(three_segment_spec):
    from solvers.oracle_fd import heat_cn
    oracle = heat_cn(three_segment_spec, 0.5)
    x = np.linspace(-1.0, 1.0, 11)
    np.testing.assert_allclose(solve_general_n(three_segment_spec)(x, 0.5), oracle.sample(x), atol=1e-3)


@pytest.mark.slow
def test_two_mode_source_matches_crank_nicolson(two_mode_source):
    from solvers.oracle_fd import heat_cn
    two = RodSpec([0.0], [1.0, 2.0], [1.0, 3.0], initial=BoxProfile(-1.0, 1.0), source=two_mode_source)
    three = RodSpec([-0.5, 0.5], [1.0, 2.0, 1.0], [1.0, 3.0, 1.0], source=two_mode_source)
    x = np.linspace(-1.0, 1.0, 9)
    np.testing.assert_allclose(solve_two_part(two)(x, 0.5), heat_cn(two, 0.5).sample(x), atol=1e-3)
    np.testing.assert_allclose(solve_general_n(three)(x, 0.5), heat_cn(three, 0.5).sample(x), atol=1e-3)
