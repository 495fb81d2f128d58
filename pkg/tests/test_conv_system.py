import copy

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis.strategies import floats

from solvers.conv_system import (
    AWSpec, aw_branches, aw_factor_pairs, aw_field, aw_psi_split, aw_recover_u, aw_residual,
    aw_rhp_residual, aw_solve,
)
from utils.checks import is_normal_lambda
from utils.errors import DomainError
from utils.profiles import ExponentialProfile, ZeroProfile


@pytest.fixture(scope="module")
def benchmark():
    return aw_solve(AWSpec(0.1, 1.0, ExponentialProfile(1.0, 1.0)))


@pytest.fixture(scope="module")
def forced_both():
    return aw_solve(AWSpec(-0.3 + 0.2j, 0.7, ExponentialProfile(1.0, 2.0), ExponentialProfile(0.5, 1.5)))


@settings(max_examples=20, deadline=None)
@given(floats(min_value=-5.0, max_value=5.0), floats(min_value=-5.0, max_value=5.0))
def test_branches_have_positive_real_part(re, im):
    lam = complex(re, im)
    assume(is_normal_lambda(lam) and (abs(im) > 1e-3 or re < 0.24))
    l0, l1 = aw_branches(lam)
    assert l0.real > 0 and l1.real > 0
    assert l0 ** 2 == pytest.approx(1 - 2 * lam)
    assert l1 ** 2 == pytest.approx(1 - 4 * lam)


def test_factor_pairs_trivial_at_zero_coupling():
    k0, k1 = aw_factor_pairs(0.0)
    alpha = np.linspace(-5.0, 5.0, 7) + 0.5j
    for pair in (k0, k1):
        np.testing.assert_allclose(pair.plus(alpha), 1.0)
        np.testing.assert_allclose(pair.minus(alpha), 1.0)


def test_factor_pair_ratios_and_zero():
    lam = 0.1 - 0.05j
    k0, k1 = aw_factor_pairs(lam)
    alpha = np.linspace(-10.0, 10.0, 20)
    d0 = alpha ** 2 + 1 - 2 * lam
    assert np.max(np.abs(k0.ratio(alpha) - d0 / (alpha ** 2 + 1))) < 1e-13
    assert np.max(np.abs(k1.ratio(alpha) - d0 / (alpha ** 2 + 1 - 4 * lam))) < 1e-13
    l0, _ = aw_branches(lam)
    assert abs(k0.plus(-1j * l0)) < 1e-15


def test_non_normal_coupling_rejected():
    with pytest.raises(DomainError):
        aw_factor_pairs(0.3)
    with pytest.raises(DomainError):
        aw_solve(AWSpec(0.25, 1.0, ExponentialProfile()))


def test_spec_rejects_nonpositive_offset():
    with pytest.raises(DomainError):
        AWSpec(0.1, 0.0)


def test_zero_forcing_gives_zero_split():
    psi = aw_psi_split(AWSpec(0.1, 1.0, ZeroProfile(), ZeroProfile()))
    for values in (*psi.plus([0.3, 1.0 + 1.0j]), *psi.minus([0.3, -1.0j])):
        np.testing.assert_array_equal(values, 0.0)


def test_split_jumps_match_densities():
    psi = aw_psi_split(AWSpec(0.1, 1.0, ExponentialProfile(1.0, 2.0), ExponentialProfile(0.5, 1.5)))
    alpha = np.linspace(-6.0, 6.0, 10)
    plus1, plus2 = psi.plus(alpha)
    minus1, minus2 = psi.minus(alpha)
    first, second = psi.jumps(alpha)
    assert np.max(np.abs(plus1 - minus1 - first)) < 1e-8
    assert np.max(np.abs(plus2 - minus2 - second)) < 1e-8


def test_residue_split_matches_cauchy_quadrature():
    spec = AWSpec(0.1, 1.0, ExponentialProfile(1.0, 2.0))
    residue = aw_psi_split(spec)
    quadrature = aw_psi_split(spec, method='quadrature')
    upper = np.array([0.5 + 0.7j, -1.0 + 0.3j, 0.2 + 2.0j])
    lower = np.array([0.3 - 0.6j, -2.0 - 0.4j, 0.1 - 1.5j])
    np.testing.assert_allclose(quadrature.plus(upper)[0], residue.plus(upper)[0], atol=1e-8)
    np.testing.assert_allclose(quadrature.minus(lower)[0], residue.minus(lower)[0], atol=1e-8)
    np.testing.assert_allclose(quadrature.plus(upper)[1], residue.plus(upper)[1], atol=1e-7)
    np.testing.assert_allclose(quadrature.minus(lower)[1], residue.minus(lower)[1], atol=1e-7)


def test_zero_forcing_gives_zero_solution():
    solution = aw_solve(AWSpec(0.1, 1.0))
    c = solution.constants
    assert c.d1 == 0 and c.d2 == 0 and c.c1 == 0 and c.c2 == 0
    for values in solution.plus(np.linspace(-3.0, 3.0, 5)):
        np.testing.assert_array_equal(values, 0.0)


def test_constants_solve_their_linear_relations(forced_both):
    c = forced_both.constants
    assert c.c1 - c.b * c.c2 == pytest.approx(c.d1, abs=1e-14)
    assert c.b * c.c1 + c.c2 == pytest.approx(c.d2, abs=1e-14)


@pytest.mark.parametrize("name", ["benchmark", "forced_both"])
def test_inadmissible_poles_removed(name, request):
    residues = request.getfixturevalue(name).pole_residues()
    assert abs(residues['u1_plus']) < 1e-10
    assert abs(residues['u2_minus']) < 1e-10


@pytest.mark.parametrize("name", ["benchmark", "forced_both"])
def test_boundary_relation_residual(name, request):
    alphas = np.linspace(-20.0, 20.0, 50)
    assert aw_rhp_residual(request.getfixturevalue(name), alphas) < 1e-8


def test_shifted_second_component_decays_upwards(benchmark):
    heights = np.array([1.0, 2.0, 4.0, 8.0, 16.0])
    alpha = 0.3 + 1j * heights
    values = np.abs(np.exp(1j * alpha * benchmark.spec.a) * benchmark.plus(alpha)[1])
    assert np.all(np.diff(values) < 0)
    assert values[-1] < 1e-6


def test_recover_simple_pole():
    x = np.array([0.2, 1.0, 3.0])
    u = aw_recover_u(lambda alpha: np.atleast_2d(1.0 / (np.asarray(alpha) + 1j)), x)
    np.testing.assert_allclose(u[0], -1j * np.exp(-x), atol=1e-8)


def test_recover_double_pole():
    x = np.array([0.5, 1.5])
    u = aw_recover_u(lambda alpha: np.atleast_2d(1.0 / (np.asarray(alpha) + 2j) ** 2), x)
    np.testing.assert_allclose(u[0], -x * np.exp(-2 * x), atol=1e-8)


def test_recover_zero_transform():
    u = aw_recover_u(lambda alpha: np.zeros((2, np.size(alpha)), dtype=complex), [0.5, 1.0])
    np.testing.assert_array_equal(u, 0.0)


def test_zero_coupling_returns_forcing():
    solution = aw_solve(AWSpec(0.0, 1.0, ExponentialProfile(1.0, 1.0)))
    x = np.array([0.3, 1.2])
    u = aw_field(solution, x)
    np.testing.assert_allclose(u[0], np.exp(-x), atol=1e-8)
    np.testing.assert_allclose(u[1], 0.0, atol=1e-8)


def test_recovered_solution_satisfies_integral_equations(benchmark):
    x = np.linspace(0.1, 4.0, 20)
    assert np.max(np.abs(aw_residual(benchmark, x))) < 1e-6


def test_integral_equation_residual_sees_mismatched_forcing(benchmark):
    mismatched = copy.copy(benchmark)
    mismatched.spec = AWSpec(0.1, 1.0, ExponentialProfile(2.0, 1.0))
    x = np.array([0.5, 1.5, 3.0])
    residual = aw_residual(mismatched, x)
    np.testing.assert_allclose(residual[0], -np.exp(-x), atol=1e-6)
    np.testing.assert_allclose(residual[1], 0.0, atol=1e-6)


def test_integral_equation_residual_needs_positive_x(benchmark):
    with pytest.raises(DomainError):
        aw_residual(benchmark, np.array([0.0, 1.0]))


def test_residue_and_quadrature_solutions_agree():
    spec = AWSpec(0.1, 1.0, ExponentialProfile(1.0, 1.0))
    residue = aw_solve(spec).constants
    quadrature = aw_solve(spec, method='quadrature').constants
    assert quadrature.c1 == pytest.approx(residue.c1, abs=1e-7)
    assert quadrature.c2 == pytest.approx(residue.c2, abs=1e-7)


@pytest.mark.slow
def test_solution_matches_nystrom(benchmark):
    from solvers.oracle_fd import aw_nystrom
    oracle = aw_nystrom(benchmark.spec)
    x = np.array([0.5, 1.0, 2.0])
    np.testing.assert_allclose(aw_field(benchmark, x), oracle.sample(x), atol=1e-4)
