import cmath
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis.strategies import floats
from numpy.testing import assert_allclose

from utils.errors import ConvergenceError, DomainError
from utils.special_fn import (
    cbeta, cgamma, csc_c, cot_c, erfc, gamma_branch, gauss2f1, sec_c, sqrt_p, tan_c,
)


def test_gamma_classical_values():
    assert cgamma(1.0) == pytest.approx(1.0, rel=1e-13)
    assert cgamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-13)
    assert cgamma(5.0) == pytest.approx(24.0, rel=1e-13)


def test_gamma_on_critical_line_matches_reflection():
    value = cgamma(0.5 + 3j)
    assert abs(value) ** 2 == pytest.approx(math.pi / math.cosh(3 * math.pi), rel=1e-12)


def test_gamma_left_half_plane():
    assert cgamma(-0.5) == pytest.approx(-2.0 * math.sqrt(math.pi), rel=1e-12)


@pytest.mark.parametrize("z", [0.0, -1.0, -7.0])
def test_gamma_pole_raises(z):
    with pytest.raises(DomainError):
        cgamma(z)


@given(floats(min_value=-19.0, max_value=19.0), floats(min_value=-19.0, max_value=19.0))
def test_gamma_recurrence(x, y):
    z = complex(x, y)
    assume(abs(z) <= 19.0)
    assume(abs(z - min(0, round(x))) > 0.05)
    lhs = cgamma(z + 1)
    rhs = z * cgamma(z)
    assert abs(lhs - rhs) <= 1e-11 * abs(lhs)


def test_beta_matches_gamma_ratio():
    a, b = 0.3 + 0.7j, 1.5
    expected = cgamma(a) * cgamma(b) / cgamma(a + b)
    assert cbeta(a, b) == pytest.approx(expected, rel=1e-12)


def test_erfc_values():
    assert erfc(0.0) == 1.0
    assert erfc(1.0) == pytest.approx(0.15729920705028513, rel=1e-14)


@given(floats(min_value=-6.0, max_value=6.0))
def test_erfc_reflection(x):
    assert erfc(x) + erfc(-x) == pytest.approx(2.0, rel=1e-15)
    assert 0.0 < erfc(x) <= 2.0
    assert erfc(x + 0.25) <= erfc(x)


def test_2f1_binomial_identity():
    z = np.array([-0.6, -0.1, 0.3, 0.2 + 0.4j])
    assert_allclose(gauss2f1(0.7, 1.3, 1.3, z), (1 - z) ** -0.7, rtol=1e-13)


def test_2f1_at_origin():
    assert gauss2f1(2.0, 3.0, 4.5, 0.0) == 1.0


def test_2f1_matches_direct_summation():
    term, total = 1.0, 1.0
    for n in range(10_000):
        term *= (1 + n) * (0.5 + n) / ((1.5 + n) * (n + 1)) * (-0.25)
        total += term
    assert gauss2f1(1.0, 0.5, 1.5, -0.25).real == pytest.approx(total, rel=1e-14)
    assert total == pytest.approx(2 * math.atan(0.5), rel=1e-14)


@settings(max_examples=60)
@given(floats(min_value=-2.0, max_value=2.0), floats(min_value=-2.0, max_value=2.0),
       floats(min_value=0.5, max_value=3.0), floats(min_value=-0.5, max_value=0.5))
def test_2f1_contiguous_relation(a, b, c, z):
    lower = gauss2f1(a - 1, b, c, z)
    mid = gauss2f1(a, b, c, z)
    upper = gauss2f1(a + 1, b, c, z)
    terms = [(c - a) * lower, (2 * a - c + (b - a) * z) * mid, a * (z - 1) * upper]
    assert abs(sum(terms)) <= 1e-10 * max(1.0, sum(abs(t) for t in terms))


def test_2f1_rejects_unit_disc_boundary():
    with pytest.raises(ConvergenceError):
        gauss2f1(0.5, 0.5, 1.5, -1.0)
    with pytest.raises(DomainError):
        gauss2f1(0.5, 0.5, -2.0, 0.1)


def test_gamma_branch_values():
    assert gamma_branch(0.0, 1.0 + 1e-12j) == pytest.approx(-1j, abs=1e-11)
    k = 1.5 + 0.5j
    assert gamma_branch(k, k) == 0
    assert gamma_branch(-k, k) == 0
    value = gamma_branch(10.0, 2j)
    assert value == pytest.approx(math.sqrt(104.0), rel=1e-14)


@given(floats(min_value=-1e3, max_value=1e3), floats(min_value=-10.0, max_value=10.0),
       floats(min_value=0.01, max_value=10.0))
def test_gamma_branch_square_and_sign(alpha, kr, ki):
    k = complex(kr, ki)
    g = gamma_branch(alpha, k)
    assert abs(g * g - (alpha ** 2 - k ** 2)) <= 1e-12 * (alpha ** 2 + abs(k) ** 2)
    assert g.real > 0


def test_gamma_branch_requires_upper_k():
    with pytest.raises(DomainError):
        gamma_branch(1.0, 1.0 - 0.5j)


def test_sqrt_p():
    assert sqrt_p(1.0) == 1.0
    assert sqrt_p(4.0) == 2.0
    assert sqrt_p(1j) == pytest.approx(cmath.exp(0.25j * math.pi), rel=1e-15)
    with pytest.raises(DomainError):
        sqrt_p(-2.0)


@pytest.mark.parametrize("z", [0.3 + 0.2j, -1.1 - 0.7j, 2.0 + 5.0j, 0.4 - 3.0j])
def test_stable_trig_matches_numpy(z):
    assert tan_c(z) == pytest.approx(np.tan(z), rel=1e-13)
    assert sec_c(z) == pytest.approx(1 / np.cos(z), rel=1e-13)
    assert cot_c(z) == pytest.approx(1 / np.tan(z), rel=1e-13)
    assert csc_c(z) == pytest.approx(1 / np.sin(z), rel=1e-13)


def test_stable_trig_far_from_axis():
    assert tan_c(1.0 + 800j) == pytest.approx(1j, abs=1e-15)
    assert abs(sec_c(1.0 - 800j)) < 1e-300


@pytest.mark.parametrize("z", [0.3 + 0.2j, 0.3 - 0.2j, -1.1 + 0.05j, 2.0 - 3.0j])
def test_csc_times_sin_is_one(z):
    assert csc_c(z) * np.sin(z) == pytest.approx(1.0, rel=1e-13)
    assert cot_c(z) * np.tan(z) == pytest.approx(1.0, rel=1e-13)
