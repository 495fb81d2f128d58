import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis.strategies import floats, sampled_from
from scipy import integrate

from utils.contour_quad import (
    CauchyDensity, CauchyIntegral, LineContour, cauchy_eval, plemelj_split, talbot_invert,
)
from utils.errors import DomainError, TailDivergenceError
from utils.special_fn import erfc


def lorentz(zeta):
    return 1.0 / (zeta ** 2 + 4.0)


def test_zero_density():
    density = CauchyDensity(lambda z: np.zeros_like(z))
    assert cauchy_eval(density, LineContour(), 1.0 + 1.0j) == 0
    plus, minus = plemelj_split(density, LineContour(), 0.5)
    assert plus == 0 and minus == 0


def test_residue_oracle_on_vertical_contour():
    pole = -1.0 + 0.5j
    density = CauchyDensity(lambda s: 1.0 / (s - pole))
    contour = LineContour(orientation='vertical', offset=0.5)
    z = 2.0 + 1.0j
    assert cauchy_eval(density, contour, z) == pytest.approx(-1.0 / (z - pole), abs=1e-6)
    # pole on the plus side, density analytic to the right
    assert cauchy_eval(density, contour, -0.2 + 3.0j) == pytest.approx(0.0, abs=1e-6)


def test_adaptive_oracle_on_real_axis():
    density = CauchyDensity(lambda s: 1.0 / (s ** 2 + 1.0))
    z = 1j
    re = integrate.quad(lambda s: (1.0 / (s ** 2 + 1.0) / (s - z)).real, -np.inf, np.inf, epsabs=1e-13)[0]
    im = integrate.quad(lambda s: (1.0 / (s ** 2 + 1.0) / (s - z)).imag, -np.inf, np.inf, epsabs=1e-13)[0]
    reference = complex(re, im) / (2j * math.pi)
    value = cauchy_eval(density, LineContour(), z, tol=1e-12)
    assert value == pytest.approx(reference, abs=1e-10)
    assert value == pytest.approx(0.25, abs=1e-10)


def test_both_normalizations():
    density = CauchyDensity(lorentz)
    z = 0.3 + 0.8j
    normalized = cauchy_eval(density, LineContour(), z)
    bare = cauchy_eval(density, LineContour(), z, normalized=False)
    assert bare == pytest.approx(2j * math.pi * normalized, rel=1e-8)


def test_point_on_contour_raises():
    with pytest.raises(DomainError):
        cauchy_eval(CauchyDensity(lorentz), LineContour(), 0.7)


def test_constant_density_needs_asymptote():
    with pytest.raises(TailDivergenceError):
        cauchy_eval(CauchyDensity(lambda s: np.ones_like(s)), LineContour(), 1j)
    density = CauchyDensity(lambda s: np.ones_like(s), c_inf=1.0)
    assert cauchy_eval(density, LineContour(), 1j) == pytest.approx(0.5, abs=1e-12)
    assert cauchy_eval(density, LineContour(), -1j) == pytest.approx(-0.5, abs=1e-12)


def test_asymptote_handling_matches_closed_form():
    # the decaying part contributes -1 / (4i (z + 2i)) above the axis
    density = CauchyDensity(lambda s: 1.0 + lorentz(s), c_inf=1.0)
    z = 0.5 + 1.0j
    expected = 0.5 - 1.0 / (4j * (z + 2j))
    assert cauchy_eval(density, LineContour(), z) == pytest.approx(expected, abs=1e-8)


def test_plemelj_jump_and_principal_value():
    density = CauchyDensity(lorentz)
    plus, minus = plemelj_split(density, LineContour(), 1.0)
    assert plus - minus == pytest.approx(lorentz(1.0), abs=1e-10)
    # exact PV of 1/((s^2+4)(s-1)) is -pi/10
    assert 0.5 * (plus + minus) == pytest.approx(-math.pi / 10 / (2j * math.pi), abs=1e-10)


def test_principal_value_matches_adaptive_cauchy_weight():
    f = lambda s: lorentz(s) / (s - 1.0)
    core = integrate.quad(lorentz, -50.0, 50.0, weight="cauchy", wvar=1.0, epsabs=1e-13)[0]
    left = core + integrate.quad(f, -np.inf, -50.0, epsabs=1e-13)[0]
    right = integrate.quad(f, 50.0, np.inf, epsabs=1e-13)[0]
    pv = CauchyIntegral(CauchyDensity(lorentz), LineContour(), normalized=False).principal_value(1.0)
    assert pv == pytest.approx(left + right, abs=1e-8)


@settings(max_examples=15, deadline=None)
@given(floats(min_value=-3.0, max_value=3.0))
def test_jump_consistency_near_contour(s):
    transform = CauchyIntegral(CauchyDensity(lorentz), LineContour())
    eps = 1e-7
    jump = transform(s + 1j * eps) - transform(s - 1j * eps)
    assert jump == pytest.approx(lorentz(s), abs=1e-6)


def test_vertical_contour_boundary_values():
    density = CauchyDensity(lambda s: 1.0 / (s + 2.0) ** 2)
    contour = LineContour(orientation='vertical', offset=0.5)
    s = 0.5 + 0.3j
    plus, minus = plemelj_split(density, contour, s)
    assert plus - minus == pytest.approx(1.0 / (s + 2.0) ** 2, abs=1e-10)
    # density analytic to the right of the line, so the left limit vanishes
    assert plus == pytest.approx(0.0, abs=1e-8)
    assert minus == pytest.approx(-1.0 / (s + 2.0) ** 2, abs=1e-8)


def test_talbot_unit_step():
    assert talbot_invert(lambda p: 1.0 / p, 1.0) == pytest.approx(1.0, abs=1e-9)


def test_talbot_heat_kernels():
    assert talbot_invert(lambda p: np.exp(-np.sqrt(p)) / np.sqrt(p), 1.0) == pytest.approx(
        math.exp(-0.25) / math.sqrt(math.pi), abs=1e-9)
    assert talbot_invert(lambda p: np.exp(-np.sqrt(p)) / p, 1.0) == pytest.approx(erfc(0.5), abs=1e-9)


@settings(max_examples=25, deadline=None)
@given(sampled_from([1.0, 5.0]), floats(min_value=0.1, max_value=10.0))
def test_talbot_exponential(a, t):
    assert talbot_invert(lambda p: 1.0 / (p + a), t) == pytest.approx(math.exp(-a * t), abs=1e-8)


def test_talbot_rejects_nonpositive_time():
    with pytest.raises(DomainError):
        talbot_invert(lambda p: 1.0 / p, 0.0)
