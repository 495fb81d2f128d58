"""
Composite Rod Heat Solver
Closed-form two-part rod, steady limit, rational factors and the general-n Green-function route.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from config import CONDITION_LIMIT, DEFAULT_TOL, TALBOT_NODES, TRANSFORM_CACHE_SIZE
from utils.checks import requires_positive_time
from utils.contour_quad import gauss_panels, talbot_invert
from utils.errors import DomainError, SingularSystemError
from utils.factors import FactorPair
from utils.profiles import Profile, ZeroProfile
from utils.special_fn import erfc, sqrt_p

logger = logging.getLogger(__name__)

SQRT_PI = np.sqrt(np.pi)


@dataclass(frozen=True)
class SourceTerm:
    """One mode profile(x) * exp(-rate t) of the heat source; a rod sums any number of them"""

    profile: Profile
    rate: float = 0.0

    def __call__(self, x, t):
        return self.profile(x) * np.exp(-self.rate * t)

    def laplace_factor(self, p):
        return 1.0 / (p + self.rate)


@dataclass
class RodSpec:
    """
    Infinite rod with breakpoints b_0 < ... < b_{m-1} and m + 1 segments.
    Initial total temperature is f(x) plus gamma_minus left of b_0 and
    gamma_plus right of b_{m-1}. The heat source is the sum of its SourceTerm modes.
    """

    breakpoints: List[float]
    a: List[float]
    k: List[float]
    initial: Profile = field(default_factory=ZeroProfile)
    gamma_minus: float = 0.0
    gamma_plus: float = 0.0
    source: Union[SourceTerm, Sequence[SourceTerm], None] = ()
    rho: Optional[List[float]] = None
    heat_capacity: Optional[float] = None

    def __post_init__(self):
        self.breakpoints = [float(b) for b in self.breakpoints]
        self.a = [float(v) for v in self.a]
        self.k = [float(v) for v in self.k]
        if self.source is None:
            self.source = ()
        elif isinstance(self.source, SourceTerm):
            self.source = (self.source,)
        else:
            self.source = tuple(self.source)
        if not self.breakpoints:
            raise DomainError("rod needs at least one breakpoint")
        if np.any(np.diff(self.breakpoints) <= 0):
            raise DomainError(f"breakpoints must increase: {self.breakpoints}")
        if len(self.a) != self.m + 1 or len(self.k) != self.m + 1:
            raise DomainError(f"rod with {self.m} breakpoints needs {self.m + 1} values of a and k")
        if min(self.a) <= 0 or min(self.k) <= 0:
            raise DomainError("diffusivities and conductivities must be positive")
        if self.rho is not None and self.heat_capacity is not None:
            expected = np.sqrt(np.asarray(self.k) / (self.heat_capacity * np.asarray(self.rho)))
            if not np.allclose(expected, self.a, rtol=1e-10):
                raise DomainError(f"a^2 must equal k / (c_p rho), expected a = {expected.tolist()}")

    @classmethod
    def from_material(cls, breakpoints: Sequence[float], k: Sequence[float], rho: Sequence[float],
                      heat_capacity: float, **kwargs) -> 'RodSpec':
        a = np.sqrt(np.asarray(k, dtype=float) / (heat_capacity * np.asarray(rho, dtype=float)))
        return cls(list(breakpoints), a.tolist(), list(k), rho=list(rho), heat_capacity=heat_capacity, **kwargs)

    @property
    def m(self) -> int:
        return len(self.breakpoints)

    @property
    def sources(self) -> Tuple[SourceTerm, ...]:
        return tuple(term for term in self.source if not term.profile.is_zero)

    def segment_of(self, x: float, side: int = 1) -> int:
        """Segment index of x; points on a breakpoint go right for side > 0"""
        if side > 0:
            return int(np.searchsorted(self.breakpoints, x, side='right'))
        return int(np.searchsorted(self.breakpoints, x, side='left'))

    def level(self, x, side: int = 1):
        """Asymptotic level carried by the total temperature"""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        seg = np.array([self.segment_of(v, side) for v in x])
        return np.where(seg == 0, self.gamma_minus, np.where(seg == self.m, self.gamma_plus, 0.0))


def steady_limit(spec: RodSpec) -> float:
    """Long-time limit of the two-part rod temperature"""
    if spec.m != 1:
        raise DomainError("steady limit is stated for a single breakpoint")
    (a_m, a_p), (k_m, k_p) = spec.a, spec.k
    lam0 = k_p / a_p + k_m / a_m
    return (spec.gamma_minus * a_p * k_m + spec.gamma_plus * a_m * k_p) / (lam0 * a_p * a_m)


def rational_factor_pair(spec: RodSpec, j: int, p: complex) -> FactorPair:
    """
    Factors of m_{j+1}(s) / m_j(s), m_j = a_j^2 s^2 - p:
    K+ analytic and nonzero for Re s < 0, K- for Re s > 0.
    """
    if not 0 <= j < spec.m:
        raise DomainError(f"breakpoint index {j} outside 0..{spec.m - 1}")
    q = sqrt_p(p)
    a_j, a_next = spec.a[j], spec.a[j + 1]

    def plus(s):
        s = np.asarray(s, dtype=complex)
        return (a_next * s - q) / (a_j * s - q)

    def minus(s):
        s = np.asarray(s, dtype=complex)
        return (a_j * s + q) / (a_next * s + q)

    return FactorPair(plus, minus, name=f"rod-{j}", plus_region='Re s < 0', minus_region='Re s > 0')


def _source_density(spec: RodSpec, p: complex):
    """S(xi; p) = f(xi) + g_hat(xi; p) as a list of (profile, weight) terms"""
    terms = [] if spec.initial.is_zero else [(spec.initial, 1.0)]
    terms.extend((term.profile, term.laplace_factor(p)) for term in spec.sources)
    return terms


def _exp_moment(spec: RodSpec, p: complex, rate: complex, lo: float, hi: float, origin: float) -> complex:
    """int_lo^hi exp(-rate (xi - origin)) S(xi; p) dxi for Re rate (xi - origin) >= 0"""
    total = 0.0 + 0.0j
    density = max(4.0, 1.5 * abs(rate))
    for profile, weight in _source_density(spec, p):
        total += weight * complex(profile.weighted_integral(
            lambda xi: np.exp(-rate * (xi - origin)), lo, hi, panels_per_unit=density))
    return total


@dataclass(frozen=True)
class TwoPartCoeffs:
    """Material constants and p-domain coefficients of the two-part rod"""

    spec: RodSpec
    lambda0: float
    lambda1: float
    lambda_plus: float
    lambda_minus: float

    @property
    def gamma(self) -> float:
        return self.spec.gamma_plus - self.spec.gamma_minus

    def h_minus(self, p: complex) -> complex:
        """H-(sqrt(p)/a+), the right half-line transform"""
        b0, a_p = self.spec.breakpoints[0], self.spec.a[1]
        return _exp_moment(self.spec, p, sqrt_p(p) / a_p, b0, np.inf, b0)

    def h_plus(self, p: complex) -> complex:
        """H+(-sqrt(p)/a-), the left half-line transform"""
        b0, a_m = self.spec.breakpoints[0], self.spec.a[0]
        return _exp_moment(self.spec, p, -sqrt_p(p) / a_m, -np.inf, b0, b0)

    def c_plus(self, p: complex) -> complex:
        (a_m, a_p), root = self.spec.a, sqrt_p(p)
        return (self.lambda1 * self.h_minus(p) / (2 * a_p * root)
                + self.lambda_minus * self.h_plus(p) / (a_m * root)
                - self.lambda_minus * self.gamma / p)

    def c_minus(self, p: complex) -> complex:
        (a_m, a_p), root = self.spec.a, sqrt_p(p)
        return (-self.lambda1 * self.h_plus(p) / (2 * a_m * root)
                + self.lambda_plus * self.h_minus(p) / (a_p * root)
                + self.lambda_plus * self.gamma / p)

    def interface_values(self, p: complex) -> Dict[str, complex]:
        """One-sided values and slopes of the transformed decaying temperature at the breakpoint"""
        (a_m, a_p), root = self.spec.a, sqrt_p(p)
        h_m, h_p = self.h_minus(p), self.h_plus(p)
        c_p, c_m = self.c_plus(p), self.c_minus(p)
        return {
            'u_plus': c_p + h_m / (2 * a_p * root),
            'du_plus': root / a_p * (h_m / (2 * a_p * root) - c_p),
            'u_minus': c_m + h_p / (2 * a_m * root),
            'du_minus': root / a_m * (c_m - h_p / (2 * a_m * root)),
        }

    def beta0(self, p: complex) -> complex:
        v, (a_m, a_p) = self.interface_values(p), self.spec.a
        return a_m ** 2 * v['u_minus'] - a_p ** 2 * v['u_plus']

    def beta1(self, p: complex) -> complex:
        v, (a_m, a_p) = self.interface_values(p), self.spec.a
        return a_m ** 2 * v['du_minus'] - a_p ** 2 * v['du_plus']


def two_part_coeffs(spec: RodSpec) -> TwoPartCoeffs:
    if spec.m != 1:
        raise DomainError(f"two-part rod needs exactly one breakpoint, got {spec.m}")
    (a_m, a_p), (k_m, k_p) = spec.a, spec.k
    lam0 = k_p / a_p + k_m / a_m
    return TwoPartCoeffs(
        spec=spec,
        lambda0=lam0,
        lambda1=(k_p / a_p - k_m / a_m) / lam0,
        lambda_plus=k_p / (a_p * lam0),
        lambda_minus=k_m / (a_m * lam0),
    )


def laplace_pair(spec: RodSpec, s: complex, p: complex):
    """
    (U-(s), U+(s)): half-line Laplace transforms in x of the transformed decaying
    temperature, U- for Re s > 0 from the right half-line, U+ for Re s < 0.
    """
    coeffs = two_part_coeffs(spec)
    (a_m, a_p), b0 = spec.a, spec.breakpoints[0]
    v = coeffs.interface_values(p)
    s = complex(s)
    u_minus = u_plus = None
    if s.real > 0:
        h = _exp_moment(spec, p, s, b0, np.inf, b0)
        u_minus = (a_p ** 2 * (v['du_plus'] + s * v['u_plus']) - h) / (a_p ** 2 * s ** 2 - p)
    if s.real < 0:
        h = _exp_moment(spec, p, s, -np.inf, b0, b0)
        u_plus = -(a_m ** 2 * (v['du_minus'] + s * v['u_minus']) + h) / (a_m ** 2 * s ** 2 - p)
    return u_minus, u_plus


class TwoPartSolution:
    """Temperature of the two-part rod by the generalized Poisson formulas"""

    def __init__(self, spec: RodSpec, time_nodes: int = 32):
        self.spec = spec
        self.coeffs = two_part_coeffs(spec)
        self.time_nodes = time_nodes
        logger.info(f"Two-part rod: a={spec.a}, k={spec.k}, lambda0={self.coeffs.lambda0:.6g}, "
                    f"lambda1={self.coeffs.lambda1:.6g}")

    def _sides(self, sigma: int):
        (a_m, a_p), c = self.spec.a, self.coeffs
        if sigma > 0:
            return a_p, a_m, c.lambda_minus
        return a_m, a_p, c.lambda_plus

    def _poisson(self, profile: Profile, xl: float, sigma: int, tau: float, derivative: bool) -> float:
        """Kernel of the two-part rod applied to a profile over time tau, at local coordinate xl"""
        a_s, a_o, lam_o = self._sides(sigma)
        lam1 = self.coeffs.lambda1
        b0 = self.spec.breakpoints[0]
        width = 4.0 * a_s ** 2 * tau
        norm_s = 1.0 / (2.0 * a_s * np.sqrt(np.pi * tau))
        norm_o = lam_o / (a_o * np.sqrt(np.pi * tau))

        def same(xi):
            e_img = np.exp(-(xl + xi - b0) ** 2 / width)
            e_dir = np.exp(-(xl - xi + b0) ** 2 / width)
            if derivative:
                return norm_s * (sigma * lam1 * (-2.0 * (xl + xi - b0) / width) * e_img
                                 - 2.0 * (xl - xi + b0) / width * e_dir)
            return norm_s * (sigma * lam1 * e_img + e_dir)

        def cross(xi):
            arg = xl / a_s - (xi - b0) / a_o
            e = np.exp(-arg ** 2 / (4.0 * tau))
            if derivative:
                return norm_o * (-arg / (2.0 * tau * a_s)) * e
            return norm_o * e

        if sigma > 0:
            near = profile.real_integral(same, b0, np.inf, points=[xl + b0])
            far = profile.real_integral(cross, -np.inf, b0)
        else:
            near = profile.real_integral(same, -np.inf, b0, points=[xl + b0])
            far = profile.real_integral(cross, b0, np.inf)
        return near + far

    def _point(self, x: float, t: float, side: int, derivative: bool) -> float:
        b0 = self.spec.breakpoints[0]
        xl = x - b0
        sigma = 1 if (xl > 0 or (xl == 0 and side > 0)) else -1
        a_s, _, lam_o = self._sides(sigma)
        gamma = self.coeffs.gamma
        if derivative:
            value = lam_o * gamma * np.exp(-xl ** 2 / (4 * a_s ** 2 * t)) / (a_s * np.sqrt(np.pi * t))
        else:
            value = -sigma * lam_o * gamma * erfc(sigma * xl / (2 * a_s * np.sqrt(t)))
        if not self.spec.initial.is_zero:
            value += self._poisson(self.spec.initial, xl, sigma, t, derivative)
        if self.spec.sources:
            # Duhamel integral with tau = t - v^2 removing the 1/sqrt(t - tau) endpoint singularity
            v, w = gauss_panels(0.0, np.sqrt(t), max(2, self.time_nodes // 16))
            for source in self.spec.sources:
                for vi, wi in zip(v, w):
                    kernel = self._poisson(source.profile, xl, sigma, vi ** 2, derivative)
                    value += 2.0 * vi * wi * kernel * np.exp(-source.rate * (t - vi ** 2))
        return float(value)

    @requires_positive_time()
    def u(self, x, t, side: int = 1):
        """Decaying part u = u0 - levels"""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return np.array([self._point(v, float(t), side, False) for v in x])

    @requires_positive_time()
    def gradient(self, x, t, side: int = 1):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return np.array([self._point(v, float(t), side, True) for v in x])

    def total(self, x, t, side: int = 1):
        """Total temperature u0"""
        return self.u(x, t, side) + self.spec.level(x, side)

    def __call__(self, x, t, side: int = 1):
        return self.total(x, t, side)


def solve_two_part(spec: RodSpec) -> TwoPartSolution:
    return TwoPartSolution(spec)


class LaplaceRod:
    """
    Transformed problem a_j^2 u'' - p u = -S on each segment, assembled from
    segment Green functions and homogeneous exponentials, 2m unknowns.
    """

    def __init__(self, spec: RodSpec):
        self.spec = spec
        self.lengths = np.diff(spec.breakpoints)
        self._transforms: Dict[tuple, tuple] = {}

    def _bounds(self, j: int):
        b = self.spec.breakpoints
        lo = -np.inf if j == 0 else b[j - 1]
        hi = np.inf if j == self.spec.m else b[j]
        return lo, hi

    def _particular(self, j: int, p: complex, xs: np.ndarray):
        """Segment Green-function particular solution and slope at points xs"""
        a_j = self.spec.a[j]
        root = sqrt_p(p)
        q = root / a_j
        lo, hi = self._bounds(j)
        value = np.zeros(xs.shape, dtype=complex)
        slope = np.zeros(xs.shape, dtype=complex)
        density = max(4.0, 1.5 * abs(q))
        for profile, weight in _source_density(self.spec, p):
            kernel = lambda xi: np.exp(-q * np.abs(xs[:, None] - xi[None, :]))
            signed = lambda xi: -q * np.sign(xs[:, None] - xi[None, :]) * np.exp(-q * np.abs(xs[:, None] - xi[None, :]))
            scale = weight / (2.0 * a_j * root)
            value += scale * profile.weighted_integral(kernel, lo, hi, extra=xs, panels_per_unit=density)
            slope += scale * profile.weighted_integral(signed, lo, hi, extra=xs, panels_per_unit=density)
        if j == 0:
            value += self.spec.gamma_minus / p
        if j == self.spec.m:
            value += self.spec.gamma_plus / p
        return value, slope

    def _basis(self, j: int, q: complex, x: np.ndarray):
        """Homogeneous basis values and slopes on segment j, shape (len(x), n_basis)"""
        b = self.spec.breakpoints
        if j == 0:
            e = np.exp(q * (x - b[0]))
            return e[:, None], (q * e)[:, None]
        if j == self.spec.m:
            e = np.exp(-q * (x - b[-1]))
            return e[:, None], (-q * e)[:, None]
        e_a = np.exp(-q * (x - b[j - 1]))
        e_b = np.exp(-q * (b[j] - x))
        return np.stack([e_a, e_b], axis=1), np.stack([-q * e_a, q * e_b], axis=1)

    def _columns(self, j: int) -> List[int]:
        if j == 0:
            return [0]
        if j == self.spec.m:
            return [2 * self.spec.m - 1]
        return [2 * j - 1, 2 * j]

    def solve(self, p: complex) -> np.ndarray:
        """Homogeneous coefficients of every segment for one Laplace parameter"""
        spec, m = self.spec, self.spec.m
        matrix = np.zeros((2 * m, 2 * m), dtype=complex)
        rhs = np.zeros(2 * m, dtype=complex)
        roots = [sqrt_p(p) / a for a in spec.a]
        for i, b in enumerate(spec.breakpoints):
            point = np.array([b])
            left_val, left_der = self._basis(i, roots[i], point)
            right_val, right_der = self._basis(i + 1, roots[i + 1], point)
            matrix[2 * i, self._columns(i)] = left_val[0]
            matrix[2 * i, self._columns(i + 1)] = -right_val[0]
            matrix[2 * i + 1, self._columns(i)] = spec.k[i] * left_der[0]
            matrix[2 * i + 1, self._columns(i + 1)] = -spec.k[i + 1] * right_der[0]
            pl_val, pl_der = self._particular(i, p, point)
            pr_val, pr_der = self._particular(i + 1, p, point)
            rhs[2 * i] = pr_val[0] - pl_val[0]
            rhs[2 * i + 1] = spec.k[i + 1] * pr_der[0] - spec.k[i] * pl_der[0]
        cond = np.linalg.cond(matrix)
        if not np.isfinite(cond) or cond > CONDITION_LIMIT:
            raise SingularSystemError(f"interface matrix at p={p:.6g} has condition number {cond:.3e}")
        return np.linalg.solve(matrix, rhs)

    def transform(self, p: complex, xs: tuple, side: int = 1):
        """Transformed total temperature and slope at the points xs, memoized per rod"""
        key = (p, xs, side)
        if key not in self._transforms:
            if len(self._transforms) >= TRANSFORM_CACHE_SIZE:
                self._transforms.pop(next(iter(self._transforms)))
            self._transforms[key] = self._transform(p, xs, side)
        return self._transforms[key]

    def _transform(self, p: complex, xs: tuple, side: int):
        coeffs = self.solve(p)
        x = np.asarray(xs, dtype=float)
        value = np.zeros(x.shape, dtype=complex)
        slope = np.zeros(x.shape, dtype=complex)
        segments = np.array([self.spec.segment_of(v, side) for v in x], dtype=int)
        for j in np.unique(segments):
            mask = segments == j
            q = sqrt_p(p) / self.spec.a[j]
            basis, basis_der = self._basis(j, q, x[mask])
            c = coeffs[self._columns(j)]
            part, part_der = self._particular(j, p, x[mask])
            value[mask] = basis @ c + part
            slope[mask] = basis_der @ c + part_der
        return value, slope


class GeneralRodSolution:
    """Temperature of an m-breakpoint rod by Talbot inversion of the Green-function system"""

    def __init__(self, spec: RodSpec, nodes: int = TALBOT_NODES, tol: float = DEFAULT_TOL):
        self.spec = spec
        self.nodes = nodes
        self.tol = tol
        self.laplace = LaplaceRod(spec)
        logger.info(f"General rod: {spec.m} breakpoints, a={spec.a}, k={spec.k}, Talbot nodes={nodes}")

    def _invert(self, x, t, side: int, index: int):
        xs = tuple(float(v) for v in np.atleast_1d(np.asarray(x, dtype=float)))

        def transform(ps):
            return np.stack([self.laplace.transform(complex(p), xs, side)[index] for p in ps])

        return np.asarray(talbot_invert(transform, float(t), self.nodes, self.tol), dtype=float)

    @requires_positive_time()
    def total(self, x, t, side: int = 1):
        return self._invert(x, t, side, 0)

    @requires_positive_time()
    def gradient(self, x, t, side: int = 1):
        return self._invert(x, t, side, 1)

    def u(self, x, t, side: int = 1):
        return self.total(x, t, side) - self.spec.level(x, side)

    def __call__(self, x, t, side: int = 1):
        return self.total(x, t, side)


def solve_general_n(spec: RodSpec, nodes: int = TALBOT_NODES, tol: float = DEFAULT_TOL) -> GeneralRodSolution:
    if spec.m < 2:
        raise DomainError(f"general-n route needs at least two breakpoints, got {spec.m}")
    return GeneralRodSolution(spec, nodes, tol)


def interface_residuals(solution, t: float) -> List[Dict[str, float]]:
    """
    Per breakpoint: jump u(b-) - u(b+) of the decaying part with its prescribed
    value, and the residuals of total-temperature continuity and flux balance.
    """
    spec = solution.spec
    report = []
    for i, b in enumerate(spec.breakpoints):
        left = float(solution.total(b, t, side=-1)[0])
        right = float(solution.total(b, t, side=1)[0])
        level_left = float(spec.level(b, -1)[0])
        level_right = float(spec.level(b, 1)[0])
        flux_left = spec.k[i] * float(solution.gradient(b, t, side=-1)[0])
        flux_right = spec.k[i + 1] * float(solution.gradient(b, t, side=1)[0])
        report.append({
            'breakpoint': b,
            'jump': (left - level_left) - (right - level_right),
            'expected_jump': level_right - level_left,
            'value': left - right,
            'flux': flux_left - flux_right,
        })
        logger.debug(f"Interface {b}: value residual {left - right:.3e}, flux residual {flux_left - flux_right:.3e}")
    return report
