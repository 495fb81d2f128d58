"""
Slit Strip Solver
Helmholtz field in a strip with a loaded slit: scalar factorization, truncated residue system, field reconstruction.
"""

import copy
import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy import linalg

from config import (
    CONDITION_LIMIT, DEFAULT_TOL, DEFAULT_TRUNCATION, MAX_NODES, MAX_TRUNCATION, PANEL_ORDER,
    STRIP_CIRCLE_POINTS, STRIP_DEGENERATE_EPS, STRIP_EVAL_CHUNK, STRIP_FIELD_WINDOW, STRIP_LOG_REACH,
    STRIP_MERGE_EPS, STRIP_MOLLIFIER, STRIP_OSCILLATORY_HALF_LENGTH, STRIP_SAMPLE_POINTS, STRIP_QUAD_TOL_FACTOR,
)
from utils.checks import requires_upper_k
from utils.contour_quad import CauchyDensity, CauchyIntegral, LineContour, gauss_panels
from utils.errors import ConvergenceError, DomainError, SingularSystemError, TailDivergenceError
from utils.factors import FactorPair
from utils.profiles import BoxProfile, Profile
from utils.special_fn import gamma_branch, sqrt_cut_down, sqrt_cut_up

logger = logging.getLogger(__name__)

NORMALIZATIONS = ('normalized', 'bare')


@dataclass(frozen=True)
class StripSpec:
    """
    (Laplacian + k^2) u = 0 in -b_minus < y < b_plus, u_y = 0 on both sides of
    the strip and u_y = f on both faces of the slit 0 < x < 1, y = 0.
    """

    b_plus: float
    b_minus: float
    k: complex
    load: Profile = field(default_factory=lambda: BoxProfile(0.0, 1.0))
    truncation: int = DEFAULT_TRUNCATION
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        if not (self.b_plus > 0 and self.b_minus > 0):
            raise DomainError(f"half-widths must be positive, got b+={self.b_plus}, b-={self.b_minus}")
        if not 1 <= self.truncation <= MAX_TRUNCATION:
            raise DomainError(f"truncation {self.truncation} outside [1, {MAX_TRUNCATION}]")
        if not self.tol > 0:
            raise DomainError(f"tolerance {self.tol} must be positive")

    @property
    def width(self) -> float:
        return self.b_plus + self.b_minus

    @property
    def symmetric(self) -> bool:
        return abs(self.b_plus - self.b_minus) <= 1e-12 * max(self.b_plus, self.b_minus)


def load_transform(load: Profile, alpha, shift: float = 0.0) -> np.ndarray:
    """int_0^1 f(x) exp(i alpha (x - shift)) dx; shift = 0 gives F+, shift = 1 gives F-"""
    alpha = np.atleast_1d(np.asarray(alpha, dtype=complex))
    if type(load).fourier_window is not Profile.fourier_window:
        return load.fourier_window(alpha, 0.0, 1.0, shift)
    flat = alpha.ravel()
    out = np.zeros(flat.shape, dtype=complex)
    panels = 4.0 + float(np.max(np.abs(flat.real))) / 4.0
    step = 8 * STRIP_EVAL_CHUNK
    for start in range(0, flat.size, step):
        block = flat[start:start + step]
        out[start:start + block.size] = load.weighted_integral(
            lambda xi: np.exp(1j * block[:, None] * (xi[None, :] - shift)), 0.0, 1.0, panels_per_unit=panels)
    return out.reshape(alpha.shape)


def _upper_root(w: complex) -> complex:
    root = complex(np.sqrt(complex(w)))
    return root if root.imag > 0 else -root


def _even_gamma(alpha, k: complex) -> np.ndarray:
    """gamma with Re >= 0, for functions even in gamma"""
    gamma = gamma_branch(np.asarray(alpha, dtype=complex), k)
    return np.where(gamma.real < 0, -gamma, gamma)


class StripFactor:
    """
    K+(a) = (a + k)^{1/2} K0+(a) and K-(a) = (a - k)^{-1/2} K0-(a) with K+ / K- = g,
    g(a) = gamma sinh(gamma b+) sinh(gamma b-) / sinh(gamma (b+ + b-)).
    log K0(a) = (a / pi i) int_0^inf log S(b) db / (b^2 - a^2), S = g / gamma; the
    -log 2 limit of log S is integrated in closed form.
    """

    def __init__(self, spec: StripSpec):
        self.k = complex(spec.k)
        self.b_plus, self.b_minus = float(spec.b_plus), float(spec.b_minus)
        self.width = self.b_plus + self.b_minus
        self.cutoff = STRIP_LOG_REACH / min(self.b_plus, self.b_minus) + 2.0 * abs(self.k)
        self.band = min(0.5, 0.25 * self.k.imag, 0.25 * min(self.b_plus, self.b_minus))
        tail = float(np.max(np.abs(self.log_density(self.cutoff))))
        if tail > 1e-15:
            raise TailDivergenceError(f"log K0 density {tail:.3e} at the cutoff {self.cutoff:.4g}")
        self._resolve()

    def log_density(self, beta) -> np.ndarray:
        """log(2 S), continuous on the real axis and vanishing at infinity"""
        gamma = gamma_branch(np.asarray(beta, dtype=complex), self.k)
        return (np.log1p(-np.exp(-2.0 * gamma * self.b_plus)) + np.log1p(-np.exp(-2.0 * gamma * self.b_minus))
                - np.log1p(-np.exp(-2.0 * gamma * self.width)))

    def _rule(self, panels: int):
        beta, weights = gauss_panels(0.0, self.cutoff, panels)
        self._beta, self._weights, self._ell = beta, weights, self.log_density(beta)
        self.panels = panels

    def _resolve(self):
        samples = np.array([0.37, 1.9, abs(self.k), 0.5 * self.cutoff, 0.8 + 2.0 * self.band], dtype=complex)
        panels = int(np.ceil(self.cutoff / self.band))
        self._rule(panels)
        previous = self._log_k0_block(samples, 1)
        for _ in range(6):
            self._rule(2 * panels)
            current = self._log_k0_block(samples, 1)
            change = float(np.max(np.abs(current - previous)))
            logger.debug(f"log K0 rule panels={2 * panels} change={change:.3e}")
            if change <= 1e-13:
                return
            previous, panels = current, 2 * panels
        raise ConvergenceError(f"log K0 quadrature unresolved at {panels} panels")

    def _window_integral(self, a: np.ndarray, sides: np.ndarray) -> np.ndarray:
        """a * int_0^B db / (b^2 - a^2) for Re a >= 0, real points taking the side's limit"""
        big = self.cutoff
        out = np.empty(a.shape, dtype=complex)
        real = a.imag == 0
        ar = a.real[real]
        out[real] = (0.5 * np.log(np.abs((big - ar) / (big + ar)))
                     + 0.5j * np.pi * sides[real] * (np.abs(ar) < big))
        ac = a[~real]
        out[~real] = 0.5 * (np.log(big - ac) - np.log(-ac) - np.log(big + ac) + np.log(ac))
        return out

    def _log_k0_block(self, a: np.ndarray, side: int) -> np.ndarray:
        sides = np.where(a.imag > 0, 1.0, np.where(a.imag < 0, -1.0, float(side)))
        # log K0 is odd, so near-axis points are moved to Re a >= 0
        flip = (np.abs(a.imag) < self.band) & (a.real < 0)
        a = np.where(flip, -a, a)
        sides = np.where(flip, -sides, sides)
        near = np.abs(a.imag) < self.band
        beta, weights, ell = self._beta, self._weights, self._ell
        total = np.zeros(a.shape, dtype=complex)
        if np.any(~near):
            af = a[~near]
            total[~near] = af * ((weights * ell)[None, :] / (beta[None, :] ** 2 - af[:, None] ** 2)).sum(axis=1)
        if np.any(near):
            an = a[near]
            ell_a = self.log_density(an)
            diff = beta[None, :] - an[:, None]
            close = np.abs(diff) < 1e-9
            quotient = (ell[None, :] - ell_a[:, None]) / np.where(close, 1.0, diff)
            if np.any(close):
                slope = (self.log_density(an + 1e-5) - self.log_density(an - 1e-5)) / 2e-5
                quotient = np.where(close, slope[:, None], quotient)
            inner = an * (weights[None, :] * quotient / (beta[None, :] + an[:, None])).sum(axis=1)
            total[near] = inner + ell_a * self._window_integral(an, sides[near])
        log_k0 = total / (1j * np.pi) - 0.5 * np.log(2.0) * sides
        return np.where(flip, -log_k0, log_k0)

    def log_k0(self, alpha, side: int) -> np.ndarray:
        """log K0 at alpha; points on the real axis take the limit from the given side"""
        alpha = np.asarray(alpha, dtype=complex)
        flat = np.atleast_1d(alpha).ravel()
        out = np.empty(flat.shape, dtype=complex)
        step = 16 * STRIP_EVAL_CHUNK
        for start in range(0, flat.size, step):
            out[start:start + step] = self._log_k0_block(flat[start:start + step], side)
        return out.reshape(alpha.shape)

    def plus(self, alpha):
        alpha = np.asarray(alpha, dtype=complex)
        if np.any(alpha.imag < -1e-12 * np.maximum(1.0, np.abs(alpha))):
            raise DomainError("K+ is only defined on and above the real axis")
        return sqrt_cut_down(alpha + self.k) * np.exp(self.log_k0(alpha, 1))

    def minus(self, alpha):
        alpha = np.asarray(alpha, dtype=complex)
        if np.any(alpha.imag > 1e-12 * np.maximum(1.0, np.abs(alpha))):
            raise DomainError("K- is only defined on and below the real axis")
        return np.exp(self.log_k0(alpha, -1)) / sqrt_cut_up(alpha - self.k)

    def continued_plus(self, alpha) -> np.ndarray:
        """K+ everywhere, as g K- below the real axis"""
        alpha = np.atleast_1d(np.asarray(alpha, dtype=complex))
        out = np.empty(alpha.shape, dtype=complex)
        lower = alpha.imag < 0
        if np.any(~lower):
            out[~lower] = self.plus(alpha[~lower])
        if np.any(lower):
            out[lower] = self.symbol(alpha[lower]) * self.minus(alpha[lower])
        return out

    def continued_minus(self, alpha) -> np.ndarray:
        """K- everywhere, as K+ / g above the real axis"""
        alpha = np.atleast_1d(np.asarray(alpha, dtype=complex))
        out = np.empty(alpha.shape, dtype=complex)
        upper = alpha.imag > 0
        if np.any(~upper):
            out[~upper] = self.minus(alpha[~upper])
        if np.any(upper):
            out[upper] = self.plus(alpha[upper]) / self.symbol(alpha[upper])
        return out

    def symbol(self, alpha) -> np.ndarray:
        """g(alpha), computed from the decaying exponentials"""
        gamma = _even_gamma(np.atleast_1d(alpha), self.k)
        small = np.abs(gamma) < 1e-8
        safe = np.where(small, 1.0, gamma)
        value = (0.5 * safe * (1.0 - np.exp(-2.0 * safe * self.b_plus)) * (1.0 - np.exp(-2.0 * safe * self.b_minus))
                 / (1.0 - np.exp(-2.0 * safe * self.width)))
        return np.where(small, gamma ** 2 * self.b_plus * self.b_minus / self.width, value)


@requires_upper_k()
def factor_g(spec: StripSpec) -> FactorPair:
    factor = StripFactor(spec)
    logger.info(f"Strip factorization: cutoff {factor.cutoff:.4g}, {factor.panels} panels")
    return FactorPair(factor.plus, factor.minus, 'strip', 'Im alpha >= 0', 'Im alpha <= 0')


def strip_symbol(spec: StripSpec, alpha) -> np.ndarray:
    """g(alpha) = gamma sinh(gamma b+) sinh(gamma b-) / sinh(gamma (b+ + b-))"""
    gamma = _even_gamma(np.atleast_1d(alpha), complex(spec.k))
    return gamma * np.sinh(gamma * spec.b_plus) * np.sinh(gamma * spec.b_minus) / np.sinh(gamma * spec.width)


@dataclass(frozen=True)
class StripZero:
    """Zero of g in the upper half-plane; members lists its (lattice sign, m) labels"""

    value: complex
    slope: complex
    members: Tuple[Tuple[int, int], ...] = ()


@requires_upper_k()
def zero_lattice(spec: StripSpec, truncation: Optional[int] = None) -> List[StripZero]:
    """
    k and alpha_m = sqrt(k^2 - (pi m / b)^2), m = 1..N, for b = b+ and b-, with
    Im > 0. Coinciding zeros of the two lattices appear once.
    """
    count = spec.truncation if truncation is None else truncation
    k = complex(spec.k)
    b_plus, b_minus, width = spec.b_plus, spec.b_minus, spec.width
    zeros = [StripZero(k, 2.0 * k * b_plus * b_minus / width)]
    for m in range(1, count + 1):
        for sign, b, other in ((1, b_plus, b_minus), (-1, b_minus, b_plus)):
            value = _upper_root(k ** 2 - (np.pi * m / b) ** 2)
            if any(abs(zero.value - value) <= 1e-10 * abs(value) for zero in zeros):
                continue
            ratio = abs(np.sin(np.pi * m * other / b))
            if ratio <= STRIP_MERGE_EPS:
                partner = (-sign, int(round(m * other / b)))
                zeros.append(StripZero(value, value * b_plus * b_minus / width, ((sign, m), partner)))
            elif ratio < STRIP_DEGENERATE_EPS:
                raise SingularSystemError(
                    f"sin(pi {m} b/b') = {ratio:.3e}: nearly commensurate half-widths {b_plus}, {b_minus}")
            else:
                # cosh(gamma b) and sinh(gamma b') / sinh(gamma (b + b')) cancel at the zero
                zeros.append(StripZero(value, value * b, ((sign, m),)))
    return zeros


def _contour_nodes(shift: float) -> int:
    panels = 2.0 * STRIP_OSCILLATORY_HALF_LENGTH / min(0.5, 0.3 * shift)
    nodes = PANEL_ORDER * 2 ** int(np.ceil(np.log2(panels)))
    return int(min(MAX_NODES // 2, nodes))


class StripSplit:
    """
    Cauchy splittings Psi_minus of K- F+ and Psi_plus of F- / K+. The line of
    Psi_minus is moved down to Im = -c and that of Psi_plus up to Im = c,
    c = Im k / 2, where the densities stay analytic; values on the far side of a
    line pick up the density. 'bare' drops the 1/(2 pi i) of the Cauchy transform.
    """

    def __init__(self, spec: StripSpec, factor: StripFactor, normalization: str = 'normalized',
                 tol: Optional[float] = None):
        if normalization not in NORMALIZATIONS:
            raise DomainError(f"unknown Psi normalization '{normalization}'")
        self.spec = spec
        self.factor = factor
        self.normalization = normalization
        self.scale = 1.0 if normalization == 'normalized' else 2j * np.pi
        self.shift = 0.5 * factor.k.imag
        self.zero = spec.load.is_zero
        tol = STRIP_QUAD_TOL_FACTOR * spec.tol if tol is None else tol
        below = LineContour(offset=-self.shift, half_length=STRIP_OSCILLATORY_HALF_LENGTH,
                            nodes=_contour_nodes(self.shift), stretch='uniform')
        above = replace(below, offset=self.shift)
        self.lower = CauchyIntegral(CauchyDensity(self.minus_density, decay='oscillatory'), below, tol)
        self.upper = CauchyIntegral(CauchyDensity(self.plus_density, decay='oscillatory'), above, tol)
        logger.debug(f"Strip splitting on lines Im = -+{self.shift:.4g} with {below.nodes} starting nodes")

    def renormalized(self, normalization: str) -> 'StripSplit':
        """The same splitting under another normalization, sharing the sampled densities"""
        if normalization not in NORMALIZATIONS:
            raise DomainError(f"unknown Psi normalization '{normalization}'")
        other = copy.copy(self)
        other.normalization = normalization
        other.scale = 1.0 if normalization == 'normalized' else 2j * np.pi
        return other

    def minus_density(self, beta) -> np.ndarray:
        """K- F+, the jump of Psi_minus"""
        return self.factor.continued_minus(beta) * load_transform(self.spec.load, beta)

    def plus_density(self, beta) -> np.ndarray:
        """F- / K+, the jump of Psi_plus"""
        return load_transform(self.spec.load, beta, shift=1.0) / self.factor.continued_plus(beta)

    @staticmethod
    def _integral(integral: CauchyIntegral, z: np.ndarray) -> np.ndarray:
        return np.concatenate([np.atleast_1d(integral(z[i:i + STRIP_EVAL_CHUNK]))
                               for i in range(0, z.size, STRIP_EVAL_CHUNK)])

    def psi_minus(self, z, side: int) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=complex)).ravel()
        if self.zero:
            return np.zeros(z.shape, dtype=complex)
        value = self._integral(self.lower, z)
        below = z.imag < -self.shift
        crossing = below if side > 0 else ~below
        if np.any(crossing):
            value[crossing] += side * self.minus_density(z[crossing])
        return self.scale * value

    def psi_plus(self, z, side: int) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=complex)).ravel()
        if self.zero:
            return np.zeros(z.shape, dtype=complex)
        value = self._integral(self.upper, z)
        above = z.imag > self.shift
        crossing = ~above if side > 0 else above
        if np.any(crossing):
            value[crossing] += side * self.plus_density(z[crossing])
        return self.scale * value


@dataclass(frozen=True)
class StripSystem:
    """
    Residue system in the scaled unknowns B = A / w, w = delta e^{i z}:
    B+_n - sum_m w_m B-_m / (z_n + z_m) = -Psi_minus(-z_n),
    B-_n + sum_m w_m B+_m / (z_n + z_m) = Psi_plus(z_n).
    """

    zeros: List[StripZero]
    delta: np.ndarray
    weights: np.ndarray
    matrix: np.ndarray
    rhs: np.ndarray

    @property
    def values(self) -> np.ndarray:
        return np.array([zero.value for zero in self.zeros])

    def coefficient_form(self) -> Tuple[np.ndarray, np.ndarray]:
        """A+_n - w_n sum A-_m / (z_n + z_m) = h+_n, A-_n + w_n sum A+_m / (z_n + z_m) = h-_n"""
        z = self.values
        coupling = self.weights[:, None] / (z[:, None] + z[None, :])
        eye = np.eye(z.size)
        matrix = np.block([[eye, -coupling], [coupling, eye]])
        return matrix, np.concatenate([self.weights, self.weights]) * self.rhs


@requires_upper_k()
def assemble_system(spec: StripSpec, truncation: Optional[int] = None, factor: Optional[StripFactor] = None,
                    split: Optional[StripSplit] = None) -> StripSystem:
    factor = StripFactor(spec) if factor is None else factor
    split = StripSplit(spec, factor) if split is None else split
    zeros = zero_lattice(spec, truncation)
    z = np.array([zero.value for zero in zeros])
    slope = np.array([zero.slope for zero in zeros])
    delta = factor.plus(z) ** 2 / slope
    weights = delta * np.exp(1j * z)
    coupling = weights[None, :] / (z[:, None] + z[None, :])
    eye = np.eye(z.size)
    matrix = np.block([[eye, -coupling], [coupling, eye]])
    rhs = np.concatenate([-split.psi_minus(-z, -1), split.psi_plus(z, 1)])
    logger.debug(f"Strip system: {z.size} zeros, |w| from {abs(weights[0]):.3e} to {abs(weights[-1]):.3e}")
    return StripSystem(zeros, delta, weights, matrix, rhs)


@dataclass(frozen=True)
class CoeffSolution:
    """Residues A+ of Omega+ = sum A+ / (a + z) and A- of Omega- = sum A- / (a - z)"""

    zeros: List[StripZero]
    plus: np.ndarray
    minus: np.ndarray
    delta: np.ndarray
    residual: float = 0.0
    drift: float = float('nan')
    decay: Tuple[float, float] = (0.0, float('inf'))
    truncation: int = 0

    @classmethod
    def empty(cls, zeros: List[StripZero]) -> 'CoeffSolution':
        size = len(zeros)
        return cls(zeros, np.zeros(size, dtype=complex), np.zeros(size, dtype=complex), np.ones(size))

    @property
    def values(self) -> np.ndarray:
        return np.array([zero.value for zero in self.zeros])

    def omega_plus(self, alpha) -> np.ndarray:
        alpha = np.atleast_1d(np.asarray(alpha, dtype=complex))
        return (self.plus[None, :] / (alpha[:, None] + self.values[None, :])).sum(axis=1)

    def omega_minus(self, alpha) -> np.ndarray:
        alpha = np.atleast_1d(np.asarray(alpha, dtype=complex))
        return (self.minus[None, :] / (alpha[:, None] - self.values[None, :])).sum(axis=1)


def _decay_fit(zeros: List[StripZero], plus: np.ndarray, minus: np.ndarray) -> Tuple[float, float]:
    """(c, q) with |A_m| ~ c e^{-q m} along each lattice; the slower lattice is reported"""
    size = np.abs(plus) + np.abs(minus)
    fits = []
    for sign in (1, -1):
        pairs = [(m, np.log(a)) for zero, a in zip(zeros, size) for s, m in zero.members if s == sign and a > 1e-280]
        if len(pairs) >= 2:
            m, logs = np.array(pairs).T
            slope, intercept = np.polyfit(m, logs, 1)
            fits.append((float(np.exp(intercept)), float(-slope)))
    if not fits:
        return 0.0, float('inf')
    return min(fits, key=lambda fit: fit[1])


def _solve_truncated(spec: StripSpec, factor: StripFactor, split: StripSplit, truncation: int) -> CoeffSolution:
    system = assemble_system(spec, truncation, factor, split)
    cond = np.linalg.cond(system.matrix)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise SingularSystemError(f"strip residue system at N={truncation} has condition number {cond:.3e}")
    scaled = linalg.solve(system.matrix, system.rhs)
    residual = float(np.linalg.norm(system.matrix @ scaled - system.rhs)) / max(1.0, float(np.linalg.norm(system.rhs)))
    size = len(system.zeros)
    plus, minus = system.weights * scaled[:size], system.weights * scaled[size:]
    decay = _decay_fit(system.zeros, plus, minus)
    logger.debug(f"Strip system N={truncation}: residual {residual:.3e}, decay rate {decay[1]:.4g}")
    return CoeffSolution(system.zeros, plus, minus, system.delta, residual, decay=decay, truncation=truncation)


class StripSolution:
    """
    Phi1 (transform of the jump of u across y = 0) and Phi2 (transforms of u_y
    on y = 0 left of the slit and right of it) from the solved residue system.
    """

    def __init__(self, spec: StripSpec, factor: StripFactor, split: StripSplit, coeffs: CoeffSolution):
        self.spec = spec
        self.factor = factor
        self.split = split
        self.coeffs = coeffs
        self.k = complex(spec.k)
        self.line_height = 0.25 * self.k.imag
        self._axis: Dict[Tuple[int, bytes], Tuple[np.ndarray, np.ndarray]] = {}
        self._lines: Dict[float, Tuple[np.ndarray, np.ndarray, np.ndarray]] = {}

    @staticmethod
    def _points(alpha, side: int) -> np.ndarray:
        alpha = np.atleast_1d(np.asarray(alpha, dtype=complex)).ravel()
        if np.any(side * alpha.imag < 0):
            raise DomainError(f"points must lie {'on or above' if side > 0 else 'on or below'} the real axis")
        return alpha

    def _psi(self, alpha: np.ndarray, side: int) -> Tuple[np.ndarray, np.ndarray]:
        """(Psi_minus, Psi_plus) on one side, kept for points on the real axis"""
        key = (side, alpha.tobytes())
        if key in self._axis:
            return self._axis[key]
        value = self.split.psi_minus(alpha, side), self.split.psi_plus(alpha, side)
        if np.all(alpha.imag == 0):
            self._axis[key] = value
        return value

    def phi1_plus(self, alpha) -> np.ndarray:
        alpha = self._points(alpha, 1)
        psi_minus, psi_plus = self._psi(alpha, 1)
        return (-(psi_minus + self.coeffs.omega_minus(alpha)) / self.factor.plus(alpha)
                + np.exp(1j * alpha) * self.factor.continued_minus(alpha) * (psi_plus - self.coeffs.omega_plus(alpha)))

    def phi1_minus(self, alpha) -> np.ndarray:
        alpha = self._points(alpha, -1)
        psi_minus, psi_plus = self._psi(alpha, -1)
        return (self.factor.minus(alpha) * (psi_plus - self.coeffs.omega_plus(alpha))
                - np.exp(-1j * alpha) * (psi_minus + self.coeffs.omega_minus(alpha))
                / self.factor.continued_plus(alpha))

    def phi2_plus(self, alpha) -> np.ndarray:
        alpha = self._points(alpha, 1)
        _, psi_plus = self._psi(alpha, 1)
        return self.factor.plus(alpha) * (self.coeffs.omega_plus(alpha) - psi_plus)

    def phi2_minus(self, alpha) -> np.ndarray:
        alpha = self._points(alpha, -1)
        psi_minus, _ = self._psi(alpha, -1)
        return (psi_minus + self.coeffs.omega_minus(alpha)) / self.factor.minus(alpha)

    def pole_residues(self, count: Optional[int] = None, points: int = STRIP_CIRCLE_POINTS) -> Dict[str, float]:
        """|residue| of Phi1+ at each retained zero z and of Phi1- at -z, by the trapezoid rule on circles"""
        zeros = self.coeffs.values
        angle = 2.0 * np.pi * np.arange(points) / points
        residues = {}
        for j, z in enumerate(zeros[:count]):
            others = np.delete(zeros, j)
            gap = float(np.min(np.abs(others - z))) if others.size else np.inf
            ring = min(0.4 * gap, 0.25 * self.k.imag) * np.exp(1j * angle)
            residues[f'phi1_plus@{j}'] = float(abs(np.mean(self.phi1_plus(z + ring) * ring)))
            residues[f'phi1_minus@{j}'] = float(abs(np.mean(self.phi1_minus(-z + ring) * ring)))
        return residues

    def _line(self, window: float):
        """Gauss nodes on Im alpha = line_height, |Re alpha| <= window, with Phi1+ there"""
        if window not in self._lines:
            width = min(2.0, self.k.imag)
            xi, weights = gauss_panels(-window, window, int(np.ceil(2.0 * window / width)))
            alpha = xi + 1j * self.line_height
            self._lines[window] = (alpha, weights, self.phi1_plus(alpha))
            logger.debug(f"Phi1+ sampled at {alpha.size} points for |Re alpha| <= {window:g}")
        return self._lines[window]

    def inverse(self, x, multiplier: Callable, window: float, mollifier: float = 0.0) -> np.ndarray:
        """(1/2 pi) int M(alpha) Phi1+(alpha) exp(-i alpha x) dalpha, Gaussian-damped when mollifier > 0"""
        alpha, weights, phi = self._line(window)
        kernel = weights * multiplier(alpha) * phi
        if mollifier > 0:
            kernel = kernel * np.exp(-0.5 * (mollifier * alpha) ** 2)
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return np.exp(-1j * np.outer(x, alpha)) @ kernel / (2.0 * np.pi)

    def diagnostics(self) -> Dict[str, object]:
        residues = self.pole_residues(count=3)
        c, q = self.coeffs.decay
        return {
            'k': self.k,
            'b_plus': self.spec.b_plus,
            'b_minus': self.spec.b_minus,
            'normalization': self.split.normalization,
            'truncation': self.coeffs.truncation,
            'zeros': len(self.coeffs.zeros),
            'system_residual': self.coeffs.residual,
            'coefficient_drift': self.coeffs.drift,
            'decay_c': c,
            'decay_q': q,
            'max_residue': max(residues.values()),
        }


def strip_rhp_residual(solution: StripSolution, alphas) -> float:
    """max |Phi+ - G Phi- - F- J| over real alphas"""
    alpha = np.atleast_1d(np.asarray(alphas, dtype=float)).astype(complex)
    phi1_minus = solution.phi1_minus(alpha)
    first = solution.phi1_plus(alpha) - np.exp(1j * alpha) * phi1_minus
    second = (solution.phi2_plus(alpha) + solution.factor.symbol(alpha) * phi1_minus
              + np.exp(-1j * alpha) * solution.phi2_minus(alpha) + load_transform(solution.spec.load, alpha, 1.0))
    return float(max(np.max(np.abs(first)), np.max(np.abs(second))))


def select_normalization(spec: StripSpec, split: StripSplit) -> str:
    """Psi normalization whose boundary relation residual is smallest"""
    samples = np.linspace(-4.0, 4.0, STRIP_SAMPLE_POINTS) + 0.0731
    residuals = {}
    for normalization in NORMALIZATIONS:
        trial = StripSolution(spec, split.factor, split.renormalized(normalization),
                              CoeffSolution.empty(zero_lattice(spec, 1)))
        residuals[normalization] = strip_rhp_residual(trial, samples)
    chosen = min(residuals, key=residuals.get)
    logger.info(f"Psi normalization '{chosen}' selected; boundary residuals "
                + ", ".join(f"{name}={value:.3e}" for name, value in residuals.items()))
    return chosen


@requires_upper_k()
def solve_strip(spec: StripSpec, normalization: str = 'auto', adaptive: bool = True) -> StripSolution:
    """
    Solve the residue system at N = spec.truncation and, when adaptive, double N
    until no retained coefficient moves by more than spec.tol.
    """
    factor = StripFactor(spec)
    split = StripSplit(spec, factor)
    if normalization == 'auto':
        normalization = select_normalization(spec, split)
    split = split.renormalized(normalization)
    truncation = spec.truncation
    coeffs = _solve_truncated(spec, factor, split, truncation)
    while adaptive:
        if 2 * truncation > MAX_TRUNCATION:
            raise ConvergenceError(f"strip coefficients unconverged at N={truncation}")
        doubled = _solve_truncated(spec, factor, split, 2 * truncation)
        count = len(coeffs.zeros)
        if not np.allclose(doubled.values[:count], coeffs.values):
            raise ConvergenceError("doubled zero lattice does not extend the retained one")
        drift = float(max(np.max(np.abs(doubled.plus[:count] - coeffs.plus)),
                          np.max(np.abs(doubled.minus[:count] - coeffs.minus))))
        scale = max(1.0, float(np.max(np.abs(np.concatenate([doubled.plus, doubled.minus])))))
        logger.debug(f"Strip truncation {truncation} -> {2 * truncation}: drift {drift:.3e}")
        coeffs, truncation = replace(doubled, drift=drift), 2 * truncation
        if drift <= spec.tol * scale:
            break
    logger.info(f"Strip solved: k={spec.k}, b+={spec.b_plus}, b-={spec.b_minus}, N={truncation}, "
                f"residual {coeffs.residual:.3e}, drift {coeffs.drift:.3e}")
    return StripSolution(spec, factor, split, coeffs)


def _window(height: float, width: float = STRIP_MOLLIFIER) -> float:
    reach = 9.0 / width if height == 0 else 40.0 / height
    return float(min(STRIP_FIELD_WINDOW, 2.0 ** np.ceil(np.log2(reach))))


def _vertical_factor(solution: StripSolution, alpha: np.ndarray, y: float, upper: bool, derivative: bool):
    """u-hat(alpha, y) / Phi1+(alpha) (or its y-derivative) in decaying-exponential form"""
    spec = solution.spec
    gamma = _even_gamma(alpha, solution.k)
    near, far = (spec.b_minus, spec.b_plus) if upper else (spec.b_plus, spec.b_minus)
    depth = abs(y)
    front = 0.5 * np.exp(-gamma * depth) * (1.0 - np.exp(-2.0 * gamma * near)) / (1.0 - np.exp(-2.0 * gamma * spec.width))
    if derivative:
        return -gamma * front * (1.0 - np.exp(-2.0 * gamma * (far - depth)))
    value = front * (1.0 + np.exp(-2.0 * gamma * (far - depth)))
    return value if upper else -value


def eval_strip_field(solution: StripSolution, x, y, side: Optional[int] = None,
                     derivative: bool = False) -> np.ndarray:
    """
    u(x, y) (or u_y) by inverse Fourier quadrature on a line just above the real
    axis. Points on the slit need side = +1 or -1; other points of y = 0 use a
    Gaussian-mollified transform.
    """
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    spec = solution.spec
    if np.any(y > spec.b_plus) or np.any(y < -spec.b_minus):
        raise DomainError(f"y must lie in [-{spec.b_minus}, {spec.b_plus}]")
    on_slit = (y == 0) & (x > 0) & (x < 1)
    if np.any(on_slit) and side not in (1, -1):
        raise DomainError("points on the slit need side=+1 or side=-1")
    out = np.empty(x.shape, dtype=complex)
    for height in np.unique(y):
        mask = y == height
        upper = height > 0 or (height == 0 and side != -1)
        multiplier = lambda a, h=height, up=upper: _vertical_factor(solution, a, h, up, derivative)
        mollifier = STRIP_MOLLIFIER if height == 0 else 0.0
        out[mask] = solution.inverse(x[mask], multiplier, _window(abs(height)), mollifier)
    return out


def crack_opening(solution: StripSolution, x, width: float = STRIP_MOLLIFIER) -> np.ndarray:
    """Jump u(x, 0+) - u(x, 0-) smoothed by a Gaussian of the given width"""
    return solution.inverse(x, lambda a: 1.0, _window(0.0, width), width)


def crack_flux(solution: StripSolution, x, width: float = STRIP_MOLLIFIER) -> np.ndarray:
    """u_y(x, 0) smoothed by a Gaussian of the given width; equals f on the slit"""
    return solution.inverse(x, lambda a: -solution.factor.symbol(a), _window(0.0, width), width)
