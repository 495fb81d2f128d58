"""
Convolution System Solver
Closed-form solution of the two-component convolution system on the half-line.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple

import numpy as np
from numpy.polynomial import legendre
from scipy import integrate

from config import (
    AW_ASYMPTOTE_HEIGHT, AW_OSCILLATORY_HALF_LENGTH, AW_RESIDUAL_EFOLDS, AW_RESIDUAL_PANEL, AW_TAIL_HEIGHT,
    DEFAULT_TOL, TAIL_LIMIT,
)
from utils.checks import requires_normal_lambda
from utils.contour_quad import CauchyDensity, CauchyIntegral, LineContour, gauss_panels
from utils.errors import DomainError, SingularSystemError, TailDivergenceError
from utils.factors import FactorPair, linear_ratio_pair
from utils.profiles import Profile, ZeroProfile

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AWSpec:
    """
    u(x) = lam int_0^inf k(x - t) u(t) dt + f(x) on x > 0 with
    k = [[e^-|x|, e^-|x-a|], [e^-|x+a|, e^-|x|]].
    """

    lam: complex
    a: float
    f1: Profile = field(default_factory=ZeroProfile)
    f2: Profile = field(default_factory=ZeroProfile)

    def __post_init__(self):
        if not self.a > 0:
            raise DomainError(f"offset a={self.a} must be positive")


@dataclass(frozen=True)
class AWConstants:
    lambda0: complex
    lambda1: complex
    b: complex
    d1: complex
    d2: complex
    c1: complex
    c2: complex

    def as_dict(self) -> Dict[str, complex]:
        return dict(self.__dict__)


def aw_branches(lam: complex) -> Tuple[complex, complex]:
    """lambda0 = sqrt(1 - 2 lam), lambda1 = sqrt(1 - 4 lam), both with Re > 0"""
    lam = complex(lam)
    return complex(np.sqrt(1 - 2 * lam)), complex(np.sqrt(1 - 4 * lam))


@requires_normal_lambda()
def aw_factor_pairs(lam: complex) -> Tuple[FactorPair, FactorPair]:
    """
    K0+/K0- = (alpha^2 + 1 - 2 lam) / (alpha^2 + 1) and
    K1+/K1- = (alpha^2 + 1 - 2 lam) / (alpha^2 + 1 - 4 lam).
    """
    l0, l1 = aw_branches(lam)
    k0 = linear_ratio_pair(-1j * l0, -1j, 1j, 1j * l0, name='K0', plus_region='Im > 0', minus_region='Im < 0')
    k1 = linear_ratio_pair(-1j * l0, -1j * l1, 1j * l1, 1j * l0, name='K1', plus_region='Im > 0', minus_region='Im < 0')
    return k0, k1


def aw_symbol(spec: AWSpec, alpha) -> np.ndarray:
    """Matrix coefficient G(alpha) of the boundary relation, shape (..., 2, 2)"""
    alpha = np.asarray(alpha, dtype=complex)
    lam = complex(spec.lam)
    d = alpha ** 2 + 1
    g = np.empty(alpha.shape + (2, 2), dtype=complex)
    g[..., 0, 0] = g[..., 1, 1] = (d - 2 * lam) / d
    g[..., 0, 1] = -2 * lam * np.exp(1j * alpha * spec.a) / d
    g[..., 1, 0] = -2 * lam * np.exp(-1j * alpha * spec.a) / d
    return g


class PsiSplit:
    """
    Cauchy splittings Psi1, Psi2 of the jump densities
    K0- F1+ and F2+/K1- + 2 lam e^{-i alpha a} F1+ / ((alpha + i l0)(alpha - i l1)).
    The residue method subtracts the principal parts at the factor poles and
    splits e^{-i alpha a} F1+ by cutting the support of f1 at x = a; the
    quadrature method evaluates the Cauchy integrals directly.
    """

    def __init__(self, spec: AWSpec, method: str = 'residue', tol: float = DEFAULT_TOL):
        if method not in ('residue', 'quadrature'):
            raise DomainError(f"unknown splitting method '{method}'")
        self.spec = spec
        self.method = method
        self.tol = tol
        self.lam = complex(spec.lam)
        self.l0, self.l1 = aw_branches(self.lam)
        self.k0, self.k1 = aw_factor_pairs(self.lam)
        self.f1_zero, self.f2_zero = spec.f1.is_zero, spec.f2.is_zero
        if method == 'residue':
            self._prepare_residues()
        else:
            self._prepare_quadrature()

    # Shared pieces
    def _q(self, alpha):
        return 1.0 / ((alpha + 1j * self.l0) * (alpha - 1j * self.l1))

    def _shifted_plus(self, alpha):
        """P(alpha) = int_a^inf f1(x) e^{i alpha (x - a)} dx, analytic for Im alpha > 0"""
        return self.spec.f1.fourier_window(alpha, self.spec.a, np.inf, self.spec.a)

    def _shifted_minus(self, alpha):
        """M(alpha) = int_0^a f1(x) e^{i alpha (x - a)} dx, entire and decaying for Im alpha < 0"""
        return self.spec.f1.fourier_window(alpha, 0.0, self.spec.a, self.spec.a)

    def _prepare_residues(self):
        f1, f2 = self.spec.f1, self.spec.f2
        self.c01 = 1j * (self.l0 - 1)
        self.c12 = 1j * (self.l1 - self.l0)
        self.f1_at = complex(f1.fourier_plus(1j * self.l0)[0])
        self.f2_at = complex(f2.fourier_plus(1j * self.l1)[0])
        self.coupled = self.lam != 0 and not self.f1_zero
        if self.coupled:
            self.p_at = complex(self._shifted_plus(1j * self.l1)[0])
            self.m_at = complex(self._shifted_minus(-1j * self.l0)[0])
            self.pole_norm = 1j * (self.l0 + self.l1)

    def _prepare_quadrature(self):
        f1, f2 = self.spec.f1, self.spec.f2
        k0_minus, k1_minus = self.k0.minus, self.k1.minus
        smooth = LineContour()
        wavy = LineContour(stretch='uniform', half_length=AW_OSCILLATORY_HALF_LENGTH)
        self.c1 = CauchyIntegral(CauchyDensity(lambda s: k0_minus(s) * f1.fourier_plus(s)), smooth, self.tol)
        self.c2 = CauchyIntegral(CauchyDensity(lambda s: f2.fourier_plus(s) / k1_minus(s)), smooth, self.tol)
        lam, a = self.lam, self.spec.a
        density = lambda s: 2 * lam * np.exp(-1j * s * a) * f1.fourier_plus(s) * self._q(s)
        self.c2_wave = CauchyIntegral(CauchyDensity(density, decay='oscillatory'), wavy, self.tol)
        logger.info(f"Quadrature splitting on a uniform contour of half-length {AW_OSCILLATORY_HALF_LENGTH}")

    # Residue formulas
    def _psi1_residue(self, alpha, side: int):
        if self.f1_zero:
            return np.zeros(alpha.shape, dtype=complex)
        if side > 0:
            f = self.spec.f1.fourier_plus(alpha)
            return f + self.c01 * (f - self.f1_at) / (alpha - 1j * self.l0)
        return -self.c01 * self.f1_at / (alpha - 1j * self.l0)

    def _psi2_residue(self, alpha, side: int):
        value = np.zeros(alpha.shape, dtype=complex)
        if not self.f2_zero:
            if side > 0:
                f = self.spec.f2.fourier_plus(alpha)
                value += f + self.c12 * (f - self.f2_at) / (alpha - 1j * self.l1)
            else:
                value -= self.c12 * self.f2_at / (alpha - 1j * self.l1)
        if self.coupled:
            lam2 = 2 * self.lam
            p_part = self.p_at / (self.pole_norm * (alpha - 1j * self.l1))
            m_part = self.m_at / (self.pole_norm * (alpha + 1j * self.l0))
            if side > 0:
                value += lam2 * (self._shifted_plus(alpha) * self._q(alpha) - p_part) - lam2 * m_part
            else:
                value -= lam2 * p_part + lam2 * (self._shifted_minus(alpha) * self._q(alpha) + m_part)
        return value

    # Quadrature evaluation
    @staticmethod
    def _side_value(integral: CauchyIntegral, alpha, side: int):
        imag = alpha.imag
        if np.all(imag * side > 0):
            return integral(alpha)
        if np.all(imag == 0):
            plus, minus = integral.boundary_values(alpha.real)
            return plus if side > 0 else minus
        raise DomainError(f"points {alpha} are not all on the {'upper' if side > 0 else 'lower'} side")

    def _evaluate(self, alpha, side: int):
        alpha = np.atleast_1d(np.asarray(alpha, dtype=complex))
        if self.method == 'residue':
            return self._psi1_residue(alpha, side), self._psi2_residue(alpha, side)
        psi1 = self._side_value(self.c1, alpha, side)
        psi2 = self._side_value(self.c2, alpha, side)
        if self.lam != 0 and not self.f1_zero:
            psi2 = psi2 + self._side_value(self.c2_wave, alpha, side)
        return np.asarray(psi1), np.asarray(psi2)

    def plus(self, alpha):
        """(Psi1+, Psi2+) on the real axis or in the upper half-plane"""
        return self._evaluate(alpha, 1)

    def minus(self, alpha):
        """(Psi1-, Psi2-) on the real axis or in the lower half-plane"""
        return self._evaluate(alpha, -1)

    def jumps(self, alpha):
        """Prescribed jumps of Psi1 and Psi2 across the real axis"""
        alpha = np.atleast_1d(np.asarray(alpha, dtype=complex))
        f1 = self.spec.f1.fourier_plus(alpha)
        f2 = self.spec.f2.fourier_plus(alpha)
        first = f1 * self.k0.minus(alpha)
        second = f2 / self.k1.minus(alpha) + 2 * self.lam * np.exp(-1j * alpha * self.spec.a) * f1 * self._q(alpha)
        return first, second


@requires_normal_lambda()
def aw_psi_split(spec: AWSpec, method: str = 'residue', tol: float = DEFAULT_TOL) -> PsiSplit:
    return PsiSplit(spec, method, tol)


class AWSolution:
    """Transforms U1+-, U2+- of the solution and the constants fixing them"""

    def __init__(self, spec: AWSpec, psi: PsiSplit):
        self.spec = spec
        self.psi = psi
        self.lam = psi.lam
        self.l0, self.l1 = psi.l0, psi.l1
        self.k0, self.k1 = psi.k0, psi.k1
        self.constants = self._constants()
        logger.info(f"Convolution system: lambda={self.lam}, a={spec.a}, lambda0={self.l0:.6g}, "
                    f"lambda1={self.l1:.6g}, C1={self.constants.c1:.6g}, C2={self.constants.c2:.6g}")

    def _constants(self) -> AWConstants:
        l0, l1, a = self.l0, self.l1, self.spec.a
        b = 2 * self.lam * np.exp(-a * l0) / ((l0 + 1) * (l0 + l1))
        psi2_plus = complex(self.psi.plus(1j * l0)[1][0])
        psi1_minus = complex(self.psi.minus(-1j * l0)[0][0])
        d1 = 2j * b * l0 * psi2_plus
        d2 = 2j * b * l0 * psi1_minus
        denominator = b ** 2 + 1
        if abs(denominator) < 1e-12:
            raise SingularSystemError(f"b^2 + 1 vanishes for lambda={self.lam}, a={a}")
        c1 = (d1 + b * d2) / denominator
        c2 = (d2 - b * d1) / denominator
        return AWConstants(l0, l1, complex(b), complex(d1), complex(d2), complex(c1), complex(c2))

    def plus(self, alpha):
        """(U1+, U2+) for Im alpha >= 0"""
        alpha = np.atleast_1d(np.asarray(alpha, dtype=complex))
        psi1, psi2 = self.psi.plus(alpha)
        c = self.constants
        inner2 = psi2 + c.c2 / (alpha + 1j * self.l0)
        u2 = self.k1.plus(alpha) * inner2
        coupling = 2 * self.lam * np.exp(1j * alpha * self.spec.a) * u2 / ((alpha + 1j) * (alpha - 1j * self.l0))
        u1 = (psi1 + c.c1 / (alpha - 1j * self.l0) + coupling) / self.k0.plus(alpha)
        return u1, u2

    def minus(self, alpha):
        """(U1-, U2-) for Im alpha <= 0"""
        alpha = np.atleast_1d(np.asarray(alpha, dtype=complex))
        psi1, psi2 = self.psi.minus(alpha)
        c = self.constants
        inner1 = psi1 + c.c1 / (alpha - 1j * self.l0)
        u1 = inner1 / self.k0.minus(alpha)
        coupling = 2 * self.lam * np.exp(-1j * alpha * self.spec.a) * u1 / ((alpha + 1j * self.l0) * (alpha - 1j * self.l1))
        u2 = self.k1.minus(alpha) * (psi2 + c.c2 / (alpha + 1j * self.l0) - coupling)
        return u1, u2

    def plus_stack(self, alpha) -> np.ndarray:
        return np.stack(self.plus(alpha))

    def forcing_stack(self, alpha) -> np.ndarray:
        alpha = np.atleast_1d(np.asarray(alpha, dtype=complex))
        return np.stack([self.spec.f1.fourier_plus(alpha), self.spec.f2.fourier_plus(alpha)])

    def pole_residues(self, points: int = 64) -> Dict[str, complex]:
        """Residues of U1+ at i lambda0 and of U2- at -i lambda0 by the trapezoid rule on small circles"""
        radius = 0.5 * self.l0.real
        angle = 2 * np.pi * np.arange(points) / points
        ring = radius * np.exp(1j * angle)
        u1 = self.plus(1j * self.l0 + ring)[0]
        u2 = self.minus(-1j * self.l0 + ring)[1]
        return {
            'u1_plus': complex(np.mean(u1 * ring)),
            'u2_minus': complex(np.mean(u2 * ring)),
        }

    def diagnostics(self) -> Dict[str, object]:
        residues = self.pole_residues()
        return {
            'lambda': self.lam,
            'a': self.spec.a,
            'method': self.psi.method,
            **self.constants.as_dict(),
            'residue_u1_plus': abs(residues['u1_plus']),
            'residue_u2_minus': abs(residues['u2_minus']),
        }


@requires_normal_lambda()
def aw_solve(spec: AWSpec, method: str = 'residue', tol: float = DEFAULT_TOL) -> AWSolution:
    return AWSolution(spec, aw_psi_split(spec, method, tol))


def aw_rhp_residual(solution: AWSolution, alphas) -> float:
    """max |G U+ - U- - F+| over real sample points"""
    alphas = np.asarray(alphas, dtype=float)
    g = aw_symbol(solution.spec, alphas)
    plus = np.stack(solution.plus(alphas), axis=-1)
    minus = np.stack(solution.minus(alphas), axis=-1)
    forcing = solution.forcing_stack(alphas).T
    residual = np.einsum('nij,nj->ni', g, plus) - minus - forcing
    worst = float(np.max(np.abs(residual)))
    logger.debug(f"Boundary relation residual {worst:.3e} over {alphas.size} points")
    return worst


def _leading_coefficient(transform: Callable) -> np.ndarray:
    """lim alpha T(alpha) along the positive imaginary axis, Richardson-extrapolated"""
    y = AW_ASYMPTOTE_HEIGHT
    first = 1j * y * transform(np.array([1j * y]))[:, 0]
    second = 2j * y * transform(np.array([2j * y]))[:, 0]
    return 2 * second - first


def fourier_inverse(transform: Callable, x, leading: np.ndarray, pole: complex,
                    tol: float = DEFAULT_TOL) -> np.ndarray:
    """
    (1/2 pi) int T(alpha) e^{-i alpha x} d alpha at x > 0 for vector transforms
    T: alpha -> (n, len(alpha)) decaying like leading / alpha. The term
    leading / (alpha - pole) is inverted in closed form.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(x <= 0):
        raise DomainError("inverse transform is evaluated on x > 0 only")
    leading = np.asarray(leading, dtype=complex)

    def remainder(alpha):
        alpha = np.asarray(alpha, dtype=complex)
        return transform(alpha) - leading[:, None] / (alpha[None, :] - pole)

    y = AW_TAIL_HEIGHT
    tail = float(np.max(np.abs(y * remainder(np.array([y, -y])))))
    if tail > TAIL_LIMIT:
        raise TailDivergenceError(f"transform minus its 1/alpha term is {tail / y:.3e} at |alpha|={y:.1e}")
    if tail > tol:
        logger.warning(f"Slow transform decay: tail estimate {tail:.3e}")

    n = leading.size
    out = np.empty((n, x.size), dtype=complex)
    for j, xj in enumerate(x):
        cache: Dict[float, Tuple[np.ndarray, np.ndarray]] = {}

        def parts(alpha: float):
            if alpha not in cache:
                values = remainder(np.array([alpha, -alpha]))
                cache[alpha] = (values[:, 0] + values[:, 1], values[:, 0] - values[:, 1])
            return cache[alpha]

        for c in range(n):
            opts = dict(weight='cos', wvar=xj, epsabs=1e-12)
            sin_opts = dict(weight='sin', wvar=xj, epsabs=1e-12)
            even_re = integrate.quad(lambda a: parts(a)[0][c].real, 0.0, np.inf, **opts)[0]
            even_im = integrate.quad(lambda a: parts(a)[0][c].imag, 0.0, np.inf, **opts)[0]
            odd_re = integrate.quad(lambda a: parts(a)[1][c].real, 0.0, np.inf, **sin_opts)[0]
            odd_im = integrate.quad(lambda a: parts(a)[1][c].imag, 0.0, np.inf, **sin_opts)[0]
            out[c, j] = complex(even_re + odd_im, even_im - odd_re) / (2 * np.pi)
    if pole.imag < 0:
        out += -1j * leading[:, None] * np.exp(-1j * pole * x[None, :])
    return out


def aw_recover_u(plus: Callable, x, tol: float = DEFAULT_TOL) -> np.ndarray:
    """
    u(x) for x > 0 from the upper transforms; plus maps alpha to an array
    (n, len(alpha)). Returns shape (n, len(x)).
    """
    leading = _leading_coefficient(plus)
    logger.debug(f"Leading transform coefficient {leading}")
    return fourier_inverse(plus, x, leading, -1j, tol)


def _panel_interpolant(edges: np.ndarray, values: np.ndarray) -> Callable:
    """Piecewise Legendre interpolant of samples taken at the Gauss nodes of each panel"""
    xi, _ = gauss_panels(-1.0, 1.0, 1)
    order, n = xi.size, values.shape[0]
    stacked = values.reshape(n, -1, order).transpose(2, 1, 0).reshape(order, -1)
    coef = legendre.legfit(xi, stacked, order - 1).reshape(order, -1, n)

    def evaluate(t):
        t = np.asarray(t, dtype=float)
        k = np.clip(np.searchsorted(edges, t, side='right') - 1, 0, edges.size - 2)
        local = (2.0 * t - edges[k] - edges[k + 1]) / (edges[k + 1] - edges[k])
        return np.einsum('mo,omn->nm', legendre.legvander(local, order - 1), coef[:, k, :])

    return evaluate


def _panel_nodes(edges: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    xi, w = gauss_panels(-1.0, 1.0, 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    return (mid[:, None] + half[:, None] * xi).ravel(), (half[:, None] * w).ravel()


def aw_residual(solution: AWSolution, x, tol: float = DEFAULT_TOL) -> np.ndarray:
    """
    Residual u - lam k*u - f of the integral equations at x > 0 by direct
    quadrature of the convolutions; shape (2, len(x)). u is sampled on Gauss
    panels of (0, R), split at a, and the integrals beyond R are bounded by
    the samples of the last panel.
    """
    spec, lam, a = solution.spec, solution.lam, solution.spec.a
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(x <= 0):
        raise DomainError("integral equation residual is evaluated on x > 0 only")
    rate = min(solution.l0.real, solution.l1.real, 1.0)
    reach = float(x.max()) + AW_RESIDUAL_EFOLDS / rate
    edges = np.linspace(0.0, reach, int(np.ceil(reach / AW_RESIDUAL_PANEL)) + 1)
    edges = np.union1d(edges, [a]) if a < reach else edges
    nodes, _ = _panel_nodes(edges)
    samples = aw_field(solution, nodes, tol)
    tail = 2.0 * abs(lam) * float(np.max(np.abs(samples[:, -nodes.size // (edges.size - 1):])))
    if tail > TAIL_LIMIT:
        raise TailDivergenceError(f"solution is {tail:.3e} beyond x={reach:.3g}; the convolution tail is not negligible")
    u = _panel_interpolant(edges, samples)

    def convolve(component: int, kink: float) -> complex:
        """int_0^R e^{-|t - kink|} u_component(t) dt"""
        cuts = np.union1d(edges, [kink]) if 0.0 < kink < reach else edges
        t, w = _panel_nodes(cuts)
        return complex(np.sum(w * np.exp(-np.abs(t - kink)) * u(t)[component]))

    direct = aw_field(solution, x, tol)
    forcing = np.stack([spec.f1(x), spec.f2(x)])
    out = np.empty((2, x.size), dtype=complex)
    for j, xj in enumerate(x):
        out[0, j] = direct[0, j] - lam * (convolve(0, xj) + convolve(1, xj - a)) - forcing[0, j]
        out[1, j] = direct[1, j] - lam * (convolve(0, xj + a) + convolve(1, xj)) - forcing[1, j]
    logger.debug(f"Integral equation residual {np.max(np.abs(out)):.3e} on {nodes.size} nodes up to x={reach:.3g}, "
                 f"tail bound {tail:.3e}")
    return out


def aw_field(solution: AWSolution, x, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Solution components (u1, u2) at x > 0"""
    return aw_recover_u(solution.plus_stack, x, tol)
