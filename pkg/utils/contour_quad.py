"""
Contour Quadrature
Cauchy integrals on infinite lines, Plemelj boundary values and Talbot inversion.
"""

import logging
from dataclasses import dataclass, replace
from typing import Callable, Dict, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss

from config import (
    ALGEBRAIC_HALF_LENGTH, DEFAULT_NODES, DEFAULT_TOL, MAX_NODES, MIN_NODES,
    NODE_COLLISION_EPS, PANEL_ORDER, SINH_SCALE, TAIL_LIMIT, TALBOT_NODES,
)
from utils.checks import check_finite
from utils.errors import ConvergenceError, DomainError, TailDivergenceError

logger = logging.getLogger(__name__)

_GL_X, _GL_W = leggauss(PANEL_ORDER)


def gauss_panels(a: float, b: float, panels: int) -> Tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights on [a, b]"""
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    weights = (half[:, None] * _GL_W[None, :]).ravel()
    return nodes, weights


@dataclass(frozen=True)
class LineContour:
    """
    Straight integration line, either the real axis shifted to Im = offset
    (left to right) or the vertical line Re = offset (upwards).
    Points are addressed by a real parameter tau.
    """

    orientation: str = 'real'
    offset: float = 0.0
    half_length: float = ALGEBRAIC_HALF_LENGTH
    nodes: int = DEFAULT_NODES
    center: float = 0.0
    scale: float = SINH_SCALE
    stretch: str = 'sinh'

    def __post_init__(self):
        if self.orientation not in ('real', 'vertical'):
            raise DomainError(f"unknown contour orientation '{self.orientation}'")
        if self.stretch not in ('sinh', 'uniform'):
            raise DomainError(f"unknown contour stretch '{self.stretch}'")
        if self.nodes < MIN_NODES:
            raise DomainError(f"contour needs at least {MIN_NODES} nodes, got {self.nodes}")
        if not self.half_length > 0 or not self.scale > 0:
            raise DomainError("contour half-length and scale must be positive")

    def from_tau(self, tau):
        tau = np.asarray(tau, dtype=float)
        if self.orientation == 'real':
            return tau + 1j * self.offset
        return self.offset + 1j * tau

    def to_tau(self, z):
        """Map a point of the plane to the tau plane; the plus side becomes Im > 0"""
        z = np.asarray(z, dtype=complex)
        if self.orientation == 'real':
            return z - 1j * self.offset
        return -1j * (z - self.offset)

    @property
    def dzeta(self) -> complex:
        return 1.0 if self.orientation == 'real' else 1j

    # Parameter map tau(v) of the stretch
    def _v_limit(self) -> float:
        if self.stretch == 'sinh':
            return float(np.arcsinh(self.half_length / self.scale))
        return float(self.half_length)

    def _tau_of_v(self, v):
        if self.stretch == 'sinh':
            return self.center + self.scale * np.sinh(v), self.scale * np.cosh(v)
        return self.center + v, np.ones_like(v)

    def _v_of_tau(self, tau):
        if self.stretch == 'sinh':
            return np.arcsinh((tau - self.center) / self.scale)
        return tau - self.center

    @property
    def ends(self) -> Tuple[float, float]:
        return self.center - self.half_length, self.center + self.half_length

    def panel_count(self, nodes: int) -> int:
        return max(1, -(-nodes // PANEL_ORDER))

    def grid(self, nodes: int) -> Tuple[np.ndarray, np.ndarray]:
        """Nodes and weights in tau for the whole truncated line"""
        vmax = self._v_limit()
        v, wv = gauss_panels(-vmax, vmax, self.panel_count(nodes))
        tau, jac = self._tau_of_v(v)
        return tau, wv * jac

    def local_width(self, s: float, nodes: int) -> float:
        """Width in tau of one panel of the grid near the point s"""
        hv = 2.0 * self._v_limit() / self.panel_count(nodes)
        if self.stretch == 'sinh':
            return hv * float(np.hypot(self.scale, s - self.center))
        return hv

    def outer_grid(self, s: float, delta: float, nodes: int) -> Tuple[np.ndarray, np.ndarray]:
        """Grid of the truncated line with the window [s - delta, s + delta] removed"""
        vmax = self._v_limit()
        va = float(self._v_of_tau(s - delta))
        vb = float(self._v_of_tau(s + delta))
        total = self.panel_count(nodes)
        taus, weights = [], []
        for lo, hi in ((-vmax, min(va, vmax)), (max(vb, -vmax), vmax)):
            if hi <= lo:
                continue
            count = max(1, int(round(total * (hi - lo) / (2.0 * vmax))))
            v, wv = gauss_panels(lo, hi, count)
            tau, jac = self._tau_of_v(v)
            taus.append(tau)
            weights.append(wv * jac)
        if not taus:
            return np.zeros(0), np.zeros(0)
        return np.concatenate(taus), np.concatenate(weights)


@dataclass(frozen=True)
class CauchyDensity:
    """Density on a contour with its decay class and constant limit at infinity"""

    evaluator: Callable
    decay: str = 'algebraic'
    c_inf: complex = 0.0

    def __post_init__(self):
        if self.decay not in ('algebraic', 'exponential', 'oscillatory'):
            raise DomainError(f"unknown density decay '{self.decay}'")


class CauchyIntegral:
    """
    Cauchy transform C(z) = (1/2 pi i) int D(zeta) / (zeta - z) dzeta of a density
    on a line contour, or the bare integral when normalized is False.
    """

    def __init__(self, density: CauchyDensity, contour: LineContour,
                 tol: float = DEFAULT_TOL, normalized: bool = True):
        self.density = density
        self.contour = contour
        self.tol = tol
        self.normalized = normalized
        self.norm = 1.0 / (2j * np.pi) if normalized else 1.0
        self._nodes = contour.nodes
        self._samples: Dict[int, Tuple[np.ndarray, np.ndarray, np.ndarray]] = {}
        self._tail_checked = False

    def sample(self, tau) -> np.ndarray:
        """Density minus its limit at infinity, as a function of tau"""
        values = np.asarray(self.density.evaluator(self.contour.from_tau(tau)), dtype=complex)
        values = np.broadcast_to(values, np.shape(tau)) - self.density.c_inf
        return check_finite("Cauchy density", values)

    def _base(self, nodes: int):
        if nodes not in self._samples:
            tau, weights = self.contour.grid(nodes)
            self._samples[nodes] = (tau, weights, self.sample(tau))
        return self._samples[nodes]

    def _check_tail(self, w: np.ndarray):
        if self._tail_checked:
            return
        ends = np.array(self.contour.ends)
        values = np.abs(self.sample(ends))
        distance = np.abs(ends[:, None] - w.ravel()[None, :]).min(axis=1)
        if self.density.decay == 'oscillatory':
            estimate = values / distance
        else:
            estimate = values * np.abs(ends - self.contour.center) / distance
        logger.debug(f"Cauchy tail estimate {estimate.max():.3e}")
        if estimate.max() > TAIL_LIMIT:
            raise TailDivergenceError(
                f"density tail {values.max():.3e} at |tau|={self.contour.half_length:.3e} "
                f"gives truncation error {estimate.max():.3e}")
        self._tail_checked = True

    def _fold(self, s: float, eps: float, delta: float, nodes: int) -> complex:
        """int over [s - delta, s + delta] of D(tau) / (tau - s - i eps), eps = 0 giving the PV"""
        level = max(1, int(np.log2(max(nodes, MIN_NODES) / MIN_NODES)) + 1)
        if eps == 0.0:
            x, wx = gauss_panels(0.0, delta, 2 * level)
            plus, minus = self.sample(s + x), self.sample(s - x)
            return complex(np.sum(wx * (plus - minus) / x))
        umax = float(np.arcsinh(delta / abs(eps)))
        u, wu = gauss_panels(0.0, umax, max(2, int(np.ceil(umax))) * level)
        x = abs(eps) * np.sinh(u)
        plus, minus = self.sample(s + x), self.sample(s - x)
        integrand = ((plus - minus) * np.sinh(u) + 1j * np.sign(eps) * (plus + minus)) / np.cosh(u)
        return complex(np.sum(wu * integrand))

    def _window(self, s: float, nodes: int) -> float:
        lo, hi = self.contour.ends
        return min(self.contour.local_width(s, nodes), s - lo, hi - s)

    def _raw(self, w: np.ndarray, nodes: int) -> np.ndarray:
        """Bare integral of the reduced density against 1 / (tau - w)"""
        tau, weights, values = self._base(nodes)
        result = np.empty(w.shape, dtype=complex)
        lo, hi = self.contour.ends
        near = np.zeros(w.shape, dtype=bool)
        for i, wi in enumerate(w):
            if lo < wi.real < hi:
                near[i] = abs(wi.imag) < self._window(wi.real, nodes)
        far = ~near
        if np.any(far):
            result[far] = (weights * values / (tau[None, :] - w[far][:, None])).sum(axis=1)
        for i in np.nonzero(near)[0]:
            s, eps = w[i].real, w[i].imag
            delta = self._window(s, nodes)
            t_out, w_out = self.contour.outer_grid(s, delta, nodes)
            outer = np.sum(w_out * self.sample(t_out) / (t_out - w[i])) if t_out.size else 0.0
            result[i] = outer + self._fold(s, eps, delta, nodes)
        return result

    def _converge(self, evaluate: Callable[[int], np.ndarray]) -> np.ndarray:
        nodes = self._nodes
        previous = evaluate(nodes)
        while True:
            doubled = 2 * nodes
            if doubled > MAX_NODES:
                raise ConvergenceError(f"Cauchy quadrature unresolved at {nodes} nodes")
            current = evaluate(doubled)
            error = np.max(np.abs(current - previous)) if current.size else 0.0
            scale = max(1.0, float(np.max(np.abs(current)))) if current.size else 1.0
            logger.debug(f"Cauchy quadrature nodes={doubled} change={error:.3e}")
            if error <= self.tol * scale:
                self._nodes = nodes
                return current
            previous, nodes = current, doubled

    def __call__(self, z):
        scalar = np.ndim(z) == 0
        w = np.atleast_1d(self.contour.to_tau(z)).astype(complex)
        on_line = np.abs(w.imag) <= 1e-14 * np.maximum(1.0, np.abs(w.real))
        if np.any(on_line):
            raise DomainError(f"evaluation point {np.atleast_1d(z)[on_line][0]} lies on the contour")
        self._check_tail(w)
        values = self._converge(lambda n: self._raw(w, n))
        side = np.where(w.imag > 0, 0.5, -0.5)
        result = self.norm * values + side * self.density.c_inf * (2j * np.pi * self.norm)
        return result[0] if scalar else result

    def principal_value(self, s):
        """Principal-value integral at contour points s, with the chosen normalization"""
        scalar = np.ndim(s) == 0
        taus = np.atleast_1d(self.contour.to_tau(s)).real
        lo, hi = self.contour.ends
        if np.any(np.abs(np.atleast_1d(self.contour.to_tau(s)).imag) > 1e-12 * np.maximum(1.0, np.abs(taus))):
            raise DomainError("principal value requested off the contour")
        if np.any((taus - lo < NODE_COLLISION_EPS) | (hi - taus < NODE_COLLISION_EPS)):
            logger.warning("Principal value point on the truncation edge, re-meshing about it")
            shifted = replace(self.contour, center=float(np.mean(taus)))
            return CauchyIntegral(self.density, shifted, self.tol, self.normalized).principal_value(s)
        self._check_tail(taus.astype(complex) + 1j)

        def evaluate(nodes: int) -> np.ndarray:
            out = np.empty(taus.shape, dtype=complex)
            for i, t in enumerate(taus):
                delta = self._window(t, nodes)
                t_out, w_out = self.contour.outer_grid(t, delta, nodes)
                outer = np.sum(w_out * self.sample(t_out) / (t_out - t)) if t_out.size else 0.0
                out[i] = outer + self._fold(t, 0.0, delta, nodes)
            return out

        result = self.norm * self._converge(evaluate)
        return result[0] if scalar else result

    def boundary_values(self, s):
        """Limits (plus, minus) from the left and right of the contour at s"""
        pv = self.principal_value(s)
        jump = np.asarray(self.density.evaluator(np.asarray(s, dtype=complex)), dtype=complex)
        half = 0.5 * jump * (2j * np.pi * self.norm)
        return pv + half, pv - half


def cauchy_eval(density: CauchyDensity, contour: LineContour, z,
                tol: float = DEFAULT_TOL, normalized: bool = True):
    """Cauchy integral of a density at points off the contour"""
    return CauchyIntegral(density, contour, tol, normalized)(z)


def plemelj_split(density: CauchyDensity, contour: LineContour, s,
                  tol: float = DEFAULT_TOL, normalized: bool = True):
    """Sokhotski-Plemelj boundary values: plus - minus equals the density at s"""
    return CauchyIntegral(density, contour, tol, normalized).boundary_values(s)


def _talbot_sum(F: Callable, t: float, nodes: int):
    r = 2.0 * nodes / (5.0 * t)
    theta = np.arange(1, nodes) * np.pi / nodes
    cot = 1.0 / np.tan(theta)
    s = r * theta * (cot + 1j)
    sigma = theta + (theta * cot - 1.0) * cot
    values = np.asarray(F(s), dtype=complex)
    first = np.asarray(F(np.array([r + 0j])), dtype=complex)[0]
    weights = np.exp(t * s) * (1.0 + 1j * sigma)
    weights = weights.reshape((-1,) + (1,) * (values.ndim - 1))
    total = 0.5 * first.real * np.exp(r * t) + np.sum(np.real(weights * values), axis=0)
    return r / nodes * total


def talbot_invert(F: Callable, t: float, nodes: int = TALBOT_NODES, tol: float = DEFAULT_TOL):
    """
    Inverse Laplace transform at time t on the fixed Talbot contour.
    F maps an array of complex p to values stacked along the first axis and
    must satisfy F(conj p) = conj F(p); the result has the trailing shape.
    """
    if not t > 0:
        raise DomainError(f"Talbot inversion needs t > 0, got {t}")
    nodes = max(int(nodes), 4)
    base = _talbot_sum(F, t, nodes)
    check = _talbot_sum(F, t, (3 * nodes) // 2)
    change = float(np.max(np.abs(base - check)))
    if change <= tol * max(1.0, float(np.max(np.abs(check)))):
        return check
    logger.warning(f"Talbot inversion at t={t} changed by {change:.3e}, retrying with {2 * nodes} nodes")
    retry = _talbot_sum(F, t, 2 * nodes)
    change = float(np.max(np.abs(retry - check)))
    if change <= tol * max(1.0, float(np.max(np.abs(retry)))):
        return retry
    raise ConvergenceError(f"Talbot inversion oscillates at t={t} (last change {change:.3e})")
