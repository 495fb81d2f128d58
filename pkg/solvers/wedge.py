"""
Wedge Solver
Mixed Dirichlet-Neumann Laplace problem in a wedge by Mellin transform and matrix factorization.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy import integrate

from config import (
    DEFAULT_NODES, DEFAULT_TOL, MAX_NODES, PANEL_ORDER, SERIES_MAX_TERMS, WEDGE_CIRCLE_POINTS,
    WEDGE_CIRCLE_RADIUS, WEDGE_DECAY_EFOLDS, WEDGE_MIN_RATE,
)
from utils.contour_quad import CauchyDensity, CauchyIntegral, LineContour, gauss_panels
from utils.errors import ConvergenceError, DomainError, SingularSystemError
from utils.profiles import PowerProfile, Profile, ZeroProfile
from utils.special_fn import cbeta, cot_c, csc_c, gauss2f1, sec_c, tan_c

logger = logging.getLogger(__name__)

LATTICE_WIDTH = 1e-3  # Distance in w = angle s / pi below which entries are circle-averaged


@dataclass(frozen=True)
class WedgeSpec:
    """
    Laplace equation in 0 < theta < angle. Side j (theta = 0 for j = 1,
    theta = angle for j = 2) carries the temperature level_j + T_j*(r) on
    0 < r < a_j and the heat flux f_j+(r) on r > a_j.
    """

    angle: float
    a1: float
    a2: float
    t1: float = 0.0
    t2: float = 0.0
    t1_profile: Profile = field(default_factory=ZeroProfile)
    t2_profile: Profile = field(default_factory=ZeroProfile)
    f1_profile: Profile = field(default_factory=ZeroProfile)
    f2_profile: Profile = field(default_factory=ZeroProfile)
    sigma: Optional[float] = None
    mu: Tuple[int, int] = (0, 1)

    def __post_init__(self):
        if not 0.0 < self.angle < 2.0 * np.pi:
            raise DomainError(f"wedge angle {self.angle} must lie in (0, 2 pi)")
        if not (self.a1 > 0 and self.a2 > 0):
            raise DomainError(f"segment lengths a1={self.a1}, a2={self.a2} must be positive")
        if self.a2 < self.a1:
            raise DomainError(f"ratio a2/a1 = {self.a2 / self.a1:.6g} is below 1; exchange the sides")
        if sorted(self.mu) != [0, 1]:
            raise DomainError(f"mu must be (0, 1) or (1, 0), got {self.mu}")
        for name, profile, scale, inner in (
                ('t1_profile', self.t1_profile, self.a1, True), ('t2_profile', self.t2_profile, self.a2, True),
                ('f1_profile', self.f1_profile, self.a1, False), ('f2_profile', self.f2_profile, self.a2, False)):
            if profile.is_zero:
                continue
            if not isinstance(profile, PowerProfile) or profile.inner != inner:
                raise DomainError(f"{name} must be an {'inner' if inner else 'outer'} power-law profile")
            if not np.isclose(profile.scale, scale):
                raise DomainError(f"{name} is scaled by {profile.scale}, expected the segment length {scale}")

    @classmethod
    def power_law(cls, angle: float, a1: float, a2: float, t1: float = 0.0, t2: float = 0.0,
                  c: Tuple[float, float] = (0.0, 0.0), gamma: Tuple[float, float] = (1.0, 1.0),
                  d: Tuple[float, float] = (0.0, 0.0), kappa: Tuple[float, float] = (2.0, 2.0),
                  sigma: Optional[float] = None, mu: Tuple[int, int] = (0, 1)) -> 'WedgeSpec':
        """T_j* = c_j (r/a_j)^gamma_j on r < a_j and f_j+ = d_j (r/a_j)^(-1-kappa_j) on r > a_j"""
        a = (a1, a2)
        inner = [PowerProfile(c[j], gamma[j], a[j]) if c[j] else ZeroProfile() for j in range(2)]
        outer = [PowerProfile(d[j], -1.0 - kappa[j], a[j], inner=False) if d[j] else ZeroProfile()
                 for j in range(2)]
        return cls(angle, a1, a2, t1, t2, inner[0], inner[1], outer[0], outer[1], sigma, tuple(mu))

    @property
    def lam(self) -> float:
        return self.a2 / self.a1

    @property
    def lengths(self) -> np.ndarray:
        return np.array([self.a1, self.a2])

    @property
    def levels(self) -> np.ndarray:
        return np.array([self.t1, self.t2], dtype=float)

    @property
    def temperature_profiles(self) -> Tuple[Profile, Profile]:
        return self.t1_profile, self.t2_profile

    @property
    def flux_profiles(self) -> Tuple[Profile, Profile]:
        return self.f1_profile, self.f2_profile

    @property
    def kappas(self) -> List[float]:
        return [p.pole() for p in self.flux_profiles if not p.is_zero]

    @property
    def beta(self) -> float:
        """Decay exponent of the field at infinity"""
        return min([np.pi / self.angle, *self.kappas])

    @property
    def growing_column(self) -> int:
        return self.mu.index(1)

    def strip_sigma(self) -> float:
        """Abscissa of the Mellin contour"""
        limit = min(self.beta, np.pi / (2.0 * self.angle))
        if self.sigma is None:
            return 0.5 * limit
        if 0.0 < self.sigma < limit:
            return float(self.sigma)
        logger.warning(f"Contour abscissa sigma={self.sigma} outside (0, {limit:.6g}), using {0.5 * limit:.6g}")
        return 0.5 * limit


# Factorization

def _pfaff_argument(lam: float, angle: float) -> Tuple[float, float]:
    q = lam ** (-np.pi / angle)
    return q, q / (1.0 + q)


def chi_closed(s, mu: int, which: str, lam: float, angle: float):
    """
    chi_1j^- (which='first') or chi_2j^+ (which='second') as Beta x 2F1, with the
    hypergeometric argument Pfaff-transformed to q / (1 + q) <= 1/2.
    """
    w = angle * np.asarray(s, dtype=complex) / np.pi
    q, z = _pfaff_argument(lam, angle)
    if which == 'first':
        b = mu + 0.5
        return cbeta(w, b) * (1.0 + q) ** (-b) * gauss2f1(b, b, w + b, z)
    if which == 'second':
        c = 0.5 - mu
        return ((-1.0) ** mu * q ** c * cbeta(1.0 - w, c) * (1.0 + q) ** (-c)
                * gauss2f1(c, c, 1.5 - mu - w, z))
    raise DomainError(f"unknown entry '{which}', expected 'first' or 'second'")


def chi_series(s, mu: int, which: str, lam: float, angle: float, tol: float = 1e-16):
    """
    chi_1j^- or chi_2j^+ summed term by term from its Gamma-ratio series in
    powers of -lam^(-pi/angle). At lam = 1 the series sits on its circle of
    convergence and the Pfaff-transformed form is summed instead.
    """
    if which not in ('first', 'second'):
        raise DomainError(f"unknown entry '{which}', expected 'first' or 'second'")
    scalar = np.ndim(s) == 0
    w = np.atleast_1d(angle * np.asarray(s, dtype=complex) / np.pi)
    if which == 'first':
        a, b, c = w, mu + 0.5, w + mu + 0.5
        head = w
    else:
        a, b, c = 1.0 - w, 0.5 - mu, 1.5 - mu - w
        head = 1.0 - w
    for values, label in ((head, 'Gamma'), (c, 'series denominator')):
        bad = (np.abs(values.imag) < 1e-12) & (values.real < 0.5) & (np.abs(values.real - np.round(values.real)) < 1e-12)
        if np.any(bad):
            raise DomainError(f"chi_{which} has a pole of its {label} at s={np.atleast_1d(s)[bad][0]}")

    q = lam ** (-np.pi / angle)
    if q >= 1.0 - 1e-12:
        logger.debug("Series argument on the unit circle, summing the Pfaff-transformed form")
        result = chi_closed(w * np.pi / angle, mu, which, lam, angle)
        return result[0] if scalar else result

    if which == 'first':
        term = cbeta(w, mu + 0.5)
    else:
        term = (-1.0) ** mu * q ** (0.5 - mu) * cbeta(1.0 - w, 0.5 - mu)
    total = term.copy()
    for k in range(SERIES_MAX_TERMS):
        term = term * (a + k) * (b + k) / ((c + k) * (k + 1.0)) * (-q)
        total = total + term
        if np.all(np.abs(term) <= tol * np.abs(total)):
            break
    else:
        raise ConvergenceError(f"chi series not converged after {SERIES_MAX_TERMS} terms")
    return total[0] if scalar else total


def wedge_symbol(lam: float, angle: float, s) -> np.ndarray:
    """G(s) = [[cot, lam^s csc], [lam^-s csc, cot]] of angle s, shape (..., 2, 2)"""
    s = np.asarray(s, dtype=complex)
    cot, csc = cot_c(angle * s), csc_c(angle * s)
    power = np.exp(s * np.log(lam))
    g = np.empty(s.shape + (2, 2), dtype=complex)
    g[..., 0, 0] = g[..., 1, 1] = cot
    g[..., 0, 1] = power * csc
    g[..., 1, 0] = csc / power
    return g


def _adjugate(m: np.ndarray) -> np.ndarray:
    adj = np.empty_like(m)
    adj[..., 0, 0] = m[..., 1, 1]
    adj[..., 1, 1] = m[..., 0, 0]
    adj[..., 0, 1] = -m[..., 0, 1]
    adj[..., 1, 0] = -m[..., 1, 0]
    return adj


def _circle_mean(func: Callable, center: complex, radius: float) -> np.ndarray:
    """Mean of func over a circle, equal to its value at the center when analytic inside"""
    ring = center + radius * np.exp(2j * np.pi * np.arange(WEDGE_CIRCLE_POINTS) / WEDGE_CIRCLE_POINTS)
    return np.mean(func(ring), axis=0)


def plus_at_origin(lam: float, angle: float, mu: Tuple[int, int] = (0, 1)) -> np.ndarray:
    """X+(0) in closed form"""
    root = lam ** (-np.pi / (2.0 * angle))
    arc = 2.0 * np.arctan(root)
    lower = {0: arc, 1: 2.0 / root + arc}
    x0 = np.empty((2, 2))
    for j, m in enumerate(mu):
        x0[1, j] = lower[m]
        x0[0, j] = -np.pi + lower[m]
    return x0


class MatrixFactor:
    """
    Factor X+ (side='plus', analytic for Re s < pi / (2 angle)) or X- (side='minus',
    analytic for Re s > 0) of the wedge symbol, X+ = G X-. Column j is built from
    the hypergeometric pair with parameter mu[j]; the determinant is constant.
    """

    def __init__(self, side: str, lam: float, angle: float, mu: Tuple[int, int] = (0, 1)):
        if side not in ('plus', 'minus'):
            raise DomainError(f"unknown factor side '{side}'")
        if lam < 1.0:
            raise DomainError(f"ratio lambda={lam} must be at least 1")
        self.side, self.lam, self.angle, self.mu = side, float(lam), float(angle), tuple(mu)
        base = 2.0 * np.pi * self.lam ** (np.pi / (2.0 * self.angle))
        orientation = 1.0 if self.mu == (0, 1) else -1.0
        self.det = (-base if side == 'plus' else base) * orientation

    def _raw(self, s: np.ndarray) -> np.ndarray:
        t = tan_c(self.angle * s)
        sec = sec_c(self.angle * s)
        power = np.exp(s * np.log(self.lam))
        out = np.empty(s.shape + (2, 2), dtype=complex)
        for j, mu in enumerate(self.mu):
            first = chi_closed(s, mu, 'first', self.lam, self.angle)
            second = chi_closed(s, mu, 'second', self.lam, self.angle)
            if self.side == 'plus':
                out[..., 0, j] = -t * first + power * sec * second
                out[..., 1, j] = second
            else:
                out[..., 0, j] = first
                out[..., 1, j] = t * second - sec * first / power
        return out

    def __call__(self, s) -> np.ndarray:
        scalar = np.ndim(s) == 0
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        w = self.angle * s / np.pi
        if self.side == 'plus' and np.any(w.real > 0.5 - LATTICE_WIDTH):
            raise DomainError(f"X+ evaluated at Re s={w.real.max() * np.pi / self.angle:.6g}, "
                              f"beyond its half-plane Re s < {np.pi / (2.0 * self.angle):.6g}")
        if self.side == 'minus' and np.any(w.real < LATTICE_WIDTH):
            raise DomainError(f"X- evaluated at Re s={w.real.min() * np.pi / self.angle:.6g}, outside Re s > 0")
        near = np.abs(w - np.round(2.0 * w.real) / 2.0) < LATTICE_WIDTH
        out = np.empty(s.shape + (2, 2), dtype=complex)
        if np.any(~near):
            out[~near] = self._raw(s[~near])
        radius = WEDGE_CIRCLE_RADIUS * np.pi / self.angle
        for i in np.nonzero(near)[0]:
            out[i] = _circle_mean(self._raw, s[i], radius)
        return out[0] if scalar else out

    def inverse(self, s) -> np.ndarray:
        return _adjugate(self(s)) / self.det

    def det_error(self, s) -> float:
        return float(np.max(np.abs(np.linalg.det(np.atleast_3d(self(np.atleast_1d(s)))) - self.det)))


def build_matrix_factors(spec: WedgeSpec) -> Tuple[MatrixFactor, MatrixFactor]:
    return (MatrixFactor('plus', spec.lam, spec.angle, spec.mu),
            MatrixFactor('minus', spec.lam, spec.angle, spec.mu))


def factorization_residual(plus: MatrixFactor, minus: MatrixFactor, s) -> float:
    """max |X+(s) - G(s) X-(s)| over the sample points"""
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    product = np.einsum('nij,njk->nik', wedge_symbol(plus.lam, plus.angle, s), minus(s))
    return float(np.max(np.abs(plus(s) - product)))


# Splitting of the data terms

class WedgeSplit:
    """
    Splits [X+]^-1 T^- and -[X-]^-1 F+ / s into pieces analytic on either side
    of the contour Re s = sigma. 'residue' uses the single poles of the power-law
    transforms. 'quadrature' takes Cauchy integrals along the contour after the
    edge values T_j*(a_j-) / s are moved onto the pole at the origin.
    """

    def __init__(self, spec: WedgeSpec, plus: MatrixFactor, minus: MatrixFactor,
                 method: str = 'residue', tol: float = DEFAULT_TOL):
        if method not in ('residue', 'quadrature'):
            raise DomainError(f"unknown split method '{method}'")
        self.spec, self.plus, self.minus = spec, plus, minus
        self.method, self.tol = method, tol
        self.sigma = spec.strip_sigma()
        self.grow = spec.growing_column
        self.shift = np.zeros(2)
        self.poles = [p.pole() for p in (*spec.temperature_profiles, *spec.flux_profiles) if not p.is_zero]
        if method == 'residue':
            self._prepare_residues()
        else:
            self._prepare_quadrature()

    def temperature_transform(self, s) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        return np.stack([np.zeros(s.shape, dtype=complex) if p.is_zero else p.mellin(s)
                         for p in self.spec.temperature_profiles])

    def flux_transform(self, s) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        return np.stack([np.zeros(s.shape, dtype=complex) if p.is_zero else p.mellin(s)
                         for p in self.spec.flux_profiles])

    def psi_density(self, s) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        data = self.temperature_transform(s) - self.shift[:, None] / s[None, :]
        return np.einsum('nij,jn->in', self.plus.inverse(s), data)

    def omega_density(self, s) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        return np.einsum('nij,jn->in', self.minus.inverse(s), self.flux_transform(s) / s[None, :])

    def _prepare_residues(self):
        self.psi_poles, self.omega_poles = [], []
        for j, profile in enumerate(self.spec.temperature_profiles):
            if profile.is_zero:
                continue
            p = profile.pole()
            unit = np.zeros(2)
            unit[j] = profile.mellin_residue()
            self.psi_poles.append((p, self.plus.inverse(p) @ unit))
        for j, profile in enumerate(self.spec.flux_profiles):
            if profile.is_zero:
                continue
            k = profile.pole()
            unit = np.zeros(2)
            unit[j] = profile.mellin_residue() / k
            self.omega_poles.append((k, self.minus.inverse(k) @ unit))
        self.psi_limit = -sum((res for _, res in self.psi_poles), np.zeros(2, dtype=complex))
        self.omega_limit = sum((res for _, res in self.omega_poles), np.zeros(2, dtype=complex))
        logger.debug(f"Residue split: {len(self.psi_poles)} temperature and {len(self.omega_poles)} flux poles")

    def _prepare_quadrature(self):
        for j, profile in enumerate(self.spec.temperature_profiles):
            if not profile.is_zero:
                self.shift[j] = profile.mellin_residue()
        self.contour = LineContour('vertical', offset=self.sigma, nodes=DEFAULT_NODES)
        self._psi = [CauchyIntegral(CauchyDensity(lambda z, k=k: self.psi_density(z)[k]), self.contour, self.tol)
                     for k in range(2)]
        self._omega = [CauchyIntegral(CauchyDensity(lambda z, k=k: self.omega_density(z)[k]), self.contour,
                                      self.tol) for k in range(2)]
        self.psi_limit = np.full(2, np.nan, dtype=complex)
        self.omega_limit = np.full(2, np.nan, dtype=complex)
        g = self.grow
        self.psi_limit[g] = self._moment(lambda z: self.psi_density(z)[g])
        self.omega_limit[g] = self._moment(lambda z: self.omega_density(z)[g])
        logger.debug(f"Quadrature split limits: psi={self.psi_limit[g]:.6e}, omega={self.omega_limit[g]:.6e}")

    def _moment(self, density: Callable) -> complex:
        """-(1/2 pi i) times the integral of the density up the contour"""
        nodes = self.contour.nodes
        previous = None
        while nodes <= MAX_NODES:
            tau, weights = self.contour.grid(nodes)
            value = complex(-np.sum(weights * density(self.contour.from_tau(tau))) / (2.0 * np.pi))
            if previous is not None and abs(value - previous) <= self.tol * max(1.0, abs(value)):
                return value
            previous, nodes = value, 2 * nodes
        raise ConvergenceError(f"contour moment unresolved at {MAX_NODES} nodes")

    def _cauchy_side(self, integrals, density: Callable, s: np.ndarray, side: str) -> np.ndarray:
        tau = self.contour.to_tau(s)
        on_line = np.abs(tau.imag) <= 1e-12 * np.maximum(1.0, np.abs(tau.real))
        left = ~on_line & (tau.imag > 0)
        out = np.empty((2, s.size), dtype=complex)
        for k, integral in enumerate(integrals):
            if np.any(~on_line):
                out[k, ~on_line] = integral(s[~on_line])
            if np.any(on_line):
                plus, minus = integral.boundary_values(s[on_line])
                out[k, on_line] = plus if side == 'plus' else minus
        # Off the line the Cauchy integral is the value of the side the point lies on
        if side == 'minus' and np.any(left):
            out[:, left] -= density(s[left])
        if side == 'plus' and np.any(~on_line & ~left):
            right = ~on_line & ~left
            out[:, right] += density(s[right])
        return out

    def psi(self, s, side: str = 'minus') -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        if self.method == 'quadrature':
            return self._cauchy_side(self._psi, self.psi_density, s, side)
        out = np.zeros((2, s.size), dtype=complex)
        for p, res in self.psi_poles:
            out += res[:, None] / (p - s[None, :])
        return out + self.psi_density(s) if side == 'plus' else out

    def omega(self, s, side: str = 'plus') -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        if self.method == 'quadrature':
            return self._cauchy_side(self._omega, self.omega_density, s, side)
        out = np.zeros((2, s.size), dtype=complex)
        for k, res in self.omega_poles:
            out += res[:, None] / (s[None, :] - k)
        return out - self.omega_density(s) if side == 'minus' else out


# Solution

def _trig_ratio(kind: str, b: float, angle: float, s: np.ndarray) -> np.ndarray:
    """sin(b s) / sin(angle s) or cos(b s) / sin(angle s) for 0 <= b <= angle, overflow-free"""
    upper = s.imag >= 0.0
    z = np.where(upper, s, np.conj(s))
    den = np.exp(2j * angle * z) - 1.0
    if np.any(np.abs(den) < 1e-14):
        raise DomainError("sin(angle s) vanishes on the Mellin contour")
    first, second = np.exp(1j * (angle + b) * z), np.exp(1j * (angle - b) * z)
    ratio = (first - second) / den if kind == 'sin' else 1j * (first + second) / den
    return np.where(upper, ratio, np.conj(ratio))


def _fourier_real(g: Callable, ell: float) -> float:
    """Re int_0^inf g(tau) exp(-i tau ell) dtau for slowly decaying g"""
    if ell == 0.0:
        return integrate.quad(lambda t: g(t).real, 0.0, np.inf, limit=400)[0]
    omega = abs(ell)
    cos_part = integrate.quad(lambda t: g(t).real, 0.0, np.inf, weight='cos', wvar=omega,
                              limlst=200, epsabs=1e-13)[0]
    sin_part = integrate.quad(lambda t: g(t).imag, 0.0, np.inf, weight='sin', wvar=omega,
                              limlst=200, epsabs=1e-13)[0]
    return cos_part + np.sign(ell) * sin_part


class WedgeSolution:
    """
    Solution of the wedge boundary relation Phi+ + F- = -(1/s) G (Phi- + F+).
    Both sides equal X+ v and -s X- v with
    v(s) = X+(0)^-1 (T_level - T_inf + shift) / s - Psi-(s) - Omega+(s),
    and T_inf removes the 1/s term from the growing component of v.
    """

    def __init__(self, spec: WedgeSpec, method: str = 'residue', tol: float = DEFAULT_TOL):
        self.spec, self.method, self.tol = spec, method, tol
        self.angle = spec.angle
        self.lengths = spec.lengths
        self.plus, self.minus = build_matrix_factors(spec)
        self.split = WedgeSplit(spec, self.plus, self.minus, method, tol)
        self.sigma = self.split.sigma
        self.x0 = plus_at_origin(spec.lam, spec.angle, spec.mu)
        self.x0_inverse = _adjugate(self.x0) / self.plus.det
        self.t_inf = self._temperature_at_infinity()
        self.pole_vector = self.x0_inverse @ (spec.levels - self.t_inf + self.split.shift)
        residual = self.growth_residual()
        if residual > tol:
            raise ConvergenceError(f"growth condition residual {residual:.3e} exceeds {tol}")
        logger.info(f"Wedge solved: lambda={spec.lam:.6g}, angle={spec.angle:.6g}, sigma={self.sigma:.6g}, "
                    f"method={method}, T_inf={self.t_inf:.12g}")

    def _temperature_at_infinity(self) -> float:
        g = self.spec.growing_column
        unit = (self.x0_inverse @ np.ones(2))[g]
        if abs(unit) < 1e-14:
            raise SingularSystemError("growth condition does not involve the temperature at infinity")
        data = ((self.x0_inverse @ (self.spec.levels + self.split.shift))[g]
                - self.split.psi_limit[g] - self.split.omega_limit[g])
        value = data / unit
        if abs(np.imag(value)) > 1e-8 * max(1.0, abs(value)):
            logger.warning(f"Temperature at infinity has imaginary part {np.imag(value):.3e}")
        return float(np.real(value))

    def growth_residual(self) -> float:
        """Coefficient of 1/s in the growing component of v, relative to the data scale"""
        g = self.spec.growing_column
        value = self.pole_vector[g] - self.split.psi_limit[g] - self.split.omega_limit[g]
        scale = max(1.0, float(np.max(np.abs(self.spec.levels))), float(np.max(np.abs(self.pole_vector))))
        return float(abs(value)) / scale

    def v(self, s) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        return (self.pole_vector[:, None] / s[None, :] - self.split.psi(s, 'minus')
                - self.split.omega(s, 'plus'))

    def temperature_data(self, s) -> np.ndarray:
        """F-(s): Mellin transform of the Dirichlet data relative to T_inf"""
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        levels = self.spec.levels - self.t_inf
        return levels[:, None] / s[None, :] + self.split.temperature_transform(s)

    def phi_plus(self, s) -> np.ndarray:
        """Mellin transform of the unknown temperatures on r > a_j"""
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        return np.einsum('nij,jn->in', self.plus(s), self.v(s)) - self.temperature_data(s)

    def phi_minus(self, s) -> np.ndarray:
        """Mellin transform of the unknown fluxes on r < a_j"""
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        return -s[None, :] * np.einsum('nij,jn->in', self.minus(s), self.v(s)) - self.split.flux_transform(s)

    def temperature(self, r, theta, route: str = 'auto') -> np.ndarray:
        return eval_wedge_field(self, r, theta, route) + self.t_inf

    # Inverse Mellin transforms

    def _coefficients(self, s: np.ndarray, theta: float, route: str) -> np.ndarray:
        factor = self.plus(s) if route == 'near' else self.minus(s)
        xv = np.einsum('nij,jn->in', factor, self.v(s))
        kind = 'sin' if route == 'near' else 'cos'
        ratios = np.stack([_trig_ratio(kind, self.angle - theta, self.angle, s),
                           _trig_ratio(kind, theta, self.angle, s)])
        return xv * ratios

    def _singular_distance(self, route: str) -> float:
        points = [0.0, np.pi / self.angle, *self.split.poles]
        if route == 'near':
            points.append(np.pi / (2.0 * self.angle))
        return min(abs(p - self.sigma) for p in points)

    def _panel_integral(self, r: np.ndarray, theta: float, route: str, terms: List[int]) -> np.ndarray:
        logs = np.log(r[None, :] / self.lengths[:, None])
        rate = min(theta if j == 0 else self.angle - theta for j in terms)
        length = WEDGE_DECAY_EFOLDS / rate
        width = min(1.0, self._singular_distance(route), 8.0 / (np.abs(logs[terms]).max() + 1e-12))
        panels = int(np.ceil(length / width))
        if panels * PANEL_ORDER > MAX_NODES:
            raise ConvergenceError(f"Mellin inversion needs {panels} panels at theta={theta:.6g}")
        tau, weights = gauss_panels(0.0, length, panels)
        coeffs = self._coefficients(self.sigma + 1j * tau, theta, route)
        total = np.zeros(r.size)
        for j in terms:
            phase = np.exp(-1j * np.outer(logs[j], tau))
            total += (r / self.lengths[j]) ** (-self.sigma) * (phase @ (weights * coeffs[j])).real / np.pi
        logger.debug(f"Mellin panels: route={route}, theta={theta:.6g}, nodes={tau.size}")
        return total

    def _oscillatory_integral(self, r: np.ndarray, theta: float, route: str, j: int) -> np.ndarray:
        cache: Dict[float, np.ndarray] = {}

        def coefficient(tau: float) -> complex:
            if tau not in cache:
                cache[tau] = self._coefficients(np.array([self.sigma + 1j * tau]), theta, route)[:, 0]
            return cache[tau][j]

        out = np.empty(r.size)
        for i, ri in enumerate(r):
            ell = float(np.log(ri / self.lengths[j]))
            out[i] = (ri / self.lengths[j]) ** (-self.sigma) * _fourier_real(coefficient, ell) / np.pi
        logger.debug(f"Oscillatory Mellin inversion: side {j + 1}, {len(cache)} evaluations")
        return out

    def mellin_field(self, r: np.ndarray, theta: float, route: str) -> np.ndarray:
        rates = [theta, self.angle - theta]
        fast = [j for j in range(2) if rates[j] >= WEDGE_MIN_RATE]
        total = self._panel_integral(r, theta, route, fast) if fast else np.zeros(r.size)
        for j in range(2):
            if j not in fast:
                total = total + self._oscillatory_integral(r, theta, route, j)
        return total

    def normal_flux(self, r, side: int = 1) -> np.ndarray:
        """
        Heat flux through side j at radius r; equals f_j+(r) on r > a_j and
        grows like (a_j - r)^(-1/2) as r approaches a_j from below.
        """
        if side not in (1, 2):
            raise DomainError(f"side must be 1 or 2, got {side}")
        j = side - 1
        r = np.atleast_1d(np.asarray(r, dtype=float))
        if np.any(r <= 0):
            raise DomainError("radius must be positive")
        cache: Dict[float, complex] = {}

        def integrand(tau: float) -> complex:
            if tau not in cache:
                s = np.array([self.sigma + 1j * tau])
                cache[tau] = complex(s[0] * np.einsum('nij,jn->in', self.minus(s), self.v(s))[j, 0])
            return cache[tau]

        out = np.empty(r.size)
        for i, ri in enumerate(r):
            rho = ri / self.lengths[j]
            out[i] = -rho ** (-self.sigma) * _fourier_real(integrand, float(np.log(rho))) / (np.pi * ri)
        return out

    def pole_residues(self) -> Dict[str, float]:
        """|residue| of Phi+ at 0 and -gamma_j and of Phi- at kappa_j; all vanish for a solution"""
        inner = [p.pole() for p in self.spec.temperature_profiles if not p.is_zero]
        outer = [p.pole() for p in self.spec.flux_profiles if not p.is_zero]
        singular = [0.0, *inner, *outer, np.pi / (2.0 * self.angle)]
        out = {}
        for name, func, points in (('phi_plus', self.phi_plus, [0.0, *inner]), ('phi_minus', self.phi_minus, outer)):
            for p in points:
                others = [abs(p - q) for q in singular if q != p] + [abs(p - self.sigma)]
                radius = 0.3 * min(others)
                ring = p + radius * np.exp(2j * np.pi * np.arange(WEDGE_CIRCLE_POINTS) / WEDGE_CIRCLE_POINTS)
                residue = np.mean(func(ring) * (ring - p)[None, :], axis=1)
                out[f"{name}@{p:.6g}"] = float(np.max(np.abs(residue)))
        return out

    def diagnostics(self) -> Dict[str, object]:
        tau = np.linspace(-20.0, 20.0, 30)
        s = self.sigma + 1j * tau
        return {
            'lambda': self.spec.lam,
            'angle': self.angle,
            'sigma': self.sigma,
            'beta': self.spec.beta,
            'method': self.method,
            't_inf': self.t_inf,
            'growth_residual': self.growth_residual(),
            'det_error': max(self.plus.det_error(s), self.minus.det_error(s)),
            'factorization_residual': factorization_residual(self.plus, self.minus, s),
        }


def solve_wedge_rhp(spec: WedgeSpec, method: str = 'residue', tol: float = DEFAULT_TOL) -> WedgeSolution:
    return WedgeSolution(spec, method, tol)


def eval_wedge_field(solution: WedgeSolution, r, theta, route: str = 'auto') -> np.ndarray:
    """
    u(r, theta) = T - T_inf. The 'near' route inverts X+ v sin(.)/sin(angle s)
    and the 'far' route X- v cos(.)/sin(angle s); 'auto' picks near for r < a1.
    """
    if route not in ('auto', 'near', 'far'):
        raise DomainError(f"unknown route '{route}'")
    r, theta = np.broadcast_arrays(np.atleast_1d(np.asarray(r, dtype=float)),
                                   np.atleast_1d(np.asarray(theta, dtype=float)))
    if np.any(r <= 0):
        raise DomainError("radius must be positive")
    if np.any((theta < 0) | (theta > solution.angle)):
        raise DomainError(f"theta must lie in [0, {solution.angle:.6g}]")
    out = np.empty(r.shape)
    near = r < solution.spec.a1 if route == 'auto' else np.full(r.shape, route == 'near')
    for th in np.unique(theta):
        for name, mask in (('near', near), ('far', ~near)):
            pick = mask & (theta == th)
            if np.any(pick):
                out[pick] = solution.mellin_field(r[pick], float(th), name)
    return out


def far_field_amplitude(solution: WedgeSolution) -> float:
    """C with u ~ C cos(pi theta / angle) r^(-pi / angle) as r -> inf"""
    s1 = np.pi / solution.angle
    if any(k <= s1 for k in solution.spec.kappas):
        logger.warning("Flux data decays slower than r^(-pi/angle); the cosine term is not the leading one")
    xv = solution.minus(s1) @ solution.v(np.array([s1]))[:, 0]
    a1, a2 = solution.lengths
    return float(np.real(-xv[0] * a1 ** s1 + xv[1] * a2 ** s1) / solution.angle)


def apex_limit(solution: WedgeSolution, theta) -> np.ndarray:
    """Limit of u(r, theta) as r -> 0"""
    spec = solution.spec
    theta = np.asarray(theta, dtype=float)
    return (1.0 - theta / spec.angle) * spec.t1 + (theta / spec.angle) * spec.t2 - solution.t_inf


def wedge_rhp_residual(solution: WedgeSolution, tau) -> float:
    """max |Phi+ + F- + (1/s) G (Phi- + F+)| at s = sigma + i tau"""
    s = solution.sigma + 1j * np.atleast_1d(np.asarray(tau, dtype=float))
    lhs = solution.phi_plus(s) + solution.temperature_data(s)
    inner = solution.phi_minus(s) + solution.split.flux_transform(s)
    g = wedge_symbol(solution.spec.lam, solution.angle, s)
    rhs = -np.einsum('nij,jn->in', g, inner) / s[None, :]
    return float(np.max(np.abs(lhs - rhs)))
