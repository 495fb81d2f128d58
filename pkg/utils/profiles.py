"""
Boundary and Initial Profiles
Named data profiles with the integral transforms the solvers need.
"""

import logging
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate

from utils.contour_quad import gauss_panels
from utils.errors import ConfigError, DomainError

logger = logging.getLogger(__name__)


class Profile:
    """A real function of one variable with finite support and known kinks"""

    kind = 'profile'

    def __init__(self, support: Tuple[float, float], breaks: Sequence[float] = ()):
        self.support = (float(support[0]), float(support[1]))
        self.breaks = tuple(float(b) for b in breaks)

    def __call__(self, x):
        raise NotImplementedError

    def params(self) -> Dict[str, float]:
        return {}

    @property
    def is_zero(self) -> bool:
        return False

    def _pieces(self, lo: float, hi: float, extra: Sequence[float] = ()):
        lo, hi = max(lo, self.support[0]), min(hi, self.support[1])
        if not hi > lo:
            return []
        cuts = sorted({lo, hi, *(b for b in (*self.breaks, *extra) if lo < b < hi)})
        return list(zip(cuts[:-1], cuts[1:]))

    def weighted_integral(self, weight, lo: float = -np.inf, hi: float = np.inf,
                          extra: Sequence[float] = (), panels_per_unit: float = 4.0) -> np.ndarray:
        """
        int f(xi) weight(xi) dxi over [lo, hi] by composite Gauss-Legendre.
        weight maps an array of xi to an array of shape (..., len(xi)).
        """
        total = 0.0
        for a, b in self._pieces(lo, hi, extra):
            panels = max(2, int(np.ceil((b - a) * panels_per_unit)))
            xi, w = gauss_panels(a, b, panels)
            total = total + np.sum(np.asarray(weight(xi)) * (w * self(xi)), axis=-1)
        return np.asarray(total)

    def real_integral(self, kernel, lo: float = -np.inf, hi: float = np.inf,
                      points: Sequence[float] = ()) -> float:
        """Adaptive int f(xi) kernel(xi) dxi over [lo, hi] for a real kernel"""
        total = 0.0
        for a, b in self._pieces(lo, hi):
            inner = [p for p in points if a < p < b]
            value, _ = integrate.quad(lambda xi: self(xi) * kernel(xi), a, b,
                                      points=inner or None, limit=200, epsabs=1e-13, epsrel=1e-11)
            total += value
        return total

    def fourier_window(self, alpha, lo: float = 0.0, hi: float = np.inf, shift: float = 0.0) -> np.ndarray:
        """
        int_lo^hi f(x) exp(i alpha (x - shift)) dx for complex alpha; the
        exponential must stay bounded on the window.
        """
        alpha = np.atleast_1d(np.asarray(alpha, dtype=complex))
        out = np.zeros(alpha.shape, dtype=complex)
        for i, a in enumerate(alpha.ravel()):
            damp = lambda x, a=a: self(x) * np.exp(-a.imag * (x - shift))
            total = 0.0 + 0.0j
            for left, right in self._pieces(lo, hi):
                if a.real == 0.0:
                    total += integrate.quad(damp, left, right, limit=200)[0]
                    continue
                re = integrate.quad(damp, left, right, weight='cos', wvar=a.real, limit=200)[0]
                im = integrate.quad(damp, left, right, weight='sin', wvar=a.real, limit=200)[0]
                total += complex(re, im)
            out.flat[i] = total * np.exp(-1j * a.real * shift)
        return out

    def fourier_plus(self, alpha) -> np.ndarray:
        """F+(alpha) = int_0^inf f(x) exp(i alpha x) dx"""
        return self.fourier_window(alpha)

    def right_value(self) -> float:
        """f(0+)"""
        return float(self(np.array([1e-300]))[0])


class ZeroProfile(Profile):
    kind = 'zero'

    def __init__(self):
        super().__init__((0.0, 0.0))

    def __call__(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    @property
    def is_zero(self) -> bool:
        return True

    def fourier_window(self, alpha, lo: float = 0.0, hi: float = np.inf, shift: float = 0.0):
        return np.zeros(np.shape(np.atleast_1d(alpha)), dtype=complex)


class BoxProfile(Profile):
    """amp on [lo, hi], zero elsewhere"""

    kind = 'box'

    def __init__(self, lo: float, hi: float, amp: float = 1.0):
        if not hi > lo:
            raise ConfigError(f"box profile needs lo < hi, got [{lo}, {hi}]")
        super().__init__((lo, hi))
        self.lo, self.hi, self.amp = float(lo), float(hi), float(amp)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= self.lo) & (x <= self.hi), self.amp, 0.0)

    def params(self):
        return {'lo': self.lo, 'hi': self.hi, 'amp': self.amp}

    def fourier_window(self, alpha, lo: float = 0.0, hi: float = np.inf, shift: float = 0.0):
        alpha = np.atleast_1d(np.asarray(alpha, dtype=complex))
        lo, hi = max(self.lo, lo), min(self.hi, hi)
        if not hi > lo:
            return np.zeros(alpha.shape, dtype=complex)
        small = np.abs(alpha) < 1e-8
        safe = np.where(small, 1.0, alpha)
        value = self.amp * (np.exp(1j * safe * (hi - shift)) - np.exp(1j * safe * (lo - shift))) / (1j * safe)
        return np.where(small, self.amp * (hi - lo) * (1 + 0.5j * alpha * (hi + lo - 2 * shift)), value)


class GaussianProfile(Profile):
    """amp * exp(-((x - center) / width)^2), cut at 9 widths"""

    kind = 'gaussian'

    def __init__(self, center: float = 0.0, width: float = 1.0, amp: float = 1.0):
        if not width > 0:
            raise ConfigError(f"gaussian profile needs width > 0, got {width}")
        super().__init__((center - 9.0 * width, center + 9.0 * width))
        self.center, self.width, self.amp = float(center), float(width), float(amp)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.amp * np.exp(-((x - self.center) / self.width) ** 2)

    def params(self):
        return {'center': self.center, 'width': self.width, 'amp': self.amp}


class TableProfile(Profile):
    """Piecewise-linear interpolation of sampled values, zero outside the table"""

    kind = 'table'

    def __init__(self, xs, values, path: Optional[str] = None):
        xs = np.asarray(xs, dtype=float)
        values = np.asarray(values, dtype=float)
        if xs.ndim != 1 or xs.size < 2 or xs.shape != values.shape:
            raise ConfigError("table profile needs matching 1-D x and value columns")
        if np.any(np.diff(xs) <= 0):
            raise ConfigError("table profile abscissae must increase")
        if not np.all(np.isfinite(values)):
            raise DomainError("table profile contains non-finite samples")
        super().__init__((xs[0], xs[-1]), xs[1:-1])
        self.xs, self.values, self.path = xs, values, path

    @classmethod
    def from_file(cls, path: str) -> 'TableProfile':
        try:
            data = np.loadtxt(path, delimiter=None if not path.endswith('.csv') else ',', ndmin=2)
        except (OSError, ValueError) as e:
            raise ConfigError(f"cannot read profile table '{path}': {e}")
        if data.shape[1] < 2:
            raise ConfigError(f"profile table '{path}' needs two columns")
        return cls(data[:, 0], data[:, 1], path)

    def __call__(self, x):
        return np.interp(np.asarray(x, dtype=float), self.xs, self.values, left=0.0, right=0.0)

    def params(self):
        return {'path': self.path} if self.path else {}


class ExponentialProfile(Profile):
    """amp * exp(-rate x) on x > 0"""

    kind = 'exponential'

    def __init__(self, amp: float = 1.0, rate: float = 1.0):
        if not rate > 0:
            raise ConfigError(f"exponential profile needs rate > 0, got {rate}")
        super().__init__((0.0, 40.0 / rate))
        self.amp, self.rate = float(amp), float(rate)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= 0.0, self.amp * np.exp(-self.rate * np.maximum(x, 0.0)), 0.0)

    def params(self):
        return {'amp': self.amp, 'rate': self.rate}

    def fourier_window(self, alpha, lo: float = 0.0, hi: float = np.inf, shift: float = 0.0):
        alpha = np.atleast_1d(np.asarray(alpha, dtype=complex))
        lo = max(lo, 0.0)
        if not hi > lo:
            return np.zeros(alpha.shape, dtype=complex)
        rate = 1j * alpha - self.rate
        near = np.abs(rate) < 1e-10
        safe = np.where(near, 1.0, rate)
        lower = np.exp(1j * alpha * (lo - shift) - self.rate * lo)
        upper = 0.0 if np.isinf(hi) else np.exp(1j * alpha * (hi - shift) - self.rate * hi)
        width = (hi - lo) if np.isfinite(hi) else np.inf
        return self.amp * np.where(near, width * lower, (upper - lower) / safe)


class PowerProfile(Profile):
    """
    coef * (r / scale)^exponent on a half-line in r: inner profiles live on
    (0, scale) and have Mellin transform coef / (s + exponent); outer profiles
    live on (scale, inf) and have scale * coef / (-exponent - 1 - s).
    """

    kind = 'power'

    def __init__(self, coef: float, exponent: float, scale: float, inner: bool = True):
        if not scale > 0:
            raise ConfigError(f"power profile needs scale > 0, got {scale}")
        if inner and not exponent > 0:
            raise ConfigError(f"inner power profile needs exponent > 0, got {exponent}")
        if not inner and not exponent < -1:
            raise ConfigError(f"outer power profile needs exponent < -1, got {exponent}")
        super().__init__((0.0, scale) if inner else (scale, np.inf))
        self.coef, self.exponent, self.scale, self.inner = float(coef), float(exponent), float(scale), inner

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        inside = (r < self.scale) if self.inner else (r > self.scale)
        return np.where(inside, self.coef * (np.abs(r) / self.scale) ** self.exponent, 0.0)

    def params(self):
        return {'coef': self.coef, 'exponent': self.exponent}

    @property
    def is_zero(self) -> bool:
        return self.coef == 0.0

    def pole(self) -> float:
        """Location of the single pole of the Mellin transform"""
        return -self.exponent if self.inner else -self.exponent - 1.0

    def mellin(self, s):
        s = np.asarray(s, dtype=complex)
        if self.inner:
            return self.coef / (s + self.exponent)
        return self.scale * self.coef / (-self.exponent - 1.0 - s)

    def mellin_residue(self) -> float:
        """Residue of the Mellin transform at its pole"""
        return self.coef if self.inner else -self.scale * self.coef


def make_profile(kind: str, **params) -> Profile:
    """Build a named profile from configuration values"""
    try:
        if kind == 'zero':
            return ZeroProfile()
        if kind == 'box':
            return BoxProfile(params.get('lo', -1.0), params.get('hi', 1.0), params.get('amp', 1.0))
        if kind == 'gaussian':
            return GaussianProfile(params.get('center', 0.0), params.get('width', 1.0), params.get('amp', 1.0))
        if kind == 'table':
            return TableProfile.from_file(params['path'])
        if kind == 'exponential':
            return ExponentialProfile(params.get('amp', 1.0), params.get('rate', 1.0))
    except KeyError as e:
        raise ConfigError(f"profile '{kind}' is missing parameter {e}")
    raise ConfigError(f"unknown profile kind '{kind}'")
