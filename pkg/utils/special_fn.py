"""
Special Functions
Branch-correct complex Gamma, Beta, Gauss hypergeometric series, erfc and square roots.
"""

import logging

import numpy as np
from scipy import special

from config import SERIES_MAX_TERMS
from utils.errors import ConvergenceError, DomainError

logger = logging.getLogger(__name__)

# Lanczos approximation, g = 7, n = 9
LANCZOS_G = 7.0
LANCZOS_COEFFS = np.array([
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
])
LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)


def _is_nonpositive_integer(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    return (np.abs(z.imag) < 1e-14) & (z.real <= 0.0) & (np.abs(z.real - np.round(z.real)) < 1e-14)


def _lanczos_log_gamma(z: np.ndarray) -> np.ndarray:
    """log Gamma(z) for Re z >= 1/2"""
    zm = z - 1.0
    x = np.full_like(zm, LANCZOS_COEFFS[0])
    for i in range(1, len(LANCZOS_COEFFS)):
        x = x + LANCZOS_COEFFS[i] / (zm + i)
    t = zm + LANCZOS_G + 0.5
    return LOG_SQRT_2PI + (zm + 0.5) * np.log(t) - t + np.log(x)


def cgamma(z):
    """Gamma function of a complex argument (scalar or array)"""
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any(_is_nonpositive_integer(z)):
        raise DomainError(f"Gamma has a pole at non-positive integer argument {z[_is_nonpositive_integer(z)][0]}")

    result = np.empty_like(z)
    right = z.real >= 0.5
    result[right] = np.exp(_lanczos_log_gamma(z[right]))
    left = ~right
    if np.any(left):
        zl = z[left]
        result[left] = np.pi / (np.sin(np.pi * zl) * np.exp(_lanczos_log_gamma(1.0 - zl)))
    return result[0] if scalar else result


def log_beta(a, b):
    """log B(a, b) on the principal log-Gamma branches"""
    return special.loggamma(a) + special.loggamma(b) - special.loggamma(np.add(a, b))


def cbeta(a, b):
    """Beta function via log-Gamma, safe for large imaginary parts"""
    return np.exp(log_beta(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)))


def erfc(x):
    """Complementary error function of a real argument"""
    return special.erfc(x)


def gauss2f1(a, b, c, z, tol: float = 1e-15):
    """
    Gauss hypergeometric function by its defining series.
    Parameters broadcast against each other; requires |z| < 1.
    """
    a, b, c, z = np.broadcast_arrays(*(np.asarray(v, dtype=complex) for v in (a, b, c, z)))
    scalar = a.ndim == 0
    a, b, c, z = (np.atleast_1d(v).astype(complex) for v in (a, b, c, z))

    if np.any(np.abs(z) >= 1.0):
        raise ConvergenceError(f"2F1 series diverges for |z| >= 1 (max |z| = {np.max(np.abs(z)):.6g})")
    if np.any(_is_nonpositive_integer(c)):
        raise DomainError("2F1 parameter c is a non-positive integer")

    total = np.ones_like(z)
    term = np.ones_like(z)
    active = np.ones(z.shape, dtype=bool)
    small_before = np.zeros(z.shape, dtype=bool)
    for n in range(SERIES_MAX_TERMS):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        term[idx] = term[idx] * (a[idx] + n) * (b[idx] + n) / ((c[idx] + n) * (n + 1.0)) * z[idx]
        total[idx] = total[idx] + term[idx]
        small = np.abs(term[idx]) <= tol * np.abs(total[idx])
        done = small & small_before[idx]
        small_before[idx] = small
        active[idx[done]] = False
    else:
        raise ConvergenceError(f"2F1 series not converged after {SERIES_MAX_TERMS} terms")
    return total[0] if scalar else total


def gamma_branch(alpha, k):
    """
    gamma(alpha) = sqrt(alpha^2 - k^2) with cuts along the half-lines {k t : |t| >= 1}.
    Re gamma > 0 on the real axis when Im k > 0, gamma(0) = -i k.
    """
    k = complex(k)
    if not k.imag > 0:
        raise DomainError(f"gamma_branch needs Im k > 0, got k={k}")
    scalar = np.ndim(alpha) == 0
    alpha = np.atleast_1d(np.asarray(alpha, dtype=complex))
    ratio = alpha / k
    result = -1j * k * np.sqrt(1.0 - ratio) * np.sqrt(1.0 + ratio)
    result[(alpha == k) | (alpha == -k)] = 0.0
    return result[0] if scalar else result


def sqrt_p(p):
    """Principal square root with Re > 0, undefined on the cut (-inf, 0]"""
    scalar = np.ndim(p) == 0
    p = np.atleast_1d(np.asarray(p, dtype=complex))
    on_cut = (p.imag == 0.0) & (p.real <= 0.0)
    if np.any(on_cut):
        raise DomainError(f"sqrt_p argument {p[on_cut][0]} lies on the cut (-inf, 0]")
    result = np.sqrt(p)
    return result[0] if scalar else result


def sqrt_cut_down(w):
    """Square root analytic off the ray w in -i[0, inf); equals sqrt(w) for w > 0"""
    return np.exp(0.25j * np.pi) * np.sqrt(-1j * np.asarray(w, dtype=complex))


def sqrt_cut_up(w):
    """Square root analytic off the ray w in i[0, inf); equals sqrt(w) for w > 0"""
    return np.exp(-0.25j * np.pi) * np.sqrt(1j * np.asarray(w, dtype=complex))


def _exp_pair(z):
    """Returns (q, e, sign) with q = exp(2i s z), e = exp(i s z), s = sign(Im z), |q| <= 1"""
    z = np.asarray(z, dtype=complex)
    sign = np.where(z.imag >= 0.0, 1.0, -1.0)
    e = np.exp(1j * sign * z)
    return e * e, e, sign


def tan_c(z):
    """tan z, overflow-free for large |Im z|"""
    q, _, sign = _exp_pair(z)
    return 1j * sign * (1.0 - q) / (1.0 + q)


def sec_c(z):
    """1 / cos z, overflow-free for large |Im z|"""
    q, e, _ = _exp_pair(z)
    return 2.0 * e / (1.0 + q)


def cot_c(z):
    q, _, sign = _exp_pair(z)
    return -1j * sign * (1.0 + q) / (1.0 - q)


def csc_c(z):
    q, e, sign = _exp_pair(z)
    return -2j * sign * e / (1.0 - q)
