"""
Precondition Checks
Decorators that guard solver entry points against inadmissible parameters.
"""

import logging
from functools import wraps

import numpy as np

from utils.errors import DomainError

logger = logging.getLogger(__name__)


def is_normal_lambda(lam: complex) -> bool:
    """True when the coupling lies outside the real ray [1/4, inf)"""
    lam = complex(lam)
    return not (abs(lam.imag) <= 1e-14 and lam.real >= 0.25)


def requires_upper_k():
    """Decorator requiring spec.k to lie in the open upper half-plane"""
    def decorator(func):
        @wraps(func)
        def wrapper(spec, *args, **kwargs):
            k = complex(getattr(spec, 'k'))
            if not k.imag > 0:
                logger.warning(f"{func.__name__} called with Im k = {k.imag}")
                raise DomainError(f"wavenumber k={k} must satisfy Im k > 0")
            return func(spec, *args, **kwargs)
        return wrapper
    return decorator


def requires_normal_lambda():
    """Decorator requiring the first argument (or its .lam) to be a normal coupling"""
    def decorator(func):
        @wraps(func)
        def wrapper(arg, *args, **kwargs):
            lam = getattr(arg, 'lam', arg)
            if not is_normal_lambda(lam):
                logger.warning(f"{func.__name__} called with non-normal lambda {lam}")
                raise DomainError(f"lambda={lam} lies in [1/4, inf) (non-normal case)")
            return func(arg, *args, **kwargs)
        return wrapper
    return decorator


def requires_positive_time():
    """Decorator for evaluators u(x, t) requiring t > 0"""
    def decorator(func):
        @wraps(func)
        def wrapper(self, x, t, *args, **kwargs):
            if np.any(np.asarray(t, dtype=float) <= 0.0):
                logger.warning(f"{func.__name__} called with t = {t}")
                raise DomainError(f"time t={t} must be positive")
            return func(self, x, t, *args, **kwargs)
        return wrapper
    return decorator


def check_finite(name: str, values) -> np.ndarray:
    """Raise when a sampled quantity contains NaN or Inf"""
    arr = np.asarray(values)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains non-finite samples")
    return arr
