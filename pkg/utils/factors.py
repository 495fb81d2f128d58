"""
Factor Pairs
Analytic factor pairs (K+, K-) of scalar and matrix Wiener-Hopf problems.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FactorPair:
    """
    K+ and K- evaluators with K+ = G K- on the contour.
    Scalar pairs return arrays shaped like the argument; matrix pairs return
    (..., 2, 2) stacks.
    """

    plus: Callable
    minus: Callable
    name: str = ''
    plus_region: str = ''
    minus_region: str = ''

    def __call__(self, s):
        return self.plus(s), self.minus(s)

    def ratio(self, s):
        """K+(s) / K-(s) for scalar pairs"""
        return np.asarray(self.plus(s)) / np.asarray(self.minus(s))

    def ratio_error(self, coefficient: Callable, points: Iterable) -> float:
        """max |K+ - G K-| over the sample points, relative to |K+|"""
        s = np.asarray(list(points), dtype=complex)
        plus = np.asarray(self.plus(s))
        minus = np.asarray(self.minus(s))
        g = np.asarray(coefficient(s))
        if plus.ndim == s.ndim + 2:
            residual = plus - g @ minus
            size = np.linalg.norm(plus, axis=(-2, -1))
            error = np.linalg.norm(residual, axis=(-2, -1)) / np.maximum(size, 1e-300)
        else:
            error = np.abs(plus - g * minus) / np.maximum(np.abs(plus), 1e-300)
        worst = float(np.max(error))
        logger.debug(f"Factor pair {self.name} ratio error {worst:.3e}")
        return worst


def linear_ratio_pair(plus_num: complex, plus_den: complex, minus_num: complex, minus_den: complex,
                      name: str = '', plus_region: str = '', minus_region: str = '') -> FactorPair:
    """Pair K+ = (s - plus_num)/(s - plus_den), K- = (s - minus_num)/(s - minus_den)"""
    def plus(s):
        s = np.asarray(s, dtype=complex)
        return (s - plus_num) / (s - plus_den)

    def minus(s):
        s = np.asarray(s, dtype=complex)
        return (s - minus_num) / (s - minus_den)

    return FactorPair(plus, minus, name, plus_region, minus_region)
