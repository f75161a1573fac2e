"""Local levels: the null probability that a single order-statistic
constraint of a test is violated.

For a test with lower critical values ``c_i`` the one-sided local levels are
``P(U_{i:n} <= c_i)``; a two-sided test adds ``P(U_{i:n} >= c~_i)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from goflevels import special_fn
from goflevels.gof_tests import TestDefinition

__all__ = [
    "LocalLevelProfile",
    "local_levels_one_sided",
    "local_levels_two_sided",
    "ks_asymptotic_local_level",
]


@dataclass(frozen=True, eq=False)
class LocalLevelProfile:
    """Per-rank local levels of one test at one sample size.

    ``one_sided[k]`` is the level of rank ``k + 1``; ``two_sided`` is present
    only for two-sided tests.
    """

    n: int
    one_sided: np.ndarray
    two_sided: np.ndarray | None = None

    def __post_init__(self):
        for name in ("one_sided", "two_sided"):
            arr = getattr(self, name)
            if arr is None:
                continue
            arr = np.asarray(arr, dtype=float)
            if arr.shape != (self.n,):
                raise ValueError(f"{name} must have n={self.n} entries")
            if np.any(arr < 0.0) or np.any(arr > 1.0):
                raise ValueError(f"{name} entries must lie in [0, 1]")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def same_as(self, other: LocalLevelProfile) -> bool:
        if self.n != other.n or not np.array_equal(self.one_sided, other.one_sided):
            return False
        if (self.two_sided is None) != (other.two_sided is None):
            return False
        return self.two_sided is None or np.array_equal(self.two_sided, other.two_sided)


def _lower_levels(test: TestDefinition) -> np.ndarray:
    i = np.arange(1, test.n + 1)
    return np.atleast_1d(special_fn.beta_cdf(i, test.n, test.lower))


def local_levels_one_sided(test: TestDefinition) -> LocalLevelProfile:
    """``alpha_i = P(U_{i:n} <= lower[i])``; zero boundaries give exactly zero."""
    return LocalLevelProfile(test.n, _lower_levels(test))


def local_levels_two_sided(test: TestDefinition) -> LocalLevelProfile:
    """Two-sided local levels ``P(U_{i:n} <= c_i) + P(U_{i:n} >= c~_i)``.

    The upper tail is taken directly from the reflected beta c.d.f.
    """
    if test.upper is None:
        raise ValueError("two-sided local levels need an upper boundary")
    i = np.arange(1, test.n + 1)
    low = _lower_levels(test)
    high = np.atleast_1d(special_fn.beta_sf(i, test.n, test.upper))
    return LocalLevelProfile(test.n, low, np.minimum(low + high, 1.0))


def ks_asymptotic_local_level(alpha: float, zeta: float) -> float:
    """Limit of the one-sided KS local level at ranks with ``i/n -> zeta``:
    ``1 - Phi(sqrt(-log(alpha) / (2 zeta (1 - zeta))))``.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if not 0.0 < zeta < 1.0:
        raise ValueError("zeta must lie in (0, 1)")
    return special_fn.normal_sf(math.sqrt(-math.log(alpha) / (2.0 * zeta * (1.0 - zeta))))
