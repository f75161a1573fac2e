"""Exact-level calibration of the KS, HC and equal-local-level families.

Each family is indexed by one parameter (KS: c, HC: d, ELL: alpha_loc) and
its exact null rejection probability is monotone in that parameter, so a
bracketing bisection on the exact boundary-crossing probability finds the
parameter with level alpha.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from goflevels import special_fn
from goflevels.boundary_crossing import (
    DEFAULT_CHUNK_SIZE,
    accept_prob_one_sided,
    accept_prob_two_sided,
    exact_limit,
    ExactLimitError,
    sorted_uniforms,
)
from goflevels.gof_tests import (
    Family,
    Sided,
    TestDefinition,
    _sided,
    ell_critical_values,
    hc_G,
    hc_G_tilde,
    hc_test,
    ks_test,
)

__all__ = [
    "CalibrationError",
    "CalibrationResult",
    "BonferroniBounds",
    "LEVEL_TOL",
    "PARAM_TOL",
    "MAX_ITER",
    "exact_level",
    "calibrate_ks",
    "calibrate_hc",
    "calibrate_ell",
    "calibrate_mc",
    "resolve_family",
    "ell_asymptotic_local_level",
    "bonferroni_bounds",
]

LEVEL_TOL = 1e-8
PARAM_TOL = 1e-10
MAX_ITER = 200

KS_BRACKET = (0.1, 3.0)
HC_BRACKET = (1.0, 10.0)


class CalibrationError(RuntimeError):
    """The solver could not reach the requested level."""


@dataclass(frozen=True)
class CalibrationResult:
    family: Family
    n: int
    alpha: float
    parameter: float
    achieved_level: float
    iterations: int
    bracket_width: float
    sided: Sided = "one"
    method: str = "exact"
    stderr: float = 0.0

    def test(self) -> TestDefinition:
        """The calibrated test itself."""
        if self.family is Family.KS:
            return ks_test(self.n, self.parameter)
        if self.family in (Family.HC_ONE, Family.HC_TWO):
            return hc_test(self.n, self.parameter, self.sided)
        return ell_critical_values(self.n, self.parameter, self.sided)


class BonferroniBounds(NamedTuple):
    lower: float
    upper: float
    degenerate: bool


def exact_level(test: TestDefinition) -> float:
    """Exact null rejection probability of ``test``."""
    if test.upper is None:
        res = accept_prob_one_sided(test.lower)
    else:
        res = accept_prob_two_sided(test.lower, test.upper)
    return res.rejection_probability


def _check_inputs(n: int, alpha: float) -> None:
    if n < 1:
        raise ValueError("n must be positive")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    limit = exact_limit()
    if n > limit:
        raise ExactLimitError(f"n={n} exceeds the exact limit {limit}; use calibrate_mc")


def _bisect(
    level: Callable[[float], float],
    alpha: float,
    lo: float,
    hi: float,
    decreasing: bool,
    level_tol: float = LEVEL_TOL,
    param_tol: float = PARAM_TOL,
    max_iter: int = MAX_ITER,
) -> tuple[float, float, int, float]:
    """Bisection for ``level(x) == alpha`` on a monotone level function.

    Returns ``(x, level(x), iterations, final bracket width)``.
    """
    sign = -1.0 if decreasing else 1.0
    f_lo = sign * (level(lo) - alpha)
    f_hi = sign * (level(hi) - alpha)
    if not (f_lo < 0.0 < f_hi):
        direction = "decreasing" if decreasing else "increasing"
        raise CalibrationError(
            f"level not {direction} across bracket [{lo}, {hi}] around alpha={alpha}: "
            f"levels {level(lo)!r}, {level(hi)!r}"
        )
    best_x, best_level = lo, level(lo)
    for it in range(1, max_iter + 1):
        mid = 0.5 * (lo + hi)
        lev = level(mid)
        if abs(lev - alpha) < abs(best_level - alpha):
            best_x, best_level = mid, lev
        if abs(lev - alpha) <= level_tol:
            return mid, lev, it, hi - lo
        if sign * (lev - alpha) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= param_tol:
            break
    if abs(best_level - alpha) > level_tol:
        raise CalibrationError(
            f"bracket shrank to {hi - lo:.3g} with level {best_level!r}, "
            f"still {abs(best_level - alpha):.3g} from alpha={alpha}"
        )
    return best_x, best_level, it, hi - lo


def calibrate_ks(n: int, alpha: float) -> CalibrationResult:
    """Find c so that the one-sided KS test ``i/n - c/sqrt(n)`` has exact level alpha."""
    _check_inputs(n, alpha)
    lo, hi = KS_BRACKET
    hi = min(hi, 0.999 * math.sqrt(n) * (1.0 - 1.0 / n))
    if not hi > lo:
        raise ValueError(f"n={n} too small for the KS bracket")
    c, lev, it, width = _bisect(lambda c: exact_level(ks_test(n, c)), alpha, lo, hi, decreasing=True)
    return CalibrationResult(Family.KS, n, alpha, c, lev, it, width)


def calibrate_hc(n: int, alpha: float, sided: Sided = "one") -> CalibrationResult:
    """Find d >= 1 so that the HC test on ``h_{i,n}(d)`` has exact level alpha."""
    _check_inputs(n, alpha)
    sided = _sided(sided)
    family = Family.HC_ONE if sided == "one" else Family.HC_TWO
    d, lev, it, width = _bisect(
        lambda d: exact_level(hc_test(n, d, sided)), alpha, *HC_BRACKET, decreasing=True
    )
    return CalibrationResult(family, n, alpha, d, lev, it, width, sided)


def calibrate_ell(n: int, alpha: float, sided: Sided = "one") -> CalibrationResult:
    """Find the common local level giving exact level alpha.

    The Bonferroni interval ``(alpha/n, alpha)`` is the initial bracket.
    """
    _check_inputs(n, alpha)
    sided = _sided(sided)
    family = Family.ELL_ONE if sided == "one" else Family.ELL_TWO
    if n == 1:
        # single constraint: level equals the local level
        lev = exact_level(ell_critical_values(1, alpha, sided))
        return CalibrationResult(family, 1, alpha, alpha, lev, 0, 0.0, sided)
    bounds = bonferroni_bounds(n, alpha)
    a, lev, it, width = _bisect(
        lambda a: exact_level(ell_critical_values(n, a, sided)),
        alpha,
        bounds.lower,
        bounds.upper,
        decreasing=False,
    )
    return CalibrationResult(family, n, alpha, a, lev, it, width, sided)


def ell_asymptotic_local_level(n: int, alpha: float) -> float:
    """Asymptotic common local level ``-log(1 - alpha) / (2 log(log n) log n)``."""
    if n < 3:
        raise ValueError("n must be at least 3")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    log_n = math.log(n)
    return -math.log1p(-alpha) / (2.0 * math.log(log_n) * log_n)


def bonferroni_bounds(n: int, alpha: float) -> BonferroniBounds:
    """Bounds ``alpha/n < alpha_loc < alpha``; degenerate (a point) when n == 1."""
    if n < 1:
        raise ValueError("n must be positive")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    return BonferroniBounds(alpha / n, alpha, n == 1)


# -- Monte Carlo calibration ---------------------------------------------------


def resolve_family(family: Family | str, sided: Sided = "one") -> Family:
    """Map ``ks``/``hc``/``ell`` plus a sidedness onto a :class:`Family`."""
    key = family.value if isinstance(family, Family) else str(family)
    base = key.split("_")[0].lower()
    if base == "ks":
        if _sided(sided) != "one":
            raise ValueError("only the one-sided KS family is supported")
        return Family.KS
    if base in ("hc", "ell"):
        return Family(f"{base.upper()}_{_sided(sided)}")
    raise ValueError(f"family must be one of ks, hc, ell; got {family!r}")


def _chunk_statistic(family: Family, u: np.ndarray, alpha: float) -> np.ndarray:
    """Per-sample statistic whose threshold decides rejection for ``family``.

    KS and HC reject for large values, ELL for small ones.  ELL p-values are
    only evaluated where they can fall below ``alpha``; elsewhere 1 is stored.
    """
    reps, n = u.shape
    i = np.arange(1, n + 1)
    if family is Family.KS:
        return np.max(math.sqrt(n) * (i / n - u), axis=1)
    if family is Family.HC_ONE:
        return np.max(hc_G(i, n, u), axis=1)
    if family is Family.HC_TWO:
        return np.maximum(np.max(hc_G(i, n, u), axis=1), np.max(hc_G_tilde(i, n, u), axis=1))
    two = family is Family.ELL_TWO
    cut = alpha / 2.0 if two else alpha
    lower_cut = np.asarray(special_fn.beta_inv(i, n, cut))
    stat = np.ones(reps)
    rows, cols = np.nonzero(u <= lower_cut)
    if rows.size:
        p = special_fn.beta_cdf(cols + 1, n, u[rows, cols])
        np.minimum.at(stat, rows, p)
    if two:
        upper_cut = 1.0 - np.asarray(special_fn.beta_inv(n - i + 1, n, cut))
        rows, cols = np.nonzero(u >= upper_cut)
        if rows.size:
            q = special_fn.beta_sf(cols + 1, n, u[rows, cols])
            np.minimum.at(stat, rows, q)
        stat = 2.0 * stat
    return stat


def calibrate_mc(
    family: Family | str,
    n: int,
    alpha: float,
    sided: Sided = "one",
    reps: int = 100_000,
    seed: int = 0,
    tol: float = 1e-3,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> CalibrationResult:
    """Calibrate by simulation for sizes beyond exact reach.

    ``reps`` null samples are drawn once (chunked, with seeds spawned from
    ``seed``) and reduced to one statistic per sample; bisection then runs on
    the empirical level of these common random numbers.  Fails up front when
    the binomial standard error at alpha exceeds ``tol``.
    """
    family = resolve_family(family, sided)
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if reps < 1:
        raise ValueError("reps must be at least 1")
    stderr = math.sqrt(alpha * (1.0 - alpha) / reps)
    if stderr > tol:
        raise CalibrationError(
            f"reps={reps} gives standard error {stderr:.3g} at alpha={alpha}, "
            f"above the requested tolerance {tol:.3g}"
        )
    n_chunks = -(-reps // chunk_size)
    sizes = [chunk_size] * (n_chunks - 1) + [reps - chunk_size * (n_chunks - 1)]
    seeds = np.random.SeedSequence(seed).spawn(n_chunks)
    stats = np.concatenate(
        [
            _chunk_statistic(family, sorted_uniforms(np.random.Generator(np.random.PCG64(s)), m, n), alpha)
            for s, m in zip(seeds, sizes)
        ]
    )
    stats.sort()

    if family in (Family.ELL_ONE, Family.ELL_TWO):
        def level(a):
            return np.searchsorted(stats, a, side="right") / reps

        lo, hi, decreasing = alpha / n, alpha, False
    else:
        def level(x):
            return (reps - np.searchsorted(stats, x, side="left")) / reps

        lo, hi = HC_BRACKET if family in (Family.HC_ONE, Family.HC_TWO) else KS_BRACKET
        decreasing = True
    # the empirical level is a step function with jumps of 1/reps
    param, lev, it, width = _bisect(level, alpha, lo, hi, decreasing, level_tol=1.0 / reps)
    sided = "one" if family is Family.KS else _sided(sided)
    return CalibrationResult(family, n, alpha, param, float(lev), it, width, sided, "mc", stderr)
