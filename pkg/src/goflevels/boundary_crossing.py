"""Exact boundary-crossing probabilities for uniform order statistics.

The acceptance region of a test built on critical values is

    c_i < U_{i:n} < c~_i   for all i,

and its probability is computed by sweeping the sorted boundary points left
to right while carrying the distribution of ``N(x) = #{U_j <= x}``.  Between
two points the observations not yet counted are uniform on the remaining
interval, so the count moves by a conditional binomial step; each boundary
point then kills the count states it forbids:

* lower point ``c_i``:  ``U_{i:n} > c_i``  <=>  ``N(c_i) <= i - 1``
* upper point ``c~_i``: ``U_{i:n} < c~_i`` <=>  ``N(c~_i) >= i``

The state vector is renormalized after every point and the log of the
discarded scale is accumulated, so the sweep does not underflow even when
the acceptance probability is astronomically small.  Cost is O(n^2) in the
worst case and close to O(n * w) for boundaries with spacing ~1/n, where w is
the effective width of a binomial step.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numba
import numpy as np

if TYPE_CHECKING:
    from goflevels.gof_tests import TestDefinition

__all__ = [
    "DEFAULT_EXACT_LIMIT",
    "CrossingResult",
    "ExactLimitError",
    "BoundaryError",
    "exact_limit",
    "validate_lower",
    "validate_upper",
    "accept_prob_one_sided",
    "accept_prob_two_sided",
    "mc_level_estimate",
    "sorted_uniforms",
]

DEFAULT_EXACT_LIMIT = 20000
DEFAULT_CHUNK_SIZE = 8192

# a binomial step is cut once past its mean and this far below its peak
_TAIL_CUTOFF = 1e-20
_UNDERFLOW = 1e-300


class ExactLimitError(ValueError):
    """Raised when n exceeds the exact-computation limit; use Monte Carlo instead."""


class BoundaryError(ValueError):
    """Raised for malformed boundary vectors."""


@dataclass(frozen=True)
class CrossingResult:
    """Probability that every order statistic stays inside its bounds.

    ``log_acceptance`` is always finite unless the probability is exactly 0;
    ``log_scale_underflow_flag`` is set when ``acceptance_probability``
    itself underflowed double precision.
    """

    acceptance_probability: float
    log_acceptance: float
    log_scale_underflow_flag: bool

    @property
    def rejection_probability(self) -> float:
        return -math.expm1(self.log_acceptance)


def exact_limit() -> int:
    """Largest n handled exactly; ``GOF_EXACT_LIMIT`` overrides the default."""
    raw = os.environ.get("GOF_EXACT_LIMIT")
    if raw is None:
        return DEFAULT_EXACT_LIMIT
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"GOF_EXACT_LIMIT must be an integer, got {raw!r}") from None
    if value < 1:
        raise ValueError("GOF_EXACT_LIMIT must be positive")
    return value


def validate_lower(lower) -> np.ndarray:
    lower = np.asarray(lower, dtype=float)
    if lower.ndim != 1 or lower.size == 0:
        raise BoundaryError("lower boundary must be a nonempty 1-d vector")
    if np.any(np.isnan(lower)) or lower[0] < 0.0 or lower[-1] >= 1.0:
        raise BoundaryError("lower boundary values must lie in [0, 1)")
    bad = np.nonzero(np.diff(lower) < 0.0)[0]
    if bad.size:
        raise BoundaryError(f"lower boundary decreases at index {bad[0] + 2}")
    return lower


def validate_upper(upper, lower: np.ndarray) -> np.ndarray:
    upper = np.asarray(upper, dtype=float)
    if upper.shape != lower.shape:
        raise BoundaryError("upper and lower boundaries differ in length")
    if np.any(np.isnan(upper)) or upper[0] <= 0.0 or upper[-1] > 1.0:
        raise BoundaryError("upper boundary values must lie in (0, 1]")
    bad = np.nonzero(np.diff(upper) < 0.0)[0]
    if bad.size:
        raise BoundaryError(f"upper boundary decreases at index {bad[0] + 2}")
    bad = np.nonzero(lower >= upper)[0]
    if bad.size:
        raise BoundaryError(f"lower >= upper at index {bad[0] + 1}")
    return upper


def _check_size(n: int) -> None:
    limit = exact_limit()
    if n > limit:
        raise ExactLimitError(
            f"n={n} exceeds the exact limit {limit}; use mc_level_estimate "
            "or raise GOF_EXACT_LIMIT"
        )


@numba.njit(cache=True)
def _sweep(n, pos, lo, hi):
    """Run the count DP over constraint points; returns (log_prob, underflow)."""
    p = np.zeros(n + 1)
    new = np.zeros(n + 1)
    p[0] = 1.0
    s_lo = 0
    s_hi = 0
    prev = 0.0
    log_scale = 0.0
    underflow = False
    for k in range(pos.shape[0]):
        x = pos[k]
        if x > prev:
            for m in range(s_lo, n + 1):
                new[m] = 0.0
            q = (x - prev) / (1.0 - prev)
            cap = hi[k]
            if q >= 1.0:
                total = 0.0
                for m in range(s_lo, s_hi + 1):
                    total += p[m]
                new[n] = total
            else:
                log1mq = math.log1p(-q)
                logq = math.log(q)
                logr = logq - log1mq
                r = q / (1.0 - q)
                # shift by the largest allowed log term so the dominant
                # contributions survive even when all of them are tiny
                shift = -math.inf
                for m in range(s_lo, s_hi + 1):
                    if p[m] == 0.0:
                        continue
                    big_n = n - m
                    jmax = min(big_n, cap - m)
                    if jmax < 0:
                        continue
                    js = min(int((big_n + 1) * q), jmax)
                    lp = (
                        math.log(p[m])
                        + math.lgamma(big_n + 1.0)
                        - math.lgamma(js + 1.0)
                        - math.lgamma(big_n - js + 1.0)
                        + js * logq
                        + (big_n - js) * log1mq
                    )
                    if lp > shift:
                        shift = lp
                if shift == -math.inf:
                    return -math.inf, underflow
                for m in range(s_lo, s_hi + 1):
                    w = p[m]
                    if w == 0.0:
                        continue
                    big_n = n - m
                    jmax = min(big_n, cap - m)
                    if jmax < 0:
                        continue
                    mean = big_n * q
                    lw = math.log(w) - shift
                    lt = big_n * log1mq
                    j = 0
                    dead = False
                    while j <= jmax and lt + lw < -700.0:
                        if j > mean:
                            dead = True
                            break
                        lt += math.log((big_n - j) / (j + 1.0)) + logr
                        j += 1
                    if dead or j > jmax:
                        continue
                    t = math.exp(lt + lw)
                    peak = t
                    while j <= jmax:
                        new[m + j] += t
                        if t > peak:
                            peak = t
                        elif j > mean and t < _TAIL_CUTOFF * peak:
                            break
                        t *= (big_n - j) / (j + 1.0) * r
                        j += 1
                log_scale += shift
            lo_k = lo[k]
            a = max(s_lo, lo_k)
            b = min(n, cap)
            prev = x
        else:
            for m in range(s_lo, s_hi + 1):
                new[m] = p[m]
            a = max(s_lo, lo[k])
            b = min(s_hi, hi[k])
        total = 0.0
        first = -1
        last = -1
        for m in range(a, b + 1):
            v = new[m]
            if v > 0.0:
                total += v
                if first < 0:
                    first = m
                last = m
        if total == 0.0:
            return -math.inf, underflow
        if total < _UNDERFLOW:
            underflow = True
        log_scale += math.log(total)
        for m in range(s_lo, n + 1):
            p[m] = 0.0
        for m in range(first, last + 1):
            p[m] = new[m] / total
        s_lo = first
        s_hi = last
    return log_scale, underflow


def _result(log_prob: float, underflow: bool) -> CrossingResult:
    prob = math.exp(log_prob) if log_prob > -math.inf else 0.0
    prob = min(prob, 1.0)
    return CrossingResult(prob, min(log_prob, 0.0), underflow or (prob == 0.0 and log_prob > -math.inf))


def accept_prob_one_sided(lower) -> CrossingResult:
    """Return ``P(U_{i:n} > c_i for all i)``, the acceptance probability of
    the one-sided test with lower critical values ``lower``.
    """
    lower = validate_lower(lower)
    n = lower.size
    _check_size(n)
    idx = np.nonzero(lower > 0.0)[0]
    pos = lower[idx]
    lo = np.zeros(idx.size, dtype=np.int64)
    hi = idx.astype(np.int64)  # N(c_i) <= i - 1 with 0-based idx = i - 1
    return _result(*_sweep(n, pos, lo, hi))


def accept_prob_two_sided(lower, upper) -> CrossingResult:
    """Return ``P(c_i < U_{i:n} < c~_i for all i)`` via the merged-point sweep."""
    lower = validate_lower(lower)
    upper = validate_upper(upper, lower)
    n = lower.size
    _check_size(n)
    ranks = np.arange(n, dtype=np.int64)
    keep_lo = lower > 0.0
    keep_hi = upper < 1.0
    pos = np.concatenate([lower[keep_lo], upper[keep_hi]])
    lo = np.concatenate([np.zeros(keep_lo.sum(), dtype=np.int64), ranks[keep_hi] + 1])
    hi = np.concatenate([ranks[keep_lo], np.full(keep_hi.sum(), n, dtype=np.int64)])
    order = np.argsort(pos, kind="stable")
    return _result(*_sweep(n, pos[order], lo[order], hi[order]))


def sorted_uniforms(rng: np.random.Generator, reps: int, n: int) -> np.ndarray:
    """Draw ``reps`` sorted uniform samples of size n via exponential spacings."""
    spacings = rng.standard_exponential((reps, n + 1))
    np.cumsum(spacings, axis=1, out=spacings)
    return spacings[:, :n] / spacings[:, n:]


def _count_rejections(seed_seq, size, lower, upper) -> int:
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    u = sorted_uniforms(rng, size, lower.size)
    reject = np.any(u <= lower, axis=1)
    if upper is not None:
        reject |= np.any(u >= upper, axis=1)
    return int(reject.sum())


def mc_level_estimate(
    test: TestDefinition,
    reps: int,
    seed: int,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    workers: int | None = None,
) -> tuple[float, float]:
    """Monte Carlo estimate of the rejection probability under the null.

    Replications are split into chunks of ``chunk_size``; chunk k draws from
    its own child of ``SeedSequence(seed)``, so the estimate depends only on
    ``(seed, reps, chunk_size)`` and not on ``workers``.

    Returns
    -------
    estimate, stderr
        Rejection fraction and its binomial standard error.
    """
    if reps < 1:
        raise ValueError("reps must be at least 1")
    if chunk_size < 1:
        raise ValueError("chunk_size must be at least 1")
    lower = np.asarray(test.lower, dtype=float)
    upper = None if test.upper is None else np.asarray(test.upper, dtype=float)
    n_chunks = -(-reps // chunk_size)
    sizes = [chunk_size] * (n_chunks - 1) + [reps - chunk_size * (n_chunks - 1)]
    seeds = np.random.SeedSequence(seed).spawn(n_chunks)
    if workers is None or workers <= 1:
        counts = [_count_rejections(s, m, lower, upper) for s, m in zip(seeds, sizes)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(lambda a: _count_rejections(a[0], a[1], lower, upper), zip(seeds, sizes)))
    estimate = sum(counts) / reps
    stderr = math.sqrt(estimate * (1.0 - estimate) / reps)
    return estimate, stderr
