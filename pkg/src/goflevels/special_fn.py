"""Scalar special functions for uniform order statistics.

``U_{i:n}`` is Beta(i, n - i + 1) distributed, so every local level is a
regularized incomplete beta value, and by the beta/binomial duality

    P(U_{i:n} <= x) = P(Binomial(n, x) >= i).

The incomplete beta itself comes from :func:`scipy.special.betainc`, whose
continued fraction keeps relative accuracy far into the tails. Functions
accept scalars or numpy arrays and broadcast like ufuncs.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special

__all__ = [
    "beta_cdf",
    "beta_sf",
    "beta_pdf",
    "beta_inv",
    "log_beta_cdf",
    "log_beta_sf",
    "binom_tail",
    "log_binom_tail",
    "poisson_pmf",
    "log_poisson_pmf",
    "normal_cdf_pdf",
    "normal_sf",
    "log_factorial",
    "stirling_log_factorial",
]

_EXACT_FACTORIAL_LIMIT = 256
_LOG_FACTORIALS = [0.0]
for _j in range(1, _EXACT_FACTORIAL_LIMIT + 1):
    _LOG_FACTORIALS.append(math.fsum(math.log(m) for m in range(2, _j + 1)))
del _j

# B_{2j} / (2j (2j - 1)) for j = 1..8
_STIRLING_COEFFS = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def _check_rank(i, n):
    i = np.asarray(i)
    n = np.asarray(n)
    if np.any(n < 1) or np.any(i < 1) or np.any(i > n):
        raise ValueError(f"rank out of range: need 1 <= i <= n, got i={i}, n={n}")
    return i, n


def _check_unit(x, name="x"):
    x = np.asarray(x, dtype=float)
    if np.any(np.isnan(x)) or np.any(x < 0.0) or np.any(x > 1.0):
        raise ValueError(f"{name} must lie in [0, 1]")
    return x


def _scalarize(value):
    value = np.asarray(value)
    return float(value) if value.ndim == 0 else value


def beta_cdf(i, n, x):
    """Return ``P(U_{i:n} <= x)``, the Beta(i, n - i + 1) c.d.f."""
    i, n = _check_rank(i, n)
    x = _check_unit(x)
    return _scalarize(special.betainc(i, n - i + 1, x))


def beta_sf(i, n, x):
    """Return ``P(U_{i:n} > x)`` computed directly as an upper tail.

    Uses the reflection ``1 - U_{i:n} ~ U_{n-i+1:n}`` so small upper tails
    keep full relative precision instead of cancelling in ``1 - cdf``.
    """
    i, n = _check_rank(i, n)
    x = _check_unit(x)
    return _scalarize(special.betainc(n - i + 1, i, 1.0 - x))


def beta_pdf(i, n, x):
    """Density of ``U_{i:n}``."""
    i, n = _check_rank(i, n)
    x = _check_unit(x)
    with np.errstate(divide="ignore"):
        logpdf = (
            special.xlogy(i - 1, x)
            + special.xlog1py(n - i, -x)
            - special.betaln(i, n - i + 1)
        )
    return _scalarize(np.exp(logpdf))


def beta_inv(i, n, p):
    """Quantile of ``U_{i:n}``: the x with ``beta_cdf(i, n, x) == p``.

    Starts from :func:`scipy.special.betaincinv`, polishes with Newton steps
    and falls back to bisection wherever the polished point misses the
    target by more than 1e-13.
    """
    i, n = _check_rank(i, n)
    p = _check_unit(p, "p")
    i, n, p = np.broadcast_arrays(i, n, p)
    a = i.astype(float)
    b = (n - i + 1).astype(float)
    x = np.asarray(special.betaincinv(a, b, p), dtype=float)
    interior = (p > 0.0) & (p < 1.0)
    for _ in range(3):
        f = special.betainc(a, b, x) - p
        with np.errstate(divide="ignore", invalid="ignore"):
            dens = np.exp(
                special.xlogy(a - 1, x) + special.xlog1py(b - 1, -x) - special.betaln(a, b)
            )
            step = np.where(dens > 0, f / dens, 0.0)
        cand = np.clip(x - step, 0.0, 1.0)
        better = np.abs(special.betainc(a, b, cand) - p) < np.abs(f)
        x = np.where(interior & better, cand, x)
    bad = interior & (np.abs(special.betainc(a, b, x) - p) > 1e-13)
    x = np.array(x)
    for idx in map(tuple, np.argwhere(bad)):
        x[idx] = _bisect_beta(a[idx], b[idx], p[idx])
    x = np.where(p == 0.0, 0.0, np.where(p == 1.0, 1.0, x))
    return _scalarize(x)


def _bisect_beta(a, b, p):
    lo, hi = 0.0, 1.0
    while hi - lo > 1e-14:
        mid = 0.5 * (lo + hi)
        if special.betainc(a, b, mid) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def binom_tail(n, p, k):
    """Return ``P(Binomial(n, p) >= k)`` for ``0 <= k <= n``."""
    n = np.asarray(n)
    k = np.asarray(k)
    if np.any(k < 0) or np.any(k > n):
        raise ValueError(f"k out of range: need 0 <= k <= n, got k={k}, n={n}")
    p = _check_unit(p, "p")
    safe_k = np.maximum(k, 1)
    val = special.betainc(safe_k, n - safe_k + 1, p)
    return _scalarize(np.where(k == 0, 1.0, val))


def _log_binom_pmf(n, p, k):
    return (
        log_factorial(n)
        - log_factorial(k)
        - log_factorial(n - k)
        + k * math.log(p)
        + (n - k) * math.log1p(-p)
    )


def log_binom_tail(n: int, p: float, k: int) -> float:
    """Natural log of ``P(Binomial(n, p) >= k)``; finite below 1e-300.

    Falls back to a log-space series in the pmf when the tail underflows
    double precision.
    """
    n, k = int(n), int(k)
    if not 0 <= k <= n:
        raise ValueError(f"k out of range: need 0 <= k <= n, got k={k}, n={n}")
    p = float(_check_unit(p, "p"))
    if k == 0 or p == 1.0:
        return 0.0
    if p == 0.0:
        return -math.inf
    val = float(special.betainc(k, n - k + 1, p))
    if val > 1e-280:
        return math.log(val)
    # terms P(B = j), j >= k, decrease geometrically this deep in the tail
    ratio = p / (1.0 - p)
    total, term, j = 1.0, 1.0, k
    while j < n:
        term *= (n - j) / (j + 1) * ratio
        total += term
        j += 1
        if term < 1e-17 * total:
            break
    return _log_binom_pmf(n, p, k) + math.log(total)


def log_beta_cdf(i: int, n: int, x: float) -> float:
    """Natural log of ``beta_cdf(i, n, x)``, usable for astronomically small levels."""
    _check_rank(i, n)
    return log_binom_tail(n, x, i)


def log_beta_sf(i: int, n: int, x: float) -> float:
    """Natural log of ``beta_sf(i, n, x)``."""
    _check_rank(i, n)
    return log_binom_tail(n, 1.0 - float(x), n - i + 1)


def log_poisson_pmf(lam, k):
    """Log of the Poisson(lam) mass at k."""
    lam = np.asarray(lam, dtype=float)
    if np.any(lam <= 0):
        raise ValueError("lambda must be positive")
    k = np.asarray(k)
    if np.any(k < 0):
        raise ValueError("k must be nonnegative")
    return _scalarize(special.xlogy(k, lam) - lam - special.gammaln(k + 1.0))


def poisson_pmf(lam, k):
    """Poisson(lam) mass at k, evaluated through :func:`log_poisson_pmf`."""
    return _scalarize(np.exp(log_poisson_pmf(lam, k)))


def normal_cdf_pdf(x):
    """Return ``(Phi(x), phi(x))`` for the standard normal law."""
    x = np.asarray(x, dtype=float)
    cdf = special.ndtr(x)
    pdf = _INV_SQRT_2PI * np.exp(-0.5 * x * x)
    return _scalarize(cdf), _scalarize(pdf)


def normal_sf(x):
    """``1 - Phi(x)`` without cancellation for large x."""
    return _scalarize(special.ndtr(-np.asarray(x, dtype=float)))


def log_factorial(k: int) -> float:
    """``log(k!)``: exact summation up to 256, Stirling series beyond."""
    k = int(k)
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k <= _EXACT_FACTORIAL_LIMIT:
        return _LOG_FACTORIALS[k]
    m = k + 1.0  # log k! = log Gamma(k + 1)
    inv = 1.0 / m
    inv2 = inv * inv
    series = 0.0
    power = inv
    for coeff in _STIRLING_COEFFS:
        series += coeff * power
        power *= inv2
    return (m - 0.5) * math.log(m) - m + _HALF_LOG_2PI + series


def stirling_log_factorial(k: int) -> float:
    """Truncated Stirling form ``log(sqrt(2 pi) k^(k + 1/2) e^(-k))``.

    Carries the ``O(1/k)`` relative error of the leading-order formula; kept
    to compare against :func:`log_factorial`.
    """
    if k < 1:
        raise ValueError("k must be positive")
    return _HALF_LOG_2PI + (k + 0.5) * math.log(k) - k
