"""Closed-form asymptotics of HC critical values and local levels.

Everything is parameterized by the location t of the HC threshold
``d_n(t)`` and by ``u = log(log(n))``.  Ranks are grouped into regimes by
how i (or n - i) grows relative to u and u^3:

    A0 < Ac < B0 < Bc < C > BbarC > Bbar0 > AbarC > Abar0

(left classes look at i, barred classes at n - i).  Regime membership is a
property of rank sequences; :func:`classify_rank` is a finite-n heuristic
whose band edges live in :class:`RegimeBands`.

Approximations drop their order-term remainders.  Local levels come back on
the natural-log scale, since many of them are far below 1e-300.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from goflevels import special_fn
from goflevels.gof_tests import hc_lower_boundary, hc_threshold

__all__ = [
    "Regime",
    "RankRegime",
    "RegimeBands",
    "ApproxValue",
    "Category",
    "Relation",
    "RegimeMismatchError",
    "NoApplicableCaseError",
    "classify_rank",
    "delta",
    "exact_boundary",
    "exact_log_local_level",
    "h_expansion",
    "local_level_poisson_approx",
    "local_level_normal_approx",
    "normal_standardized",
    "local_level_asymptotic",
    "ratio_limit_category",
]

GAMMA = math.e / 2.0


class Regime(str, Enum):
    A0 = "A0"
    AC = "Ac"
    B0 = "B0"
    BC = "Bc"
    C = "C"
    BBAR_C = "BbarC"
    BBAR_0 = "Bbar0"
    ABAR_C = "AbarC"
    ABAR_0 = "Abar0"


_ORDER = {tag: k for k, tag in enumerate(Regime)}
_PARAMETERIZED = {Regime.AC, Regime.BC, Regime.BBAR_C, Regime.ABAR_C}
_RIGHT = {Regime.BBAR_C, Regime.BBAR_0, Regime.ABAR_C, Regime.ABAR_0}


class RegimeMismatchError(ValueError):
    """A regime override is incompatible with the rank."""


class NoApplicableCaseError(ValueError):
    """No approximation case covers the rank."""


@dataclass(frozen=True)
class RankRegime:
    """A rank class; ``c`` is the limit constant of parameterized classes
    (``i/u`` for Ac, ``i/u^3`` for Bc, and the same in ``n - i`` for the
    barred classes)."""

    tag: Regime
    c: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "tag", Regime(self.tag))
        if (self.tag in _PARAMETERIZED) != (self.c is not None):
            raise ValueError(f"regime {self.tag.value} {'needs' if self.tag in _PARAMETERIZED else 'takes no'} constant c")
        if self.c is not None and not self.c > 0:
            raise ValueError("regime constant c must be positive")

    @property
    def right(self) -> bool:
        return self.tag in _RIGHT

    def __str__(self) -> str:
        return self.tag.value if self.c is None else f"{self.tag.value}({self.c:.6g})"

    @classmethod
    def parse(cls, text: str) -> RankRegime:
        """Parse ``"A0"`` or ``"Ac(0.5)"`` style strings."""
        text = text.strip()
        if "(" in text:
            tag, rest = text.split("(", 1)
            return cls(Regime(tag), float(rest.rstrip(")")))
        return cls(Regime(text))


@dataclass(frozen=True)
class RegimeBands:
    """Band edges for finite-n classification; ``u = log(log(n))``.

    A rank with ``k = min(i, n - i)`` on its side is extreme (A0) when
    ``k <= a0_scale * u / log(u)``, in Ac while ``k < ac_scale * u log(u)``,
    in B0 while
    ``k/u^3 < b_min``, in Bc while ``k (1 - k/n) / u^3 <= c_min``, and central
    beyond.  ``fixed_max`` splits A0 into ranks treated as fixed (``k <=
    fixed_max * sqrt(u)``) and slowly growing ones; ``poisson_max`` bounds
    the Poisson approximation to ``k <= poisson_max * sqrt(n/u)``.
    """

    a0_scale: float = 1.0
    ac_scale: float = 1.0
    b_min: float = 0.2
    c_min: float = 5.0
    fixed_max: float = 1.0
    poisson_max: float = 1.0


DEFAULT_BANDS = RegimeBands()


@dataclass(frozen=True)
class ApproxValue:
    value: float
    log_scale: bool
    regime: RankRegime
    formula_id: str

    @property
    def linear(self) -> float:
        return math.exp(self.value) if self.log_scale else self.value


class Category(str, Enum):
    ONE = "ONE"
    STRICT_BETWEEN = "STRICT_BETWEEN"
    ZERO = "ZERO"


class Relation(str, Enum):
    """Growth relation between two rank sequences in the same class.

    ``RATIO_CLOSE``: ranks (or n - ranks) with ratio ``1 + o(sqrt(k/u^3))``;
    ``RATIO_GAP``: ratio ``1 - c_n sqrt(k/u^3)`` with ``c_n -> c > 0``;
    ``FIXED_GAP``: constant difference of ranks; ``GROWING_GAP``: anything
    larger.
    """

    RATIO_CLOSE = "ratio_close"
    RATIO_GAP = "ratio_gap"
    FIXED_GAP = "fixed_gap"
    GROWING_GAP = "growing_gap"


def _u(n: int) -> float:
    if n < 16:
        raise ValueError("asymptotic regimes need n >= 16")
    return math.log(math.log(n))


def classify_rank(i: int, n: int, bands: RegimeBands = DEFAULT_BANDS) -> RankRegime:
    """Finite-n regime of rank i (heuristic; see :class:`RegimeBands`)."""
    if not 1 <= i <= n:
        raise ValueError(f"rank out of range: need 1 <= i <= n, got i={i}, n={n}")
    u = _u(n)
    right = (n - i) < i
    k = n - i if right else i
    log_u = math.log(u)
    if k <= bands.a0_scale * u / log_u:
        return RankRegime(Regime.ABAR_0 if right else Regime.A0)
    if k < bands.ac_scale * u * log_u:
        return RankRegime(Regime.ABAR_C if right else Regime.AC, k / u)
    u3 = u**3
    if k / u3 < bands.b_min:
        return RankRegime(Regime.BBAR_0 if right else Regime.B0)
    if k * (1.0 - k / n) / u3 <= bands.c_min:
        return RankRegime(Regime.BBAR_C if right else Regime.BC, k / u3)
    return RankRegime(Regime.C)


def _resolve(i, n, regime, bands) -> RankRegime:
    found = classify_rank(i, n, bands)
    if regime is None:
        return found
    if isinstance(regime, str):
        regime = RankRegime.parse(regime)
    # band edges are heuristic: accept the classified class or a neighbour
    if abs(_ORDER[regime.tag] - _ORDER[found.tag]) > 1:
        raise RegimeMismatchError(f"rank {i} of n={n} classifies as {found}, not {regime}")
    return regime


def delta(c: float) -> float:
    """``1 + c - sqrt(c^2 + 2c)``, which lies in (0, 1) for c > 0."""
    return 1.0 + c - math.sqrt(c * c + 2.0 * c)


def exact_boundary(i: int, n: int, t: float) -> float:
    """``h_{i,n}(d_n(t))``."""
    return float(hc_lower_boundary(i, n, hc_threshold(n, t).d))


def exact_log_local_level(i: int, n: int, t: float) -> float:
    """Log of the exact HC local level ``P(U_{i:n} < h_{i,n}(d_n(t)))``."""
    return special_fn.log_beta_cdf(i, n, exact_boundary(i, n, t))


def _shift(u: float, t: float) -> float:
    # log(u) + 2t - log(pi), recurring in every expansion
    return math.log(u) + 2.0 * t - math.log(math.pi)


def h_expansion(i: int, n: int, t: float, regime=None, bands: RegimeBands = DEFAULT_BANDS) -> ApproxValue:
    """Leading terms of ``n h_{i,n}(d_n(t)) / i`` for the rank's regime."""
    regime = _resolve(i, n, regime, bands)
    u = _u(n)
    s = _shift(u, t)
    tag = regime.tag
    if tag is Regime.A0:
        value = i / (2.0 * u) * (1.0 - s / (2.0 * u) - i / u)
        fid = "h_extreme_left"
    elif tag is Regime.AC:
        cn = u / i
        root = math.sqrt(cn * cn + 2.0 * cn)
        value = delta(cn) * (1.0 - s / (2.0 * i * root))
        fid = "h_intermediate_left"
    elif tag in (Regime.ABAR_C, Regime.ABAR_0):
        cn = (n - i) / u
        root = math.sqrt(1.0 + 2.0 * cn)
        value = 1.0 - u / i * (1.0 + root) - s / (2.0 * i) * (1.0 + (1.0 + cn) / root)
        fid = "h_extreme_right"
    else:
        frac = 1.0 - i / n
        value = (
            1.0
            - math.sqrt(2.0 * u / i * frac)
            - s / (2.0 * math.sqrt(2.0 * i * u)) * math.sqrt(frac)
            + (1.0 - 2.0 * i / n) * u / i
        )
        fid = "h_central"
    return ApproxValue(value, False, regime, fid)


def local_level_poisson_approx(i: int, n: int, t: float, regime=None, bands: RegimeBands = DEFAULT_BANDS) -> ApproxValue:
    """Poisson approximation of the local level at the exact boundary.

    Left ranks use ``P(Y = i)`` with ``Y ~ Poisson(n h)``, right ranks
    ``P(Y~ = n - i)`` with ``Y~ ~ Poisson(n (1 - h))``, each times a
    regime-dependent prefactor.
    """
    regime = _resolve(i, n, regime, bands)
    u = _u(n)
    h = exact_boundary(i, n, t)
    tag = regime.tag
    right = regime.right or (tag is Regime.C and i > n / 2)
    k = n - i if right else i
    if right:
        log_mass = special_fn.log_poisson_pmf(n * (1.0 - h), k) if k > 0 else -n * (1.0 - h)
    else:
        log_mass = special_fn.log_poisson_pmf(n * h, k)
    if tag is Regime.A0:
        pref, fid = 0.0, "poisson_extreme_left"
    elif tag is Regime.ABAR_0:
        pref, fid = 0.0, "poisson_extreme_right"
    elif tag is Regime.AC:
        c = u / i
        pref, fid = -math.log(math.sqrt(c * c + 2.0 * c) - c), "poisson_intermediate_left"
    elif tag is Regime.ABAR_C:
        c = (n - i) / u
        pref, fid = math.log1p(c / (1.0 + math.sqrt(1.0 + 2.0 * c))), "poisson_intermediate_right"
    else:
        if k > bands.poisson_max * math.sqrt(n / u):
            raise NoApplicableCaseError(
                f"rank {i} of n={n} is too central for a Poisson approximation"
            )
        pref = 0.5 * math.log(k / (2.0 * u))
        fid = "poisson_moderate_right" if right else "poisson_moderate_left"
    return ApproxValue(pref + log_mass, True, regime, fid)


def local_level_normal_approx(i: int, n: int, t: float, regime=None, bands: RegimeBands = DEFAULT_BANDS) -> ApproxValue:
    """Normal tail approximation ``phi(x)/x`` with ``x = (i - n h)/sqrt(n h (1 - h))``."""
    regime = _resolve(i, n, regime, bands)
    if regime.tag is not Regime.C:
        raise RegimeMismatchError(f"normal approximation needs a central rank, got {regime}")
    h = exact_boundary(i, n, t)
    x = normal_standardized(i, n, h)
    if not x > 0:
        raise NoApplicableCaseError("standardized boundary must be positive")
    log_phi = -0.5 * x * x - 0.5 * math.log(2.0 * math.pi)
    return ApproxValue(log_phi - math.log(x), True, regime, "normal")


def normal_standardized(i: int, n: int, h: float) -> float:
    """``(i - n h) / sqrt(n h (1 - h))``."""
    return (i - n * h) / math.sqrt(n * h * (1.0 - h))


def local_level_asymptotic(i: int, n: int, t: float, regime=None, bands: RegimeBands = DEFAULT_BANDS) -> ApproxValue:
    """Explicit leading-order local level for the rank's regime (log scale).

    Implicit remainders inside exponents, ``[1 + o(1)]`` and ``o(u)``, are
    set to their leading values.
    """
    regime = _resolve(i, n, regime, bands)
    u = _u(n)
    log_n = math.log(n)
    loglog = math.log(log_n)
    s = _shift(u, t)
    tag = regime.tag
    if tag is Regime.A0:
        if i <= bands.fixed_max * math.sqrt(u):
            value = i * math.log(i * i / (2.0 * u)) - special_fn.log_factorial(i)
            fid = "extreme_left_fixed"
        else:
            v = (s + 3.0 * i) / (2.0 * u)
            value = -0.5 * math.log(2.0 * math.pi * i) + i * math.log(GAMMA * i / u) - i * v
            fid = "extreme_left_growing"
    elif tag is Regime.ABAR_0:
        k = n - i
        base = -2.0 * t - math.log(u) - 2.0 * loglog
        if k <= bands.fixed_max * math.sqrt(u):
            value = base + math.log(math.pi) + k * math.log(2.0 * u / math.e**2) - special_fn.log_factorial(k)
            fid = "extreme_right_fixed"
        else:
            w = (s + 3.0 * k) / (2.0 * u)
            value = (
                base
                + 0.5 * math.log(math.pi)
                - 0.5 * math.log(2.0 * k)
                + k * math.log(u / (GAMMA * k))
                + k * w
            )
            fid = "extreme_right_growing"
    elif tag is Regime.C:
        value = -t - math.log(2.0 * u * log_n)
        fid = "central"
    elif tag in (Regime.B0, Regime.BC, Regime.BBAR_0, Regime.BBAR_C):
        zeta = math.sqrt(u / i) if tag in (Regime.B0, Regime.BC) else -math.sqrt(u / (n - i))
        value = -t - math.log(2.0 * u * log_n) + math.sqrt(2.0) * zeta * u / 3.0
        fid = "moderate_right" if tag in (Regime.BBAR_0, Regime.BBAR_C) else "moderate_left"
    elif tag is Regime.AC:
        cn = u / i
        dl = delta(cn)
        root = math.sqrt(cn * cn + 2.0 * cn)
        value = (
            0.5 * math.log(cn)
            - math.log1p(-dl)
            - 0.5 * math.log(2.0 * math.pi * u)
            + i * (math.log(dl) + 1.0 - dl)
            + (1.0 - dl) / root * (0.5 * math.log(math.pi) - t - 0.5 * math.log(u))
        )
        fid = "intermediate_left"
    else:
        cn = (n - i) / u
        root = math.sqrt(1.0 + 2.0 * cn)
        value = (
            math.log1p(cn / (1.0 + root))
            - 0.5 * math.log(2.0 * math.pi * cn * u)
            + cn * u * math.log((1.0 + cn + root) / cn)
            + (1.0 + 1.0 / root) * (0.5 * math.log(math.pi) - t - 0.5 * math.log(u))
            - (1.0 + root) * loglog
        )
        fid = "intermediate_right"
    return ApproxValue(value, True, regime, fid)


# -- limits of ratios of local levels -------------------------------------------


def _as_regime(r) -> RankRegime:
    return RankRegime.parse(r) if isinstance(r, str) else r


def ratio_limit_category(regime1, regime2, relation: Relation | str | None = None) -> Category:
    """Limit class of ``alpha_{i2,n} / alpha_{i1,n}`` for rank sequences
    ``i1 < i2`` in the given regimes.

    ``ONE`` means the ratio tends to 1, ``STRICT_BETWEEN`` to a constant in
    (0, 1), ``ZERO`` to 0.  Pairs within B0, Bbar0, Ac or AbarC need a
    :class:`Relation`.
    """
    r1, r2 = _as_regime(regime1), _as_regime(regime2)
    if relation is not None:
        relation = Relation(relation)
    o1, o2 = _ORDER[r1.tag], _ORDER[r2.tag]
    if o1 > o2:
        raise ValueError(f"{r1} does not precede {r2} in rank order")
    t1, t2 = r1.tag, r2.tag
    if t1 == t2 and r1.c is not None and r2.c is not None:
        # left classes grow with the rank, barred classes shrink
        if (t1 in _RIGHT and r1.c < r2.c) or (t1 not in _RIGHT and r1.c > r2.c):
            raise ValueError(f"{r1} does not precede {r2} in rank order")

    if t1 is Regime.C and t2 is Regime.C:
        return Category.ONE
    if t1 is Regime.BC and t2 is Regime.BC:
        return Category.ONE if r1.c == r2.c else Category.STRICT_BETWEEN
    if t1 is Regime.BBAR_C and t2 is Regime.BBAR_C:
        return Category.ONE if r1.c == r2.c else Category.STRICT_BETWEEN
    if t1 is Regime.BC and t2 in (Regime.C, Regime.BBAR_C):
        return Category.STRICT_BETWEEN
    if t1 is Regime.C and t2 is Regime.BBAR_C:
        return Category.STRICT_BETWEEN
    if (t1, t2) in ((Regime.B0, Regime.B0), (Regime.BBAR_0, Regime.BBAR_0)):
        if relation is None:
            raise ValueError(f"{t1.value} x {t2.value} needs a growth relation")
        return {
            Relation.RATIO_CLOSE: Category.ONE,
            Relation.RATIO_GAP: Category.STRICT_BETWEEN,
        }.get(relation, Category.ZERO)
    if (t1, t2) in ((Regime.AC, Regime.AC), (Regime.ABAR_C, Regime.ABAR_C)):
        if relation is None:
            raise ValueError(f"{t1.value} x {t2.value} needs a growth relation")
        if relation is Relation.FIXED_GAP and r1.c == r2.c:
            return Category.STRICT_BETWEEN
        return Category.ZERO
    return Category.ZERO
