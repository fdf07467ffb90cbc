"""Straight-Jacket Auction prices, revenue and audits for uniform valuations on [0,1]^n.

Prices are solved layer by layer.  Layer k's price makes the no-sale body
of the first k coordinates have volume 1 - k/(n+1), subject to
submodularity; when the root would undercut the previous price, layers are
merged (the lower layer goes unsold) and the equation is re-solved.

Roots are isolated by bisection with exact rational sign evaluation.  Each
price is stored as a short rational inside its bisection bracket, and every
later computation is exact with respect to those representatives.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .poly import UniPoly, to_rational
from .polytope import AlphaVector
from .volume import layer_polynomial, normalized_volume

log = logging.getLogger(__name__)

DEFAULT_TOL = Fraction(1, 10**12)
DEFAULT_AUDIT_TOL = Fraction(1, 10**9)
DESK_LIMIT = 8


class Unsolvable(Exception):
    """No admissible root exists for some layer."""

    def __init__(self, message: str, diagnostics: list | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or []


class NoRoot(Exception):
    """The bracket endpoints do not have opposite signs."""

    def __init__(self, lower, upper, f_lower, f_upper):
        super().__init__(
            f"no sign change on [{float(lower)}, {float(upper)}]: "
            f"f(lower)={float(f_lower):.3e}, f(upper)={float(f_upper):.3e}"
        )
        self.lower, self.upper = lower, upper
        self.f_lower, self.f_upper = f_lower, f_upper


# Root isolation


def simplest_between(lo: Fraction, hi: Fraction) -> Fraction:
    """The rational with the smallest denominator in [lo, hi] (Stern-Brocot)."""
    if lo > hi:
        lo, hi = hi, lo
    if lo <= 0 <= hi:
        return Fraction(0)
    if hi < 0:
        return -simplest_between(-hi, -lo)
    fl = math.floor(lo)
    if fl == lo:
        return Fraction(fl)
    if fl + 1 <= hi:
        return Fraction(fl + 1)
    # lo and hi share the integer part; recurse on the reciprocal of the fractional parts
    rest = simplest_between(1 / (hi - fl), 1 / (lo - fl))
    return fl + 1 / rest


@dataclass(frozen=True)
class RootEnclosure:
    lower: Fraction
    upper: Fraction

    @property
    def width(self) -> Fraction:
        return self.upper - self.lower

    @property
    def exact(self) -> bool:
        return self.lower == self.upper

    def representative(self) -> Fraction:
        return self.lower if self.exact else simplest_between(self.lower, self.upper)

    def __contains__(self, x) -> bool:
        return self.lower <= x <= self.upper


def _sign(x) -> int:
    return (x > 0) - (x < 0)


def solve_layer_root(w: UniPoly, lower, upper, tol=DEFAULT_TOL, target=0) -> RootEnclosure:
    """Bracket a root of ``w(x) = target`` on [lower, upper] to width below ``tol``."""
    lo, hi = to_rational(lower), to_rational(upper)
    tol, target = to_rational(tol), to_rational(target)
    if not lo <= hi:
        raise ValueError("lower must not exceed upper")
    if tol <= 0:
        raise ValueError("tol must be positive")
    flo, fhi = w(lo) - target, w(hi) - target
    if flo == 0:
        return RootEnclosure(lo, lo)
    if fhi == 0:
        return RootEnclosure(hi, hi)
    slo = _sign(flo)
    if slo == _sign(fhi):
        raise NoRoot(lo, hi, flo, fhi)
    if w.degree == 1:
        a0, a1 = w.coeffs
        x = (target - a0) / a1
        return RootEnclosure(x, x)
    while hi - lo >= tol:
        mid = (lo + hi) / 2
        fm = w(mid) - target
        if fm == 0:
            return RootEnclosure(mid, mid)
        if _sign(fm) == slo:
            lo = mid
        else:
            hi = mid
    return RootEnclosure(lo, hi)


# Price schedules


@dataclass
class PriceSchedule:
    n: int
    prices: tuple[Fraction, ...]
    enclosures: tuple[tuple[Fraction, Fraction], ...]
    sold: tuple[bool, ...]
    tol: Fraction
    error_bounds: tuple[Fraction, ...] = ()
    steps: list = field(default_factory=list)

    @property
    def gap(self) -> int:
        below = [k for k in range(1, self.n) if self.sold[k - 1]]
        return self.n - max(below, default=0) - 1

    @property
    def unsold_layers(self) -> tuple[int, ...]:
        return tuple(k for k in range(1, self.n + 1) if not self.sold[k - 1])

    def price(self, k: int) -> Fraction:
        """p_k with the conventions p_0 = 0 and p_-1 = -1."""
        if k == 0:
            return Fraction(0)
        if k == -1:
            return Fraction(-1)
        return self.prices[k - 1]

    @property
    def degenerate(self) -> bool:
        return bool(symmetric_tightness(self.prices))

    def to_general(self) -> "GeneralPriceSchedule":
        return GeneralPriceSchedule.from_symmetric(self.prices)


@dataclass(frozen=True)
class SolveStep:
    k: int
    merge: int
    outcome: str
    bracket: tuple[Fraction, Fraction]


def _as_prices(p) -> tuple[Fraction, ...]:
    if isinstance(p, PriceSchedule):
        return p.prices
    return tuple(to_rational(v) for v in p)


def _diffs(prices: Sequence[Fraction], upto: int) -> list[Fraction]:
    """(p_1, p_2 - p_1, ..., p_upto - p_(upto-1))."""
    out, prev = [], Fraction(0)
    for v in prices[:upto]:
        out.append(v - prev)
        prev = v
    return out


def _layer_volume(prefix: Sequence[Fraction], x: Fraction, k: int) -> Fraction:
    vals = list(prefix) + [x] + [Fraction(0)] * (k - len(prefix) - 1)
    return normalized_volume(vals) / math.factorial(k)


def _propagated_error(
    prefix_prices: Sequence[Fraction],
    x: Fraction,
    k: int,
    bounds: Sequence[Fraction],
) -> Fraction:
    """First-order error in ``x`` induced by errors in the earlier prices."""
    if not prefix_prices or not any(bounds):
        return Fraction(0)
    h = Fraction(1, 2**64)
    m = len(prefix_prices)

    def F(ps, xv):
        return _layer_volume(_diffs(ps, m), xv - ps[-1], k)

    base = F(prefix_prices, x)
    dx = (F(prefix_prices, x + h) - base) / h
    if dx == 0:
        return Fraction(0)
    total = Fraction(0)
    for j in range(m):
        if not bounds[j]:
            continue
        bumped = list(prefix_prices)
        bumped[j] += h
        total += abs((F(bumped, x) - base) / h) * bounds[j]
    return total / abs(dx)


def solve_prices(
    n: int,
    tol=DEFAULT_TOL,
    desk_limit: int = DESK_LIMIT,
    layer_method: str = "dp",
) -> PriceSchedule:
    """SJA price schedule for ``n`` items.

    Layer k is tried with merge depth i = 1, 2, ...: the unknown price x is
    shared by layers k-i+1..k and the equation reads

        vol_k(p_1, ..., p_(k-i) - p_(k-i-1), x - p_(k-i), 0, ..., 0) = 1 - k/(n+1)

    with p_(k-i) <= x <= 2 p_(k-i) - p_(k-i-1).  If even x = p_(k-i) gives too
    much volume the root lies below p_(k-i) and the merge deepens; if the
    submodularity cap gives too little, the candidate is unsolvable.
    """
    from .polytope import DeskLimitError

    if n < 1:
        raise ValueError("n must be at least 1")
    if n > desk_limit:
        raise DeskLimitError(
            f"solving n={n} exceeds the desk limit {desk_limit}; pass a larger limit to try it"
        )
    tol = to_rational(tol)
    if tol <= 0:
        raise ValueError("tol must be positive")

    p: list[Fraction] = [Fraction(0)] * (n + 1)  # p[0] = 0
    enclosure: list[tuple[Fraction, Fraction]] = [(Fraction(0), Fraction(0))] * (n + 1)
    bounds: list[Fraction] = [Fraction(0)] * (n + 1)
    sold = [True] * (n + 1)
    steps: list[SolveStep] = []

    def price(j: int) -> Fraction:
        return Fraction(-1) if j < 0 else p[j]

    for k in range(1, n + 1):
        target = 1 - Fraction(k, n + 1)
        accepted = False
        for i in range(1, k + 1):
            b = k - i
            base, cap = price(b), 2 * price(b) - price(b - 1)
            prefix = _diffs(p[1:], b)
            w = layer_polynomial(prefix, k, method=layer_method)
            f_base = w(0) - target
            if f_base > 0:
                steps.append(SolveStep(k, i, "below-previous", (base, cap)))
                continue
            f_cap = w(cap - base) - target
            if f_cap < 0:
                steps.append(SolveStep(k, i, "no-root", (base, cap)))
                raise Unsolvable(
                    f"layer {k}: no root up to the submodularity cap {float(cap):.6g} "
                    f"(merge depth {i}, residual at cap {float(f_cap):.3e})",
                    steps,
                )
            root = solve_layer_root(w, 0, cap - base, tol, target)
            rep = base + root.representative()
            err = _propagated_error(p[1 : b + 1], rep, k, bounds[1 : b + 1])
            lo, hi = base + root.lower - 2 * err, base + root.upper + 2 * err
            for j in range(k - i + 1, k + 1):
                p[j] = rep
                enclosure[j] = (lo, hi)
                bounds[j] = root.width + 2 * err
                sold[j] = j == k
            steps.append(SolveStep(k, i, "accepted", (base, cap)))
            accepted = True
            break
        if not accepted:
            raise Unsolvable(f"layer {k}: merge depth exhausted", steps)
        log.debug("layer %d solved: p=%s", k, float(p[k]))

    return PriceSchedule(
        n=n,
        prices=tuple(p[1:]),
        enclosures=tuple(enclosure[1:]),
        sold=tuple(sold[1:]),
        tol=tol,
        error_bounds=tuple(bounds[1:]),
        steps=steps,
    )


# General schedules, submodularity and allocation


def _bundle(items) -> frozenset[int]:
    return frozenset(int(i) for i in items)


@dataclass
class GeneralPriceSchedule:
    """Prices for every bundle of items 1..n, with the empty bundle free."""

    n: int
    prices: dict[frozenset[int], Fraction]

    def __post_init__(self):
        full = {frozenset(c) for k in range(self.n + 1) for c in itertools.combinations(range(1, self.n + 1), k)}
        given = {_bundle(b): to_rational(v) for b, v in self.prices.items()}
        given.setdefault(frozenset(), Fraction(0))
        if given[frozenset()] != 0:
            raise ValueError("the empty bundle must have price 0")
        missing = full - set(given)
        if missing:
            raise ValueError(f"missing prices for bundles {sorted(map(sorted, missing))[:5]}")
        extra = set(given) - full
        if extra:
            raise ValueError(f"bundles outside items 1..{self.n}: {sorted(map(sorted, extra))[:5]}")
        self.prices = given

    @classmethod
    def from_symmetric(cls, prices: Sequence) -> "GeneralPriceSchedule":
        vals = [to_rational(v) for v in prices]
        n = len(vals)
        table = {}
        for k in range(n + 1):
            for c in itertools.combinations(range(1, n + 1), k):
                table[frozenset(c)] = vals[k - 1] if k else Fraction(0)
        return cls(n, table)

    @classmethod
    def from_mapping(cls, n: int, data: Mapping) -> "GeneralPriceSchedule":
        """Keys like ``"1,2"`` or ``""`` for the empty bundle."""
        table = {}
        for key, v in data.items():
            items = [t for t in str(key).replace(" ", "").split(",") if t]
            table[frozenset(int(t) for t in items)] = v
        return cls(n, table)

    def bundles(self) -> list[frozenset[int]]:
        return sorted(self.prices, key=lambda b: (len(b), sorted(b)))

    def __getitem__(self, bundle) -> Fraction:
        return self.prices[_bundle(bundle)]


@dataclass
class SubmodularityReport:
    passed: bool
    tight: list[tuple[tuple[int, ...], str]]
    violations: list[tuple[tuple[int, ...], tuple[int, ...]]]

    @property
    def degenerate(self) -> bool:
        return bool(self.tight)


def submodularity_check(s: GeneralPriceSchedule) -> SubmodularityReport:
    """Check p(I|J) + p(I&J) <= p(I) + p(J) over incomparable pairs.

    Comparable pairs hold with equality trivially and are skipped.
    """
    tight: set[tuple[tuple[int, ...], str]] = set()
    violations = []
    bundles = s.bundles()
    for I, J in itertools.combinations(bundles, 2):
        if I <= J or J <= I:
            continue
        lhs = s.prices[I | J] + s.prices[I & J]
        rhs = s.prices[I] + s.prices[J]
        if lhs > rhs:
            violations.append((tuple(sorted(I)), tuple(sorted(J))))
        elif lhs == rhs:
            tight.add((tuple(sorted(I | J)), "left"))
            tight.add((tuple(sorted(I & J)), "left"))
            tight.add((tuple(sorted(I)), "right"))
            tight.add((tuple(sorted(J)), "right"))
    order = sorted(tight, key=lambda t: (len(t[0]), t[0], t[1]))
    return SubmodularityReport(not violations, order, violations)


def symmetric_tightness(prices: Sequence) -> dict[int, set[str]]:
    """Tight layers of a symmetric schedule, from cardinalities alone.

    Bundles I, J with |I| = a <= |J| = b and |I & J| = c < a are tight iff
    p_(a+b-c) + p_c = p_a + p_b.
    """
    vals = [Fraction(0)] + [to_rational(v) for v in prices]
    n = len(vals) - 1
    out: dict[int, set[str]] = {}
    for c in range(n):
        for a in range(c + 1, n + 1):
            for b in range(a, n + 1):
                u = a + b - c
                if u > n:
                    break
                if vals[u] + vals[c] == vals[a] + vals[b]:
                    out.setdefault(u, set()).add("left")
                    out.setdefault(c, set()).add("left")
                    out.setdefault(a, set()).add("right")
                    out.setdefault(b, set()).add("right")
    return out


@dataclass(frozen=True)
class Allocation:
    bundle: tuple[int, ...]
    price: Fraction
    utility: Fraction


def allocate(s: GeneralPriceSchedule, x: Sequence) -> Allocation:
    """Utility-maximizing bundle for valuation ``x``.

    Ties go to the largest bundle, then to the lexicographically smallest.
    """
    vals = [to_rational(v) for v in x]
    if len(vals) != s.n:
        raise ValueError(f"valuation has {len(vals)} entries, expected {s.n}")
    if any(not 0 <= v <= 1 for v in vals):
        raise ValueError("valuations must lie in the unit cube")
    best = None
    for bundle, price in s.prices.items():
        items = tuple(sorted(bundle))
        u = sum((vals[i - 1] for i in items), Fraction(0)) - price
        key = (u, len(items), tuple(-i for i in items))
        if best is None or key > best[0]:
            best = (key, items, price, u)
    _, items, price, u = best
    return Allocation(items, price, u)


# Regions, revenue and audits


@dataclass(frozen=True)
class RegionFactorization:
    k: int
    factor_low: AlphaVector
    factor_high: AlphaVector | None
    volume: Fraction


def _sim_volume(a: AlphaVector | None) -> Fraction:
    if a is None:
        return Fraction(1)
    return normalized_volume(a.alphas) / math.factorial(a.n)


def region_volume(p, k: int) -> RegionFactorization:
    """Volume of the region where the first k items are bought.

    The region is congruent to a product of two SIM-bodies built from the
    price differences; a ValueError signals a non-submodular or non-monotone
    schedule.
    """
    prices = _as_prices(p)
    n = len(prices)
    if not 1 <= k <= n:
        raise ValueError(f"layer {k} outside 1..{n}")
    d = _diffs(prices, n)
    try:
        low = AlphaVector(1 - d[j] for j in range(k - 1, -1, -1))
        high = AlphaVector(d[k:]) if k < n else None
    except ValueError as exc:
        raise ValueError(f"layer {k}: region factor is not a SIM-body ({exc})") from exc
    return RegionFactorization(k, low, high, _sim_volume(low) * _sim_volume(high))


def no_sale_volume(p) -> Fraction:
    prices = _as_prices(p)
    return _sim_volume(AlphaVector(_diffs(prices, len(prices))))


def revenue(p) -> Fraction:
    prices = _as_prices(p)
    n = len(prices)
    return sum(
        (prices[k - 1] * math.comb(n, k) * region_volume(prices, k).volume for k in range(1, n + 1)),
        Fraction(0),
    )


@dataclass(frozen=True)
class PartitionReport:
    residual: Fraction
    d_empty_residual: Fraction


def partition_check(p) -> PartitionReport:
    prices = _as_prices(p)
    n = len(prices)
    empty = no_sale_volume(prices)
    covered = empty + sum(
        (math.comb(n, k) * region_volume(prices, k).volume for k in range(1, n + 1)), Fraction(0)
    )
    return PartitionReport(1 - covered, empty - Fraction(1, n + 1))


def layer_residual(prices: Sequence[Fraction], k: int) -> Fraction:
    n = len(prices)
    return 1 - Fraction(k, n + 1) - _sim_volume(AlphaVector(_diffs(prices, k)))


@dataclass(frozen=True)
class LayerCondition:
    k: int
    sold: bool
    left_tight: bool
    right_tight: bool
    condition: int | None
    satisfied: bool


@dataclass
class AuditReport:
    n: int
    residuals: tuple[Fraction, ...]
    layers: tuple[LayerCondition, ...]
    degenerate: bool
    partition_residual: Fraction
    d_empty_residual: Fraction
    tol: Fraction

    @property
    def passed(self) -> bool:
        return all(c.satisfied for c in self.layers)


def criticality_audit(p, tol=DEFAULT_AUDIT_TOL) -> AuditReport:
    """Residuals of the layer equations and the necessary critical-point conditions.

    Per layer: not tight and sold needs |r_k| <= tol; not tight and unsold
    needs r_k > 0; just left tight needs r_k >= -tol; just right tight and
    sold needs r_k <= tol; otherwise there is no condition.
    """
    prices = _as_prices(p)
    tol = to_rational(tol)
    n = len(prices)
    tight = symmetric_tightness(prices)
    residuals, layers = [], []
    for k in range(1, n + 1):
        r = layer_residual(prices, k)
        residuals.append(r)
        sold = region_volume(prices, k).volume > 0
        left = "left" in tight.get(k, ())
        right = "right" in tight.get(k, ())
        if not left and not right:
            cond, ok = (1, abs(r) <= tol) if sold else (2, r > 0)
        elif left and not right:
            cond, ok = 3, r >= -tol
        elif right and not left and sold:
            cond, ok = 4, r <= tol
        else:
            cond, ok = None, True
        layers.append(LayerCondition(k, sold, left, right, cond, ok))
    part = partition_check(prices)
    return AuditReport(
        n=n,
        residuals=tuple(residuals),
        layers=tuple(layers),
        degenerate=bool(tight),
        partition_residual=part.residual,
        d_empty_residual=part.d_empty_residual,
        tol=tol,
    )
