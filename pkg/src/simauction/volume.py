"""Volume polynomials of SIM-bodies.

Two general routes produce the normalized volume ``n! * vol_n`` as an
integer polynomial in a_1..a_n:

* the dragon-marriage sum over weakly ascending degree vectors, weighted by
  Hall-graph counts and the alternating binomial forms ``omega_k``;
* Lawrence's vertex sum with the generic objective c = (1, 2, ..., n).

The Lawrence sum is evaluated by a dynamic program over (used labels, last
label) states, which handles symbolic, univariate and plain numeric inputs
with the same code.  ``lawrence_terms`` lists the individual vertex terms and
serves as an independent check of the DP.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence

from .poly import MultiPoly, PolyError, UniPoly, to_rational
from .polytope import AlphaVector, DeskLimitError

DRAGON_LIMIT = 6
LAWRENCE_SYMBOLIC_LIMIT = 8
LAWRENCE_NUMERIC_LIMIT = 12


def _check_limit(n: int, limit: int, what: str) -> None:
    if n < 1:
        raise ValueError("n must be at least 1")
    if n > limit:
        raise DeskLimitError(f"{what} for n={n} exceeds the desk limit {limit}")


# Degree vectors and Hall counts


def degree_vectors(n: int) -> Iterator[tuple[int, ...]]:
    """Weakly ascending vectors of length n with entries in 1..n."""
    return itertools.combinations_with_replacement(range(1, n + 1), n)


def _validate_degrees(d: Sequence[int], n: int) -> tuple[int, ...]:
    d = tuple(d)
    if len(d) != n or any(not 1 <= x <= n for x in d):
        raise ValueError(f"{d} is not a degree vector over {n} right nodes")
    return d


def has_perfect_matching(neighbors: Sequence[int], n: int) -> bool:
    """Augmenting-path matching; ``neighbors[i]`` is a bitmask over right nodes."""
    match_right = [-1] * n

    def augment(u: int, seen: list[bool]) -> bool:
        nb = neighbors[u]
        for r in range(n):
            if nb >> r & 1 and not seen[r]:
                seen[r] = True
                if match_right[r] < 0 or augment(match_right[r], seen):
                    match_right[r] = u
                    return True
        return False

    return all(augment(u, [False] * n) for u in range(len(neighbors)))


def _subsets_of_size(n: int, k: int) -> list[int]:
    return [sum(1 << i for i in c) for c in itertools.combinations(range(n), k)]


def ordered_hall_count_bruteforce(d: Sequence[int], n: int) -> int:
    """Graphs whose left node i has exactly d[i] neighbors and which have a perfect matching."""
    choices = [_subsets_of_size(n, di) for di in d]
    return sum(1 for nbs in itertools.product(*choices) if has_perfect_matching(nbs, n))


def ordered_hall_count(d: Sequence[int], n: int) -> int:
    """Same count as the brute force, via transversal-family states.

    The state after placing some left nodes is the family of right-node sets
    they can be perfectly matched onto; a graph is counted if the family is
    nonempty after the last node.
    """
    states: dict[frozenset[int], int] = {frozenset([0]): 1}
    for di in d:
        nxt: dict[frozenset[int], int] = defaultdict(int)
        subsets = _subsets_of_size(n, di)
        for fam, cnt in states.items():
            for nb in subsets:
                new = frozenset(
                    s | (1 << r) for s in fam for r in range(n) if nb >> r & 1 and not s >> r & 1
                )
                if new:
                    nxt[new] += cnt
        states = nxt
    return sum(states.values())


def arrangements(d: Sequence[int]) -> int:
    """Number of distinct orderings of the multiset ``d``."""
    out = math.factorial(len(d))
    for m in Counter(d).values():
        out //= math.factorial(m)
    return out


@lru_cache(maxsize=None)
def _hall_count(d: tuple[int, ...], n: int, method: str) -> int:
    if method == "enumerate":
        ordered = ordered_hall_count_bruteforce(d, n)
    elif method == "dp":
        ordered = ordered_hall_count(d, n)
    else:
        raise ValueError(f"unknown Hall counting method {method!r}")
    return arrangements(d) * ordered


def hall_graph_count(
    d: Sequence[int], n: int, method: str = "dp", desk_limit: int = DRAGON_LIMIT
) -> int:
    """M_d: labeled bipartite graphs with sorted left degree vector d having a perfect matching.

    Every left-degree ordering that sorts to ``d`` is counted, which is what
    makes the dragon sum run over sorted vectors only.
    """
    _check_limit(n, desk_limit, "Hall graph enumeration")
    d = _validate_degrees(d, n)
    if list(d) != sorted(d):
        raise ValueError(f"degree vector {d} must be weakly ascending")
    return _hall_count(d, n, method)


# Dragon-marriage formula


def omega_forms(n: int) -> list[MultiPoly]:
    """omega_k = sum_{i<k} (-1)^(i+k-1) C(k-1, i) a_(n-i), for k = 1..n."""
    forms = []
    for k in range(1, n + 1):
        coeffs = [0] * n
        for i in range(k):
            coeffs[n - 1 - i] += (-1) ** (i + k - 1) * math.comb(k - 1, i)
        forms.append(MultiPoly.linear(coeffs))
    return forms


@lru_cache(maxsize=None)
def _dragon(n: int, method: str) -> MultiPoly:
    omegas = omega_forms(n)
    powers: dict[tuple[int, int], MultiPoly] = {}

    def power(k: int, m: int) -> MultiPoly:
        if (k, m) not in powers:
            powers[(k, m)] = omegas[k - 1] ** m
        return powers[(k, m)]

    total = MultiPoly.zero(n)
    for d in degree_vectors(n):
        m = _hall_count(d, n, method)
        if not m:
            continue
        term = MultiPoly.constant(n, m)
        for k, mult in sorted(Counter(d).items()):
            term = term * power(k, mult)
        total = total + term
    return total


def volume_poly_dragon(n: int, desk_limit: int = DRAGON_LIMIT, method: str = "dp") -> MultiPoly:
    """n! * vol_n as a polynomial in a_1..a_n via Hall-graph counts."""
    _check_limit(n, desk_limit, "dragon volume polynomial")
    return _dragon(n, method)


# Lawrence's formula


@dataclass(frozen=True)
class LawrenceTerm:
    k: int
    subset: tuple[int, ...]
    sigma: tuple[int, ...]
    numerator_form: tuple[int, ...]
    denominator: int


def lawrence_terms(n: int) -> Iterator[LawrenceTerm]:
    """One term per nonzero vertex of the body, objective c = (1, ..., n).

    ``numerator_form`` holds the coefficients of <sigma(L), a^[k]>; the term
    contributes ``form**n / denominator`` to ``n! * vol``.
    """
    labels = range(1, n + 1)
    for k in range(1, n + 1):
        for subset in itertools.combinations(labels, k):
            outside = math.prod(-i for i in labels if i not in subset)
            for sigma in itertools.permutations(subset):
                den = sigma[-1] * outside
                for x, y in zip(sigma, sigma[1:]):
                    den *= x - y
                if den == 0:
                    raise ZeroDivisionError("objective is not generic")
                yield LawrenceTerm(k, subset, sigma, sigma, den)


def lawrence_sum_direct(alphas: Sequence) -> Fraction:
    """n! * vol evaluated term by term; slow, used as a cross-check."""
    n = len(alphas)
    vals = [to_rational(a) for a in alphas]
    total = Fraction(0)
    for t in lawrence_terms(n):
        lin = sum(c * v for c, v in zip(t.numerator_form, vals))
        total += Fraction(lin**n, t.denominator)
    return total


def _lawrence_dp(vals: Sequence):
    """Return ``(S, D)`` with ``S / D = n! * vol`` at the point ``vals``.

    ``vals`` may hold ints or integer-coefficient polynomials.  Label sequences
    (s_1, ..., s_m) are grown one position at a time; the remaining weight of
    a prefix depends only on its label set and last label.  All weights are
    scaled by powers of lcm(1..n) so the recursion stays in the integers.
    """
    n = len(vals)
    L = math.lcm(*range(1, n + 1))
    binom = [[math.comb(r, a) for a in range(r + 1)] for r in range(n + 1)]

    def powers(value) -> list[list]:
        # pw[t][a] = (t * value)^a, with pw[t] == [1] when value is zero
        if not value:
            return [[1] for _ in range(n + 1)]
        out = [[1]]
        for t in range(1, n + 1):
            row = [1]
            base = t * value
            for _ in range(n):
                row.append(row[-1] * base)
            out.append(row)
        return out

    level: dict[tuple[int, int], list] = {}
    for j in range(n, 0, -1):
        pw = powers(vals[j]) if j < n else None
        nxt: dict[tuple[int, int], list] = {}
        for subset in itertools.combinations(range(1, n + 1), j):
            mask = sum(1 << (i - 1) for i in subset)
            outside = [i for i in range(1, n + 1) if i not in subset]
            outside_w = math.prod(-(L // i) for i in outside)
            for last in subset:
                g = [0] * (n + 1)
                g[0] = (L // last) * outside_w
                for t in outside:
                    child = level[(mask | 1 << (t - 1), t)]
                    w = L // (last - t)
                    row = pw[t]
                    for r in range(n + 1):
                        acc = 0
                        for a in range(min(r, len(row) - 1) + 1):
                            c = child[r - a]
                            if not c:
                                continue
                            acc = acc + (c if a == 0 else binom[r][a] * row[a] * c)
                        if acc:
                            g[r] = g[r] + w * acc
                nxt[(mask, last)] = g
        level = nxt
    pw = powers(vals[0])
    total = 0
    for t in range(1, n + 1):
        child = level[(1 << (t - 1), t)]
        row = pw[t]
        for a in range(min(n, len(row) - 1) + 1):
            c = child[n - a]
            if c:
                total = total + binom[n][a] * row[a] * c
    return total, L**n


def _common_denominator(vals: Sequence[Fraction]) -> int:
    return math.lcm(*(v.denominator for v in vals)) if vals else 1


def normalized_volume(alphas: Sequence, desk_limit: int = LAWRENCE_NUMERIC_LIMIT) -> Fraction:
    """n! * vol_n at a rational point, via the Lawrence DP on integers."""
    vals = [to_rational(a) for a in alphas]
    n = len(vals)
    if n == 0:
        return Fraction(1)
    _check_limit(n, desk_limit, "Lawrence numeric evaluation")
    q = _common_denominator(vals)
    ints = [int(v * q) for v in vals]
    s, scale = _lawrence_dp(ints)
    return Fraction(s, scale * q**n)


@lru_cache(maxsize=None)
def _lawrence_symbolic(n: int) -> MultiPoly:
    s, scale = _lawrence_dp([MultiPoly.var(n, i) for i in range(n)])
    return s.scale(Fraction(1, scale))


def volume_poly_lawrence(n: int, desk_limit: int = LAWRENCE_SYMBOLIC_LIMIT) -> MultiPoly:
    """n! * vol_n as a polynomial in a_1..a_n via Lawrence's vertex sum."""
    _check_limit(n, desk_limit, "Lawrence symbolic expansion")
    return _lawrence_symbolic(n)


def volume_poly(n: int, method: str = "lawrence", desk_limit: int | None = None) -> MultiPoly:
    if method == "lawrence":
        return volume_poly_lawrence(n, desk_limit or LAWRENCE_SYMBOLIC_LIMIT)
    if method == "dragon":
        return volume_poly_dragon(n, desk_limit or DRAGON_LIMIT)
    raise ValueError(f"unknown method {method!r}")


# Closed forms for small dimension


def closed_form_oracle(k: int, alphas: Sequence) -> Fraction:
    """vol_k for k <= 3 from the integrated closed forms."""
    vals = [to_rational(a) for a in alphas]
    if len(vals) != k:
        raise ValueError(f"expected {k} parameters, got {len(vals)}")
    if k == 1:
        return vals[0]
    if k == 2:
        a, b = vals
        return a * a / 2 + a * b - b * b / 2
    if k == 3:
        a, b, c = vals
        return (
            c**3
            + 3 * c**2 * (b - 2 * a)
            - 3 * c * (2 * b**2 - 2 * b * a - a**2)
            - 2 * b**3
            + 3 * b**2 * a
            + 3 * b * a**2
            + a**3
        ) / 6
    raise ValueError("closed forms are only available for k <= 3")


def volume(alpha: AlphaVector | Sequence, method: str = "lawrence") -> Fraction:
    """Exact vol_n of a SIM-body."""
    a = alpha if isinstance(alpha, AlphaVector) else AlphaVector(alpha)
    n = a.n
    if method == "lawrence":
        return normalized_volume(a.alphas) / math.factorial(n)
    if method == "lawrence-direct":
        return lawrence_sum_direct(a.alphas) / math.factorial(n)
    if method == "dragon":
        return volume_poly_dragon(n).evaluate(a.alphas) / math.factorial(n)
    if method == "oracle":
        return closed_form_oracle(n, a.alphas)
    raise ValueError(f"unknown method {method!r}")


# Substituted polynomials


def difference_forms(k: int) -> list[MultiPoly]:
    """a_1 -> p_1 and a_j -> p_j - p_(j-1)."""
    forms = []
    for j in range(k):
        coeffs = [0] * k
        coeffs[j] = 1
        if j:
            coeffs[j - 1] = -1
        forms.append(MultiPoly.linear(coeffs))
    return forms


@lru_cache(maxsize=None)
def price_polynomial(k: int, method: str = "lawrence") -> MultiPoly:
    """vol_k of the body with parameters (p_1, p_2 - p_1, ..., p_k - p_(k-1))."""
    v = volume_poly(k, method).scale(Fraction(1, math.factorial(k)))
    return v.substitute_linear(difference_forms(k))


def suffix_forms(n: int) -> list[MultiPoly]:
    """a_k -> b_k + b_(k+1) + ... + b_n."""
    return [MultiPoly.linear([1 if j >= k else 0 for j in range(n)]) for k in range(n)]


def beta_volume_poly(n: int, method: str = "lawrence") -> MultiPoly:
    """Normalized volume after a_k = b_k + ... + b_n; all coefficients must be positive."""
    lam = volume_poly(n, method).substitute_linear(suffix_forms(n))
    bad = [(e, c) for e, c in lam.items() if c <= 0]
    if bad:
        raise PolyError(f"non-positive coefficient {bad[0][1]} at {bad[0][0]} in the beta polynomial")
    return lam


def layer_polynomial(prefix: Sequence, k: int, method: str = "dp") -> UniPoly:
    """w(y) = vol_k of (prefix..., y, 0, ..., 0) as an exact univariate polynomial.

    ``method="symbolic"`` restricts the cached symbolic polynomial; ``"dp"``
    runs the Lawrence recursion with one univariate slot and works up to the
    numeric desk limit.
    """
    vals = [to_rational(v) for v in prefix]
    m = len(vals)
    if m >= k:
        raise ValueError("prefix must leave the free slot inside the k coordinates")
    if method == "symbolic":
        v = volume_poly_lawrence(k)
        fixed = [(i, vals[i]) for i in range(m)] + [(i, 0) for i in range(m + 1, k)]
        w = v.restrict_univariate(fixed, m)
        return w * Fraction(1, math.factorial(k))
    if method != "dp":
        raise ValueError(f"unknown method {method!r}")
    _check_limit(k, LAWRENCE_NUMERIC_LIMIT, "Lawrence univariate evaluation")
    q = _common_denominator(vals)
    ring = [int(v * q) for v in vals] + [MultiPoly.var(1, 0).scale(q)] + [0] * (k - m - 1)
    s, scale = _lawrence_dp(ring)
    if not isinstance(s, MultiPoly):
        s = MultiPoly.constant(1, s)
    denom = scale * q**k * math.factorial(k)
    coeffs = [Fraction(0)] * (k + 1)
    for (e,), c in s.terms.items():
        coeffs[e] = Fraction(c, 1) / denom
    return UniPoly(coeffs)
