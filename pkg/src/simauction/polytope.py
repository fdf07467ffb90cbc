"""SIM-bodies: H- and V-descriptions and combinatorial checks.

A SIM-body with weakly descending parameters a_1 >= ... >= a_n >= 0 is

    { x >= 0 : sum_{i in I} x_i <= a_1 + ... + a_|I|  for all nonempty I }.

Everything here works on exact rationals.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .poly import to_rational

Point = tuple[Fraction, ...]


class DeskLimitError(ValueError):
    """An input exceeds the configured enumeration limit."""


@dataclass(frozen=True)
class AlphaVector:
    alphas: tuple[Fraction, ...]

    def __init__(self, alphas: Iterable):
        vals = tuple(to_rational(a) for a in alphas)
        if not vals:
            raise ValueError("an AlphaVector needs at least one entry")
        if vals[-1] < 0:
            raise ValueError(f"parameters must be nonnegative, got {vals}")
        for a, b in zip(vals, vals[1:]):
            if a < b:
                raise ValueError(f"parameters must be weakly descending, got {vals}")
        object.__setattr__(self, "alphas", vals)

    @classmethod
    def parse(cls, text: str) -> "AlphaVector":
        """Parse ``"4,3,1"`` or ``"3/2,1,1/2"``."""
        return cls(t for t in text.split(",") if t.strip())

    @property
    def n(self) -> int:
        return len(self.alphas)

    @property
    def betas(self) -> tuple[Fraction, ...]:
        a = self.alphas + (Fraction(0),)
        return tuple(a[k] - a[k + 1] for k in range(self.n))

    @property
    def proper(self) -> bool:
        return self.alphas[-1] > 0 and all(a > b for a, b in zip(self.alphas, self.alphas[1:]))

    def __len__(self) -> int:
        return self.n

    def __iter__(self):
        return iter(self.alphas)

    def __str__(self) -> str:
        return ",".join(str(a) for a in self.alphas)


def regular(n: int) -> AlphaVector:
    """The regular SIM-body parameters (n, n-1, ..., 1)."""
    return AlphaVector(range(n, 0, -1))


@dataclass(frozen=True)
class HRep:
    """Inequalities ``<row, x> <= rhs``."""

    rows: tuple[tuple[int, ...], ...]
    rhs: tuple[Fraction, ...]

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(zip(self.rows, self.rhs))

    def contains(self, x: Sequence) -> bool:
        return all(sum(r * v for r, v in zip(row, x)) <= b for row, b in self)

    def tight(self, x: Sequence) -> frozenset[int]:
        """Indices of the rows that hold with equality at ``x``."""
        return frozenset(
            i for i, (row, b) in enumerate(self) if sum(r * v for r, v in zip(row, x)) == b
        )

    def to_json(self) -> dict:
        return {
            "inequalities": [
                {"row": list(row), "rhs": str(b)} for row, b in self
            ]
        }


def h_description(a: AlphaVector) -> HRep:
    """One subset row per nonempty I (ordered by size, then lex) plus n nonnegativity rows."""
    n = a.n
    prefix = [Fraction(0)]
    for v in a.alphas:
        prefix.append(prefix[-1] + v)
    rows, rhs = [], []
    for k in range(1, n + 1):
        for subset in itertools.combinations(range(n), k):
            rows.append(tuple(1 if i in subset else 0 for i in range(n)))
            rhs.append(prefix[k])
    for i in range(n):
        rows.append(tuple(-1 if j == i else 0 for j in range(n)))
        rhs.append(Fraction(0))
    return HRep(tuple(rows), tuple(rhs))


def vertices(a: AlphaVector) -> list[Point]:
    """All coordinate permutations of (a_1, ..., a_k, 0, ..., 0), deduplicated and sorted."""
    n = a.n
    zero = Fraction(0)
    seen: set[Point] = set()
    for k in range(n + 1):
        head = a.alphas[:k]
        for positions in itertools.permutations(range(n), k):
            v = [zero] * n
            for value, pos in zip(head, positions):
                v[pos] = value
            seen.add(tuple(v))
    return sorted(seen)


def rank(rows: Sequence[Sequence]) -> int:
    """Exact rank by fraction Gaussian elimination."""
    m = [[Fraction(x) for x in r] for r in rows]
    if not m:
        return 0
    ncols = len(m[0])
    r = 0
    for col in range(ncols):
        pivot = next((i for i in range(r, len(m)) if m[i][col] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        for i in range(len(m)):
            if i != r and m[i][col] != 0:
                f = m[i][col] / m[r][col]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        r += 1
        if r == len(m):
            break
    return r


def det(matrix: Sequence[Sequence]) -> Fraction:
    m = [[Fraction(x) for x in r] for r in matrix]
    n = len(m)
    sign = 1
    result = Fraction(1)
    for col in range(n):
        pivot = next((i for i in range(col, n) if m[i][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            sign = -sign
        result *= m[col][col]
        for i in range(col + 1, n):
            f = m[i][col] / m[col][col]
            if f:
                m[i] = [x - f * y for x, y in zip(m[i], m[col])]
    return sign * result


def _affine_dim(points: Sequence[Point]) -> int:
    if not points:
        return -1
    base = points[0]
    return rank([[x - y for x, y in zip(p, base)] for p in points[1:]])


def facets(a: AlphaVector) -> HRep:
    """Drop the rows of ``h_description`` that do not define facets.

    A row defines a facet iff its tight vertices span an (n-1)-dimensional
    affine space.  Requires a full-dimensional body, i.e. ``a_1 > 0``.
    """
    if a.alphas[0] <= 0:
        raise ValueError("facets need a full-dimensional SIM-body (a_1 > 0)")
    h = h_description(a)
    verts = vertices(a)
    keep = []
    for row, b in h:
        tight = [v for v in verts if sum(r * x for r, x in zip(row, v)) == b]
        if _affine_dim(tight) == a.n - 1:
            keep.append((row, b))
    return HRep(tuple(r for r, _ in keep), tuple(b for _, b in keep))


@dataclass(frozen=True)
class CombinatoricsReport:
    n: int
    vertex_count: int
    facet_count: int
    is_simple: bool


def expected_vertex_count(n: int) -> int:
    return sum(math.factorial(n) // math.factorial(k) for k in range(n + 1))


def expected_facet_count(n: int) -> int:
    return 2**n + n - 1


def combinatorics_report(n: int) -> CombinatoricsReport:
    """Counts for the regular SIM-body, computed from the descriptions."""
    if n < 1:
        raise ValueError("n must be at least 1")
    a = regular(n)
    verts = vertices(a)
    fac = facets(a)
    simple = all(len(fac.tight(v)) == n for v in verts)
    return CombinatoricsReport(n, len(verts), len(fac), simple)


@dataclass
class EdgeReport:
    passed: bool
    edges: int
    violations: list = field(default_factory=list)


def _is_root_direction(d: Sequence[Fraction]) -> bool:
    nz = [x for x in d if x != 0]
    return len(nz) == 2 and nz[0] == -nz[1]


def edges(a: AlphaVector) -> list[tuple[Point, Point]]:
    """Vertex pairs spanning a 1-dimensional face.

    The smallest face containing u and v is cut out by the rows tight at both;
    it is an edge iff those rows have rank n - 1.
    """
    h = h_description(a)
    verts = vertices(a)
    tight = [h.tight(v) for v in verts]
    rank_cache: dict[frozenset[int], int] = {}
    out = []
    for i, j in itertools.combinations(range(len(verts)), 2):
        common = tight[i] & tight[j]
        if len(common) < a.n - 1:
            continue
        if common not in rank_cache:
            rank_cache[common] = rank([h.rows[r] for r in sorted(common)])
        if rank_cache[common] == a.n - 1:
            out.append((verts[i], verts[j]))
    return out


def edge_directions_check(a: AlphaVector, desk_limit: int = 5) -> EdgeReport:
    """Check that every edge of the homogenized body is parallel to some e_i - e_j.

    The homogenized body lives in R^(n+1) with x_(n+1) = sum(a) - sum(x).
    """
    if a.n > desk_limit:
        raise DeskLimitError(
            f"edge enumeration for n={a.n} exceeds the desk limit {desk_limit}; "
            "raise --desk-limit to force it"
        )
    total = sum(a.alphas)
    violations = []
    found = edges(a)
    for u, v in found:
        lift_u = u + (total - sum(u),)
        lift_v = v + (total - sum(v),)
        d = tuple(y - x for x, y in zip(lift_u, lift_v))
        if not _is_root_direction(d):
            violations.append((lift_u, lift_v))
    return EdgeReport(not violations, len(found), violations)


def basis_matrix(n: int, k: int) -> list[list[int]]:
    """Block matrix [[C_k, 0], [0, -I]] with C_k lower-triangular ones."""
    A = [[0] * n for _ in range(n)]
    for i in range(k):
        for j in range(i + 1):
            A[i][j] = 1
    for i in range(k, n):
        A[i][i] = -1
    return A


def basis_rhs(a: AlphaVector, k: int) -> list[Fraction]:
    out, acc = [], Fraction(0)
    for i in range(a.n):
        if i < k:
            acc += a.alphas[i]
            out.append(acc)
        else:
            out.append(Fraction(0))
    return out


@dataclass(frozen=True)
class VertexBasis:
    k: int
    permutation: tuple[int, ...]
    matrix: tuple[tuple[int, ...], ...]
    rhs: tuple[Fraction, ...]

    @classmethod
    def build(cls, a: AlphaVector, k: int, permutation: Sequence[int] | None = None):
        n = a.n
        perm = tuple(permutation) if permutation is not None else tuple(range(n))
        if sorted(perm) != list(range(n)):
            raise ValueError(f"{perm} is not a permutation of range({n})")
        A = basis_matrix(n, k)
        # columns permuted so that A_v v = b for v = P_sigma alpha^(k)
        Av = [[A[i][perm.index(j)] for j in range(n)] for i in range(n)]
        return cls(k, perm, tuple(map(tuple, Av)), tuple(basis_rhs(a, k)))

    def vertex(self, a: AlphaVector) -> Point:
        head = list(a.alphas[: self.k]) + [Fraction(0)] * (a.n - self.k)
        v = [Fraction(0)] * a.n
        for i, pos in enumerate(self.permutation):
            v[pos] = head[i]
        return tuple(v)

    def det(self) -> Fraction:
        return det(self.matrix)


@dataclass
class DelzantReport:
    passed: bool
    determinants: list[Fraction]


def delzant_check(n: int) -> DelzantReport:
    if n < 1:
        raise ValueError("n must be at least 1")
    dets = [det(basis_matrix(n, k)) for k in range(1, n + 1)]
    return DelzantReport(all(abs(d) == 1 for d in dets), dets)
