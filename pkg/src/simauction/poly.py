"""Exact-rational sparse polynomials.

``MultiPoly`` is an immutable map from exponent tuples to nonzero rational
coefficients (``int`` or ``Fraction``).  ``UniPoly`` is a dense univariate
polynomial, constant term first.  Hessian signatures are computed exactly
from the characteristic polynomial, never with a floating-point eigensolver.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping, Sequence

Exp = tuple[int, ...]


class PolyError(ValueError):
    """Raised on arity mismatches and invalid polynomial inputs."""


def _norm(c):
    """Return ``c`` as an int when it is integral, else as a Fraction."""
    if isinstance(c, int):
        return c
    c = Fraction(c)
    return c.numerator if c.denominator == 1 else c


def to_rational(value) -> Fraction:
    """Parse ints, Fractions, ``"a/b"`` and decimal strings exactly."""
    if isinstance(value, bool):
        raise PolyError("booleans are not rationals")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise PolyError(f"cannot parse rational {value!r}") from exc
    if isinstance(value, float):
        # floats are binary; go through repr to keep the decimal the user typed
        return Fraction(repr(value))
    if isinstance(value, Rational):
        return Fraction(value.numerator, value.denominator)
    raise PolyError(f"unsupported rational type {type(value).__name__}")


def grlex_key(exp: Exp):
    """Sort key for graded-lex order, leading term first."""
    return (-sum(exp), tuple(-e for e in exp))


class MultiPoly:
    """Sparse multivariate polynomial with exact coefficients."""

    __slots__ = ("num_vars", "_terms", "_hash")

    def __init__(self, num_vars: int, terms: Mapping[Exp, object] | None = None):
        if num_vars < 0:
            raise PolyError("num_vars must be nonnegative")
        self.num_vars = num_vars
        clean: dict[Exp, object] = {}
        for exp, c in (terms or {}).items():
            exp = tuple(exp)
            if len(exp) != num_vars:
                raise PolyError(f"exponent {exp} has wrong length for {num_vars} variables")
            if any(e < 0 for e in exp):
                raise PolyError(f"negative exponent in {exp}")
            c = _norm(c)
            if c:
                clean[exp] = _norm(clean.get(exp, 0) + c)
                if not clean[exp]:
                    del clean[exp]
        self._terms = clean
        self._hash = None

    # construction helpers

    @classmethod
    def _raw(cls, num_vars: int, terms: dict[Exp, object]) -> "MultiPoly":
        # trusted path: keys have the right length and values are nonzero
        obj = cls.__new__(cls)
        obj.num_vars = num_vars
        obj._terms = terms
        obj._hash = None
        return obj

    @classmethod
    def zero(cls, num_vars: int) -> "MultiPoly":
        return cls._raw(num_vars, {})

    @classmethod
    def constant(cls, num_vars: int, c) -> "MultiPoly":
        c = _norm(c)
        return cls._raw(num_vars, {(0,) * num_vars: c} if c else {})

    @classmethod
    def var(cls, num_vars: int, index: int) -> "MultiPoly":
        if not 0 <= index < num_vars:
            raise PolyError(f"variable index {index} out of range")
        exp = [0] * num_vars
        exp[index] = 1
        return cls._raw(num_vars, {tuple(exp): 1})

    @classmethod
    def linear(cls, coeffs: Sequence, constant=0) -> "MultiPoly":
        """``sum(coeffs[i] * x_i) + constant``."""
        n = len(coeffs)
        terms = {}
        for i, c in enumerate(coeffs):
            exp = [0] * n
            exp[i] = 1
            terms[tuple(exp)] = c
        terms[(0,) * n] = constant
        return cls(n, terms)

    # container protocol

    @property
    def terms(self) -> dict[Exp, object]:
        return dict(self._terms)

    def items(self):
        """Terms in graded-lex order, leading term first."""
        return sorted(self._terms.items(), key=lambda kv: grlex_key(kv[0]))

    def coeff(self, exp: Iterable[int]):
        return self._terms.get(tuple(exp), 0)

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, MultiPoly):
            return self.num_vars == other.num_vars and self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self == MultiPoly.constant(self.num_vars, other)
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.num_vars, frozenset(self._terms.items())))
        return self._hash

    def __repr__(self) -> str:
        return f"MultiPoly({self.num_vars}, {self})"

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for exp, c in self.items():
            mono = "*".join(
                f"x{i + 1}" if e == 1 else f"x{i + 1}^{e}" for i, e in enumerate(exp) if e
            )
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    # degree information

    def total_degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self._terms), default=-1)

    def is_homogeneous(self) -> bool:
        return len({sum(e) for e in self._terms}) <= 1

    def homogeneous_part(self, degree: int) -> "MultiPoly":
        return MultiPoly._raw(
            self.num_vars, {e: c for e, c in self._terms.items() if sum(e) == degree}
        )

    # arithmetic

    def _coerce(self, other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            if other.num_vars != self.num_vars:
                raise PolyError(
                    f"dimension mismatch: {self.num_vars} vs {other.num_vars} variables"
                )
            return other
        if isinstance(other, (int, Fraction)):
            return MultiPoly.constant(self.num_vars, other)
        raise TypeError(f"cannot combine MultiPoly with {type(other).__name__}")

    def __add__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        out = dict(self._terms)
        for exp, c in other._terms.items():
            s = out.get(exp, 0) + c
            if s:
                out[exp] = _norm(s)
            else:
                out.pop(exp, None)
        return MultiPoly._raw(self.num_vars, out)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly._raw(self.num_vars, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "MultiPoly":
        c = _norm(c)
        if not c:
            return MultiPoly.zero(self.num_vars)
        return MultiPoly._raw(self.num_vars, {e: _norm(v * c) for e, v in self._terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        out: dict[Exp, object] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                exp = tuple(a + b for a, b in zip(e1, e2))
                out[exp] = out.get(exp, 0) + c1 * c2
        return MultiPoly._raw(self.num_vars, {e: _norm(c) for e, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise PolyError("only nonnegative integer powers are supported")
        result = MultiPoly.constant(self.num_vars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    # calculus and evaluation

    def partial_derivative(self, var: int) -> "MultiPoly":
        if not 0 <= var < self.num_vars:
            raise PolyError(f"variable index {var} out of range")
        out = {}
        for exp, c in self._terms.items():
            e = exp[var]
            if e:
                new = exp[:var] + (e - 1,) + exp[var + 1 :]
                out[new] = _norm(c * e)
        return MultiPoly._raw(self.num_vars, out)

    def evaluate(self, point: Sequence):
        if len(point) != self.num_vars:
            raise PolyError(f"point has {len(point)} entries, expected {self.num_vars}")
        pt = [_norm(to_rational(v)) for v in point]
        total = 0
        for exp, c in self._terms.items():
            term = c
            for v, e in zip(pt, exp):
                if e:
                    term = term * v**e
            total += term
        return Fraction(total)

    def substitute_linear(self, forms: Sequence["MultiPoly"]) -> "MultiPoly":
        """Compose with ``x_i -> forms[i]``; all forms share one new variable set."""
        if len(forms) != self.num_vars:
            raise PolyError(f"need {self.num_vars} forms, got {len(forms)}")
        if not forms:
            return MultiPoly(0, self._terms)
        m = forms[0].num_vars
        for f in forms:
            if not isinstance(f, MultiPoly) or f.num_vars != m:
                raise PolyError("substitution forms must be MultiPolys over one variable set")
            if f.total_degree() > 1:
                raise PolyError("substitution forms must be linear")
        powers: dict[tuple[int, int], MultiPoly] = {}

        def power(i: int, e: int) -> MultiPoly:
            key = (i, e)
            if key not in powers:
                powers[key] = forms[i] if e == 1 else power(i, e - 1) * forms[i]
            return powers[key]

        total = MultiPoly.zero(m)
        for exp, c in self._terms.items():
            term = MultiPoly.constant(m, c)
            for i, e in enumerate(exp):
                if e:
                    term = term * power(i, e)
            total = total + term
        return total

    def restrict_univariate(self, fixed: Iterable[tuple[int, object]], free: int) -> "UniPoly":
        """Fix every variable but ``free`` and return the univariate remainder."""
        values: dict[int, Fraction] = {}
        for idx, val in fixed:
            if not 0 <= idx < self.num_vars:
                raise PolyError(f"variable index {idx} out of range")
            if idx in values:
                raise PolyError(f"variable {idx} fixed twice")
            values[idx] = to_rational(val)
        if free in values:
            raise PolyError("free variable is also fixed")
        if not 0 <= free < self.num_vars:
            raise PolyError(f"free index {free} out of range")
        if len(values) != self.num_vars - 1:
            missing = sorted(set(range(self.num_vars)) - set(values) - {free})
            raise PolyError(f"variables {missing} are neither fixed nor free")
        coeffs: dict[int, Fraction] = {}
        for exp, c in self._terms.items():
            term = Fraction(c)
            for i, e in enumerate(exp):
                if e and i != free:
                    term *= values[i] ** e
            coeffs[exp[free]] = coeffs.get(exp[free], 0) + term
        deg = max(coeffs, default=0)
        return UniPoly([coeffs.get(d, 0) for d in range(deg + 1)])

    # serialization

    def to_json(self) -> dict:
        terms = []
        for exp, c in self.items():
            c = Fraction(c)
            terms.append({"exp": list(exp), "num": str(c.numerator), "den": str(c.denominator)})
        return {"vars": self.num_vars, "terms": terms}

    @classmethod
    def from_json(cls, data: Mapping) -> "MultiPoly":
        n = int(data["vars"])
        terms = {}
        for t in data["terms"]:
            exp = tuple(int(e) for e in t["exp"])
            if exp in terms:
                raise PolyError(f"duplicate exponent {exp}")
            terms[exp] = Fraction(int(t["num"]), int(t["den"]))
        return cls(n, terms)


def poly_arith(a: MultiPoly, b, op: str) -> MultiPoly:
    """Dispatch ``add``, ``mul`` or ``scale`` (``b`` is then a rational)."""
    if op == "add":
        if not isinstance(b, MultiPoly):
            raise PolyError("add needs two polynomials")
        return a + a._coerce(b)
    if op == "mul":
        if not isinstance(b, MultiPoly):
            raise PolyError("mul needs two polynomials")
        return a * a._coerce(b)
    if op == "scale":
        return a.scale(to_rational(b))
    raise PolyError(f"unknown operation {op!r}")


class UniPoly:
    """Dense univariate polynomial, coefficients constant term first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [Fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x):
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __eq__(self, other) -> bool:
        return isinstance(other, UniPoly) and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __repr__(self) -> str:
        return f"UniPoly({[str(c) for c in self.coeffs]})"

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = UniPoly([other])
        if not isinstance(other, UniPoly):
            return NotImplemented
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0,) * (n - len(self.coeffs))
        b = other.coeffs + (0,) * (n - len(other.coeffs))
        return UniPoly(x + y for x, y in zip(a, b))

    __radd__ = __add__

    def __neg__(self):
        return UniPoly(-c for c in self.coeffs)

    def __sub__(self, other):
        return self + (-other if isinstance(other, UniPoly) else -Fraction(other))

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return UniPoly(c * other for c in self.coeffs)
        if not isinstance(other, UniPoly):
            return NotImplemented
        if not self.coeffs or not other.coeffs:
            return UniPoly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return UniPoly(out)

    __rmul__ = __mul__

    def derivative(self) -> "UniPoly":
        return UniPoly(i * c for i, c in enumerate(self.coeffs) if i)

    def shift(self, a) -> "UniPoly":
        """Return ``q`` with ``q(y) = self(y + a)``."""
        a = Fraction(a)
        out = UniPoly()
        base = UniPoly([a, 1])
        for c in reversed(self.coeffs):
            out = out * base + c
        return out


# Hessian signature and the Lorentzian test


@dataclass(frozen=True)
class SignatureTriple:
    positive: int
    negative: int
    zero: int


def hessian_matrix(q: MultiPoly) -> list[list[Fraction]]:
    n = q.num_vars
    H = [[Fraction(0)] * n for _ in range(n)]
    for exp, c in q._terms.items():
        idx = [i for i, e in enumerate(exp) for _ in range(e)]
        if len(idx) != 2:
            raise PolyError("hessian_signature needs a homogeneous quadratic form")
        i, j = idx
        if i == j:
            H[i][i] += 2 * Fraction(c)
        else:
            H[i][j] += Fraction(c)
            H[j][i] += Fraction(c)
    return H


def charpoly(M: Sequence[Sequence[Fraction]]) -> list[Fraction]:
    """Coefficients of det(t*I - M), constant term first (Faddeev-LeVerrier)."""
    n = len(M)
    coeffs = [Fraction(0)] * (n + 1)
    coeffs[n] = Fraction(1)
    Mk = [[Fraction(0)] * n for _ in range(n)]  # M_0 = 0
    for k in range(1, n + 1):
        # M_k = M @ M_{k-1} + c_{n-k+1} I
        prev = Mk
        Mk = [
            [sum(M[i][t] * prev[t][j] for t in range(n)) for j in range(n)] for i in range(n)
        ]
        for i in range(n):
            Mk[i][i] += coeffs[n - k + 1]
        trace = sum(sum(M[i][t] * Mk[t][i] for t in range(n)) for i in range(n))
        coeffs[n - k] = -trace / k
    return coeffs


def _sign_changes(seq: Iterable[Fraction]) -> int:
    signs = [1 if c > 0 else -1 for c in seq if c != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def hessian_signature(q: MultiPoly) -> SignatureTriple:
    """Exact inertia of the Hessian of a quadratic form.

    The characteristic polynomial of a real symmetric matrix has only real
    roots, so Descartes' rule of signs counts positive roots exactly.
    """
    if q and q.total_degree() != 2 or not q.is_homogeneous():
        raise PolyError("hessian_signature needs a homogeneous quadratic form")
    H = hessian_matrix(q)
    n = len(H)
    cp = charpoly(H)
    zero = next((i for i, c in enumerate(cp) if c != 0), n)
    pos = _sign_changes(cp)
    neg = _sign_changes(c if i % 2 == 0 else -c for i, c in enumerate(cp))
    return SignatureTriple(pos, neg, zero)


@dataclass(frozen=True)
class LorentzianReport:
    passed: bool
    failing_derivative: Exp | None = None
    signature: SignatureTriple | None = None
    checked: int = 0

    def __bool__(self) -> bool:
        return self.passed


def is_lorentzian(p: MultiPoly) -> LorentzianReport:
    """Check every degree-2 iterated partial derivative for exactly one positive eigenvalue.

    ``failing_derivative`` is the exponent vector of the differentiation
    multiset, e.g. ``(1, 0, 1)`` for d/dx1 d/dx3.
    """
    if not p.is_homogeneous():
        raise PolyError("Lorentzian test needs a homogeneous polynomial")
    bad = [(e, c) for e, c in p._terms.items() if c <= 0]
    if bad:
        raise PolyError(f"non-positive coefficient {bad[0][1]} at {bad[0][0]}")
    d = p.total_degree()
    if d <= 1:
        return LorentzianReport(True)
    n = p.num_vars
    checked = 0
    cache: dict[Exp, MultiPoly] = {(0,) * n: p}

    def derive(exp: Exp) -> MultiPoly:
        if exp not in cache:
            i = max(j for j, e in enumerate(exp) if e)
            parent = exp[:i] + (exp[i] - 1,) + exp[i + 1 :]
            cache[exp] = derive(parent).partial_derivative(i)
        return cache[exp]

    for combo in itertools.combinations_with_replacement(range(n), d - 2):
        exp = tuple(combo.count(i) for i in range(n))
        sig = hessian_signature(derive(exp))
        checked += 1
        if sig.positive != 1:
            return LorentzianReport(False, exp, sig, checked)
    return LorentzianReport(True, checked=checked)
