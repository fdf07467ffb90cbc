import itertools
import math
import random
from collections import Counter
from fractions import Fraction

import pytest

from simauction.poly import MultiPoly
from simauction.polytope import AlphaVector, DeskLimitError
from simauction.volume import (
    beta_volume_poly,
    closed_form_oracle,
    degree_vectors,
    hall_graph_count,
    lawrence_sum_direct,
    layer_polynomial,
    normalized_volume,
    price_polynomial,
    volume,
    volume_poly_dragon,
    volume_poly_lawrence,
)


def mono(n, **powers):
    exp = [0] * n
    for name, e in powers.items():
        exp[int(name[1:]) - 1] = e
    return tuple(exp)


def all_graph_counts(n):
    """Sorted-degree histogram of every bipartite graph on [n] x [n] with a perfect matching."""
    counts = Counter()
    cells = [(i, j) for i in range(n) for j in range(n)]
    for mask in range(1 << len(cells)):
        edges = {cells[b] for b in range(len(cells)) if mask >> b & 1}
        if any(all((i, s[i]) in edges for i in range(n)) for s in itertools.permutations(range(n))):
            deg = tuple(sorted(sum((i, j) in edges for j in range(n)) for i in range(n)))
            counts[deg] += 1
    return counts


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_hall_counts_against_full_graph_enumeration(n):
    expected = all_graph_counts(n)
    for d in degree_vectors(n):
        assert hall_graph_count(d, n) == expected.get(d, 0)
        assert hall_graph_count(d, n, method="enumerate") == expected.get(d, 0)


def test_hall_anchors():
    assert hall_graph_count((1, 1, 1), 3) == 6
    assert hall_graph_count((1, 1, 2), 3) == 36
    assert hall_graph_count((2, 2, 2), 3) == 24
    assert hall_graph_count((1, 1), 2) == 2


def test_hall_desk_limit():
    with pytest.raises(DeskLimitError):
        hall_graph_count((1,) * 7, 7)


def test_two_dimensional_polynomial():
    v = volume_poly_lawrence(2)
    assert v.terms == {(2, 0): 1, (1, 1): 2, (0, 2): -1}
    assert volume_poly_dragon(2) == v


def test_three_dimensional_polynomial():
    expected = {
        mono(3, a1=3): 1,
        mono(3, a1=2, a2=1): 3,
        mono(3, a1=2, a3=1): 3,
        mono(3, a1=1, a2=2): 3,
        mono(3, a1=1, a2=1, a3=1): 6,
        mono(3, a1=1, a3=2): -6,
        mono(3, a2=3): -2,
        mono(3, a2=2, a3=1): -6,
        mono(3, a2=1, a3=2): 3,
        mono(3, a3=3): 1,
    }
    assert volume_poly_lawrence(3).terms == expected
    assert volume_poly_dragon(3).terms == expected


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_dragon_equals_lawrence(n):
    law = volume_poly_lawrence(n)
    assert law == volume_poly_dragon(n)
    assert law.is_homogeneous() and law.total_degree() == n
    assert all(isinstance(c, int) for _, c in law.items())


@pytest.mark.parametrize("method", ["lawrence", "lawrence-direct", "dragon", "oracle"])
def test_anchor_157_over_3(method):
    assert volume(AlphaVector([4, 3, 1]), method) == Fraction(157, 3)


def test_two_one():
    assert volume([2, 1]) == Fraction(7, 2)
    assert closed_form_oracle(2, [2, 1]) == Fraction(7, 2)


def test_random_inputs_against_closed_forms():
    rng = random.Random(11)
    for _ in range(100):
        k = rng.choice([2, 3])
        vals = sorted((Fraction(rng.randrange(0, 60), rng.randrange(1, 9)) for _ in range(k)), reverse=True)
        assert volume(vals) == closed_form_oracle(k, vals)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
def test_degenerate_anchors(n):
    assert volume([1] * n) == 1
    assert volume([1] + [0] * (n - 1)) == Fraction(1, math.factorial(n))


def test_dp_against_direct_terms():
    rng = random.Random(5)
    for n in range(1, 6):
        for _ in range(5):
            vals = sorted((Fraction(rng.randrange(1, 30), rng.randrange(1, 5)) for _ in range(n)), reverse=True)
            assert normalized_volume(vals) == lawrence_sum_direct(vals)


def test_numeric_matches_symbolic_evaluation():
    rng = random.Random(8)
    for n in (4, 6):
        v = volume_poly_lawrence(n)
        for _ in range(3):
            vals = sorted((Fraction(rng.randrange(0, 40), 7) for _ in range(n)), reverse=True)
            assert normalized_volume(vals) == v.evaluate(vals)


def test_monotone_in_first_parameter():
    base = [Fraction(3), Fraction(2), Fraction(1), Fraction(1, 2)]
    prev = volume(base)
    for step in range(1, 6):
        cur = volume([base[0] + Fraction(step, 3)] + base[1:])
        assert cur > prev
        prev = cur


def test_price_polynomials():
    p1, p2 = MultiPoly.var(2, 0), MultiPoly.var(2, 1)
    assert price_polynomial(1) == MultiPoly.var(1, 0)
    assert price_polynomial(2) == -p1 * p1 + 2 * p1 * p2 - p2 * p2 * Fraction(1, 2)
    x = [MultiPoly.var(3, i) for i in range(3)]
    h = Fraction(1, 2)
    expected = (
        h * x[0] ** 3
        - 3 * h * x[0] ** 2 * x[2]
        - 3 * x[0] * x[1] ** 2
        + 6 * x[0] * x[1] * x[2]
        - 3 * h * x[0] * x[2] ** 2
        + x[1] ** 3
        - 3 * h * x[1] ** 2 * x[2]
        + Fraction(1, 6) * x[2] ** 3
    )
    assert price_polynomial(3) == expected


def test_beta_polynomial_n3():
    lam = beta_volume_poly(3)
    expected = {
        mono(3, a1=3): 1,
        mono(3, a1=2, a2=1): 6,
        mono(3, a1=2, a3=1): 9,
        mono(3, a1=1, a2=2): 12,
        mono(3, a1=1, a2=1, a3=1): 36,
        mono(3, a1=1, a3=2): 18,
        mono(3, a2=3): 5,
        mono(3, a2=2, a3=1): 18,
        mono(3, a2=1, a3=2): 18,
        mono(3, a3=3): 6,
    }
    assert lam.terms == expected


def test_beta_polynomial_n2():
    lam = beta_volume_poly(2)
    assert lam.is_homogeneous() and lam.total_degree() == 2
    assert all(c > 0 for _, c in lam.items())


@pytest.mark.parametrize("k", [2, 3, 4, 5])
def test_layer_polynomial_methods_agree(k):
    prefix = [Fraction(4, 5), Fraction(1, 2), Fraction(1, 4)][: k - 1]
    assert layer_polynomial(prefix, k, "dp") == layer_polynomial(prefix, k, "symbolic")


def test_layer_polynomial_anchor():
    w = layer_polynomial([Fraction(2, 3)], 2)
    # vol_2(2/3, y) for the shifted unknown y = x - 2/3
    shifted = w.shift(Fraction(-2, 3))
    assert shifted.coeffs == (Fraction(-4, 9), Fraction(4, 3), Fraction(-1, 2))
