"""Acceptance criteria, one test each.

Run under pytest for a PASS/FAIL line per criterion in the terminal summary,
or directly with ``python tests/test_acceptance.py``.
"""

import math
import random
import sys
import time
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conftest import golden_prices, golden_revenues, schedule  # noqa: E402
from simauction import sja  # noqa: E402
from simauction.poly import is_lorentzian  # noqa: E402
from simauction.polytope import (  # noqa: E402
    AlphaVector,
    combinatorics_report,
    delzant_check,
    edge_directions_check,
    expected_facet_count,
    expected_vertex_count,
    regular,
)
from simauction.volume import (  # noqa: E402
    beta_volume_poly,
    price_polynomial,
    volume,
    volume_poly_dragon,
    volume_poly_lawrence,
)

HALF_THOUSANDTH = Fraction(5, 10**4)
BILLIONTH = Fraction(1, 10**9)
RESULTS: dict[str, tuple[bool, str]] = {}


def criterion_volume_anchor():
    t0 = time.perf_counter()
    vals = {m: volume(AlphaVector([4, 3, 1]), m) for m in ("dragon", "lawrence", "oracle")}
    dt = time.perf_counter() - t0
    ok = all(v == Fraction(157, 3) for v in vals.values()) and dt < 1
    return ok, f"{sorted({str(v) for v in vals.values()})} in {dt:.2f}s"


def criterion_dragon_lawrence():
    t0 = time.perf_counter()
    bad = [n for n in range(1, 6) if volume_poly_dragon(n) != volume_poly_lawrence(n)]
    dt = time.perf_counter() - t0
    return not bad and dt < 60, f"mismatches {bad} in {dt:.1f}s"


def criterion_table1():
    t0 = time.perf_counter()
    printed = golden_prices()
    worst, issues = Fraction(0), []
    expected_unsold = {1: (), 2: (), 3: (), 4: (), 5: (4,), 6: (5,), 7: (6,), 8: (6, 7)}
    for n in range(1, 9):
        s = schedule(n)
        if s.unsold_layers != expected_unsold[n]:
            issues.append(f"n={n} unsold {s.unsold_layers}")
        for k, cell in enumerate(printed[n], start=1):
            want = s.prices[k] if cell == "--" else Fraction(cell)
            worst = max(worst, abs(s.prices[k - 1] - want))
    dt = time.perf_counter() - t0
    ok = not issues and worst <= HALF_THOUSANDTH and dt < 600
    return ok, f"max deviation {float(worst):.1e}, {issues or 'gap pattern exact'}, {dt:.1f}s"


def criterion_table2():
    printed = golden_revenues()
    devs = {n: abs(sja.revenue(schedule(n)) - printed[n]) for n in range(1, 9)}
    worst = max(devs, key=devs.get)
    ok = all(d <= HALF_THOUSANDTH for d in devs.values())
    return ok, f"max deviation {float(devs[worst]):.1e} at n={worst}"


def criterion_exact_anchors():
    ok = all(
        schedule(n).prices[0] == Fraction(n, n + 1)
        and sja.criticality_audit(schedule(n)).residuals[0] == 0
        for n in range(1, 9)
    )
    return ok, "p1 = n/(n+1) and r1 = 0 for n = 1..8"


def criterion_partition():
    worst = Fraction(0)
    for n in range(1, 9):
        rep = sja.partition_check(schedule(n))
        worst = max(worst, abs(rep.residual), abs(rep.d_empty_residual))
    return worst < BILLIONTH, f"max residual {float(worst):.1e}"


def criterion_audit():
    issues, worst = [], Fraction(0)
    for n in range(1, 9):
        a = sja.criticality_audit(schedule(n))
        for c, r in zip(a.layers, a.residuals):
            if c.sold:
                worst = max(worst, abs(r))
                if abs(r) >= BILLIONTH:
                    issues.append(f"n={n} r{c.k}")
            elif r <= 0:
                issues.append(f"n={n} r{c.k} unsold but {float(r):.1e}")
        if a.degenerate != (n == 8):
            issues.append(f"n={n} degenerate={a.degenerate}")
    return not issues, f"max sold residual {float(worst):.1e}, {issues or 'degenerate only at n=8'}"


def criterion_combinatorics():
    t0 = time.perf_counter()
    issues = []
    for n in range(1, 6):
        rep = combinatorics_report(n)
        if (rep.vertex_count, rep.facet_count, rep.is_simple) != (
            expected_vertex_count(n),
            expected_facet_count(n),
            True,
        ):
            issues.append(f"n={n} counts")
        if not edge_directions_check(regular(n)).passed:
            issues.append(f"n={n} edges")
        if not delzant_check(n).passed:
            issues.append(f"n={n} dets")
    dt = time.perf_counter() - t0
    return not issues and dt < 120, f"{issues or 'all invariants hold'} in {dt:.1f}s"


def criterion_lorentzian():
    issues = []
    for n in range(1, 5):
        lam = beta_volume_poly(n)
        if not all(c > 0 for _, c in lam.items()) or not is_lorentzian(lam).passed:
            issues.append(n)
    printed = [1, 6, 9, 12, 36, 18, 5, 18, 18, 6]
    got = [c for _, c in beta_volume_poly(3).items()]
    if got != printed:
        issues.append("n=3 coefficients")
    return not issues, f"failures {issues}"


def criterion_price_polynomials():
    half, sixth = Fraction(1, 2), Fraction(1, 6)
    printed = {
        1: {(1,): 1},
        2: {(2, 0): -1, (1, 1): 2, (0, 2): -half},
        3: {
            (3, 0, 0): half,
            (2, 0, 1): -3 * half,
            (1, 2, 0): -3,
            (1, 1, 1): 6,
            (1, 0, 2): -3 * half,
            (0, 3, 0): 1,
            (0, 2, 1): -3 * half,
            (0, 0, 3): sixth,
        },
    }
    bad = [k for k in (1, 2, 3) if price_polynomial(k).terms != printed[k]]
    return not bad, f"mismatching k {bad}"


def criterion_allocation():
    rng = random.Random(2024)
    mismatches = 0
    for _ in range(1000):
        n = rng.randint(1, 6)
        s = schedule(n).to_general()
        x = [Fraction(rng.randrange(10**6 + 1), 10**6) for _ in range(n)]
        best = max(
            s.prices,
            key=lambda b: (sum((x[i - 1] for i in b), Fraction(0)) - s.prices[b], len(b),
                           tuple(-i for i in sorted(b))),
        )
        if sja.allocate(s, x).bundle != tuple(sorted(best)):
            mismatches += 1
    fig2 = sja.GeneralPriceSchedule.from_mapping(2, {"1": "2/3", "2": "1/2", "1,2": "5/6"})
    grid_bad = 0
    for i in range(100):
        for j in range(100):
            x1, x2 = Fraction(2 * i + 1, 200), Fraction(2 * j + 1, 200)
            if x1 <= Fraction(2, 3) and x2 <= Fraction(1, 2) and x1 + x2 <= Fraction(5, 6):
                want = ()
            elif x1 >= Fraction(2, 3) and x2 <= Fraction(1, 6):
                want = (1,)
            elif x2 >= Fraction(1, 2) and x1 <= Fraction(1, 3):
                want = (2,)
            else:
                want = (1, 2)
            grid_bad += sja.allocate(fig2, (x1, x2)).bundle != want
    return mismatches == 0 and grid_bad == 0, f"{mismatches} argmax mismatches, {grid_bad} grid mismatches"


CRITERIA = [
    ("1 volume anchor 157/3", criterion_volume_anchor),
    ("2 dragon == lawrence, n <= 5", criterion_dragon_lawrence),
    ("3 price table, n <= 8", criterion_table1),
    ("4 revenue table, n <= 8", criterion_table2),
    ("5 exact anchors", criterion_exact_anchors),
    ("6 partition of unity", criterion_partition),
    ("7 criticality audit", criterion_audit),
    ("8 combinatorics suite", criterion_combinatorics),
    ("9 Lorentzian suite", criterion_lorentzian),
    ("10 price polynomials", criterion_price_polynomials),
    ("11 allocation oracle", criterion_allocation),
]


def evaluate(name, fn):
    try:
        ok, detail = fn()
    except Exception as exc:  # a crash is a failed criterion, reported like one
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    RESULTS[name] = (ok, detail)
    return ok, detail


@pytest.mark.parametrize("name,fn", CRITERIA, ids=[c[0].split()[0] for c in CRITERIA])
def test_criterion(name, fn):
    ok, detail = evaluate(name, fn)
    assert ok, detail


def summary_lines():
    return [
        f"{'PASS' if ok else 'FAIL'}  criterion {name}: {detail}" for name, (ok, detail) in RESULTS.items()
    ]


if __name__ == "__main__":
    for name, fn in CRITERIA:
        evaluate(name, fn)
        print(summary_lines()[-1], flush=True)
    sys.exit(0 if all(ok for ok, _ in RESULTS.values()) else 1)
