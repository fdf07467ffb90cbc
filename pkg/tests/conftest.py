import csv
import sys
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

import pytest

from simauction import sja

GOLDEN = Path(__file__).parent / "golden"


@lru_cache(maxsize=None)
def schedule(n: int) -> sja.PriceSchedule:
    return sja.solve_prices(n)


def read_golden(name: str) -> list[dict]:
    with open(GOLDEN / name, newline="") as fh:
        return list(csv.DictReader(fh))


def golden_prices() -> dict[int, list[str]]:
    out = {}
    for row in read_golden("table1.csv"):
        n = int(row["n"])
        out[n] = [row[f"p{k}"] for k in range(1, n + 1)]
    return out


def golden_revenues() -> dict[int, Fraction]:
    return {int(r["n"]): Fraction(r["revenue"]) for r in read_golden("table2.csv")}


@pytest.fixture
def solved():
    return schedule


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
