"""Command-line front end.

    simauction prices 3 --format csv
    simauction volume --alpha 4,3,1 --method dragon
    simauction volpoly 3 --vars beta --out lambda3.json
    simauction table --max 6 --format csv
    simauction verify 4
    simauction allocate --prices fig2.json --x 0.8,0.05

Exit status: 0 success, 1 a requested check failed, 2 bad arguments,
3 unsolvable price system, 4 desk limit exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal, localcontext
from fractions import Fraction
from typing import Callable, Sequence

from . import poly, polytope, sja, volume
from .poly import PolyError, to_rational
from .polytope import AlphaVector, DeskLimitError

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_UNSOLVABLE, EXIT_DESK = 0, 1, 2, 3, 4

COMMANDS = ("prices", "revenue", "volume", "volpoly", "verify", "allocate", "table")
ALL_CHECKS = (
    "combinatorics",
    "edges",
    "delzant",
    "volume",
    "lorentzian",
    "prices",
    "audit",
    "partition",
    "allocation",
)


def fmt_decimal(value, digits: int) -> str:
    """Round half-even to ``digits`` places."""
    fr = Fraction(value)
    with localcontext() as ctx:
        ctx.prec = max(50, digits + 30)
        d = Decimal(fr.numerator) / Decimal(fr.denominator)
        return str(d.quantize(Decimal(1).scaleb(-digits), rounding=ROUND_HALF_EVEN))


def fmt_rational(value) -> str:
    fr = Fraction(value)
    return str(fr.numerator) if fr.denominator == 1 else f"{fr.numerator}/{fr.denominator}"


@dataclass
class RunConfig:
    command: str
    n: int | None = None
    alpha: AlphaVector | None = None
    method: str = "lawrence"
    vars: str = "alpha"
    out: str | None = None
    tol: Fraction = sja.DEFAULT_TOL
    digits: int = 3
    fmt: str = "text"
    threads: int = 1
    desk_limit: int | None = None
    checks: tuple[str, ...] = ALL_CHECKS
    checks_explicit: bool = False
    prices_file: str | None = None
    x: tuple[Fraction, ...] | None = None
    max_n: int | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.tol <= 0:
            raise ValueError("--tol must be positive")
        if self.digits < 0:
            raise ValueError("--digits must be nonnegative")


# Reports


def price_report(s: sja.PriceSchedule, digits: int) -> dict:
    audit = sja.criticality_audit(s)
    return {
        "n": s.n,
        "tol": fmt_rational(s.tol),
        "prices": [fmt_decimal(v, digits) for v in s.prices],
        "prices_exact": [fmt_rational(v) for v in s.prices],
        "enclosures": [[fmt_decimal(lo, 20), fmt_decimal(hi, 20)] for lo, hi in s.enclosures],
        "sold": list(s.sold),
        "gap": s.gap,
        "degenerate": audit.degenerate,
        "revenue": fmt_decimal(sja.revenue(s), digits),
        "residuals": [f"{float(r):.3e}" for r in audit.residuals],
        "partition_residual": f"{float(audit.partition_residual):.3e}",
    }


def price_cells(s: sja.PriceSchedule, digits: int) -> list[str]:
    cells = []
    for k, (v, (lo, hi)) in enumerate(zip(s.prices, s.enclosures), start=1):
        if not s.sold[k - 1]:
            cells.append("--")
        elif lo == hi:
            cells.append(fmt_rational(v))
        else:
            cells.append(fmt_decimal(v, digits))
    return cells


def _csv(rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    return buf.getvalue()


def _solve(n: int, cfg: RunConfig) -> sja.PriceSchedule:
    return sja.solve_prices(n, cfg.tol, desk_limit=cfg.desk_limit or sja.DESK_LIMIT)


# Commands


def cmd_prices(cfg: RunConfig, out) -> int:
    s = _solve(cfg.n, cfg)
    if cfg.fmt == "json":
        json.dump(price_report(s, cfg.digits), out, indent=2)
        out.write("\n")
    elif cfg.fmt == "csv":
        out.write(_csv([[s.n] + price_cells(s, cfg.digits)]))
    else:
        out.write(f"n = {s.n}, gap = {s.gap}\n")
        for k, cell in enumerate(price_cells(s, cfg.digits), start=1):
            out.write(f"p_{k} = {cell}\n")
    return EXIT_OK


def cmd_revenue(cfg: RunConfig, out) -> int:
    s = _solve(cfg.n, cfg)
    rev = fmt_decimal(sja.revenue(s), cfg.digits)
    if cfg.fmt == "json":
        json.dump({"n": s.n, "revenue": rev}, out)
        out.write("\n")
    elif cfg.fmt == "csv":
        out.write(_csv([[s.n, rev]]))
    else:
        out.write(rev + "\n")
    return EXIT_OK


def cmd_volume(cfg: RunConfig, out) -> int:
    value = volume.volume(cfg.alpha, cfg.method)
    if cfg.fmt == "json":
        json.dump({"alpha": [fmt_rational(a) for a in cfg.alpha], "method": cfg.method,
                   "volume": fmt_rational(value)}, out)
        out.write("\n")
    else:
        out.write(fmt_rational(value) + "\n")
    return EXIT_OK


def cmd_volpoly(cfg: RunConfig, out) -> int:
    n = cfg.n
    if cfg.vars == "alpha":
        p = volume.volume_poly(n, cfg.method, cfg.desk_limit)
    elif cfg.vars == "price":
        volume.volume_poly(n, cfg.method, cfg.desk_limit)  # enforces the desk limit
        p = volume.price_polynomial(n, cfg.method)
    else:
        volume.volume_poly(n, cfg.method, cfg.desk_limit)
        p = volume.beta_volume_poly(n, cfg.method)
    text = json.dumps(p.to_json())
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text + "\n")
    if cfg.fmt == "text" and not cfg.out:
        out.write(str(p) + "\n")
    elif not cfg.out:
        out.write(text + "\n")
    return EXIT_OK


def cmd_table(cfg: RunConfig, out) -> int:
    top = cfg.max_n
    header = ["n"] + [f"p{k}" for k in range(1, top + 1)] + ["revenue"]
    rows = []
    for n in range(1, top + 1):
        s = _solve(n, cfg)
        cells = price_cells(s, cfg.digits) + [""] * (top - n)
        rows.append([n] + cells + [fmt_decimal(sja.revenue(s), cfg.digits)])
    if cfg.fmt == "json":
        json.dump([dict(zip(header, map(str, r))) for r in rows], out, indent=2)
        out.write("\n")
    elif cfg.fmt == "csv":
        out.write(_csv([header] + rows))
    else:
        widths = [max(len(str(r[i])) for r in [header] + rows) for i in range(len(header))]
        for r in [header] + rows:
            out.write("  ".join(str(c).rjust(w) for c, w in zip(r, widths)).rstrip() + "\n")
    return EXIT_OK


def _load_schedule(path: str) -> sja.GeneralPriceSchedule:
    with open(path) as fh:
        data = json.load(fh)
    prices = data["prices"]
    if isinstance(prices, list):
        exact = data.get("prices_exact", prices)
        return sja.GeneralPriceSchedule.from_symmetric(exact)
    return sja.GeneralPriceSchedule.from_mapping(int(data["n"]), prices)


def cmd_allocate(cfg: RunConfig, out) -> int:
    s = _load_schedule(cfg.prices_file)
    a = sja.allocate(s, cfg.x)
    rec = {"bundle": list(a.bundle), "price": fmt_rational(a.price), "utility": fmt_rational(a.utility)}
    if cfg.fmt == "json":
        json.dump(rec, out)
        out.write("\n")
    elif cfg.fmt == "csv":
        out.write(_csv([[" ".join(map(str, a.bundle)), rec["price"], rec["utility"]]]))
    else:
        out.write(f"bundle {{{', '.join(map(str, a.bundle))}}} price {rec['price']} utility {rec['utility']}\n")
    return EXIT_OK


# verify


class Skip(Exception):
    pass


def _check_combinatorics(n, cfg):
    rep = polytope.combinatorics_report(n)
    ok = (
        rep.vertex_count == polytope.expected_vertex_count(n)
        and rep.facet_count == polytope.expected_facet_count(n)
        and rep.is_simple
    )
    return ok, f"vertices {rep.vertex_count}, facets {rep.facet_count}, simple {rep.is_simple}"


def _check_edges(n, cfg):
    rep = polytope.edge_directions_check(polytope.regular(n), cfg.desk_limit or 5)
    return rep.passed, f"{rep.edges} edges, {len(rep.violations)} violations"


def _check_delzant(n, cfg):
    rep = polytope.delzant_check(n)
    return rep.passed, "dets " + ",".join(fmt_rational(d) for d in rep.determinants)


def _check_volume(n, cfg):
    law = volume.volume_poly_lawrence(n)
    drg = volume.volume_poly_dragon(n, cfg.desk_limit or volume.DRAGON_LIMIT)
    ok = law == drg and law.is_homogeneous() and law.total_degree() == n
    ok = ok and all(isinstance(c, int) for _, c in law.items())
    ones = law.evaluate([1] * n) / math.factorial(n)
    simplex = law.evaluate([1] + [0] * (n - 1)) / math.factorial(n)
    ok = ok and ones == 1 and simplex == Fraction(1, math.factorial(n))
    return ok, f"{len(law)} terms, dragon == lawrence: {law == drg}"


def _check_lorentzian(n, cfg):
    if n > 4 and not cfg.checks_explicit:
        raise Skip("Lorentzian suite runs for n <= 4 by default")
    lam = volume.beta_volume_poly(n)
    rep = poly.is_lorentzian(lam)
    return rep.passed, f"{rep.checked} quadratic forms checked"


def _check_prices(n, cfg):
    s = _solve(n, cfg)
    ok = s.prices[0] == Fraction(n, n + 1)
    ok = ok and all(a <= b for a, b in zip(s.prices, s.prices[1:]))
    rep = sja.submodularity_check(s.to_general()) if n <= 8 else None
    ok = ok and (rep is None or rep.passed)
    return ok, "prices " + ", ".join(price_cells(s, cfg.digits)) + f"; gap {s.gap}"


def _check_audit(n, cfg):
    a = sja.criticality_audit(_solve(n, cfg))
    ok = a.passed and a.residuals[0] == 0
    worst = max(abs(r) for r, c in zip(a.residuals, a.layers) if c.sold)
    return ok, f"max sold residual {float(worst):.2e}, degenerate {a.degenerate}"


def _check_partition(n, cfg):
    p = sja.partition_check(_solve(n, cfg))
    bound = Fraction(1, 10**9)
    ok = abs(p.residual) < bound and abs(p.d_empty_residual) < bound
    return ok, f"residual {float(p.residual):.2e}, D_empty residual {float(p.d_empty_residual):.2e}"


def _check_allocation(n, cfg):
    import random

    if n > 6 and not cfg.checks_explicit:
        raise Skip("allocation oracle runs for n <= 6 by default")
    s = _solve(n, cfg).to_general()
    rng = random.Random(n)
    for _ in range(200):
        x = [Fraction(rng.randrange(10**6), 10**6) for _ in range(n)]
        got = sja.allocate(s, x)
        best = max(
            sum((x[i - 1] for i in b), Fraction(0)) - s.prices[b] for b in s.prices
        )
        if got.utility != best:
            return False, f"mismatch at {x}"
    return True, "200 random valuations agree with the exhaustive argmax"


CHECKS: dict[str, Callable] = {
    "combinatorics": _check_combinatorics,
    "edges": _check_edges,
    "delzant": _check_delzant,
    "volume": _check_volume,
    "lorentzian": _check_lorentzian,
    "prices": _check_prices,
    "audit": _check_audit,
    "partition": _check_partition,
    "allocation": _check_allocation,
}


def cmd_verify(cfg: RunConfig, out) -> int:
    results = []
    status = EXIT_OK
    for name in cfg.checks:
        t0 = time.perf_counter()
        try:
            ok, detail = CHECKS[name](cfg.n, cfg)
            verdict = "PASS" if ok else "FAIL"
            if not ok:
                status = EXIT_FAIL
        except Skip as exc:
            verdict, detail = "SKIP", str(exc)
        except DeskLimitError as exc:
            if cfg.checks_explicit:
                raise
            verdict, detail = "SKIP", str(exc)
        results.append({"check": name, "result": verdict, "detail": detail,
                        "seconds": round(time.perf_counter() - t0, 3)})
    if cfg.fmt == "json":
        json.dump({"n": cfg.n, "checks": results}, out, indent=2)
        out.write("\n")
    elif cfg.fmt == "csv":
        out.write(_csv([["check", "result", "detail"]] + [[r["check"], r["result"], r["detail"]] for r in results]))
    else:
        for r in results:
            out.write(f"{r['result']:4}  {r['check']:<13} {r['detail']}\n")
    return status


HANDLERS = {
    "prices": cmd_prices,
    "revenue": cmd_revenue,
    "volume": cmd_volume,
    "volpoly": cmd_volpoly,
    "verify": cmd_verify,
    "allocate": cmd_allocate,
    "table": cmd_table,
}


def run_command(cfg: RunConfig, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        return HANDLERS[cfg.command](cfg, out)
    except sja.Unsolvable as exc:
        err.write(f"unsolvable: {exc}\n")
        for step in exc.diagnostics:
            err.write(f"  layer {step.k} merge {step.merge}: {step.outcome} "
                      f"bracket [{float(step.bracket[0]):.6g}, {float(step.bracket[1]):.6g}]\n")
        return EXIT_UNSOLVABLE
    except DeskLimitError as exc:
        err.write(f"desk limit: {exc}\n")
        return EXIT_DESK


# Argument parsing


def _rational_arg(text: str) -> Fraction:
    try:
        return to_rational(text)
    except PolyError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _alpha_arg(text: str) -> AlphaVector:
    try:
        return AlphaVector.parse(text)
    except (ValueError, PolyError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _point_arg(text: str) -> tuple[Fraction, ...]:
    try:
        return tuple(to_rational(t) for t in text.split(",") if t.strip())
    except PolyError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=_rational_arg, default=sja.DEFAULT_TOL,
                        help="root enclosure width (default 1e-12)")
    common.add_argument("--digits", type=int, default=3, help="decimal places (default 3)")
    common.add_argument("--format", dest="fmt", choices=("json", "csv", "text"), default="text")
    common.add_argument("--threads", type=_positive_int, default=1,
                        help="accepted for compatibility; results do not depend on it")
    common.add_argument("--desk-limit", type=_positive_int, default=None,
                        help="raise the enumeration/solve limit of the command")

    parser = argparse.ArgumentParser(prog="simauction", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("prices", "revenue"):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("n", type=_positive_int)

    p = sub.add_parser("volume", parents=[common])
    p.add_argument("--alpha", type=_alpha_arg, required=True)
    p.add_argument("--method", choices=("lawrence", "dragon", "oracle", "lawrence-direct"),
                   default="lawrence")

    p = sub.add_parser("volpoly", parents=[common])
    p.add_argument("n", type=_positive_int)
    p.add_argument("--method", choices=("lawrence", "dragon"), default="lawrence")
    p.add_argument("--vars", choices=("alpha", "price", "beta"), default="alpha")
    p.add_argument("--out")

    p = sub.add_parser("verify", parents=[common])
    p.add_argument("n", type=_positive_int)
    p.add_argument("--checks", default=None,
                   help="comma-separated subset of: " + ",".join(ALL_CHECKS))

    p = sub.add_parser("allocate", parents=[common])
    p.add_argument("--prices", dest="prices_file", required=True)
    p.add_argument("--x", type=_point_arg, required=True)

    p = sub.add_parser("table", parents=[common])
    p.add_argument("--max", dest="max_n", type=_positive_int, default=8)
    return parser


def parse_config(argv: Sequence[str] | None = None) -> RunConfig:
    parser = build_parser()
    ns = parser.parse_args(argv)
    kwargs = dict(command=ns.command, tol=ns.tol, digits=ns.digits, fmt=ns.fmt,
                  threads=ns.threads, desk_limit=ns.desk_limit)
    if ns.command in ("prices", "revenue", "volpoly", "verify"):
        kwargs["n"] = ns.n
    if ns.command in ("volume", "volpoly"):
        kwargs["method"] = ns.method
    if ns.command == "volume":
        kwargs["alpha"] = ns.alpha
    if ns.command == "volpoly":
        kwargs.update(vars=ns.vars, out=ns.out)
    if ns.command == "verify" and ns.checks:
        names = tuple(c.strip() for c in ns.checks.split(",") if c.strip())
        unknown = [c for c in names if c not in CHECKS]
        if unknown:
            parser.error(f"unknown checks: {', '.join(unknown)}")
        kwargs.update(checks=names, checks_explicit=True)
    if ns.command == "allocate":
        kwargs.update(prices_file=ns.prices_file, x=ns.x)
    if ns.command == "table":
        kwargs["max_n"] = ns.max_n
    try:
        return RunConfig(**kwargs)
    except ValueError as exc:
        parser.error(str(exc))


def main(argv: Sequence[str] | None = None) -> int:
    cfg = parse_config(argv)
    return run_command(cfg)


if __name__ == "__main__":
    sys.exit(main())
