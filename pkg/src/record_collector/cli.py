"""Command-line interface: ``record-collector {exact,table,curve,simulate,records}``.

CSV output uses ``,`` separators, ``.`` decimals, LF line endings and a
header row; JSON output keeps a fixed key order and full float precision.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from decimal import ROUND_HALF_UP, Decimal

from . import __version__
from .distribution import MandelbrotParams, mandelbrot_pmf, read_pmf_file, uniform_pmf
from .exact import expected_distinct_records, expected_draws
from .exceptions import RecordCollectorError
from .heaps import (
    alpha_coefficient,
    approx_expected_draws,
    approx_expected_records,
    simulated_validity_threshold,
    validity_threshold,
)
from .montecarlo import DEFAULT_REPLICATES, estimate_expected_draws, estimate_expected_records, estimate_record_curve

TABLE_M = (5, 8, 10)
TABLE_K = (2, 8)


def parse_range(text):
    """``"lo:hi"`` (inclusive) or a single integer, as ``(lo, hi)``."""
    try:
        if ":" in text:
            lo, hi = (int(part) for part in text.split(":", 1))
        else:
            lo = hi = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or lo:hi range, got {text!r}") from None
    if lo < 1 or hi < lo:
        raise argparse.ArgumentTypeError(f"range must satisfy 1 <= lo <= hi, got {text!r}")
    return lo, hi


def _seed(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _int_list(text):
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def round_half_up(x, places=2):
    """Decimal string of ``x`` rounded half-up, e.g. ``2.805 -> "2.81"``."""
    q = Decimal(1).scaleb(-places)
    return str(Decimal(repr(float(x))).quantize(q, rounding=ROUND_HALF_UP))


# ---------------------------------------------------------------------------
# output


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v) for v in row])
    return buf.getvalue()


def _json_text(obj):
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _emit(args, text):
    if args.output in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# argument groups


def _add_dist(parser, default="mandelbrot"):
    g = parser.add_argument_group("distribution")
    g.add_argument("--dist", choices=("uniform", "mandelbrot", "file"), default=default)
    g.add_argument("--m", type=int, help="support size (uniform, mandelbrot)")
    g.add_argument("--theta", type=float, default=1.75, help="Mandelbrot exponent (default 1.75)")
    g.add_argument("--c", type=float, default=0.30, help="Mandelbrot shift (default 0.30)")
    g.add_argument("--pmf-file", help="one probability per line, '#' comments (with --dist file)")


def _add_output(parser, formats=("csv", "json")):
    parser.add_argument("--format", choices=formats, default="csv")
    parser.add_argument("--output", help="output path (default: standard output)")


def _add_sim(parser):
    parser.add_argument("--replicates", type=int, default=DEFAULT_REPLICATES)
    parser.add_argument("--seed", type=_seed, default=0)


def _distribution(args, parser):
    if args.dist == "file":
        if not args.pmf_file:
            parser.error("--dist file requires --pmf-file")
        return read_pmf_file(args.pmf_file)
    if args.m is None:
        parser.error(f"--dist {args.dist} requires --m")
    if args.dist == "uniform":
        return uniform_pmf(args.m)
    return mandelbrot_pmf(MandelbrotParams(args.m, args.theta, args.c))


# ---------------------------------------------------------------------------
# subcommands


def cmd_exact(args, parser):
    p = _distribution(args, parser)
    lo, hi = args.k
    table = expected_draws(p, hi, method=args.method)
    rows = [r for r in table.rows if lo <= r.k <= hi]
    if args.format == "json":
        doc = table.to_dict()
        doc["rows"] = [d for d in doc["rows"] if lo <= d["k"] <= hi]
        return _json_text(doc)
    return _csv_text(["k", "value", "method"], [(r.k, r.value, r.method.value) for r in rows])


def table_cells(theta=1.75, c=0.30, ms=TABLE_M, ks=TABLE_K, method="dp"):
    """Grid of ``(m, k) -> (E[X_m(k)], E[R_m(E[X_m(k)])])``; ``None`` where ``k > m``."""
    cells = {}
    for m in ms:
        p = mandelbrot_pmf(MandelbrotParams(m, theta, c))
        kmax = min(m, ks[1])
        values = expected_draws(p, kmax, method=method) if ks[0] <= kmax else None
        for k in range(ks[0], ks[1] + 1):
            if k > m:
                cells[m, k] = None
            else:
                x = values.value(k)
                cells[m, k] = (x, float(expected_distinct_records(p, x)))
    return cells


def format_cell(cell):
    if cell is None:
        return "-"
    x, r = cell
    return f"{round_half_up(x)} ({round_half_up(r)})"


def cmd_table(args, parser):
    ms = args.m_values
    cells = table_cells(args.theta, args.c, ms, args.k, args.method)
    ks = range(args.k[0], args.k[1] + 1)
    if args.format == "json":
        doc = {
            "theta": args.theta,
            "c": args.c,
            "method": args.method,
            "cells": [
                {
                    "m": m,
                    "k": k,
                    "expected_draws": None if cells[m, k] is None else cells[m, k][0],
                    "expected_records": None if cells[m, k] is None else cells[m, k][1],
                }
                for k in ks
                for m in ms
            ],
        }
        return _json_text(doc)
    header = ["k"] + [f"m={m}" for m in ms]
    rows = [[k] + [format_cell(cells[m, k]) for m in ms] for k in ks]
    if args.format == "text":
        widths = [max(len(str(r[i])) for r in [header] + rows) for i in range(len(header))]
        lines = ["  ".join(str(v).rjust(w) for v, w in zip(r, widths)) for r in [header] + rows]
        return "\n".join(lines) + "\n"
    return _csv_text(header, rows)


def cmd_curve(args, parser):
    p = _distribution(args, parser)
    lo, hi = args.k
    if hi > p.m:
        parser.error(f"--k upper end {hi} exceeds the support size m={p.m}")
    ks = list(range(lo, hi + 1))
    est = estimate_record_curve(p, ks, args.replicates, args.seed)
    if args.figure == "inverse":
        header = ["k", "sim_mean", "sim_stderr", "records_at_mean"]
        rows = [(k, e.mean, e.stderr, float(expected_distinct_records(p, e.mean))) for k, e in zip(ks, est)]
        meta = {}
    else:
        if args.dist != "mandelbrot":
            parser.error("--figure approx needs --dist mandelbrot")
        h = alpha_coefficient(args.theta, args.c)
        if args.tau_method == "montecarlo":
            tau = simulated_validity_threshold(p, h, args.replicates, args.seed)
        else:
            tau = validity_threshold(p.m, h)
        header = ["k", "sim_mean", "sim_stderr", "approx_value", "tau"]
        rows = [(k, e.mean, e.stderr, approx_expected_draws(k, h), tau) for k, e in zip(ks, est)]
        meta = {
            "alpha": h.alpha,
            "beta": h.beta,
            "a_inf": h.a_inf,
            "tau": tau,
            "tau_method": args.tau_method,
            "records_limit": h.records_limit(p.m),
            "validity": "approximation intended for k << tau",
        }
    if args.format == "json":
        doc = {
            "figure": args.figure,
            "m": p.m,
            "distribution": p.label,
            "replicates": args.replicates,
            "seed": args.seed,
            **({"metadata": meta} if meta else {}),
            "rows": [dict(zip(header, r)) for r in rows],
        }
        if args.figure == "approx":
            for row in doc["rows"]:
                row["within_validity"] = row["k"] < row["tau"]
        return _json_text(doc)
    return _csv_text(header, rows)


def cmd_simulate(args, parser):
    p = _distribution(args, parser)
    if (args.k is None) == (args.n is None):
        parser.error("give exactly one of --k or --n")
    if args.k is not None:
        est = estimate_expected_draws(p, args.k, args.replicates, args.seed)
        key, val = "k", args.k
    else:
        est = estimate_expected_records(p, args.n, args.replicates, args.seed)
        key, val = "n", args.n
    if args.format == "json":
        return _json_text(est.to_dict())
    return _csv_text(
        ["mean", "stderr", "replicates", "seed", "m", key],
        [(est.mean, est.stderr, est.replicates, est.seed, p.m, val)],
    )


def cmd_records(args, parser):
    p = _distribution(args, parser)
    lo, hi = args.n
    h = alpha_coefficient(args.theta, args.c) if args.dist == "mandelbrot" and args.theta > 1 else None
    header = ["n", "value"] + (["approx_value"] if h else [])
    rows = []
    for n in range(lo, hi + 1):
        row = [n, float(expected_distinct_records(p, n))]
        if h:
            row.append(approx_expected_records(n, h))
        rows.append(row)
    if args.format == "json":
        doc = {"m": p.m, "distribution": p.label, "rows": [dict(zip(header, r)) for r in rows]}
        if h:
            doc["metadata"] = {"records_limit": h.records_limit(p.m), "validity": "approximation intended for n << records_limit"}
        return _json_text(doc)
    return _csv_text(header, rows)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="record-collector",
        description="Expected draws to observe k distinct values of a finite distribution.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exact", help="exact E[X_m(s)] for s = 1..k")
    _add_dist(p, default="mandelbrot")
    p.add_argument("--k", type=parse_range, required=True, help="k or lo:hi")
    p.add_argument("--method", choices=("dp", "naive", "maxmin", "uniform"), default="dp")
    _add_output(p)
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("table", help="reproduce the Mandelbrot expectation table")
    p.add_argument("--theta", type=float, default=1.75)
    p.add_argument("--c", type=float, default=0.30)
    p.add_argument("--m-values", type=_int_list, default=TABLE_M, help="comma-separated (default 5,8,10)")
    p.add_argument("--k", type=parse_range, default=TABLE_K, help="lo:hi (default 2:8)")
    p.add_argument("--method", choices=("dp", "naive"), default="dp")
    _add_output(p, formats=("csv", "json", "text"))
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("curve", help="simulated E[X_m(k)] against its dual or the power law")
    p.add_argument("--figure", choices=("inverse", "approx"), required=True)
    _add_dist(p, default="mandelbrot")
    p.add_argument("--k", type=parse_range, required=True, help="lo:hi")
    p.add_argument("--tau-method", choices=("analytic", "montecarlo"), default="analytic")
    _add_sim(p)
    _add_output(p)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("simulate", help="Monte-Carlo estimate of E[X_m(k)] or E[R_m(n)]")
    _add_dist(p, default="mandelbrot")
    p.add_argument("--k", type=int)
    p.add_argument("--n", type=int)
    _add_sim(p)
    _add_output(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("records", help="exact E[R_m(n)] (and the power law for Mandelbrot)")
    _add_dist(p, default="mandelbrot")
    p.add_argument("--n", type=parse_range, required=True, help="n or lo:hi")
    _add_output(p)
    p.set_defaults(func=cmd_records)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        text = args.func(args, parser)
    except RecordCollectorError as exc:
        print(f"record-collector: error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"record-collector: error: {exc}", file=sys.stderr)
        return 2
    _emit(args, text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
