"""Command-line interface.

Subcommands: import (csv|mask), stats, optimize, bench-storage, bench-posmap,
bench-formula, bench-incremental, serve. Results print as CSV with fixed
headers (or JSON with --json). Exit codes: 0 ok, 2 usage, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import csv as csv_mod
import json
import os
import sys

from gridstore.core import CellAddress, Number, OccupancyMask, Sheet, Text
from gridstore.costmodel import ideal_params, load_params, pg_params
from gridstore.bench.benches import bench_formula, bench_incremental, bench_posmap, bench_storage
from gridstore.bench.synth import SyntheticSpec
from gridstore.engine.workbook import Workbook

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RUNTIME = 3


def _emit(rows: list[dict], columns: list[str], as_json: bool, out=None) -> None:
    out = out or sys.stdout
    if as_json:
        json.dump(rows, out, indent=2, default=float)
        out.write("\n")
        return
    writer = csv_mod.writer(out, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([row[c] for c in columns])


def _load_csv_sheet(path: str, headers: bool) -> Sheet:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv_mod.reader(fh)
        records = list(reader)
    if headers and records:
        records = records[1:]
    rows = max(1, len(records))
    cols = max([1] + [len(r) for r in records])
    sheet = Sheet(rows=rows, cols=cols)
    for r, record in enumerate(records, start=1):
        for c, field in enumerate(record, start=1):
            if field == "":
                continue
            try:
                sheet.set(CellAddress(r, c), Number(float(field)))
            except ValueError:
                from gridstore.core import Formula
                from gridstore.formula.parser import parse_formula

                if field.startswith("="):
                    sheet.set(CellAddress(r, c), Formula(field, parse_formula(field)))
                else:
                    sheet.set(CellAddress(r, c), Text(field))
    return sheet


def _params_from_flag(value: str):
    if value == "pg":
        return pg_params()
    if value == "ideal":
        return ideal_params()
    return load_params(value)[0]


def _require_workbook(path: str) -> Workbook:
    from gridstore.store import load

    return load(path)


def _cmd_import(args) -> int:
    if (args.csv is None) == (args.mask is None):
        print("import needs exactly one of --csv or --mask", file=sys.stderr)
        return EXIT_USAGE
    if args.csv:
        sheet = _load_csv_sheet(args.csv, args.headers)
    else:
        with open(args.mask, "r", encoding="utf-8") as fh:
            sheet = OccupancyMask.from_text(fh.read()).to_sheet()
    workbook = Workbook()
    engine = workbook.create_sheet(args.sheet, rows=sheet.rows, cols=sheet.cols)
    engine.bulk_load(sheet)
    from gridstore.store import save

    save(workbook, args.out)
    print(f"imported {sheet.filled_count()} cells into {args.out}")
    return EXIT_OK


def _cmd_stats(args) -> int:
    from gridstore.analyzer import corpus_stats, corpus_stats_csv

    workbook = _require_workbook(args.wb)
    named = [(name, engine.to_sheet()) for name, engine in sorted(workbook.sheets.items())]
    stats = corpus_stats(named)
    sys.stdout.write(corpus_stats_csv(stats))
    return EXIT_OK


def _cmd_optimize(args) -> int:
    workbook = _require_workbook(args.wb)
    params = _params_from_flag(args.params)
    results = []
    for name, engine in sorted(workbook.sheets.items()):
        decomp, migrated = engine.optimize_layout(args.algorithm, params, eta=args.eta)
        payload = decomp.to_json()
        payload["sheet"] = name
        payload["migrated_cells"] = migrated
        results.append(payload)
    from gridstore.store import save

    save(workbook, args.wb)
    json.dump(results if len(results) != 1 else results[0], sys.stdout, indent=2)
    sys.stdout.write("\n")
    return EXIT_OK


def _synthetic_spec(args) -> SyntheticSpec:
    return SyntheticSpec(
        rows=args.rows,
        cols=args.cols,
        table_count=args.tables,
        formula_count=args.formulae,
        seed=args.seed,
    )


def _cmd_bench_storage(args) -> int:
    rows = bench_storage(_synthetic_spec(args))
    _emit(rows, ["params", "layout", "cost", "normalized"], args.json)
    return EXIT_OK


def _cmd_bench_posmap(args) -> int:
    impls = list(args.impl.split(",")) if args.impl != "all" else [
        "hierarchical",
        "direct",
        "monotonic",
    ]
    sizes = [int(float(tok)) for tok in args.n.split(",")]
    rows = bench_posmap(impls, sizes, ops=args.ops)
    _emit(rows, ["impl", "n", "op", "mean_ms"], args.json)
    return EXIT_OK


def _cmd_bench_formula(args) -> int:
    rows = bench_formula(_synthetic_spec(args))
    _emit(rows, ["layout", "modeled_cost", "wall_ms"], args.json)
    return EXIT_OK


def _cmd_bench_incremental(args) -> int:
    rows = bench_incremental(_synthetic_spec(args), eta=args.eta, batches=args.batches)
    _emit(
        rows,
        ["batch", "storage_before", "storage_after", "migrated_cells"],
        args.json,
    )
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from gridstore.api import create_app

    if args.wb and os.path.exists(os.path.join(args.wb, "manifest.json")):
        workbook = _require_workbook(args.wb)
    else:
        workbook = Workbook()
        workbook.create_sheet("Sheet1")
        if args.wb:
            workbook.bound_dir = args.wb
    listen = args.listen or os.environ.get("GRIDSTORE_LISTEN", "127.0.0.1:8787")
    host, _, port = listen.rpartition(":")
    app = create_app(workbook, static_dir=args.static)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port), log_level="warning")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gridstore",
        description="Hybrid spreadsheet storage engine: import, analyze, optimize, benchmark, serve.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("import", help="import a CSV file or occupancy mask into a workbook")
    p.add_argument("--csv")
    p.add_argument("--mask")
    p.add_argument("--headers", action="store_true", help="treat the first CSV row as headers")
    p.add_argument("--sheet", default="Sheet1")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_import)

    p = sub.add_parser("stats", help="structural analysis report for a workbook")
    p.add_argument("--wb", required=True)
    p.set_defaults(fn=_cmd_stats)

    p = sub.add_parser("optimize", help="re-optimize a workbook's physical layout")
    p.add_argument("--wb", required=True)
    p.add_argument(
        "--algorithm",
        default="aggressive",
        choices=["dp", "weighted", "greedy", "aggressive", "incremental"],
    )
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--params", default="pg", help="pg | ideal | path to a key=value file")
    p.set_defaults(fn=_cmd_optimize)

    def add_synth_flags(p):
        p.add_argument("--rows", type=int, default=1_000_000)
        p.add_argument("--cols", type=int, default=100)
        p.add_argument("--tables", type=int, default=20)
        p.add_argument("--formulae", type=int, default=100)
        p.add_argument("--seed", type=int, default=1)
        p.add_argument("--json", action="store_true")

    p = sub.add_parser("bench-storage", help="storage cost per layout, normalized worst=100")
    add_synth_flags(p)
    p.set_defaults(fn=_cmd_bench_storage)

    p = sub.add_parser("bench-posmap", help="positional map latencies across sizes")
    p.add_argument("--impl", default="all")
    p.add_argument("--n", default="1e3,1e4,1e5,1e6,1e7")
    p.add_argument("--ops", type=int, default=1000)
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=_cmd_bench_posmap)

    p = sub.add_parser("bench-formula", help="formula access cost per layout")
    add_synth_flags(p)
    p.set_defaults(fn=_cmd_bench_formula)

    p = sub.add_parser("bench-incremental", help="incremental maintenance sawtooth")
    add_synth_flags(p)
    p.add_argument("--eta", type=float, default=1.0)
    p.add_argument("--batches", type=int, default=10)
    p.set_defaults(fn=_cmd_bench_incremental)

    p = sub.add_parser("serve", help="serve the HTTP API (and web grid, if built)")
    p.add_argument("--wb", default=None)
    p.add_argument("--listen", default=None, help="host:port (or env GRIDSTORE_LISTEN)")
    p.add_argument("--static", default=None, help="directory of built web-grid assets")
    p.set_defaults(fn=_cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except BrokenPipeError:
        return EXIT_OK
    except KeyboardInterrupt:
        return 130
    except Exception as err:  # surfaced as a runtime failure, exit code 3
        print(f"error: {err}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
