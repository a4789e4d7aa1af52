"""Command line entry point: ``causal-bench {simulate,summarize,smoke}``."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
import tempfile
import time

from .config import RunConfig, load_config, resolve_workers, save_config
from .outputs import emit_outputs, read_records
from .runner import run_grid
from .summary import summarize_records

log = logging.getLogger("causal_bench")


def _parse_blocks(text: str) -> tuple:
    try:
        return tuple(float(b) for b in text.split(",") if b.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"--blocks expects comma-separated numbers, got {text!r}")


def cmd_simulate(args) -> int:
    config = load_config(args.config) if args.config else RunConfig()
    overrides = {}
    if args.seed is not None:
        overrides["base_seed"] = args.seed
    if args.blocks is not None:
        overrides["effect_grid"] = args.blocks
    if args.reps is not None:
        overrides["reps_per_block"] = args.reps
    out = args.out or config.output_dir
    overrides["output_dir"] = str(out)
    config = dataclasses.replace(config, **overrides)
    workers = resolve_workers(args.workers, config)

    start = time.perf_counter()
    records, summaries = run_grid(config, workers=workers, output_dir=out)
    save_config(config, f"{out}/config.json")
    failed = sum(1 for r in records if r.fail_ua or r.fail_match or r.fail_multi)
    log.info("%d experiments (%d with a failed estimate) in %.1fs -> %s",
             len(records), failed, time.perf_counter() - start, out)
    return 0


def cmd_summarize(args) -> int:
    records = read_records(args.records)
    emit_outputs(records, summarize_records(records), args.out)
    log.info("summarized %d records -> %s", len(records), args.out)
    return 0


def cmd_smoke(args) -> int:
    config = RunConfig(effect_grid=(1.0,), reps_per_block=2, parallelism=1)
    with tempfile.TemporaryDirectory() as tmp:
        out = args.out or tmp
        records, summaries = run_grid(config, workers=1, output_dir=out)
    ok = len(records) == 2 and len(summaries) == 1
    print(f"smoke: {len(records)} records, {len(summaries)} summary row(s): {'ok' if ok else 'FAILED'}")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="causal-bench", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run the Monte Carlo grid and write CSV outputs")
    p.add_argument("--config", help="JSON run configuration (defaults used when omitted)")
    p.add_argument("--out", help="output directory (default: config output_dir)")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, help="worker processes (fallback: $CAUSAL_BENCH_WORKERS)")
    p.add_argument("--blocks", type=_parse_blocks, help="comma-separated effect magnitudes")
    p.add_argument("--reps", type=int, help="replicates per block")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("summarize", help="recompute tables and figure data from records.csv")
    p.add_argument("--records", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("smoke", help="1-block, 2-rep sanity run")
    p.add_argument("--out", help="keep outputs here instead of a temporary directory")
    p.set_defaults(func=cmd_smoke)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
