"""CSV serialization of records, Tables 1-2 and figure series.

All files are UTF-8, comma separated, with a header row. Missing values are
written as ``NA``; floats use ``repr`` (shortest string that round-trips).
"""

from __future__ import annotations

import csv
import math
import os
import tempfile
from dataclasses import fields
from pathlib import Path

from .runner import RECORD_FIELDS, ExperimentRecord
from .summary import METHOD_COLUMNS, pooled_tests

NA = "NA"
_TYPES = {f.name: f.type for f in fields(ExperimentRecord)}

TABLE1_COLUMNS = [
    "effect",
    *[f"{stat}_{part}" for stat in ("chi2_unadjusted", "chi2_matched") for part in ("mean", "lo", "hi")],
    "p_value",
    *[f"{stat}_{part}" for stat in ("bias_reduction", "pct_matched", "pct_excluded")
      for part in ("mean", "lo", "hi")],
    "n_chi2",
]

TABLE2_COLUMNS = [
    "effect",
    *[f"est_{m}_{p}" for m in METHOD_COLUMNS for p in ("mean", "lo", "hi")],
    "est_p_value",
    *[f"err_{m}_{p}" for m in METHOD_COLUMNS for p in ("mean", "lo", "hi")],
    "err_p_value",
    *[f"abserr_{m}_{p}" for m in METHOD_COLUMNS for p in ("mean", "lo", "hi")],
    "abserr_p_value",
    *[f"err_of_mean_{m}" for m in METHOD_COLUMNS],
    *[f"red_{m}_{p}" for m in ("matched", "multivariate") for p in ("mean", "lo", "hi")],
    "red_p_value",
    *[f"absred_{m}_{p}" for m in ("matched", "multivariate") for p in ("mean", "lo", "hi")],
    "absred_p_value",
    *[f"n_ok_{m}" for m in METHOD_COLUMNS],
    *[f"n_failed_{m}" for m in METHOD_COLUMNS],
]
FIG_COLUMNS = ["effect", "series", "mean", "lo", "hi", "n"]
POOLED_COLUMNS = ["test", "test_kind", "statistic", "dof", "p_value"]


def fmt(value) -> str:
    if value is None:
        return NA
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return NA if math.isnan(value) else repr(value)
    if isinstance(value, tuple):
        return ";".join(fmt(v) for v in value)
    return str(value)


def _ci_cells(ci):
    return [NA, NA, NA] if ci is None else [fmt(float(ci.mean)), fmt(float(ci.lower)), fmt(float(ci.upper))]


def _p(test):
    return NA if test is None else fmt(float(test.p_value))


def _write_csv(path: Path, header, rows) -> None:
    # write-then-rename so an interrupted write never leaves a truncated file
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_records(records, path) -> None:
    rows = ([fmt(getattr(r, name)) for name in RECORD_FIELDS] for r in records)
    _write_csv(Path(path), RECORD_FIELDS, rows)


def _parse(name, cell):
    kind = _TYPES[name]
    if kind == "str":
        return cell
    if cell == NA:
        return math.nan
    return int(cell) if kind == "int" else float(cell)


def read_records(path) -> list[ExperimentRecord]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return []
        if tuple(header) != RECORD_FIELDS:
            raise ValueError(f"{path}: unexpected header {header}")
        return [ExperimentRecord(**{n: _parse(n, c) for n, c in zip(header, row)}) for row in reader]


def table1_rows(summaries):
    for s in summaries:
        yield [
            fmt(s.block_effect),
            *_ci_cells(s.chi2_full),
            *_ci_cells(s.chi2_matched),
            _p(s.paired_chi2),
            *_ci_cells(s.bias_reduction),
            *_ci_cells(s.pct_matched),
            *_ci_cells(s.pct_excluded),
            fmt(0 if s.bias_reduction is None else s.bias_reduction.n),
        ]


def table2_rows(summaries):
    for s in summaries:
        yield [
            fmt(s.block_effect),
            *[c for m in METHOD_COLUMNS for c in _ci_cells(s.estimates[m])],
            _p(s.anova_estimates),
            *[c for m in METHOD_COLUMNS for c in _ci_cells(s.errors[m])],
            _p(s.anova_errors),
            *[c for m in METHOD_COLUMNS for c in _ci_cells(s.abs_errors[m])],
            _p(s.anova_abs_errors),
            *[fmt(float(s.error_of_mean[m])) for m in METHOD_COLUMNS],
            *[c for m in ("matched", "multivariate") for c in _ci_cells(s.reductions[m])],
            _p(s.paired_reduction),
            *[c for m in ("matched", "multivariate") for c in _ci_cells(s.abs_reductions[m])],
            _p(s.paired_abs_reduction),
            *[fmt(s.n_ok[m]) for m in METHOD_COLUMNS],
            *[fmt(s.n_failed[m]) for m in METHOD_COLUMNS],
        ]


def _series_row(effect, name, ci):
    n = NA if ci is None else fmt(ci.n)
    return [fmt(effect), name, *_ci_cells(ci), n]


def figure_rows(summaries, figure: int):
    for s in summaries:
        if figure == 1:
            yield _series_row(s.block_effect, "bias_reduction", s.bias_reduction)
            yield _series_row(s.block_effect, "pct_matched", s.pct_matched)
            yield _series_row(s.block_effect, "reduction_matched", s.reductions["matched"])
            yield _series_row(s.block_effect, "reduction_multivariate", s.reductions["multivariate"])
        elif figure == 2:
            t = fmt(-s.block_effect)
            yield [fmt(s.block_effect), "true_effect", t, t, t, fmt(s.n_records)]
            for m in METHOD_COLUMNS:
                yield _series_row(s.block_effect, f"estimate_{m}", s.estimates[m])
        elif figure == 3:
            for m in METHOD_COLUMNS:
                yield _series_row(s.block_effect, f"error_{m}", s.errors[m])
            for m in METHOD_COLUMNS:
                yield _series_row(s.block_effect, f"abs_error_{m}", s.abs_errors[m])
        else:
            raise ValueError(f"no figure {figure}")


def pooled_rows(records):
    for name, test in pooled_tests(records).items():
        if test is None:
            yield [name, NA, NA, NA, NA]
        else:
            yield [name, test.test_kind, fmt(float(test.statistic)), fmt(test.dof), fmt(float(test.p_value))]


def emit_outputs(records, summaries, output_dir) -> list[Path]:
    """Write every output file; ``records.csv`` goes first so it survives a
    failure further down."""
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    def put(name, header, rows):
        path = out / name
        _write_csv(path, header, rows)
        written.append(path)

    put("records.csv", RECORD_FIELDS, ([fmt(getattr(r, n)) for n in RECORD_FIELDS] for r in records))
    put("table1.csv", TABLE1_COLUMNS, table1_rows(summaries))
    put("table2.csv", TABLE2_COLUMNS, table2_rows(summaries))
    for k in (1, 2, 3):
        put(f"fig{k}.csv", FIG_COLUMNS, figure_rows(summaries, k))
    put("pooled_tests.csv", POOLED_COLUMNS, pooled_rows(records))
    return written
