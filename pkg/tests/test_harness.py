import json
import math
from dataclasses import replace

import numpy as np
import pytest

from causal_bench.exceptions import SpecError
from causal_bench.harness import (
    ExperimentRecord,
    RunConfig,
    emit_outputs,
    experiment_seed,
    load_config,
    read_records,
    resolve_workers,
    run_experiment,
    run_grid,
    run_records,
    summarize_block,
    summarize_records,
    write_records,
)
from causal_bench.harness.cli import main
from causal_bench.harness.config import WORKERS_ENV, default_effect_grid
from causal_bench.harness.outputs import TABLE1_COLUMNS, TABLE2_COLUMNS
from causal_bench.simulation import CohortSpec

SMALL = RunConfig(effect_grid=(1.0, 2.5), reps_per_block=3, parallelism=1)


def _record(effect=5.0, rep=0, t_ua=-2.225, t_match=-2.922, t_multi=-4.521, **kw):
    base = dict(block_effect=effect, rep_index=rep, seed=rep, n_total=500, n_treated=175,
                t_ua=t_ua, t_match=t_match, t_multi=t_multi, chi2_full=220.7, chi2_matched=3.631,
                n_matched=350, pct_matched=70.0, pct_excluded=30.0)
    base.update(kw)
    return ExperimentRecord(**base)


# ------------------------------------------------------------------ config

def test_default_grid_is_fifty_blocks():
    grid = default_effect_grid()
    assert len(grid) == 50 and grid[0] == 0.1 and grid[-1] == 5.0
    cfg = RunConfig()
    assert cfg.n_experiments == 10_000
    assert cfg.n_experiments * cfg.cohort_spec.n_patients == 5_000_000


def test_config_json_round_trip(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(SMALL.to_dict()))
    assert load_config(path) == SMALL


def test_config_rejects_unknown_keys(tmp_path):
    for bad in ({"reps": 3}, {"cohort_spec": {"n_patient": 5}}, {"match_spec": {"caliper": 0.2}}):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(bad))
        with pytest.raises(SpecError, match="unknown key"):
            load_config(path)


def test_config_validation():
    with pytest.raises(SpecError):
        RunConfig(effect_grid=())
    with pytest.raises(SpecError):
        RunConfig(effect_grid=(-1.0,))
    with pytest.raises(SpecError):
        RunConfig(reps_per_block=0)


def test_resolve_workers(monkeypatch):
    monkeypatch.delenv(WORKERS_ENV, raising=False)
    assert resolve_workers(3, SMALL) == 3
    assert resolve_workers(None, SMALL) == 1
    monkeypatch.setenv(WORKERS_ENV, "5")
    assert resolve_workers(None, SMALL) == 5
    assert resolve_workers(2, SMALL) == 2


# ------------------------------------------------------------------ experiments

def test_run_experiment_deterministic():
    assert run_experiment(SMALL, 2.5, 1) == run_experiment(SMALL, 2.5, 1)


def test_run_experiment_fields():
    r = run_experiment(SMALL, 1.0, 0)
    assert r.seed == experiment_seed(SMALL.base_seed, 1.0, 0)
    assert r.n_matched % 2 == 0 and r.n_matched <= r.n_total
    assert r.pct_matched + r.pct_excluded == pytest.approx(100.0)
    assert not (r.fail_ua or r.fail_match or r.fail_multi)


def test_failures_are_recorded_not_raised():
    # five patients: fits separate or degenerate, the run must still return
    cfg = replace(SMALL, cohort_spec=CohortSpec(n_patients=5))
    recs = [run_experiment(cfg, 1.0, i) for i in range(20)]
    assert any(r.fail_ua for r in recs)
    for r in recs:
        assert math.isnan(r.t_ua) == bool(r.fail_ua)
        assert math.isnan(r.t_match) == bool(r.fail_match)


def test_seed_independent_of_grid_composition():
    wide = run_records(replace(SMALL, effect_grid=(0.5, 1.0, 2.5)), workers=1)
    narrow = run_records(replace(SMALL, effect_grid=(2.5,)), workers=1)
    assert [r for r in wide if r.block_effect == 2.5] == narrow


def test_serial_and_parallel_identical():
    assert run_records(SMALL, workers=1) == run_records(SMALL, workers=3)


def test_smoke_counts(tmp_path):
    cfg = RunConfig(effect_grid=(1.0,), reps_per_block=2)
    records, summaries = run_grid(cfg, workers=1, output_dir=tmp_path)
    assert len(records) == 2 and len(summaries) == 1


# ------------------------------------------------------------------ summaries

def test_summary_reconstructs_table2_reductions():
    s = summarize_block([_record(rep=i) for i in range(4)])
    assert s.errors["unadjusted"].mean == pytest.approx(0.555, abs=1e-3)
    assert s.errors["multivariate"].mean == pytest.approx(0.0958, abs=1e-3)
    assert s.reductions["multivariate"].mean == pytest.approx(0.459, abs=1e-3)
    assert s.reductions["matched"].mean == pytest.approx(0.139, abs=1e-3)
    assert s.bias_reduction.mean == pytest.approx(0.98355, abs=5e-5)
    # identical records -> zero-width intervals
    for ci in (s.estimates["unadjusted"], s.chi2_full, s.pct_matched):
        assert ci.lower == ci.mean == ci.upper


def test_summary_accounting_with_failures():
    recs = [_record(rep=i) for i in range(5)]
    recs[1] = replace(recs[1], t_match=math.nan, fail_match="SeparationError: x")
    recs[3] = replace(recs[3], t_multi=math.nan, fail_multi="SeparationError: x")
    s = summarize_block(recs)
    for m in ("unadjusted", "matched", "multivariate"):
        assert s.n_ok[m] + s.n_failed[m] == 5
    assert s.n_failed["matched"] == 1 and s.estimates["matched"].n == 4
    assert s.paired_reduction.dof == 2  # pairwise complete: 3 pairs


def test_zero_block_errors_missing():
    s = summarize_block([_record(effect=0.0, rep=i, t_ua=0.1 * i) for i in range(3)])
    assert s.errors["unadjusted"] is None
    assert math.isnan(s.error_of_mean["unadjusted"])
    assert s.estimates["unadjusted"] is not None


def test_summarize_block_rejects_mixed_blocks():
    with pytest.raises(ValueError):
        summarize_block([_record(effect=1.0), _record(effect=2.0)])


def test_error_of_mean_reported():
    recs = [_record(rep=0, t_ua=-2.0), _record(rep=1, t_ua=-3.0)]
    s = summarize_block(recs)
    assert s.error_of_mean["unadjusted"] == pytest.approx(abs(-2.5 + 5) / 5)


# ------------------------------------------------------------------ outputs

def test_empty_outputs_are_header_only(tmp_path):
    emit_outputs([], [], tmp_path)
    for name in ("records.csv", "table1.csv", "table2.csv", "fig1.csv", "fig2.csv", "fig3.csv"):
        lines = (tmp_path / name).read_text().splitlines()
        assert len(lines) == 1
    assert (tmp_path / "table1.csv").read_text().strip().split(",") == TABLE1_COLUMNS
    assert read_records(tmp_path / "records.csv") == []


def test_records_round_trip(tmp_path):
    recs = run_records(SMALL, workers=1)
    recs.append(_record(effect=9.0, t_match=math.nan, fail_match="EmptyMatchError: empty matched sample"))
    write_records(recs, tmp_path / "r.csv")
    back = read_records(tmp_path / "r.csv")
    assert len(back) == len(recs)
    for a, b in zip(recs, back):
        for name in a.__dataclass_fields__:
            x, y = getattr(a, name), getattr(b, name)
            assert (isinstance(x, float) and math.isnan(x) and math.isnan(y)) or x == y
    assert "NA" in (tmp_path / "r.csv").read_text()


def test_tables_shape_and_offline_consistency(tmp_path):
    records, summaries = run_grid(SMALL, workers=1, output_dir=tmp_path / "a")
    table2 = (tmp_path / "a" / "table2.csv").read_text().splitlines()
    assert table2[0].split(",") == TABLE2_COLUMNS
    assert len(table2) - 1 == len(SMALL.effect_grid)
    back = read_records(tmp_path / "a" / "records.csv")
    emit_outputs(back, summarize_records(back), tmp_path / "b")
    for name in ("records.csv", "table1.csv", "table2.csv", "fig1.csv", "fig2.csv", "fig3.csv", "pooled_tests.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes(), name


def test_figure_series(tmp_path):
    run_grid(SMALL, workers=1, output_dir=tmp_path)
    fig2 = (tmp_path / "fig2.csv").read_text().splitlines()
    assert len(fig2) - 1 == 4 * len(SMALL.effect_grid)
    assert fig2[1].startswith("1.0,true_effect,-1.0,-1.0,-1.0")


# ------------------------------------------------------------------ CLI

def test_cli_smoke(capsys):
    assert main(["smoke"]) == 0
    assert "ok" in capsys.readouterr().out


def test_cli_simulate_and_summarize(tmp_path, monkeypatch):
    monkeypatch.setenv(WORKERS_ENV, "2")
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"reps_per_block": 2, "cohort_spec": {"n_patients": 200}}))
    out = tmp_path / "out"
    assert main(["simulate", "--config", str(cfg), "--out", str(out), "--blocks", "1,2", "--reps", "3",
                 "--seed", "7"]) == 0
    recs = read_records(out / "records.csv")
    assert len(recs) == 6 and {r.block_effect for r in recs} == {1.0, 2.0}
    assert json.loads((out / "config.json").read_text())["base_seed"] == 7
    again = tmp_path / "again"
    assert main(["summarize", "--records", str(out / "records.csv"), "--out", str(again)]) == 0
    assert (again / "table1.csv").read_bytes() == (out / "table1.csv").read_bytes()


def test_cli_bad_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1
