import json
import math
import os

import numpy as np
import pandas as pd
import pytest

from exceptions import DatasetIOError, PreconditionError, SweepError
from schemas import ARange, SweepJob, SweepKind, SweepManifest
from utils import sweep_engine
from utils.interval_dynamics import sigma_a
from utils.sweep_engine import (
    CSV_COLUMNS, bifurcation_scan, cell_coordinates, cell_rng, cell_start, compute_cell, dataset_to_csv,
    run_sweep, settled_period
)

def _job(b_values, a_min, a_max, steps=0, **kwargs):
    kwargs.setdefault("transient", 2000)
    kwargs.setdefault("samples_per_cell", 16)
    return SweepJob(b_values=b_values, a_range=ARange(min=a_min, max=a_max, steps=steps), **kwargs)

def _values(rows, cell):
    return [r.value for r in rows if r.cell == cell]

def test_cells_are_b_major():
    job = _job([0.3, 0.7], 6.0, 12.0, steps=2)
    assert job.n_cells == 6
    assert cell_coordinates(job, 0) == (6.0, 0.3)
    assert cell_coordinates(job, 4) == (9.0, 0.7)

def test_threshold_cells_carry_the_cap():
    job = _job([0.3, 0.4], 4.0, 50.0, kind=SweepKind.threshold)
    assert job.n_cells == 2
    assert cell_coordinates(job, 1) == (50.0, 0.4)

def test_mirrored_starts():
    u = cell_start(cell_rng(7, 3), 0.3)
    assert 0.01 <= u <= 0.99
    assert cell_start(cell_rng(7, 3), 0.7) == 1.0 - u

def test_cell_streams_are_independent():
    assert cell_rng(0, 1).uniform() != cell_rng(0, 2).uniform()
    assert cell_rng(0, 1).uniform() == cell_rng(0, 1).uniform()

def test_settled_period():
    assert settled_period([0.5] * 10) == 1
    assert settled_period([0.1, 0.9] * 8) == 2
    assert settled_period(list(np.linspace(0.0, 1.0, 32))) is None

def test_stable_fixed_point_cells():
    rows = run_sweep(_job([0.5], 4.0, 7.5, steps=7)).rows
    assert len(rows) == 8 * 16
    assert all(abs(r.value - 0.5) <= 1e-6 for r in rows)
    assert all(r.flags == ["period:1"] for r in rows)

def test_neutral_fixed_point_cell():
    result = run_sweep(_job([0.5], 8.0, 8.0))
    assert all(r.flags == ["neutral"] for r in result.rows)
    assert all(abs(r.value - 0.5) <= 0.05 for r in result.rows)
    assert result.manifest.flagged_cells == {0: ["neutral"]}

def test_two_cycle_cell():
    rows = run_sweep(_job([0.5], 10.0, 10.0)).rows
    sigma = sigma_a(10.0)
    assert all(min(abs(r.value - sigma), abs(r.value - (1 - sigma))) <= 1e-8 for r in rows)
    assert {round(r.value, 6) for r in rows} == {round(sigma, 6), round(1 - sigma, 6)}
    assert rows[0].flags == ["period:2"]

@pytest.mark.parametrize("workers", [4, 8])
def test_rows_independent_of_worker_count(workers):
    job = _job([0.3, 0.5, 0.8], 6.0, 20.0, steps=6, seed=11)
    serial = run_sweep(job, workers=1)
    parallel = run_sweep(job, workers=workers)
    assert parallel.rows == serial.rows
    assert parallel.manifest.flagged_cells == serial.manifest.flagged_cells
    assert parallel.manifest.workers == workers

def test_mirror_agreement_on_periodic_cells():
    job = _job([0.3, 0.7], 6.0, 12.0, steps=3)
    rows = run_sweep(job).rows
    n_a = len(job.a_grid)
    compared = 0
    for i in range(n_a):
        left = _values(rows, i)
        right = _values(rows, n_a + i)
        flags = rows[i * 16].flags
        if not (flags[0].startswith("period:") and rows[(n_a + i) * 16].flags == flags):
            continue
        m = int(flags[0].split(":")[1])
        mirrored = sorted(1 - v for v in left[:m])
        direct = sorted(right[:m])
        assert mirrored == pytest.approx(direct, abs=1e-9)
        compared += 1
    assert compared >= 1

def test_bifurcation_scan_forces_kind():
    job = _job([0.5], 5.0, 5.0, kind=SweepKind.cesaro)
    rows = bifurcation_scan(job)
    assert len(rows) == 16

def test_lyapunov_cells():
    rows = run_sweep(_job([0.5], 5.0, 5.0, kind=SweepKind.lyapunov)).rows
    assert len(rows) == 1
    assert rows[0].value < 0

def test_cesaro_cells():
    rows = run_sweep(_job([0.4], 14.0, 14.0, kind=SweepKind.cesaro, samples_per_cell=20_000)).rows
    assert len(rows) == 1
    assert rows[0].flags == []
    assert abs(rows[0].value - 0.4) <= 2 * math.log(2 ** 7) / (14.0 * 20_000)

def test_symmetric_threshold_cell_is_flagged():
    result = run_sweep(_job([0.5], 4.0, 50.0, kind=SweepKind.threshold, threshold_tol=1e-2))
    assert math.isnan(result.rows[0].value)
    assert result.manifest.flagged_cells == {0: ["not_found"]}

def test_workers_must_be_positive():
    with pytest.raises(PreconditionError):
        run_sweep(_job([0.5], 5.0, 5.0), workers=0)

@pytest.mark.parametrize("workers", [1, 2])
def test_cell_failure_names_the_cell(monkeypatch, workers):
    original = compute_cell

    def flaky(job, cell):
        if cell == 1:
            raise RuntimeError("boom")
        return original(job, cell)

    monkeypatch.setattr(sweep_engine, "compute_cell", flaky)
    with pytest.raises(SweepError) as excinfo:
        run_sweep(_job([0.5], 5.0, 6.0, steps=2), workers=workers)
    assert excinfo.value.details["cell"] == 1

# ---------------------------------------------------------- serialization

def test_csv_layout():
    rows = run_sweep(_job([0.5], 5.0, 5.0, samples_per_cell=2)).rows
    text = dataset_to_csv(rows)
    assert text.startswith("cell,a,b,sample_index,value\r\n")
    assert text.count("\r\n") == 3
    first = text.split("\r\n")[1].split(",")
    assert float(first[4]) == rows[0].value

def test_written_dataset_round_trips(tmp_path):
    job = _job([0.3, 0.5], 6.0, 9.0, steps=3, seed=5)
    result = run_sweep(job, out_dir=str(tmp_path / "out"), name="grid")
    assert result.csv_path.endswith("grid.csv")

    with open(result.manifest_path, encoding="utf-8") as handle:
        document = json.load(handle)
    for key in ("job", "seed", "tool_version", "rows", "started_at", "elapsed_ms", "workers"):
        assert key in document
    manifest = SweepManifest.model_validate(document)
    assert manifest.job == job
    assert manifest.rows == len(result.rows)

    frame = pd.read_csv(result.csv_path, float_precision="round_trip")
    assert list(frame.columns) == CSV_COLUMNS
    assert len(frame) == len(result.rows)
    assert frame["value"].tolist() == [r.value for r in result.rows]
    assert not [p for p in (tmp_path / "out").iterdir() if p.name.startswith(".tmp-")]

def test_unwritable_output_directory(tmp_path):
    blocker = tmp_path / "taken"
    blocker.write_text("not a directory")
    with pytest.raises(DatasetIOError):
        run_sweep(_job([0.5], 5.0, 5.0), out_dir=str(blocker))

def test_missing_output_subdirectory(tmp_path):
    with pytest.raises(DatasetIOError) as excinfo:
        run_sweep(_job([0.5], 5.0, 5.0, samples_per_cell=2), out_dir=str(tmp_path), name="missing/sub")
    assert excinfo.value.details["path"] == os.path.join(str(tmp_path), "missing/sub.csv")
    assert not list(tmp_path.iterdir())

def test_written_files_identical_across_worker_counts(tmp_path):
    job = _job([0.3, 0.6], 6.0, 14.0, steps=4, seed=3)
    serial = run_sweep(job, workers=1, out_dir=str(tmp_path / "one"))
    parallel = run_sweep(job, workers=8, out_dir=str(tmp_path / "eight"))
    with open(serial.csv_path, "rb") as a, open(parallel.csv_path, "rb") as b:
        assert a.read() == b.read()

@pytest.mark.slow
def test_threshold_estimates_mirror():
    job = _job([0.3, 0.7], 4.0, 1e4, kind=SweepKind.threshold, threshold_tol=1e-2)
    rows = run_sweep(job, workers=2).rows
    assert not any(r.flags for r in rows)
    assert rows[0].value == pytest.approx(rows[1].value, abs=2e-2)
