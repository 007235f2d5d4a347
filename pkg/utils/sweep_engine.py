"""Parameter sweeps over (a, b) grids and their CSV / JSON serialization."""
import logging
import math
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor, as_completed
from datetime import datetime, timezone
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from config import settings
from exceptions import (
    CertificateError, DatasetIOError, NotFoundError, PreconditionError, SweepError
)
from schemas import DatasetRow, Params, StabilityEnum, SweepJob, SweepKind, SweepManifest, SweepResult
from utils.interval_dynamics import cesaro_average, lyapunov_exponent, threshold_a
from utils.map_core import _component, stability_label

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["cell", "a", "b", "sample_index", "value"]
PERIOD_TOL = 1e-9
PERIOD_SEARCH_MAX = 64

def cell_rng(seed: int, cell: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(cell,)))

def cell_coordinates(job: SweepJob, cell: int) -> Tuple[float, float]:
    """(a, b) of a cell; cells are b-major, threshold cells carry the search cap as a."""
    if job.kind == SweepKind.threshold:
        return job.a_range.max, job.b_values[cell]
    grid = job.a_grid
    b_index, a_index = divmod(cell, len(grid))
    return grid[a_index], job.b_values[b_index]

def cell_start(rng: np.random.Generator, b: float) -> float:
    u = float(rng.uniform(0.01, 0.99))
    return u if b <= 0.5 else 1.0 - u

def settled_period(values: List[float], tol: float = PERIOD_TOL) -> Optional[int]:
    arr = np.asarray(values, dtype=float)
    for m in range(1, min(PERIOD_SEARCH_MAX, len(arr) // 2) + 1):
        if np.max(np.abs(arr[m:] - arr[:-m])) <= tol:
            return m
    return None

def _bifurcation_values(job: SweepJob, a: float, b: float, x0: float) -> Tuple[List[float], List[str]]:
    x = x0
    for _ in range(job.transient):
        x = _component(a, b, x, x)
    values = []
    for _ in range(job.samples_per_cell):
        values.append(x)
        x = _component(a, b, x, x)
    period = settled_period(values)
    if period is not None:
        flags = [f"period:{period}"]
    elif stability_label(1.0 - a * b * (1.0 - b)) == StabilityEnum.neutral:
        # the interior fixed point sits at multiplier -1; orbits approach it polynomially
        flags = ["neutral"]
    else:
        flags = ["aperiodic"]
    return values, flags

def compute_cell(job: SweepJob, cell: int) -> Tuple[List[DatasetRow], List[str]]:
    a, b = cell_coordinates(job, cell)
    rng = cell_rng(job.seed, cell)
    flags: List[str] = []

    if job.kind == SweepKind.threshold:
        try:
            values = [threshold_a(b, tol=job.threshold_tol, a_max=a).estimate]
        except NotFoundError:
            values, flags = [math.nan], ["not_found"]
    else:
        p = Params(a=a, b=b)
        x0 = cell_start(rng, b)
        if job.kind == SweepKind.bifurcation:
            values, flags = _bifurcation_values(job, a, b, x0)
        elif job.kind == SweepKind.lyapunov:
            values = [lyapunov_exponent(p, x0, max(1000, job.samples_per_cell), burn_in=job.transient)]
        else:
            try:
                report = cesaro_average(p, x0, job.samples_per_cell, burn_in=job.transient)
                values = [report.average]
                if not report.within_bound:
                    flags = ["outside_bound"]
            except CertificateError:
                values, flags = [math.nan], ["no_certificate"]

    rows = [
        DatasetRow(cell=cell, a=a, b=b, sample_index=i, value=v, flags=flags)
        for i, v in enumerate(values)
    ]
    return rows, flags

def _executor(workers: int):
    if settings.SWEEP_EXECUTOR == "process":
        return ProcessPoolExecutor(max_workers=workers)
    return ThreadPoolExecutor(max_workers=workers)

def _run_cells(job: SweepJob, workers: int) -> List[Tuple[List[DatasetRow], List[str]]]:
    results: List[Optional[Tuple[List[DatasetRow], List[str]]]] = [None] * job.n_cells
    if workers == 1:
        for cell in range(job.n_cells):
            try:
                results[cell] = compute_cell(job, cell)
            except Exception as exc:
                raise SweepError(f"cell {cell} failed: {exc}", cell=cell) from exc
        return results

    with _executor(workers) as pool:
        futures = {pool.submit(compute_cell, job, cell): cell for cell in range(job.n_cells)}
        for future in as_completed(futures):
            cell = futures[future]
            try:
                results[cell] = future.result()
            except Exception as exc:
                for pending in futures:
                    pending.cancel()
                raise SweepError(f"cell {cell} failed: {exc}", cell=cell) from exc
    return results

def run_sweep(
    job: SweepJob,
    workers: int = 1,
    out_dir: Optional[str] = None,
    name: str = "sweep"
) -> SweepResult:
    """Evaluate every cell of ``job`` and, with ``out_dir``, write
    ``<name>.csv`` and ``<name>.manifest.json`` there.

    Rows come back in ascending cell order whatever the worker count.
    """
    if workers < 1:
        raise PreconditionError(f"workers must be at least 1, got {workers}", operation="run_sweep")
    started_at = datetime.now(timezone.utc)
    clock = time.perf_counter()
    logger.info(f"Sweep {name}: {job.n_cells} cell(s), kind={job.kind.value}, workers={workers}")

    rows: List[DatasetRow] = []
    flagged: Dict[int, List[str]] = {}
    for cell, (cell_rows, flags) in enumerate(_run_cells(job, workers)):
        rows.extend(cell_rows)
        if flags:
            flagged[cell] = flags

    manifest = SweepManifest(
        job=job,
        seed=job.seed,
        tool_version=settings.APP_VERSION,
        rows=len(rows),
        started_at=started_at,
        elapsed_ms=(time.perf_counter() - clock) * 1000.0,
        workers=workers,
        flagged_cells=flagged
    )
    result = SweepResult(rows=rows, manifest=manifest)
    if out_dir is not None:
        result.csv_path, result.manifest_path = write_dataset(rows, manifest, out_dir, name)
    return result

def bifurcation_scan(job: SweepJob, workers: int = 1) -> List[DatasetRow]:
    return run_sweep(job.model_copy(update={"kind": SweepKind.bifurcation}), workers).rows

# ---------------------------------------------------------- serialization

def rows_to_frame(rows: List[DatasetRow]) -> pd.DataFrame:
    return pd.DataFrame(
        [(r.cell, r.a, r.b, r.sample_index, r.value) for r in rows],
        columns=CSV_COLUMNS
    )

def frame_to_csv(frame: pd.DataFrame) -> str:
    return frame.to_csv(index=False, float_format="%.17g", lineterminator="\r\n")

def dataset_to_csv(rows: List[DatasetRow]) -> str:
    return frame_to_csv(rows_to_frame(rows))

def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(path) or "."
    tmp_path = None
    try:
        fd, tmp_path = tempfile.mkstemp(prefix=".tmp-", dir=directory)
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp_path, path)
    except OSError as exc:
        if tmp_path is not None and os.path.exists(tmp_path):
            os.remove(tmp_path)
        logger.error(f"Failed to write {path}: {exc}")
        raise DatasetIOError(f"could not write {path}: {exc}", path=path) from exc

def write_dataset(
    rows: List[DatasetRow],
    manifest: SweepManifest,
    out_dir: str,
    name: str = "sweep"
) -> Tuple[str, str]:
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise DatasetIOError(f"could not create {out_dir}: {exc}", path=out_dir) from exc
    csv_path = os.path.join(out_dir, f"{name}.csv")
    manifest_path = os.path.join(out_dir, f"{name}.manifest.json")
    _atomic_write(csv_path, dataset_to_csv(rows))
    _atomic_write(manifest_path, manifest.model_dump_json(indent=2))
    logger.info(f"Wrote {len(rows)} row(s) to {csv_path}")
    return csv_path, manifest_path
