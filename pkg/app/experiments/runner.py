import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor, as_completed
from pathlib import Path
from typing import Any, Callable, Optional, Union

import pandas as pd
from pydantic import BaseModel, computed_field
from tqdm import tqdm

from app.energy import load_energy_config, system_energy
from app.errors import TraceParseError, UsageError
from app.experiments.models import CSV_COLUMNS, ConfigFile, ExperimentSpec, Report
from app.isa.trace import TraceRecord, read_trace, render_trace
from app.machine import SystemConfig, Workload, llcmpi, load_system_config
from app.machine import run as simulate_workload
from app.utils.io import append_csv_rows, atomic_write_text
from app.utils.report import ratio_table, results_frame
from app.workloads import CnnSpec, ModelSpec, build, working_set

logger = logging.getLogger(__name__)

VERSION = "0.1.0"
THREADS_ENV = "ALPINE_SIM_THREADS"
DEFAULT_THREADS = 4

PathLike = Union[str, Path]


def sweep_threads() -> int:
    raw = os.environ.get(THREADS_ENV)
    if not raw:
        return DEFAULT_THREADS
    try:
        value = int(raw)
    except ValueError:
        raise UsageError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise UsageError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return value


def check_config_file(config_path: Optional[PathLike]) -> None:
    """Reject config files with unknown sections before any section is applied."""
    if config_path is None:
        return
    path = Path(config_path)
    if not path.is_file():
        raise UsageError(f"config file not found: {path}")
    ConfigFile.model_validate_json(path.read_text(encoding="utf-8"))


def system_for(spec: ExperimentSpec, config_path: Optional[PathLike] = None) -> SystemConfig:
    overrides: dict[str, Any] = {"coupling": spec.coupling}
    if spec.tile_latency_ns is not None:
        overrides["tile_latency_ns"] = spec.tile_latency_ns
    return load_system_config(config_path, spec.profile, **overrides)


def prepare(spec: ExperimentSpec, config_path: Optional[PathLike] = None) -> tuple[SystemConfig, ModelSpec, Workload]:
    """Machine, model and freshly built workload (with newly programmed tiles) of an experiment."""
    # imported here: the dataset module itself depends on the experiment models
    from app.data.dataset import InferenceInputs

    cfg = system_for(spec, config_path)
    model = spec.model_spec()
    inputs = None if isinstance(model, CnnSpec) else InferenceInputs(model).as_array()
    return cfg, model, build(model, spec.mapping, cfg, inputs=inputs)


def simulate(spec: ExperimentSpec, config_path: Optional[PathLike] = None,
             trace: Optional[list[TraceRecord]] = None) -> Report:
    """Build and simulate one experiment; ``trace`` collects its CM_* instruction stream."""
    cfg, model, workload = prepare(spec, config_path)
    logger.info("simulating %s on %d cores", workload.name, workload.n_cores_used)
    stats = simulate_workload(workload, cfg, trace=trace)
    table, aimc = load_energy_config(config_path, spec.profile)
    energy = system_energy(stats, table, aimc, cfg.llc_size)
    return Report(
        metadata={
            "simulator": "alpine-sim",
            "version": VERSION,
            "run_id": spec.run_id,
            "group": spec.group,
            "cores_used": workload.n_cores_used,
        },
        spec=spec,
        workload=workload.name,
        stats=stats,
        energy=energy,
        llcmpi=llcmpi(stats),
        working_set=None if isinstance(model, CnnSpec) else working_set(model),
    )


def save_report(report: Report, out_dir: Path) -> Path:
    path = out_dir / f"{report.spec.run_id}.json"
    atomic_write_text(path, report.model_dump_json(indent=2) + "\n")
    return path


def write_schema(out_dir: Path) -> Path:
    return atomic_write_text(out_dir / "report.schema.json", json.dumps(Report.model_json_schema(), indent=2) + "\n")


def write_plotdata(report: Report, out_dir: Path) -> list[Path]:
    """Time distribution over sub-ROIs and per-core utilization of one run."""
    plot_dir = out_dir / "plotdata"
    stats = report.stats
    total = sum(stats.subroi_cycles.values()) or 1
    dist = pd.DataFrame(
        [{"subroi": tag, "cycles": c, "seconds": f"{c / stats.core_freq:.6e}", "share": round(c / total, 6)}
         for tag, c in stats.subroi_cycles.items()],
        columns=["subroi", "cycles", "seconds", "share"],
    )
    util = pd.DataFrame(
        [{"core_id": c.core_id, "idle_pct": round(c.idle_pct, 4), "ipc": round(c.ipc, 6),
          "active_cycles": c.active_cycles, "idle_cycles": c.idle_cycles, "wfm_cycles": c.wfm_cycles}
         for c in stats.cores],
    )
    run_id = report.spec.run_id
    util_name = f"{run_id}_cnn_utilization.csv" if report.spec.model == "cnn" else f"{run_id}_utilization.csv"
    return [
        atomic_write_text(plot_dir / f"{run_id}_time_distribution.csv", dist.to_csv(index=False, lineterminator="\n")),
        atomic_write_text(plot_dir / util_name, util.to_csv(index=False, lineterminator="\n")),
    ]


def _rows_frame(reports: list[Report]) -> pd.DataFrame:
    return results_frame([r.csv_row() for r in reports], CSV_COLUMNS)


def run_experiment(
    spec: ExperimentSpec,
    out_dir: PathLike,
    config_path: Optional[PathLike] = None,
    emit_plotdata: bool = False,
    write_trace: bool = False,
) -> tuple[Report, Path]:
    """
    Simulate one experiment and write its outputs.

    Writes ``<run_id>.json``, appends a row to ``results.csv`` and refreshes
    ``report.schema.json``; optionally the plot data files and the CM_* trace.

    Returns:
        The report and the path of its JSON file.
    """
    check_config_file(config_path)
    out_dir = Path(out_dir)
    trace: Optional[list[TraceRecord]] = [] if write_trace else None
    report = simulate(spec, config_path, trace)
    path = save_report(report, out_dir)
    append_csv_rows(out_dir / "results.csv", _rows_frame([report]))
    write_schema(out_dir)
    if emit_plotdata:
        write_plotdata(report, out_dir)
    if trace is not None:
        atomic_write_text(out_dir / f"{spec.run_id}.trace", render_trace(trace, spec.model_dump_json()))
    return report, path


def sweep(
    specs: list[ExperimentSpec],
    out_dir: PathLike,
    config_path: Optional[PathLike] = None,
    max_workers: Optional[int] = None,
    emit_plotdata: bool = False,
    show_progress: bool = True,
    progress_callback: Optional[Callable[[int, int], None]] = None,
) -> tuple[list[dict], pd.DataFrame]:
    """
    Run experiments concurrently and aggregate them.

    Each experiment runs in its own simulator; a failing experiment is recorded
    with its error string and does not stop the others. Reports, CSV rows and the
    ratio table are written after all runs finished.

    Returns:
        Per-experiment dicts with keys ``spec``, ``report`` and ``error``, and the
        ratio table (also written to ``ratios.csv``).

    Raises:
        MissingBaselineError: if an analog run has no digital run in its group.
    """
    check_config_file(config_path)
    out_dir = Path(out_dir)
    workers = max_workers or sweep_threads()
    results: list[Optional[dict]] = [None] * len(specs)

    def process_single(idx_spec: tuple[int, ExperimentSpec]) -> tuple[int, dict]:
        idx, spec = idx_spec
        try:
            return idx, {"spec": spec, "report": simulate(spec, config_path), "error": None}
        except Exception as e:
            logger.warning("%s failed: %s", spec.run_id, e)
            return idx, {"spec": spec, "report": None, "error": str(e)}

    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures = {executor.submit(process_single, item): item for item in enumerate(specs)}

        iterator = as_completed(futures)
        if show_progress:
            iterator = tqdm(iterator, total=len(specs), desc="Simulating")

        for future in iterator:
            idx, result = future.result()
            results[idx] = result
            if progress_callback:
                completed = sum(1 for r in results if r is not None)
                progress_callback(completed, len(specs))

    reports = [r["report"] for r in results if r["report"] is not None]
    for report in reports:
        save_report(report, out_dir)
        if emit_plotdata:
            write_plotdata(report, out_dir)
    rows = _rows_frame(reports)
    append_csv_rows(out_dir / "results.csv", rows)
    write_schema(out_dir)

    rows.insert(0, "group", [r.spec.group for r in reports])
    ratios = ratio_table(rows)
    atomic_write_text(out_dir / "ratios.csv", ratios.to_csv(index=False, lineterminator="\n"))
    return results, ratios


class ReplayResult(BaseModel):
    run_id: str
    records: int
    regenerated_match: bool
    faults: int
    tiles_match: bool
    stats_match: bool

    @computed_field
    @property
    def ok(self) -> bool:
        return self.regenerated_match and self.faults == 0 and self.tiles_match and self.stats_match


def replay(trace_path: PathLike, config_path: Optional[PathLike] = None) -> ReplayResult:
    """
    Re-execute a recorded CM_* trace.

    The experiment named in the trace header is rebuilt and simulated twice: once
    recording its instruction stream, which must equal the file, and once executing
    the stream its builders generate on its tiles. A third run takes every CM_*
    instruction from the file instead, matched burst by burst against the rebuilt
    programs, and executes it on freshly programmed tiles; its tile states must equal
    the second run's and its statistics the first run's.
    """
    check_config_file(config_path)
    spec_json, records = read_trace(trace_path)
    if spec_json is None:
        raise TraceParseError("trace has no '# spec:' header", line_no=1)
    spec = ExperimentSpec.model_validate_json(spec_json)

    regenerated: list[TraceRecord] = []
    first = simulate(spec, config_path, regenerated)

    cfg, _, executed = prepare(spec, config_path)
    simulate_workload(executed, cfg, execute_tiles=True)

    _, _, replayed = prepare(spec, config_path)
    third = simulate_workload(replayed, cfg, execute_tiles=True, replay=records)
    faults = sum(t.faults for t in replayed.tiles.values())
    tiles_match = all(
        replayed.tiles[k].dump_state() == executed.tiles[k].dump_state() for k in replayed.tiles
    )
    logger.info("replayed %d records of %s", len(records), spec.run_id)
    return ReplayResult(
        run_id=spec.run_id,
        records=len(records),
        regenerated_match=regenerated == records,
        faults=faults,
        tiles_match=tiles_match,
        stats_match=first.stats == third,
    )
