"""Execute scenario configs and write deterministic artifact files.

Every experiment is computed in memory first; files only touch disk once
the whole scenario has succeeded, so a crash can never leave a partial
artifact set behind without the ``FAILED`` marker.  Nothing written here
contains a timestamp — two runs of the same config are byte-identical.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .config import (
    BornSamplingExperiment,
    Experiment,
    OffsetAverageExperiment,
    QGridExperiment,
    ScenarioConfig,
    SequentialExperiment,
    SubTauExperiment,
    TrajectoryExperiment,
    load_config,
)
from .errors import InvariantViolation
from .ergodic import (
    format_statistics,
    offset_window_average,
    same_outcome_measure,
    sample_born,
    sub_tau_correlation,
)
from .hilbert import evolve, expectation
from .measurement import (
    format_measurement_log,
    format_sequence_distribution,
    sequence_records,
    SequenceDistribution,
)
from .microstate import dump_trajectory
from .partition import dump_partition
from .qgrid import (
    format_cell_probabilities,
    load_grid,
    position_partition,
    window_renormalize,
)

__all__ = ["run_scenario", "run_experiment", "FAILURE_MARKER"]

FAILURE_MARKER = "FAILED"

_KIND_NAMES = {
    TrajectoryExperiment: "trajectory",
    BornSamplingExperiment: "born-sampling",
    OffsetAverageExperiment: "offset-average",
    SubTauExperiment: "sub-tau",
    SequentialExperiment: "sequential-measurement",
    QGridExperiment: "qgrid",
}

# (filename, text) pairs — computed fully before anything is written.
Artifacts = list[tuple[str, str]]


def _label_name(label: tuple[int, ...]) -> str:
    return ":".join(str(i) for i in label)


def _run_trajectory(config: ScenarioConfig, exp: TrajectoryExperiment, prefix: str):
    traj = config.scenario(windows=exp.windows).build_trajectory(exp.cset_id)
    return [(f"{prefix}.csv", dump_trajectory(traj))], traj.renorm_events


def _run_born_sampling(config: ScenarioConfig, exp: BornSamplingExperiment, prefix: str):
    traj = config.scenario(windows=exp.windows).build_trajectory(exp.cset_id)
    dist = sample_born(traj, exp.samples, exp.seed, window=exp.window)
    exact = traj.partitions[exp.window].probabilities
    rows = [
        (exp.name, _label_name(traj.cset.labels[k]), dist.estimate(k), dist.stderr[k], float(exact[k]))
        for k in range(traj.cset.dimension)
    ]
    return [(f"{prefix}.csv", format_statistics(rows))], traj.renorm_events


def _run_offset_average(config: ScenarioConfig, exp: OffsetAverageExperiment, prefix: str):
    scenario = config.scenario(windows=exp.windows)
    traj = scenario.build_trajectory(exp.cset_id)
    est = offset_window_average(traj, exp.alpha, traj.cset, exp.member)
    at_alpha = evolve(scenario.state0, scenario.hamiltonian, exp.alpha)
    exact = expectation(at_alpha, traj.cset, exp.member)
    rows = [(exp.name, f"member-{exp.member}", est, 0.0, exact)]
    return [(f"{prefix}.csv", format_statistics(rows))], traj.renorm_events


def _run_sub_tau(config: ScenarioConfig, exp: SubTauExperiment, prefix: str):
    scenario = config.scenario(windows=exp.windows)
    corr = sub_tau_correlation(scenario, exp.delta, exp.pairs, exp.seed, exp.cset_id)
    traj = scenario.build_trajectory(exp.cset_id)
    base_windows = int(traj.windows_covered - exp.delta) if exp.delta > 0 else exp.windows
    exact = same_outcome_measure(traj, exp.delta, base_windows)
    rows = [(exp.name, f"lag-{exp.delta!r}", corr.same_fraction, corr.stderr, exact)]
    return [(f"{prefix}.csv", format_statistics(rows))], traj.renorm_events


def _run_sequential(config: ScenarioConfig, exp: SequentialExperiment, prefix: str):
    scenario = config.scenario(windows=1)
    all_runs = []
    counts: dict = {}
    renorms = 0
    for records in sequence_records(scenario, list(exp.steps), exp.runs, exp.seed):
        all_runs.append(records)
        key = tuple(rec.outcome_label for rec in records)
        counts[key] = counts.get(key, 0) + 1
        renorms += sum(
            int(rec.pre_state.renormalized) + int(rec.post_state.renormalized)
            for rec in records
        )
    dist = SequenceDistribution(
        steps=tuple(cid for cid, _ in exp.steps), counts=counts, total=exp.runs
    )
    files = [
        (f"{prefix}-log.csv", format_measurement_log(all_runs)),
        (f"{prefix}-summary.csv", format_sequence_distribution(dist)),
    ]
    return files, renorms


def _run_qgrid(config: ScenarioConfig, exp: QGridExperiment, prefix: str):
    grid_path = config.base_dir / exp.grid_file
    wf = load_grid(grid_path, exp.planck_step, exp.compton_wavelength)
    wf = window_renormalize(wf, exp.center_cell)
    part = position_partition(wf, exp.center_cell, exp.window_index, exp.scheduler)
    files = [
        (f"{prefix}-cells.csv", format_cell_probabilities(wf, exp.center_cell)),
        (f"{prefix}-partition.csv", dump_partition(part)),
    ]
    return files, 0


def run_experiment(config: ScenarioConfig, exp: Experiment, ordinal: int):
    """Compute one experiment's artifacts in memory.

    Returns ``(artifacts, renorm_events)`` where artifacts is a list of
    (filename, text) pairs.  Nothing is written to disk here.
    """
    prefix = f"{ordinal:02d}-{exp.name}"
    if isinstance(exp, TrajectoryExperiment):
        return _run_trajectory(config, exp, prefix)
    if isinstance(exp, BornSamplingExperiment):
        return _run_born_sampling(config, exp, prefix)
    if isinstance(exp, OffsetAverageExperiment):
        return _run_offset_average(config, exp, prefix)
    if isinstance(exp, SubTauExperiment):
        return _run_sub_tau(config, exp, prefix)
    if isinstance(exp, SequentialExperiment):
        return _run_sequential(config, exp, prefix)
    if isinstance(exp, QGridExperiment):
        return _run_qgrid(config, exp, prefix)
    raise TypeError(f"no runner for experiment type {type(exp).__name__}")


def _experiment_seed(exp: Experiment) -> str:
    seed = getattr(exp, "seed", None)
    return "-" if seed is None else str(seed)


def _manifest(
    config: ScenarioConfig,
    config_path: Path,
    per_experiment_files: list[Artifacts],
) -> str:
    # Only config identity, seeds, versions, and outputs: bytes must not
    # depend on run parameters like --threads.
    lines = [
        "format = qergo-run-manifest-1",
        f"package = qergo {__version__}",
        f"numpy = {np.__version__}",
        f"config = {config_path.name}",
        f"config_sha256 = {config.sha256}",
    ]
    for exp, files in zip(config.experiments, per_experiment_files):
        names = ";".join(name for name, _ in files)
        kind = _KIND_NAMES[type(exp)]
        lines.append(
            f"experiment = {exp.name} kind={kind} seed={_experiment_seed(exp)} files={names}"
        )
    lines.append("status = ok")
    return "\n".join(lines) + "\n"


def _write_failure_marker(out_dir: Path, message: str):
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / FAILURE_MARKER).write_text(message + "\n", encoding="utf-8")
    except OSError:
        pass  # the original error matters more than the marker


def run_scenario(
    config_path,
    out_dir=None,
    threads: int = 1,
    strict_float: bool = False,
) -> list[Path]:
    """Run every experiment block of a config and write its artifacts.

    All experiments are computed before any file is written; on failure a
    ``FAILED`` marker naming the violated invariant is left in the output
    directory instead of partial results.  Returns the written paths, the
    manifest last.  ``threads > 1`` computes independent experiment blocks
    in parallel; outputs are identical either way because every block owns
    its seeds and shares nothing mutable.
    """
    config_path = Path(config_path)
    config = load_config(config_path)
    if out_dir is None:
        out = config.base_dir / config.output_dir
    else:
        out = Path(out_dir)
    if threads < 1:
        raise ValueError("threads must be at least 1")

    try:
        if threads == 1 or len(config.experiments) <= 1:
            results = [
                run_experiment(config, exp, i)
                for i, exp in enumerate(config.experiments)
            ]
        else:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                futures = [
                    pool.submit(run_experiment, config, exp, i)
                    for i, exp in enumerate(config.experiments)
                ]
                results = [f.result() for f in futures]
        if strict_float:
            for exp, (_, renorms) in zip(config.experiments, results):
                if renorms:
                    raise InvariantViolation(
                        f"strict-float: {renorms} renormalization event(s) while "
                        f"running experiment {exp.name!r}"
                    )
    except Exception as exc:
        _write_failure_marker(out, f"{type(exc).__name__}: {exc}")
        raise

    per_experiment_files = [files for files, _ in results]
    out.mkdir(parents=True, exist_ok=True)
    stale_marker = out / FAILURE_MARKER
    if stale_marker.exists():
        stale_marker.unlink()
    written: list[Path] = []
    for files in per_experiment_files:
        for name, text in files:
            path = out / name
            path.write_text(text, encoding="utf-8")
            written.append(path)
    manifest_path = out / "manifest.txt"
    manifest_path.write_text(
        _manifest(config, config_path, per_experiment_files),
        encoding="utf-8",
    )
    written.append(manifest_path)
    return written
