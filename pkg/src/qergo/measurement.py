"""Measurement protocol: outcome extraction, collapse, and global re-partitioning.

A system under observation carries one evolving state plus one live window
partition per commuting set.  Measuring an observable set at time ``u``
reads off the label active at ``u`` — the outcome is deterministic once the
partitions are fixed; randomness enters only through the choice of
measurement time.  The state then collapses to the outcome eigenvector and
every partition is rebuilt from the collapsed state: the remainder of the
current window is treated as a fresh origin whose sub-interval measures are
proportional to the new probabilities over the remaining span.

All operations are by value: each returns a new system snapshot, so runs
can be branched, replayed, and compared without interference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Mapping

import numpy as np

from .hilbert import (
    CommutingSet,
    Hamiltonian,
    QuantumState,
    born_probabilities,
    evolve,
    is_conserved,
)
from .microstate import Scenario
from .partition import (
    SchedulerSpec,
    WindowPartition,
    active_label,
    build_partition,
    build_partition_span,
    periodic_extend,
)

__all__ = [
    "MeasurementRecord",
    "SystemUnderObservation",
    "SequenceDistribution",
    "advance",
    "measure",
    "measurement_operator_apply",
    "total_variation",
    "sequence_records",
    "sequential_experiment",
    "format_measurement_log",
    "format_sequence_distribution",
]


@dataclass(frozen=True, eq=False)
class MeasurementRecord:
    """One completed measurement: when, what, which outcome, state before/after."""

    time: float
    cset_id: str
    outcome_index: int
    outcome_label: tuple[int, ...]
    outcome_eigenvalues: tuple[float, ...]
    pre_state: QuantumState
    post_state: QuantumState


@dataclass(frozen=True, eq=False)
class SystemUnderObservation:
    """Immutable snapshot of a monitored system.

    ``partitions`` maps each commuting-set id to the live partition of the
    current (possibly partial) window; every stored partition was built
    from the state at its own origin.  ``bases`` keeps, for each set whose
    members all commute with the Hamiltonian, the window-0-normalized
    layout reused verbatim at every crossing (exact periodicity);
    non-conserved sets rebuild from fresh probabilities instead.
    """

    state: QuantumState
    hamiltonian: Hamiltonian
    csets: tuple[CommutingSet, ...]
    schedulers: Mapping[str, SchedulerSpec]
    current_time: float
    partitions: Mapping[str, WindowPartition]
    bases: Mapping[str, WindowPartition]
    history: tuple[MeasurementRecord, ...] = ()
    renorm_events: int = 0

    @classmethod
    def start(
        cls,
        state: QuantumState,
        hamiltonian: Hamiltonian,
        csets: tuple[CommutingSet, ...],
        schedulers: Mapping[str, SchedulerSpec] | None = None,
    ) -> "SystemUnderObservation":
        """Set up observation at u = 0 with window-0 partitions."""
        schedulers = dict(schedulers or {})
        ids = [c.id for c in csets]
        if len(set(ids)) != len(ids):
            raise ValueError("commuting set ids must be distinct")
        partitions: dict[str, WindowPartition] = {}
        bases: dict[str, WindowPartition] = {}
        for c in csets:
            p = born_probabilities(state, c)
            part = build_partition(p, 0, schedulers.get(c.id, SchedulerSpec()))
            partitions[c.id] = part
            if is_conserved(hamiltonian, c):
                bases[c.id] = part
        return cls(
            state=state,
            hamiltonian=hamiltonian,
            csets=tuple(csets),
            schedulers=schedulers,
            current_time=0.0,
            partitions=partitions,
            bases=bases,
        )

    @classmethod
    def from_scenario(cls, scenario: Scenario) -> "SystemUnderObservation":
        return cls.start(
            scenario.state0, scenario.hamiltonian, scenario.csets, scenario.schedulers
        )

    def cset(self, cset_id: str) -> CommutingSet:
        for c in self.csets:
            if c.id == cset_id:
                return c
        raise ValueError(f"no commuting set with id {cset_id!r}")

    def scheduler_for(self, cset_id: str) -> SchedulerSpec:
        return self.schedulers.get(cset_id, SchedulerSpec())

    @property
    def window_end(self) -> float:
        return next(iter(self.partitions.values())).hi


def _fresh_partitions(
    sys: SystemUnderObservation,
    state: QuantumState,
    window_index: int,
    bases: dict[str, WindowPartition],
) -> dict[str, WindowPartition]:
    """Full-window partitions for window ``window_index`` built from ``state``.

    Conserved sets reuse their stored base layout shifted in place; the
    others refreeze probabilities.  ``bases`` is consulted and preserved.
    """
    parts: dict[str, WindowPartition] = {}
    for c in sys.csets:
        if c.id in bases:
            parts[c.id] = periodic_extend(bases[c.id], window_index)
        else:
            p = born_probabilities(state, c)
            parts[c.id] = build_partition(p, window_index, sys.scheduler_for(c.id))
    return parts


def advance(sys: SystemUnderObservation, u_target: float) -> SystemUnderObservation:
    """Evolve the system to ``u_target``, refreezing layouts at each crossing.

    Stepping stops at every window boundary on the way: the state is evolved
    to the boundary, all partitions are rebuilt for the next window from the
    there-and-then probabilities, and evolution continues.  Arriving exactly
    on a boundary does not open the next window (the boundary still belongs
    to the old one).
    """
    if u_target < sys.current_time:
        raise ValueError(
            f"cannot advance backward: current u = {sys.current_time}, target {u_target}"
        )
    if u_target == sys.current_time:
        return sys
    state = sys.state
    u = sys.current_time
    renorms = sys.renorm_events
    partitions = dict(sys.partitions)
    bases = dict(sys.bases)
    while True:
        end = next(iter(partitions.values())).hi
        if u_target <= end:
            state = evolve(state, sys.hamiltonian, u_target - u)
            renorms += int(state.renormalized)
            u = u_target
            break
        state = evolve(state, sys.hamiltonian, end - u)
        renorms += int(state.renormalized)
        u = end
        partitions = _fresh_partitions(sys, state, int(end), bases)
    return replace(
        sys,
        state=state,
        current_time=u,
        partitions=partitions,
        bases=bases,
        renorm_events=renorms,
    )


def measure(
    sys: SystemUnderObservation, cset_id: str, u: float
) -> tuple[MeasurementRecord, SystemUnderObservation]:
    """Measure one observable set at time ``u``.

    Advances to ``u``, reads the label active in that set's partition (the
    outcome — deterministic given the partitions), collapses the state to
    the outcome eigenvector bitwise, rebuilds ALL partitions from the
    collapsed state over the remainder of the window, and appends the
    record.  A measurement exactly on a window boundary starts the next
    window fresh instead (the remainder is empty).
    """
    here = advance(sys, u)
    c = here.cset(cset_id)  # raises for unknown ids before any state change
    part = here.partitions[cset_id]
    idx = active_label(part, u)
    pre = here.state
    post = QuantumState(c.basis_vector(idx))
    record = MeasurementRecord(
        time=u,
        cset_id=cset_id,
        outcome_index=idx,
        outcome_label=c.labels[idx],
        outcome_eigenvalues=c.eigenvalues[idx],
        pre_state=pre,
        post_state=post,
    )
    window_index = part.window_index
    window_hi = part.hi
    bases = dict(here.bases)
    partitions: dict[str, WindowPartition] = {}
    # Conserved layouts are refrozen from the collapsed state: their stored
    # base becomes stale the moment the weights jump.
    for cc in here.csets:
        if cc.id in bases:
            bases[cc.id] = build_partition(
                born_probabilities(post, cc), 0, here.scheduler_for(cc.id)
            )
    if u == window_hi:
        partitions = _fresh_partitions(here, post, int(window_hi), bases)
    else:
        for cc in here.csets:
            p = born_probabilities(post, cc)
            partitions[cc.id] = build_partition_span(
                p, u, window_hi, here.scheduler_for(cc.id), window_index
            )
    after = replace(
        here,
        state=post,
        partitions=partitions,
        bases=bases,
        history=here.history + (record,),
    )
    return record, after


def measurement_operator_apply(
    state: QuantumState, partition: WindowPartition, cset: CommutingSet, u: float
) -> np.ndarray:
    """Apply the time-dependent measurement operator to a state.

    Returns the overlap with the active eigenvector times that eigenvector
    — deliberately unnormalized; normalization happens only in the collapse
    step of :func:`measure`.
    """
    if cset.dimension != state.dimension or partition.dimension != cset.dimension:
        raise ValueError("state, partition, and commuting set dimensions must agree")
    k = active_label(partition, u)
    col = cset.basis_vector(k)
    coeff = np.vdot(col, state.amplitudes)
    return coeff * col


@dataclass(frozen=True, eq=False)
class SequenceDistribution:
    """Joint distribution of outcome-label sequences from repeated runs."""

    steps: tuple[str, ...]
    counts: dict[tuple[tuple[int, ...], ...], int]
    total: int

    def __post_init__(self):
        if sum(self.counts.values()) != self.total:
            raise ValueError("counts do not sum to total")

    @property
    def frequencies(self) -> dict[tuple[tuple[int, ...], ...], float]:
        return {k: c / self.total for k, c in self.counts.items()}

    def frequency(self, key: tuple[tuple[int, ...], ...]) -> float:
        return self.counts.get(key, 0) / self.total


def total_variation(
    a: SequenceDistribution, b: SequenceDistribution, reorder: tuple[int, ...] | None = None
) -> float:
    """Total-variation distance between two outcome-sequence distributions.

    ``reorder`` permutes b's tuple positions before comparison, for
    experiments that ran the same observables in a different order.
    """
    fb = b.frequencies
    if reorder is not None:
        fb = {tuple(key[i] for i in reorder): v for key, v in fb.items()}
    fa = a.frequencies
    support = set(fa) | set(fb)
    return 0.5 * sum(abs(fa.get(k, 0.0) - fb.get(k, 0.0)) for k in support)


def sequence_records(
    scenario: Scenario,
    sequence: list[tuple[str, float]],
    n_runs: int,
    seed: int,
):
    """Run a measurement sequence many times, yielding each run's records.

    Each sequence entry is (commuting-set id, nominal time); nominal times
    must be strictly increasing.  Per run, each actual measurement time is
    drawn uniformly over what is still available of the window containing
    its nominal time — the whole window normally, the remainder past the
    previous draw when two steps share a window.  Uniform reads are what
    make each outcome reproduce the current state's weights, so the draws
    must stay uniform conditioned on everything earlier; sorting
    same-window draws instead would bias the first read toward the start
    of the window.  The protocol runs from a fresh copy of the initial
    system each run.  Yields one ``list[MeasurementRecord]`` per run, in
    run order.  Input validation happens at call time, before the first
    run executes.
    """
    if not sequence:
        raise ValueError("sequence must contain at least one measurement")
    if n_runs < 1:
        raise ValueError("n_runs must be at least 1")
    times = [u for _, u in sequence]
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError(f"sequence times must be strictly increasing, got {times}")
    if times[0] <= 0.0:
        raise ValueError("measurement times must be positive")
    windows = [math.ceil(u) - 1 for u in times]
    ids = [cid for cid, _ in sequence]
    # Whether a later step still reads from the same window: those draws
    # must leave room, so an exact-boundary draw is rejected and retried.
    shares_later = [w in windows[i + 1 :] for i, w in enumerate(windows)]
    sys0 = SystemUnderObservation.from_scenario(scenario)
    for cid in ids:
        sys0.cset(cid)  # validate ids up front
    rng = np.random.default_rng(seed)

    def runs():
        for _ in range(n_runs):
            sys = sys0
            records = []
            prev = 0.0
            for i, (cid, w) in enumerate(zip(ids, windows)):
                lo_eff = max(float(w), prev)
                hi = w + 1.0
                while True:
                    u = lo_eff + (hi - lo_eff) * (1.0 - rng.random())
                    if not (shares_later[i] and u == hi):
                        break
                rec, sys = measure(sys, cid, u)
                records.append(rec)
                prev = u
            yield records

    return runs()


def sequential_experiment(
    scenario: Scenario,
    sequence: list[tuple[str, float]],
    n_runs: int,
    seed: int,
) -> SequenceDistribution:
    """Tally the joint outcome distribution of a randomized sequence.

    Thin wrapper over :func:`sequence_records`: the tuple of outcome labels
    from each run is counted, nothing else is retained.
    """
    runs = sequence_records(scenario, sequence, n_runs, seed)
    counts: dict[tuple[tuple[int, ...], ...], int] = {}
    for records in runs:
        key = tuple(rec.outcome_label for rec in records)
        counts[key] = counts.get(key, 0) + 1
    return SequenceDistribution(
        steps=tuple(cid for cid, _ in sequence), counts=counts, total=n_runs
    )


def format_measurement_log(records_per_run: list[list[MeasurementRecord]]) -> str:
    """Render measurement records as CSV, one row per measurement.

    Columns: run_id, step, u, cset id, outcome label (colon-joined),
    eigenvalues (colon-joined, repr floats).
    """
    lines = ["run_id,step,u,csco_id,outcome_label,eigenvalues"]
    for run_id, records in enumerate(records_per_run):
        for step, rec in enumerate(records):
            lab = ":".join(str(i) for i in rec.outcome_label)
            eig = ":".join(repr(x) for x in rec.outcome_eigenvalues)
            lines.append(f"{run_id},{step},{rec.time!r},{rec.cset_id},{lab},{eig}")
    return "\n".join(lines) + "\n"


def format_sequence_distribution(dist: SequenceDistribution) -> str:
    """Render a joint outcome distribution as CSV (sequence, count, frequency).

    Sequence keys are outcome labels joined with '>', multi-indices joined
    with ':'.  Rows are sorted by key for stable output.
    """
    lines = ["sequence,count,frequency"]
    for key in sorted(dist.counts):
        name = ">".join(":".join(str(i) for i in lab) for lab in key)
        c = dist.counts[key]
        lines.append(f"{name},{c},{c / dist.total!r}")
    return "\n".join(lines) + "\n"
