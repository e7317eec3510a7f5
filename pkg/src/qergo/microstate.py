"""Microstates and deterministic jump trajectories.

At any instant exactly one labelled sub-interval of the current window
partition is active; the microstate at that instant is the corresponding
eigenvector, carrying its full multi-index label and eigenvalue tuple.
Following the active eigenvector through consecutive windows yields a
piecewise-constant jump trajectory: the state hops between eigenvectors at
the interior boundaries and the window layout is refrozen from the evolved
state at every integer crossing.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .hilbert import (
    CommutingSet,
    Hamiltonian,
    QuantumState,
    born_probabilities,
    evolve,
    is_conserved,
)
from .partition import (
    SchedulerSpec,
    SubInterval,
    WindowPartition,
    active_label,
    build_partition,
    periodic_extend,
)

__all__ = [
    "MicrostateSnapshot",
    "TrajectoryEvent",
    "JumpTrajectory",
    "Scenario",
    "microstate_at",
    "value_function",
    "apply_value_operator",
    "trajectory",
    "dump_trajectory",
]


@dataclass(frozen=True, eq=False)
class MicrostateSnapshot:
    """The definite microscopic configuration at one instant."""

    cset_id: str
    time: float
    label_index: int
    label: tuple[int, ...]
    eigenvalues: tuple[float, ...]
    basis_vector: np.ndarray

    def __post_init__(self):
        v = np.array(self.basis_vector, dtype=np.complex128)
        nrm = float(np.linalg.norm(v))
        if abs(nrm - 1.0) > 1e-10:
            raise ValueError(f"microstate vector norm {nrm!r} is not 1")
        v.setflags(write=False)
        object.__setattr__(self, "basis_vector", v)


@dataclass(frozen=True, eq=False)
class TrajectoryEvent:
    """One constant stretch of a jump trajectory."""

    window: int
    interval: SubInterval
    label_index: int
    label: tuple[int, ...]
    eigenvalues: tuple[float, ...]


@dataclass(frozen=True, eq=False)
class JumpTrajectory:
    """A jump trajectory over whole windows ``(0, windows_covered]``.

    ``events`` tile the covered span exactly (consecutive intervals share
    boundary floats); ``partitions[N]`` and ``states[N]`` hold the layout
    and the window-start state for window ``N``.  ``renorm_events`` counts
    drift corrections applied during the underlying evolution.
    """

    cset: CommutingSet
    scheduler: SchedulerSpec
    events: tuple[TrajectoryEvent, ...]
    partitions: tuple[WindowPartition, ...]
    states: tuple[QuantumState, ...]
    renorm_events: int

    @property
    def cset_id(self) -> str:
        return self.cset.id

    @property
    def windows_covered(self) -> int:
        return len(self.partitions)

    @cached_property
    def _upper_bounds(self) -> np.ndarray:
        a = np.array([ev.interval.hi for ev in self.events])
        a.setflags(write=False)
        return a

    @cached_property
    def _event_labels(self) -> np.ndarray:
        a = np.array([ev.label_index for ev in self.events], dtype=np.intp)
        a.setflags(write=False)
        return a

    def event_at(self, u: float) -> TrajectoryEvent:
        return self.events[self._event_index(u)]

    def label_at(self, u: float) -> int:
        """Active label index at time ``u``."""
        return int(self._event_labels[self._event_index(u)])

    def labels_at(self, us: np.ndarray) -> np.ndarray:
        """Vectorized :meth:`label_at` for sampling experiments."""
        us = np.asarray(us, dtype=float)
        if us.size and (us.min() <= 0.0 or us.max() > self.windows_covered):
            raise ValueError("sample times must lie in (0, windows_covered]")
        idx = np.searchsorted(self._upper_bounds, us, side="left")
        return self._event_labels[idx]

    def _event_index(self, u: float) -> int:
        if not 0.0 < u <= self.windows_covered:
            raise ValueError(
                f"time {u!r} outside the covered span (0, {self.windows_covered}]"
            )
        return int(np.searchsorted(self._upper_bounds, u, side="left"))


def microstate_at(partition: WindowPartition, cset: CommutingSet, u: float) -> MicrostateSnapshot:
    """Resolve the active eigenvector at time ``u`` within one window."""
    if partition.dimension != cset.dimension:
        raise ValueError("partition and commuting set dimensions differ")
    k = active_label(partition, u)
    return MicrostateSnapshot(
        cset_id=cset.id,
        time=u,
        label_index=k,
        label=cset.labels[k],
        eigenvalues=cset.eigenvalues[k],
        basis_vector=cset.basis_vector(k),
    )


def value_function(
    partition: WindowPartition, cset: CommutingSet, member: int, u: float
) -> float:
    """The definite value of one member observable at time ``u``.

    Piecewise constant in time: the eigenvalue of whichever eigenvector is
    active.  Jumps happen only at interior interval boundaries.
    """
    if not 0 <= member < cset.n_members:
        raise ValueError(f"member index {member} out of range ({cset.n_members} members)")
    k = active_label(partition, u)
    return cset.eigenvalues[k][member]


def apply_value_operator(
    partition: WindowPartition,
    cset: CommutingSet,
    label,
    u: float,
    member: int = 0,
) -> np.ndarray:
    """Apply the time-dependent observable piece of one label to its eigenvector.

    While the label is active this is the member eigenvalue times the
    labelled eigenvector; while any other label is active the piece
    annihilates it and the zero vector comes back.
    """
    k = cset.label_index(label)
    if active_label(partition, u) != k:
        return np.zeros(cset.dimension, dtype=np.complex128)
    return cset.eigenvalues[k][member] * cset.basis_vector(k)


@dataclass(frozen=True, eq=False)
class Scenario:
    """A closed-system setup: initial state, generator, observable sets.

    ``schedulers`` maps commuting-set ids to layout strategies; sets without
    an entry get the default contiguous layout.
    """

    state0: QuantumState
    hamiltonian: Hamiltonian
    csets: tuple[CommutingSet, ...]
    schedulers: dict[str, SchedulerSpec]
    windows: int = 1

    def __post_init__(self):
        if not self.csets:
            raise ValueError("scenario needs at least one commuting set")
        ids = [c.id for c in self.csets]
        if len(set(ids)) != len(ids):
            raise ValueError("commuting set ids must be distinct")
        for c in self.csets:
            if c.dimension != self.state0.dimension:
                raise ValueError(f"commuting set {c.id!r} dimension differs from the state")
        if self.hamiltonian.dimension != self.state0.dimension:
            raise ValueError("hamiltonian dimension differs from the state")
        if self.windows < 1:
            raise ValueError("windows must be at least 1")

    def cset(self, cset_id: str | None = None) -> CommutingSet:
        if cset_id is None:
            if len(self.csets) != 1:
                raise ValueError("scenario has several commuting sets; name one")
            return self.csets[0]
        for c in self.csets:
            if c.id == cset_id:
                return c
        raise ValueError(f"no commuting set with id {cset_id!r}")

    def scheduler_for(self, cset_id: str) -> SchedulerSpec:
        return self.schedulers.get(cset_id, SchedulerSpec())

    def build_trajectory(self, cset_id: str | None = None, windows: int | None = None) -> JumpTrajectory:
        c = self.cset(cset_id)
        return trajectory(
            self.state0,
            self.hamiltonian,
            c,
            self.scheduler_for(c.id),
            self.windows if windows is None else windows,
        )


def trajectory(
    state0: QuantumState,
    hamiltonian: Hamiltonian,
    cset: CommutingSet,
    scheduler: SchedulerSpec,
    windows: int,
    max_windows: int = 10_000,
) -> JumpTrajectory:
    """Deterministic jump trajectory over windows ``0 .. windows-1``.

    Per window: freeze the eigenbasis weights of the current state, build
    the window layout, emit one event per sub-interval, then evolve the
    state to the next integer boundary.  When every member observable
    commutes with the Hamiltonian the weights are constants of motion and
    the window-0 layout is reused verbatim, shifted by the window index —
    the layout freedom is resolved in favour of exact periodicity.
    """
    if windows < 1:
        raise ValueError("windows must be at least 1")
    if windows > max_windows:
        raise ValueError(f"windows = {windows} exceeds max_windows = {max_windows}")
    conserved = is_conserved(hamiltonian, cset)
    states = [state0]
    partitions: list[WindowPartition] = []
    renorms = 0
    psi = state0
    for n in range(windows):
        if conserved and partitions:
            part = periodic_extend(partitions[0], n)
        else:
            part = build_partition(born_probabilities(psi, cset), n, scheduler)
        partitions.append(part)
        if n + 1 < windows:
            psi = evolve(psi, hamiltonian, 1.0)
            renorms += int(psi.renormalized)
            states.append(psi)
    events = tuple(
        TrajectoryEvent(
            window=part.window_index,
            interval=seg,
            label_index=k,
            label=cset.labels[k],
            eigenvalues=cset.eigenvalues[k],
        )
        for part in partitions
        for seg, k in part.segments
    )
    return JumpTrajectory(
        cset=cset,
        scheduler=scheduler,
        events=events,
        partitions=tuple(partitions),
        states=tuple(states),
        renorm_events=renorms,
    )


def dump_trajectory(traj: JumpTrajectory) -> str:
    """Render a trajectory as CSV text, one row per constant stretch.

    Columns: window, label (colon-joined multi-index), lo, hi, eigenvalues
    (colon-joined, repr floats).  Rows are in time order; floats use repr
    so a dump/parse round trip is bit-exact.
    """
    lines = ["window,label,lo,hi,eigenvalues"]
    for ev in traj.events:
        lab = ":".join(str(i) for i in ev.label)
        eig = ":".join(repr(x) for x in ev.eigenvalues)
        lines.append(f"{ev.window},{lab},{ev.interval.lo!r},{ev.interval.hi!r},{eig}")
    return "\n".join(lines) + "\n"
