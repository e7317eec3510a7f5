"""Probability-weighted partitions of time windows into labelled sub-intervals.

A window partition splits the half-open window ``(N, N+1]`` into finitely
many disjoint half-open sub-intervals, each tagged with an outcome label,
such that the total length owned by label ``k`` equals the probability
``p_k`` frozen at the window start.  Time averages over the window then
reproduce the probabilities exactly, whatever the internal arrangement.

The arrangement itself is not fixed by the probabilities; three scheduler
strategies pin it down:

* ``contiguous`` — one block per label, laid out in label order;
* ``two-outcome`` — label 0 occupies a single block starting a configurable
  offset into the window, every other label fills the complement in order
  (wrapping around the block), matching the classic three-interval layout
  for two outcomes;
* ``seeded-random`` — each label's mass is split into at most
  ``max_subintervals`` pieces and the pieces are shuffled, with all draws
  taken from a PCG64 stream keyed by ``(seed, window_index)`` so any window
  can be rebuilt independently of the others.

Partial windows appear after a mid-window state reduction: the remainder
``(u0, N+1]`` is re-partitioned with the same machinery, measures scaled by
the remaining span.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InvariantViolation

SCHEDULER_KINDS = ("contiguous", "two-outcome", "seeded-random")
MEASURE_TOL = 1e-9
COVERAGE_TOL = 1e-9
PROB_SUM_TOL = 1e-6

__all__ = [
    "SCHEDULER_KINDS",
    "MEASURE_TOL",
    "COVERAGE_TOL",
    "PROB_SUM_TOL",
    "SubInterval",
    "SchedulerSpec",
    "WindowPartition",
    "build_partition",
    "build_partition_span",
    "step_function",
    "active_label",
    "interval_measure",
    "periodic_extend",
    "check_partition",
    "dump_partition",
]


@dataclass(frozen=True)
class SubInterval:
    """Half-open interval ``(lo, hi]`` on the dimensionless time axis."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (self.hi > self.lo):
            raise ValueError(f"need hi > lo, got ({self.lo!r}, {self.hi!r}]")

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def contains(self, u: float) -> bool:
        """Membership test honouring the half-open convention."""
        return self.lo < u <= self.hi

    def shifted(self, delta: float) -> "SubInterval":
        return SubInterval(self.lo + delta, self.hi + delta)


@dataclass(frozen=True)
class SchedulerSpec:
    """Strategy and knobs for arranging one window's sub-intervals.

    ``offset`` only matters for the two-outcome layout (how far into the
    window label 0's block starts, as a fraction of the span; it is clamped
    so the block fits).  ``max_subintervals`` caps the pieces per label for
    the seeded-random layout.
    """

    kind: str = "contiguous"
    max_subintervals: int = 1
    seed: int = 0
    offset: float = 0.25

    def __post_init__(self):
        if self.kind not in SCHEDULER_KINDS:
            raise ValueError(f"unknown scheduler kind {self.kind!r}; choose from {SCHEDULER_KINDS}")
        if self.max_subintervals < 1:
            raise ValueError("max_subintervals must be at least 1")
        if not 0.0 <= self.offset <= 1.0:
            raise ValueError(f"offset must lie in [0, 1], got {self.offset}")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


@dataclass(frozen=True, eq=False)
class WindowPartition:
    """An exhaustive labelled tiling of one (possibly partial) window.

    ``segments`` holds ``(interval, label_index)`` pairs in time order;
    consecutive intervals share their boundary float exactly, the first
    starts at ``lo`` and the last ends at ``hi``, so the segments tile
    ``(lo, hi]`` with no gaps or overlaps by construction.  ``probabilities``
    is the frozen probability vector the measures realize: label ``k`` owns
    total length ``span * probabilities[k]``.
    """

    window_index: int
    lo: float
    hi: float
    probabilities: np.ndarray
    segments: tuple[tuple[SubInterval, int], ...]

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float).copy()
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)

    @property
    def dimension(self) -> int:
        return self.probabilities.size

    @property
    def span(self) -> float:
        return self.hi - self.lo

    @cached_property
    def _upper_bounds(self) -> list[float]:
        return [seg.hi for seg, _ in self.segments]

    @cached_property
    def _segment_labels(self) -> np.ndarray:
        a = np.array([k for _, k in self.segments], dtype=np.intp)
        a.setflags(write=False)
        return a

    @cached_property
    def entries(self) -> dict[int, tuple[SubInterval, ...]]:
        """Sub-intervals grouped by label index (labels with mass only)."""
        groups: dict[int, list[SubInterval]] = {}
        for seg, k in self.segments:
            groups.setdefault(k, []).append(seg)
        return {k: tuple(v) for k, v in groups.items()}

    def intervals_for(self, label: int) -> tuple[SubInterval, ...]:
        if not 0 <= label < self.dimension:
            raise ValueError(f"label index {label} out of range for dimension {self.dimension}")
        return self.entries.get(label, ())


def _contiguous_layout(p: np.ndarray) -> list[tuple[float, int]]:
    return [(float(p[k]), k) for k in range(p.size) if p[k] > 0.0]


def _two_outcome_layout(p: np.ndarray, offset: float) -> list[tuple[float, int]]:
    # Label 0 gets one block starting `offset` into the window (clamped so it
    # fits); the other labels fill the complement in order, split across the
    # gap when they straddle it.  For two outcomes this is the familiar
    # three-interval picture.
    p0 = float(p[0])
    off = min(offset, 1.0 - p0)
    rest = [(k, float(p[k])) for k in range(1, p.size) if p[k] > 0.0]
    widths: list[tuple[float, int]] = []
    room = off
    i = 0
    while room > 0.0 and i < len(rest):
        k, w = rest[i]
        if w <= room:
            widths.append((w, k))
            room -= w
            i += 1
        else:
            widths.append((room, k))
            rest[i] = (k, w - room)
            room = 0.0
    if p0 > 0.0:
        widths.append((p0, 0))
    widths.extend((w, k) for k, w in rest[i:])
    return widths


def _seeded_random_layout(
    p: np.ndarray, window_index: int, spec: SchedulerSpec
) -> list[tuple[float, int]]:
    # Keyed per window so partitions can be rebuilt out of order.
    rng = np.random.default_rng([spec.seed, window_index])
    pieces: list[tuple[float, int]] = []
    for k in range(p.size):
        mass = float(p[k])
        if mass <= 0.0:
            continue
        n = int(rng.integers(1, spec.max_subintervals + 1))
        if n == 1:
            parts = [mass]
        else:
            cuts = np.sort(rng.uniform(0.0, mass, size=n - 1))
            parts = np.diff(np.concatenate(([0.0], cuts, [mass])))
        pieces.extend((float(w), k) for w in parts if w > 0.0)
    order = rng.permutation(len(pieces))
    return [pieces[i] for i in order]


def _layout(p: np.ndarray, window_index: int, spec: SchedulerSpec) -> list[tuple[float, int]]:
    if spec.kind == "contiguous":
        return _contiguous_layout(p)
    if spec.kind == "two-outcome":
        return _two_outcome_layout(p, spec.offset)
    return _seeded_random_layout(p, window_index, spec)


def _validated_probabilities(probabilities) -> np.ndarray:
    p = np.asarray(probabilities, dtype=float)
    if p.ndim != 1 or p.size < 1:
        raise ValueError("probabilities must form a non-empty 1-d vector")
    if not np.all(np.isfinite(p)):
        raise ValueError("probabilities must be finite")
    if np.any(p < -1e-12):
        raise ValueError(f"probabilities must be non-negative, got min {p.min()!r}")
    p = np.clip(p, 0.0, None)
    total = float(p.sum())
    if abs(total - 1.0) > PROB_SUM_TOL:
        raise ValueError(f"probabilities sum to {total!r}, off 1 by more than {PROB_SUM_TOL}")
    if total != 1.0:
        p = p / total
    return p


def build_partition_span(
    probabilities, lo: float, hi: float, scheduler: SchedulerSpec, window_index: int
) -> WindowPartition:
    """Partition the half-open span ``(lo, hi]`` with measures ``span * p_k``.

    The general form behind :func:`build_partition`; measurement needs it
    for the remainder of a window after a mid-window reduction.  Input
    probabilities may be off 1 by at most ``PROB_SUM_TOL``; they are
    renormalized and the renormalized vector is the one stored (and the one
    the measure invariant holds against).
    """
    if not hi > lo:
        raise ValueError(f"need hi > lo, got span ({lo!r}, {hi!r}]")
    p = _validated_probabilities(probabilities)
    widths = _layout(p, window_index, scheduler)
    # Lay out in relative coordinates, then map onto (lo, hi].  The final
    # boundary is forced to hi exactly so adjacent windows share floats.
    bounds = [0.0]
    for w, _ in widths:
        bounds.append(bounds[-1] + w)
    span = hi - lo
    abs_bounds = [lo + b * span for b in bounds]
    abs_bounds[-1] = hi
    segments = []
    for i, (_, k) in enumerate(widths):
        a, b = abs_bounds[i], abs_bounds[i + 1]
        if b > a:  # rounding can collapse a sliver; drop empty pieces
            segments.append((SubInterval(a, b), k))
    if not segments:
        raise InvariantViolation("partition construction produced no segments")
    # Re-seal after any drop so the tiling stays gap-free.
    sealed = []
    cursor = lo
    for seg, k in segments:
        sealed.append((SubInterval(cursor, seg.hi), k))
        cursor = seg.hi
    return WindowPartition(
        window_index=window_index, lo=lo, hi=hi, probabilities=p, segments=tuple(sealed)
    )


def build_partition(probabilities, window_index: int, scheduler: SchedulerSpec) -> WindowPartition:
    """Partition unit window ``(N, N+1]`` according to a probability vector."""
    if window_index < 0:
        raise ValueError("window_index must be non-negative")
    lo = float(window_index)
    return build_partition_span(probabilities, lo, lo + 1.0, scheduler, window_index)


def _locate(partition: WindowPartition, u: float) -> int:
    if not partition.lo < u <= partition.hi:
        raise ValueError(
            f"time {u!r} outside the partitioned span ({partition.lo!r}, {partition.hi!r}]"
        )
    return bisect.bisect_left(partition._upper_bounds, u)


def active_label(partition: WindowPartition, u: float) -> int:
    """Label index of the unique sub-interval containing ``u``.

    Exact float comparisons: ``u`` equal to a shared boundary belongs to
    the earlier interval, per the half-open convention.
    """
    return int(partition._segment_labels[_locate(partition, u)])


def step_function(partition: WindowPartition, label: int, u: float) -> int:
    """Indicator of label ``label`` at time ``u`` (1 inside its intervals, else 0).

    Evaluated by direct membership in the label's own sub-intervals, not by
    delegation to :func:`active_label`, so completeness and idempotency are
    genuinely testable properties rather than tautologies.
    """
    if not partition.lo < u <= partition.hi:
        raise ValueError(
            f"time {u!r} outside the partitioned span ({partition.lo!r}, {partition.hi!r}]"
        )
    if not 0 <= label < partition.dimension:
        raise ValueError(f"label index {label} out of range for dimension {partition.dimension}")
    return 1 if any(seg.contains(u) for seg in partition.intervals_for(label)) else 0


def interval_measure(partition: WindowPartition, label: int) -> float:
    """Total length owned by a label (the realized probability mass)."""
    if not 0 <= label < partition.dimension:
        raise ValueError(f"label index {label} out of range for dimension {partition.dimension}")
    return float(math.fsum(seg.length for seg in partition.intervals_for(label)))


def periodic_extend(base: WindowPartition, window_index: int) -> WindowPartition:
    """Copy a window-0 partition onto window ``N`` by shifting every float by ``N``.

    Only meaningful when the eigenbasis weights are conserved, so the same
    layout is valid in every window; the caller is responsible for that.
    """
    if base.window_index != 0 or base.lo != 0.0 or base.hi != 1.0:
        raise ValueError("periodic_extend needs a full window-0 partition as its base")
    if window_index < 0:
        raise ValueError("window_index must be non-negative")
    if window_index == 0:
        return base
    n = float(window_index)
    segments = tuple((seg.shifted(n), k) for seg, k in base.segments)
    return WindowPartition(
        window_index=window_index,
        lo=n,
        hi=n + 1.0,
        probabilities=base.probabilities,
        segments=segments,
    )


def check_partition(partition: WindowPartition) -> float:
    """Audit coverage, ordering, label sanity, and measures; return worst measure error.

    Raises :class:`InvariantViolation` naming the first broken invariant.
    Coverage is exact: consecutive segments must share their boundary float
    and the ends must hit ``lo``/``hi`` bitwise.
    """
    segs = partition.segments
    if not segs:
        raise InvariantViolation("partition has no segments")
    if segs[0][0].lo != partition.lo:
        raise InvariantViolation(
            f"first segment starts at {segs[0][0].lo!r}, expected {partition.lo!r}"
        )
    if segs[-1][0].hi != partition.hi:
        raise InvariantViolation(
            f"last segment ends at {segs[-1][0].hi!r}, expected {partition.hi!r}"
        )
    for (a, _), (b, _) in zip(segs, segs[1:]):
        if a.hi != b.lo:
            raise InvariantViolation(
                f"gap or overlap between {a.hi!r} and {b.lo!r}"
            )
    d = partition.dimension
    for _, k in segs:
        if not 0 <= k < d:
            raise InvariantViolation(f"segment label {k} out of range for dimension {d}")
    total = float(partition.probabilities.sum())
    if abs(total - 1.0) > 1e-10:
        raise InvariantViolation(f"stored probabilities sum to {total!r}")
    worst = 0.0
    for k in range(d):
        target = partition.span * float(partition.probabilities[k])
        dev = abs(interval_measure(partition, k) - target)
        worst = max(worst, dev)
        if dev > MEASURE_TOL:
            raise InvariantViolation(
                f"label {k} owns measure off target by {dev:.3e} (> {MEASURE_TOL})"
            )
    return worst


def dump_partition(partition: WindowPartition) -> str:
    """Render one partition as CSV text, rows in time order.

    Columns: window_index, label, lo, hi.  Floats use repr so a dump/parse
    round trip is bit-exact.
    """
    lines = ["window_index,label,lo,hi"]
    for seg, k in partition.segments:
        lines.append(f"{partition.window_index},{k},{seg.lo!r},{seg.hi!r}")
    return "\n".join(lines) + "\n"
