"""Time averages, Born-rule recovery, and sub-window correlation statistics.

Everything the model writes as a time integral is evaluated here exactly by
interval arithmetic on piecewise-constant data; Monte Carlo enters only
where an experiment genuinely reads the trajectory at random times.  The
two routes are kept strictly apart so analytic identities and statistical
estimates can cross-check each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hilbert import CommutingSet
from .microstate import JumpTrajectory, Scenario
from .partition import WindowPartition, interval_measure

__all__ = [
    "EmpiricalDistribution",
    "CorrelationEstimate",
    "window_average_step",
    "window_average_value",
    "sample_born",
    "offset_window_average",
    "same_outcome_measure",
    "sub_tau_correlation",
    "format_statistics",
]


@dataclass(frozen=True, eq=False)
class EmpiricalDistribution:
    """Label counts from repeated sampling, with binomial standard errors."""

    counts: dict[int, int]
    total: int

    def __post_init__(self):
        if self.total < 1:
            raise ValueError("empirical distribution needs at least one sample")
        if sum(self.counts.values()) != self.total:
            raise ValueError("counts do not sum to total")

    @property
    def estimates(self) -> dict[int, float]:
        return {k: c / self.total for k, c in self.counts.items()}

    @property
    def stderr(self) -> dict[int, float]:
        out = {}
        for k, c in self.counts.items():
            p = c / self.total
            out[k] = math.sqrt(p * (1.0 - p) / self.total)
        return out

    def estimate(self, label: int) -> float:
        return self.counts.get(label, 0) / self.total


@dataclass(frozen=True)
class CorrelationEstimate:
    """Same-outcome fraction for time pairs separated by a fixed lag."""

    delta: float
    same_fraction: float
    stderr: float
    n_pairs: int


def window_average_step(partition: WindowPartition, label: int) -> float:
    """Time average of one label's step function over its window.

    Computed exactly: the integral of an indicator is the total length of
    its intervals, and the window has unit span, so this is just the
    interval measure — which is how the construction recovers the Born
    probability with no sampling at all.
    """
    return interval_measure(partition, label) / partition.span


def window_average_value(partition: WindowPartition, cset: CommutingSet, member: int = 0) -> float:
    """Exact time average of the value function over the window.

    Equals the quantum expectation of the member observable in the
    window-start state, since each eigenvalue is weighted by its label's
    time share.
    """
    if partition.dimension != cset.dimension:
        raise ValueError("partition and commuting set dimensions differ")
    if not 0 <= member < cset.n_members:
        raise ValueError(f"member index {member} out of range ({cset.n_members} members)")
    terms = [
        window_average_step(partition, k) * cset.eigenvalues[k][member]
        for k in range(cset.dimension)
    ]
    return float(math.fsum(terms))


def sample_born(
    traj: JumpTrajectory, n_samples: int, seed: int, window: int = 0
) -> EmpiricalDistribution:
    """Estimate one window's label probabilities by uniform random reads.

    Draws ``n_samples`` times uniformly in the designated window, records
    which label is active at each, and returns the empirical distribution.
    Because exactly one step function is 1 at any instant, tallying active
    labels and tallying squared overlaps with the running microstate are
    the same count — there are no cross terms.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    if not traj.events:
        raise ValueError("cannot sample an empty trajectory")
    if not 0 <= window < traj.windows_covered:
        raise ValueError(
            f"window {window} outside the covered range [0, {traj.windows_covered})"
        )
    rng = np.random.default_rng(seed)
    # window + 1 - U with U in [0, 1) lands in (window, window+1], honouring
    # the half-open convention at both ends.
    us = window + 1.0 - rng.random(n_samples)
    labels = traj.labels_at(us)
    counts = np.bincount(labels, minlength=traj.cset.dimension)
    return EmpiricalDistribution(
        counts={k: int(c) for k, c in enumerate(counts)}, total=n_samples
    )


def offset_window_average(
    traj: JumpTrajectory, alpha: float, cset: CommutingSet, member: int = 0
) -> float:
    """Exact value-function average over the offset window ``(alpha, alpha+1]``.

    Pure interval intersection — no sampling.  For offsets that are whole
    numbers this reduces to the ordinary window average; for fractional
    offsets it mixes two consecutive layouts and is the quantity whose
    deviation from the instantaneous expectation exposes the granularity.
    """
    if not 0 <= member < cset.n_members:
        raise ValueError(f"member index {member} out of range ({cset.n_members} members)")
    if alpha < 0.0 or alpha + 1.0 > traj.windows_covered:
        raise ValueError(
            f"offset window ({alpha}, {alpha + 1}] falls outside the covered span "
            f"(0, {traj.windows_covered}]"
        )
    lo, hi = alpha, alpha + 1.0
    pieces = []
    # First event whose upper end exceeds lo, then walk until past hi.
    start = int(np.searchsorted(traj._upper_bounds, lo, side="right"))
    for ev in traj.events[start:]:
        if ev.interval.lo >= hi:
            break
        overlap = min(ev.interval.hi, hi) - max(ev.interval.lo, lo)
        if overlap > 0.0:
            pieces.append(overlap * cset.eigenvalues[ev.label_index][member])
    return float(math.fsum(pieces))  # offset window has unit span


def same_outcome_measure(traj: JumpTrajectory, delta: float, base_windows: int) -> float:
    """Exact measure of base times whose label repeats after a lag, per unit time.

    For ``u`` ranging over ``(0, base_windows]``, returns the fraction of
    that span on which the active label at ``u`` equals the active label at
    ``u + delta`` — computed by merging the event boundaries with their
    shifted copies, no sampling.  This is the analytic side of the
    granularity signature; :func:`sub_tau_correlation` is its Monte Carlo
    counterpart.
    """
    if delta < 0.0:
        raise ValueError("delta must be non-negative")
    if base_windows < 1 or base_windows + delta > traj.windows_covered:
        raise ValueError("base span plus delta must fit inside the covered windows")
    if delta == 0.0:
        return 1.0
    bounds = [ev.interval.lo for ev in traj.events] + [traj.events[-1].interval.hi]
    shifted = [b - delta for b in bounds]
    cuts = sorted(set(b for b in bounds + shifted if 0.0 < b < base_windows))
    edges = [0.0] + cuts + [float(base_windows)]
    matched = []
    for a, b in zip(edges, edges[1:]):
        if b <= a:
            continue
        mid = 0.5 * (a + b)
        if traj.label_at(mid) == traj.label_at(mid + delta):
            matched.append(b - a)
    return float(math.fsum(matched)) / base_windows


def sub_tau_correlation(
    scenario: Scenario, delta: float, n_pairs: int, seed: int, cset_id: str | None = None
) -> CorrelationEstimate:
    """Monte Carlo same-outcome fraction for reads separated by ``delta``.

    Reads the trajectory at ``u`` and ``u + delta`` for ``n_pairs`` random
    base times — pure passive reads, no collapse anywhere.  Base times are
    drawn uniformly over a whole number of windows so the estimate targets
    the per-window overlap measure.  ``delta = 0`` returns exactly 1: the
    trajectory is piecewise constant and both reads coincide.
    """
    if delta < 0.0:
        raise ValueError("delta must be non-negative")
    if n_pairs < 1:
        raise ValueError("n_pairs must be at least 1")
    traj = scenario.build_trajectory(cset_id)
    span = traj.windows_covered - delta
    base_windows = int(math.floor(span))
    if base_windows < 1:
        raise ValueError(
            f"delta = {delta} leaves no whole base window inside {traj.windows_covered} windows"
        )
    rng = np.random.default_rng(seed)
    us = base_windows * (1.0 - rng.random(n_pairs))
    same = np.asarray(traj.labels_at(us)) == np.asarray(traj.labels_at(us + delta))
    frac = float(np.mean(same))
    stderr = math.sqrt(frac * (1.0 - frac) / n_pairs)
    return CorrelationEstimate(delta=delta, same_fraction=frac, stderr=stderr, n_pairs=n_pairs)


def format_statistics(rows: list[tuple[str, str, float, float, float]]) -> str:
    """Render statistics records as CSV text.

    Each input row is (experiment id, label, estimate, stderr, exact value);
    the deviation column is derived.  Floats use repr for bit-stable dumps.
    """
    lines = ["experiment,label,estimate,stderr,exact,deviation"]
    for exp_id, label, est, se, exact in rows:
        dev = abs(est - exact)
        lines.append(f"{exp_id},{label},{est!r},{se!r},{exact!r},{dev!r}")
    return "\n".join(lines) + "\n"
