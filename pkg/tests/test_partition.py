import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qergo.errors import InvariantViolation
from qergo.partition import (
    SchedulerSpec,
    SubInterval,
    active_label,
    build_partition,
    build_partition_span,
    check_partition,
    dump_partition,
    interval_measure,
    periodic_extend,
    step_function,
)
from qergo.testing import random_probabilities

ALL_KINDS = ["contiguous", "two-outcome", "seeded-random"]


def spec_for(kind: str) -> SchedulerSpec:
    return SchedulerSpec(kind=kind, max_subintervals=3, seed=42, offset=0.25)


def test_single_outcome_fills_window():
    p = build_partition([1.0], 2, SchedulerSpec())
    assert p.segments == ((SubInterval(2.0, 3.0), 0),)
    assert interval_measure(p, 0) == 1.0


def test_two_outcome_worked_example():
    # offset 0.3 with p = (0.4, 0.6): the second label brackets the first
    p = build_partition([0.4, 0.6], 3, SchedulerSpec(kind="two-outcome", offset=0.3))
    assert [(seg.lo, seg.hi, k) for seg, k in p.segments] == [
        (3.0, 3.3, 1),
        (3.3, 3.7, 0),
        (3.7, 4.0, 1),
    ]
    assert interval_measure(p, 0) == pytest.approx(0.4, abs=1e-12)
    assert interval_measure(p, 1) == pytest.approx(0.6, abs=1e-12)


def test_two_outcome_offset_clamped():
    # offset past 1 - p0 would push label 0 over the edge; it clamps instead
    p = build_partition([0.7, 0.3], 0, SchedulerSpec(kind="two-outcome", offset=0.9))
    segs = [(seg.lo, seg.hi, k) for seg, k in p.segments]
    assert segs == [(0.0, 0.3, 1), (0.3, 1.0, 0)]


def test_contiguous_quarters():
    p = build_partition([0.25, 0.75], 5, SchedulerSpec())
    assert [(seg.lo, seg.hi, k) for seg, k in p.segments] == [
        (5.0, 5.25, 0),
        (5.25, 6.0, 1),
    ]


def test_zero_probability_label_stores_nothing():
    p = build_partition([0.5, 0.0, 0.5], 0, SchedulerSpec())
    assert p.intervals_for(1) == ()
    assert interval_measure(p, 1) == 0.0
    assert interval_measure(p, 0) == 0.5


def test_step_function_half_open_boundaries():
    p = build_partition([0.4, 0.6], 3, SchedulerSpec(kind="two-outcome", offset=0.3))
    assert step_function(p, 0, 3.5) == 1
    assert step_function(p, 1, 3.5) == 0
    # a shared boundary belongs to the earlier interval
    assert step_function(p, 1, 3.3) == 1
    assert step_function(p, 0, 3.3) == 0
    # the window's right endpoint is included, the left one is not
    assert active_label(p, 4.0) == 1
    with pytest.raises(ValueError, match="outside"):
        step_function(p, 0, 3.0)
    with pytest.raises(ValueError, match="outside"):
        active_label(p, 4.0000000001)


def test_active_label_examples():
    p1 = build_partition([1.0], 0, SchedulerSpec())
    for u in [0.1, 0.5, 1.0]:
        assert active_label(p1, u) == 0
    p = build_partition([0.4, 0.6], 3, SchedulerSpec(kind="two-outcome", offset=0.3))
    assert active_label(p, 3.1) == 1
    assert active_label(p, 4.0) == 1


def test_exactly_one_label_active():
    rng = np.random.default_rng(7)
    for kind in ALL_KINDS:
        p = build_partition(random_probabilities(rng, 5), 1, spec_for(kind))
        for u in 2.0 - rng.random(300):  # lands in (1, 2]
            u = float(u)
            states = [step_function(p, k, u) for k in range(5)]
            assert sum(states) == 1
            assert states[active_label(p, u)] == 1


def test_measure_invariants_random_sweep():
    rng = np.random.default_rng(123)
    for _ in range(60):
        d = int(rng.integers(2, 17))
        probs = random_probabilities(rng, d)
        for kind in ALL_KINDS:
            p = build_partition(probs, int(rng.integers(0, 50)), spec_for(kind))
            worst = check_partition(p)
            assert worst <= 1e-9
            total = sum(interval_measure(p, k) for k in range(d))
            assert abs(total - 1.0) <= 1e-9


def test_determinism_bit_identical():
    rng = np.random.default_rng(5)
    probs = random_probabilities(rng, 6)
    for kind in ALL_KINDS:
        a = build_partition(probs, 9, spec_for(kind))
        b = build_partition(probs, 9, spec_for(kind))
        assert dump_partition(a) == dump_partition(b)


def test_seeded_random_respects_max_subintervals():
    rng = np.random.default_rng(21)
    for trial in range(30):
        d = int(rng.integers(2, 9))
        n_max = int(rng.integers(1, 5))
        spec = SchedulerSpec(kind="seeded-random", max_subintervals=n_max, seed=trial)
        p = build_partition(random_probabilities(rng, d), 0, spec)
        for k in range(d):
            assert len(p.intervals_for(k)) <= n_max


def test_seeded_random_windows_independent():
    # stream is keyed by (seed, window): same window twice is identical,
    # different windows differ
    probs = [0.3, 0.3, 0.4]
    spec = SchedulerSpec(kind="seeded-random", max_subintervals=3, seed=99)
    a = build_partition(probs, 4, spec)
    b = build_partition(probs, 4, spec)
    c = build_partition(probs, 5, spec)
    assert dump_partition(a) == dump_partition(b)
    rel_a = [(seg.lo - 4.0, k) for seg, k in a.segments]
    rel_c = [(seg.lo - 5.0, k) for seg, k in c.segments]
    assert rel_a != rel_c


def test_periodic_extend_examples():
    p = build_partition([1.0], 0, SchedulerSpec())
    shifted = periodic_extend(p, 5)
    assert shifted.segments == ((SubInterval(5.0, 6.0), 0),)

    p2 = build_partition([0.4, 0.6], 0, SchedulerSpec(kind="two-outcome", offset=0.3))
    s2 = periodic_extend(p2, 3)
    bounds = [seg.lo for seg, _ in s2.segments] + [s2.segments[-1][0].hi]
    assert bounds == [3.0, 3.3, 3.7, 4.0]
    for k in range(2):
        assert abs(interval_measure(s2, k) - interval_measure(p2, k)) <= 1e-9


def test_periodic_extend_requires_window_zero():
    p = build_partition([1.0], 1, SchedulerSpec())
    with pytest.raises(ValueError, match="window-0"):
        periodic_extend(p, 3)


def test_build_partition_rejections():
    with pytest.raises(ValueError, match="non-negative"):
        build_partition([-0.2, 1.2], 0, SchedulerSpec())
    with pytest.raises(ValueError, match="sum"):
        build_partition([0.4, 0.4], 0, SchedulerSpec())
    with pytest.raises(ValueError, match="window_index"):
        build_partition([1.0], -1, SchedulerSpec())


def test_small_probability_drift_is_renormalized():
    drifted = [0.4 + 2e-7, 0.6]
    p = build_partition(drifted, 0, SchedulerSpec())
    assert abs(float(p.probabilities.sum()) - 1.0) < 1e-15
    assert check_partition(p) <= 1e-9


def test_scheduler_spec_validation():
    with pytest.raises(ValueError, match="kind"):
        SchedulerSpec(kind="mystery")
    with pytest.raises(ValueError, match="max_subintervals"):
        SchedulerSpec(max_subintervals=0)
    with pytest.raises(ValueError, match="offset"):
        SchedulerSpec(offset=1.5)


def test_span_partition_scales_measures():
    p = build_partition_span([0.25, 0.75], 2.4, 3.0, SchedulerSpec(), window_index=2)
    assert p.lo == 2.4 and p.hi == 3.0
    assert interval_measure(p, 0) == pytest.approx(0.25 * 0.6, abs=1e-12)
    assert interval_measure(p, 1) == pytest.approx(0.75 * 0.6, abs=1e-12)
    assert check_partition(p) <= 1e-9
    with pytest.raises(ValueError, match="hi > lo"):
        build_partition_span([1.0], 3.0, 3.0, SchedulerSpec(), window_index=3)


def test_check_partition_flags_corruption():
    p = build_partition([0.5, 0.5], 0, SchedulerSpec())
    # fault injection: punch a hole in the coverage
    seg0, k0 = p.segments[0]
    broken = (
        (SubInterval(seg0.lo, seg0.hi - 0.1), k0),
        p.segments[1],
    )
    object.__setattr__(p, "segments", broken)
    with pytest.raises(InvariantViolation, match="gap"):
        check_partition(p)


def test_check_partition_flags_bad_measure():
    p = build_partition([0.5, 0.5], 0, SchedulerSpec())
    relabeled = ((p.segments[0][0], 0), (p.segments[1][0], 0))
    object.__setattr__(p, "segments", relabeled)
    with pytest.raises(InvariantViolation, match="measure"):
        check_partition(p)


def test_dump_format_round_trips():
    p = build_partition([0.4, 0.6], 3, SchedulerSpec(kind="two-outcome", offset=0.3))
    text = dump_partition(p)
    lines = text.strip().splitlines()
    assert lines[0] == "window_index,label,lo,hi"
    parsed = [ln.split(",") for ln in lines[1:]]
    los = [float(row[2]) for row in parsed]
    assert los == sorted(los)
    # repr floats survive the round trip bit-exactly
    for row, (seg, k) in zip(parsed, p.segments):
        assert int(row[0]) == 3 and int(row[1]) == k
        assert float(row[2]) == seg.lo and float(row[3]) == seg.hi


def test_subinterval_contract():
    with pytest.raises(ValueError):
        SubInterval(1.0, 1.0)
    iv = SubInterval(0.5, 1.5)
    assert iv.contains(1.5) and not iv.contains(0.5)
    assert iv.shifted(2.0) == SubInterval(2.5, 3.5)


@settings(max_examples=60, deadline=None)
@given(
    weights=st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=2, max_size=10),
    kind=st.sampled_from(ALL_KINDS),
    window=st.integers(min_value=0, max_value=200),
)
def test_partition_invariants_property(weights, kind, window):
    total = sum(weights)
    if total < 1e-6:
        return
    probs = np.array(weights) / total
    p = build_partition(probs, window, SchedulerSpec(kind=kind, max_subintervals=2, seed=3))
    assert check_partition(p) <= 1e-9
    assert p.segments[0][0].lo == float(window)
    assert p.segments[-1][0].hi == float(window + 1)
