#
# One unit window split between two outcomes.
#
# A state with weights (0.4, 0.6) on the computational basis gets window 3
# carved into labelled sub-intervals whose lengths ARE those weights.  The
# two-outcome layout keeps label 0 in one contiguous block placed at a
# configurable offset; label 1 fills the rest.
#

import numpy as np

from qergo import (
    SchedulerSpec,
    active_label,
    build_partition,
    check_partition,
    interval_measure,
    step_function,
)

WINDOW = 3
PROBS = np.array([0.4, 0.6])
OFFSET = 0.3

spec = SchedulerSpec(kind="two-outcome", offset=OFFSET)
part = build_partition(PROBS, WINDOW, spec)

print(f"window {WINDOW}: weights {PROBS.tolist()}, label-0 block offset {OFFSET}")
print()
print("  interval             label")
for seg, k in part.segments:
    print(f"  ({seg.lo:.4f}, {seg.hi:.4f}]    {k}")

# Coverage / measure invariant: lengths reproduce the weights exactly.
worst = check_partition(part)
print(f"\ncoverage check, worst deviation: {worst:.3e}")
for k in range(2):
    m = interval_measure(part, k)
    print(f"label {k}: total length {m:.17g}  (weight {PROBS[k]})")

# The step functions: exactly one label active at any instant.
print("\n  u       S_0  S_1  active")
for u in [3.1, 3.3, 3.31, 3.5, 3.7, 3.71, 4.0]:
    s0 = step_function(part, 0, u)
    s1 = step_function(part, 1, u)
    assert s0 + s1 == 1
    print(f"  {u:<6}  {s0}    {s1}    {active_label(part, u)}")
