#
# Position as a partition label.
#
# A sampled Gaussian wavefunction on a fine uniform grid is renormalized
# over one window of width lambda (an odd number of unit cells), each cell
# is integrated to a probability, and the cell probabilities drive the
# same window-partition builder used everywhere else: "where is the
# particle" becomes "which cell's sub-interval contains u".
#

import numpy as np

from qergo import SchedulerSpec, active_label
from qergo.qgrid import (
    GridWavefunction,
    cell_probabilities,
    position_partition,
    window_cells,
    window_renormalize,
)

SPACING = 1.0 / 32.0
SIGMA, MU = 1.7, 10.5
CENTER_CELL = 10

xs = np.arange(0.0, 21.0 + SPACING / 2, SPACING)
samples = np.exp(-((xs - MU) ** 2) / (4.0 * SIGMA**2)).astype(np.complex128)
wf = GridWavefunction(
    samples=samples, origin=0.0, spacing=SPACING, planck_step=1.0, compton_wavelength=9.0
)

wf = window_renormalize(wf, CENTER_CELL)
cells = window_cells(wf, CENTER_CELL)
probs = cell_probabilities(wf, CENTER_CELL)

print(f"window of {len(cells)} cells centered on cell {CENTER_CELL}")
print("\ncell   q range        probability")
for k, pr in zip(cells, probs):
    lo, hi = wf.cell_edges(k)
    print(f"  {k:<4} [{lo:4.1f}, {hi:4.1f})   {pr:.6f}")
print(f"\nsum of probabilities: {np.sum(probs):.12f}")

# Feed the cells into the time-partition machinery for window 0.
part = position_partition(wf, CENTER_CELL, 0, SchedulerSpec())
print("\ntime sub-interval owned by each cell (contiguous layout):")
for seg, label in part.segments:
    print(f"  ({seg.lo:.6f}, {seg.hi:.6f}]  -> cell {cells[label]}")

u = 0.5
k = active_label(part, u)
print(f"\nat u = {u}: active cell {cells[k]}, i.e. q in [{wf.cell_edges(cells[k])[0]}, {wf.cell_edges(cells[k])[1]})")
