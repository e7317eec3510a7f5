"""Discrete position spectrum on a Planck-spaced grid.

Position is discretized into cells of width ``planck_step``; probabilities
come from the wavefunction renormalized over one window of width
``compton_wavelength`` centered on a chosen cell.  Each cell's probability
mass then drives the ordinary time-partition machinery, exactly as
eigenbasis weights do for any other observable.

Quadrature is composite trapezoid on the fine sample grid with one
Richardson extrapolation step; all integration ranges are aligned with
cell edges so per-cell masses sum bitwise-consistently to the window mass.
Only static wavefunctions are handled — no grid dynamics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .partition import SchedulerSpec, WindowPartition, build_partition

QUADRATURE_TOL = 1e-8
MIN_WINDOW_MASS = 1e-300
MIN_NODES_PER_CELL = 16

__all__ = [
    "QUADRATURE_TOL",
    "GridWavefunction",
    "window_renormalize",
    "planck_cell_probability",
    "window_cells",
    "cell_probabilities",
    "position_partition",
    "cell_for_label",
    "parse_grid_text",
    "load_grid",
    "format_cell_probabilities",
]


@dataclass(frozen=True, eq=False)
class GridWavefunction:
    """Complex samples on a uniform fine grid, with the two physical lengths.

    ``origin`` is the position of sample 0 and also the left edge of cell 0:
    cell ``k`` spans ``[origin + k*planck_step, origin + (k+1)*planck_step]``.
    Structural requirements, all checked at construction:

    * ``planck_step / spacing`` is an even integer ≥ 16, so every cell edge
      and every cell midpoint lies on a sample node and per-cell Richardson
      extrapolation is well defined;
    * ``compton_wavelength / planck_step`` is an odd positive integer, so a
      window centered on any cell is tiled exactly by whole cells (an even
      ratio would leave two half cells sticking out).

    ``renorm_center`` records which cell's window the samples are currently
    normalized over (None for raw input).
    """

    samples: np.ndarray
    origin: float
    spacing: float
    planck_step: float
    compton_wavelength: float
    renorm_center: int | None = None

    def __post_init__(self):
        s = np.array(self.samples, dtype=np.complex128)
        if s.ndim != 1 or s.size < 2:
            raise ValueError("samples must form a 1-d array with at least two nodes")
        if not np.all(np.isfinite(s.view(np.float64))):
            raise ValueError("samples must be finite")
        if not (self.spacing > 0.0 and self.planck_step > 0.0 and self.compton_wavelength > 0.0):
            raise ValueError("spacing, planck_step, and compton_wavelength must be positive")
        nodes = self.planck_step / self.spacing
        if abs(nodes - round(nodes)) > 1e-9 or round(nodes) % 2 != 0 or round(nodes) < MIN_NODES_PER_CELL:
            raise ValueError(
                f"planck_step/spacing must be an even integer >= {MIN_NODES_PER_CELL}, got {nodes!r}"
            )
        ratio = self.compton_wavelength / self.planck_step
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1 or round(ratio) % 2 == 0:
            raise ValueError(
                f"compton_wavelength/planck_step must be an odd positive integer, got {ratio!r}"
            )
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def nodes_per_cell(self) -> int:
        return int(round(self.planck_step / self.spacing))

    @property
    def cells_per_window(self) -> int:
        return int(round(self.compton_wavelength / self.planck_step))

    @property
    def extent(self) -> float:
        """Position of the last sample node."""
        return self.origin + (self.samples.size - 1) * self.spacing

    @property
    def n_cells(self) -> int:
        """Number of whole cells covered by the sample range."""
        return (self.samples.size - 1) // self.nodes_per_cell

    def cell_edges(self, k: int) -> tuple[float, float]:
        lo = self.origin + k * self.planck_step
        return lo, lo + self.planck_step

    def cell_center(self, k: int) -> float:
        """Window anchor for cell k: its left edge plus half a cell."""
        return self.origin + k * self.planck_step + 0.5 * self.planck_step


def _window_node_range(wf: GridWavefunction, k: int) -> tuple[int, int]:
    """Sample-node indices [a, b] spanning the window centered on cell k."""
    half_cells = (wf.cells_per_window - 1) // 2
    first_cell = k - half_cells
    last_cell = k + half_cells
    a = first_cell * wf.nodes_per_cell
    b = (last_cell + 1) * wf.nodes_per_cell
    if a < 0 or b > wf.samples.size - 1:
        raise ValueError(
            f"window of cell {k} spans cells [{first_cell}, {last_cell}], "
            f"outside the sampled range of {wf.n_cells} cells"
        )
    return a, b


def _integrate(values: np.ndarray, h: float) -> float:
    """Composite trapezoid with one Richardson step (needs an even panel count)."""
    n = values.size - 1
    if n < 2 or n % 2 != 0:
        raise ValueError("integration range must contain an even number of panels")
    t_h = float(np.trapezoid(values, dx=h))
    t_2h = float(np.trapezoid(values[::2], dx=2.0 * h))
    return (4.0 * t_h - t_2h) / 3.0


def window_renormalize(wf: GridWavefunction, k: int) -> GridWavefunction:
    """Rescale so the window centered on cell ``k`` carries unit probability.

    The window spans half a Compton wavelength either side of the cell's
    center point; its mass is computed by the module quadrature and divided
    out.  A window mass below ``MIN_WINDOW_MASS`` is rejected rather than
    amplified into nonsense.
    """
    a, b = _window_node_range(wf, k)
    density = np.abs(wf.samples[a : b + 1]) ** 2
    mass = _integrate(density, wf.spacing)
    if mass < MIN_WINDOW_MASS:
        raise ValueError(
            f"window mass {mass!r} around cell {k} is below {MIN_WINDOW_MASS}; "
            "cannot renormalize"
        )
    scaled = wf.samples * (1.0 / math.sqrt(mass))
    return replace(wf, samples=scaled, renorm_center=k)


def planck_cell_probability(wf: GridWavefunction, k: int) -> float:
    """Probability mass of cell ``k`` under the window-renormalized samples.

    Requires a prior :func:`window_renormalize`; the cell must lie inside
    the renormalization window.
    """
    if wf.renorm_center is None:
        raise ValueError("wavefunction is not window-renormalized; call window_renormalize first")
    half_cells = (wf.cells_per_window - 1) // 2
    if abs(k - wf.renorm_center) > half_cells:
        raise ValueError(
            f"cell {k} lies outside the renormalization window around cell {wf.renorm_center}"
        )
    a = k * wf.nodes_per_cell
    b = a + wf.nodes_per_cell
    density = np.abs(wf.samples[a : b + 1]) ** 2
    return _integrate(density, wf.spacing)


def window_cells(wf: GridWavefunction, k_center: int) -> list[int]:
    """Cell indices tiling the window centered on ``k_center``, left to right."""
    half_cells = (wf.cells_per_window - 1) // 2
    _window_node_range(wf, k_center)  # bounds check
    return list(range(k_center - half_cells, k_center + half_cells + 1))


def cell_probabilities(wf: GridWavefunction, k_center: int | None = None) -> np.ndarray:
    """Probability vector over the window's cells, in cell order."""
    center = wf.renorm_center if k_center is None else k_center
    if center is None:
        raise ValueError("no renormalization center given or stored")
    if wf.renorm_center != center:
        wf = window_renormalize(wf, center)
    return np.array([planck_cell_probability(wf, k) for k in window_cells(wf, center)])


def position_partition(
    wf: GridWavefunction,
    k_center: int,
    window_index: int,
    scheduler: SchedulerSpec,
) -> WindowPartition:
    """Drive the time-partition machinery with Planck-cell probabilities.

    Renormalizes over the window centered on ``k_center`` if needed, then
    hands the cell-probability vector to :func:`~qergo.partition.build_partition`.
    Partition label ``j`` stands for the j-th cell of the window;
    :func:`cell_for_label` maps back to absolute cell indices.
    """
    if wf.renorm_center != k_center:
        wf = window_renormalize(wf, k_center)
    pr = cell_probabilities(wf, k_center)
    return build_partition(pr, window_index, scheduler)


def cell_for_label(wf: GridWavefunction, k_center: int, label: int) -> int:
    """Absolute cell index behind a position-partition label."""
    cells = window_cells(wf, k_center)
    if not 0 <= label < len(cells):
        raise ValueError(f"label {label} out of range for a {len(cells)}-cell window")
    return cells[label]


def parse_grid_text(text: str) -> tuple[np.ndarray, np.ndarray]:
    """Parse three-column samples (position, real part, imaginary part).

    Whitespace-separated columns, '#' comments, blank lines ignored.
    Returns (positions, complex samples); spacing uniformity is checked by
    the caller via :func:`load_grid`.
    """
    xs: list[float] = []
    vals: list[complex] = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"grid line {ln}: expected 3 columns, got {len(parts)}")
        try:
            x, re_v, im_v = (float(p) for p in parts)
        except ValueError:
            raise ValueError(f"grid line {ln}: non-numeric value in {line!r}") from None
        xs.append(x)
        vals.append(complex(re_v, im_v))
    if len(xs) < 2:
        raise ValueError("grid needs at least two sample rows")
    return np.array(xs), np.array(vals, dtype=np.complex128)


def load_grid(
    path, planck_step: float, compton_wavelength: float
) -> GridWavefunction:
    """Load a sampled wavefunction from a text file and attach the scales.

    Verifies the sample positions are uniformly spaced (relative tolerance
    1e-9) and increasing.
    """
    with open(path, "r", encoding="utf-8") as fh:
        xs, vals = parse_grid_text(fh.read())
    steps = np.diff(xs)
    h = float(steps[0])
    if h <= 0.0 or np.any(np.abs(steps - h) > 1e-9 * max(abs(h), 1.0)):
        raise ValueError(f"grid positions in {path} are not uniformly increasing")
    return GridWavefunction(
        samples=vals,
        origin=float(xs[0]),
        spacing=h,
        planck_step=planck_step,
        compton_wavelength=compton_wavelength,
    )


def format_cell_probabilities(wf: GridWavefunction, k_center: int) -> str:
    """Render the window's cell probabilities as CSV.

    Columns: cell_index, q_lo, q_hi, probability (repr floats).
    """
    if wf.renorm_center != k_center:
        wf = window_renormalize(wf, k_center)
    lines = ["cell_index,q_lo,q_hi,probability"]
    for k in window_cells(wf, k_center):
        lo, hi = wf.cell_edges(k)
        pr = planck_cell_probability(wf, k)
        lines.append(f"{k},{lo!r},{hi!r},{pr!r}")
    return "\n".join(lines) + "\n"
