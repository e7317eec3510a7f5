"""Declarative scenario files: a strict line-based grammar with nested blocks.

The format is deliberately small: ``key = value`` pairs and ``name { ... }``
blocks, one item per line, ``#`` comments.  Complex numbers are written
``a+bi`` (also ``a``, ``bi``).  Unknown keys and blocks are rejected with
their line number — silent typos in physics configs are the classic failure
mode, so parsing is strict.

Example::

    system {
      dimension = 2
      state = 1, 0
      hamiltonian {
        row = 0, 0.5
        row = 0.5, 0
      }
    }

    csco {
      id = sz
      basis {
        row = 1, 0
        row = 0, 1
      }
      labels = (0), (1)
      eigenvalues = (1), (-1)
    }

    experiment {
      kind = trajectory
      windows = 10
    }

See the bundled configs for complete working scenarios.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .hilbert import CommutingSet, Hamiltonian, PhysicalScales, QuantumState, make_state
from .microstate import Scenario
from .partition import SCHEDULER_KINDS, SchedulerSpec

__all__ = [
    "ScenarioConfig",
    "TrajectoryExperiment",
    "BornSamplingExperiment",
    "OffsetAverageExperiment",
    "SubTauExperiment",
    "SequentialExperiment",
    "QGridExperiment",
    "parse_config_text",
    "load_config",
]

_NUM = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_COMPLEX_RE = re.compile(
    rf"(?:(?P<real>{_NUM})(?P<imag>[+-](?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)i"
    rf"|(?P<imag_only>{_NUM})i"
    rf"|(?P<real_only>{_NUM}))"
)
_BLOCK_OPEN_RE = re.compile(r"^([A-Za-z][\w-]*)\s*\{$")
_KEY_VALUE_RE = re.compile(r"^([A-Za-z][\w-]*)\s*=\s*(.*)$")


@dataclass(frozen=True)
class _Entry:
    key: str
    value: str
    line: int


@dataclass
class _Block:
    name: str
    line: int
    items: list = field(default_factory=list)  # _Entry | _Block

    def entries(self, key: str) -> list[_Entry]:
        return [it for it in self.items if isinstance(it, _Entry) and it.key == key]

    def blocks(self, name: str) -> list["_Block"]:
        return [it for it in self.items if isinstance(it, _Block) and it.name == name]

    def one(self, key: str, required: bool = True) -> _Entry | None:
        found = self.entries(key)
        if len(found) > 1:
            raise ConfigError(f"duplicate key {key!r} in block {self.name!r}", found[1].line)
        if not found:
            if required:
                raise ConfigError(f"block {self.name!r} is missing key {key!r}", self.line)
            return None
        return found[0]

    def one_block(self, name: str, required: bool = True) -> "_Block | None":
        found = self.blocks(name)
        if len(found) > 1:
            raise ConfigError(f"duplicate block {name!r} inside {self.name!r}", found[1].line)
        if not found:
            if required:
                raise ConfigError(f"block {self.name!r} is missing block {name!r}", self.line)
            return None
        return found[0]


def _parse_tree(text: str) -> _Block:
    root = _Block(name="<root>", line=0)
    stack = [root]
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line == "}":
            if len(stack) == 1:
                raise ConfigError("unmatched '}'", ln)
            stack.pop()
            continue
        m = _BLOCK_OPEN_RE.match(line)
        if m:
            block = _Block(name=m.group(1), line=ln)
            stack[-1].items.append(block)
            stack.append(block)
            continue
        m = _KEY_VALUE_RE.match(line)
        if m:
            stack[-1].items.append(_Entry(key=m.group(1), value=m.group(2).strip(), line=ln))
            continue
        raise ConfigError(f"cannot parse {line!r} (expected 'key = value', 'name {{' or '}}')", ln)
    if len(stack) != 1:
        raise ConfigError(f"unclosed block {stack[-1].name!r}", stack[-1].line)
    return root


def _parse_int(entry: _Entry) -> int:
    try:
        return int(entry.value)
    except ValueError:
        raise ConfigError(f"{entry.key!r} expects an integer, got {entry.value!r}", entry.line) from None


def _parse_float(entry: _Entry) -> float:
    try:
        return float(entry.value)
    except ValueError:
        raise ConfigError(f"{entry.key!r} expects a number, got {entry.value!r}", entry.line) from None


def _parse_complex_token(token: str, entry: _Entry) -> complex:
    m = _COMPLEX_RE.fullmatch(token.strip())
    if not m:
        raise ConfigError(
            f"{entry.key!r}: cannot parse complex literal {token.strip()!r} (use forms 1.5, 2i, 1+2i)",
            entry.line,
        )
    if m.group("real_only") is not None:
        return complex(float(m.group("real_only")), 0.0)
    if m.group("imag_only") is not None:
        return complex(0.0, float(m.group("imag_only")))
    return complex(float(m.group("real")), float(m.group("imag")))


def _parse_complex_list(entry: _Entry) -> list[complex]:
    tokens = [t for t in entry.value.split(",") if t.strip()]
    if not tokens:
        raise ConfigError(f"{entry.key!r} expects a comma-separated list", entry.line)
    return [_parse_complex_token(t, entry) for t in tokens]


def _parse_tuple_list(entry: _Entry, caster) -> list[tuple]:
    groups = re.findall(r"\(([^()]*)\)", entry.value)
    leftover = re.sub(r"\([^()]*\)", "", entry.value).replace(",", "").strip()
    if not groups or leftover:
        raise ConfigError(
            f"{entry.key!r} expects tuples like (0), (1) or (0,1), (1,0); got {entry.value!r}",
            entry.line,
        )
    out = []
    for g in groups:
        parts = [p.strip() for p in g.split(",") if p.strip()]
        if not parts:
            raise ConfigError(f"{entry.key!r} contains an empty tuple", entry.line)
        try:
            out.append(tuple(caster(p) for p in parts))
        except ValueError:
            raise ConfigError(f"{entry.key!r}: bad tuple entry in ({g})", entry.line) from None
    return out


def _parse_matrix(block: _Block, dimension: int) -> np.ndarray:
    rows = block.entries("row")
    stray = [it for it in block.items if isinstance(it, _Entry) and it.key != "row"]
    if stray:
        raise ConfigError(f"unknown key {stray[0].key!r} in block {block.name!r}", stray[0].line)
    if len(rows) != dimension:
        raise ConfigError(
            f"block {block.name!r} needs {dimension} 'row' entries, found {len(rows)}", block.line
        )
    mat = []
    for entry in rows:
        vals = _parse_complex_list(entry)
        if len(vals) != dimension:
            raise ConfigError(
                f"row has {len(vals)} entries, expected {dimension}", entry.line
            )
        mat.append(vals)
    return np.array(mat, dtype=np.complex128)


def _reject_unknown(block: _Block, keys: set[str], blocks: set[str]):
    for it in block.items:
        if isinstance(it, _Entry) and it.key not in keys:
            raise ConfigError(f"unknown key {it.key!r} in block {block.name!r}", it.line)
        if isinstance(it, _Block) and it.name not in blocks:
            raise ConfigError(f"unknown block {it.name!r} in block {block.name!r}", it.line)


def _parse_scheduler(block: _Block | None) -> SchedulerSpec:
    if block is None:
        return SchedulerSpec()
    _reject_unknown(block, {"kind", "max_subintervals", "seed", "offset"}, set())
    kwargs = {}
    e = block.one("kind", required=False)
    if e is not None:
        if e.value not in SCHEDULER_KINDS:
            raise ConfigError(
                f"unknown scheduler kind {e.value!r}; choose from {', '.join(SCHEDULER_KINDS)}",
                e.line,
            )
        kwargs["kind"] = e.value
    e = block.one("max_subintervals", required=False)
    if e is not None:
        kwargs["max_subintervals"] = _parse_int(e)
    e = block.one("seed", required=False)
    if e is not None:
        kwargs["seed"] = _parse_int(e)
    e = block.one("offset", required=False)
    if e is not None:
        kwargs["offset"] = _parse_float(e)
    try:
        return SchedulerSpec(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc), block.line) from None


@dataclass(frozen=True)
class TrajectoryExperiment:
    name: str
    cset_id: str | None
    windows: int


@dataclass(frozen=True)
class BornSamplingExperiment:
    name: str
    cset_id: str | None
    windows: int
    window: int
    samples: int
    seed: int


@dataclass(frozen=True)
class OffsetAverageExperiment:
    name: str
    cset_id: str | None
    windows: int
    alpha: float
    member: int


@dataclass(frozen=True)
class SubTauExperiment:
    name: str
    cset_id: str | None
    windows: int
    delta: float
    pairs: int
    seed: int


@dataclass(frozen=True)
class SequentialExperiment:
    name: str
    steps: tuple[tuple[str, float], ...]
    runs: int
    seed: int


@dataclass(frozen=True)
class QGridExperiment:
    name: str
    grid_file: str
    planck_step: float
    compton_wavelength: float
    center_cell: int
    window_index: int
    scheduler: SchedulerSpec


Experiment = (
    TrajectoryExperiment
    | BornSamplingExperiment
    | OffsetAverageExperiment
    | SubTauExperiment
    | SequentialExperiment
    | QGridExperiment
)


@dataclass(frozen=True, eq=False)
class ScenarioConfig:
    """A fully validated scenario file, ready to run."""

    scales: PhysicalScales | None
    state0: QuantumState
    hamiltonian: Hamiltonian
    csets: tuple[CommutingSet, ...]
    schedulers: dict[str, SchedulerSpec]
    experiments: tuple[Experiment, ...]
    output_dir: str
    base_dir: Path
    sha256: str

    def scenario(self, windows: int = 1) -> Scenario:
        return Scenario(
            state0=self.state0,
            hamiltonian=self.hamiltonian,
            csets=self.csets,
            schedulers=self.schedulers,
            windows=windows,
        )

    def cset_id_or_default(self, cset_id: str | None, line_hint: str = "") -> str:
        if cset_id is not None:
            return cset_id
        if len(self.csets) == 1:
            return self.csets[0].id
        raise ConfigError(
            f"several csco blocks are defined; experiment {line_hint} must name one via 'csco ='"
        )


def _parse_experiment(block: _Block, ordinal: int, cset_ids: set[str]) -> Experiment:
    kind_entry = block.one("kind")
    kind = kind_entry.value
    name_entry = block.one("id", required=False)
    name = name_entry.value if name_entry else f"{kind}-{ordinal}"
    if not re.fullmatch(r"[\w][\w.-]*", name):
        raise ConfigError(f"experiment id {name!r} must be a simple filename stem", block.line)

    def cset_ref() -> str | None:
        e = block.one("csco", required=False)
        if e is None:
            return None
        if e.value not in cset_ids:
            raise ConfigError(f"unknown csco id {e.value!r}", e.line)
        return e.value

    if kind == "trajectory":
        _reject_unknown(block, {"kind", "id", "csco", "windows"}, set())
        return TrajectoryExperiment(
            name=name, cset_id=cset_ref(), windows=_parse_int(block.one("windows"))
        )
    if kind == "born-sampling":
        _reject_unknown(block, {"kind", "id", "csco", "windows", "window", "samples", "seed"}, set())
        w_entry = block.one("window", required=False)
        return BornSamplingExperiment(
            name=name,
            cset_id=cset_ref(),
            windows=_parse_int(block.one("windows")),
            window=_parse_int(w_entry) if w_entry else 0,
            samples=_parse_int(block.one("samples")),
            seed=_parse_int(block.one("seed")),
        )
    if kind == "offset-average":
        _reject_unknown(block, {"kind", "id", "csco", "windows", "alpha", "member"}, set())
        m_entry = block.one("member", required=False)
        return OffsetAverageExperiment(
            name=name,
            cset_id=cset_ref(),
            windows=_parse_int(block.one("windows")),
            alpha=_parse_float(block.one("alpha")),
            member=_parse_int(m_entry) if m_entry else 0,
        )
    if kind == "sub-tau":
        _reject_unknown(block, {"kind", "id", "csco", "windows", "delta", "pairs", "seed"}, set())
        return SubTauExperiment(
            name=name,
            cset_id=cset_ref(),
            windows=_parse_int(block.one("windows")),
            delta=_parse_float(block.one("delta")),
            pairs=_parse_int(block.one("pairs")),
            seed=_parse_int(block.one("seed")),
        )
    if kind == "sequential-measurement":
        _reject_unknown(block, {"kind", "id", "runs", "seed", "step"}, set())
        steps = []
        for e in block.entries("step"):
            parts = [p.strip() for p in e.value.split(",")]
            if len(parts) != 2:
                raise ConfigError(
                    f"'step' expects 'csco_id, time', got {e.value!r}", e.line
                )
            cid, t = parts
            if cid not in cset_ids:
                raise ConfigError(f"unknown csco id {cid!r} in step", e.line)
            try:
                steps.append((cid, float(t)))
            except ValueError:
                raise ConfigError(f"bad step time {t!r}", e.line) from None
        if not steps:
            raise ConfigError("sequential-measurement needs at least one 'step'", block.line)
        return SequentialExperiment(
            name=name,
            steps=tuple(steps),
            runs=_parse_int(block.one("runs")),
            seed=_parse_int(block.one("seed")),
        )
    if kind == "qgrid":
        _reject_unknown(
            block,
            {"kind", "id", "grid_file", "planck_step", "compton_wavelength",
             "center_cell", "window_index"},
            {"scheduler"},
        )
        w_entry = block.one("window_index", required=False)
        return QGridExperiment(
            name=name,
            grid_file=block.one("grid_file").value,
            planck_step=_parse_float(block.one("planck_step")),
            compton_wavelength=_parse_float(block.one("compton_wavelength")),
            center_cell=_parse_int(block.one("center_cell")),
            window_index=_parse_int(w_entry) if w_entry else 0,
            scheduler=_parse_scheduler(block.one_block("scheduler", required=False)),
        )
    raise ConfigError(
        f"unknown experiment kind {kind!r} (trajectory, born-sampling, offset-average, "
        "sub-tau, sequential-measurement, qgrid)",
        kind_entry.line,
    )


def parse_config_text(text: str, base_dir: Path | str = ".") -> ScenarioConfig:
    """Parse and validate scenario text into ready-to-run objects."""
    root = _parse_tree(text)
    _reject_unknown(root, {"output_dir"}, {"scales", "system", "csco", "experiment"})

    out_entry = root.one("output_dir", required=False)
    output_dir = out_entry.value if out_entry else "out"

    scales = None
    scales_block = root.one_block("scales", required=False)
    if scales_block is not None:
        _reject_unknown(scales_block, {"tau", "hbar"}, set())
        h_entry = scales_block.one("hbar", required=False)
        try:
            scales = PhysicalScales(
                tau=_parse_float(scales_block.one("tau")),
                hbar=_parse_float(h_entry) if h_entry else 1.0,
            )
        except ValueError as exc:
            raise ConfigError(str(exc), scales_block.line) from None

    system = root.one_block("system")
    _reject_unknown(system, {"dimension", "state"}, {"hamiltonian"})
    dim = _parse_int(system.one("dimension"))
    if dim < 1:
        raise ConfigError("dimension must be at least 1", system.one("dimension").line)
    state_entry = system.one("state")
    amps = _parse_complex_list(state_entry)
    if len(amps) != dim:
        raise ConfigError(f"state has {len(amps)} amplitudes, expected {dim}", state_entry.line)
    try:
        state0 = make_state(amps)
    except ValueError as exc:
        raise ConfigError(str(exc), state_entry.line) from None
    try:
        hamiltonian = Hamiltonian(_parse_matrix(system.one_block("hamiltonian"), dim))
    except ValueError as exc:
        raise ConfigError(str(exc), system.one_block("hamiltonian").line) from None

    csets: list[CommutingSet] = []
    schedulers: dict[str, SchedulerSpec] = {}
    for cblock in root.blocks("csco"):
        _reject_unknown(cblock, {"id", "labels", "eigenvalues"}, {"basis", "scheduler"})
        cid = cblock.one("id").value
        labels = _parse_tuple_list(cblock.one("labels"), int)
        eigenvalues = _parse_tuple_list(cblock.one("eigenvalues"), float)
        basis = _parse_matrix(cblock.one_block("basis"), dim)
        try:
            cs = CommutingSet(
                id=cid, basis=basis, labels=tuple(labels), eigenvalues=tuple(eigenvalues)
            )
        except ValueError as exc:
            raise ConfigError(str(exc), cblock.line) from None
        if cid in schedulers:
            raise ConfigError(f"duplicate csco id {cid!r}", cblock.line)
        csets.append(cs)
        schedulers[cid] = _parse_scheduler(cblock.one_block("scheduler", required=False))
    if not csets:
        raise ConfigError("config defines no csco block")

    experiments = []
    cset_ids = {c.id for c in csets}
    for ordinal, eblock in enumerate(root.blocks("experiment")):
        experiments.append(_parse_experiment(eblock, ordinal, cset_ids))
    names = [e.name for e in experiments]
    if len(set(names)) != len(names):
        raise ConfigError("experiment ids must be unique across the config")

    return ScenarioConfig(
        scales=scales,
        state0=state0,
        hamiltonian=hamiltonian,
        csets=tuple(csets),
        schedulers=schedulers,
        experiments=tuple(experiments),
        output_dir=output_dir,
        base_dir=Path(base_dir),
        sha256=hashlib.sha256(text.encode("utf-8")).hexdigest(),
    )


def load_config(path) -> ScenarioConfig:
    """Read and parse a scenario file; relative paths resolve next to it."""
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError:
        raise
    return parse_config_text(text, base_dir=p.parent)
