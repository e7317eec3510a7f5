"""Finite-dimensional states, commuting observable sets, and unitary evolution.

Conventions used throughout the package:

* Times are dimensionless window units ``u = t / tau``; window ``N`` is the
  half-open interval ``(N, N + 1]``.  :class:`PhysicalScales` converts
  laboratory seconds to window units at the I/O boundary only.
* Hamiltonian matrices are dimensionless as well (energy times ``tau/hbar``),
  so propagation over ``du`` window units applies ``exp(-i H du)``.
* A maximal set of commuting observables is stored as a single orthonormal
  eigenbasis whose columns carry a multi-index label (one integer per member
  observable) and a tuple of real eigenvalues (one per member).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

NORM_TOL = 1e-9
HERMITICITY_TOL = 1e-10
UNITARITY_TOL = 1e-10
CONSERVED_TOL = 1e-10

__all__ = [
    "NORM_TOL",
    "HERMITICITY_TOL",
    "UNITARITY_TOL",
    "CONSERVED_TOL",
    "PhysicalScales",
    "QuantumState",
    "CommutingSet",
    "Hamiltonian",
    "make_state",
    "evolve",
    "born_probabilities",
    "expectation",
    "commutator_norm",
    "off_diagonal_norm",
    "is_conserved",
]


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PhysicalScales:
    """Laboratory scales attached to the dimensionless picture.

    ``tau`` is the window length in seconds (for a particle of mass m it
    would be h/(m c^2)); ``hbar`` is kept configurable so natural-unit
    setups stay exact.
    """

    tau: float
    hbar: float = 1.0

    def __post_init__(self):
        if not (self.tau > 0.0) or not np.isfinite(self.tau):
            raise ValueError(f"tau must be positive and finite, got {self.tau}")
        if not (self.hbar > 0.0) or not np.isfinite(self.hbar):
            raise ValueError(f"hbar must be positive and finite, got {self.hbar}")

    def to_windows(self, t_seconds: float) -> float:
        """Convert a laboratory time in seconds to window units."""
        return t_seconds / self.tau

    def to_seconds(self, u: float) -> float:
        """Convert a time in window units to laboratory seconds."""
        return u * self.tau


@dataclass(frozen=True, eq=False)
class QuantumState:
    """A normalized state vector.

    The constructor rejects vectors whose norm strays from 1 by more than
    ``NORM_TOL`` instead of silently fixing them; use :func:`make_state`
    to normalize arbitrary input.  ``renormalized`` marks states whose
    construction step applied a drift correction (see :func:`evolve`).
    """

    amplitudes: np.ndarray
    input_norm: float = 1.0
    renormalized: bool = False

    def __post_init__(self):
        vec = np.array(self.amplitudes, dtype=np.complex128)
        if vec.ndim != 1 or vec.size < 1:
            raise ValueError("state amplitudes must form a non-empty 1-d vector")
        if not np.all(np.isfinite(vec.view(np.float64))):
            raise ValueError("state amplitudes must be finite")
        nrm = float(np.linalg.norm(vec))
        if abs(nrm - 1.0) > NORM_TOL:
            raise ValueError(
                f"state norm {nrm!r} deviates from 1 by more than {NORM_TOL}; "
                "use make_state() to normalize raw amplitudes"
            )
        object.__setattr__(self, "amplitudes", _readonly(vec))

    @property
    def dimension(self) -> int:
        return self.amplitudes.size

    def overlap(self, other: "QuantumState") -> complex:
        """Inner product <self|other>."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def make_state(amplitudes) -> QuantumState:
    """Normalize raw amplitudes into a :class:`QuantumState`.

    The Euclidean norm of the input is recorded on the result as
    ``input_norm`` so callers can audit how much rescaling happened.
    Rejects the zero vector.
    """
    vec = np.asarray(amplitudes, dtype=np.complex128)
    if vec.ndim != 1 or vec.size < 1:
        raise ValueError("state amplitudes must form a non-empty 1-d vector")
    nrm = float(np.linalg.norm(vec))
    if nrm == 0.0 or not np.isfinite(nrm):
        raise ValueError("cannot normalize a zero or non-finite vector")
    return QuantumState(vec / nrm, input_norm=nrm)


@dataclass(frozen=True, eq=False)
class CommutingSet:
    """A complete set of commuting observables, stored via its joint eigenbasis.

    ``basis`` holds the orthonormal eigenvectors as columns.  Column ``k``
    carries the multi-index ``labels[k]`` (one integer per member observable)
    and the eigenvalue tuple ``eigenvalues[k]`` (one real value per member).
    Labels must be pairwise distinct: jointly they identify the eigenvector.
    """

    id: str
    basis: np.ndarray
    labels: tuple[tuple[int, ...], ...]
    eigenvalues: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        if not self.id:
            raise ValueError("commuting set id must be a non-empty string")
        b = np.array(self.basis, dtype=np.complex128)
        if b.ndim != 2 or b.shape[0] != b.shape[1] or b.shape[0] < 1:
            raise ValueError(f"basis must be a square matrix, got shape {b.shape}")
        d = b.shape[0]
        gram_dev = float(np.max(np.abs(b.conj().T @ b - np.eye(d))))
        if gram_dev > UNITARITY_TOL:
            raise ValueError(
                f"basis columns are not orthonormal: max |B*B - I| = {gram_dev:.3e}"
            )
        labels = tuple(tuple(int(i) for i in lab) for lab in self.labels)
        eigs = tuple(tuple(float(x) for x in ev) for ev in self.eigenvalues)
        if len(labels) != d or len(eigs) != d:
            raise ValueError("need exactly one label and one eigenvalue tuple per basis column")
        if len(set(labels)) != d:
            raise ValueError("labels must be pairwise distinct")
        arities = {len(lab) for lab in labels} | {len(ev) for ev in eigs}
        if len(arities) != 1 or 0 in arities:
            raise ValueError("labels and eigenvalue tuples must share one positive arity")
        object.__setattr__(self, "basis", _readonly(b))
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "eigenvalues", eigs)

    @property
    def dimension(self) -> int:
        return self.basis.shape[0]

    @property
    def n_members(self) -> int:
        """Number of member observables in the commuting set."""
        return len(self.labels[0])

    @cached_property
    def _label_lookup(self) -> dict[tuple[int, ...], int]:
        return {lab: k for k, lab in enumerate(self.labels)}

    def label_index(self, label) -> int:
        """Column index for a multi-index label (a bare int means a 1-tuple)."""
        key = (int(label),) if np.isscalar(label) else tuple(int(i) for i in label)
        try:
            return self._label_lookup[key]
        except KeyError:
            raise ValueError(f"{self.id!r} has no eigenvector labelled {key}") from None

    def basis_vector(self, k: int) -> np.ndarray:
        """Copy of eigenvector column ``k``."""
        if not 0 <= k < self.dimension:
            raise ValueError(f"column index {k} out of range for dimension {self.dimension}")
        return self.basis[:, k].copy()

    def observable_matrix(self, member: int = 0) -> np.ndarray:
        """Dense matrix of one member observable, sum_k w_k |k><k|."""
        if not 0 <= member < self.n_members:
            raise ValueError(f"member index {member} out of range ({self.n_members} members)")
        w = np.array([ev[member] for ev in self.eigenvalues])
        return (self.basis * w) @ self.basis.conj().T


@dataclass(frozen=True, eq=False)
class Hamiltonian:
    """A Hermitian generator of time evolution (dimensionless units)."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise ValueError(f"hamiltonian must be a square matrix, got shape {m.shape}")
        dev = float(np.max(np.abs(m - m.conj().T)))
        if dev > HERMITICITY_TOL:
            raise ValueError(f"hamiltonian is not Hermitian: max |H - H*| = {dev:.3e}")
        object.__setattr__(self, "matrix", _readonly(m))

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def _eigensystem(self) -> tuple[np.ndarray, np.ndarray]:
        w, v = np.linalg.eigh(self.matrix)
        return _readonly(w), _readonly(v)

    @property
    def energies(self) -> np.ndarray:
        return self._eigensystem[0]

    def propagator(self, du: float) -> np.ndarray:
        """Unitary ``exp(-i H du)`` built from the cached eigensystem."""
        w, v = self._eigensystem
        return (v * np.exp(-1j * w * du)) @ v.conj().T


def evolve(state: QuantumState, hamiltonian: Hamiltonian, du: float) -> QuantumState:
    """Propagate ``state`` forward by ``du`` window units.

    Backward evolution is rejected.  If accumulated rounding pushes the
    propagated norm off 1 by more than ``NORM_TOL`` the vector is rescaled
    and the returned state carries ``renormalized=True``; callers that need
    bit-level determinism audits can count those flags.
    """
    if du < 0:
        raise ValueError(f"cannot evolve backward (du = {du})")
    if hamiltonian.dimension != state.dimension:
        raise ValueError(
            f"dimension mismatch: state {state.dimension}, hamiltonian {hamiltonian.dimension}"
        )
    if du == 0.0:
        return state
    psi = hamiltonian.propagator(du) @ state.amplitudes
    nrm = float(np.linalg.norm(psi))
    drifted = abs(nrm - 1.0) > NORM_TOL
    if drifted:
        psi = psi / nrm
    return QuantumState(psi, renormalized=drifted)


def born_probabilities(state: QuantumState, cset: CommutingSet) -> np.ndarray:
    """Probability vector ``|<k|psi>|^2`` over the eigenbasis columns."""
    if cset.dimension != state.dimension:
        raise ValueError(
            f"dimension mismatch: state {state.dimension}, basis {cset.dimension}"
        )
    amp = cset.basis.conj().T @ state.amplitudes
    return np.abs(amp) ** 2


def expectation(state: QuantumState, cset: CommutingSet, member: int = 0) -> float:
    """Quantum expectation of one member observable in ``state``."""
    if member < 0 or member >= cset.n_members:
        raise ValueError(f"member index {member} out of range ({cset.n_members} members)")
    p = born_probabilities(state, cset)
    w = np.array([ev[member] for ev in cset.eigenvalues])
    return float(p @ w)


def commutator_norm(a: CommutingSet, b: CommutingSet, member_a: int = 0, member_b: int = 0) -> float:
    """Max-abs entry of the commutator [A, B] of two member observables."""
    ma = a.observable_matrix(member_a)
    mb = b.observable_matrix(member_b)
    if ma.shape != mb.shape:
        raise ValueError("commutator requires observables of equal dimension")
    return float(np.max(np.abs(ma @ mb - mb @ ma)))


def off_diagonal_norm(hamiltonian: Hamiltonian, cset: CommutingSet) -> float:
    """Max-abs off-diagonal entry of the Hamiltonian in the set's eigenbasis."""
    if hamiltonian.dimension != cset.dimension:
        raise ValueError("dimension mismatch between hamiltonian and basis")
    m = cset.basis.conj().T @ hamiltonian.matrix @ cset.basis
    off = m - np.diag(np.diag(m))
    return float(np.max(np.abs(off)))


def is_conserved(hamiltonian: Hamiltonian, cset: CommutingSet, tol: float = CONSERVED_TOL) -> bool:
    """Whether every member observable commutes with the Hamiltonian.

    True exactly when the Hamiltonian is diagonal in the joint eigenbasis
    (up to ``tol``), in which case eigenbasis weights are constants of
    motion and window layouts can be chosen periodic.
    """
    return off_diagonal_norm(hamiltonian, cset) <= tol
