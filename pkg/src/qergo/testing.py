"""Seeded random generators for states, bases, and Hamiltonians.

Shared by the self-check batteries and the test suite; kept in the package
so failing cases can be reproduced from (seed, dimension) alone.
"""

from __future__ import annotations

import numpy as np

from .hilbert import CommutingSet, Hamiltonian, QuantumState, make_state

__all__ = [
    "haar_unitary",
    "random_state",
    "random_probabilities",
    "random_cset",
    "random_hamiltonian",
    "sigma_z_set",
    "sigma_x_set",
]


def haar_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    """Haar-distributed d x d unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    # Fix the phase convention so the distribution is genuinely Haar.
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases.conj()


def random_state(rng: np.random.Generator, d: int) -> QuantumState:
    vec = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return make_state(vec)


def random_probabilities(rng: np.random.Generator, d: int) -> np.ndarray:
    """A random point of the probability simplex (flat Dirichlet)."""
    return rng.dirichlet(np.ones(d))


def random_cset(
    rng: np.random.Generator, d: int, n_members: int = 1, id: str = "random"
) -> CommutingSet:
    basis = haar_unitary(rng, d)
    labels = tuple((k,) * n_members for k in range(d))
    eigenvalues = tuple(
        tuple(float(x) for x in rng.standard_normal(n_members)) for _ in range(d)
    )
    return CommutingSet(id=id, basis=basis, labels=labels, eigenvalues=eigenvalues)


def random_hamiltonian(rng: np.random.Generator, d: int, scale: float = 1.0) -> Hamiltonian:
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    h = scale * (z + z.conj().T) / 2.0
    return Hamiltonian(h)


def sigma_z_set(id: str = "sz") -> CommutingSet:
    """Computational-basis qubit observable with eigenvalues +1, -1."""
    return CommutingSet(
        id=id,
        basis=np.eye(2),
        labels=((0,), (1,)),
        eigenvalues=((1.0,), (-1.0,)),
    )


def sigma_x_set(id: str = "sx") -> CommutingSet:
    """Qubit observable diagonal in the (|0>+|1>, |0>-|1>)/sqrt(2) basis."""
    b = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
    return CommutingSet(
        id=id,
        basis=b,
        labels=((0,), (1,)),
        eigenvalues=((1.0,), (-1.0,)),
    )
