"""Photon-correlated erasure sampling and Pauli conversion.

Each photon is lost independently with the configured probability, and
losing a photon erases every qubit assigned to it.  Erased qubits are
then replaced by maximally mixed states, which is sampled as a uniform
single-qubit Pauli: independent X and Z flips with probability 1/2
each.  Non-erased qubits are error-free, so decoding happens entirely
inside the erasure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assignments import PhotonAssignment
from .gf2 import BinaryMatrix, BitVector


@dataclass(frozen=True)
class ChannelConfig:
    """Per-photon loss probability."""

    p_loss: float

    def __post_init__(self):
        if not 0.0 <= self.p_loss <= 1.0:
            raise ValueError(f"p_loss must be in [0, 1], got {self.p_loss}")


@dataclass
class ErasurePattern:
    """Set of erased qubits, stored as a sorted index array."""

    n: int
    erased: np.ndarray

    @classmethod
    def from_indices(cls, n: int, indices) -> "ErasurePattern":
        idx = np.unique(np.asarray(list(indices), dtype=np.int64))
        if idx.size and (idx[0] < 0 or idx[-1] >= n):
            raise ValueError(f"erased index out of range [0, {n})")
        return cls(n=n, erased=idx)

    @property
    def count(self) -> int:
        return int(self.erased.size)

    def as_set(self) -> set[int]:
        return set(self.erased.tolist())

    def mask(self) -> BitVector:
        return BitVector.from_indices(self.n, self.erased)


@dataclass
class PauliFrame:
    """Sampled Pauli error as independent X and Z bit vectors."""

    x: BitVector
    z: BitVector

    @property
    def n(self) -> int:
        return self.x.n


def sample_loss(
    assignment: PhotonAssignment, cfg: ChannelConfig, rng: np.random.Generator
) -> ErasurePattern:
    """Erase the union of independently lost photons."""
    lost = rng.random(assignment.num_photons) < cfg.p_loss
    flat = assignment.flat_indices()
    erased = flat[np.repeat(lost, assignment.photon_sizes())]
    erased.sort()
    return ErasurePattern(n=assignment.code_n, erased=erased)


def erasure_to_pauli(e: ErasurePattern, rng: np.random.Generator) -> PauliFrame:
    """Uniform Pauli on each erased qubit: X and Z bits fair and independent."""
    k = e.count
    bits = rng.integers(0, 2, size=2 * k, dtype=np.uint8)
    x_dense = np.zeros(e.n, dtype=np.uint8)
    z_dense = np.zeros(e.n, dtype=np.uint8)
    if k:
        x_dense[e.erased] = bits[:k]
        z_dense[e.erased] = bits[k:]
    return PauliFrame(x=BitVector.from_bits(x_dense), z=BitVector.from_bits(z_dense))


def syndrome(h: BinaryMatrix, err: BitVector) -> BitVector:
    """Check values ``H . err`` over GF(2)."""
    return h.matvec(err)
