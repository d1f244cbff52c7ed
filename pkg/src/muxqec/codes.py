"""CSS code construction: hypergraph products and toric codes.

A hypergraph product of classical parity checks ``H1`` (r1 x n1) and
``H2`` (r2 x n2) has check matrices

    H_X = (H1 (x) I_n2 | I_r1 (x) H2^T)
    H_Z = (I_n1 (x) H2  | H1^T (x) I_r2)

with qubits split into a first block of n1*n2 (row-major over the
n1 x n2 grid) followed by a second block of r1*r2 (row-major over
r1 x r2).  Under this ordering and the standard row-major Kronecker
product, the toric code is the product of two cycle repetition checks.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from . import gf2
from .gf2 import BinaryMatrix, BitVector, RowBasis

BLOCK_FIRST = 0
BLOCK_SECOND = 1

HORIZONTAL = "horizontal"
VERTICAL = "vertical"


class CodeConstructionError(Exception):
    """Computed code parameters contradict the requested construction."""


@dataclass(frozen=True)
class HgpMeta:
    """Block dimensions and qubit layout of a hypergraph product."""

    r1: int
    n1: int
    r2: int
    n2: int

    @property
    def first_block_size(self) -> int:
        return self.n1 * self.n2

    @property
    def n(self) -> int:
        return self.n1 * self.n2 + self.r1 * self.r2

    def coord(self, q: int) -> tuple[int, int, int]:
        """Map a qubit index to (block, row, col), row-major per block."""
        fb = self.first_block_size
        if q < 0 or q >= self.n:
            raise ValueError(f"qubit index {q} out of range [0, {self.n})")
        if q < fb:
            return (BLOCK_FIRST, q // self.n2, q % self.n2)
        off = q - fb
        return (BLOCK_SECOND, off // self.r2, off % self.r2)

    def index(self, block: int, row: int, col: int) -> int:
        if block == BLOCK_FIRST:
            return row * self.n2 + col
        return self.first_block_size + row * self.r2 + col


class CssCode:
    """A CSS code given by a pair of commuting check matrices.

    Logical operator bases are computed at construction and satisfy the
    canonical pairing ``logical_x[i] . logical_z[j] = delta_ij``.
    """

    def __init__(
        self,
        h_x: BinaryMatrix,
        h_z: BinaryMatrix,
        meta: HgpMeta | None = None,
        toric_d: int | None = None,
        name: str = "css",
    ):
        if h_x.cols != h_z.cols:
            raise CodeConstructionError("H_X and H_Z disagree on qubit count")
        if not _commute(h_x, h_z):
            raise CodeConstructionError("H_X . H_Z^T != 0")
        self.h_x = h_x
        self.h_z = h_z
        self.n = h_x.cols
        self.meta = meta
        self.toric_d = toric_d
        self.name = name
        self.rank_x = gf2.rank(h_x)
        self.rank_z = gf2.rank(h_z)
        self.k = self.n - self.rank_x - self.rank_z
        self.logical_x, self.logical_z = logical_basis(self)
        self._row_supports: dict[str, tuple] = {}
        self._col_supports: dict[str, tuple] = {}

    def check_matrix(self, side: str) -> BinaryMatrix:
        if side == "x":
            return self.h_x
        if side == "z":
            return self.h_z
        raise ValueError(f"side must be 'x' or 'z', got {side!r}")

    def row_supports(self, side: str) -> tuple:
        """Qubit supports of the generator rows of one check matrix."""
        if side not in self._row_supports:
            self._row_supports[side] = self.check_matrix(side).row_supports()
        return self._row_supports[side]

    def col_supports(self, side: str) -> tuple:
        """Per-qubit adjacent check lists for one check matrix."""
        if side not in self._col_supports:
            self._col_supports[side] = self.check_matrix(side).col_supports()
        return self._col_supports[side]

    def __repr__(self):
        return f"CssCode(name={self.name!r}, n={self.n}, k={self.k})"


def _commute(h_x: BinaryMatrix, h_z: BinaryMatrix) -> bool:
    for i in range(h_x.rows):
        row = h_x.row(i)
        if h_z.matvec(row).weight():
            return False
    return True


def _kron(a: BinaryMatrix, b: BinaryMatrix) -> np.ndarray:
    return np.kron(a.to_dense(), b.to_dense())


def hgp(h1: BinaryMatrix, h2: BinaryMatrix, name: str | None = None) -> CssCode:
    """Hypergraph product of two classical parity check matrices."""
    r1, n1 = h1.rows, h1.cols
    r2, n2 = h2.rows, h2.cols
    i_n1 = BinaryMatrix.identity(n1)
    i_n2 = BinaryMatrix.identity(n2)
    i_r1 = BinaryMatrix.identity(r1)
    i_r2 = BinaryMatrix.identity(r2)
    h1t = h1.transpose()
    h2t = h2.transpose()
    hx_dense = np.hstack([_kron(h1, i_n2), _kron(i_r1, h2t)])
    hz_dense = np.hstack([_kron(i_n1, h2), _kron(h1t, i_r2)])
    h_x = BinaryMatrix.from_dense(hx_dense)
    h_z = BinaryMatrix.from_dense(hz_dense)
    meta = HgpMeta(r1=r1, n1=n1, r2=r2, n2=n2)
    code = CssCode(h_x, h_z, meta=meta, name=name or f"hgp({r1}x{n1},{r2}x{n2})")
    k1, k2 = n1 - gf2.rank(h1), n2 - gf2.rank(h2)
    k1t, k2t = r1 - gf2.rank(h1), r2 - gf2.rank(h2)
    expected_k = k1 * k2 + k1t * k2t
    if code.k != expected_k:
        raise CodeConstructionError(
            f"computed k={code.k} but block ranks predict {expected_k}"
        )
    return code


def cycle_matrix(d: int) -> BinaryMatrix:
    """d x d circulant with ones at columns i and i+1 mod d of row i."""
    dense = np.zeros((d, d), dtype=np.uint8)
    for i in range(d):
        dense[i, i] = 1
        dense[i, (i + 1) % d] = 1
    return BinaryMatrix.from_dense(dense)


@functools.lru_cache(maxsize=32)
def toric(d: int) -> CssCode:
    """Toric code on a periodic d x d lattice, parameters [[2d^2, 2, d]]."""
    if d < 2:
        raise ValueError(f"toric code needs d >= 2, got {d}")
    c = cycle_matrix(d)
    code = hgp(c, c, name=f"toric(d={d})")
    code.toric_d = d
    if code.n != 2 * d * d or code.k != 2:
        raise CodeConstructionError(
            f"toric({d}) produced n={code.n}, k={code.k}; expected n={2 * d * d}, k=2"
        )
    return code


def logical_basis(code: CssCode) -> tuple[list[BitVector], list[BitVector]]:
    """Canonical symplectic logical bases for a CSS code.

    X representatives live in ker(H_Z) outside rowspace(H_X), Z
    representatives dually; the two lists pair as the identity under
    the overlap-parity product.  Deterministic given the check
    matrices: kernel vectors are taken in free-column order and reduced
    against the stabilizer rowspaces with lowest-pivot-first
    tie-breaking.
    """
    x_cands = _quotient_candidates(code.h_z, code.h_x)
    z_cands = _quotient_candidates(code.h_x, code.h_z)
    if len(x_cands) != code.k or len(z_cands) != code.k:
        raise CodeConstructionError(
            f"logical candidate counts ({len(x_cands)}, {len(z_cands)}) != k={code.k}"
        )
    logical_x: list[BitVector] = []
    logical_z: list[BitVector] = []
    xs = list(x_cands)
    zs = list(z_cands)
    while xs:
        x = xs.pop(0)
        j = next((idx for idx, z in enumerate(zs) if x.dot(z) == 1), None)
        if j is None:
            raise CodeConstructionError("degenerate symplectic pairing")
        z = zs.pop(j)
        xs = [x2 ^ x if x2.dot(z) else x2 for x2 in xs]
        zs = [z2 ^ z if z2.dot(x) else z2 for z2 in zs]
        logical_x.append(x)
        logical_z.append(z)
    for i, x in enumerate(logical_x):
        for j, z in enumerate(logical_z):
            if x.dot(z) != (1 if i == j else 0):
                raise CodeConstructionError("symplectic pairing is not canonical")
    return logical_x, logical_z


def _quotient_candidates(h_kernel: BinaryMatrix, h_quotient: BinaryMatrix):
    """Kernel vectors of ``h_kernel`` independent of rowspace(``h_quotient``)."""
    basis = RowBasis(h_kernel.cols)
    for i in range(h_quotient.rows):
        basis.add(h_quotient.row(i))
    out = []
    for v in gf2.nullspace_basis(h_kernel):
        if basis.add(v):
            out.append(v)
    return out


def hgp_coord(code: CssCode, q: int) -> tuple[int, int, int]:
    """(block, row, col) of a qubit in the product layout."""
    if code.meta is None:
        raise UnsupportedCodeError("code carries no hypergraph-product layout")
    return code.meta.coord(q)


class UnsupportedCodeError(Exception):
    """The operation needs structure this code does not have."""


def toric_edge_coord(d: int, q: int) -> tuple[str, int, int]:
    """(orientation, i, j) of a toric qubit; first block is horizontal."""
    n = 2 * d * d
    if q < 0 or q >= n:
        raise ValueError(f"qubit index {q} out of range [0, {n})")
    if q < d * d:
        return (HORIZONTAL, q // d, q % d)
    off = q - d * d
    return (VERTICAL, off // d, off % d)


@functools.lru_cache(maxsize=32)
def toric_midpoints(d: int) -> tuple[np.ndarray, np.ndarray]:
    """Edge midpoints of toric(d) on the doubled 2d x 2d integer grid.

    Horizontal qubit (i, j) sits between the X checks (i-1, j) and
    (i, j) of the product layout, vertical qubit (i, j) between
    (i, j) and (i, j+1); doubling coordinates keeps cross-orientation
    Manhattan distances integral (2x the lattice distance).
    """
    n = 2 * d * d
    xs = np.empty(n, dtype=np.int64)
    ys = np.empty(n, dtype=np.int64)
    for i in range(d):
        for j in range(d):
            q = i * d + j
            xs[q] = (2 * i - 1) % (2 * d)
            ys[q] = 2 * j
            q = d * d + i * d + j
            xs[q] = 2 * i
            ys[q] = (2 * j + 1) % (2 * d)
    return xs, ys


def torus_distance2(d: int, q1: int, q2: int) -> int:
    """Twice the torus Manhattan distance between two toric qubits."""
    xs, ys = toric_midpoints(d)
    p = 2 * d
    dx = abs(int(xs[q1]) - int(xs[q2]))
    dy = abs(int(ys[q1]) - int(ys[q2]))
    return min(dx, p - dx) + min(dy, p - dy)
