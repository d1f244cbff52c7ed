"""Bit-packed dense linear algebra over GF(2).

Matrices and vectors store 64 bits per machine word (little-endian bit
order within each word), so row operations are whole-word XORs and
row/vector products are AND + popcount.  Everything at the scales used
here (up to a few thousand columns) fits comfortably in dense words;
sparse structure is exploited elsewhere, in the decoder adjacency lists.

Objects are treated as immutable after construction: all "mutating"
operations return fresh values.  Derived data (column supports, etc.)
is cached lazily on that assumption.
"""

from __future__ import annotations

import numpy as np

_WORD = 64


def _n_words(nbits: int) -> int:
    return (nbits + _WORD - 1) // _WORD


def _pack(bits: np.ndarray) -> np.ndarray:
    """Pack a 0/1 array into little-endian uint64 words."""
    raw = np.packbits(np.asarray(bits, dtype=np.uint8), bitorder="little")
    pad = (-raw.size) % 8
    if pad:
        raw = np.concatenate([raw, np.zeros(pad, dtype=np.uint8)])
    return raw.view(np.uint64).copy()


def _unpack(words: np.ndarray, nbits: int) -> np.ndarray:
    """Inverse of :func:`_pack`; returns a uint8 array of length ``nbits``."""
    return np.unpackbits(words.view(np.uint8), count=nbits, bitorder="little")


class BitVector:
    """Fixed-length bit vector with packed storage.

    Bits beyond ``n`` in the last word are always zero.
    """

    __slots__ = ("n", "words")

    def __init__(self, n: int, words: np.ndarray | None = None):
        self.n = n
        if words is None:
            words = np.zeros(_n_words(n), dtype=np.uint64)
        self.words = words

    @classmethod
    def from_bits(cls, bits) -> "BitVector":
        bits = np.asarray(bits, dtype=np.uint8)
        return cls(int(bits.size), _pack(bits))

    @classmethod
    def from_indices(cls, n: int, indices) -> "BitVector":
        dense = np.zeros(n, dtype=np.uint8)
        idx = np.asarray(indices, dtype=np.int64)
        if idx.size:
            dense[idx] = 1
        return cls(n, _pack(dense))

    def to_array(self) -> np.ndarray:
        return _unpack(self.words, self.n)

    def support(self) -> np.ndarray:
        return np.flatnonzero(self.to_array())

    def get(self, i: int) -> int:
        return int((self.words[i >> 6] >> np.uint64(i & 63)) & np.uint64(1))

    def weight(self) -> int:
        return int(np.bitwise_count(self.words).sum())

    def is_zero(self) -> bool:
        return not self.words.any()

    def dot(self, other: "BitVector") -> int:
        """Parity of the AND of two vectors (symplectic-component product)."""
        return int(np.bitwise_count(self.words & other.words).sum()) & 1

    def __xor__(self, other: "BitVector") -> "BitVector":
        return BitVector(self.n, self.words ^ other.words)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BitVector)
            and self.n == other.n
            and bool(np.array_equal(self.words, other.words))
        )

    def __hash__(self):
        return hash((self.n, self.words.tobytes()))

    def copy(self) -> "BitVector":
        return BitVector(self.n, self.words.copy())

    def __repr__(self):
        if self.n <= 80:
            return f"BitVector({''.join(map(str, self.to_array()))})"
        return f"BitVector(n={self.n}, weight={self.weight()})"


class BinaryMatrix:
    """Dense matrix over GF(2), one packed word row stride per 64 columns."""

    __slots__ = ("rows", "cols", "words", "_col_support", "_row_support")

    def __init__(self, rows: int, cols: int, words: np.ndarray | None = None):
        self.rows = rows
        self.cols = cols
        if words is None:
            words = np.zeros((rows, _n_words(cols)), dtype=np.uint64)
        self.words = words
        self._col_support = None
        self._row_support = None

    @classmethod
    def from_dense(cls, array) -> "BinaryMatrix":
        a = np.atleast_2d(np.asarray(array, dtype=np.uint8) & 1)
        rows, cols = a.shape
        w = _n_words(cols)
        words = np.zeros((rows, w), dtype=np.uint64)
        for i in range(rows):
            words[i] = _pack(a[i])
        return cls(rows, cols, words)

    @classmethod
    def identity(cls, n: int) -> "BinaryMatrix":
        return cls.from_dense(np.eye(n, dtype=np.uint8))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BinaryMatrix":
        return cls(rows, cols)

    def to_dense(self) -> np.ndarray:
        out = np.empty((self.rows, self.cols), dtype=np.uint8)
        for i in range(self.rows):
            out[i] = _unpack(self.words[i], self.cols)
        return out

    def get(self, i: int, j: int) -> int:
        return int((self.words[i, j >> 6] >> np.uint64(j & 63)) & np.uint64(1))

    def row(self, i: int) -> BitVector:
        return BitVector(self.cols, self.words[i].copy())

    def row_weights(self) -> np.ndarray:
        return np.bitwise_count(self.words).sum(axis=1).astype(np.int64)

    def col_weights(self) -> np.ndarray:
        return self.to_dense().sum(axis=0, dtype=np.int64)

    def row_supports(self) -> tuple:
        """Per-row tuples of column indices carrying a 1 (cached)."""
        if self._row_support is None:
            dense = self.to_dense()
            self._row_support = tuple(
                tuple(np.flatnonzero(dense[i]).tolist()) for i in range(self.rows)
            )
        return self._row_support

    def col_supports(self) -> tuple:
        """Per-column tuples of row indices carrying a 1 (cached)."""
        if self._col_support is None:
            dense = self.to_dense()
            self._col_support = tuple(
                tuple(np.flatnonzero(dense[:, j]).tolist()) for j in range(self.cols)
            )
        return self._col_support

    def transpose(self) -> "BinaryMatrix":
        return BinaryMatrix.from_dense(self.to_dense().T)

    def matvec(self, v: BitVector) -> BitVector:
        """Return ``M @ v`` over GF(2) as a length-``rows`` vector."""
        if v.n != self.cols:
            raise ValueError(f"dimension mismatch: {self.cols} cols vs vector of {v.n}")
        parities = (np.bitwise_count(self.words & v.words[None, :]).sum(axis=1) & 1).astype(
            np.uint8
        )
        return BitVector(self.rows, _pack(parities))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BinaryMatrix)
            and self.rows == other.rows
            and self.cols == other.cols
            and bool(np.array_equal(self.words, other.words))
        )

    def __hash__(self):
        return hash((self.rows, self.cols, self.words.tobytes()))

    def __repr__(self):
        return f"BinaryMatrix({self.rows}x{self.cols})"


def stack(top: BinaryMatrix, bottom: BinaryMatrix) -> BinaryMatrix:
    if top.cols != bottom.cols:
        raise ValueError("column counts differ")
    return BinaryMatrix(
        top.rows + bottom.rows, top.cols, np.vstack([top.words, bottom.words])
    )


def hstack(left: BinaryMatrix, right: BinaryMatrix) -> BinaryMatrix:
    if left.rows != right.rows:
        raise ValueError("row counts differ")
    ld, rd = left.to_dense(), right.to_dense()
    return BinaryMatrix.from_dense(np.hstack([ld, rd]))


def from_rows(rows_vecs, cols: int | None = None) -> BinaryMatrix:
    rows_vecs = list(rows_vecs)
    if not rows_vecs:
        if cols is None:
            raise ValueError("cols required for an empty matrix")
        return BinaryMatrix(0, cols)
    n = rows_vecs[0].n
    words = np.vstack([v.words for v in rows_vecs])
    return BinaryMatrix(len(rows_vecs), n, words)


def _eliminate(words: np.ndarray, rows: int, cols: int, reduced: bool = True):
    """In-place Gaussian elimination; returns the pivot column list.

    With ``reduced`` the result is in reduced row echelon form (entries
    above pivots cleared too), otherwise plain row echelon form.
    """
    r = 0
    pivots = []
    one = np.uint64(1)
    for c in range(cols):
        w, b = c >> 6, np.uint64(c & 63)
        colbits = (words[r:, w] >> b) & one
        hits = np.nonzero(colbits)[0]
        if hits.size == 0:
            continue
        p = r + int(hits[0])
        if p != r:
            words[[r, p]] = words[[p, r]]
        if reduced:
            mask = ((words[:, w] >> b) & one).astype(bool)
            mask[r] = False
        else:
            mask = np.zeros(rows, dtype=bool)
            below = ((words[r + 1 :, w] >> b) & one).astype(bool)
            mask[r + 1 :] = below
        if mask.any():
            words[mask] ^= words[r]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return pivots


def row_reduce(m: BinaryMatrix) -> tuple[BinaryMatrix, list[int]]:
    """Reduced row echelon form and pivot columns; the input is untouched."""
    words = m.words.copy()
    pivots = _eliminate(words, m.rows, m.cols, reduced=True)
    return BinaryMatrix(m.rows, m.cols, words), pivots


def rank(m: BinaryMatrix) -> int:
    words = m.words.copy()
    return len(_eliminate(words, m.rows, m.cols, reduced=False))


def solve(m: BinaryMatrix, s: BitVector) -> BitVector | None:
    """One solution of ``M x = s`` with free variables zero, or None.

    Returns None exactly when the system is inconsistent.
    """
    if s.n != m.rows:
        raise ValueError(f"dimension mismatch: {m.rows} rows vs rhs of {s.n}")
    words = m.words.copy()
    rhs = s.to_array().copy()
    r = 0
    pivots = []
    one = np.uint64(1)
    for c in range(m.cols):
        w, b = c >> 6, np.uint64(c & 63)
        colbits = (words[r:, w] >> b) & one
        hits = np.nonzero(colbits)[0]
        if hits.size == 0:
            continue
        p = r + int(hits[0])
        if p != r:
            words[[r, p]] = words[[p, r]]
            rhs[[r, p]] = rhs[[p, r]]
        mask = ((words[:, w] >> b) & one).astype(bool)
        mask[r] = False
        if mask.any():
            words[mask] ^= words[r]
            rhs[mask] ^= rhs[r]
        pivots.append(c)
        r += 1
        if r == m.rows:
            break
    if rhs[r:].any():
        return None
    x = np.zeros(m.cols, dtype=np.uint8)
    for i, c in enumerate(pivots):
        x[c] = rhs[i]
    return BitVector(m.cols, _pack(x))


def nullspace_basis(m: BinaryMatrix) -> list[BitVector]:
    """Basis of ``{x : M x = 0}``, one vector per free column."""
    rref, pivots = row_reduce(m)
    pivot_set = set(pivots)
    free = [c for c in range(m.cols) if c not in pivot_set]
    basis = []
    for f in free:
        x = np.zeros(m.cols, dtype=np.uint8)
        x[f] = 1
        for i, c in enumerate(pivots):
            if rref.get(i, f):
                x[c] = 1
        basis.append(BitVector(m.cols, _pack(x)))
    return basis


def restrict_columns(m: BinaryMatrix, cols) -> BinaryMatrix:
    """Submatrix of the given columns, in ascending index order."""
    idx = sorted(set(int(c) for c in cols))
    if idx and (idx[0] < 0 or idx[-1] >= m.cols):
        raise ValueError(f"column index out of range [0, {m.cols})")
    if not idx:
        return BinaryMatrix(m.rows, 0)
    dense = m.to_dense()[:, idx]
    return BinaryMatrix.from_dense(dense)


class RowBasis:
    """Incremental GF(2) row space for membership and rank queries."""

    def __init__(self, ncols: int):
        self.ncols = ncols
        self._rows: dict[int, np.ndarray] = {}  # pivot column -> reduced row words

    def reduce(self, v: BitVector) -> np.ndarray:
        """Reduce ``v`` against the current basis; zero iff in the span."""
        w = v.words.copy()
        while True:
            nz = np.flatnonzero(w)
            if nz.size == 0:
                return w
            word_i = int(nz[0])
            bit = int(w[word_i] & (~w[word_i] + np.uint64(1))).bit_length() - 1
            pivot = (word_i << 6) + bit
            row = self._rows.get(pivot)
            if row is None:
                return w
            w ^= row

    def contains(self, v: BitVector) -> bool:
        return not self.reduce(v).any()

    def add(self, v: BitVector) -> bool:
        """Insert ``v``; returns True if it enlarged the span."""
        w = self.reduce(v)
        nz = np.flatnonzero(w)
        if nz.size == 0:
            return False
        word_i = int(nz[0])
        bit = int(w[word_i] & (~w[word_i] + np.uint64(1))).bit_length() - 1
        self._rows[(word_i << 6) + bit] = w
        return True

    @property
    def rank(self) -> int:
        return len(self._rows)

    def copy(self) -> "RowBasis":
        # Stored rows are never mutated after insertion, so sharing them
        # between copies is safe.
        out = RowBasis(self.ncols)
        out._rows = dict(self._rows)
        return out


def solve_dense(a: np.ndarray, b: np.ndarray) -> np.ndarray | None:
    """Solve a small dense uint8 system ``a x = b`` over GF(2).

    Used for the line-restricted systems inside the VH decoder, where
    building packed matrices would cost more than it saves.  Free
    variables are set to zero; returns None when inconsistent.
    """
    a = (np.atleast_2d(a) & 1).astype(np.uint8)
    rows, cols = a.shape
    b = (np.asarray(b, dtype=np.uint8) & 1).copy()
    aug = np.concatenate([a.copy(), b.reshape(rows, 1)], axis=1)
    r = 0
    pivots = []
    for c in range(cols):
        hits = np.nonzero(aug[r:, c])[0]
        if hits.size == 0:
            continue
        p = r + int(hits[0])
        if p != r:
            aug[[r, p]] = aug[[p, r]]
        mask = aug[:, c].astype(bool)
        mask[r] = False
        if mask.any():
            aug[mask] ^= aug[r]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    if aug[r:, cols].any():
        return None
    x = np.zeros(cols, dtype=np.uint8)
    for i, c in enumerate(pivots):
        x[c] = aug[i, cols]
    return x


def format_matrix_text(m: BinaryMatrix) -> str:
    """Serialize as ``rows cols`` header plus one 0/1 string per row."""
    dense = m.to_dense()
    lines = [f"{m.rows} {m.cols}"]
    lines.extend("".join(map(str, dense[i])) for i in range(m.rows))
    return "\n".join(lines) + "\n"


def parse_matrix_text(text: str) -> BinaryMatrix:
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty matrix text")
    try:
        rows, cols = (int(t) for t in lines[0].split())
    except ValueError as exc:
        raise ValueError(f"bad matrix header {lines[0]!r}") from exc
    body = lines[1:]
    if len(body) != rows:
        raise ValueError(f"expected {rows} rows, found {len(body)}")
    dense = np.zeros((rows, cols), dtype=np.uint8)
    for i, ln in enumerate(body):
        if len(ln) != cols or set(ln) - {"0", "1"}:
            raise ValueError(f"row {i}: expected {cols} binary digits")
        dense[i] = np.frombuffer(ln.encode(), dtype=np.uint8) - ord("0")
    return BinaryMatrix.from_dense(dense)
