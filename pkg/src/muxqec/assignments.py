"""Qubit-to-photon assignment strategies.

A photon assignment partitions the qubit indices of a code into ordered
photons of size ``m`` (one trailing remainder photon allowed when m
does not divide n).  Losing a photon erases all of its qubits at once,
so the partition controls the correlation structure of the erasure
channel.

Surface strategies work on the d x d torus geometry; the product-code
strategies work on the two-block layout of a hypergraph product.
Randomized strategies draw from a ``numpy.random.Generator`` and are
reproducible from the seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .codes import BLOCK_FIRST, CssCode, UnsupportedCodeError, toric_midpoints

SURFACE_MIN_PAIR = "min-pair"
SURFACE_MAX_PAIR = "max-pair"
RANDOM = "random"
SURFACE_RANDOM_THRESHOLD = "random-threshold"
STABILIZER_Z = "stabilizer-z"
STABILIZER_X = "stabilizer-x"
STABILIZER_MIXED = "stabilizer-mixed"
HGP_SUDOKU = "sudoku"
HGP_ROW_COLUMN = "row-column"
HGP_DIAGONAL = "diagonal"

SURFACE_STRATEGIES = (
    SURFACE_MIN_PAIR,
    SURFACE_MAX_PAIR,
    RANDOM,
    SURFACE_RANDOM_THRESHOLD,
    STABILIZER_Z,
    STABILIZER_X,
    STABILIZER_MIXED,
)

HGP_STRATEGIES = (
    RANDOM,
    STABILIZER_Z,
    STABILIZER_X,
    STABILIZER_MIXED,
    HGP_SUDOKU,
    HGP_ROW_COLUMN,
    HGP_DIAGONAL,
)

class ConfigurationError(Exception):
    """Incompatible (strategy, code, m) combination."""


@dataclass
class PhotonAssignment:
    """An ordered partition of qubit indices into photons."""

    m: int
    code_n: int
    photons: list[tuple[int, ...]]
    #: qubits placed by the sudoku random fallback (0 for other strategies)
    fallback_count: int = 0
    _flat: np.ndarray = field(init=False, repr=False)
    _sizes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self._flat = np.array(
            [q for p in self.photons for q in p], dtype=np.int64
        )
        self._sizes = np.array([len(p) for p in self.photons], dtype=np.int64)

    @property
    def num_photons(self) -> int:
        return len(self.photons)

    def flat_indices(self) -> np.ndarray:
        return self._flat

    def photon_sizes(self) -> np.ndarray:
        return self._sizes

    def to_lists(self) -> list[list[int]]:
        return [list(p) for p in self.photons]


def validate(assignment: PhotonAssignment) -> list[str]:
    """Partition-invariant check; returns a list of violations (empty = ok)."""
    problems = []
    seen = np.zeros(assignment.code_n, dtype=np.int64)
    for i, photon in enumerate(assignment.photons):
        if len(photon) > assignment.m:
            problems.append(f"photon {i} has {len(photon)} qubits > m={assignment.m}")
        if len(photon) < assignment.m and i != len(assignment.photons) - 1:
            problems.append(f"photon {i} is undersized but not the final photon")
        for q in photon:
            if q < 0 or q >= assignment.code_n:
                problems.append(f"photon {i}: qubit {q} out of range")
            else:
                seen[q] += 1
    dup = np.flatnonzero(seen > 1)
    missing = np.flatnonzero(seen == 0)
    if dup.size:
        problems.append(f"duplicated qubits: {dup.tolist()}")
    if missing.size:
        problems.append(f"missing qubits: {missing.tolist()}")
    return problems


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def _chunk(order, m: int) -> list[tuple[int, ...]]:
    return [tuple(int(q) for q in order[i : i + m]) for i in range(0, len(order), m)]


def _random_partition(n: int, m: int, rng) -> list[tuple[int, ...]]:
    if m == 1:
        return [(q,) for q in range(n)]
    return _chunk(_as_rng(rng).permutation(n), m)


# ---------------------------------------------------------------------------
# surface strategies


def assign_surface(strategy: str, d: int, m: int, rng=None) -> PhotonAssignment:
    """Build a photon assignment for the toric code on a d x d lattice."""
    n = 2 * d * d
    if m < 1 or m > n:
        raise ConfigurationError(f"m={m} out of range for n={n}")
    if strategy in (SURFACE_MIN_PAIR, SURFACE_MAX_PAIR) and m != 2:
        raise ConfigurationError(f"{strategy} requires m=2, got m={m}")
    if strategy == SURFACE_MIN_PAIR:
        photons = _surface_min_pair(d)
    elif strategy == SURFACE_MAX_PAIR:
        photons = _surface_max_pair(d)
    elif strategy == RANDOM:
        photons = _random_partition(n, m, rng)
    elif strategy == SURFACE_RANDOM_THRESHOLD:
        photons = _surface_random_threshold(d, m, _as_rng(rng))
    elif strategy in (STABILIZER_Z, STABILIZER_X, STABILIZER_MIXED):
        photons = _surface_stabilizer(strategy, d, m)
    else:
        raise ConfigurationError(f"unknown surface strategy {strategy!r}")
    return PhotonAssignment(m=m, code_n=n, photons=photons)


def _surface_min_pair(d: int) -> list[tuple[int, ...]]:
    # Vertex (a, c) owns the horizontal edge (a+1, c) and the vertical
    # edge (a, c): an L-shaped pair touching that vertex, torus
    # Manhattan distance 1.  One pair per vertex tiles the lattice.
    photons = []
    for a in range(d):
        for c in range(d):
            h = ((a + 1) % d) * d + c
            v = d * d + a * d + c
            photons.append((h, v))
    return photons


def _surface_max_pair(d: int) -> list[tuple[int, ...]]:
    # Walk the orbits of the (i, j) -> (i+s, j+s) diagonal shift within
    # each orientation class and pair consecutive entries.  Whenever the
    # orbit length is even, every pair realizes the shift displacement
    # exactly; odd orbit lengths (d = 2 mod 4) force one bridging pair
    # per orbit, which no pairing scheme can avoid.
    s = d // 2 - 1
    order: list[int] = []
    for base in (0, d * d):
        visited = bytearray(d * d)
        for start in range(d * d):
            if visited[start]:
                continue
            i, j = divmod(start, d)
            cur = start
            while not visited[cur]:
                visited[cur] = 1
                order.append(base + cur)
                i, j = (i + s) % d, (j + s) % d
                cur = i * d + j
    return _chunk(order, 2)


def _surface_random_threshold(d: int, m: int, rng: np.random.Generator):
    # Rejection sampling against a decreasing distance threshold.  The
    # threshold starts at d/2 - 1 lattice units and drops by one only
    # after a full pass over the pool finds no qubit farther than the
    # threshold from every qubit already in the photon.
    xs, ys = toric_midpoints(d)
    xs = xs.tolist()
    ys = ys.tolist()
    period = 2 * d
    n = 2 * d * d
    threshold2 = 2 * (d // 2 - 1)  # doubled-grid units
    pool = list(range(n))
    photons: list[tuple[int, ...]] = []
    while pool:
        idx = int(rng.integers(len(pool)))
        pool[idx], pool[-1] = pool[-1], pool[idx]
        photon = [pool.pop()]
        waiting: list[int] = []
        while len(photon) < m and pool:
            while len(photon) < m and pool:
                idx = int(rng.integers(len(pool)))
                pool[idx], pool[-1] = pool[-1], pool[idx]
                cand = pool.pop()
                cx, cy = xs[cand], ys[cand]
                ok = True
                for q in photon:
                    dx = abs(cx - xs[q])
                    dy = abs(cy - ys[q])
                    dist2 = min(dx, period - dx) + min(dy, period - dy)
                    if dist2 <= threshold2:
                        ok = False
                        break
                if ok:
                    photon.append(cand)
                else:
                    waiting.append(cand)
            pool.extend(waiting)
            waiting.clear()
            if len(photon) < m and pool:
                threshold2 = max(threshold2 - 2, 0)
        photons.append(tuple(photon))
    return photons


def _surface_stabilizer(strategy: str, d: int, m: int) -> list[tuple[int, ...]]:
    # Weight-4 plaquette (square) and vertex (cross) tiles.  A
    # checkerboard over one tile type covers every edge exactly once;
    # the mixed variant alternates diagonal lines of squares and
    # crosses, which needs d divisible by 4 to close around the torus.
    if d % 4 != 0:
        raise ConfigurationError(f"{strategy} requires d divisible by 4, got d={d}")
    if m != 4:
        raise ConfigurationError(f"{strategy} photons are weight-4 tiles; m must be 4")

    def plaquette(i: int, j: int) -> tuple[int, ...]:
        return (
            i * d + j,
            i * d + (j + 1) % d,
            d * d + ((i - 1) % d) * d + j,
            d * d + i * d + j,
        )

    def star(a: int, c: int) -> tuple[int, ...]:
        return (
            a * d + c,
            ((a + 1) % d) * d + c,
            d * d + a * d + (c - 1) % d,
            d * d + a * d + c,
        )

    photons = []
    for i in range(d):
        for j in range(d):
            parity = (i + j) % 4
            if strategy == STABILIZER_Z and parity % 2 == 0:
                photons.append(plaquette(i, j))
            elif strategy == STABILIZER_X and parity % 2 == 0:
                photons.append(star(i, j))
            elif strategy == STABILIZER_MIXED:
                if parity == 0:
                    photons.append(plaquette(i, j))
                elif parity == 2:
                    photons.append(star(i, j))
    return photons


# ---------------------------------------------------------------------------
# hypergraph-product strategies


def assign_hgp(strategy: str, code: CssCode, m: int, rng=None) -> PhotonAssignment:
    """Build a photon assignment using the product-code block layout."""
    if code.meta is None:
        raise UnsupportedCodeError("strategy needs a hypergraph-product layout")
    n = code.n
    if m < 1 or m > n:
        raise ConfigurationError(f"m={m} out of range for n={n}")
    fallback = 0
    if strategy == RANDOM:
        photons = _random_partition(n, m, rng)
    elif strategy in (STABILIZER_Z, STABILIZER_X, STABILIZER_MIXED):
        photons = _hgp_stabilizer(strategy, code, m, _as_rng(rng))
    elif strategy == HGP_SUDOKU:
        photons, fallback = _hgp_sudoku(code, m, _as_rng(rng))
    elif strategy == HGP_ROW_COLUMN:
        photons = _chunk(_row_column_order(code), m)
    elif strategy == HGP_DIAGONAL:
        photons = _chunk(diagonal_order(code), m)
    else:
        raise ConfigurationError(f"unknown hgp strategy {strategy!r}")
    return PhotonAssignment(m=m, code_n=n, photons=photons, fallback_count=fallback)


def _hgp_stabilizer(strategy: str, code: CssCode, m: int, rng: np.random.Generator):
    # Greedily accept random generator rows whose supports do not touch
    # previously accepted ones, then lay out qubits stabilizer by
    # stabilizer (leftovers last) and cut into photons of size m.
    pool: list[tuple[str, int]] = []
    if strategy in (STABILIZER_X, STABILIZER_MIXED):
        pool += [("x", i) for i in range(code.h_x.rows)]
    if strategy in (STABILIZER_Z, STABILIZER_MIXED):
        pool += [("z", i) for i in range(code.h_z.rows)]
    used = bytearray(code.n)
    order: list[int] = []
    while pool:
        idx = int(rng.integers(len(pool)))
        pool[idx], pool[-1] = pool[-1], pool[idx]
        side, row = pool.pop()
        support = code.row_supports(side)[row]
        if support and all(not used[q] for q in support):
            for q in support:
                used[q] = 1
            order.extend(support)
    order.extend(q for q in range(code.n) if not used[q])
    return _chunk(order, m)


def _hgp_sudoku(code: CssCode, m: int, rng: np.random.Generator):
    # Random assignment subject to no two qubits of a photon sharing a
    # row or column of the same block.  When a full pass over the pool
    # finds no admissible qubit the constraint is dropped for the rest
    # of that photon (counted, so tests can see how often it fires).
    meta = code.meta
    coords = [meta.coord(q) for q in range(code.n)]
    pool = list(range(code.n))
    photons: list[tuple[int, ...]] = []
    fallback = 0
    while pool:
        idx = int(rng.integers(len(pool)))
        pool[idx], pool[-1] = pool[-1], pool[idx]
        photon = [pool.pop()]
        waiting: list[int] = []
        while len(photon) < m and pool:
            idx = int(rng.integers(len(pool)))
            pool[idx], pool[-1] = pool[-1], pool[idx]
            cand = pool.pop()
            cb, cr, cc = coords[cand]
            ok = True
            for q in photon:
                qb, qr, qc = coords[q]
                if cb == qb and (cr == qr or cc == qc):
                    ok = False
                    break
            if ok:
                photon.append(cand)
            else:
                waiting.append(cand)
        pool.extend(waiting)
        waiting.clear()
        while len(photon) < m and pool:
            idx = int(rng.integers(len(pool)))
            pool[idx], pool[-1] = pool[-1], pool[idx]
            photon.append(pool.pop())
            fallback += 1
        photons.append(tuple(photon))
    return photons, fallback


def _row_column_order(code: CssCode) -> list[int]:
    # First block read along rows, second block read along columns:
    # photons then fill whole Tanner-graph lines, the worst case for
    # classical stopping sets.
    meta = code.meta
    order = list(range(meta.first_block_size))
    for col in range(meta.r2):
        for row in range(meta.r1):
            order.append(meta.index(1, row, col))
    return order


def diagonal_order(code: CssCode) -> list[int]:
    """Qubit indices listed along wrap-around diagonal slices per block.

    Slice k of an R x W block visits cells (i, (i+k) mod W) for
    ascending i, so no two qubits of a slice share a row or column
    whenever the slice fits inside the block.
    """
    if code.meta is None:
        raise UnsupportedCodeError("diagonal ordering needs a product layout")
    meta = code.meta
    order = []
    for k in range(meta.n2):
        for i in range(meta.n1):
            order.append(meta.index(BLOCK_FIRST, i, (i + k) % meta.n2))
    for k in range(meta.r2):
        for i in range(meta.r1):
            order.append(meta.index(1, i, (i + k) % meta.r2))
    return order


def assign(
    strategy: str, code: CssCode, m: int, rng=None
) -> PhotonAssignment:
    """Dispatch on the code family: toric codes get the surface set."""
    if code.toric_d is not None and strategy in SURFACE_STRATEGIES:
        return assign_surface(strategy, code.toric_d, m, rng)
    if code.meta is not None and strategy in HGP_STRATEGIES:
        return assign_hgp(strategy, code, m, rng)
    raise ConfigurationError(
        f"strategy {strategy!r} does not apply to code {code.name!r}"
    )


def is_randomized(strategy: str, code: CssCode, m: int = 0) -> bool:
    """Whether the assignment depends on the rng stream for this code."""
    if m == 1:
        # every strategy degenerates to one qubit per photon
        return False
    if strategy in (RANDOM, SURFACE_RANDOM_THRESHOLD, HGP_SUDOKU):
        return True
    if strategy in (STABILIZER_Z, STABILIZER_X, STABILIZER_MIXED):
        # surface tilings are deterministic; generic product codes pick rows randomly
        return code.toric_d is None
    return False
