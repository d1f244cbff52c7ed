"""Erasure decoders for CSS codes.

The decoder family, in increasing strength on hypergraph products:

* classical peeling: retire degree-1 ("dangling") checks of the
  erasure-induced Tanner subgraph one at a time;
* pruned peeling: when peeling stalls because the erasure covers a
  stabilizer generator of the opposite type, remove one qubit of that
  support from the erasure (its sampled value is declared correct) and
  resume;
* VH decoding: decompose the remaining erasure into line clusters of
  the product layout, then solve the clusters leaf-to-root by Gaussian
  elimination on their line-restricted systems, propagating shared
  check constraints; cycles of mutually constrained clusters are a
  decoder failure;
* spanning-forest peeling for the toric code: peel an acyclic subgraph
  of the erased lattice edges, which can never get stuck and yields a
  maximum-likelihood correction;
* a Gaussian maximum-likelihood oracle that solves the full
  erasure-restricted system directly.

X- and Z-type errors are decoded independently on the two check
matrices with the same initial erasure.  Decoder failure is a value,
never an exception: Monte Carlo counts it.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import gf2
from .channel import ErasurePattern, PauliFrame
from .codes import CssCode, UnsupportedCodeError
from .gf2 import BinaryMatrix, BitVector, RowBasis

PRIMAL = "primal"
DUAL = "dual"


def _other(side: str) -> str:
    return "z" if side == "x" else "x"


@dataclass
class DecodeOutcome:
    """Result of one decode attempt.

    ``correction`` is only meaningful on success, where it satisfies
    both input syndromes and is supported on the erasure.  The residual
    erasure per check side is kept as a diagnostic either way.
    """

    success: bool
    correction: PauliFrame | None
    residual: dict[str, tuple[int, ...]] = field(default_factory=dict)
    reason: str = ""

    @property
    def status(self) -> str:
        return "Success" if self.success else "DecoderFailure"


@dataclass
class ClassicalStoppingSet:
    """Residual erasure confined to one line of the product layout."""

    axis: str  # "horizontal" | "vertical"
    line: int  # row or column index of the full product layout
    qubits: tuple[int, ...]
    checks: tuple[int, ...]
    shared_checks: tuple[int, ...] = ()

    @property
    def key(self) -> tuple[str, int]:
        return (self.axis, self.line)


# ---------------------------------------------------------------------------
# peeling


def _peel_core(qadj, n_checks: int, erased, s, corr, trace=None, label=""):
    """Peel dangling checks in lowest-index-first order.

    ``s`` (list of 0/1 per check) and ``corr`` (bytearray per qubit) are
    updated in place; returns the residual erased qubits in ascending
    order.  ``erased`` must be ascending for deterministic traces.
    """
    deg = [0] * n_checks
    acc = [0] * n_checks
    alive = bytearray(len(qadj))
    for q in erased:
        alive[q] = 1
        for c in qadj[q]:
            deg[c] += 1
            acc[c] += q
    heap = [c for c in range(n_checks) if deg[c] == 1]
    heapq.heapify(heap)
    while heap:
        c = heapq.heappop(heap)
        if deg[c] != 1:
            continue
        q = acc[c]
        flip = bool(s[c])
        if flip:
            corr[q] ^= 1
            for c2 in qadj[q]:
                s[c2] ^= 1
        for c2 in qadj[q]:
            deg[c2] -= 1
            acc[c2] -= q
            if deg[c2] == 1:
                heapq.heappush(heap, c2)
        alive[q] = 0
        if trace is not None:
            trace.append(
                f"peel{label}: check {c} retires qubit {q}"
                + (" (flip)" if flip else "")
            )
    return [q for q in erased if alive[q]]


def peel(
    h: BinaryMatrix, e: ErasurePattern, s: BitVector, trace: list | None = None
) -> tuple[BitVector, ErasurePattern, BitVector]:
    """Run plain peeling; a nonempty residual means a stopping set."""
    if s.n != h.rows:
        raise ValueError(f"syndrome length {s.n} != {h.rows} checks")
    s_list = s.to_array().tolist()
    corr = bytearray(h.cols)
    residual = _peel_core(h.col_supports(), h.rows, e.erased.tolist(), s_list, corr, trace)
    return (
        BitVector.from_bits(np.frombuffer(bytes(corr), dtype=np.uint8)),
        ErasurePattern.from_indices(e.n, residual),
        BitVector.from_bits(np.asarray(s_list, dtype=np.uint8)),
    )


# ---------------------------------------------------------------------------
# spanning-forest decoding for the toric code


def _lattice_endpoints(code: CssCode, side: str) -> tuple:
    """Per-qubit pair of adjacent checks; needs degree-2 qubit columns."""
    cols = code.col_supports(side)
    if any(len(c) != 2 for c in cols):
        raise UnsupportedCodeError(
            "spanning-forest decoding needs every qubit on exactly two checks"
        )
    return cols


def _forest_edges(endpoints, erased) -> list[int]:
    """Breadth-first spanning forest of the erasure subgraph.

    Grows from the lowest-index vertex of each component, taking edges
    in ascending qubit order, so the forest is deterministic.
    """
    adj: dict[int, list[tuple[int, int]]] = {}
    for q in erased:
        u, v = endpoints[q]
        adj.setdefault(u, []).append((v, q))
        adj.setdefault(v, []).append((u, q))
    visited = set()
    forest: list[int] = []
    for root in sorted(adj):
        if root in visited:
            continue
        visited.add(root)
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for w, q in adj[u]:
                if w not in visited:
                    visited.add(w)
                    forest.append(q)
                    queue.append(w)
    return forest


def spanning_forest(d: int, e: ErasurePattern, lattice: str = PRIMAL) -> list[int]:
    """Acyclic subset of erased toric edges spanning every component."""
    from .codes import toric

    code = toric(d)
    side = "x" if lattice == PRIMAL else "z"
    return sorted(_forest_edges(_lattice_endpoints(code, side), e.erased.tolist()))


def surface_ml_decode(
    code: CssCode,
    e: ErasurePattern,
    s_x: BitVector,
    s_z: BitVector,
    rng=None,
    trace: list | None = None,
) -> DecodeOutcome:
    """Maximum-likelihood erasure decoding via spanning-forest peeling.

    Only the erased edges on a spanning forest of the erasure subgraph
    are corrected; the rest keep their sampled values, which is valid up
    to stabilizers.  A forest has no stopping sets, so this always
    succeeds (asserted).
    """
    if code.toric_d is None:
        raise UnsupportedCodeError("surface decoding needs a toric code")
    erased = e.erased.tolist()
    corrections = {}
    for side, s_in in (("x", s_x), ("z", s_z)):
        endpoints = _lattice_endpoints(code, side)
        forest = _forest_edges(endpoints, erased)
        forest.sort()
        s = s_in.to_array().tolist()
        corr = bytearray(code.n)
        residual = _peel_core(
            endpoints, code.check_matrix(side).rows, forest, s, corr, trace, f"[{side}]"
        )
        assert not residual and not any(s), "spanning forest left a stopping set"
        corrections[side] = corr
    frame = PauliFrame(
        x=BitVector.from_bits(np.frombuffer(bytes(corrections["z"]), dtype=np.uint8)),
        z=BitVector.from_bits(np.frombuffer(bytes(corrections["x"]), dtype=np.uint8)),
    )
    return DecodeOutcome(success=True, correction=frame, residual={"x": (), "z": ()})


# ---------------------------------------------------------------------------
# pruned peeling


def _covered_generator(code: CssCode, family: str, erased) -> int | None:
    """Lowest generator row of ``family`` fully inside the erased set."""
    mask = BitVector.from_indices(code.n, erased)
    h = code.check_matrix(family)
    outside = (h.words & ~mask.words[None, :]).any(axis=1)
    nonzero = np.bitwise_count(h.words).sum(axis=1) > 0
    hits = np.flatnonzero(~outside & nonzero)
    return int(hits[0]) if hits.size else None


def find_erased_stabilizer(code: CssCode, e: ErasurePattern, side: str) -> int | None:
    """Generator row of H_side whose qubit support is entirely erased."""
    return _covered_generator(code, side, e.erased.tolist())


def _pruned_peel_side(code, side, erased, s, corr, rng=None, trace=None):
    """Peel/break loop for one check side; returns the residual list.

    Breaking removes one qubit of a covered opposite-type generator
    support from the erasure, which validly declares its sampled value
    correct.  The qubit is drawn from the support via ``rng`` (a fixed
    choice, such as always the lowest index, systematically carves
    structured erasures into solvable trees and destroys the guaranteed
    full-erasure failure); without an rng the lowest index is used.
    """
    qadj = code.col_supports(side)
    n_checks = code.check_matrix(side).rows
    family = _other(side)
    residual = list(erased)
    while True:
        residual = _peel_core(qadj, n_checks, residual, s, corr, trace, f"[{side}]")
        if not residual:
            return residual
        row = _covered_generator(code, family, residual)
        if row is None:
            return residual
        support = code.row_supports(family)[row]
        q = support[rng.integers(len(support))] if rng is not None else support[0]
        residual.remove(q)
        if trace is not None:
            trace.append(f"break[{side}]: {family}-generator {row} releases qubit {q}")


@dataclass
class PrunedPeelResult:
    correction: PauliFrame
    residual: dict[str, tuple[int, ...]]
    s_residual: dict[str, BitVector]


def pruned_peel(
    code: CssCode,
    e: ErasurePattern,
    s_x: BitVector,
    s_z: BitVector,
    rng=None,
    trace: list | None = None,
) -> PrunedPeelResult:
    """Alternate peeling with stabilizer breaks on both sides."""
    erased = e.erased.tolist()
    out_corr = {}
    out_res = {}
    out_s = {}
    for side, s_in in (("x", s_x), ("z", s_z)):
        s = s_in.to_array().tolist()
        corr = bytearray(code.n)
        residual = _pruned_peel_side(code, side, erased, s, corr, rng, trace)
        out_corr[side] = corr
        out_res[side] = tuple(residual)
        out_s[side] = BitVector.from_bits(np.asarray(s, dtype=np.uint8))
    frame = PauliFrame(
        x=BitVector.from_bits(np.frombuffer(bytes(out_corr["z"]), dtype=np.uint8)),
        z=BitVector.from_bits(np.frombuffer(bytes(out_corr["x"]), dtype=np.uint8)),
    )
    return PrunedPeelResult(correction=frame, residual=out_res, s_residual=out_s)


# ---------------------------------------------------------------------------
# VH decoding


def vh_partition(code: CssCode, e: ErasurePattern, side: str) -> list[ClassicalStoppingSet]:
    """Group erased qubits into the line clusters of one check side.

    On the H_Z side the lines are first-block rows and second-block
    columns; on the H_X side, first-block columns and second-block
    rows.  Each qubit lies on exactly one line per side, and any two
    clusters share at most one check.
    """
    if code.meta is None:
        raise UnsupportedCodeError("VH decoding needs a hypergraph-product layout")
    groups = _vh_groups(code, side, e.erased.tolist())
    qadj = code.col_supports(side)
    checks_by_key = {
        key: sorted({c for q in qs for c in qadj[q]}) for key, qs in groups.items()
    }
    owners: dict[int, int] = {}
    for key in groups:
        for c in checks_by_key[key]:
            owners[c] = owners.get(c, 0) + 1
    sets = []
    for key in sorted(groups):
        axis, line = key
        checks = checks_by_key[key]
        sets.append(
            ClassicalStoppingSet(
                axis=axis,
                line=line,
                qubits=tuple(groups[key]),
                checks=tuple(checks),
                shared_checks=tuple(c for c in checks if owners[c] > 1),
            )
        )
    return sets


def _vh_groups(code, side, erased):
    meta = code.meta
    groups: dict[tuple[str, int], list[int]] = {}
    for q in erased:
        block, row, col = meta.coord(q)
        if side == "z":
            key = ("horizontal", row) if block == 0 else ("vertical", meta.n2 + col)
        else:
            key = ("vertical", col) if block == 0 else ("horizontal", meta.n1 + row)
        groups.setdefault(key, []).append(q)
    return groups


def _vh_solve(code, side, residual, s, trace=None):
    """Solve the residual erasure cluster-by-cluster.

    Returns ``{qubit: bit}`` on success or None on a decoder failure
    (cluster cycle or an inconsistent line system).
    """
    qadj = code.col_supports(side)
    h = code.check_matrix(side)
    row_supp = h.row_supports()
    groups = _vh_groups(code, side, residual)
    keys = sorted(groups)
    bits_of = {k: sorted(groups[k]) for k in keys}
    checks_of = {k: sorted({c for q in groups[k] for c in qadj[q]}) for k in keys}

    # Syndrome support outside every cluster's reach cannot be explained
    # by the residual erasure.
    reachable = {c for k in keys for c in checks_of[k]}
    if any(s[c] and c not in reachable for c in range(len(s))):
        if trace is not None:
            trace.append(f"vh[{side}]: syndrome outside residual support")
        return None

    owners: dict[int, list] = {}
    for k in keys:
        for c in checks_of[k]:
            owners.setdefault(c, []).append(k)
    for c, ks in owners.items():
        if len(ks) > 2:
            raise AssertionError(f"check {c} adjacent to {len(ks)} line clusters")

    neighbors = {k: set() for k in keys}
    shared_check = {}
    for c, ks in owners.items():
        if len(ks) == 2:
            a, b = ks
            neighbors[a].add(b)
            neighbors[b].add(a)
            shared_check[frozenset((a, b))] = c

    # Leaf-first elimination order over the cluster graph; a leftover
    # means the clusters form a cycle, which this decoder cannot solve.
    live = {k: set(nbrs) for k, nbrs in neighbors.items()}
    order = []
    removed = set()
    heap = sorted(k for k in keys if len(live[k]) <= 1)
    while heap:
        k = heapq.heappop(heap)
        if k in removed or len(live[k]) > 1:
            continue
        removed.add(k)
        order.append(k)
        for nb in live[k]:
            live[nb].discard(k)
            if len(live[nb]) <= 1 and nb not in removed:
                heapq.heappush(heap, nb)
    if len(order) < len(keys):
        if trace is not None:
            stuck = [k for k in keys if k not in removed]
            trace.append(f"vh[{side}]: cycle of line clusters {stuck}")
        return None

    forced: dict[int, int] = {}  # check -> required contribution of its later cluster
    dropped: set[int] = set()
    pending: dict = {}  # key -> (check, partner, {v: solution dict})
    solved: dict = {}
    partner_after = {}
    done = set()
    for k in order:
        bits = bits_of[k]
        pos = {q: i for i, q in enumerate(bits)}
        partner = next((nb for nb in neighbors[k] if nb not in done), None)
        open_check = shared_check[frozenset((k, partner))] if partner else None
        rows = [c for c in checks_of[k] if c not in dropped and c != open_check]
        a = np.zeros((len(rows) + (1 if partner else 0), len(bits)), dtype=np.uint8)
        rhs = np.zeros(a.shape[0], dtype=np.uint8)
        row_index = {c: i for i, c in enumerate(rows)}
        for q in bits:
            for c in qadj[q]:
                i = row_index.get(c)
                if i is not None:
                    a[i, pos[q]] = 1
        for c, i in row_index.items():
            rhs[i] = forced[c] if c in forced else s[c]
        if partner is None:
            x = gf2.solve_dense(a, rhs)
            if x is None:
                if trace is not None:
                    trace.append(f"vh[{side}]: inconsistent line system at {k}")
                return None
            solved[k] = {q: int(x[pos[q]]) for q in bits}
            if trace is not None:
                trace.append(f"vh[{side}]: solved {k[0]} line {k[1]} ({len(bits)} bits)")
        else:
            last = a.shape[0] - 1
            for q in bits:
                if open_check in qadj[q]:
                    a[last, pos[q]] = 1
            options = {}
            for v in (0, 1):
                rhs[last] = v
                x = gf2.solve_dense(a, rhs)
                if x is not None:
                    options[v] = {q: int(x[pos[q]]) for q in bits}
            if not options:
                if trace is not None:
                    trace.append(f"vh[{side}]: inconsistent line system at {k}")
                return None
            if len(options) == 1:
                v, sol = next(iter(options.items()))
                solved[k] = sol
                forced[open_check] = s[open_check] ^ v
                if trace is not None:
                    trace.append(
                        f"vh[{side}]: solved {k[0]} line {k[1]}, forces check {open_check}"
                    )
            else:
                pending[k] = (open_check, partner, options)
                dropped.add(open_check)
                if trace is not None:
                    trace.append(
                        f"vh[{side}]: {k[0]} line {k[1]} flexible at check {open_check}"
                    )
            partner_after[k] = partner
        done.add(k)

    # Back-substitute deferred choices root-to-leaf.
    final: dict[tuple, dict] = {}
    for k in reversed(order):
        if k in solved:
            final[k] = solved[k]
        else:
            check, partner, options = pending[k]
            support = set(row_supp[check])
            gamma = 0
            for q, b in final[partner].items():
                if b and q in support:
                    gamma ^= 1
            final[k] = options[s[check] ^ gamma]

    solution = {q: b for sol in final.values() for q, b in sol.items()}

    # Validity assertion: the combined line solutions reproduce the
    # residual syndrome exactly.
    recheck = bytearray(len(s))
    for q, b in solution.items():
        if b:
            for c in qadj[q]:
                recheck[c] ^= 1
    if list(recheck) != [b & 1 for b in s]:
        raise AssertionError("VH line solutions do not reproduce the syndrome")
    return solution


def vh_decode(
    code: CssCode,
    e: ErasurePattern,
    s: BitVector,
    side: str,
    rng=None,
    trace: list | None = None,
) -> DecodeOutcome:
    """Solve one side's residual erasure by line clusters (see _vh_solve)."""
    s_list = s.to_array().tolist()
    sol = _vh_solve(code, side, e.erased.tolist(), s_list, trace)
    if sol is None:
        return DecodeOutcome(
            success=False,
            correction=None,
            residual={side: tuple(e.erased.tolist())},
            reason="vh-failure",
        )
    corr = BitVector.from_indices(code.n, [q for q, b in sol.items() if b])
    zero = BitVector(code.n)
    frame = PauliFrame(x=corr if side == "z" else zero, z=corr if side == "x" else zero)
    return DecodeOutcome(success=True, correction=frame, residual={side: ()})


# ---------------------------------------------------------------------------
# combined decoder and oracles


def combined_decode(
    code: CssCode,
    e: ErasurePattern,
    s_x: BitVector,
    s_z: BitVector,
    rng=None,
    trace: list | None = None,
) -> DecodeOutcome:
    """Peeling + pruned peeling + VH on both sides."""
    erased = e.erased.tolist()
    corr_by_side = {}
    residual_by_side = {}
    for side, s_in in (("x", s_x), ("z", s_z)):
        s = s_in.to_array().tolist()
        corr = bytearray(code.n)
        residual = _pruned_peel_side(code, side, erased, s, corr, rng, trace)
        residual_by_side[side] = tuple(residual)
        if residual:
            sol = _vh_solve(code, side, residual, s, trace)
            if sol is None:
                return DecodeOutcome(
                    success=False,
                    correction=None,
                    residual=residual_by_side,
                    reason=f"stopping set on the {side} side",
                )
            for q, b in sol.items():
                if b:
                    corr[q] ^= 1
        corr_by_side[side] = corr
    frame = PauliFrame(
        x=BitVector.from_bits(np.frombuffer(bytes(corr_by_side["z"]), dtype=np.uint8)),
        z=BitVector.from_bits(np.frombuffer(bytes(corr_by_side["x"]), dtype=np.uint8)),
    )
    return DecodeOutcome(success=True, correction=frame, residual=residual_by_side)


def ml_oracle_decode(
    code: CssCode, e: ErasurePattern, s: BitVector, side: str
) -> BitVector | None:
    """Gaussian elimination on the erasure-restricted system of one side.

    Any erasure-supported solution is maximum-likelihood for the
    uniform erasure channel; free variables are zero, so the result is
    deterministic.
    """
    h = code.check_matrix(side)
    idx = e.erased.tolist()
    sub = gf2.restrict_columns(h, idx)
    x = gf2.solve(sub, s)
    if x is None:
        return None
    dense = np.zeros(code.n, dtype=np.uint8)
    arr = x.to_array()
    for i, q in enumerate(idx):
        dense[q] = arr[i]
    return BitVector.from_bits(dense)


def ml_oracle_outcome(
    code: CssCode,
    e: ErasurePattern,
    s_x: BitVector,
    s_z: BitVector,
    rng=None,
    trace: list | None = None,
) -> DecodeOutcome:
    """Both-sides oracle decode packaged as an outcome."""
    z_corr = ml_oracle_decode(code, e, s_x, "x")
    x_corr = ml_oracle_decode(code, e, s_z, "z")
    if z_corr is None or x_corr is None:
        return DecodeOutcome(
            success=False, correction=None, reason="inconsistent syndrome"
        )
    if trace is not None:
        trace.append("oracle: solved both sides by elimination")
    return DecodeOutcome(
        success=True,
        correction=PauliFrame(x=x_corr, z=z_corr),
        residual={"x": (), "z": ()},
    )


def _stabilizer_basis(code: CssCode, side: str) -> RowBasis:
    cache = getattr(code, "_stab_basis", None)
    if cache is None:
        cache = {}
        code._stab_basis = cache
    if side not in cache:
        basis = RowBasis(code.n)
        h = code.check_matrix(side)
        for i in range(h.rows):
            basis.add(h.row(i))
        cache[side] = basis
    return cache[side]


def residual_is_stabilizer(code: CssCode, side: str, residual: BitVector) -> bool:
    """Whether a residual error of the given type is a stabilizer product.

    ``side`` names the residual's Pauli type: a Z-type residual is
    trivial iff it lies in rowspace(H_Z).
    """
    return _stabilizer_basis(code, side).contains(residual)


def erasure_covers_logical(code: CssCode, e: ErasurePattern, side: str) -> bool:
    """Whether some erasure-supported vector is a nontrivial logical.

    For ``side == "z"``: tests ker(H_X) beyond rowspace(H_Z) within the
    erasure (the condition for a logical Z error to be possible);
    dually for ``side == "x"``.
    """
    h_kernel = code.h_x if side == "z" else code.h_z
    quotient_side = "z" if side == "z" else "x"
    idx = e.erased.tolist()
    if not idx:
        return False
    sub = gf2.restrict_columns(h_kernel, idx)
    base = _stabilizer_basis(code, quotient_side).copy()
    for v in gf2.nullspace_basis(sub):
        dense = np.zeros(code.n, dtype=np.uint8)
        arr = v.to_array()
        for i, q in enumerate(idx):
            dense[q] = arr[i]
        if base.add(BitVector.from_bits(dense)):
            return True
    return False


DECODERS = {
    "surface-ml": surface_ml_decode,
    "combined": combined_decode,
    "ml-oracle": ml_oracle_outcome,
}
