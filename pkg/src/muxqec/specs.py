"""Self-contained code specifications for sweeps and the CLI.

A ``CodeSpec`` is hashable and picklable, carries everything needed to
rebuild its code deterministically (inline matrix text rather than file
paths), and renders to a canonical label used in result files.
"""

from __future__ import annotations

import functools
import hashlib
from dataclasses import dataclass

import numpy as np

from . import codes, gf2
from .codes import CssCode
from .gf2 import BinaryMatrix

TRANSPOSE = "transpose"


class SpecError(ValueError):
    """Malformed or inconsistent code specification."""


@dataclass(frozen=True)
class CodeSpec:
    family: str  # "toric" | "hgp"
    d: int = 0
    h1: str = ""  # textual matrix (see gf2.parse_matrix_text)
    h2: str = ""  # textual matrix or "transpose"
    random: tuple = ()  # (rows, cols, density, seed, symmetric)

    def label(self) -> str:
        if self.family == "toric":
            return f"toric:d={self.d}"
        if self.random:
            rows, cols, density, seed, symmetric = self.random
            tail = ",symmetric" if symmetric else ""
            return f"hgp-random:{rows}x{cols},density={density},seed={seed}{tail}"
        digest = hashlib.sha256((self.h1 + "|" + self.h2).encode()).hexdigest()[:8]
        return f"hgp:inline#{digest}"

    def build(self) -> CssCode:
        return _build_code(self)


@functools.lru_cache(maxsize=16)
def _build_code(spec: CodeSpec) -> CssCode:
    if spec.family == "toric":
        if spec.d < 2:
            raise SpecError(f"toric code needs d >= 2, got d={spec.d}")
        return codes.toric(spec.d)
    if spec.family != "hgp":
        raise SpecError(f"unknown code family {spec.family!r}")
    if spec.random:
        rows, cols, density, seed, symmetric = spec.random
        h1 = random_classical_matrix(rows, cols, density, seed)
        h2 = h1.transpose() if symmetric else random_classical_matrix(
            rows, cols, density, seed + 1
        )
    else:
        if not spec.h1:
            raise SpecError("hgp spec needs h1")
        h1 = gf2.parse_matrix_text(spec.h1)
        if spec.h2 == TRANSPOSE:
            h2 = h1.transpose()
        elif spec.h2:
            h2 = gf2.parse_matrix_text(spec.h2)
        else:
            raise SpecError("hgp spec needs h2 (matrix text or 'transpose')")
    return codes.hgp(h1, h2, name=spec.label())


def random_classical_matrix(
    rows: int, cols: int, density: float, seed: int
) -> BinaryMatrix:
    """Bernoulli(density) classical parity check, resampled if all-zero."""
    if rows < 1 or cols < 1:
        raise SpecError("matrix dimensions must be positive")
    if not 0.0 < density <= 1.0:
        raise SpecError(f"density must be in (0, 1], got {density}")
    rng = np.random.default_rng(seed)
    while True:
        dense = (rng.random((rows, cols)) < density).astype(np.uint8)
        if dense.any():
            return BinaryMatrix.from_dense(dense)


def _parse_kv(params: str) -> dict[str, str]:
    out = {}
    for part in params.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" in part:
            key, value = part.split("=", 1)
            out[key.strip()] = value.strip()
        else:
            out[part] = "true"
    return out


def parse_code_spec(text: str) -> CodeSpec:
    """Parse a command-line code spec.

    Forms:
      toric:d=10            (or the shorthand toric:10)
      hgp:h1=FILE,h2=FILE   (h2=transpose uses the transpose of h1)
      hgp-random:rows=16,cols=16,density=0.25,seed=7[,symmetric]
    """
    family, _, params = text.partition(":")
    family = family.strip().lower()
    if family == "toric":
        kv = _parse_kv(params)
        d_text = kv.get("d", params.strip())
        try:
            d = int(d_text)
        except ValueError as exc:
            raise SpecError(f"toric spec needs an integer d, got {d_text!r}") from exc
        return CodeSpec(family="toric", d=d)
    if family == "hgp":
        kv = _parse_kv(params)
        if "h1" not in kv or "h2" not in kv:
            raise SpecError("hgp spec needs h1=FILE and h2=FILE|transpose")
        h1 = _read_matrix_arg(kv["h1"])
        h2 = TRANSPOSE if kv["h2"].lower() == TRANSPOSE else _read_matrix_arg(kv["h2"])
        return CodeSpec(family="hgp", h1=h1, h2=h2)
    if family == "hgp-random":
        kv = _parse_kv(params)
        try:
            rows = int(kv["rows"])
            cols = int(kv["cols"])
            density = float(kv.get("density", "0.3"))
            seed = int(kv.get("seed", "0"))
        except (KeyError, ValueError) as exc:
            raise SpecError(f"bad hgp-random spec {text!r}: {exc}") from exc
        symmetric = kv.get("symmetric", "false").lower() in ("true", "1", "yes")
        return CodeSpec(family="hgp", random=(rows, cols, density, seed, symmetric))
    raise SpecError(f"unknown code family {family!r}")


def _read_matrix_arg(arg: str) -> str:
    """Inline matrix text passes through; otherwise treat as a file path."""
    if "\n" in arg:
        return arg
    try:
        with open(arg, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise SpecError(f"cannot read matrix file {arg!r}: {exc}") from exc


def code_spec_from_table(table: dict) -> CodeSpec:
    """Build a CodeSpec from a config-file [code] table."""
    family = str(table.get("family", "")).lower()
    if family == "toric":
        try:
            d = int(table["d"])
        except (KeyError, ValueError) as exc:
            raise SpecError("toric code table needs an integer 'd'") from exc
        return CodeSpec(family="toric", d=d)
    if family != "hgp":
        raise SpecError(f"unknown code family {family!r} (expected toric or hgp)")
    if "random" in table:
        rnd = table["random"]
        try:
            spec = (
                int(rnd["rows"]),
                int(rnd["cols"]),
                float(rnd.get("density", 0.3)),
                int(rnd.get("seed", 0)),
                bool(rnd.get("symmetric", False)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SpecError(f"bad [code.random] table: {exc}") from exc
        return CodeSpec(family="hgp", random=spec)
    h1 = table.get("h1", "")
    h2 = table.get("h2", "")
    if not h1 or not h2:
        raise SpecError("hgp code table needs 'h1' and 'h2' (inline text or file)")
    h1 = _read_matrix_arg(str(h1))
    h2 = TRANSPOSE if str(h2).lower() == TRANSPOSE else _read_matrix_arg(str(h2))
    return CodeSpec(family="hgp", h1=h1, h2=h2)
