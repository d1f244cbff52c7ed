"""Monte Carlo estimation of logical-error and recovery-failure rates.

Each trial walks the communication pipeline: assign qubits to photons,
lose photons, convert the erasure to a random Pauli, measure syndromes,
decode, and classify.  A trial is a decoder failure when the decoder
gets stuck, a logical error when the decoder's residual anticommutes
with a logical operator, and a success otherwise; the union of the two
failure kinds is the error-recovery-failure (ERF) metric.

Trials draw from independent, replayable rng streams keyed by
(master seed, grid point, trial index), so sweeps are reproducible
bit-for-bit regardless of how trials are distributed over workers.
"""

from __future__ import annotations

import concurrent.futures
import enum
import logging
import math
import os
from dataclasses import dataclass

import numpy as np

from . import assignments as assign_mod
from .assignments import ConfigurationError, PhotonAssignment
from .channel import ChannelConfig, erasure_to_pauli, sample_loss, syndrome
from .codes import CssCode
from .decoders import DECODERS
from .gf2 import BitVector
from .specs import CodeSpec

logger = logging.getLogger("muxqec")

METRICS = ("logical-z", "logical-x", "logical-any", "erf")


class TrialStatus(enum.Enum):
    SUCCESS = "Success"
    LOGICAL_ERROR = "LogicalError"
    DECODER_FAILURE = "DecoderFailure"


@dataclass(frozen=True)
class TrialOutcome:
    status: TrialStatus
    z_flips: tuple[int, ...] = ()  # logical qubits hit by a Z-type residual
    x_flips: tuple[int, ...] = ()

    def fails(self, metric: str) -> bool:
        if self.status is TrialStatus.DECODER_FAILURE:
            return True
        if metric == "logical-z":
            return bool(self.z_flips)
        if metric == "logical-x":
            return bool(self.x_flips)
        if metric in ("logical-any", "erf"):
            return bool(self.z_flips or self.x_flips)
        raise ValueError(f"unknown metric {metric!r}")


@dataclass(frozen=True)
class Estimate:
    """Binomial rate with an adjusted-count (Agresti-Coull) interval."""

    failures: int
    trials: int
    rate: float
    ci_low: float
    ci_high: float
    z: float

    def overlaps(self, other: "Estimate") -> bool:
        return self.ci_low <= other.ci_high and other.ci_low <= self.ci_high


def agresti_coull(failures: int, trials: int, z: float = 1.96) -> Estimate:
    """Adjusted-count interval: center (x + z^2/2)/(n + z^2), clamped to [0,1]."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if not 0 <= failures <= trials:
        raise ValueError(f"failures {failures} outside [0, {trials}]")
    n_adj = trials + z * z
    p_adj = (failures + z * z / 2.0) / n_adj
    half = z * math.sqrt(p_adj * (1.0 - p_adj) / n_adj)
    return Estimate(
        failures=failures,
        trials=trials,
        rate=failures / trials,
        ci_low=max(0.0, p_adj - half),
        ci_high=min(1.0, p_adj + half),
        z=z,
    )


def logical_flips(code: CssCode, residual: BitVector, side: str) -> tuple[int, ...]:
    """Indices of logical qubits whose paired operator anticommutes."""
    ops = code.logical_x if side == "z" else code.logical_z
    return tuple(i for i, op in enumerate(ops) if residual.dot(op))


def logical_z_error(code: CssCode, residual_z: BitVector) -> bool:
    """Whether a codespace Z-type residual flips any logical qubit."""
    if not code.h_x.matvec(residual_z).is_zero():
        raise ValueError("residual is outside the codespace (nonzero X syndrome)")
    return bool(logical_flips(code, residual_z, "z"))


def run_trial(
    code: CssCode,
    assignment: PhotonAssignment,
    cfg: ChannelConfig,
    decoder,
    rng: np.random.Generator,
) -> TrialOutcome:
    """One pipeline pass: loss, Pauli conversion, syndromes, decode, classify."""
    e = sample_loss(assignment, cfg, rng)
    frame = erasure_to_pauli(e, rng)
    s_x = syndrome(code.h_x, frame.z)
    s_z = syndrome(code.h_z, frame.x)
    outcome = decoder(code, e, s_x, s_z, rng=rng)
    if not outcome.success:
        return TrialOutcome(TrialStatus.DECODER_FAILURE)
    residual_z = frame.z ^ outcome.correction.z
    residual_x = frame.x ^ outcome.correction.x
    if not code.h_x.matvec(residual_z).is_zero() or not code.h_z.matvec(
        residual_x
    ).is_zero():
        logger.warning("decoder bug: successful decode left a nonzero syndrome")
        return TrialOutcome(TrialStatus.DECODER_FAILURE)
    z_flips = logical_flips(code, residual_z, "z")
    x_flips = logical_flips(code, residual_x, "x")
    status = TrialStatus.LOGICAL_ERROR if (z_flips or x_flips) else TrialStatus.SUCCESS
    return TrialOutcome(status, z_flips, x_flips)


def trial_rng(seed: int, point: int, trial: int) -> np.random.Generator:
    """Independent replayable stream for one trial of one grid point.

    Counter-based Philox keyed by the master seed gives disjoint
    streams per (point, trial) without per-trial entropy mixing.
    """
    return np.random.Generator(
        np.random.Philox(key=seed & (2**64 - 1), counter=[0, 0, point, trial])
    )


@dataclass(frozen=True)
class SweepConfig:
    code: CodeSpec
    strategy: str
    m: int
    p_grid: tuple[float, ...]
    trials: int
    seed: int
    decoder: str
    metric: str = "logical-z"
    z: float = 1.96

    def validate(self) -> None:
        if self.trials < 1:
            raise ConfigurationError(f"trials must be >= 1, got {self.trials}")
        if not self.p_grid:
            raise ConfigurationError("p_loss grid is empty")
        for p in self.p_grid:
            if not 0.0 <= p <= 1.0:
                raise ConfigurationError(f"p_loss {p} outside [0, 1]")
        if self.decoder not in DECODERS:
            raise ConfigurationError(
                f"unknown decoder {self.decoder!r} (choose from {sorted(DECODERS)})"
            )
        if self.metric not in METRICS:
            raise ConfigurationError(
                f"unknown metric {self.metric!r} (choose from {METRICS})"
            )
        code = self.code.build()
        if self.decoder == "surface-ml" and code.toric_d is None:
            raise ConfigurationError("surface-ml decoder requires a toric code")
        if self.m < 1 or self.m > code.n:
            raise ConfigurationError(f"m={self.m} out of range for n={code.n}")
        # Surface strategy constraints surface here rather than mid-sweep.
        _assignment_for(code, self.strategy, self.m, np.random.default_rng(0))


def _assignment_for(code, strategy, m, rng) -> PhotonAssignment:
    return assign_mod.assign(strategy, code, m, rng)


@dataclass(frozen=True)
class PointResult:
    p_loss: float
    trials: int
    failures: int
    logical_errors: int
    decoder_failures: int
    estimate: Estimate


def _count_range(cfg: SweepConfig, point: int, start: int, stop: int):
    """Failure counts for a contiguous trial range (worker task)."""
    code = cfg.code.build()
    decoder = DECODERS[cfg.decoder]
    channel_cfg = ChannelConfig(cfg.p_grid[point])
    randomized = assign_mod.is_randomized(cfg.strategy, code, cfg.m)
    assignment = None
    if not randomized:
        assignment = _assignment_for(code, cfg.strategy, cfg.m, np.random.default_rng(cfg.seed))
    failures = logical_errors = decoder_failures = 0
    for trial in range(start, stop):
        rng = trial_rng(cfg.seed, point, trial)
        if randomized:
            assignment = _assignment_for(code, cfg.strategy, cfg.m, rng)
        outcome = run_trial(code, assignment, channel_cfg, decoder, rng)
        if outcome.status is TrialStatus.DECODER_FAILURE:
            decoder_failures += 1
        elif outcome.status is TrialStatus.LOGICAL_ERROR:
            logical_errors += 1
        if outcome.fails(cfg.metric):
            failures += 1
    return failures, logical_errors, decoder_failures


def default_workers() -> int:
    env = os.environ.get("MUXQEC_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            logger.warning("ignoring non-integer MUXQEC_WORKERS=%r", env)
    return max(1, os.cpu_count() or 1)


def sweep(cfg: SweepConfig, workers: int | None = None) -> list[PointResult]:
    """Run every grid point; deterministic for a fixed config and seed.

    Counts are summed over contiguous trial ranges, so the result is
    identical for any worker count.
    """
    cfg.validate()
    if workers is None:
        workers = default_workers()
    results = []
    for point in range(len(cfg.p_grid)):
        if workers <= 1 or cfg.trials < 2 * workers:
            counts = [_count_range(cfg, point, 0, cfg.trials)]
        else:
            bounds = np.linspace(0, cfg.trials, workers + 1, dtype=int)
            with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
                futures = [
                    pool.submit(_count_range, cfg, point, int(a), int(b))
                    for a, b in zip(bounds[:-1], bounds[1:])
                    if a < b
                ]
                counts = [f.result() for f in futures]
        failures = sum(c[0] for c in counts)
        logical_errors = sum(c[1] for c in counts)
        decoder_failures = sum(c[2] for c in counts)
        results.append(
            PointResult(
                p_loss=cfg.p_grid[point],
                trials=cfg.trials,
                failures=failures,
                logical_errors=logical_errors,
                decoder_failures=decoder_failures,
                estimate=agresti_coull(failures, cfg.trials, cfg.z),
            )
        )
        logger.info(
            "point p=%g: %d/%d failures (%d logical, %d decoder)",
            cfg.p_grid[point],
            failures,
            cfg.trials,
            logical_errors,
            decoder_failures,
        )
    return results
