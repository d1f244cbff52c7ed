"""Result serialization: CSV, JSON mirror, and rate-curve figures.

CSV is the stable data boundary (fixed column order, fixed float
formatting, so identical runs produce identical bytes).  The JSON
mirror embeds the fully resolved configuration, which is enough to
rerun the experiment exactly.  Figures are a convenience rendering of
the same rows, written next to the delimited output.
"""

from __future__ import annotations

import json
import os
import tempfile

from .montecarlo import PointResult, SweepConfig

CSV_COLUMNS = (
    "p_loss",
    "trials",
    "failures",
    "logical_errors",
    "decoder_failures",
    "rate",
    "ci_low",
    "ci_high",
    "strategy",
    "m",
    "code",
    "decoder",
    "seed",
)


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".10g")
    return str(x)


def result_rows(cfg: SweepConfig, points: list[PointResult]) -> list[dict]:
    rows = []
    for pt in points:
        rows.append(
            {
                "p_loss": pt.p_loss,
                "trials": pt.trials,
                "failures": pt.failures,
                "logical_errors": pt.logical_errors,
                "decoder_failures": pt.decoder_failures,
                "rate": pt.estimate.rate,
                "ci_low": pt.estimate.ci_low,
                "ci_high": pt.estimate.ci_high,
                "strategy": cfg.strategy,
                "m": cfg.m,
                "code": cfg.code.label(),
                "decoder": cfg.decoder,
                "seed": cfg.seed,
            }
        )
    return rows


def _atomic_write(path: str, data: bytes) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def format_csv(rows: list[dict]) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for row in rows:
        lines.append(",".join(_fmt(row[c]) for c in CSV_COLUMNS))
    return "\n".join(lines) + "\n"


def write_csv(path: str, rows: list[dict]) -> None:
    _atomic_write(path, format_csv(rows).encode())


def config_payload(cfg: SweepConfig) -> dict:
    return {
        "code": cfg.code.label(),
        "code_spec": {
            "family": cfg.code.family,
            "d": cfg.code.d,
            "h1": cfg.code.h1,
            "h2": cfg.code.h2,
            "random": list(cfg.code.random),
        },
        "strategy": cfg.strategy,
        "m": cfg.m,
        "p_grid": list(cfg.p_grid),
        "trials": cfg.trials,
        "seed": cfg.seed,
        "decoder": cfg.decoder,
        "metric": cfg.metric,
        "z": cfg.z,
    }


def write_json(path: str, sweeps: list[tuple[SweepConfig, list[PointResult]]]) -> None:
    payload = [
        {"config": config_payload(cfg), "results": result_rows(cfg, points)}
        for cfg, points in sweeps
    ]
    data = json.dumps({"sweeps": payload}, indent=2, sort_keys=True) + "\n"
    _atomic_write(path, data.encode())


def render_figure(path: str, rows: list[dict], metric: str = "failure rate") -> None:
    """Rate vs. loss probability with confidence error bars, one curve
    per (strategy, m, decoder) group, written as a PNG next to the CSV."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        groups.setdefault((row["strategy"], row["m"], row["decoder"]), []).append(row)

    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for (strategy, m, decoder), grp in sorted(groups.items()):
        grp = sorted(grp, key=lambda r: r["p_loss"])
        xs = [r["p_loss"] for r in grp]
        ys = [r["rate"] for r in grp]
        lo = [max(r["rate"] - r["ci_low"], 0.0) for r in grp]
        hi = [max(r["ci_high"] - r["rate"], 0.0) for r in grp]
        label = f"{strategy}, m={m}" if len({g[2] for g in groups}) == 1 else (
            f"{strategy}, m={m}, {decoder}"
        )
        ax.errorbar(xs, ys, yerr=[lo, hi], marker="o", markersize=3, capsize=2, label=label)
    ax.set_xlabel("photon loss probability")
    ax.set_ylabel(metric)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    tmp = path + ".tmp~"
    fig.savefig(tmp, dpi=130)
    plt.close(fig)
    os.replace(tmp, path)
