"""Command-line interface.

Subcommands:

* ``simulate``   run the sweeps described by a TOML config file, write
                 CSV + JSON (and a PNG figure) atomically;
* ``code-info``  print code parameters, optionally dump check matrices;
* ``assign``     dump a photon partition as JSON;
* ``decode-one`` replay a single trial with a step-by-step decoder trace.

Exit codes: 0 success, 1 runtime failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

import numpy as np

from . import assignments as assign_mod
from . import decoders, gf2, montecarlo, report
from .assignments import ConfigurationError
from .channel import ChannelConfig, erasure_to_pauli, sample_loss, syndrome
from .codes import CodeConstructionError, UnsupportedCodeError
from .montecarlo import SweepConfig, TrialStatus, logical_flips, trial_rng
from .specs import SpecError, code_spec_from_table, parse_code_spec

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2

CONFIG_ERRORS = (
    SpecError,
    ConfigurationError,
    UnsupportedCodeError,
    CodeConstructionError,
    KeyError,
    TypeError,
    ValueError,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="muxqec",
        description="Erasure-channel simulation of multiplexed surface/HGP codes",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="info logging")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run the sweeps from a config file")
    sim.add_argument("--config", required=True, help="TOML experiment file")
    sim.add_argument("--out", help="output stem (default: config file stem)")
    sim.add_argument("--trials", type=int, help="override trials per point")
    sim.add_argument("--seed", type=int, help="override master seed")
    sim.add_argument("--workers", type=int, help="worker processes")
    sim.add_argument(
        "--no-figures", action="store_true", help="skip the PNG rendering"
    )

    info = sub.add_parser("code-info", help="print code parameters")
    info.add_argument("--code", required=True, help="code spec, e.g. toric:d=10")
    info.add_argument(
        "--dump",
        choices=("hx", "hz", "both"),
        help="also print check matrices in the textual format",
    )

    asg = sub.add_parser("assign", help="dump a photon partition as JSON")
    asg.add_argument("--code", required=True)
    asg.add_argument("--strategy", required=True)
    asg.add_argument("--m", type=int, required=True)
    asg.add_argument("--seed", type=int, default=0)
    asg.add_argument("--out", help="output file (default stdout)")

    dec = sub.add_parser("decode-one", help="replay one trial with a trace")
    dec.add_argument("--code", required=True)
    dec.add_argument("--strategy", required=True)
    dec.add_argument("--m", type=int, required=True)
    dec.add_argument("--p-loss", type=float, required=True)
    dec.add_argument(
        "--decoder", default="combined", choices=sorted(decoders.DECODERS)
    )
    dec.add_argument("--seed", type=int, default=0)
    dec.add_argument("--trial", type=int, default=0)
    dec.add_argument(
        "--point-index", type=int, default=0, help="grid point index of the stream"
    )
    return parser


def _grid_from_table(sweep_table: dict) -> tuple[float, ...]:
    grid = sweep_table.get("p_loss")
    if isinstance(grid, dict):
        start = float(grid["start"])
        stop = float(grid["stop"])
        step = float(grid["step"])
        if step <= 0:
            raise SpecError("p_loss step must be positive")
        values = []
        x = start
        while x <= stop + 1e-12:
            values.append(round(x, 12))
            x += step
        return tuple(values)
    if isinstance(grid, (list, tuple)):
        return tuple(float(p) for p in grid)
    if isinstance(grid, (int, float)):
        return (float(grid),)
    raise SpecError("[sweep] needs p_loss (list, number, or start/stop/step table)")


def _as_list(value) -> list:
    if isinstance(value, (list, tuple)):
        return list(value)
    return [value]


def load_experiment(path: str, args) -> tuple[list[SweepConfig], dict]:
    with open(path, "rb") as fh:
        doc = tomllib.load(fh)
    if "code" not in doc or "sweep" not in doc or "assign" not in doc:
        raise SpecError("config needs [code], [sweep], and [assign] tables")
    code = code_spec_from_table(doc["code"])
    sweep_table = doc["sweep"]
    grid = _grid_from_table(sweep_table)
    trials = args.trials if args.trials is not None else int(sweep_table["trials"])
    seed = args.seed if args.seed is not None else int(sweep_table.get("seed", 0))
    decoder = str(sweep_table.get("decoder", "combined"))
    metric = str(sweep_table.get("metric", "logical-z"))
    z = float(sweep_table.get("z", 1.96))
    strategies = [str(s) for s in _as_list(doc["assign"]["strategy"])]
    ms = [int(m) for m in _as_list(doc["assign"]["m"])]
    configs = [
        SweepConfig(
            code=code,
            strategy=strategy,
            m=m,
            p_grid=grid,
            trials=trials,
            seed=seed,
            decoder=decoder,
            metric=metric,
            z=z,
        )
        for strategy in strategies
        for m in ms
    ]
    output = dict(doc.get("output", {}))
    if "workers" in doc:
        output.setdefault("workers", int(doc["workers"]))
    return configs, output


def cmd_simulate(args) -> int:
    try:
        configs, output = load_experiment(args.config, args)
        for cfg in configs:
            cfg.validate()
    except CONFIG_ERRORS as exc:
        print(f"error: {args.config}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    workers = args.workers
    if workers is None:
        workers = int(output.get("workers", 0)) or None
    stem = args.out or str(output.get("stem", "")) or _default_stem(args.config)
    csv_path = str(output.get("csv", stem + ".csv"))
    json_path = str(output.get("json", stem + ".json"))
    png_path = str(output.get("figure", stem + ".png"))
    want_figure = bool(output.get("figures", True)) and not args.no_figures

    all_rows = []
    sweeps = []
    for cfg in configs:
        points = montecarlo.sweep(cfg, workers=workers)
        sweeps.append((cfg, points))
        all_rows.extend(report.result_rows(cfg, points))
    report.write_csv(csv_path, all_rows)
    report.write_json(json_path, sweeps)
    written = [csv_path, json_path]
    if want_figure:
        metric = configs[0].metric if configs else "rate"
        report.render_figure(png_path, all_rows, metric=metric)
        written.append(png_path)

    header = ("strategy", "m", "p_loss", "rate", "ci_low", "ci_high", "failures")
    print(" ".join(f"{h:>12}" for h in header))
    for row in all_rows:
        print(
            f"{row['strategy']:>12} {row['m']:>12} {row['p_loss']:>12g} "
            f"{row['rate']:>12.6g} {row['ci_low']:>12.6g} {row['ci_high']:>12.6g} "
            f"{row['failures']:>12}"
        )
    print("wrote " + ", ".join(written))
    return EXIT_OK


def _default_stem(config_path: str) -> str:
    base = config_path
    if base.endswith(".toml"):
        base = base[: -len(".toml")]
    return base


def cmd_code_info(args) -> int:
    try:
        spec = parse_code_spec(args.code)
        code = spec.build()
    except CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"code: {code.name}")
    print(f"n={code.n} k={code.k}")
    print(f"H_X: {code.h_x.rows}x{code.h_x.cols} rank={code.rank_x}")
    print(f"H_Z: {code.h_z.rows}x{code.h_z.cols} rank={code.rank_z}")
    if code.meta is not None:
        meta = code.meta
        print(
            f"blocks: first {meta.n1}x{meta.n2}, second {meta.r1}x{meta.r2}"
        )
    for side in ("x", "z"):
        h = code.check_matrix(side)
        rw = h.row_weights()
        cw = h.col_weights()
        print(
            f"H_{side.upper()} row weights {rw.min()}..{rw.max()}, "
            f"column weights {cw.min()}..{cw.max()}"
        )
    if args.dump in ("hx", "both"):
        print(gf2.format_matrix_text(code.h_x), end="")
    if args.dump in ("hz", "both"):
        print(gf2.format_matrix_text(code.h_z), end="")
    return EXIT_OK


def cmd_assign(args) -> int:
    try:
        spec = parse_code_spec(args.code)
        code = spec.build()
        assignment = assign_mod.assign(
            args.strategy, code, args.m, np.random.default_rng(args.seed)
        )
    except CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    payload = json.dumps(assignment.to_lists())
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(payload + "\n")
    else:
        print(payload)
    return EXIT_OK


def cmd_decode_one(args) -> int:
    try:
        spec = parse_code_spec(args.code)
        code = spec.build()
        cfg = ChannelConfig(args.p_loss)
        decoder = decoders.DECODERS[args.decoder]
        if args.decoder == "surface-ml" and code.toric_d is None:
            raise ConfigurationError("surface-ml decoder requires a toric code")
        rng = trial_rng(args.seed, args.point_index, args.trial)
        assignment = assign_mod.assign(args.strategy, code, args.m, rng)
    except CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    e = sample_loss(assignment, cfg, rng)
    frame = erasure_to_pauli(e, rng)
    s_x = syndrome(code.h_x, frame.z)
    s_z = syndrome(code.h_z, frame.x)
    print(f"code: {code.name}  strategy: {args.strategy}  m={args.m}")
    print(f"erasure ({e.count} qubits): {e.erased.tolist()}")
    print(f"pauli frame x: {frame.x.support().tolist()}")
    print(f"pauli frame z: {frame.z.support().tolist()}")
    print(f"syndrome H_X (for Z errors): {s_x.support().tolist()}")
    print(f"syndrome H_Z (for X errors): {s_z.support().tolist()}")
    trace: list[str] = []
    outcome = decoder(code, e, s_x, s_z, rng=rng, trace=trace)
    for line in trace:
        print("  " + line)
    if not outcome.success:
        print(f"outcome: DecoderFailure ({outcome.reason})")
        return EXIT_OK
    residual_z = frame.z ^ outcome.correction.z
    residual_x = frame.x ^ outcome.correction.x
    z_flips = logical_flips(code, residual_z, "z")
    x_flips = logical_flips(code, residual_x, "x")
    status = (
        TrialStatus.LOGICAL_ERROR if (z_flips or x_flips) else TrialStatus.SUCCESS
    )
    print(f"correction x: {outcome.correction.x.support().tolist()}")
    print(f"correction z: {outcome.correction.z.support().tolist()}")
    print(f"outcome: {status.value}", end="")
    if z_flips or x_flips:
        print(f" (logical z flips: {list(z_flips)}, x flips: {list(x_flips)})")
    else:
        print()
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    handlers = {
        "simulate": cmd_simulate,
        "code-info": cmd_code_info,
        "assign": cmd_assign,
        "decode-one": cmd_decode_one,
    }
    try:
        return handlers[args.command](args)
    except KeyboardInterrupt:
        return EXIT_RUNTIME
    except Exception as exc:  # runtime failures keep a stable exit contract
        logging.getLogger("muxqec").error("%s", exc, exc_info=args.verbose)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
