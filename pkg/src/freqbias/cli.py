"""``freqbias`` command-line front end."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from .csvio import GAP_POLICIES, ingest_csv, read_truth_csv, write_dataset_csv, write_truth_csv
from .errors import FreqBiasError
from .gtg import AreaDroop
from .pipeline import load_config, run_decompose, run_estimate, run_pipeline, run_reserves, write_json
from .synth import BiasSchedule, DisturbanceSpec, InterchangeModel, LoadModel, ar1_series, simulate_ba

LOAD_MODELS = ("constant", "random_walk", "ar1")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="telemetry CSV")
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--window-minutes", type=int)
    p.add_argument("--fixed-beta", type=float)
    p.add_argument("--beta-unit", choices=("mw_per_hz", "mw_per_0p1hz"))
    p.add_argument("--quantile", type=float)
    p.add_argument("--gap-policy", choices=GAP_POLICIES)
    p.add_argument("--flip-interchange-sign", action="store_true", default=None)


def _parse_step(text: str) -> tuple[int, float]:
    try:
        minute, beta = text.split(":")
        return int(minute), float(beta)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected MINUTE:BETA, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="freqbias", description="Frequency bias estimation and ACE analysis")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="write a synthetic telemetry day plus truth sidecar")
    sim.add_argument("--out", required=True)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--minutes", type=int, default=1440)
    sim.add_argument("--beta", type=float, default=4090.0, help="area bias in MW/Hz")
    sim.add_argument("--alpha", type=float, default=0.98)
    sim.add_argument("--beta-step", type=_parse_step, action="append", default=[], metavar="MINUTE:BETA",
                     help="switch the truth bias at MINUTE (repeatable)")
    sim.add_argument("--load-model", choices=LOAD_MODELS, default="random_walk")
    sim.add_argument("--load-step-mw", type=float, default=10.0)
    sim.add_argument("--load-rho", type=float, default=0.95)
    sim.add_argument("--interchange-noise-mw", type=float, default=0.0)
    sim.add_argument("--nsi-mw", type=float, default=0.0)
    sim.add_argument("--no-agc", action="store_true")

    for name, text in (
        ("estimate", "rolling droop and bias estimates"),
        ("decompose", "ACE and IEE with fixed vs. estimated bias"),
        ("reserves", "regulation envelopes, tightening and savings"),
        ("report", "estimate, decompose and reserves plus summary.json"),
    ):
        p = sub.add_parser(name, help=text)
        _add_common(p)
        if name == "report":
            p.add_argument("--truth", help="truth sidecar CSV from simulate")
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    return {
        "window_minutes": args.window_minutes,
        "fixed_beta": args.fixed_beta,
        "beta_unit": args.beta_unit,
        "quantile": args.quantile,
        "gap_policy": args.gap_policy,
        "flip_interchange_sign": args.flip_interchange_sign,
    }


def _simulate(args: argparse.Namespace) -> dict:
    if args.load_model == "constant":
        load = LoadModel.constant()
    elif args.load_model == "random_walk":
        load = LoadModel.random_walk(args.load_step_mw)
    else:
        load = LoadModel.ar1(args.load_rho, args.load_step_mw)
    if args.interchange_noise_mw > 0:
        interchange = InterchangeModel.exogenous(ar1_series(args.seed + 1, args.minutes, 0.9, args.interchange_noise_mw))
    else:
        interchange = InterchangeModel.zero()
    schedule = None
    if args.beta_step:
        schedule = BiasSchedule.piecewise([(0, args.beta)] + sorted(args.beta_step))
    spec = DisturbanceSpec(
        seed=args.seed, load_model=load, interchange_model=interchange, bias_schedule=schedule, nsi_mw=args.nsi_mw
    )
    area = AreaDroop.from_bias(args.beta, args.alpha)
    ds = simulate_ba(area, spec, args.minutes, agc_enabled=not args.no_agc)
    out = Path(args.out)
    tel = write_dataset_csv(ds, out / "telemetry.csv")
    truth = write_truth_csv(ds, out / "truth.csv")
    return {"telemetry": str(tel), "truth": str(truth), "minutes": len(ds)}


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "simulate":
            info = _simulate(args)
            print(json.dumps(info, sort_keys=True))
            return 0
        config = load_config(args.config, _overrides(args))
        tel = ingest_csv(args.input, config.gap_policy, config.flip_interchange_sign)
        out = Path(args.out)
        if args.command == "report":
            truth = read_truth_csv(args.truth)["beta_mw_per_hz"] if args.truth else None
            bundle = run_pipeline(config, tel, out, truth)
        else:
            runner = {"estimate": run_estimate, "decompose": run_decompose, "reserves": run_reserves}[args.command]
            bundle = runner(tel, config, out)
            bundle.files["summary"] = write_json(out / f"{args.command}_summary.json", bundle.summary)
        for key in sorted(bundle.files):
            print(f"{key}: {bundle.files[key]}")
        return 0
    except FreqBiasError as exc:
        print(f"freqbias: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
