"""Command-line front end.

Subcommands:
  simulate        run a Monte-Carlo sweep from a JSON config and write artifacts
  codebook-dump   emit the beam grid and all assembled precoders as JSON
  validate-config parse and validate a config file

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .codebook import dump_codebook
from .errors import ConfigError, NumericalError
from .harness import ExperimentConfig, run_sweep


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rismimo",
                                     description="RIS-assisted MIMO link simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a seeded Monte-Carlo sweep")
    sim.add_argument("--config", required=True, help="path to a JSON scenario config")
    sim.add_argument("--out", required=True, help="output directory for artifacts")
    sim.add_argument("--trials", type=int, default=None, help="override trial count")
    sim.add_argument("--seed", type=int, default=None, help="override master seed")
    sim.add_argument("--selector", choices=["proposed", "conventional", "both"],
                     default=None, help="override selector kind")
    sim.add_argument("--metric", choices=["lambda", "effrank", "both"],
                     default=None, help="override optimization objective")
    sim.add_argument("--trace", action="store_true",
                     help="also write the per-configuration optimizer trace (JSONL)")
    sim.add_argument("--no-figures", action="store_true", help="skip figure rendering")

    dump = sub.add_parser("codebook-dump", help="dump beams and precoders as JSON")
    dump.add_argument("--n1", type=int, required=True)
    dump.add_argument("--n2", type=int, required=True)
    dump.add_argument("--o1", type=int, required=True)
    dump.add_argument("--o2", type=int, required=True)
    dump.add_argument("--layer", type=int, required=True)
    dump.add_argument("--out", default=None, help="write to file instead of stdout")

    val = sub.add_parser("validate-config", help="validate a scenario config file")
    val.add_argument("path", help="path to a JSON scenario config")
    return parser


def _cmd_simulate(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    if args.trials is not None:
        cfg.trials = args.trials
    if args.seed is not None:
        cfg.seed = args.seed
    if args.selector is not None:
        cfg.selector_kind = args.selector
    if args.metric is not None:
        cfg.metric_kind = args.metric
    rows = run_sweep(cfg, out_dir=args.out, figures=not args.no_figures, trace=args.trace)
    print(f"wrote {len(rows)} result rows to {args.out}")
    for r in rows:
        print(f"  snr={r.snr_db:+6.1f} dB  {r.selector:<12s} {r.metric:<8s} "
              f"rate={r.mean_rate:8.4f} +/- {r.stderr:.4f} bits/s/Hz "
              f"(trials={r.trials}, errors={r.errors})")
    return 0


def _cmd_codebook_dump(args) -> int:
    if min(args.n1, args.n2, args.o1, args.o2) < 1 or not 1 <= args.layer <= 4:
        raise ConfigError("grid parameters must be >= 1 and layer in 1..4")
    data = dump_codebook(args.n1, args.n2, args.o1, args.o2, args.layer)
    text = json.dumps(data, indent=2)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        print(f"wrote {len(data['precoders'])} precoders to {args.out}")
    else:
        print(text)
    return 0


def _cmd_validate(args) -> int:
    cfg = ExperimentConfig.load(args.path)
    cfg.validate()
    print(f"config ok: {cfg.name} ({cfg.n_t}x{cfg.n_r}, {cfg.n_ris} elements, "
          f"{len(cfg.snr_grid_db)} SNR points)")
    return 0


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "codebook-dump":
            return _cmd_codebook_dump(args)
        if args.command == "validate-config":
            return _cmd_validate(args)
        parser.error(f"unknown command {args.command}")
    except (ConfigError, ValueError) as exc:
        print(f"error: configuration: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
