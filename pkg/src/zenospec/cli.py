"""Command-line driver for the staged sensing pipeline.

Subcommands mirror the pipeline stages; ``run`` chains them all.  Units at
this boundary are microseconds and ordinary kHz (matching the config file);
exit codes: 0 success, 2 configuration/usage error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from . import pipeline
from .config import CHI_SOURCES, ConfigError, ResolvedConfig, load_config
from .estimator import EigenConvergenceError, TruncationError
from .filters import QuadratureError

US = 1e-6

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", required=True, help="JSON config file")
    p.add_argument("--out", required=True, help="run directory for stage files")


def _add_overrides(p: argparse.ArgumentParser, sim: bool, recon: bool) -> None:
    if sim:
        p.add_argument("--q", type=int, default=None, help="override repetitions Q")
        p.add_argument("--seed", type=int, default=None, help="override master seed")
        p.add_argument("--workers", type=int, default=1, help="parallel workers over tau")
    p.add_argument(
        "--chi-source",
        choices=CHI_SOURCES,
        default=None,
        help="estimate chi from measured survivals or from the cross term",
    )
    if recon:
        p.add_argument("--epsilon", type=float, default=None,
                       help="relative eigenvalue truncation threshold")
        p.add_argument("--tau-offset-us", type=float, default=None,
                       help="re-evaluate filters at tau + offset (microseconds)")
        p.add_argument("--clamp-negative", action="store_true",
                       help="zero negative reconstructed values in fidelities")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zenospec",
        description="Projective-measurement noise sensing on a two-level probe: "
        "simulate survival statistics, estimate the correlation statistic chi, "
        "and reconstruct the noise power spectral density.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    specs = {
        "run": "full pipeline: simulate, chi, reconstruct, fidelity, summary",
        "simulate": "survival-probability sweep over (tau, q)",
        "chi": "chi estimates from an existing survivals.csv",
        "reconstruct": "spectrum reconstruction from an existing chi.csv",
        "fidelity": "fidelities of an existing reconstruction",
        "theory": "theory-only chi curve, filter bank and overlap matrix",
    }
    for name, help_ in specs.items():
        p = sub.add_parser(name, help=help_)
        _add_common(p)
        if name in ("run", "simulate"):
            _add_overrides(p, sim=True, recon=name == "run")
        elif name in ("chi", "reconstruct"):
            _add_overrides(p, sim=False, recon=name == "reconstruct")
        if name == "fidelity":
            p.add_argument("--against", default=None,
                           help="config whose noise model is the comparison original")
            p.add_argument("--clamp-negative", action="store_true")
    return parser


def _resolve(args: argparse.Namespace) -> ResolvedConfig:
    cfg = load_config(args.config)
    updates: dict = {}
    if getattr(args, "q", None) is not None:
        if args.q < 2:
            raise ConfigError("--q must be >= 2")
        updates["q_repetitions"] = args.q
    if getattr(args, "seed", None) is not None:
        updates["master_seed"] = args.seed
    if getattr(args, "epsilon", None) is not None:
        updates["epsilon"] = args.epsilon
    if getattr(args, "tau_offset_us", None) is not None:
        updates["tau_offset"] = args.tau_offset_us * US
    if getattr(args, "clamp_negative", False):
        updates["clamp_negative"] = True
    if getattr(args, "chi_source", None) is not None:
        updates["chi_source"] = args.chi_source
    return dataclasses.replace(cfg, **updates) if updates else cfg


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _resolve(args)
        if args.command == "run":
            summary = pipeline.run_experiment(cfg, args.out, workers=args.workers)
            print(f"run complete: {args.out} "
                  f"(fidelity_spectrum={summary['fidelity_spectrum']}, "
                  f"kept_modes={summary['kept_modes']})")
        elif args.command == "simulate":
            pipeline.stage_simulate(cfg, args.out, workers=args.workers)
            print(f"wrote {args.out}/{pipeline.SURVIVALS_CSV}")
        elif args.command == "chi":
            pipeline.stage_chi(cfg, args.out)
            print(f"wrote {args.out}/{pipeline.CHI_CSV}")
        elif args.command == "reconstruct":
            pipeline.stage_reconstruct(cfg, args.out)
            print(f"wrote {args.out}/{pipeline.SPECTRUM_CSV}")
        elif args.command == "fidelity":
            against = load_config(args.against) if args.against else None
            doc = pipeline.stage_fidelity(cfg, args.out, against=against)
            print(f"fidelity_chi={doc['fidelity_chi']} "
                  f"fidelity_spectrum={doc['fidelity_spectrum']}")
        elif args.command == "theory":
            pipeline.stage_theory(cfg, args.out)
            print(f"wrote {args.out}/chi_theory.csv")
    except (ConfigError, pipeline.MissingStageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (QuadratureError, EigenConvergenceError, TruncationError, ValueError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
