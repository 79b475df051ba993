"""Command-line entry point: ``tabutruss {optimise,analyze,normalize,verify}``.

Exit codes: 0 success, 1 constraint or acceptance failure, 2 bad input.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, load_config, shipped_config_path
from .engine import InfeasibleStartError
from .objectives import ConfigurationError
from .runner import NORMALIZATION_FILE, build_report, optimise, run_normalization, write_report

EXIT_OK, EXIT_FAIL, EXIT_BAD_INPUT = 0, 1, 2


def _config(args) -> RunConfig:
    path = Path(args.config)
    if not path.exists():
        # Allow the bundled names without a path.
        bundled = shipped_config_path(path.name)
        if path.parent == Path(".") and bundled.exists():
            path = bundled
        else:
            raise ConfigError(f"config file not found: {args.config}")
    return load_config(path)


def _out_dir(args, cfg: RunConfig) -> Path:
    return Path(args.out_dir) if args.out_dir else cfg.output_dir


def parse_areas(text: str | None, file: str | None) -> np.ndarray:
    if (text is None) == (file is None):
        raise ConfigError("give exactly one of --areas or --areas-file")
    if file is not None:
        raw = Path(file).read_text(encoding="utf-8").strip()
        if raw.startswith("["):
            return np.array(json.loads(raw), dtype=float)
        text = raw
    parts = [p for p in text.replace(",", " ").split()]
    try:
        return np.array([float(p) for p in parts])
    except ValueError as exc:
        raise ConfigError(f"could not parse areas: {exc}") from exc


def cmd_optimise(args) -> int:
    cfg = _config(args)
    out = _out_dir(args, cfg)
    report, result = optimise(cfg, seed=args.seed, max_evaluations=args.max_evals, out_dir=out)
    print(report.to_text(), end="")
    print(f"trace written to {out / cfg.trace_file}")
    return EXIT_OK if report.feasible else EXIT_FAIL


def cmd_analyze(args) -> int:
    cfg = _config(args)
    areas = parse_areas(args.areas, args.areas_file)
    if areas.shape != (cfg.model.n_members,):
        raise ConfigError(f"expected {cfg.model.n_members} areas, got {areas.size}")
    normalization = cfg.objective.normalization if cfg.objective is not None else None
    report = build_report(cfg, areas, normalization=normalization)
    print(report.to_text(), end="")
    if args.out_dir:
        write_report(args.out_dir, report, stem="analysis")
    return EXIT_OK if report.feasible else EXIT_FAIL


def cmd_normalize(args) -> int:
    cfg = _config(args).with_overrides(args.seed, args.max_evals)
    run = run_normalization(cfg)
    out = _out_dir(args, cfg)
    out.mkdir(parents=True, exist_ok=True)
    run.constants.save(out / NORMALIZATION_FILE)
    print(f"{'objective':<15}{'best':>16}{'worst':>16}")
    for name, d in run.constants.to_dict().items():
        print(f"{name:<15}{d['best']:>16.6f}{d['worst']:>16.6f}")
    print(f"written to {out / NORMALIZATION_FILE}")
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import run_all

    only = None
    if args.criteria:
        only = {int(c) for c in args.criteria.split(",")}
    results = run_all(config_dir=args.config_dir, only=only, stream=sys.stdout)
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tabutruss", description="Tabu search for ten-bar truss design.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("optimise", aliases=["optimize"], help="run a search")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--max-evals", type=int)
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_optimise)

    p = sub.add_parser("analyze", help="analyze one design without searching")
    p.add_argument("--config", required=True)
    p.add_argument("--areas", help="comma or space separated areas in design units")
    p.add_argument("--areas-file")
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("normalize", help="derive compound-objective normalization constants")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--max-evals", type=int)
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("verify", help="run the benchmark acceptance checks")
    p.add_argument("--config-dir", help="directory holding bland.json and bd.json (default: bundled)")
    p.add_argument("--criteria", help="comma separated criterion numbers to run, e.g. 3,4,8")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ConfigurationError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except InfeasibleStartError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
