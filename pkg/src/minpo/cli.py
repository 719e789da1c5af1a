"""Command-line entry point: ``minpo-run --experiment exp2 --method minpo-kan ...``.

Exit codes: 0 success, 1 configuration error, 2 training divergence.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import fields
from pathlib import Path

from .config import ConfigError, RunConfig, load_config
from .runner import TrainingDiverged, run_experiment


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="minpo-run", description="Run one MINPO / baseline experiment.")
    p.add_argument("--config", help="key = value config file; flags override it")
    p.add_argument("-v", "--verbose", action="store_true")
    for f in fields(RunConfig):
        flag = "--" + f.name.replace("_", "-")
        t = str(f.type)
        if "tuple" in t:
            p.add_argument(flag, type=int, nargs="+", default=None)
        elif t.startswith("int"):
            p.add_argument(flag, type=int, default=None)
        elif t.startswith("float"):
            p.add_argument(flag, type=float, default=None)
        else:
            p.add_argument(flag, default=None)
    return p


def config_from_args(args: argparse.Namespace) -> RunConfig:
    values = load_config(args.config) if args.config else {}
    for f in fields(RunConfig):
        v = getattr(args, f.name)
        if v is not None:
            values[f.name] = tuple(v) if isinstance(v, list) else v
    try:
        return RunConfig(**values).resolved()
    except TypeError as err:
        raise ConfigError(str(err)) from err


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = config_from_args(args)
        if cfg.out:
            # fail before training rather than after it
            Path(cfg.out).mkdir(parents=True, exist_ok=True)
    except (ConfigError, OSError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return 1
    try:
        record = run_experiment(cfg)
    except TrainingDiverged as err:
        print(f"training diverged: {err}", file=sys.stderr)
        return 2
    s = record.summary
    print(
        f"{s['experiment']} {s['method']} seed={s['seed']} e_u={s['e_u']:.3e} "
        f"e_M={s['e_M']:.3e} e_kappa={s['e_kappa']:.3e} wall={s['wall_seconds']:.1f}s"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
