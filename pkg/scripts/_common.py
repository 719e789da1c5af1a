"""Shared helpers for the experiment scripts."""

import argparse
import csv
import logging
from pathlib import Path

from minpo.config import RunConfig
from minpo.runner import run_experiment


def parser(description: str) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--out", default="results", help="root directory for run artifacts")
    p.add_argument("--adam-iters", type=int, default=10000)
    p.add_argument("--lbfgs-iters", type=int, default=2000)
    p.add_argument("--seeds", type=int, nargs="+", default=[0])
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def setup(args) -> Path:
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    root = Path(args.out)
    root.mkdir(parents=True, exist_ok=True)
    return root


def execute(root: Path, tag: str, **kwargs) -> dict:
    summary = run_experiment(RunConfig(out=str(root / tag), **kwargs)).summary
    print(f"{tag:40s} e_u={summary['e_u']:.3e} e_M={summary['e_M']:.3e} "
          f"e_kappa={summary['e_kappa']:.3e} wall={summary['wall_seconds']:.0f}s", flush=True)
    return {"tag": tag, **summary}


def write_table(path: Path, rows: list[dict]) -> None:
    keys = list(rows[0])
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=keys)
        w.writeheader()
        w.writerows(rows)
