"""Run configuration: dataclass, key=value config files, per-experiment defaults."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, fields
from pathlib import Path

EXPERIMENTS = ("exp1-forward", "exp1-inverse", "exp2", "exp3")
METHODS = ("minpo-kan", "minpo-mlp", "apinn", "apikan", "fpinn", "fpikan", "fd-forward", "fd-upwind")

# (hidden width, hidden layers, degree) per experiment and encoder family,
# taken from the figure/table captions.
ARCH = {
    ("exp1-forward", "kan"): (15, 3, 4),
    ("exp1-forward", "mlp"): (33, 3, 0),
    ("exp1-inverse", "kan"): (15, 3, 3),
    ("exp1-inverse", "mlp"): (30, 3, 0),
    ("exp2", "kan"): (10, 3, 3),
    ("exp2", "mlp"): (21, 3, 0),
    ("exp3", "kan"): (15, 3, 4),
    ("exp3", "mlp"): (33, 3, 0),
}

N_RES = {"exp1-forward": 2400, "exp1-inverse": 2000, "exp2": 1000, "exp3": 2000}
N_I = {"exp1-forward": 20, "exp1-inverse": 20, "exp2": 10, "exp3": 0}
N_MEM = {"exp1-forward": 50, "exp1-inverse": 50, "exp2": 4, "exp3": 0}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    experiment: str = "exp1-forward"
    method: str = "minpo-kan"
    width: int | None = None
    depth: int | None = None
    degree: int | None = None
    kappa: float = 1.0
    alpha: float | None = None
    length: float = 1.0
    n_res: int | None = None
    n_i: int | None = None
    n_t: int = 10
    n_meas: int = 10
    n_mem: int | None = None
    n_bc: int = 100
    n_space: int = 200
    nx: int = 25
    seed: int = 0
    adam_iters: int = 10000
    lbfgs_iters: int = 2000
    lr: float = 1e-3
    kappa_init: float = 0.5
    lambda_ide: float = 1.0
    lambda_data: float = 1.0
    lambda_mem: float = 1.0
    log_every: int = 500
    out: str | None = None
    width_ladder: tuple[int, ...] = field(default_factory=tuple)

    @property
    def family(self) -> str:
        if self.method in ("minpo-kan", "apikan", "fpikan"):
            return "kan"
        if self.method in ("minpo-mlp", "apinn", "fpinn"):
            return "mlp"
        return "fd"

    def resolved(self) -> RunConfig:
        """Validate and fill experiment-dependent defaults."""
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}")
        if self.method.startswith("fd") and self.experiment != "exp2":
            raise ConfigError("finite-difference methods only apply to exp2")
        if self.method in ("fpinn", "fpikan") and self.experiment != "exp3":
            raise ConfigError("fpinn/fpikan only apply to exp3")
        if self.method in ("apinn", "apikan") and self.experiment == "exp3":
            raise ConfigError("apinn/apikan do not apply to exp3")
        if (self.alpha is not None) != (self.experiment == "exp3"):
            raise ConfigError("alpha is required for exp3 and only for exp3")
        if self.alpha is not None and not 0.0 < self.alpha < 1.0:
            raise ConfigError("alpha must lie in (0, 1)")
        cfg = dataclasses.replace(self)
        if self.family != "fd":
            w, d, k = ARCH[(self.experiment, self.family)]
            cfg.width = self.width or w
            cfg.depth = self.depth or d
            cfg.degree = self.degree or (k if self.family == "kan" else None)
        cfg.n_res = self.n_res or N_RES[self.experiment]
        cfg.n_i = self.n_i if self.n_i is not None else (20 if self.family == "fd" else N_I[self.experiment])
        cfg.n_mem = self.n_mem or N_MEM[self.experiment]
        return cfg


def _coerce(name: str, raw: str):
    types = {f.name: f.type for f in fields(RunConfig)}
    if name not in types:
        raise ConfigError(f"unknown config key {name!r}")
    t = str(types[name])
    raw = raw.strip()
    if raw.lower() in ("none", ""):
        return None
    if "tuple" in t:
        return tuple(int(v) for v in raw.replace(",", " ").split())
    if t.startswith("int"):
        return int(raw)
    if t.startswith("float"):
        return float(raw)
    return raw


def parse_config_text(text: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, raw = line.split("=", 1)
        key = key.strip().replace("-", "_")
        values[key] = _coerce(key, raw)
    return values


def load_config(path) -> dict:
    return parse_config_text(Path(path).read_text())


def dump_config(cfg: RunConfig) -> str:
    lines = []
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if isinstance(v, tuple):
            v = " ".join(str(x) for x in v)
        lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"
