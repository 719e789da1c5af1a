"""Neural field encoders: tanh MLPs and Chebyshev KANs.

Both encoders are pure functions of ``(params, xi)`` where ``xi`` is a single
coordinate vector; batches are handled with ``jax.vmap`` by the callers.
"""

from __future__ import annotations

import json
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import jax.numpy as jnp
import numpy as np

from . import diffkit

CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class MlpConfig:
    """Layer widths including input and output, e.g. (1, 33, 33, 33, 1)."""

    widths: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "widths", tuple(int(w) for w in self.widths))
        if len(self.widths) < 3:
            raise ValueError("MLP needs at least one hidden layer")
        if min(self.widths) < 1:
            raise ValueError(f"widths must be positive: {self.widths}")

    @property
    def param_count(self) -> int:
        w = self.widths
        return sum(w[i] * w[i + 1] + w[i + 1] for i in range(len(w) - 1))


@dataclass(frozen=True)
class CkanConfig:
    widths: tuple[int, ...]
    degree: int

    def __post_init__(self):
        object.__setattr__(self, "widths", tuple(int(w) for w in self.widths))
        if len(self.widths) < 2 or min(self.widths) < 1:
            raise ValueError(f"bad widths {self.widths}")
        if self.degree < 1:
            raise ValueError("Chebyshev degree must be >= 1")

    @property
    def param_count(self) -> int:
        w, k = self.widths, self.degree
        return sum(w[i] * w[i + 1] * (k + 1) for i in range(len(w) - 1))


@dataclass(frozen=True)
class InputScaler:
    """Per-dimension affine map from ``[lower, upper]`` onto ``[-1, 1]``."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lower)
        hi = tuple(float(v) for v in self.upper)
        if len(lo) != len(hi) or any(b <= a for a, b in zip(lo, hi)):
            raise ValueError(f"invalid bounds {lo} {hi}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    def scale(self, x):
        lo, hi = jnp.asarray(self.lower), jnp.asarray(self.upper)
        return 2.0 * (x - lo) / (hi - lo) - 1.0

    def unscale(self, z):
        lo, hi = jnp.asarray(self.lower), jnp.asarray(self.upper)
        return lo + (z + 1.0) * (hi - lo) / 2.0


@dataclass(frozen=True)
class HardConstraint:
    """Multiply the raw output by ``prod(xi[dims])`` in original coordinates."""

    dims: tuple[int, ...] = ()

    def multiplier(self, xi):
        m = jnp.ones((), dtype=xi.dtype)
        for d in self.dims:
            m = m * xi[d]
        return m


def chebyshev_basis(x, k: int):
    """T_0(x)..T_k(x) stacked on a new trailing axis."""
    x = jnp.clip(jnp.asarray(x, dtype=jnp.float64), -1.0, 1.0)
    terms = [jnp.ones_like(x), x]
    for _ in range(2, k + 1):
        terms.append(2.0 * x * terms[-1] - terms[-2])
    return jnp.stack(terms[: k + 1], axis=-1)


def ckan_forward(cfg: CkanConfig, params: Sequence, xi):
    """Phi_L o tanh o ... o Phi_1 o tanh, applied to one (scaled) input."""
    h = diffkit.tanh(xi)
    n = len(params)
    for layer, coeff in enumerate(params):
        basis = chebyshev_basis(h, cfg.degree)  # (w_in, k+1)
        h = jnp.einsum("ik,iok->o", basis, coeff)
        if layer < n - 1:
            h = diffkit.tanh(h)
    return h


def mlp_forward(cfg: MlpConfig, params: Sequence, xi):
    h = xi
    n = len(params)
    for layer, (w, b) in enumerate(params):
        h = h @ w + b
        if layer < n - 1:
            h = diffkit.tanh(h)
    return h


def apply_hard_constraint(hc: HardConstraint | None, raw: Callable) -> Callable:
    if hc is None:
        return raw

    def wrapped(xi):
        return hc.multiplier(xi) * raw(xi)

    return wrapped


@dataclass(frozen=True)
class Encoder:
    """A parameterized field ``xi -> R^out`` with optional scaling/constraint."""

    config: MlpConfig | CkanConfig
    scaler: InputScaler | None = None
    constraint: HardConstraint | None = None
    name: str = field(default="field")

    @property
    def kind(self) -> str:
        return "ckan" if isinstance(self.config, CkanConfig) else "mlp"

    @property
    def param_count(self) -> int:
        return self.config.param_count

    def init(self, rng: np.random.Generator) -> list:
        w = self.config.widths
        if isinstance(self.config, CkanConfig):
            k = self.config.degree
            return [
                jnp.asarray(rng.uniform(-1.0, 1.0, (w[i], w[i + 1], k + 1)) / (w[i] * (k + 1)))
                for i in range(len(w) - 1)
            ]
        params = []
        for i in range(len(w) - 1):
            bound = np.sqrt(6.0 / (w[i] + w[i + 1]))
            params.append(
                (jnp.asarray(rng.uniform(-bound, bound, (w[i], w[i + 1]))), jnp.zeros(w[i + 1]))
            )
        return params

    def raw(self, params, xi):
        z = self.scaler.scale(xi) if self.scaler is not None else xi
        if isinstance(self.config, CkanConfig):
            return ckan_forward(self.config, params, z)
        return mlp_forward(self.config, params, z)

    def __call__(self, params, xi):
        out = self.raw(params, xi)
        if self.constraint is not None:
            out = self.constraint.multiplier(xi) * out
        return out

    def scalar(self, params) -> Callable:
        """Bind parameters: returns ``xi -> output[0]``."""
        return lambda xi: self(params, xi)[0]

    def to_dict(self) -> dict:
        d = {"name": self.name, "kind": self.kind, "widths": list(self.config.widths)}
        if isinstance(self.config, CkanConfig):
            d["degree"] = self.config.degree
        if self.scaler is not None:
            d["scaler"] = {"lower": list(self.scaler.lower), "upper": list(self.scaler.upper)}
        if self.constraint is not None:
            d["constraint"] = list(self.constraint.dims)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> Encoder:
        if d["kind"] == "ckan":
            cfg = CkanConfig(tuple(d["widths"]), d["degree"])
        else:
            cfg = MlpConfig(tuple(d["widths"]))
        scaler = InputScaler(**d["scaler"]) if "scaler" in d else None
        hc = HardConstraint(tuple(d["constraint"])) if "constraint" in d else None
        return cls(cfg, scaler, hc, d.get("name", "field"))


def save_checkpoint(path, module: str, encoders: dict[str, Encoder], params, extra=None) -> None:
    """Write a versioned JSON record; parameters as 17-significant-digit decimals."""
    flat, _ = diffkit.flatten(params)
    head = {
        "version": CHECKPOINT_VERSION,
        "module": module,
        "encoders": {k: e.to_dict() for k, e in encoders.items()},
        "extra": extra or {},
    }
    body = json.dumps(head, indent=1)[:-2]
    numbers = ",\n  ".join(f"{v:.17g}" for v in flat)
    text = f'{body},\n "params": [\n  {numbers}\n ]\n}}\n'
    Path(path).write_text(text)


def load_checkpoint(path, template_params=None):
    """Read a checkpoint. Returns ``(record, params)``.

    ``params`` is unflattened against ``template_params`` when given, else it is
    the flat float64 vector.
    """
    record = json.loads(Path(path).read_text())
    if record.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {record.get('version')}")
    flat = np.asarray(record["params"], dtype=np.float64)
    record["encoders"] = {k: Encoder.from_dict(v) for k, v in record["encoders"].items()}
    if template_params is None:
        return record, flat
    tflat, unravel = diffkit.flatten(template_params)
    if tflat.size != flat.size:
        raise ValueError(f"checkpoint has {flat.size} params, template {tflat.size}")
    return record, unravel(jnp.asarray(flat))


__all__ = [
    "CkanConfig",
    "Encoder",
    "HardConstraint",
    "InputScaler",
    "MlpConfig",
    "apply_hard_constraint",
    "chebyshev_basis",
    "ckan_forward",
    "load_checkpoint",
    "mlp_forward",
    "save_checkpoint",
]
