"""Two-phase optimization (Adam, then L-BFGS) of any loss over a parameter pytree."""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass, field

import jax
import jax.numpy as jnp
import numpy as np

from . import diffkit
from .optim import AdamState, adam_step, minimize_lbfgs

log = logging.getLogger(__name__)


class Objective:
    """Jitted flat-vector view of a loss returning a dict with a "total" entry."""

    def __init__(self, loss_fn: Callable[[dict], dict], params):
        self.x0, self.unravel = diffkit.flatten(params)
        self._loss_fn = loss_fn

        def total(x):
            comps = loss_fn(self.unravel(x))
            return comps["total"], comps

        self._vg = jax.jit(jax.value_and_grad(total, has_aux=True))
        self._comps = jax.jit(lambda x: loss_fn(self.unravel(x)))
        self.evaluations = 0

    def __call__(self, x: np.ndarray) -> tuple[float, np.ndarray]:
        self.evaluations += 1
        (value, _), grad = self._vg(jnp.asarray(x))
        return float(value), np.asarray(grad, dtype=float)

    def value_grad_components(self, x: np.ndarray):
        self.evaluations += 1
        (value, comps), grad = self._vg(jnp.asarray(x))
        return float(value), np.asarray(grad, dtype=float), {k: float(v) for k, v in comps.items()}

    def components(self, x: np.ndarray) -> dict:
        return {k: float(v) for k, v in self._comps(jnp.asarray(x)).items()}

    def params(self, x: np.ndarray):
        return self.unravel(jnp.asarray(x))


@dataclass
class Schedule:
    adam_iters: int = 10000
    lbfgs_iters: int = 2000
    lr: float = 1e-3
    history: int = 20
    gtol: float = 1e-9
    log_every: int = 500


@dataclass
class TrainResult:
    x: np.ndarray
    lbfgs_flag: str = ""
    adam_steps: int = 0
    lbfgs_steps: int = 0
    history: list = field(default_factory=list)


class Diverged(FloatingPointError):
    """Training produced a non-finite loss; ``x`` is the last finite iterate."""

    def __init__(self, x: np.ndarray, iteration: int, node: str):
        self.x, self.iteration, self.node = x, iteration, node
        super().__init__(f"non-finite {node} at iteration {iteration}")


def train(
    obj: Objective,
    schedule: Schedule,
    on_log: Callable[[int, np.ndarray, dict], None] | None = None,
    x0: np.ndarray | None = None,
) -> TrainResult:
    """Adam for ``adam_iters`` steps, then L-BFGS; ``on_log`` sees every log_every-th iterate."""
    x = np.array(obj.x0 if x0 is None else x0, dtype=float)
    result = TrainResult(x)

    last = [-1]

    def report(it, x, comps):
        if on_log is not None and it != last[0]:
            on_log(it, x, comps)
        last[0] = it

    state = AdamState(x.size, lr=schedule.lr)
    for it in range(schedule.adam_iters):
        value, grad, comps = obj.value_grad_components(x)
        if not np.isfinite(value):
            raise Diverged(x, it, "loss")
        if it % schedule.log_every == 0:
            report(it, x, comps)
        try:
            x = adam_step(state, x, grad)
        except diffkit.NonFiniteError as err:
            raise Diverged(x, it, err.node) from err
    result.adam_steps = schedule.adam_iters
    if schedule.adam_iters % schedule.log_every == 0:
        report(schedule.adam_iters, x, obj.components(x))

    def cb(k, xk, fk):
        if k % schedule.log_every == 0:
            report(schedule.adam_iters + k, xk, obj.components(xk))

    if schedule.lbfgs_iters > 0:
        try:
            res = minimize_lbfgs(obj, x, schedule.lbfgs_iters, schedule.history, schedule.gtol, cb)
        except diffkit.NonFiniteError as err:
            raise Diverged(x, schedule.adam_iters, err.node) from err
        if not np.isfinite(res.value):
            raise Diverged(x, schedule.adam_iters, "loss")
        x = res.params
        result.lbfgs_flag, result.lbfgs_steps = res.flag, res.iterations
        log.info("L-BFGS stopped after %d iterations: %s", res.iterations, res.flag)
    result.x = x
    report(schedule.adam_iters + result.lbfgs_steps, x, obj.components(x))
    return result
