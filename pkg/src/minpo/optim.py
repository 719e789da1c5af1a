"""Full-batch Adam and L-BFGS on flat float64 parameter vectors.

Both optimizers see the model only through a callback returning
``(loss, grad)`` as (float, np.ndarray); they hold no reference to JAX.
"""

from __future__ import annotations

from collections import deque
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from .diffkit import NonFiniteError

LossGrad = Callable[[np.ndarray], tuple[float, np.ndarray]]


@dataclass
class AdamState:
    size: int
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: np.ndarray = field(default=None, repr=False)
    v: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.m is None:
            self.m = np.zeros(self.size)
        if self.v is None:
            self.v = np.zeros(self.size)


def adam_step(state: AdamState, params: np.ndarray, grad: np.ndarray) -> np.ndarray:
    """One bias-corrected Adam update; updates ``state`` in place."""
    grad = np.asarray(grad, dtype=float)
    if grad.shape != state.m.shape:
        raise ValueError(f"gradient has shape {grad.shape}, state expects {state.m.shape}")
    bad = np.flatnonzero(~np.isfinite(grad))
    if bad.size:
        raise NonFiniteError(f"grad[{bad[0]}]")
    state.step += 1
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * grad * grad
    m_hat = state.m / (1.0 - state.beta1**state.step)
    v_hat = state.v / (1.0 - state.beta2**state.step)
    return params - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)


# ---------------------------------------------------------------- line search


@dataclass
class LineSearchResult:
    step: float
    value: float
    grad: np.ndarray
    trials: int
    ok: bool


def _cubic_min(a, fa, da, b, fb, db):
    """Minimizer of the cubic through (a, fa, da), (b, fb, db), or None."""
    d1 = da + db - 3.0 * (fa - fb) / (a - b)
    disc = d1 * d1 - da * db
    if disc < 0:
        return None
    d2 = np.sign(b - a) * np.sqrt(disc)
    x = b - (b - a) * (db + d2 - d1) / (db - da + 2.0 * d2)
    return x if np.isfinite(x) else None


def wolfe_line_search(
    fun: LossGrad,
    x: np.ndarray,
    f0: float,
    g0: np.ndarray,
    d: np.ndarray,
    step: float = 1.0,
    c1: float = 1e-4,
    c2: float = 0.9,
    max_trials: int = 25,
) -> LineSearchResult:
    """Bracketing + zoom search for a step meeting the strong Wolfe conditions."""
    dphi0 = float(g0 @ d)
    trials = 0

    def phi(a):
        nonlocal trials
        trials += 1
        f, g = fun(x + a * d)
        return float(f), g, float(g @ d)

    def done(a, f, g, ok):
        return LineSearchResult(a, f, g, trials, ok)

    a_prev, f_prev, dphi_prev = 0.0, f0, dphi0
    g_prev = g0
    a = step
    lo = hi = None
    while trials < max_trials:
        f, g, dphi = phi(a)
        if not np.isfinite(f):
            # shrink into the finite region before bracketing
            a = 0.5 * (a_prev + a)
            continue
        if f > f0 + c1 * a * dphi0 or (trials > 1 and f >= f_prev):
            lo, hi = (a_prev, f_prev, dphi_prev, g_prev), (a, f, dphi, g)
            break
        if abs(dphi) <= -c2 * dphi0:
            return done(a, f, g, True)
        if dphi >= 0:
            lo, hi = (a, f, dphi, g), (a_prev, f_prev, dphi_prev, g_prev)
            break
        a_prev, f_prev, dphi_prev, g_prev = a, f, dphi, g
        a = 2.0 * a
    else:
        return done(0.0, f0, g0, False)

    while trials < max_trials:
        a_lo, f_lo, d_lo, g_lo = lo
        a_hi, f_hi, d_hi, _ = hi
        span = a_hi - a_lo
        a = _cubic_min(a_lo, f_lo, d_lo, a_hi, f_hi, d_hi)
        left, right = min(a_lo, a_hi), max(a_lo, a_hi)
        margin = 0.1 * abs(span)
        if a is None or not (left + margin <= a <= right - margin):
            a = a_lo + 0.5 * span
        f, g, dphi = phi(a)
        if not np.isfinite(f) or f > f0 + c1 * a * dphi0 or f >= f_lo:
            hi = (a, f, dphi, g)
        else:
            if abs(dphi) <= -c2 * dphi0:
                return done(a, f, g, True)
            if dphi * span >= 0:
                hi = lo
            lo = (a, f, dphi, g)
        if abs(span) < 1e-16 * max(1.0, abs(a_lo)):
            break
    # best sufficient-decrease point found, if any, is still progress
    a_lo, f_lo, _, g_lo = lo
    if a_lo > 0 and f_lo < f0:
        return done(a_lo, f_lo, g_lo, False)
    return done(0.0, f0, g0, False)


# --------------------------------------------------------------------- L-BFGS


@dataclass
class LbfgsState:
    history: int = 20
    c1: float = 1e-4
    c2: float = 0.9
    max_trials: int = 25
    gtol: float = 1e-9
    pairs: deque = field(default=None, repr=False)
    iteration: int = 0

    def __post_init__(self):
        if self.pairs is None:
            self.pairs = deque(maxlen=max(self.history, 1))


@dataclass
class LbfgsStep:
    params: np.ndarray
    value: float
    grad: np.ndarray
    step: float
    flag: str  # "ok", "converged", "line_search_failed"


def two_loop(pairs, g: np.ndarray) -> np.ndarray:
    """Apply the inverse-Hessian approximation to g; H0 = (s.y / y.y) I."""
    q = g.copy()
    alphas = []
    for s, y, rho in reversed(pairs):
        a = rho * (s @ q)
        alphas.append(a)
        q -= a * y
    if pairs:
        s, y, _ = pairs[-1]
        q *= (s @ y) / (y @ y)
    for (s, y, rho), a in zip(pairs, reversed(alphas)):
        b = rho * (y @ q)
        q += (a - b) * s
    return q


def lbfgs_step(
    state: LbfgsState,
    params: np.ndarray,
    fun: LossGrad,
    value: float | None = None,
    grad: np.ndarray | None = None,
) -> LbfgsStep:
    """One L-BFGS iteration; updates the curvature history in place."""
    if value is None or grad is None:
        value, grad = fun(params)
    value = float(value)
    if not np.isfinite(value):
        raise NonFiniteError("loss")
    if np.linalg.norm(grad) <= state.gtol:
        return LbfgsStep(params, value, grad, 0.0, "converged")

    pairs = list(state.pairs) if state.history > 0 else []
    d = -two_loop(pairs, grad)
    if not (grad @ d < 0):
        d = -grad
    step0 = 1.0 if pairs else min(1.0, 1.0 / np.linalg.norm(grad, np.inf))
    ls = wolfe_line_search(fun, params, value, grad, d, step0, state.c1, state.c2, state.max_trials)
    if ls.step == 0.0 and pairs:
        # stale curvature: retry once along steepest descent
        state.pairs.clear()
        d = -grad
        step0 = min(1.0, 1.0 / np.linalg.norm(grad, np.inf))
        ls = wolfe_line_search(fun, params, value, grad, d, step0, state.c1, state.c2, state.max_trials)
    if ls.step == 0.0:
        return LbfgsStep(params, value, grad, 0.0, "line_search_failed")

    new = params + ls.step * d
    s, y = new - params, ls.grad - grad
    sy = float(s @ y)
    if state.history > 0 and sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
        state.pairs.append((s, y, 1.0 / sy))
    state.iteration += 1
    return LbfgsStep(new, ls.value, ls.grad, ls.step, "ok")


@dataclass
class MinimizeResult:
    params: np.ndarray
    value: float
    iterations: int
    flag: str
    values: list


def minimize_lbfgs(
    fun: LossGrad,
    x0: np.ndarray,
    max_iter: int = 2000,
    history: int = 20,
    gtol: float = 1e-9,
    callback: Callable[[int, np.ndarray, float], None] | None = None,
    max_failures: int = 1,
) -> MinimizeResult:
    """Run lbfgs_step until convergence, max_iter, or repeated line-search failure."""
    state = LbfgsState(history=history, gtol=gtol)
    x = np.asarray(x0, dtype=float).copy()
    f, g = fun(x)
    values = [float(f)]
    flag, failures, it = "max_iter", 0, 0
    for it in range(1, max_iter + 1):
        r = lbfgs_step(state, x, fun, f, g)
        if r.flag == "converged":
            flag, it = "converged", it - 1
            break
        if r.flag == "line_search_failed":
            failures += 1
            if failures >= max_failures:
                flag = "line_search_failed"
                break
            continue
        failures = 0
        x, f, g = r.params, r.value, r.grad
        values.append(f)
        if callback is not None:
            callback(it, x, f)
    return MinimizeResult(x, float(f), it, flag, values)
