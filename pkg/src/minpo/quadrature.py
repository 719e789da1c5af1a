"""Gauss-Legendre rules and the running/nested integrals built from them."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_POINTS = 64


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def n(self) -> int:
        return self.nodes.size

    def mapped(self, a, b):
        """Nodes and weights on ``[a, b]``; ``a``/``b`` may be arrays (broadcast
        against a trailing node axis)."""
        a = np.asarray(a, dtype=float)[..., None]
        b = np.asarray(b, dtype=float)[..., None]
        half = 0.5 * (b - a)
        return a + half * (self.nodes + 1.0), half * self.weights


def _legendre(n: int, x: np.ndarray):
    """P_n(x) and P_n'(x) by the three-term recurrence."""
    p0, p1 = np.ones_like(x), x.copy()
    if n == 0:
        return p0, np.zeros_like(x)
    for k in range(2, n + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    dp = n * (x * p1 - p0) / (x * x - 1.0)
    return p1, dp


def gauss_legendre(n: int, tol: float = 1e-15, max_iter: int = 100) -> QuadratureRule:
    """n-point rule on [-1, 1]: Newton on P_n from Chebyshev-type starting guesses."""
    if not 1 <= n <= MAX_POINTS:
        raise ValueError(f"n must be in [1, {MAX_POINTS}], got {n}")
    i = np.arange(1, n + 1)
    x = np.cos(np.pi * (i - 0.25) / (n + 0.5))
    for _ in range(max_iter):
        p, dp = _legendre(n, x)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) <= tol:
            break
    else:
        raise ConvergenceError(f"Newton iteration for P_{n} roots did not converge")
    _, dp = _legendre(n, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    order = np.argsort(x)
    x, w = x[order], w[order]
    # enforce exact symmetry
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    return QuadratureRule(x, w)


def integrate_1d(rule: QuadratureRule, f, a: float, b: float) -> float:
    if b < a:
        raise ValueError("need a <= b")
    if a == b:
        return 0.0
    y, w = rule.mapped(a, b)
    return float(np.sum(w * f(y)))


def nested_3d_points(rule: QuadratureRule, upper):
    """Tensor GL points over [0, x1] x [0, x2] x [0, t] for each upper corner.

    ``upper`` has shape (..., 3) ordered (x1, x2, t). Returns points of shape
    (..., n**3, 3) and matching weights of shape (..., n**3).
    """
    upper = np.asarray(upper, dtype=float)
    n = rule.n
    y1, w1 = rule.mapped(0.0, upper[..., 0])
    y2, w2 = rule.mapped(0.0, upper[..., 1])
    tau, wt = rule.mapped(0.0, upper[..., 2])
    shape = upper.shape[:-1] + (n, n, n)
    pts = np.stack(
        [
            np.broadcast_to(y1[..., :, None, None], shape),
            np.broadcast_to(y2[..., None, :, None], shape),
            np.broadcast_to(tau[..., None, None, :], shape),
        ],
        axis=-1,
    )
    wts = w1[..., :, None, None] * w2[..., None, :, None] * wt[..., None, None, :]
    return pts.reshape(upper.shape[:-1] + (n**3, 3)), wts.reshape(upper.shape[:-1] + (n**3,))


def integrate_3d_nested(rule: QuadratureRule, f, upper) -> float:
    """Integral of vectorized ``f(y1, y2, tau)`` over [0, x1] x [0, x2] x [0, t].

    Kernels that depend on the corner, like exp(tau - t), close over it.
    """
    pts, wts = nested_3d_points(rule, upper)
    vals = f(pts[:, 0], pts[:, 1], pts[:, 2])
    return float(np.sum(wts * vals))
