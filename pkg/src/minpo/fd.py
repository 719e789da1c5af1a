"""Finite-difference reference solver for the nested 3D transport IDE.

Unknowns live on a uniform N_x^3 grid over [0,1]^3 with axes (x1, x2, t).
The transport operator d_t + d_x1 + d_x2 is discretized with one-sided
differences, the triple memory integral with tensor Gauss-Legendre
quadrature of the trilinear interpolant, and the resulting system is solved
by Picard-Jacobi sweeps that lag both the neighbours and the memory term.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from .quadrature import gauss_legendre

SCHEMES = ("forward", "upwind")


class NotConverged(RuntimeError):
    def __init__(self, iterations: int, last_update: float):
        self.iterations, self.last_update = iterations, last_update
        super().__init__(f"no convergence after {iterations} sweeps (last update {last_update:.3e})")


@dataclass(frozen=True)
class Grid3:
    nx: int

    def __post_init__(self):
        if self.nx < 2:
            raise ValueError("need at least two nodes per axis")

    @property
    def h(self) -> float:
        return 1.0 / (self.nx - 1)

    @property
    def axis(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.nx)

    def nodes(self) -> np.ndarray:
        """(nx, nx, nx, 3) coordinates, index order (x1, x2, t)."""
        a = self.axis
        return np.stack(np.meshgrid(a, a, a, indexing="ij"), axis=-1)

    def dirichlet_mask(self) -> np.ndarray:
        """Inflow faces x1 = 0, x2 = 0 and the initial plane t = 0."""
        m = np.zeros((self.nx,) * 3, dtype=bool)
        m[0, :, :] = m[:, 0, :] = m[:, :, 0] = True
        return m


def hat_weights(axis: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Row k holds the linear-interpolation weights of y[k] on the uniform axis."""
    n = len(axis)
    h = axis[1] - axis[0]
    s = np.clip((y - axis[0]) / h, 0.0, n - 1.0)
    lo = np.minimum(np.floor(s).astype(int), n - 2)
    frac = s - lo
    W = np.zeros((len(y), n))
    rows = np.arange(len(y))
    W[rows, lo] = 1.0 - frac
    W[rows, lo + 1] += frac
    return W


def interpolate_trilinear(grid: Grid3, u: np.ndarray, p) -> float:
    """Trilinear interpolant of nodal values u at a single point p."""
    a = grid.axis
    w = [hat_weights(a, np.array([p[d]]))[0] for d in range(3)]
    return float(np.einsum("a,b,c,abc->", w[0], w[1], w[2], u))


def fd_memory_eval(grid: Grid3, u: np.ndarray, node, n_i: int) -> float:
    """Memory integral at one node, straight from its definition.

    Every one of the n_i^3 Gauss-Legendre samples interpolates u trilinearly.
    """
    x1, x2, t = (float(c) for c in node)
    rule = gauss_legendre(n_i)
    y1, w1 = rule.mapped(0.0, x1)
    y2, w2 = rule.mapped(0.0, x2)
    tau, w3 = rule.mapped(0.0, t)
    total = 0.0
    for a in range(n_i):
        for b in range(n_i):
            for c in range(n_i):
                val = interpolate_trilinear(grid, u, (y1[a], y2[b], tau[c]))
                total += w1[a] * w2[b] * w3[c] * np.exp(tau[c] - t) * val
    return total


def memory_operators(grid: Grid3, n_i: int) -> tuple[np.ndarray, np.ndarray]:
    """1D factors (R_x, R_t) with M = R_x (x) R_x (x) R_t applied to u.

    Trilinear interpolation and the tensor rule are both products over axes,
    so the nodal memory array factorizes exactly into three matrix products.
    """
    a = grid.axis
    rule = gauss_legendre(n_i)
    y, w = rule.mapped(0.0, a)  # (nx, n_i)
    Rx = np.einsum("iq,iqk->ik", w, hat_weights(a, y.ravel()).reshape(len(a), n_i, len(a)))
    kern = np.exp(y - a[:, None])
    Rt = np.einsum("iq,iqk->ik", w * kern, hat_weights(a, y.ravel()).reshape(len(a), n_i, len(a)))
    return Rx, Rt


def memory_array(u: np.ndarray, Rx: np.ndarray, Rt: np.ndarray) -> np.ndarray:
    return np.einsum("ia,jb,nc,abc->ijn", Rx, Rx, Rt, u, optimize=True)


@dataclass
class FdSolution:
    grid: Grid3
    scheme: str
    u: np.ndarray
    memory: np.ndarray
    iterations: int
    updates: list


def _sweep(grid: Grid3, scheme: str, f: np.ndarray, kappa: float):
    """Jacobi update (u_old, M_old) -> u_new.

    Upwind: backward differences on all three axes, equation collocated at
    the node (the local u term implicit). Forward: the time difference is a
    forward one, so the equation sits one level down in t and the local u,
    memory and source terms are taken there; space differences stay
    backward at the new level.
    """
    h = grid.h
    if scheme == "upwind":

        def update(u, mem):
            s = np.zeros_like(u)
            s[1:, :, :] += u[:-1, :, :]
            s[:, 1:, :] += u[:, :-1, :]
            s[:, :, 1:] += u[:, :, :-1]
            return (f + kappa * mem + s / h) / (3.0 / h - 1.0)

        return update

    def update(u, mem):
        new = np.zeros_like(u)
        s = np.zeros_like(u)
        s[1:, :, :] += u[:-1, :, :]
        s[:, 1:, :] += u[:, :-1, :]
        lower = u[:, :, :-1]
        rhs = (lower + s[:, :, 1:]) / h + lower + kappa * mem[:, :, :-1] + f[:, :, :-1]
        new[:, :, 1:] = rhs / (3.0 / h)
        return new

    return update


def picard_jacobi_solve(
    grid: Grid3,
    scheme: str,
    n_i: int,
    source: Callable[[np.ndarray], np.ndarray],
    boundary: Callable[[np.ndarray], np.ndarray],
    kappa: float = 1.0,
    tol: float = 1e-10,
    max_iter: int = 5000,
) -> FdSolution:
    """Solve (d_t + d_x1 + d_x2) u = u + kappa M[u] + f on the grid.

    ``source`` and ``boundary`` take the (..., 3) node array. Each sweep
    recomputes every free node from the previous iterate; converged when the
    max-norm update is at most ``tol``.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"scheme must be one of {SCHEMES}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    xyz = grid.nodes()
    fixed = grid.dirichlet_mask()
    f = np.asarray(source(xyz), dtype=float)
    u = np.zeros((grid.nx,) * 3)
    u[fixed] = np.asarray(boundary(xyz), dtype=float)[fixed]
    update = _sweep(grid, scheme, f, kappa)
    Rx, Rt = memory_operators(grid, n_i)
    updates = []
    for it in range(1, max_iter + 1):
        new = update(u, memory_array(u, Rx, Rt))
        new[fixed] = u[fixed]
        step = float(np.max(np.abs(new - u)))
        updates.append(step)
        u = new
        if step <= tol:
            return FdSolution(grid, scheme, u, memory_array(u, Rx, Rt), it, updates)
    raise NotConverged(max_iter, updates[-1])
