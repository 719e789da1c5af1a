"""MINPO: learned memory field, explicit reconstruction, three-term loss.

The memory encoder M_theta approximates the nonlocal operator (or the Caputo
derivative for fractional problems); the solution is recovered in closed form
from it, or from a second inverse-memory encoder J_phi in the fractional case.
"""

from __future__ import annotations

from dataclasses import dataclass

import jax
import jax.numpy as jnp
import numpy as np

from . import diffkit
from .encoders import Encoder
from .problems import ProblemSpec


@dataclass(frozen=True)
class LossWeights:
    ide: float = 1.0
    data: float = 1.0
    memory: float = 1.0

    def __post_init__(self):
        if min(self.ide, self.data, self.memory) <= 0:
            raise ValueError("loss weights must be positive")


@dataclass
class MemorySet:
    """Points where M_theta is tied to its integral definition.

    Quadrature problems fill ``nodes``/``weights`` (one row of GL nodes per
    outer point, kernel not included). Fractional problems fill ``grid``
    (n_x, n_t + 1, dim) and the L1 matrix; ``outer`` is then grid[:, 1:].
    ``anchors`` are points where the memory must vanish.
    """

    outer: np.ndarray
    nodes: np.ndarray | None = None
    weights: np.ndarray | None = None
    grid: np.ndarray | None = None
    l1: np.ndarray | None = None
    anchors: np.ndarray | None = None

    def __post_init__(self):
        if len(self.outer) == 0:
            raise ValueError("empty memory-consistency set")


@dataclass
class Datasets:
    ide: np.ndarray
    data_points: np.ndarray
    data_values: np.ndarray
    memory: MemorySet

    def __post_init__(self):
        if len(self.ide) == 0 or len(self.data_points) == 0:
            raise ValueError("collocation and data sets must be non-empty")


def reconstruct_volterra(m_fn):
    """u = dM/dt + M for the exponential Volterra kernel."""
    dm = diffkit.partial(m_fn, (1,))
    return lambda xi: dm(xi) + m_fn(xi)


def reconstruct_3d(m_fn):
    """u = d3M/(dx1 dx2 dt) + d2M/(dx1 dx2), coordinates (x1, x2, t)."""
    m12 = diffkit.partial(m_fn, (1, 1, 0))
    m12t = diffkit.partial(m12, (0, 0, 1))
    return lambda xi: m12t(xi) + m12(xi)


def reconstruct_fractional(j_fn, u0):
    """u = u0(x) + J(x, t)."""
    return lambda xi: u0(xi[:-1]) + j_fn(xi)


def ide_residual(problem: ProblemSpec, u_fn, m_fn, kappa, points):
    """Continuous IDE residual at each point; every derivative from autodiff."""
    return jax.vmap(lambda xi: problem.residual(u_fn, m_fn(xi), kappa, xi))(points)


def memory_consistency_loss(problem: ProblemSpec, u_fn, m_fn, mem: MemorySet):
    """MSE between M_theta and the discretized operator applied to u_Theta."""
    if mem.grid is not None:
        n_x, n_t1, dim = mem.grid.shape
        u = jax.vmap(u_fn)(jnp.asarray(mem.grid).reshape(-1, dim)).reshape(n_x, n_t1)
        target = (u @ jnp.asarray(mem.l1).T)[:, 1:]
        m = jax.vmap(m_fn)(jnp.asarray(mem.outer).reshape(-1, dim)).reshape(target.shape)
        loss = jnp.mean((m - target) ** 2)
    else:
        nodes = jnp.asarray(mem.nodes)
        n_out, n_q, dim = nodes.shape
        u = jax.vmap(u_fn)(nodes.reshape(-1, dim)).reshape(n_out, n_q)
        outer = jnp.asarray(mem.outer)
        k = problem.kernel(nodes[..., -1], outer[:, None, -1])
        target = jnp.sum(jnp.asarray(mem.weights) * k * u, axis=1)
        m = jax.vmap(m_fn)(outer)
        loss = jnp.mean((m - target) ** 2)
    if mem.anchors is not None and len(mem.anchors):
        loss = loss + jnp.mean(jax.vmap(m_fn)(jnp.asarray(mem.anchors)) ** 2)
    return loss


class Minpo:
    """Memory (and inverse-memory) encoders bound to a problem."""

    def __init__(
        self,
        problem: ProblemSpec,
        memory: Encoder,
        inverse: Encoder | None = None,
        weights: LossWeights = LossWeights(),
        learn_kappa: bool = False,
        kappa_init: float = 0.5,
    ):
        if problem.fractional != (inverse is not None):
            raise ValueError("an inverse-memory encoder is required iff the problem is fractional")
        self.problem = problem
        self.memory = memory
        self.inverse = inverse
        self.weights = weights
        self.learn_kappa = learn_kappa
        self.kappa_init = kappa_init

    @property
    def encoders(self) -> dict[str, Encoder]:
        enc = {"memory": self.memory}
        if self.inverse is not None:
            enc["inverse"] = self.inverse
        return enc

    def init(self, rng: np.random.Generator) -> dict:
        params = {"memory": self.memory.init(rng)}
        if self.inverse is not None:
            params["inverse"] = self.inverse.init(rng)
        if self.learn_kappa:
            params["kappa"] = jnp.asarray(self.kappa_init)
        return params

    def kappa(self, params):
        return params["kappa"] if self.learn_kappa else self.problem.kappa

    def memory_fn(self, params):
        return self.memory.scalar(params["memory"])

    def solution_fn(self, params):
        m_fn = self.memory_fn(params)
        recon = self.problem.reconstruction
        if recon == "volterra1d":
            return reconstruct_volterra(m_fn)
        if recon == "nested3d":
            return reconstruct_3d(m_fn)
        if recon == "fractional":
            j_fn = self.inverse.scalar(params["inverse"])
            return reconstruct_fractional(j_fn, lambda x: self.problem.initial(x))
        raise ValueError(f"unknown reconstruction {recon!r}")

    def losses(self, params, data: Datasets) -> dict:
        return total_loss(self, params, data)

    def predict(self, params, points):
        u_fn, m_fn = self.solution_fn(params), self.memory_fn(params)
        pts = jnp.asarray(points)
        return jax.vmap(u_fn)(pts), jax.vmap(m_fn)(pts)


def total_loss(model: Minpo, params, data: Datasets) -> dict:
    """Weighted sum of IDE, data and memory-consistency MSEs, with components."""
    u_fn, m_fn = model.solution_fn(params), model.memory_fn(params)
    res = ide_residual(model.problem, u_fn, m_fn, model.kappa(params), jnp.asarray(data.ide))
    l_ide = jnp.mean(res**2)
    pred = jax.vmap(u_fn)(jnp.asarray(data.data_points))
    l_data = jnp.mean((pred - jnp.asarray(data.data_values)) ** 2)
    l_mem = memory_consistency_loss(model.problem, u_fn, m_fn, data.memory)
    w = model.weights
    total = w.ide * l_ide + w.data * l_data + w.memory * l_mem
    return {"ide": l_ide, "data": l_data, "memory": l_mem, "total": total}
