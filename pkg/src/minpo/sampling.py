"""Seeded collocation, data and memory-consistency sets per experiment."""

from __future__ import annotations

import jax
import numpy as np

from .config import RunConfig
from .core import Datasets, MemorySet
from .fractional import l1_matrix
from .problems import ProblemSpec
from .quadrature import gauss_legendre, nested_3d_points


def _exact(problem: ProblemSpec, pts: np.ndarray) -> np.ndarray:
    return np.asarray(jax.vmap(problem.exact_u)(pts))


def sample_points(cfg: RunConfig, problem: ProblemSpec) -> Datasets:
    cfg = cfg.resolved()
    rng = np.random.default_rng(cfg.seed)
    if cfg.experiment.startswith("exp1"):
        return _volterra_sets(cfg, problem, rng)
    if cfg.experiment == "exp2":
        return _nested_sets(cfg, problem, rng)
    return _fractional_sets(cfg, problem, rng)


def _volterra_sets(cfg, problem, rng) -> Datasets:
    a = problem.upper[0]
    ide = rng.uniform(0.0, a, (cfg.n_res, 1))
    data = [np.zeros((1, 1))]
    if cfg.experiment == "exp1-inverse":
        data.append(rng.uniform(0.0, a, (cfg.n_meas, 1)))
    data_pts = np.concatenate(data)

    rule = gauss_legendre(cfg.n_i)
    outer = rng.uniform(0.0, a, (cfg.n_mem, 1))
    tau, w = rule.mapped(0.0, outer[:, 0])
    mem = MemorySet(outer=outer, nodes=tau[..., None], weights=w, anchors=np.zeros((1, 1)))
    return Datasets(ide, data_pts, _exact(problem, data_pts), mem)


def inflow_faces(rng, n: int) -> np.ndarray:
    """n random points on each of the planes x1 = 0, x2 = 0, t = 0."""
    faces = []
    for d in range(3):
        p = rng.uniform(0.0, 1.0, (n, 3))
        p[:, d] = 0.0
        faces.append(p)
    return np.concatenate(faces)


def _nested_sets(cfg, problem, rng) -> Datasets:
    ide = rng.uniform(0.0, 1.0, (cfg.n_res, 3))
    data_pts = inflow_faces(rng, cfg.n_bc)
    rule = gauss_legendre(cfg.n_i)
    outer = rng.uniform(0.0, 1.0, (cfg.n_mem, 3))
    nodes, w = nested_3d_points(rule, outer)
    mem = MemorySet(outer=outer, nodes=nodes, weights=w)
    return Datasets(ide, data_pts, _exact(problem, data_pts), mem)


def time_grid(n_t: int, t_end: float = 1.0) -> np.ndarray:
    return np.linspace(0.0, t_end, n_t + 1)


def _fractional_sets(cfg, problem, rng) -> Datasets:
    dt = 1.0 / cfg.n_t
    ide = np.column_stack([rng.uniform(0.0, 1.0, cfg.n_res), rng.uniform(dt, 1.0, cfg.n_res)])
    data_pts = fractional_data_points(rng, cfg.n_bc)
    mem = fractional_memory_set(rng, cfg.n_space, cfg.n_t, problem.alpha)
    return Datasets(ide, data_pts, _exact(problem, data_pts), mem)


def fractional_data_points(rng, n: int) -> np.ndarray:
    left = np.column_stack([np.zeros(n), rng.uniform(0.0, 1.0, n)])
    right = np.column_stack([np.ones(n), rng.uniform(0.0, 1.0, n)])
    init = np.column_stack([rng.uniform(0.0, 1.0, n), np.zeros(n)])
    return np.concatenate([left, right, init])


def fractional_memory_set(rng, n_space: int, n_t: int, alpha: float) -> MemorySet:
    """Random x samples crossed with the uniform time grid t_k = k / n_t."""
    x = rng.uniform(0.0, 1.0, n_space)
    t = time_grid(n_t)
    grid = np.stack(np.meshgrid(x, t, indexing="ij"), axis=-1)  # (n_x, n_t + 1, 2)
    return MemorySet(outer=grid[:, 1:], grid=grid, l1=l1_matrix(alpha, n_t, 1.0 / n_t))
