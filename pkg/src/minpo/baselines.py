"""Comparison solvers sharing encoders and optimizers with MINPO.

* Auxiliary-field networks (A-PINN with an MLP, A-PIKAN with a cKAN): one
  multi-output encoder emits u together with auxiliary fields whose
  derivatives reproduce the memory integral, so the IDE becomes a local PDE
  system.
* Discretized-residual networks (fPINN / fPIKAN): a single u encoder whose
  Caputo derivative is the L1 sum over the time grid inside the residual.
"""

from __future__ import annotations

from dataclasses import dataclass

import jax
import jax.numpy as jnp
import numpy as np

from .core import Datasets, LossWeights
from .encoders import Encoder
from .fractional import l1_matrix
from .problems import FractionalDiffusionProblem, Nested3dProblem, ProblemSpec, VolterraProblem


def relative_error(pred, ref) -> float:
    """||pred - ref||_2 / ||ref||_2; for scalars this is |pred - ref| / |ref|."""
    pred = np.asarray(pred, dtype=float)
    ref = np.asarray(ref, dtype=float)
    if pred.shape != ref.shape:
        raise ValueError(f"shape mismatch {pred.shape} vs {ref.shape}")
    norm = np.linalg.norm(ref)
    if norm == 0.0:
        raise ZeroDivisionError("relative error against a zero reference")
    return float(np.linalg.norm(pred - ref) / norm)


# ------------------------------------------------------------ auxiliary fields


def aux_output_count(problem: ProblemSpec) -> int:
    if isinstance(problem, VolterraProblem):
        return 2
    if isinstance(problem, Nested3dProblem):
        return 4
    raise ValueError("auxiliary formulation covers the Volterra and nested 3D problems only")


def aux_residual(problem: ProblemSpec, net, kappa, xi):
    """Residuals of the auxiliary PDE system at one point.

    Volterra, outputs (u, v) with v = int_0^t e^(tau-t) u:
        [u' + u - kappa v,  v' - (u - v)]
    Nested 3D, outputs (u, v1, v2, v3) with the cascade
        v1 = int_0^t e^(tau-t) u dtau, v2 = int_0^x1 v1, v3 = int_0^x2 v2 = M:
        [(d_t + d_x1 + d_x2) u - u - kappa v3 - f,
         d_t v1 - (u - v1),  d_x1 v2 - v1,  d_x2 v3 - v2]
    """
    if isinstance(problem, VolterraProblem):
        out, d = jax.jvp(net, (xi,), (jnp.ones_like(xi),))
        u, v = out[0], out[1]
        return jnp.stack([d[0] + u - kappa * v, d[1] - (u - v)])
    out = net(xi)
    u, v1, v2, v3 = out[0], out[1], out[2], out[3]
    _, du = jax.jvp(lambda p: net(p)[0], (xi,), (jnp.ones_like(xi),))
    grads = jax.vmap(lambda e: jax.jvp(net, (xi,), (e,))[1])(jnp.eye(3, dtype=xi.dtype))
    return jnp.stack(
        [
            du - u - kappa * v3 - problem.source(xi),
            grads[2, 1] - (u - v1),
            grads[0, 2] - v1,
            grads[1, 3] - v2,
        ]
    )


def aux_initial_masks(problem: ProblemSpec, points: np.ndarray) -> np.ndarray:
    """(n, n_aux) 0/1 mask: where each auxiliary field is known to vanish."""
    points = np.asarray(points)
    if isinstance(problem, VolterraProblem):
        return (points[:, [0]] == 0.0).astype(float)
    t0, x1_0, x2_0 = points[:, 2] == 0.0, points[:, 0] == 0.0, points[:, 1] == 0.0
    return np.column_stack([t0, x1_0, x2_0]).astype(float)


class AuxiliaryModel:
    """A-PINN / A-PIKAN: the encoder family is the only difference."""

    def __init__(
        self,
        problem: ProblemSpec,
        encoder: Encoder,
        weights: LossWeights = LossWeights(),
        learn_kappa: bool = False,
        kappa_init: float = 0.5,
    ):
        n_out = aux_output_count(problem)
        if encoder.config.widths[-1] != n_out:
            raise ValueError(f"encoder must emit {n_out} outputs for {problem.name}")
        self.problem = problem
        self.encoder = encoder
        self.weights = weights
        self.learn_kappa = learn_kappa
        self.kappa_init = kappa_init

    @property
    def encoders(self) -> dict[str, Encoder]:
        return {"aux": self.encoder}

    def init(self, rng: np.random.Generator) -> dict:
        params = {"aux": self.encoder.init(rng)}
        if self.learn_kappa:
            params["kappa"] = jnp.asarray(self.kappa_init)
        return params

    def kappa(self, params):
        return params["kappa"] if self.learn_kappa else self.problem.kappa

    def net(self, params):
        return lambda xi: self.encoder(params["aux"], xi)

    def losses(self, params, data: Datasets) -> dict:
        net = self.net(params)
        kappa = self.kappa(params)
        res = jax.vmap(lambda xi: aux_residual(self.problem, net, kappa, xi))(jnp.asarray(data.ide))
        l_ide = jnp.mean(res[:, 0] ** 2)
        l_aux = jnp.sum(jnp.mean(res[:, 1:] ** 2, axis=0))
        out = jax.vmap(net)(jnp.asarray(data.data_points))
        l_u = jnp.mean((out[:, 0] - jnp.asarray(data.data_values)) ** 2)
        mask = jnp.asarray(aux_initial_masks(self.problem, data.data_points))
        l_v = jnp.sum(jnp.sum(mask * out[:, 1:] ** 2, axis=0) / jnp.maximum(jnp.sum(mask, axis=0), 1.0))
        w = self.weights
        # the auxiliary relations play the role of the memory constraint
        total = w.ide * l_ide + w.data * (l_u + l_v) + w.memory * l_aux
        return {"ide": l_ide, "data": l_u + l_v, "memory": l_aux, "total": total}

    def predict(self, params, points):
        out = jax.vmap(self.net(params))(jnp.asarray(points))
        return out[:, 0], out[:, -1]


# ------------------------------------------------------- discretized residual


@dataclass
class FpdeResidualCfg:
    alpha: float
    n_t: int

    @property
    def dt(self) -> float:
        return 1.0 / self.n_t


def fpde_grid(x: np.ndarray, n_t: int) -> np.ndarray:
    """(n_x, n_t + 1, 2) points (x_i, t_k), t_k = k / n_t."""
    t = np.linspace(0.0, 1.0, n_t + 1)
    return np.stack(np.meshgrid(np.asarray(x, dtype=float), t, indexing="ij"), axis=-1)


def fpde_residual(problem: FractionalDiffusionProblem, cfg: FpdeResidualCfg, u_fn, grid):
    """L1 Caputo of u along each time row minus (u_xx + S), at t_n for n >= 1.

    ``grid`` is (n_x, n_t + 1, 2); returns (n_x, n_t). Every u(x_i, t_k)
    enters the L1 sum, so parameter gradients flow through the history.
    """
    grid = jnp.asarray(grid)
    n_x, n_t1, _ = grid.shape
    if n_t1 != cfg.n_t + 1:
        raise ValueError("grid does not match the configured time levels")
    flat = grid.reshape(-1, 2)
    u = jax.vmap(u_fn)(flat).reshape(n_x, n_t1)
    caputo = (u @ jnp.asarray(l1_matrix(cfg.alpha, cfg.n_t, cfg.dt)).T)[:, 1:]
    inner = flat.reshape(n_x, n_t1, 2)[:, 1:].reshape(-1, 2)
    _, local = jax.vmap(lambda xi: problem.time_and_local(u_fn, xi))(inner)
    source = jax.vmap(problem.source)(inner)
    return caputo - (local + source).reshape(n_x, cfg.n_t)


def l1_memory_estimate(u_fn, alpha: float, n_t: int, points):
    """Caputo derivative implied by a discretized-residual solver at (x, t).

    The solver only knows the L1 values at its time levels t_k = k / n_t
    (zero at t_0); between levels they are interpolated linearly in t.
    """
    points = jnp.asarray(points)
    levels = jnp.linspace(0.0, 1.0, n_t + 1)
    D = jnp.asarray(l1_matrix(alpha, n_t, 1.0 / n_t))

    def one(p):
        pts = jnp.stack([jnp.full_like(levels, p[0]), levels], axis=-1)
        caputo = D @ jax.vmap(u_fn)(pts)
        return jnp.interp(p[1], levels, caputo)

    return jax.vmap(one)(points)


class DiscretizedResidualModel:
    """fPINN / fPIKAN: u encoder trained on the L1-discretized residual."""

    def __init__(
        self,
        problem: FractionalDiffusionProblem,
        encoder: Encoder,
        n_t: int,
        weights: LossWeights = LossWeights(),
    ):
        if not problem.fractional:
            raise ValueError("discretized-residual baselines need a fractional problem")
        self.problem = problem
        self.encoder = encoder
        self.cfg = FpdeResidualCfg(problem.alpha, n_t)
        self.weights = weights

    @property
    def encoders(self) -> dict[str, Encoder]:
        return {"u": self.encoder}

    def init(self, rng: np.random.Generator) -> dict:
        return {"u": self.encoder.init(rng)}

    def u_fn(self, params):
        return self.encoder.scalar(params["u"])

    def losses(self, params, data: Datasets) -> dict:
        u_fn = self.u_fn(params)
        grid = data.memory.grid
        l_ide = jnp.mean(fpde_residual(self.problem, self.cfg, u_fn, grid) ** 2)
        pred = jax.vmap(u_fn)(jnp.asarray(data.data_points))
        l_data = jnp.mean((pred - jnp.asarray(data.data_values)) ** 2)
        zero = jnp.zeros(())
        total = self.weights.ide * l_ide + self.weights.data * l_data
        return {"ide": l_ide, "data": l_data, "memory": zero, "total": total}

    def predict(self, params, points):
        u_fn = self.u_fn(params)
        pts = jnp.asarray(points)
        return jax.vmap(u_fn)(pts), l1_memory_estimate(u_fn, self.cfg.alpha, self.cfg.n_t, pts)
