"""The three benchmark IDEs: closed-form solutions, memory terms and sources.

Coordinates are ordered space first, time last: (t,), (x1, x2, t), (x, t).
All point functions take a single coordinate vector and are JAX-traceable.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gamma

import jax
import jax.numpy as jnp
import numpy as np

from . import diffkit


def value_and_grad_fwd(f, xi):
    """f(xi) and its full input gradient via batched forward-mode products."""
    eye = jnp.eye(xi.shape[0], dtype=xi.dtype)
    vals, tans = jax.vmap(lambda v: jax.jvp(f, (xi,), (v,)))(eye)
    return vals[0], tans


@dataclass(frozen=True)
class ProblemSpec:
    """One IDE instance of the form

        lambda_1 u_t + lambda_alpha D^alpha u = N[u] + kappa M[u] + S.
    """

    name: str
    lower: tuple[float, ...]
    upper: tuple[float, ...]
    reconstruction: str
    lambda_1: float = 1.0
    lambda_alpha: float = 0.0
    alpha: float | None = None
    kappa: float = 1.0

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def fractional(self) -> bool:
        return self.lambda_alpha != 0.0

    def exact_u(self, xi):
        raise NotImplementedError

    def exact_memory(self, xi):
        """M[u*] for classical problems, the Caputo derivative of u* for fractional ones."""
        raise NotImplementedError

    def source(self, xi):
        raise NotImplementedError

    def time_and_local(self, u_fn, xi):
        """Return (d_t u, N[u]) at xi; d_t u is None when lambda_1 == 0."""
        raise NotImplementedError

    def initial(self, x):
        """u(x, 0)."""
        return 0.0

    def residual(self, u_fn, memory, kappa, xi):
        """lambda_1 u_t + lambda_alpha C - N[u] - kappa M - S.

        ``memory`` is the memory-field value at xi. For fractional problems it
        stands in for the Caputo derivative C and there is no separate M term.
        """
        ut, local = self.time_and_local(u_fn, xi)
        r = -local - self.source(xi)
        if ut is not None:
            r = r + self.lambda_1 * ut
        if self.fractional:
            r = r + self.lambda_alpha * memory
        else:
            r = r - kappa * memory
        return r

    def self_check(self, n: int = 1000, seed: int = 0) -> float:
        """Max |residual| of the closed forms at n random interior points."""
        rng = np.random.default_rng(seed)
        lo, hi = np.asarray(self.lower), np.asarray(self.upper)
        pts = jnp.asarray(lo + (hi - lo) * rng.uniform(0.01, 1.0, (n, self.dim)))
        res = jax.jit(
            jax.vmap(lambda xi: self.residual(self.exact_u, self.exact_memory(xi), self.kappa, xi))
        )(pts)
        return float(jnp.max(jnp.abs(res)))


@dataclass(frozen=True)
class VolterraProblem(ProblemSpec):
    """u' + u = kappa * int_0^t exp(tau - t) u(tau) dtau, u(0) = 1."""

    name: str = "exp1"
    lower: tuple[float, ...] = (0.0,)
    upper: tuple[float, ...] = (1.0,)
    reconstruction: str = "volterra1d"

    def exact_u(self, xi):
        t = xi[0]
        return jnp.exp(-t) * jnp.cosh(jnp.sqrt(self.kappa) * t)

    def exact_memory(self, xi):
        t = xi[0]
        s = jnp.sqrt(self.kappa)
        return jnp.exp(-t) * jnp.sinh(s * t) / s

    def source(self, xi):
        return jnp.zeros((), dtype=xi.dtype)

    def time_and_local(self, u_fn, xi):
        u, g = value_and_grad_fwd(u_fn, xi)
        return g[0], -u

    def residual(self, u_fn, memory, kappa, xi):
        u, ut = jax.jvp(u_fn, (xi,), (jnp.ones_like(xi),))
        return ut + u - kappa * memory

    def kernel(self, tau, t):
        return jnp.exp(tau - t)

    def initial(self, x):
        return 1.0


@dataclass(frozen=True)
class Nested3dProblem(ProblemSpec):
    """(d_t + d_x1 + d_x2) u = u + int int int exp(tau - t) u + f on [0,1]^3."""

    name: str = "exp2"
    lower: tuple[float, ...] = (0.0, 0.0, 0.0)
    upper: tuple[float, ...] = (1.0, 1.0, 1.0)
    reconstruction: str = "nested3d"

    def exact_u(self, xi):
        x1, x2, t = xi[0], xi[1], xi[2]
        return t * jnp.sin(x1) * jnp.cos(x2)

    def exact_memory(self, xi):
        x1, x2, t = xi[0], xi[1], xi[2]
        return (t - 1.0 + jnp.exp(-t)) * (1.0 - jnp.cos(x1)) * jnp.sin(x2)

    def source(self, xi):
        x1, x2, t = xi[0], xi[1], xi[2]
        s1, c1, s2, c2 = jnp.sin(x1), jnp.cos(x1), jnp.sin(x2), jnp.cos(x2)
        return (
            s1 * c2
            + t * c1 * c2
            - t * s1 * s2
            - t * s1 * c2
            - (t - 1.0 + jnp.exp(-t)) * (1.0 - c1) * s2
        )

    def time_and_local(self, u_fn, xi):
        u, g = value_and_grad_fwd(u_fn, xi)
        return g[2], u - g[0] - g[1]

    def residual(self, u_fn, memory, kappa, xi):
        # the transport operator is one directional derivative along (1, 1, 1)
        u, du = jax.jvp(u_fn, (xi,), (jnp.ones_like(xi),))
        return du - u - kappa * memory - self.source(xi)

    def kernel(self, tau, t):
        return jnp.exp(tau - t)


@dataclass(frozen=True)
class FractionalDiffusionProblem(ProblemSpec):
    """D_t^alpha u = u_xx + S on (0,1)^2 with zero boundary/initial data."""

    name: str = "exp3"
    lower: tuple[float, ...] = (0.0, 0.0)
    upper: tuple[float, ...] = (1.0, 1.0)
    reconstruction: str = "fractional"
    lambda_1: float = 0.0
    lambda_alpha: float = 1.0
    alpha: float | None = 0.5

    def exact_u(self, xi):
        x, t = xi[0], xi[1]
        return t**3 * jnp.sin(jnp.pi * x)

    def exact_memory(self, xi):
        x, t = xi[0], xi[1]
        a = self.alpha
        return 6.0 * t ** (3.0 - a) / gamma(4.0 - a) * jnp.sin(jnp.pi * x)

    def source(self, xi):
        x, t = xi[0], xi[1]
        a = self.alpha
        return (6.0 * t ** (3.0 - a) / gamma(4.0 - a) + jnp.pi**2 * t**3) * jnp.sin(jnp.pi * x)

    def time_and_local(self, u_fn, xi):
        return None, diffkit.partial(u_fn, (2, 0))(xi)


def make_problem(experiment: str, kappa: float = 1.0, alpha: float = 0.5, length: float = 1.0):
    if experiment in ("exp1-forward", "exp1-inverse", "exp1"):
        return VolterraProblem(upper=(float(length),), kappa=kappa)
    if experiment == "exp2":
        return Nested3dProblem()
    if experiment == "exp3":
        return FractionalDiffusionProblem(alpha=alpha)
    raise ValueError(f"unknown experiment {experiment!r}")
