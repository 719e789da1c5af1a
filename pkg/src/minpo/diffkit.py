"""Differentiation primitives used throughout the package.

Input derivatives are built by nesting forward-mode products (``jax.jvp``)
along unit coordinate directions; parameter gradients use reverse mode.
Scalar "vars" are plain JAX float64 arrays, so the usual arithmetic and the
``jnp`` elementwise functions re-exported below are the primitive set.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence

import jax
import jax.numpy as jnp
import numpy as np
from jax.flatten_util import ravel_pytree

jax.config.update("jax_enable_x64", True)

# Exp. II differentiates a third-order reconstruction once more in the residual.
MAX_ORDER = 4

Var = jax.Array

exp = jnp.exp
sin = jnp.sin
cos = jnp.cos
cosh = jnp.cosh
sinh = jnp.sinh
power = jnp.power
absolute = jnp.abs  # jvp uses sign(x), so the subgradient at 0 is 0


@jax.custom_jvp
def tanh(x):
    """float64 tanh through a single exp.

    XLA's CPU float64 tanh is scalar libm and dominates training time; this
    form vectorizes. Absolute error stays at rounding level.
    """
    e = jnp.exp(-2.0 * jnp.abs(x))
    return jnp.sign(x) * (1.0 - e) / (1.0 + e)


@tanh.defjvp
def _tanh_jvp(primals, tangents):
    (x,), (dx,) = primals, tangents
    y = tanh(x)
    return y, (1.0 - y * y) * dx


class DerivativeOrderError(ValueError):
    pass


class NonFiniteError(FloatingPointError):
    """Raised when a loss or gradient entry is NaN/inf.

    ``node`` names the offending graph node: ``"loss"`` or the parameter
    leaf path plus flat index within that leaf.
    """

    def __init__(self, node: str, message: str = ""):
        self.node = node
        super().__init__(message or f"non-finite value at node {node}")


def _check_arity(point: jax.Array, arity: int | None) -> None:
    if arity is not None and point.shape[-1] != arity:
        raise ValueError(f"point has dimension {point.shape[-1]}, graph expects {arity}")


def evaluate(f: Callable, point, arity: int | None = None) -> float:
    """Plain value of ``f`` at ``point``."""
    x = jnp.atleast_1d(jnp.asarray(point, dtype=jnp.float64))
    _check_arity(x, arity)
    return float(f(x))


def directions(multi_index: Sequence[int]) -> list[int]:
    """Expand a multi-index like (1, 0, 2) into coordinate list [0, 2, 2]."""
    order = int(sum(multi_index))
    if any(g < 0 for g in multi_index):
        raise DerivativeOrderError(f"negative order in {tuple(multi_index)}")
    if order > MAX_ORDER:
        raise DerivativeOrderError(f"total order {order} exceeds {MAX_ORDER}")
    return [i for i, g in enumerate(multi_index) for _ in range(g)]


def partial(f: Callable, multi_index: Sequence[int]) -> Callable:
    """Return ``xi -> d^|gamma| f / d xi^gamma (xi)`` for scalar ``f(xi)``.

    ``xi`` is a 1-D coordinate vector of length ``len(multi_index)``.
    """
    dims = directions(multi_index)
    n = len(multi_index)

    g = f
    for i in dims:
        g = _directional(g, i, n)
    return g


def _directional(g: Callable, i: int, n: int) -> Callable:
    e = jnp.zeros(n).at[i].set(1.0)

    def dg(xi):
        return jax.jvp(g, (xi,), (e.astype(xi.dtype),))[1]

    return dg


def input_derivative(f: Callable, point, multi_index: Sequence[int]) -> float:
    x = jnp.atleast_1d(jnp.asarray(point, dtype=jnp.float64))
    _check_arity(x, len(multi_index))
    return float(partial(f, multi_index)(x))


def param_gradient(loss_fn: Callable, params) -> np.ndarray:
    """Reverse-mode gradient of scalar ``loss_fn(params)`` as a flat vector.

    The ordering follows ``jax.flatten_util.ravel_pytree(params)``.
    """
    value, grads = jax.value_and_grad(loss_fn)(params)
    check_finite(value, grads)
    flat, _ = ravel_pytree(grads)
    return np.asarray(flat)


def check_finite(value, grads=None) -> None:
    if not np.isfinite(np.asarray(value)).all():
        raise NonFiniteError("loss")
    if grads is None:
        return
    leaves, _ = jax.tree_util.tree_flatten_with_path(grads)
    for path, leaf in leaves:
        arr = np.asarray(leaf).ravel()
        bad = np.flatnonzero(~np.isfinite(arr))
        if bad.size:
            node = f"{jax.tree_util.keystr(path)}[{bad[0]}]"
            raise NonFiniteError(node)


def flatten(params):
    """Flatten a parameter pytree: returns (float64 vector, unravel)."""
    flat, unravel = ravel_pytree(params)
    return np.asarray(flat, dtype=np.float64), unravel
