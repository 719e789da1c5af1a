import jax.numpy as jnp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from minpo import diffkit
from minpo.diffkit import DerivativeOrderError, NonFiniteError


def central(f, x, i, h=1e-5):
    e = np.zeros_like(x)
    e[i] = h
    return (diffkit.evaluate(f, x + e) - diffkit.evaluate(f, x - e)) / (2 * h)


def test_cubic_third_derivative():
    assert diffkit.input_derivative(lambda x: x[0] ** 3, [0.3], (3,)) == pytest.approx(6.0)


def test_mixed_partial_of_product():
    f = lambda x: x[0] ** 2 * diffkit.sin(x[1])
    d = diffkit.input_derivative(f, [0.7, 0.4], (1, 1))
    assert d == pytest.approx(2 * 0.7 * np.cos(0.4), rel=1e-14)


def test_order_limit():
    with pytest.raises(DerivativeOrderError):
        diffkit.partial(lambda x: x[0], (5,))
    with pytest.raises(DerivativeOrderError):
        diffkit.directions((1, -1))
    assert diffkit.directions((1, 0, 2)) == [0, 2, 2]


def test_arity_mismatch():
    with pytest.raises(ValueError):
        diffkit.input_derivative(lambda x: x[0], [0.1, 0.2], (1,))


def test_param_gradient_examples():
    g = diffkit.param_gradient(lambda p: jnp.sum(p**2), jnp.array([1.0, -2.0]))
    np.testing.assert_array_equal(g, [2.0, -4.0])
    g = diffkit.param_gradient(lambda p: p[0] * p[1], jnp.array([3.0, 5.0]))
    np.testing.assert_array_equal(g, [5.0, 3.0])


def test_param_gradient_reports_bad_node():
    params = {"a": jnp.array([1.0, 0.0]), "b": jnp.array(2.0)}
    with pytest.raises(NonFiniteError) as err:
        diffkit.param_gradient(lambda p: jnp.sum(jnp.sqrt(p["a"])) + p["b"], params)
    assert "'a'" in err.value.node and "[1]" in err.value.node
    with pytest.raises(NonFiniteError) as err:
        diffkit.param_gradient(lambda p: jnp.log(p["a"][1]), params)
    assert err.value.node == "loss"


def test_mlp_param_gradient_matches_finite_differences():
    rng = np.random.default_rng(1)
    w1, w2 = rng.normal(size=(3, 5)), rng.normal(size=(5, 1))
    x = rng.normal(size=(7, 3))
    flat, unravel = diffkit.flatten([jnp.asarray(w1), jnp.asarray(w2)])

    def loss(theta):
        a, b = unravel(theta)
        return jnp.mean((diffkit.tanh(x @ a) @ b) ** 2)

    g = diffkit.param_gradient(loss, jnp.asarray(flat))
    h = 1e-5
    fd = np.array([(loss(flat + h * e) - loss(flat - h * e)) / (2 * h) for e in np.eye(flat.size)])
    assert np.max(np.abs(g - fd)) / np.max(np.abs(fd)) <= 1e-5


def test_fast_tanh_matches_library():
    x = np.linspace(-40.0, 40.0, 20001)
    np.testing.assert_allclose(np.asarray(diffkit.tanh(jnp.asarray(x))), np.tanh(x), rtol=0, atol=3e-16)
    for k in range(1, 5):
        a = diffkit.input_derivative(lambda v: diffkit.tanh(v[0]), [0.37], (k,))
        b = diffkit.input_derivative(lambda v: jnp.tanh(v[0]), [0.37], (k,))
        assert a == pytest.approx(b, rel=1e-13, abs=1e-14)


PRIMS = [diffkit.exp, diffkit.sin, diffkit.cos, diffkit.cosh, diffkit.sinh, diffkit.tanh]


def composition(idx):
    def f(x):
        v = x[0] * 0.7 + 0.3 * x[1]
        for k, i in enumerate(idx):
            v = PRIMS[i](v) * (0.5 + 0.1 * k) + x[k % 2] * v
        return v

    return f


@given(
    st.lists(st.integers(0, len(PRIMS) - 1), min_size=1, max_size=6),
    st.floats(-1.0, 1.0),
    st.floats(-1.0, 1.0),
)
def test_first_derivatives_match_central_differences(idx, a, b):
    f = composition(idx)
    x = np.array([a, b])
    for i in range(2):
        ad = diffkit.input_derivative(f, x, (1, 0) if i == 0 else (0, 1))
        fd = central(f, x, i)
        assert abs(ad - fd) <= 1e-5 * max(1.0, abs(fd))


@given(st.lists(st.integers(0, len(PRIMS) - 1), min_size=1, max_size=4), st.floats(-0.8, 0.8))
def test_higher_derivatives_match_iterated_differences(idx, a):
    f = composition(idx)
    x = np.array([a, 0.2])
    h = 1e-4
    for k in (2, 3):
        lower = diffkit.partial(f, (k - 1, 0))
        fd = (lower(jnp.array([a + h, 0.2])) - lower(jnp.array([a - h, 0.2]))) / (2 * h)
        ad = diffkit.input_derivative(f, x, (k, 0))
        assert abs(ad - float(fd)) <= 1e-3 * max(1.0, abs(float(fd)))


@given(st.floats(-2.0, 2.0), st.floats(-2.0, 2.0))
def test_gradient_linearity(a, b):
    p = jnp.array([a, b])
    f = lambda q: diffkit.sin(q[0]) * q[1]
    g = lambda q: q[0] ** 2 + diffkit.exp(q[1])
    lhs = diffkit.param_gradient(lambda q: f(q) + g(q), p)
    rhs = diffkit.param_gradient(f, p) + diffkit.param_gradient(g, p)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-15, atol=1e-15)


@given(st.floats(-1.0, 1.0), st.floats(-1.0, 1.0))
def test_forward_and_reverse_agree(a, b):
    f = composition([0, 5, 2])
    x = jnp.array([a, b])
    rev = diffkit.param_gradient(f, x)
    fwd = [diffkit.input_derivative(f, x, m) for m in ((1, 0), (0, 1))]
    np.testing.assert_allclose(rev, fwd, rtol=1e-12, atol=1e-14)
