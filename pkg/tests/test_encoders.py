import jax.numpy as jnp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from minpo import diffkit
from minpo.encoders import (
    CkanConfig,
    Encoder,
    HardConstraint,
    InputScaler,
    MlpConfig,
    apply_hard_constraint,
    chebyshev_basis,
    ckan_forward,
    load_checkpoint,
    mlp_forward,
    save_checkpoint,
)


@pytest.mark.parametrize(
    "x, k, expected",
    [(1.0, 3, [1, 1, 1, 1]), (0.0, 4, [1, 0, -1, 0, 1]), (0.5, 3, [1, 0.5, -0.5, -1])],
)
def test_chebyshev_values(x, k, expected):
    np.testing.assert_allclose(chebyshev_basis(x, k), expected, atol=1e-15)


@given(st.floats(0.0, np.pi))
def test_chebyshev_is_cosine(theta):
    np.testing.assert_allclose(chebyshev_basis(np.cos(theta), 10), np.cos(np.arange(11) * theta), atol=1e-12)


def test_chebyshev_clamps():
    np.testing.assert_allclose(chebyshev_basis(1.0 + 1e-13, 3), [1, 1, 1, 1])


def test_ckan_zero_and_identity():
    cfg = CkanConfig((1, 1), 3)
    assert float(ckan_forward(cfg, [jnp.zeros((1, 1, 4))], jnp.array([0.4]))[0]) == 0.0
    coeff = jnp.zeros((1, 1, 4)).at[0, 0, 1].set(1.0)
    assert float(ckan_forward(cfg, [coeff], jnp.array([0.4]))[0]) == pytest.approx(np.tanh(0.4), rel=1e-15)


def test_mlp_constant_and_identity():
    cfg = MlpConfig((1, 1, 1))
    out = mlp_forward(cfg, [(jnp.zeros((1, 1)), jnp.zeros(1)), (jnp.zeros((1, 1)), jnp.array([2.5]))], jnp.array([0.3]))
    assert float(out[0]) == 2.5
    eye = (jnp.ones((1, 1)), jnp.zeros(1))
    assert float(mlp_forward(cfg, [eye, eye], jnp.array([0.3]))[0]) == pytest.approx(np.tanh(0.3), rel=1e-15)


def test_hard_constraint_examples():
    hc = HardConstraint((0, 1, 2))
    one = lambda xi: 1.0
    assert float(apply_hard_constraint(hc, one)(jnp.array([0.5, 0.5, 0.5]))) == 0.125
    assert float(apply_hard_constraint(hc, one)(jnp.array([0.0, 0.3, 0.9]))) == 0.0
    assert apply_hard_constraint(None, one) is one


def test_constrained_field_vanishes_on_planes():
    enc = Encoder(CkanConfig((3, 10, 10, 1), 3), InputScaler((0, 0, 0), (1, 1, 1)), HardConstraint((0, 1, 2)))
    params = enc.init(np.random.default_rng(0))
    rng = np.random.default_rng(1)
    for d in range(3):
        p = rng.uniform(0, 1, (50, 3))
        p[:, d] = 0.0
        vals = [float(enc.scalar(params)(jnp.asarray(q))) for q in p]
        assert all(v == 0.0 for v in vals)


@given(st.lists(st.floats(-3.0, 7.0), min_size=2, max_size=2))
def test_scaler_round_trip(x):
    s = InputScaler((-3.0, 0.0), (5.0, 7.0))
    x = jnp.asarray(x)
    np.testing.assert_allclose(s.unscale(s.scale(x)), x, atol=1e-14)


def test_scaler_endpoints():
    s = InputScaler((0.0, 0.0), (1.0, 2.0))
    np.testing.assert_array_equal(s.scale(jnp.array([0.0, 0.0])), [-1, -1])
    np.testing.assert_array_equal(s.scale(jnp.array([1.0, 2.0])), [1, 1])
    with pytest.raises(ValueError):
        InputScaler((1.0,), (1.0,))


@pytest.mark.parametrize("widths, k", [((1, 15, 15, 15, 1), 4), ((3, 10, 10, 10, 1), 3), ((2, 4, 4), 1)])
def test_ckan_param_count(widths, k):
    enc = Encoder(CkanConfig(widths, k))
    n = sum(p.size for p in enc.init(np.random.default_rng(0)))
    assert n == enc.param_count == sum(widths[i] * widths[i + 1] * (k + 1) for i in range(len(widths) - 1))


@pytest.mark.parametrize("widths", [(1, 33, 33, 33, 1), (3, 21, 21, 21, 4)])
def test_mlp_param_count(widths):
    enc = Encoder(MlpConfig(widths))
    params = enc.init(np.random.default_rng(0))
    assert sum(w.size + b.size for w, b in params) == enc.param_count


def test_config_validation():
    with pytest.raises(ValueError):
        MlpConfig((1, 1))
    with pytest.raises(ValueError):
        CkanConfig((1, 5, 1), 0)


def test_intermediate_basis_arguments_stay_in_range():
    cfg = CkanConfig((2, 6, 6, 1), 4)
    rng = np.random.default_rng(2)
    params = [jnp.asarray(rng.normal(size=(a, b, 5)) * 3) for a, b in ((2, 6), (6, 6), (6, 1))]
    h = diffkit.tanh(jnp.array([0.9, -0.9]))
    for coeff in params[:-1]:
        assert float(jnp.max(jnp.abs(h))) <= 1.0
        h = diffkit.tanh(jnp.einsum("ik,iok->o", chebyshev_basis(h, 4), coeff))


def test_checkpoint_round_trip(tmp_path):
    enc = Encoder(CkanConfig((3, 4, 1), 2), InputScaler((0, 0, 0), (1, 1, 1)), HardConstraint((0, 1, 2)), "memory")
    params = {"memory": enc.init(np.random.default_rng(3)), "kappa": jnp.asarray(0.123456789012345678)}
    save_checkpoint(tmp_path / "ck.json", "minpo-kan", {"memory": enc}, params, {"note": "x"})
    record, restored = load_checkpoint(tmp_path / "ck.json", params)
    assert record["module"] == "minpo-kan" and record["encoders"]["memory"] == enc
    a, _ = diffkit.flatten(params)
    b, _ = diffkit.flatten(restored)
    np.testing.assert_array_equal(a, b)
