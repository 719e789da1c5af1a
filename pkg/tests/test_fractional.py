from math import gamma

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from minpo.fractional import (
    caputo_l1,
    l1_coefficients,
    l1_matrix,
    lemma1_check,
    rl_integral_discrete,
    rl_matrix,
)


def grid(n):
    return np.linspace(0.0, 1.0, n + 1)


def test_coefficient_examples():
    for a in (0.1, 0.5, 0.9):
        assert l1_coefficients(a, 3)[0] == 1.0
    assert l1_coefficients(0.5, 2)[1] == pytest.approx(np.sqrt(2) - 1, abs=1e-15)
    assert l1_coefficients(0.999, 2)[1] <= 7e-4


@given(st.floats(0.01, 0.99), st.integers(2, 200))
def test_coefficients_positive_decreasing_telescoping(alpha, n):
    c = l1_coefficients(alpha, n + 1)
    assert np.all(c > 0) and np.all(np.diff(c) < 0)
    assert np.sum(c[:-1] - c[1:]) == pytest.approx(1.0 - c[-1], abs=1e-14)


@pytest.mark.parametrize("alpha", [0.0, 1.0, -0.2, 1.5])
def test_order_outside_unit_interval(alpha):
    with pytest.raises(ValueError):
        l1_coefficients(alpha, 4)
    with pytest.raises(ValueError):
        rl_integral_discrete(np.ones(3), alpha, 0.5, 2)


def test_caputo_examples():
    assert caputo_l1(np.full(11, 3.2), 0.5, 0.1, 10) == 0.0
    n = 320
    assert abs(caputo_l1(grid(n), 0.5, 1 / n, n) - 2 / np.sqrt(np.pi)) <= 5e-3
    u = [0.0, 0.3]
    assert caputo_l1(u, 0.4, 0.2, 1) == pytest.approx(0.3 * 0.2**-0.4 / gamma(1.6), rel=1e-15)
    with pytest.raises(ValueError):
        caputo_l1(u, 0.5, 0.1, 0)


def test_caputo_cubic_converges():
    exact = 6 / gamma(3.5)
    assert exact == pytest.approx(1.805407, abs=1e-6)
    errs = [abs(caputo_l1(grid(n) ** 3, 0.5, 1 / n, n) - exact) for n in (40, 80, 160, 320)]
    assert all(b < a for a, b in zip(errs, errs[1:]))


@given(st.floats(0.05, 0.95), st.integers(1, 30), st.floats(-2, 2))
def test_caputo_linear(alpha, n, c):
    rng = np.random.default_rng(n)
    u, v = rng.normal(size=n + 1), rng.normal(size=n + 1)
    lhs = caputo_l1(u + c * v, alpha, 0.1, n)
    rhs = caputo_l1(u, alpha, 0.1, n) + c * caputo_l1(v, alpha, 0.1, n)
    assert lhs == pytest.approx(rhs, abs=1e-10)


def test_matrix_rows_match_pointwise():
    u = np.random.default_rng(0).normal(size=9)
    D = l1_matrix(0.3, 8, 0.125)
    assert np.all(D[0] == 0)
    for n in range(1, 9):
        assert D[n] @ u == pytest.approx(caputo_l1(u, 0.3, 0.125, n), abs=1e-12)
    R = rl_matrix(0.3, 8, 0.125)
    for n in range(9):
        assert R[n] @ u == pytest.approx(rl_integral_discrete(u, 0.3, 0.125, n), abs=1e-12)


def test_rl_examples():
    n = 160
    assert rl_integral_discrete(np.zeros(n + 1), 0.5, 1 / n, n) == 0.0
    assert abs(rl_integral_discrete(np.ones(n + 1), 0.5, 1 / n, n) - 1 / gamma(1.5)) <= 1e-3
    assert abs(rl_integral_discrete(grid(n), 0.5, 1 / n, n) - 1 / gamma(2.5)) <= 1e-3
    # piecewise-linear data are integrated exactly
    assert rl_integral_discrete(grid(7), 0.3, 1 / 7, 7) == pytest.approx(1 / gamma(2.3), abs=1e-13)


def test_lemma_examples():
    assert lemma1_check(lambda t: 2.0 + 0 * t, 0.5, 40) == 0.0
    assert lemma1_check(lambda t: t**3, 0.5, 160) <= 5e-3
    res = [lemma1_check(lambda t: t, 0.3, n) for n in (40, 80, 160, 320)]
    assert all(b < a for a, b in zip(res, res[1:]))
