import numpy as np
import pytest

from minpo.fd import (
    Grid3,
    NotConverged,
    fd_memory_eval,
    interpolate_trilinear,
    memory_array,
    memory_operators,
    picard_jacobi_solve,
)


def exact_u(p):
    return p[..., 2] * np.sin(p[..., 0]) * np.cos(p[..., 1])


def exact_m(p):
    x1, x2, t = p[..., 0], p[..., 1], p[..., 2]
    return (t - 1 + np.exp(-t)) * (1 - np.cos(x1)) * np.sin(x2)


def source(p):
    x1, x2, t = p[..., 0], p[..., 1], p[..., 2]
    s1, c1, s2, c2 = np.sin(x1), np.cos(x1), np.sin(x2), np.cos(x2)
    return s1 * c2 + t * c1 * c2 - t * s1 * s2 - t * s1 * c2 - (t - 1 + np.exp(-t)) * (1 - c1) * s2


def rel(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


@pytest.fixture(scope="module")
def solutions():
    out = {}
    for scheme in ("forward", "upwind"):
        for nx in (10, 15, 20, 25):
            out[scheme, nx] = picard_jacobi_solve(Grid3(nx), scheme, 20, source, exact_u)
    return out


def test_zero_solution():
    zero = lambda p: np.zeros(p.shape[:-1])
    sol = picard_jacobi_solve(Grid3(8), "upwind", 5, zero, zero, tol=1e-12)
    assert np.max(np.abs(sol.u)) <= 1e-12


def test_memory_eval_trivial_cases():
    g = Grid3(6)
    assert fd_memory_eval(g, np.zeros((6, 6, 6)), (0.7, 0.3, 0.9), 4) == 0.0
    u = np.random.default_rng(0).normal(size=(6, 6, 6))
    for node in [(0.0, 0.5, 0.5), (0.5, 0.0, 0.5), (0.5, 0.5, 0.0)]:
        assert fd_memory_eval(g, u, node, 4) == 0.0


def test_corner_memory():
    g = Grid3(25)
    val = fd_memory_eval(g, exact_u(g.nodes()), (1.0, 1.0, 1.0), 20)
    assert abs(val - np.exp(-1) * (1 - np.cos(1)) * np.sin(1)) <= 5e-3
    assert abs(val - 0.142055) <= 5e-3


def test_separable_operator_matches_pointwise_oracle():
    g = Grid3(6)
    u = np.random.default_rng(1).normal(size=(6, 6, 6))
    M = memory_array(u, *memory_operators(g, 3))
    nodes = g.nodes()
    for idx in [(1, 2, 3), (5, 5, 5), (4, 1, 2)]:
        assert M[idx] == pytest.approx(fd_memory_eval(g, u, nodes[idx], 3), abs=1e-13)


def test_trilinear_reproduces_linear_functions():
    g = Grid3(5)
    lin = lambda p: 1 + 2 * p[..., 0] - p[..., 1] + 3 * p[..., 2]
    u = lin(g.nodes())
    p = np.array([0.13, 0.77, 0.41])
    assert interpolate_trilinear(g, u, p) == pytest.approx(float(lin(p)), abs=1e-14)


def test_boundary_values_exact(solutions):
    sol = solutions["upwind", 10]
    mask = sol.grid.dirichlet_mask()
    np.testing.assert_array_equal(sol.u[mask], exact_u(sol.grid.nodes())[mask])


@pytest.mark.parametrize("scheme", ["forward", "upwind"])
def test_refinement_decreases_error(solutions, scheme):
    errs = [rel(solutions[scheme, n].u, exact_u(Grid3(n).nodes())) for n in (10, 15, 20, 25)]
    assert all(b < a for a, b in zip(errs, errs[1:]))


def test_upwind_beats_forward(solutions):
    for n in (10, 15, 20, 25):
        nodes = Grid3(n).nodes()
        assert rel(solutions["upwind", n].u, exact_u(nodes)) <= rel(solutions["forward", n].u, exact_u(nodes))


def test_update_norm_monotone_after_three_sweeps(solutions):
    for sol in solutions.values():
        up = np.asarray(sol.updates)
        assert np.all(np.diff(up[3:]) <= 0)


def test_not_converged_reports_last_update():
    with pytest.raises(NotConverged) as err:
        picard_jacobi_solve(Grid3(10), "upwind", 5, source, exact_u, max_iter=3)
    assert err.value.iterations == 3 and err.value.last_update > 0


def test_bad_arguments():
    with pytest.raises(ValueError):
        picard_jacobi_solve(Grid3(5), "central", 5, source, exact_u)
    with pytest.raises(ValueError):
        picard_jacobi_solve(Grid3(5), "upwind", 5, source, exact_u, tol=0.0)
