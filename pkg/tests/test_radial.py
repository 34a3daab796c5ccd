import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from couette_spectrum import ConfigError, SingularSolveError, build_grid, solve_bordered


@pytest.fixture(scope="module")
def grid():
    return build_grid(48, 1.0, 2.0)


def test_derivative_of_constant(grid):
    assert np.abs(grid.d1 @ np.ones(grid.n_points)).max() < 1e-10


def test_derivative_of_nodes(grid):
    assert np.abs(grid.d1 @ grid.nodes - 1.0).max() < 1e-10


def test_second_derivative_of_square(grid):
    assert np.abs(grid.d2 @ grid.nodes**2 - 2.0).max() < 1e-8


def test_quadrature_of_r(grid):
    assert grid.integrate(grid.nodes) == pytest.approx(1.5, abs=1e-12)


def test_quadrature_polynomial_exactness(grid):
    # Clenshaw-Curtis with n nodes integrates degree <= n-1 exactly;
    # check a moderate-degree polynomial against its antiderivative.
    coeffs = np.array([0.3, -1.2, 0.7, 2.0, -0.5, 0.1, 0.9, -0.2, 0.05, 0.4, -0.03])
    p = np.polynomial.Polynomial(coeffs)
    exact = p.integ()(2.0) - p.integ()(1.0)
    assert grid.integrate(p(grid.nodes)) == pytest.approx(exact, abs=1e-12)


def test_refinement_invariance():
    g1 = build_grid(48, 1.0, 2.0)
    g2 = build_grid(96, 1.0, 2.0)
    f = lambda r: np.sin(3.0 * r) * np.exp(-r)
    i1 = g1.inner_r(f(g1.nodes), f(g1.nodes))
    i2 = g2.inner_r(f(g2.nodes), f(g2.nodes))
    assert abs(i1 - i2) < 1e-10 * abs(i2)


def test_too_few_points():
    with pytest.raises(ConfigError):
        build_grid(8, 1.0, 2.0)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_operator_linearity(seed):
    g = build_grid(32, 1.0, 2.0)
    rng = np.random.default_rng(seed)
    f = rng.standard_normal(g.n_points)
    h = rng.standard_normal(g.n_points)
    a, b = rng.standard_normal(2)
    lhs = g.d1 @ (a * f + b * h)
    rhs = a * (g.d1 @ f) + b * (g.d1 @ h)
    assert np.abs(lhs - rhs).max() < 1e-10 * (1 + np.abs(rhs).max())


def test_manufactured_solution(grid):
    # solve (D^2 + D/r - k^2) f = rhs with f = sin(pi (r-1)), Dirichlet walls
    r = grid.nodes
    k = 2.0
    f_exact = np.sin(np.pi * (r - 1.0))
    rhs = (-np.pi**2 * np.sin(np.pi * (r - 1.0))
           + np.pi * np.cos(np.pi * (r - 1.0)) / r - k**2 * f_exact)
    L = grid.d2 + np.diag(1.0 / r) @ grid.d1 - k**2 * np.eye(grid.n_points)
    L[0, :] = 0.0
    L[0, 0] = 1.0
    L[-1, :] = 0.0
    L[-1, -1] = 1.0
    rhs[0] = rhs[-1] = 0.0
    sol = solve_bordered(L, rhs, context="manufactured")
    assert np.abs(sol - f_exact).max() < 1e-8


def test_identity_solve(grid):
    rng = np.random.default_rng(0)
    f = rng.standard_normal(grid.n_points)
    sol = solve_bordered(np.eye(grid.n_points), f)
    assert np.abs(sol - f).max() < 1e-12


def test_bordered_rank_deficient():
    # symmetric rank-deficient matrix with known null vector
    rng = np.random.default_rng(3)
    n = 20
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    null = q[:, 0]
    vals = np.concatenate([[0.0], rng.uniform(1.0, 2.0, n - 1)])
    M = q @ np.diag(vals) @ q.T
    rhs = M @ rng.standard_normal(n)  # in range(M) by construction
    sol = solve_bordered(M, rhs, border_col=null, border_row=null,
                         context="rank-deficient test")
    assert abs(null @ sol) < 1e-10
    assert np.abs(M @ sol - rhs).max() < 1e-9


def test_singular_without_border():
    n = 12
    M = np.zeros((n, n))
    M[0, 0] = 1.0  # rank 1
    with pytest.raises(SingularSolveError):
        solve_bordered(M, np.ones(n), context="singular test")
