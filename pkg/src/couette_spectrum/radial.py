"""Chebyshev collocation grid on the annulus, with quadrature and bordered solves.

Nodes are Chebyshev-Gauss-Lobatto points mapped to [r_i, r_o] (ascending),
first/second derivative operators are the standard dense collocation matrices,
and quadrature weights are Clenshaw-Curtis (exact for polynomials of degree
<= n_points - 1).
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, SingularSolveError


@dataclass(frozen=True)
class RadialGrid:
    n_points: int
    nodes: np.ndarray        # ascending, nodes[0] = r_i, nodes[-1] = r_o
    d1: np.ndarray           # first-derivative operator
    d2: np.ndarray           # second-derivative operator
    quad_weights: np.ndarray  # sum(w * f(nodes)) ~ int f dr

    @property
    def r_i(self) -> float:
        return float(self.nodes[0])

    @property
    def r_o(self) -> float:
        return float(self.nodes[-1])

    def integrate(self, f) -> float:
        return float(self.quad_weights @ np.asarray(f))

    def inner_r(self, f, g):
        """Radially weighted inner product int r f g dr."""
        return (self.quad_weights * self.nodes) @ (np.asarray(f) * np.asarray(g))


def _cheb_diff_matrix(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes (descending on [-1,1]) and differentiation matrix."""
    j = np.arange(n)
    x = np.cos(np.pi * j / (n - 1))
    c = np.ones(n)
    c[0] = 2.0
    c[-1] = 2.0
    c *= (-1.0) ** j
    X = np.tile(x, (n, 1)).T
    dX = X - X.T
    D = np.outer(c, 1.0 / c) / (dX + np.eye(n))
    # negative-sum trick for the diagonal
    D -= np.diag(D.sum(axis=1))
    return x, D

def _clenshaw_curtis_weights(n: int) -> np.ndarray:
    """Clenshaw-Curtis weights for n Lobatto nodes on [-1, 1] (node-descending order)."""
    m = n - 1
    w = np.zeros(n)
    theta = np.pi * np.arange(n) / m
    for j in range(n):
        s = 0.0
        for i in range(1, m // 2 + 1):
            b = 1.0 if 2 * i == m else 2.0
            s += b / (4.0 * i**2 - 1.0) * np.cos(2.0 * i * theta[j])
        cj = 1.0 if j in (0, m) else 2.0
        w[j] = cj / m * (1.0 - s)
    return w


def build_grid(n_points: int, r_i: float, r_o: float) -> RadialGrid:
    """Collocation grid on [r_i, r_o] with wall-clustered nodes."""
    if n_points < 16:
        raise ConfigError(f"n_points must be at least 16, got {n_points}")
    if not r_o > r_i:
        raise ConfigError("require r_o > r_i")
    x, D = _cheb_diff_matrix(n_points)
    w = _clenshaw_curtis_weights(n_points)
    half = 0.5 * (r_o - r_i)
    nodes = r_i + half * (x[::-1] + 1.0)
    d1 = D[::-1, ::-1] / half
    quad = w[::-1] * half
    return RadialGrid(n_points=n_points, nodes=nodes, d1=d1, d2=d1 @ d1,
                      quad_weights=quad)


def solve_bordered(matrix, rhs, border_col=None, border_row=None, context="",
                   residual_tol=1e-9):
    """Solve matrix @ x = rhs, optionally with one bordering constraint.

    With a border, the augmented system
        [[matrix, border_col], [border_row^T, 0]] @ [x, lam] = [rhs, 0]
    pins the null-space component of a singular operator; border_col must have
    a nonzero component against the left null vector and border_row against
    the right null vector.

    Raises SingularSolveError (tagged with `context`) if the solve fails or
    the relative residual of the un-bordered rows exceeds `residual_tol`.
    """
    matrix = np.asarray(matrix, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    n = matrix.shape[0]
    if border_col is not None or border_row is not None:
        if border_col is None or border_row is None:
            raise ConfigError("border_col and border_row must be given together")
        aug = np.zeros((n + 1, n + 1))
        aug[:n, :n] = matrix
        aug[:n, n] = border_col
        aug[n, :n] = border_row
        b = np.concatenate([rhs, [0.0]])
        try:
            sol = np.linalg.solve(aug, b)
        except np.linalg.LinAlgError as exc:
            raise SingularSolveError(f"bordered solve failed ({context}): {exc}") from exc
        x, lam = sol[:n], sol[n]
        resid = matrix @ x + lam * np.asarray(border_col) - rhs
    else:
        try:
            x = np.linalg.solve(matrix, rhs)
        except np.linalg.LinAlgError as exc:
            raise SingularSolveError(
                f"singular system without border constraint ({context}): {exc}"
            ) from exc
        resid = matrix @ x - rhs
    scale = np.linalg.norm(rhs) + np.linalg.norm(matrix, ord=np.inf) * np.linalg.norm(x)
    if scale > 0 and np.linalg.norm(resid) > residual_tol * scale:
        raise SingularSolveError(
            f"solve residual {np.linalg.norm(resid):.3e} exceeds tolerance ({context})"
        )
    return x
