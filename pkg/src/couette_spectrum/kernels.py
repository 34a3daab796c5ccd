"""Quadratic/cubic interaction kernels and second-order fields.

Everything is computed in the real representation of linear_stability: axial
profiles store -i times the (purely imaginary) physical component, which makes
all forcings, fields and kernels real arrays/scalars.  The bilinear advective
form of the axisymmetric equations, for a Fourier component `a` at wavenumber
alpha advecting a component `b` at wavenumber beta, is

    N1(a, b) = a_u D b_u - beta a_w b_u - a_v b_v / r      (radial)
    N2(a, b) = a_u D b_v - beta a_w b_v + a_u b_v / r      (azimuthal)
    N3(a, b) = a_u D b_w - beta a_w b_w                    (axial, real form)

and the pair forcing is F(k1, k2) = -R * sym over argument order.

Each second-order pair field solves the singular linear operator at the sum
wavenumber (its own leading eigenvalue is subtracted, which is what makes the
solvability projection necessary); uniqueness is pinned by orthogonality to
the adjoint mode of the sum wavenumber.  A direct consequence of that pin is
that the growth-mismatch triad correction b1 vanishes identically up to solver
roundoff; it is still evaluated from its defining expression.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import ConfigError, DependencyError, SingularSolveError
from .flow_config import FlowConfig
from .linear_stability import ModeSet, assemble_pencil, build_mode_set
from .radial import RadialGrid

TABLE_FORMAT_VERSION = 1


@dataclass(frozen=True)
class ForcingProfile:
    """Symmetrized quadratic forcing of a mode pair (real representation).

    f3 stores -i times the physical axial component, so all arrays are real;
    under (k1, k2) -> (-k1, -k2) the stored f1, f2 are unchanged and f3 flips
    sign, which is the real-form statement of conjugation symmetry.
    """

    k1: float
    k2: float
    f1: np.ndarray
    f2: np.ndarray
    f3: np.ndarray


@dataclass(frozen=True)
class SecondOrderField:
    """Pair field at the sum wavenumber k1 + k2 (real representation)."""

    k1: float
    k2: float
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    p: np.ndarray


def _bilinear(r, Dmat, a_u, a_v, a_w, b_u, b_v, b_w, beta):
    """Advective form N(a@alpha, b@beta); beta is the wavenumber of b."""
    Dbu = Dmat @ b_u
    Dbv = Dmat @ b_v
    Dbw = Dmat @ b_w
    n1 = a_u * Dbu - beta * a_w * b_u - a_v * b_v / r
    n2 = a_u * Dbv - beta * a_w * b_v + a_u * b_v / r
    n3 = a_u * Dbw - beta * a_w * b_w
    return n1, n2, n3


def quadratic_forcing(cfg: FlowConfig, grid: RadialGrid, mode1, mode2) -> ForcingProfile:
    """F(k1, k2) = -R * sym{N(mode1@k1, mode2@k2)}, symmetrized over order."""
    if mode1.u.shape != mode2.u.shape or mode1.u.shape[0] != grid.n_points:
        raise ConfigError("modes were computed on different grids")
    r, D, R = grid.nodes, grid.d1, cfg.reynolds
    a1 = _bilinear(r, D, mode1.u, mode1.v, mode1.w, mode2.u, mode2.v, mode2.w, mode2.k)
    a2 = _bilinear(r, D, mode2.u, mode2.v, mode2.w, mode1.u, mode1.v, mode1.w, mode1.k)
    f = [-0.5 * R * (x + y) for x, y in zip(a1, a2)]
    return ForcingProfile(k1=mode1.k, k2=mode2.k, f1=f[0], f2=f[1], f3=f[2])


class KernelBuilder:
    """Mode tables plus lazily computed pair fields and interaction kernels.

    Modes are tabulated on the extended grid |k| <= 2*k_max because pair
    fields live at sum wavenumbers of two on-grid arguments.
    """

    def __init__(self, cfg: FlowConfig, grid: RadialGrid, k_max: float = 12.0,
                 dk: float = 0.25, phase_flip: bool = False):
        self.cfg = cfg
        self.grid = grid
        self.k_max = float(k_max)
        self.dk = float(dk)
        self.n_half = int(round(k_max / dk))
        if abs(self.n_half * dk - k_max) > 1e-9:
            raise ConfigError(f"k_max={k_max} must be a multiple of dk={dk}")
        self.modes: ModeSet = build_mode_set(cfg, grid, 2.0 * k_max, dk)
        if phase_flip:
            # globally flipped phase convention; adjoints flip with the modes
            # so biorthonormality stays +1 (gauge freedom of the tables)
            from dataclasses import replace
            self.modes = replace(
                self.modes, u=-self.modes.u, v=-self.modes.v, w=-self.modes.w,
                p=-self.modes.p, adj_u=-self.modes.adj_u,
                adj_v=-self.modes.adj_v, adj_w=-self.modes.adj_w)
        g = grid
        self._wq = g.quad_weights
        self._r = g.nodes
        # derivative stacks over the extended mode table
        self._Du = (g.d1 @ self.modes.u.T).T
        self._Dv = (g.d1 @ self.modes.v.T).T
        self._Dw = (g.d1 @ self.modes.w.T).T
        self._lu_cache: dict[int, tuple] = {}
        self._pair_cache: dict[tuple[int, int], SecondOrderField] = {}

    # ---- index helpers (state grid: |k| <= k_max; extended: |k| <= 2 k_max)

    def _jindex(self, k: float) -> int:
        j = round(float(k) / self.dk)
        if abs(j * self.dk - k) > 1e-9:
            raise ConfigError(f"wavenumber {k} is not on the dk={self.dk} grid")
        return j

    def k_state(self):
        return np.arange(-self.n_half, self.n_half + 1) * self.dk

    def on_state_grid(self, k: float) -> bool:
        j = round(float(k) / self.dk)
        return abs(j * self.dk - k) <= 1e-9 and abs(j) <= self.n_half

    # ---- scalar kernel entry points

    def forcing(self, k1: float, k2: float) -> ForcingProfile:
        m1 = self.modes.mode(k1)
        m2 = self.modes.mode(k2)
        return quadratic_forcing(self.cfg, self.grid, m1, m2)

    def b0(self, k1: float, k2: float) -> float:
        """Triad kernel: adjoint-weighted radial integral of the pair forcing."""
        kp = k1 + k2
        try:
            adj = self.modes.adjoint(kp)
        except ConfigError as exc:
            raise DependencyError(f"no adjoint at sum wavenumber {kp}") from exc
        f = self.forcing(k1, k2)
        return float(self.grid.integrate(adj.u * f.f1 + adj.v * f.f2 + adj.w * f.f3))

    def second_order_field(self, k1: float, k2: float) -> SecondOrderField:
        key = (self._jindex(k1), self._jindex(k2))
        if key in self._pair_cache:
            return self._pair_cache[key]
        fld = self._solve_pair(k1, k2)
        self._pair_cache[key] = fld
        self._pair_cache[(key[1], key[0])] = SecondOrderField(
            k1=k2, k2=k1, u=fld.u, v=fld.v, w=fld.w, p=fld.p)
        return fld

    def b1(self, k1: float, k2: float) -> float:
        """Growth-mismatch triad correction.

        [a0(k) - a0(k1) - a0(k2)] * <adjoint(k), U2(k1,k2)>; the adjoint pin on
        U2 makes the projection vanish, so this is zero to solver precision.
        """
        kp = k1 + k2
        adj = self.modes.adjoint(kp)
        fld = self.second_order_field(k1, k2)
        eps = self.eps()
        pref = (self.modes.sigma[self.modes.index(kp)]
                - self.modes.sigma[self.modes.index(k1)]
                - self.modes.sigma[self.modes.index(k2)]) / eps
        proj = self.grid.integrate(adj.u * fld.u + adj.v * fld.v + adj.w * fld.w)
        return float(pref * proj)

    def c_raw(self, p: float, q: float, s: float) -> float:
        """Cubic kernel with the single-mode leg at p and the pair at (q, s)."""
        out = p + q + s
        adj = self.modes.adjoint(out)
        fld = self.second_order_field(q, s)
        mode = self.modes.mode(p)
        r, D, R = self._r, self.grid.d1, self.cfg.reynolds
        kp = q + s
        g1a, g2a, g3a = _bilinear(r, D, mode.u, mode.v, mode.w, fld.u, fld.v, fld.w, kp)
        g1b, g2b, g3b = _bilinear(r, D, fld.u, fld.v, fld.w, mode.u, mode.v, mode.w, p)
        g1, g2, g3 = -R * (g1a + g1b), -R * (g2a + g2b), -R * (g3a + g3b)
        return float(self.grid.integrate(adj.u * g1 + adj.v * g2 + adj.w * g3))

    def c(self, k1: float, k2: float, k3: float) -> float:
        """Fully symmetrized cubic kernel c(k1, k2, k3)."""
        if not self.on_state_grid(k1 + k2 + k3):
            raise ConfigError(f"sum wavenumber {k1 + k2 + k3} off the state grid")
        return (self.c_raw(k1, k2, k3) + self.c_raw(k2, k1, k3)
                + self.c_raw(k3, k1, k2)) / 3.0

    def eps(self) -> float:
        """Expansion parameter: largest tabulated growth rate at this Reynolds number."""
        sel = np.abs(self.modes.ks) <= self.k_max + 1e-9
        return float(np.max(self.modes.sigma[sel]))

    # ---- pair-field solve

    def _border_vector(self, kp: float) -> np.ndarray:
        n = self.grid.n_points
        i = self.modes.index(kp)
        by = np.zeros(4 * n)
        by[0:n] = self.modes.adj_u[i] * self._wq
        by[n:2 * n] = self.modes.adj_v[i] * self._wq
        by[2 * n:3 * n] = self.modes.adj_w[i] * self._wq
        return by

    def _pair_lu(self, kp: float):
        key = self.modes.index(kp)
        if key not in self._lu_cache:
            n = self.grid.n_points
            A, B = assemble_pencil(self.cfg, kp, self.grid)
            sigma = self.modes.sigma[key]
            M = A - sigma * B
            by = self._border_vector(kp)
            aug = np.zeros((4 * n + 1, 4 * n + 1))
            aug[:-1, :-1] = M
            aug[:-1, -1] = by
            aug[-1, :-1] = by
            self._lu_cache[key] = (scipy.linalg.lu_factor(aug), by, M)
        return self._lu_cache[key]

    def _solve_pair(self, k1: float, k2: float) -> SecondOrderField:
        kp = k1 + k2
        n = self.grid.n_points
        f = self.forcing(k1, k2)
        b0 = self.b0(k1, k2)
        i = self.modes.index(kp)
        if self._jindex(kp) == 0:
            return self._solve_pair_meanflow(k1, f, b0)
        # rows of the assembled pencil are minus the operator of the
        # solvability derivation, hence RHS = b0*mode - forcing
        rhs = np.zeros(4 * n + 1)
        rhs[0:n] = b0 * self.modes.u[i] - f.f1
        rhs[n:2 * n] = b0 * self.modes.v[i] - f.f2
        rhs[2 * n:3 * n] = b0 * self.modes.w[i] - f.f3
        for blk in range(3):
            rhs[blk * n] = 0.0
            rhs[blk * n + n - 1] = 0.0
        lu, by, M = self._pair_lu(kp)
        sol = scipy.linalg.lu_solve(lu, rhs)
        x, lam = sol[:-1], sol[-1]
        resid = M @ x + lam * by - rhs[:-1]
        scale = max(np.linalg.norm(rhs), 1e-30)
        if np.linalg.norm(resid) > 1e-8 * max(scale, np.linalg.norm(x)):
            raise SingularSolveError(
                f"pair field solve failed at (k1={k1}, k2={k2}): "
                f"residual {np.linalg.norm(resid):.2e}")
        return SecondOrderField(k1=k1, k2=k2, u=x[0:n], v=x[n:2 * n],
                                w=x[2 * n:3 * n], p=x[3 * n:])

    def _solve_pair_meanflow(self, k1: float, f: ForcingProfile, b0: float) -> SecondOrderField:
        """Pair (k, -k): sum wavenumber zero.

        Continuity with wall conditions forces u2 = 0, the axial forcing
        cancels by parity so w2 = 0, and the azimuthal component solves the
        scalar diffusion operator with its leading eigenvalue subtracted
        (bordered by the k = 0 adjoint pin).  The pressure follows from the
        radial balance.
        """
        g = self.grid
        n = g.n_points
        r = g.nodes
        i0 = self.modes.index(0.0)
        sigma0 = self.modes.sigma[i0]
        v0 = self.modes.v[i0]
        av0 = self.modes.adj_v[i0]
        Lv = g.d2 + np.diag(1.0 / r) @ g.d1 - np.diag(1.0 / r**2)
        M = Lv - sigma0 * np.eye(n)
        rhs_v = b0 * v0 - f.f2
        yv = av0 * self._wq
        aug = np.zeros((n + 1, n + 1))
        aug[:n, :n] = M
        for j in (0, n - 1):
            aug[j, :] = 0.0
            aug[j, j] = 1.0
        aug[:n, n] = yv
        aug[n, :n] = yv
        b = np.zeros(n + 1)
        b[1:n - 1] = rhs_v[1:n - 1]
        sol = np.linalg.solve(aug, b)
        v2 = sol[:n]
        # radial balance: D p2 = (2 V / r) v2 + f1 / R, gauge p2(r_i) = 0
        Dp = g.d1.copy()
        rhs_p = 2.0 * self.cfg.base_velocity(r) / r * v2 + f.f1 / self.cfg.reynolds
        Dp[0, :] = 0.0
        Dp[0, 0] = 1.0
        rhs_p[0] = 0.0
        p2 = np.linalg.solve(Dp, rhs_p)
        z = np.zeros(n)
        return SecondOrderField(k1=k1, k2=-k1, u=z, v=v2, w=z.copy(), p=p2)

    # ---- bulk table assembly

    def build_tables(self, progress=None) -> "KernelTables":
        """Dense kernel tables over the state grid.

        Pair fields are solved once per canonical pair (argument exchange and
        global wavenumber negation are exploited); the cubic tensor is filled
        by a leg-vectorized pass and then symmetrized over its arguments.
        """
        nh = self.n_half
        nk = 2 * nh + 1
        n = self.grid.n_points
        ks = self.k_state()
        dk = self.dk
        g = self.grid

        c0 = self.modes.index(0.0)  # extended-grid index of k = 0
        state_rows = [self.modes.index(k) for k in ks]
        sig_state = self.modes.sigma[state_rows]
        eps = float(np.max(sig_state))

        # mode/adjoint slices over the state grid
        mu, mv, mw = self.modes.u[state_rows], self.modes.v[state_rows], self.modes.w[state_rows]
        au, av, aw = (self.modes.adj_u[state_rows], self.modes.adj_v[state_rows],
                      self.modes.adj_w[state_rows])
        Dmu, Dmv, Dmw = self._Du[state_rows], self._Dv[state_rows], self._Dw[state_rows]
        wq = self._wq
        wau, wav, waw = au * wq, av * wq, aw * wq

        # canonical pairs: j1 <= j2 up to global negation
        canon: list[tuple[int, int]] = []
        pair_row: dict[tuple[int, int], tuple[int, float]] = {}
        for j1 in range(-nh, nh + 1):
            for j2 in range(j1, nh + 1):
                neg = (-j2, -j1)
                if (j1, j2) <= neg:
                    pair_row[(j1, j2)] = (len(canon), 1.0)
                    pair_row[(j2, j1)] = (len(canon), 1.0)
                    canon.append((j1, j2))
                else:
                    row, _ = pair_row[neg]
                    pair_row[(j1, j2)] = (row, -1.0)
                    pair_row[(j2, j1)] = (row, -1.0)

        ncp = len(canon)
        pu = np.empty((ncp, n)); pv = np.empty((ncp, n)); pw = np.empty((ncp, n))
        pp = np.empty((ncp, n))
        b0_ext: dict[tuple[int, int], float] = {}
        for row, (j1, j2) in enumerate(canon):
            fld = self.second_order_field(j1 * dk, j2 * dk)
            pu[row], pv[row], pw[row], pp[row] = fld.u, fld.v, fld.w, fld.p
            b0_ext[(j1, j2)] = self.b0(j1 * dk, j2 * dk)
            if progress and row % 200 == 0:
                progress(f"pair fields {row}/{ncp}")

        def pair_arrays(j1, j2):
            row, wsign = pair_row[(j1, j2)]
            return pu[row], pv[row], wsign * pw[row]

        def b0_of(j1, j2):
            if (j1, j2) in b0_ext:
                return b0_ext[(j1, j2)]
            if (j2, j1) in b0_ext:
                return b0_ext[(j2, j1)]
            return b0_ext[tuple(sorted((-j1, -j2)))]

        # triad table on the state grid (zero where the sum leaves the grid)
        b_mat = np.zeros((nk, nk))
        b1_mat = np.zeros((nk, nk))
        for i1 in range(nk):
            for i2 in range(i1, nk):
                j1, j2 = i1 - nh, i2 - nh
                if abs(j1 + j2) > nh:
                    continue
                val = b0_of(j1, j2)
                b_mat[i1, i2] = b_mat[i2, i1] = val
                pref = (sig_state[nh + j1 + j2] - sig_state[i1] - sig_state[i2]) / eps
                row, wsign = pair_row[(j1, j2)]
                ia = nh + j1 + j2
                proj = wq @ (au[ia] * pu[row] + av[ia] * pv[row]
                             + aw[ia] * (wsign * pw[row]))
                b1_mat[i1, i2] = b1_mat[i2, i1] = pref * proj
        b_total = b_mat + eps * b1_mat

        # cubic tensor: craw[p, q, s] = leg p against pair (q, s)
        craw = np.zeros((nk, nk, nk))
        r = self._r
        D = g.d1
        R = self.cfg.reynolds
        ip_all = np.arange(nk)
        for i1 in range(nk):
            for i2 in range(i1, nk):
                j1, j2 = i1 - nh, i2 - nh
                u2, v2, w2 = pair_arrays(j1, j2)
                Du2, Dv2, Dw2 = D @ u2, D @ v2, D @ w2
                kp = (j1 + j2) * dk
                jout = ip_all - nh + j1 + j2
                valid = np.abs(jout) <= nh
                ip = ip_all[valid]
                iout = jout[valid] + nh
                if ip.size == 0:
                    continue
                kl = ks[ip][:, None]
                lu_, lv_, lw_ = mu[ip], mv[ip], mw[ip]
                Dlu, Dlv, Dlw = Dmu[ip], Dmv[ip], Dmw[ip]
                # leg advects pair + pair advects leg
                g1 = lu_ * Du2 - kp * lw_ * u2 - lv_ * v2 / r \
                    + u2 * Dlu - kl * (w2 * lu_) - v2 * lv_ / r
                g2 = lu_ * Dv2 - kp * lw_ * v2 + lu_ * v2 / r \
                    + u2 * Dlv - kl * (w2 * lv_) + u2 * lv_ / r
                g3 = lu_ * Dw2 - kp * lw_ * w2 \
                    + u2 * Dlw - kl * (w2 * lw_)
                vals = -R * (np.einsum("pr,pr->p", wau[iout], g1)
                             + np.einsum("pr,pr->p", wav[iout], g2)
                             + np.einsum("pr,pr->p", waw[iout], g3))
                craw[ip, i1, i2] = vals
                if i2 != i1:
                    craw[ip, i2, i1] = vals
            if progress and i1 % 16 == 0:
                progress(f"cubic kernel rows {i1}/{nk}")

        # average over the three leg choices: [i1,i2,i3] <- craw[i1,i2,i3],
        # craw[i2,i1,i3], craw[i3,i1,i2]
        c_sym = (craw + craw.transpose(1, 0, 2) + craw.transpose(1, 2, 0)) / 3.0

        # wall-derivative tables for the torque formula
        dv1_0_wall = float((g.d1 @ self.modes.v[c0])[0])
        dv2_wall = np.empty(nk)
        for i in range(nk):
            j = i - nh
            _, v2, _ = pair_arrays(j, -j)
            dv2_wall[i] = (g.d1 @ v2)[0]

        pair_index = np.array(canon, dtype=np.int64)
        meta = {
            "format_version": TABLE_FORMAT_VERSION,
            "eta": self.cfg.eta,
            "mu": self.cfg.mu,
            "reynolds": self.cfg.reynolds,
            "n_points": n,
            "k_max": self.k_max,
            "dk": dk,
            "eps": eps,
            "max_mode_residual": self.modes.max_residual,
        }
        return KernelTables(
            k_grid=ks, a=sig_state, b=b_total, b0=b_mat, b1=b1_mat, c=c_sym,
            eps=eps, dv2_wall=dv2_wall, dv1_0_wall=dv1_0_wall,
            mode_u=mu, mode_v=mv, mode_w=mw,
            adj_u=au, adj_v=av, adj_w=aw,
            pair_index=pair_index, pair_u=pu, pair_v=pv, pair_w=pw,
            nodes=g.nodes.copy(), quad_weights=g.quad_weights.copy(), meta=meta)


@dataclass(frozen=True)
class KernelTables:
    """Discretized interaction kernels on the uniform state grid.

    b and c are dense over on-grid argument tuples and zero where the sum
    wavenumber leaves the grid.  Mode/adjoint/pair-field profiles are carried
    along so diagnostics and reconstruction do not re-solve eigenproblems.
    """

    k_grid: np.ndarray
    a: np.ndarray
    b: np.ndarray        # b0 + eps*b1, [nk, nk]
    b0: np.ndarray
    b1: np.ndarray
    c: np.ndarray        # symmetrized, [nk, nk, nk]
    eps: float
    dv2_wall: np.ndarray  # d/dr v2(k, -k) at the inner wall, per state k
    dv1_0_wall: float     # d/dr v1(k=0) at the inner wall
    mode_u: np.ndarray
    mode_v: np.ndarray
    mode_w: np.ndarray
    adj_u: np.ndarray
    adj_v: np.ndarray
    adj_w: np.ndarray
    pair_index: np.ndarray  # canonical (j1, j2) integer pairs
    pair_u: np.ndarray
    pair_v: np.ndarray
    pair_w: np.ndarray
    nodes: np.ndarray
    quad_weights: np.ndarray
    meta: dict
    _pair_row: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        rows = {}
        for row, (j1, j2) in enumerate(map(tuple, self.pair_index)):
            rows[(j1, j2)] = (row, 1.0)
            rows[(j2, j1)] = (row, 1.0)
        for row, (j1, j2) in enumerate(map(tuple, self.pair_index)):
            for key in ((-j1, -j2), (-j2, -j1)):
                if key not in rows:
                    rows[key] = (row, -1.0)
        object.__setattr__(self, "_pair_row", rows)

    @property
    def dk(self) -> float:
        return float(self.k_grid[1] - self.k_grid[0])

    @property
    def n_half(self) -> int:
        return (len(self.k_grid) - 1) // 2

    def index(self, k: float) -> int:
        j = round(float(k) / self.dk)
        if abs(j * self.dk - k) > 1e-9 or abs(j) > self.n_half:
            raise ConfigError(f"wavenumber {k} not on the kernel grid")
        return j + self.n_half

    def b_lookup(self, k1: float, k2: float) -> float:
        return float(self.b[self.index(k1), self.index(k2)])

    def c_lookup(self, k1: float, k2: float, k3: float) -> float:
        if not abs(round((k1 + k2 + k3) / self.dk)) <= self.n_half:
            raise ConfigError(f"sum wavenumber {k1 + k2 + k3} off the kernel grid")
        return float(self.c[self.index(k1), self.index(k2), self.index(k3)])

    def pair_field(self, k1: float, k2: float):
        """(u2, v2, w2) profiles of the second-order field at (k1, k2)."""
        j1 = round(float(k1) / self.dk)
        j2 = round(float(k2) / self.dk)
        key = (j1, j2)
        if key not in self._pair_row:
            raise DependencyError(f"pair field ({k1}, {k2}) not tabulated")
        row, wsign = self._pair_row[key]
        return self.pair_u[row], self.pair_v[row], wsign * self.pair_w[row]


def assemble_tables(cfg: FlowConfig, grid: RadialGrid, k_max: float = 12.0,
                    dk: float = 0.25, progress=None,
                    phase_flip: bool = False) -> KernelTables:
    """Build all kernel tables for one flow configuration."""
    return KernelBuilder(cfg, grid, k_max=k_max, dk=dk,
                         phase_flip=phase_flip).build_tables(progress=progress)
