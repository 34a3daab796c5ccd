"""Linearized disturbance equations: leading eigenmodes, adjoints, growth curves.

The axisymmetric disturbance (u', v', w') ~ (u, v, w)(r) e^{ikz} obeys, in gap
units, the primitive-variable system

    D u + u/r + i k w_tilde = 0
    sigma u = [L - 1/r^2] u + (2 R V / r) v - R D P
    sigma v = [L - 1/r^2] v - R (DV + V/r) u
    sigma w_tilde = L w_tilde - i k R P

with L = D^2 + D/r - k^2 and no-slip walls.  For the non-oscillatory regime
computed here the leading eigenvalue is real, u and v are real and w_tilde is
purely imaginary.  Internally everything is kept real by storing w = -i
w_tilde, which turns the system into a real generalized eigenproblem; under
k -> -k the stored w changes sign while u, v, sigma are unchanged.

Solvability integrals later use the adjoint in the plain dr measure, so the
adjoint profiles are the left null vector of the assembled pencil divided by
the quadrature weights (zero at the walls).
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    BranchTrackingError,
    ConfigError,
    EigensolverError,
    NumericalError,
    RegimeError,
)
from .flow_config import FlowConfig
from .radial import RadialGrid

_SIGMA_IMAG_RTOL = 1e-8
_OVERLAP_MIN = 0.6


@dataclass(frozen=True)
class EigenMode:
    """Leading eigenmode at one wavenumber.

    `w` stores the imaginary part of the axial profile (w_tilde = 1j * w);
    all stored arrays are real.
    """

    k: float
    sigma: float
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    p: np.ndarray
    residual: float = 0.0
    normalization: str = "int r(|u|^2+|v|^2+|w|^2) dr = 1"
    phase: str = "v mid-gap positive"

    def reflected(self) -> "EigenMode":
        """Mode at -k: w changes sign, everything else is unchanged."""
        return EigenMode(k=-self.k, sigma=self.sigma, u=self.u, v=self.v,
                         w=-self.w, p=self.p, residual=self.residual,
                         normalization=self.normalization, phase=self.phase)


@dataclass(frozen=True)
class AdjointMode:
    """Adjoint (left) eigenmode, normalized against its direct partner.

    Profiles are densities for the unweighted dr measure:
    int [u_adj*u + v_adj*v + w_adj*w] dr = 1 with the stored real arrays.
    `w` stores -i times the (purely imaginary) adjoint axial profile, and `p`
    is the multiplier of the continuity rows.
    """

    k: float
    sigma: float
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    p: np.ndarray

    def reflected(self) -> "AdjointMode":
        return AdjointMode(k=-self.k, sigma=self.sigma, u=self.u, v=self.v,
                           w=-self.w, p=self.p)


def assemble_pencil(cfg: FlowConfig, k: float, grid: RadialGrid):
    """Assemble (A, B) with A x = sigma B x for x = [u, v, w, P].

    Row layout matches the column layout: u-momentum, v-momentum, w-momentum,
    continuity; boundary momentum rows are replaced by Dirichlet conditions.
    Requires k != 0 (the k = 0 problem is handled as a decoupled special case).
    """
    if k == 0.0:
        raise ConfigError("assemble_pencil requires k != 0; use the k=0 branch solver")
    n = grid.n_points
    r = grid.nodes
    D = grid.d1
    R = cfg.reynolds
    V = cfg.base_velocity(r)
    I = np.eye(n)
    L = grid.d2 + np.diag(1.0 / r) @ D - k**2 * I
    Lm = L - np.diag(1.0 / r**2)
    dv_plus_vr = cfg.base_velocity_gradient(r) + V / r  # = 2*A0 for Couette
    Z = np.zeros((n, n))

    A = np.block([
        [Lm, np.diag(2.0 * R * V / r), Z, -R * D],
        [np.diag(-R * dv_plus_vr), Lm, Z, Z],
        [Z, Z, L, -k * R * I],
        [D + np.diag(1.0 / r), Z, -k * I, Z],
    ])
    B = np.zeros_like(A)
    for blk in range(3):
        sl = slice(blk * n, blk * n + n)
        B[sl, sl] = I
    for blk in range(3):
        for j in (0, n - 1):
            row = blk * n + j
            A[row, :] = 0.0
            A[row, row] = 1.0
            B[row, :] = 0.0
    return A, B


def _realify(vec, label):
    """Rotate a complex eigenvector onto the real axis; fail if it resists."""
    i = np.argmax(np.abs(vec))
    piv = vec[i]
    if piv == 0:
        raise EigensolverError(f"zero eigenvector ({label})")
    out = vec * (np.conj(piv) / abs(piv))
    resid = np.linalg.norm(out.imag) / np.linalg.norm(out.real)
    if resid > 1e-8:
        raise EigensolverError(
            f"eigenvector not real after phase rotation ({label}): residue {resid:.2e}"
        )
    return out.real


def _mode_candidates(cfg, k, grid, n_keep=6):
    """QZ solve; return candidates sorted by descending real part.

    Each candidate is (sigma, right_vec, left_vec) with real vectors.
    Raises RegimeError if a complex pair sits at the top of the spectrum.
    """
    A, B = assemble_pencil(cfg, k, grid)
    try:
        w, vl, vr = scipy.linalg.eig(A, B, left=True, right=True)
    except Exception as exc:  # pragma: no cover - LAPACK failure
        raise EigensolverError(f"QZ failed at k={k}: {exc}") from exc
    finite = np.isfinite(w) & (np.abs(w) < 1e8)
    if not np.any(finite):
        raise EigensolverError(f"no finite eigenvalues at k={k}")
    idx = np.flatnonzero(finite)
    idx = idx[np.argsort(-w[idx].real)]
    top = w[idx[0]]
    if abs(top.imag) > _SIGMA_IMAG_RTOL * max(1.0, abs(top.real)):
        raise RegimeError(
            f"leading eigenvalue complex at k={k}: sigma={top:.6g}; "
            "outside the non-oscillatory regime"
        )
    out = []
    for i in idx[:n_keep]:
        if abs(w[i].imag) > _SIGMA_IMAG_RTOL * max(1.0, abs(w[i].real)):
            continue
        try:
            qr = _realify(vr[:, i], f"right k={k}")
            ql = _realify(vl[:, i], f"left k={k}")
        except EigensolverError:
            continue
        out.append((float(w[i].real), qr, ql))
    if not out:
        raise EigensolverError(f"no usable real candidates at k={k}")
    return out, (A, B)


def _finalize_mode(cfg, k, grid, sigma, qr, ql, pencil):
    """Normalize, fix phase, biorthonormalize; return (EigenMode, AdjointMode)."""
    n = grid.n_points
    u, v, w, p = qr[:n], qr[n:2 * n], qr[2 * n:3 * n], qr[3 * n:]
    norm2 = grid.inner_r(u, u) + grid.inner_r(v, v) + grid.inner_r(w, w)
    scale = 1.0 / np.sqrt(norm2)
    mid = n // 2
    if v[mid] * scale < 0:
        scale = -scale
    if abs(v[mid]) < 1e-10 * np.max(np.abs(v)):
        raise EigensolverError(f"phase convention degenerate at k={k}: v(mid)≈0")
    u, v, w, p = u * scale, v * scale, w * scale, p * scale

    A, B = pencil
    q = np.concatenate([u, v, w, p])
    resid = float(np.linalg.norm(A @ q - sigma * (B @ q), ord=np.inf))
    mode = EigenMode(k=k, sigma=sigma, u=u, v=v, w=w, p=p, residual=resid)

    # bilinear biorthonormalization y^T B q = 1, then profiles y / quad weights
    denom = ql @ (B @ q)
    if abs(denom) < 1e-12:
        raise EigensolverError(f"defective eigenvalue pairing at k={k}")
    y = ql / denom
    wq = grid.quad_weights
    au = y[0:n] / wq
    av = y[n:2 * n] / wq
    aw = y[2 * n:3 * n] / wq
    ap = y[3 * n:] / wq
    for arr in (au, av, aw):
        arr[0] = 0.0
        arr[-1] = 0.0
    adj = AdjointMode(k=k, sigma=sigma, u=au, v=av, w=aw, p=ap)
    return mode, adj


def _solve_k0_vbranch(cfg: FlowConfig, grid: RadialGrid):
    """k = 0 mean-flow branch: azimuthal diffusion eigenproblem.

    Continuity plus the wall conditions force u = 0 identically at k = 0, the
    axial equation decouples, and the azimuthal equation reduces to
    sigma v = [D^2 + D/r - 1/r^2] v with v = 0 at the walls.  The pressure
    follows from the radial balance D P = (2 V / r) v.
    """
    n = grid.n_points
    r = grid.nodes
    Lv = grid.d2 + np.diag(1.0 / r) @ grid.d1 - np.diag(1.0 / r**2)
    M = Lv[1:-1, 1:-1]
    w, vl, vr = scipy.linalg.eig(M, left=True, right=True)
    order = np.argsort(-w.real)
    i = order[0]
    if abs(w[i].imag) > _SIGMA_IMAG_RTOL * max(1.0, abs(w[i].real)):
        raise RegimeError(f"complex k=0 diffusion eigenvalue: {w[i]:.6g}")
    sigma = float(w[i].real)
    v = np.zeros(n)
    v[1:-1] = _realify(vr[:, i], "k=0 right")
    scale = 1.0 / np.sqrt(grid.inner_r(v, v))
    # Sign convention at k = 0 is opposite to the travelling modes: the
    # mean-flow lobe is taken mid-gap negative, so that a supercritical
    # equilibrium carries a positive mean-flow amplitude (and triads feed it
    # with positive interaction integral).  Physical observables are
    # invariant under this gauge choice.
    if v[n // 2] * scale > 0:
        scale = -scale
    v *= scale

    # pressure from radial hydrostatic balance, gauge P(r_i) = 0
    Dp = grid.d1.copy()
    rhs = 2.0 * cfg.base_velocity(r) / r * v
    Dp[0, :] = 0.0
    Dp[0, 0] = 1.0
    rhs[0] = 0.0
    p = np.linalg.solve(Dp, rhs)

    zeros = np.zeros(n)
    mode = EigenMode(k=0.0, sigma=sigma, u=zeros, v=v, w=zeros.copy(), p=p,
                     residual=float(np.linalg.norm(Lv @ v - sigma * v, ord=np.inf)))

    yv = np.zeros(n)
    yraw = _realify(vl[:, i], "k=0 left")
    yv[1:-1] = yraw / (yraw @ v[1:-1])
    av = yv / grid.quad_weights
    av[0] = av[-1] = 0.0
    adj = AdjointMode(k=0.0, sigma=sigma, u=zeros.copy(), v=av, w=zeros.copy(),
                      p=zeros.copy())
    return mode, adj


def solve_mode_pair(cfg: FlowConfig, k: float, grid: RadialGrid,
                    reference: EigenMode | None = None):
    """Leading direct/adjoint pair at wavenumber k.

    If `reference` is given, the eigenmode with maximal overlap against it is
    selected among the top candidates and must coincide with the rightmost
    eigenvalue; a mismatch raises BranchTrackingError.
    """
    if k == 0.0:
        return _solve_k0_vbranch(cfg, grid)
    sign = 1.0 if k > 0 else -1.0
    ka = abs(k)
    cands, pencil = _mode_candidates(cfg, ka, grid)
    pick = 0
    if reference is not None:
        ref = reference if reference.k >= 0 else reference.reflected()
        n = grid.n_points
        overlaps = []
        for sigma, qr, _ in cands:
            u, v, w = qr[:n], qr[n:2 * n], qr[2 * n:3 * n]
            nrm = np.sqrt(grid.inner_r(u, u) + grid.inner_r(v, v) + grid.inner_r(w, w))
            ov = abs(grid.inner_r(ref.u, u) + grid.inner_r(ref.v, v)
                     + grid.inner_r(ref.w, w)) / nrm
            overlaps.append(ov)
        pick = int(np.argmax(overlaps))
        if overlaps[pick] < _OVERLAP_MIN:
            raise BranchTrackingError(k, f"max modal overlap {overlaps[pick]:.3f}")
        if pick != 0:
            raise BranchTrackingError(
                k, "tracked branch is not the rightmost eigenvalue "
                   f"(sigma_tracked={cands[pick][0]:.6g}, sigma_max={cands[0][0]:.6g})")
    sigma, qr, ql = cands[pick]
    mode, adj = _finalize_mode(cfg, ka, grid, sigma, qr, ql, pencil)
    if sign < 0:
        return mode.reflected(), adj.reflected()
    return mode, adj


def leading_mode(cfg: FlowConfig, k: float, grid: RadialGrid) -> EigenMode:
    """Eigenmode of largest growth rate at wavenumber k, normalized and phase-fixed."""
    return solve_mode_pair(cfg, k, grid)[0]


def adjoint_mode(cfg: FlowConfig, k: float, grid: RadialGrid,
                 direct: EigenMode | None = None) -> AdjointMode:
    """Adjoint eigenmode, biorthonormalized against the direct mode at k."""
    mode, adj = solve_mode_pair(cfg, k, grid)
    if direct is not None and abs(adj.sigma - direct.sigma) > 1e-6 * max(1.0, abs(direct.sigma)):
        raise EigensolverError(
            f"adjoint eigenvalue {adj.sigma:.8g} does not match direct {direct.sigma:.8g} at k={k}"
        )
    return adj


@dataclass(frozen=True)
class ModeSet:
    """Leading modes and adjoints tabulated on a uniform wavenumber grid.

    Covers the symmetric grid ks = j*dk for |j| <= n_half; negative-k entries
    are parity reflections of positive-k ones.
    """

    cfg: FlowConfig
    grid: RadialGrid
    ks: np.ndarray
    sigma: np.ndarray
    u: np.ndarray   # [nk, n]
    v: np.ndarray
    w: np.ndarray
    p: np.ndarray
    adj_u: np.ndarray
    adj_v: np.ndarray
    adj_w: np.ndarray
    max_residual: float = 0.0
    _index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_index",
                           {round(float(k) / self.dk): i for i, k in enumerate(self.ks)})

    @property
    def dk(self) -> float:
        return float(self.ks[1] - self.ks[0])

    def index(self, k: float) -> int:
        key = round(float(k) / self.dk)
        if key not in self._index or abs(key * self.dk - k) > 1e-9:
            raise ConfigError(f"wavenumber {k} not on the tabulated grid")
        return self._index[key]

    def mode(self, k: float) -> EigenMode:
        i = self.index(k)
        return EigenMode(k=float(k), sigma=float(self.sigma[i]), u=self.u[i],
                         v=self.v[i], w=self.w[i], p=self.p[i])

    def adjoint(self, k: float) -> AdjointMode:
        i = self.index(k)
        return AdjointMode(k=float(k), sigma=float(self.sigma[i]), u=self.adj_u[i],
                           v=self.adj_v[i], w=self.adj_w[i], p=np.zeros_like(self.adj_u[i]))


def build_mode_set(cfg: FlowConfig, grid: RadialGrid, k_max: float, dk: float) -> ModeSet:
    """Solve for all leading modes on the symmetric grid |k| <= k_max.

    Marches outward in k from the most amplified wavenumber, tracking the
    branch by modal overlap so the tabulated profiles vary smoothly.
    """
    n_half = int(round(k_max / dk))
    if abs(n_half * dk - k_max) > 1e-9:
        raise ConfigError(f"k_max={k_max} is not a multiple of dk={dk}")
    ks_pos = np.arange(1, n_half + 1) * dk
    n = grid.n_points
    nk = 2 * n_half + 1
    ks = np.arange(-n_half, n_half + 1) * dk

    modes_pos: list[EigenMode | None] = [None] * len(ks_pos)
    adjs_pos: list[AdjointMode | None] = [None] * len(ks_pos)

    # anchor at the fastest-growing tabulated wavenumber
    probe = [solve_mode_pair(cfg, k, grid) for k in ks_pos]
    sig = np.array([m.sigma for m, _ in probe])
    i_anchor = int(np.argmax(sig))
    modes_pos[i_anchor], adjs_pos[i_anchor] = probe[i_anchor]

    for i in range(i_anchor + 1, len(ks_pos)):
        ref = modes_pos[i - 1]
        m, a = probe[i]
        if _overlap(grid, ref, m) >= _OVERLAP_MIN:
            modes_pos[i], adjs_pos[i] = m, a
        else:
            modes_pos[i], adjs_pos[i] = solve_mode_pair(cfg, ks_pos[i], grid, reference=ref)
    for i in range(i_anchor - 1, -1, -1):
        ref = modes_pos[i + 1]
        m, a = probe[i]
        if _overlap(grid, ref, m) >= _OVERLAP_MIN:
            modes_pos[i], adjs_pos[i] = m, a
        else:
            modes_pos[i], adjs_pos[i] = solve_mode_pair(cfg, ks_pos[i], grid, reference=ref)

    mode0, adj0 = _solve_k0_vbranch(cfg, grid)

    sigma = np.empty(nk)
    u = np.empty((nk, n)); v = np.empty((nk, n)); w = np.empty((nk, n)); p = np.empty((nk, n))
    au = np.empty((nk, n)); av = np.empty((nk, n)); aw = np.empty((nk, n))
    max_res = mode0.residual
    c = n_half
    sigma[c] = mode0.sigma
    u[c], v[c], w[c], p[c] = mode0.u, mode0.v, mode0.w, mode0.p
    au[c], av[c], aw[c] = adj0.u, adj0.v, adj0.w
    for j, (m, a) in enumerate(zip(modes_pos, adjs_pos), start=1):
        for i, s in ((c + j, 1.0), (c - j, -1.0)):
            sigma[i] = m.sigma
            u[i], v[i], w[i], p[i] = m.u, m.v, s * m.w, m.p
            au[i], av[i], aw[i] = a.u, a.v, s * a.w
        max_res = max(max_res, m.residual)

    return ModeSet(cfg=cfg, grid=grid, ks=ks, sigma=sigma, u=u, v=v, w=w, p=p,
                   adj_u=au, adj_v=av, adj_w=aw, max_residual=max_res)


def _overlap(grid, m1: EigenMode, m2: EigenMode) -> float:
    return abs(grid.inner_r(m1.u, m2.u) + grid.inner_r(m1.v, m2.v)
               + grid.inner_r(m1.w, m2.w))


def growth_curve(cfg: FlowConfig, k_grid, grid: RadialGrid) -> np.ndarray:
    """Leading growth rate a(k) = sigma_1(k) sampled on a symmetric uniform grid."""
    k_grid = np.asarray(k_grid, dtype=float)
    out = np.empty_like(k_grid)
    prev = None
    for ka in np.unique(np.abs(k_grid)):
        mode, _ = solve_mode_pair(cfg, ka, grid)
        if prev is not None and ka > 0 and _overlap(grid, prev, mode) < _OVERLAP_MIN:
            mode, _ = solve_mode_pair(cfg, ka, grid, reference=prev)
        out[np.abs(np.abs(k_grid) - ka) < 1e-12] = mode.sigma
        if ka > 0:
            prev = mode
    return out


def leading_sigma(cfg: FlowConfig, k: float, grid: RadialGrid) -> float:
    """Growth rate only (cheap eigenvalue-only path for root finds)."""
    if k == 0.0:
        return _solve_k0_vbranch(cfg, grid)[0].sigma
    A, B = assemble_pencil(cfg, abs(k), grid)
    w = scipy.linalg.eigvals(A, B)
    w = w[np.isfinite(w) & (np.abs(w) < 1e8)]
    if w.size == 0:
        raise EigensolverError(f"no finite eigenvalues at k={k}")
    top = w[np.argmax(w.real)]
    if abs(top.imag) > _SIGMA_IMAG_RTOL * max(1.0, abs(top.real)):
        raise RegimeError(f"leading eigenvalue complex at k={k}: {top:.6g}")
    return float(top.real)


def critical_point(eta: float, mu: float, grid: RadialGrid,
                   k_bounds=(2.0, 4.5), r_bounds=(30.0, 200.0)):
    """Minimum of the neutral curve: (R_c, k_c) where sigma_1(k; R) = 0.

    One-dimensional root find in R nested inside a bounded minimization in k.
    """
    from scipy.optimize import brentq, minimize_scalar

    def sigma_at(k, R):
        return leading_sigma(FlowConfig(eta, mu, R), k, grid)

    def r_neutral(k):
        lo, hi = r_bounds
        flo, fhi = sigma_at(k, lo), sigma_at(k, hi)
        if flo * fhi > 0:
            raise NumericalError(
                f"neutral curve not bracketed in R∈[{lo},{hi}] at k={k} "
                f"(sigma: {flo:.3g}, {fhi:.3g})")
        return brentq(lambda R: sigma_at(k, R), lo, hi, xtol=1e-4)

    res = minimize_scalar(r_neutral, bounds=k_bounds, method="bounded",
                          options={"xatol": 1e-4})
    return float(res.fun), float(res.x)


def neutral_band(cfg: FlowConfig, grid: RadialGrid, k_search=(0.5, 9.0)):
    """Endpoints (k_lo, k_hi) of the unstable band sigma_1(k) > 0 at fixed R."""
    from scipy.optimize import brentq, minimize_scalar

    res = minimize_scalar(lambda k: -leading_sigma(cfg, k, grid),
                          bounds=k_search, method="bounded", options={"xatol": 1e-3})
    k_peak = float(res.x)
    if -res.fun <= 0:
        raise NumericalError(f"flow is linearly stable at R={cfg.reynolds}")
    k_lo = brentq(lambda k: leading_sigma(cfg, k, grid), k_search[0], k_peak, xtol=1e-4)
    k_hi = brentq(lambda k: leading_sigma(cfg, k, grid), k_peak, k_search[1], xtol=1e-4)
    return float(k_lo), float(k_hi)
