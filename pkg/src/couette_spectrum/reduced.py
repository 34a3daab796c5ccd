"""Limiting models tied to the kernel tables.

Three reductions of the full spectral dynamics:
  * Landau equation for one monochromatic wave (self-interaction quartet),
  * Ginzburg-Landau envelope coefficients for a narrow packet at the critical
    wavenumber (diffusion coefficient from the curvature of the growth curve),
  * the two-amplitude system coupling a wave to the mean-flow distortion,
    whose coefficients are the kernel contractions produced by a
    two-delta-function spectrum.

Each reduced ODE can be integrated either with a high-accuracy reference
method (closed form / tight-tolerance RK) or with exactly the same implicit
Euler + Picard map as the spectral engine; the latter makes the masked-grid
equivalence tests discrete identities rather than approximate comparisons.
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ConfigError
from .flow_config import FlowConfig
from .kernels import KernelTables
from .linear_stability import leading_sigma
from .radial import build_grid


@dataclass(frozen=True)
class LandauModel:
    k0: float
    a: float    # linear growth rate at k0
    a1: float   # cubic self-interaction constant

    @property
    def equilibrium(self) -> float:
        """Supercritical equilibrium amplitude, 0 if none exists."""
        if self.a > 0 and self.a1 < 0:
            return float(np.sqrt(-self.a / self.a1))
        return 0.0


def landau_constant(k0: float, tables: KernelTables) -> float:
    """a1 = c(k0,-k0,k0) + c(-k0,k0,k0) + c(k0,k0,-k0)."""
    return (tables.c_lookup(k0, -k0, k0) + tables.c_lookup(-k0, k0, k0)
            + tables.c_lookup(k0, k0, -k0))


def landau_model(k0: float, tables: KernelTables) -> LandauModel:
    return LandauModel(k0=float(k0), a=float(tables.a[tables.index(k0)]),
                       a1=landau_constant(k0, tables))


def landau_evolution(k0: float, a_init: complex, t_span, tables: KernelTables,
                     method: str = "reference", dt: float = 0.01,
                     n_out: int = 201):
    """Trajectory of the monochromatic amplitude ODE dA/dt = aA + a1|A|^2 A.

    method="reference": exact closed form of the |A|^2 Riccati equation.
    method="implicit_euler": the spectral engine's step map (for cross-model
    identity tests), sampled at every step.
    """
    m = landau_model(k0, tables)
    t0, t1 = float(t_span[0]), float(t_span[1])
    if method == "reference":
        ts = np.linspace(t0, t1, n_out)
        y0 = abs(a_init) ** 2
        if y0 == 0.0:
            return ts, np.zeros_like(ts, dtype=complex)
        e = np.exp(2.0 * m.a * (ts - t0))
        if m.a != 0.0:
            y = m.a * y0 * e / (m.a + m.a1 * y0 * (1.0 - e))
        else:
            y = y0 / (1.0 - 2.0 * m.a1 * y0 * (ts - t0))
        phase = a_init / abs(a_init)
        return ts, phase * np.sqrt(y)
    if method == "implicit_euler":
        nst = int(round((t1 - t0) / dt))
        ts = t0 + dt * np.arange(nst + 1)
        out = np.empty(nst + 1, dtype=complex)
        out[0] = a_init
        amp = complex(a_init)
        denom = 1.0 - dt * m.a
        for i in range(1, nst + 1):
            cur = amp
            for _ in range(200):
                nxt = (amp + dt * m.a1 * abs(cur) ** 2 * cur) / denom
                if abs(nxt - cur) < 1e-14 * max(1.0, abs(nxt)):
                    cur = nxt
                    break
                cur = nxt
            amp = cur
            out[i] = amp
        return ts, out
    raise ConfigError(f"unknown method {method!r}")


@dataclass(frozen=True)
class GinzburgLandauCoefficients:
    k_c: float
    a: float     # growth rate at k_c
    a1: float    # cubic coefficient at the nearest grid wavenumber
    a2: float    # envelope diffusion, -1/2 d^2a/dk^2 at k_c


def gl_coefficients(tables: KernelTables, cfg: FlowConfig,
                    k_c: float | None = None) -> GinzburgLandauCoefficients:
    """Envelope-equation coefficients near the critical wavenumber.

    The curvature a2 is evaluated from fresh growth-rate solves at k_c and
    k_c +- dk (the table spacing), so k_c need not lie on the grid; a1 is read
    from the tables at the nearest grid point.
    """
    dk = tables.dk
    if k_c is None:
        k_c = float(tables.k_grid[np.argmax(tables.a)])
    if not tables.k_grid[0] + dk < k_c < tables.k_grid[-1] - dk:
        raise ConfigError(f"k_c={k_c} too close to the grid edge")
    grid = build_grid(int(tables.meta["n_points"]), cfg.r_i, cfg.r_o)
    s0 = leading_sigma(cfg, k_c, grid)
    sp = leading_sigma(cfg, k_c + dk, grid)
    sm = leading_sigma(cfg, k_c - dk, grid)
    a2 = -0.5 * (sp - 2.0 * s0 + sm) / dk**2
    k_near = tables.k_grid[tables.index(round(k_c / dk) * dk)]
    return GinzburgLandauCoefficients(k_c=float(k_c), a=float(s0),
                                      a1=landau_constant(k_near, tables),
                                      a2=float(a2))


@dataclass(frozen=True)
class MeanFlowCoupledModel:
    """dA_k/dt = a_k A_k + a31 A0 A_k + (a41 |A_k|^2 + a42 |A0|^2) A_k
       dA0/dt = a_0 A0 + b31 |A0|^2 + b32 |A_k|^2 + (b41 |A_k|^2 + b42 |A0|^2) A0

    Amplitudes are the physical delta weights (density times dk)."""

    k0: float
    a_k: float
    a_0: float
    a31: float
    a41: float
    a42: float
    b31: float
    b32: float
    b41: float
    b42: float


def meanflow_coupled_coefficients(k0: float, tables: KernelTables) -> MeanFlowCoupledModel:
    """Kernel contractions of the two-delta spectrum {0, +-k0}.

    Requires |k0| strictly inside the grid (the trapezoid end weights at the
    boundary would break the exact contraction).
    """
    if abs(abs(k0) - tables.k_grid[-1]) < 1e-9:
        raise ConfigError("k0 on the grid boundary carries a trapezoid half-weight")
    b = tables.b_lookup
    c = tables.c_lookup
    return MeanFlowCoupledModel(
        k0=float(k0),
        a_k=float(tables.a[tables.index(k0)]),
        a_0=float(tables.a[tables.index(0.0)]),
        a31=2.0 * b(0.0, k0),
        a41=3.0 * c(k0, k0, -k0),
        a42=3.0 * c(k0, 0.0, 0.0),
        b31=b(0.0, 0.0),
        b32=2.0 * b(k0, -k0),
        b41=6.0 * c(k0, -k0, 0.0),
        b42=c(0.0, 0.0, 0.0),
    )


def _meanflow_rhs(model: MeanFlowCoupledModel, a0, ak):
    dak = (model.a_k * ak + model.a31 * a0 * ak
           + (model.a41 * abs(ak) ** 2 + model.a42 * abs(a0) ** 2) * ak)
    da0 = (model.a_0 * a0 + model.b31 * abs(a0) ** 2 + model.b32 * abs(ak) ** 2
           + (model.b41 * abs(ak) ** 2 + model.b42 * abs(a0) ** 2) * a0)
    return da0, dak


def meanflow_coupled_evolution(model: MeanFlowCoupledModel, a0_init, ak_init,
                               t_span, method: str = "reference", dt: float = 0.01,
                               n_out: int = 201):
    """Integrate the coupled pair; returns (ts, A0(t), A_k(t)).

    The mean-flow amplitude is real (Hermitian symmetry at k = 0); the wave
    amplitude may be complex.
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    if method == "reference":
        def rhs(_, y):
            a0 = y[0]
            ak = y[1] + 1j * y[2]
            da0, dak = _meanflow_rhs(model, a0, ak)
            return [float(np.real(da0)), dak.real, dak.imag]

        sol = solve_ivp(rhs, (t0, t1), [float(np.real(a0_init)), np.real(ak_init),
                                        np.imag(ak_init)],
                        method="RK45", rtol=1e-12, atol=1e-14,
                        t_eval=np.linspace(t0, t1, n_out), max_step=0.05)
        return sol.t, sol.y[0], sol.y[1] + 1j * sol.y[2]
    if method == "implicit_euler":
        nst = int(round((t1 - t0) / dt))
        ts = t0 + dt * np.arange(nst + 1)
        a0s = np.empty(nst + 1)
        aks = np.empty(nst + 1, dtype=complex)
        a0 = float(np.real(a0_init))
        ak = complex(ak_init)
        a0s[0], aks[0] = a0, ak
        d0 = 1.0 - dt * model.a_0
        dk_ = 1.0 - dt * model.a_k
        for i in range(1, nst + 1):
            c0, ck = a0, ak
            for _ in range(200):
                n0 = (a0 + dt * (model.b31 * c0 ** 2 + model.b32 * abs(ck) ** 2
                                 + (model.b41 * abs(ck) ** 2 + model.b42 * c0 ** 2) * c0)) / d0
                nk = (ak + dt * (model.a31 * c0 * ck
                                 + (model.a41 * abs(ck) ** 2 + model.a42 * c0 ** 2) * ck)) / dk_
                if abs(n0 - c0) + abs(nk - ck) < 1e-14:
                    c0, ck = n0, nk
                    break
                c0, ck = n0, nk
            a0, ak = c0, ck
            a0s[i], aks[i] = a0, ak
        return ts, a0s, aks
    raise ConfigError(f"unknown method {method!r}")


def meanflow_fixed_point(model: MeanFlowCoupledModel, guess=(0.02, 0.08)):
    """Nontrivial equilibrium of the coupled system (A0, A_k real branch)."""
    from scipy.optimize import fsolve

    def eqs(y):
        da0, dak = _meanflow_rhs(model, y[0], y[1])
        return [da0, dak]

    sol, info, ier, _ = fsolve(eqs, list(guess), full_output=True)
    if ier != 1:
        raise ConfigError("no coupled fixed point found from the given guess")
    return float(sol[0]), float(sol[1])


def landau_equilibrium_curve(tables: KernelTables):
    """Per-wavenumber Landau equilibrium amplitudes (monochromatic theory)."""
    out = np.zeros_like(tables.a)
    for i, k in enumerate(tables.k_grid):
        if k <= 0:
            continue
        m = landau_model(float(k), tables)
        out[i] = m.equilibrium
    return out + out[::-1]  # mirror onto negative k (k = 0 entry is zero)
