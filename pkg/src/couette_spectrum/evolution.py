"""Time integration of the amplitude-density equation on the truncated k-grid.

State is the complex amplitude density A(k) on the uniform symmetric grid; the
evolution is dA/dt = a(k) A + I1(k) + I2(k) with the triad and quartet
convolutions discretized by the trapezoidal rule (end weights 1/2 at the grid
boundary, off-grid partners dropped).  Stepping is fully implicit Euler with
the linear term folded into the denominator and the nonlinear terms iterated
to a fixed point (Picard), starting each step from the previous state.

Convolution hot loops are JIT-compiled when numba is importable and fall back
to vectorized numpy scatter-adds otherwise; both run in a fixed index order so
trajectories are reproducible bit-for-bit.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, StepFailureError
from .kernels import KernelTables

try:
    from numba import njit as _njit

    def _jit(fn):
        return _njit(cache=True)(fn)
except ImportError:  # pragma: no cover - numba is a declared dependency
    def _jit(fn):
        return fn


def _triad_scatter_py(coeff, jo, i1, i2, amp, out):
    np.add.at(out, jo, coeff * amp[i1] * amp[i2])


def _quartet_scatter_py(coeff, jo, i1, i2, i3, amp, out):
    np.add.at(out, jo, coeff * amp[i1] * amp[i2] * amp[i3])


@_jit
def _triad_scatter(coeff, jo, i1, i2, amp, out):  # pragma: no cover - jitted
    for m in range(coeff.size):
        out[jo[m]] += coeff[m] * amp[i1[m]] * amp[i2[m]]


@_jit
def _quartet_scatter(coeff, jo, i1, i2, i3, amp, out):  # pragma: no cover - jitted
    for m in range(coeff.size):
        out[jo[m]] += coeff[m] * amp[i1[m]] * amp[i2[m]] * amp[i3[m]]


class ConvolutionPlan:
    """Flattened index arrays for the triad/quartet sums of one kernel table."""

    def __init__(self, tables: KernelTables):
        self.tables = tables
        nk = len(tables.k_grid)
        nh = tables.n_half
        dk = tables.dk
        tau = np.ones(nk)
        tau[0] = tau[-1] = 0.5  # trapezoid end weights

        jo, i1 = np.meshgrid(np.arange(nk), np.arange(nk), indexing="ij")
        i2 = jo - i1 + nh
        ok = (i2 >= 0) & (i2 < nk)
        jo, i1, i2 = jo[ok], i1[ok], i2[ok]
        coeff = tau[i1] * tables.b[i1, i2] * dk
        keep = coeff != 0.0
        self.t_jo, self.t_i1, self.t_i2 = (np.ascontiguousarray(x[keep], dtype=np.int64)
                                           for x in (jo, i1, i2))
        self.t_coeff = np.ascontiguousarray(coeff[keep])

        jo, i1, i2 = np.meshgrid(np.arange(nk), np.arange(nk), np.arange(nk),
                                 indexing="ij")
        i3 = jo - i1 - i2 + 2 * nh
        ok = (i3 >= 0) & (i3 < nk)
        jo, i1, i2, i3 = jo[ok], i1[ok], i2[ok], i3[ok]
        coeff = tau[i1] * tau[i2] * tables.c[i1, i2, i3] * dk * dk
        keep = coeff != 0.0
        self.q_jo, self.q_i1, self.q_i2, self.q_i3 = (
            np.ascontiguousarray(x[keep], dtype=np.int64) for x in (jo, i1, i2, i3))
        self.q_coeff = np.ascontiguousarray(coeff[keep])
        self.nk = nk

    def triad(self, amp: np.ndarray) -> np.ndarray:
        out = np.zeros(self.nk, dtype=np.complex128)
        _triad_scatter(self.t_coeff, self.t_jo, self.t_i1, self.t_i2,
                       np.ascontiguousarray(amp, dtype=np.complex128), out)
        return out

    def quartet(self, amp: np.ndarray) -> np.ndarray:
        out = np.zeros(self.nk, dtype=np.complex128)
        _quartet_scatter(self.q_coeff, self.q_jo, self.q_i1, self.q_i2, self.q_i3,
                         np.ascontiguousarray(amp, dtype=np.complex128), out)
        return out

    def rhs(self, amp: np.ndarray) -> np.ndarray:
        return self.tables.a * amp + self.triad(amp) + self.quartet(amp)


_PLANS: dict[int, ConvolutionPlan] = {}


def get_plan(tables: KernelTables) -> ConvolutionPlan:
    key = id(tables)
    plan = _PLANS.get(key)
    if plan is None or plan.tables is not tables:
        plan = ConvolutionPlan(tables)
        _PLANS[key] = plan
    return plan


@dataclass(frozen=True)
class EvolutionParams:
    dt: float = 0.01
    picard_tol: float = 1e-10
    picard_max: int = 50
    equil_tol: float = 1e-8
    t_max: float = 60.0
    snapshot_every: int = 50

    def __post_init__(self):
        if self.dt <= 0 or self.picard_tol <= 0 or self.equil_tol <= 0:
            raise ConfigError("dt and tolerances must be positive")


@dataclass
class SpectrumState:
    """Amplitude density A(k) at time t on the kernel grid."""

    k_grid: np.ndarray
    amplitudes: np.ndarray
    t: float = 0.0

    def copy(self) -> "SpectrumState":
        return SpectrumState(self.k_grid, self.amplitudes.copy(), self.t)

    @property
    def dk(self) -> float:
        return float(self.k_grid[1] - self.k_grid[0])

    def hermitian_drift(self) -> float:
        return float(np.max(np.abs(self.amplitudes - np.conj(self.amplitudes[::-1]))))

    def hermitian_project(self):
        self.amplitudes = 0.5 * (self.amplitudes + np.conj(self.amplitudes[::-1]))

    def abar(self) -> np.ndarray:
        """Physical per-mode amplitudes |A(k)| dk."""
        return np.abs(self.amplitudes) * self.dk


def make_state(tables: KernelTables, seeds=(), uniform=None, background=0.0,
               t=0.0) -> SpectrumState:
    """Initial condition: seeded grid points plus optional uniform floor.

    `seeds` is an iterable of (k, density); each seed also sets the mirror
    point to the conjugate so the physical field is real.  `uniform` fills
    every mode with the given density before seeding; `background` is an
    additive uniform floor (noise level).
    """
    nk = len(tables.k_grid)
    amp = np.zeros(nk, dtype=np.complex128)
    if uniform is not None:
        amp[:] = uniform
    if background:
        amp += background
    for k, dens in seeds:
        i = tables.index(k)
        amp[i] = dens
        amp[nk - 1 - i] = np.conj(dens)
    state = SpectrumState(tables.k_grid.copy(), amp, float(t))
    if state.hermitian_drift() > 1e-12:
        raise ConfigError("initial condition violates Hermitian symmetry")
    return state


def mode_mask(tables: KernelTables, ks) -> np.ndarray:
    """Boolean mask selecting the given wavenumbers (with their mirrors)."""
    mask = np.zeros(len(tables.k_grid), dtype=bool)
    for k in ks:
        mask[tables.index(k)] = True
        mask[tables.index(-k)] = True
    return mask


def triad_integral(state: SpectrumState, tables: KernelTables) -> np.ndarray:
    """I1(k): trapezoidal triad convolution of the current state."""
    _check_grid(state, tables)
    return get_plan(tables).triad(state.amplitudes)


def quartet_integral(state: SpectrumState, tables: KernelTables) -> np.ndarray:
    """I2(k): trapezoidal quartet convolution of the current state."""
    _check_grid(state, tables)
    return get_plan(tables).quartet(state.amplitudes)


def _check_grid(state, tables):
    if len(state.k_grid) != len(tables.k_grid) or \
            abs(state.k_grid[0] - tables.k_grid[0]) > 1e-12 or \
            abs(state.dk - tables.dk) > 1e-12:
        raise ConfigError("state grid does not match kernel tables")


def step(state: SpectrumState, tables: KernelTables,
         params: EvolutionParams, mask=None) -> SpectrumState:
    """One implicit-Euler step by Picard iteration.

    A+ solves A+ = A + dt*(a A+ + I1(A+) + I2(A+)); iterates
    A_{n+1} = (A + dt*(I1(A_n) + I2(A_n))) / (1 - dt*a) from A_0 = A.
    A boolean `mask` restricts the dynamics to a mode subset (entries outside
    it are zeroed within every iterate), which reduces the map exactly to the
    corresponding few-mode amplitude system.
    """
    _check_grid(state, tables)
    plan = get_plan(tables)
    dt = params.dt
    denom = 1.0 - dt * tables.a
    A = state.amplitudes
    if mask is not None:
        A = np.where(mask, A, 0.0)
    cur = A.copy()
    for _ in range(params.picard_max):
        nxt = (A + dt * (plan.triad(cur) + plan.quartet(cur))) / denom
        if mask is not None:
            nxt = np.where(mask, nxt, 0.0)
        delta = float(np.max(np.abs(nxt - cur)))
        cur = nxt
        if delta < params.picard_tol:
            break
    else:
        raise StepFailureError(
            f"Picard iteration did not reach {params.picard_tol:g} within "
            f"{params.picard_max} iterations at t={state.t:.4f}; reduce dt")
    new = SpectrumState(state.k_grid, cur, state.t + dt)
    drift = new.hermitian_drift()
    if drift > 1e-12 * max(1.0, float(np.max(np.abs(cur)))):
        raise StepFailureError(f"Hermitian symmetry drift {drift:.2e} at t={new.t:.4f}")
    new.hermitian_project()
    return new


@dataclass(frozen=True)
class EquilibriumReport:
    k_f: float
    abar: np.ndarray          # per-mode physical amplitudes |A(k)| dk
    k_grid: np.ndarray
    harmonics: tuple          # ((k_f, abar), (2k_f, abar), ...)
    abar_mean_flow: float
    residual: float
    reason: str               # "converged" | "horizon"
    t_final: float = 0.0
    mean_flow_amplitude: float = 0.0  # signed A(0) * dk


@dataclass(frozen=True)
class TrajectorySample:
    t: float
    amplitudes: np.ndarray


def _dominant_kf(k_grid, abar):
    pos = k_grid > 1e-12
    ks = k_grid[pos]
    vals = abar[pos]
    best = np.max(vals)
    # ties (within float noise) break toward smaller k
    idx = np.flatnonzero(vals >= best * (1.0 - 1e-12))[0]
    return float(ks[idx])


def _make_report(state, tables, residual, reason):
    abar = state.abar()
    k_f = _dominant_kf(state.k_grid, abar)
    ladder = []
    m = 1
    while m * k_f <= state.k_grid[-1] + 1e-9:
        try:
            i = tables.index(m * k_f)
        except ConfigError:
            break
        ladder.append((m * k_f, float(abar[i])))
        m += 1
    i0 = tables.index(0.0)
    a0 = state.amplitudes[i0] * state.dk
    return EquilibriumReport(
        k_f=k_f, abar=abar, k_grid=state.k_grid.copy(), harmonics=tuple(ladder),
        abar_mean_flow=float(np.abs(a0)), residual=float(residual), reason=reason,
        t_final=float(state.t), mean_flow_amplitude=float(np.real(a0)))


def evolve(initial: SpectrumState, tables: KernelTables, params: EvolutionParams,
           sample_hook=None):
    """March to equilibrium or the time horizon.

    Returns (samples, report): samples are TrajectorySample records taken every
    `snapshot_every` steps (plus the initial and final states); the report
    classifies the dominant mode and the termination reason.  Equilibrium is
    declared from the instantaneous right-hand side: max_k |dA/dt| * dk at the
    accepted state must fall below equil_tol.
    """
    _check_grid(initial, tables)
    plan = get_plan(tables)
    state = initial.copy()
    samples = [TrajectorySample(state.t, state.amplitudes.copy())]
    if sample_hook:
        sample_hook(state)
    n_steps = int(round((params.t_max - state.t) / params.dt))
    residual = float(np.max(np.abs(plan.rhs(state.amplitudes))) * state.dk)
    reason = "horizon"
    if residual <= params.equil_tol:
        reason = "converged"
        return samples, _make_report(state, tables, residual, reason)
    for istep in range(1, n_steps + 1):
        prev = state.amplitudes
        state = step(state, tables, params)
        # cheap residual via the backward difference; confirm with the true
        # right-hand side only when it looks converged
        cheap = float(np.max(np.abs(state.amplitudes - prev)) / params.dt * state.dk)
        take_sample = (istep % params.snapshot_every == 0)
        if cheap <= 4.0 * params.equil_tol:
            residual = float(np.max(np.abs(plan.rhs(state.amplitudes))) * state.dk)
            if residual <= params.equil_tol:
                reason = "converged"
                samples.append(TrajectorySample(state.t, state.amplitudes.copy()))
                if sample_hook:
                    sample_hook(state)
                break
        else:
            residual = cheap
        if take_sample:
            samples.append(TrajectorySample(state.t, state.amplitudes.copy()))
            if sample_hook:
                sample_hook(state)
    else:
        if samples[-1].t != state.t:
            samples.append(TrajectorySample(state.t, state.amplitudes.copy()))
            if sample_hook:
                sample_hook(state)
        residual = float(np.max(np.abs(plan.rhs(state.amplitudes))) * state.dk)
        reason = "converged" if residual <= params.equil_tol else "horizon"
    return samples, _make_report(state, tables, residual, reason)


@dataclass(frozen=True)
class SelectionRow:
    k_seed: float
    k_f: float
    abar_kf: float
    outcome: str  # "stable as seeded" | "decayed to harmonic" | "decayed to band interior"


def selection_sweep(tables: KernelTables, seeds, params: EvolutionParams,
                    seed_density=0.1, background=1e-5):
    """Seed one mode at a time and tabulate the final dominant wavenumber."""
    rows = []
    for k0 in seeds:
        state = make_state(tables, seeds=[(k0, seed_density)], background=background)
        _, report = evolve(state, tables, params)
        half = 0.5 * tables.dk
        if abs(report.k_f - k0) <= half + 1e-12:
            outcome = "stable as seeded"
        elif abs(report.k_f - 2.0 * k0) <= half + 1e-12:
            outcome = "decayed to harmonic"
        else:
            outcome = "decayed to band interior"
        i = tables.index(report.k_f)
        rows.append(SelectionRow(k_seed=float(k0), k_f=report.k_f,
                                 abar_kf=float(report.abar[i]), outcome=outcome))
    return rows
