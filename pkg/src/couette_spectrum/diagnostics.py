"""Physical observables: torque ratio, kinetic energies, velocity fields.

The inner-cylinder torque ratio uses the wall shear of the axially averaged
azimuthal velocity.  With no-slip disturbances the shear perturbation at the
wall is the radial derivative alone, carried by the k = 0 first-order mode
and the (k_f, -k_f) second-order pair field:

    G_T/G_C = 1 - eta(1+eta)/2 * { dk A(0) dv1_0(r_i)
                                   + dk^2 A(k_f)^2 [dv2(k_f,-k_f)(r_i) + c.c.] }

where the prefactor eta(1+eta)/2 equals -1/S_C, the reciprocal laminar wall
shear, for a resting outer cylinder.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DependencyError
from .evolution import EquilibriumReport, EvolutionParams, SpectrumState, evolve, make_state
from .flow_config import FlowConfig
from .kernels import KernelTables


@dataclass(frozen=True)
class TorqueReport:
    k_f: float
    ratio: float
    term_mean_flow: float   # dk A(0) dv1_0(r_i) contribution inside the braces
    term_pair: float        # dk^2 A(kf)^2 [dv2 + c.c.] contribution


def torque_ratio(equilibrium, tables: KernelTables, cfg: FlowConfig) -> TorqueReport:
    """Torque of the equilibrium state relative to laminar Couette flow.

    `equilibrium` may be an EquilibriumReport (uses its signed mean-flow
    amplitude and dominant-mode amplitude) or a SpectrumState.
    """
    dk = tables.dk
    if isinstance(equilibrium, EquilibriumReport):
        k_f = equilibrium.k_f
        a0_bar = equilibrium.mean_flow_amplitude          # signed A(0) dk
        akf_bar2 = float(equilibrium.abar[tables.index(k_f)]) ** 2
    elif isinstance(equilibrium, SpectrumState):
        abar = equilibrium.abar()
        pos = equilibrium.k_grid > 1e-12
        k_f = float(equilibrium.k_grid[pos][np.argmax(abar[pos])])
        a0_bar = float(np.real(equilibrium.amplitudes[tables.index(0.0)])) * dk
        akf_bar2 = float(abar[tables.index(k_f)]) ** 2
    else:
        raise ConfigError("equilibrium must be an EquilibriumReport or SpectrumState")
    if not np.isfinite(tables.dv1_0_wall):
        raise DependencyError("wall-derivative tables missing")
    term_mean = a0_bar * tables.dv1_0_wall
    term_pair = akf_bar2 * 2.0 * float(tables.dv2_wall[tables.index(k_f)])
    pref = cfg.eta * (1.0 + cfg.eta) / 2.0
    return TorqueReport(k_f=k_f, ratio=1.0 - pref * (term_mean + term_pair),
                        term_mean_flow=term_mean, term_pair=term_pair)


def perturbation_kinetic_energy(equilibrium, tables: KernelTables) -> float:
    """First-order disturbance kinetic energy of the dominant mode pair.

    Per unit axial length with the unit-normalized eigenfunctions this is
    Abar(k_f)^2 (both +-k_f contributions).
    """
    if isinstance(equilibrium, EquilibriumReport):
        return float(equilibrium.abar[tables.index(equilibrium.k_f)]) ** 2
    abar = equilibrium.abar()
    pos = equilibrium.k_grid > 1e-12
    return float(np.max(abar[pos])) ** 2


def reconstruct_velocity(state: SpectrumState, tables: KernelTables,
                         cfg: FlowConfig, z, order: int = 2,
                         pair_filter=None):
    """Physical velocity components on the (r, z) mesh of grid nodes x z.

    Returns dict with 'u', 'v', 'w' arrays of shape (n_r, n_z); 'v' includes
    the laminar base profile.  The series is truncated after the second-order
    term; `order=1` keeps only the eigenmode sum, and `pair_filter(k1, k2)`
    (if given) restricts which second-order pairs enter.
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    r = tables.nodes
    nk = len(tables.k_grid)
    dk = tables.dk
    amp = state.amplitudes
    V = cfg.base_velocity(r)

    u = np.zeros((r.size, z.size), dtype=complex)
    v = np.zeros_like(u)
    w = np.zeros_like(u)
    v += V[:, None]
    phases = np.exp(1j * np.outer(tables.k_grid, z))  # [nk, nz]
    for i, k in enumerate(tables.k_grid):
        a = amp[i] * dk
        if a == 0:
            continue
        u += a * tables.mode_u[i][:, None] * phases[i][None, :]
        v += a * tables.mode_v[i][:, None] * phases[i][None, :]
        w += a * (1j * tables.mode_w[i])[:, None] * phases[i][None, :]
    if order >= 2:
        for i1, k1 in enumerate(tables.k_grid):
            if amp[i1] == 0:
                continue
            for i2, k2 in enumerate(tables.k_grid):
                if amp[i2] == 0:
                    continue
                if pair_filter is not None and not pair_filter(k1, k2):
                    continue
                coef = amp[i1] * amp[i2] * dk * dk
                u2, v2, w2 = tables.pair_field(k1, k2)
                ph = np.exp(1j * (k1 + k2) * z)[None, :]
                u += coef * u2[:, None] * ph
                v += coef * v2[:, None] * ph
                w += coef * (1j * w2)[:, None] * ph
    resid = max(np.abs(u.imag).max(), np.abs(v.imag).max(), np.abs(w.imag).max())
    if resid > 1e-10 * max(1.0, np.abs(v.real).max()):
        raise ConfigError(f"reconstructed field not real: imaginary residue {resid:.2e}")
    return {"u": u.real, "v": v.real, "w": w.real, "r": r, "z": z}


def couette_wall_shear(cfg: FlowConfig) -> float:
    """Laminar wall shear functional (dV/dr - V/r) at the inner cylinder."""
    return -2.0 * cfg.b0 / cfg.r_i**2


def torque_rows_for_seeds(tables: KernelTables, cfg: FlowConfig, seeds,
                          params: EvolutionParams, seed_density: float = 0.1):
    """Equilibrate each seeded wavenumber (zero background) and tabulate torque."""
    rows = []
    for k_f in seeds:
        state = make_state(tables, seeds=[(k_f, seed_density)])
        _, report = evolve(state, tables, params)
        rows.append((float(k_f), report, torque_ratio(report, tables, cfg)))
    return rows


def torque_vs_reynolds(eta: float, mu: float, reynolds_list, tables_provider,
                       params: EvolutionParams, seed_density: float = 0.1):
    """Torque-ratio sweep across Reynolds numbers.

    `tables_provider(cfg)` returns kernel tables for one flow configuration
    (typically a cache-backed builder: per-R tables are expensive).  For each
    R the critical-wavenumber equilibrium gives the reference ratio, and the
    stable-band envelope (min/max over seeded equilibria) quantifies the
    nonuniqueness spread.
    """
    out = []
    for R in reynolds_list:
        cfg = FlowConfig(eta=eta, mu=mu, reynolds=R)
        tables = tables_provider(cfg)
        unstable = tables.k_grid[(tables.a > 0) & (tables.k_grid > 0)]
        if unstable.size == 0:
            out.append({"reynolds": R, "ratio_kc": 1.0, "envelope_min": 1.0,
                        "envelope_max": 1.0, "rows": []})
            continue
        k_c_grid = float(tables.k_grid[np.argmax(tables.a)])
        ratios = {}
        for k_f in unstable:
            state = make_state(tables, seeds=[(float(k_f), seed_density)])
            _, report = evolve(state, tables, params)
            if abs(report.k_f - k_f) > tables.dk / 2 + 1e-12:
                continue  # not stable as seeded; excluded from the envelope
            ratios[float(k_f)] = torque_ratio(report, tables, cfg).ratio
        if not ratios:
            out.append({"reynolds": R, "ratio_kc": 1.0, "envelope_min": 1.0,
                        "envelope_max": 1.0, "rows": []})
            continue
        kc_key = min(ratios, key=lambda k: abs(k - k_c_grid))
        out.append({
            "reynolds": R,
            "ratio_kc": ratios[kc_key],
            "envelope_min": min(ratios.values()),
            "envelope_max": max(ratios.values()),
            "rows": sorted(ratios.items()),
        })
    return out
