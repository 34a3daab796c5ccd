import numpy as np
import pytest

from couette_spectrum import (
    EvolutionParams,
    couette_wall_shear,
    evolve,
    make_state,
    perturbation_kinetic_energy,
    reconstruct_velocity,
    torque_ratio,
)


@pytest.fixture(scope="module")
def equilibrium(tiny_tables):
    state = make_state(tiny_tables, seeds=[(3.0, 0.125)])
    samples, report = evolve(state, tiny_tables,
                             EvolutionParams(dt=0.01, t_max=40.0))
    final = make_state(tiny_tables)
    final.amplitudes = samples[-1].amplitudes
    final.t = samples[-1].t
    return final, report


def test_zero_disturbance_ratio_is_one(tiny_tables, cfg881):
    state = make_state(tiny_tables)
    state.amplitudes[tiny_tables.index(1.0)] = 0.0
    tq = torque_ratio(state, tiny_tables, cfg881)
    assert tq.ratio == 1.0


def test_torque_exceeds_laminar(tiny_tables, cfg881, equilibrium):
    _, report = equilibrium
    tq = torque_ratio(report, tiny_tables, cfg881)
    assert tq.k_f == report.k_f
    assert tq.ratio > 1.0


def test_couette_wall_shear(tiny_tables, cfg881):
    # (dV/dr - V/r) at the inner wall vs numerical differentiation
    from couette_spectrum import build_grid

    grid = build_grid(48, cfg881.r_i, cfg881.r_o)
    V = cfg881.base_velocity(grid.nodes)
    num = (grid.d1 @ V)[0] - V[0] / grid.nodes[0]
    assert couette_wall_shear(cfg881) == pytest.approx(num, abs=1e-10)
    assert couette_wall_shear(cfg881) == pytest.approx(-8.0 / 3.0, rel=1e-12)


def test_kinetic_energy_zero_state(tiny_tables):
    state = make_state(tiny_tables)
    assert perturbation_kinetic_energy(state, tiny_tables) == 0.0


def test_kinetic_energy_is_abar_squared(tiny_tables, equilibrium):
    _, report = equilibrium
    ke = perturbation_kinetic_energy(report, tiny_tables)
    assert ke == pytest.approx(report.abar[tiny_tables.index(report.k_f)] ** 2,
                               rel=1e-12)


def test_energy_normalization_consistency(tiny_tables, equilibrium):
    """z-averaged first-order KE of the reconstruction equals sum of Abar^2."""
    state, report = equilibrium
    nz = 64
    k_f = report.k_f
    z = np.arange(nz) * (2 * np.pi / k_f) / nz
    fields = reconstruct_velocity(state, tiny_tables, _cfg(), z, order=1)
    V = _cfg().base_velocity(tiny_tables.nodes)
    du = fields["u"]
    dv = fields["v"] - V[:, None]
    dw = fields["w"]
    dens = 0.5 * (du**2 + dv**2 + dw**2).mean(axis=1)
    ke = float((tiny_tables.quad_weights * tiny_tables.nodes) @ dens)
    # expected: all +-k pairs contribute Abar_k^2, the k=0 line Abar_0^2/2
    abar = np.abs(state.amplitudes) * tiny_tables.dk
    nh = tiny_tables.n_half
    want = float(np.sum(abar[nh + 1:] ** 2) + 0.5 * abar[nh] ** 2)
    assert ke == pytest.approx(want, rel=1e-6)


def _cfg():
    from couette_spectrum import FlowConfig

    return FlowConfig(eta=0.5, mu=0.0, reynolds=88.1)


def test_reconstruct_zero_state_is_base_flow(tiny_tables, cfg881):
    state = make_state(tiny_tables)
    z = np.linspace(0.0, 2.0, 7)
    fields = reconstruct_velocity(state, tiny_tables, cfg881, z)
    V = cfg881.base_velocity(tiny_tables.nodes)
    assert np.abs(fields["u"]).max() == 0.0
    assert np.abs(fields["w"]).max() == 0.0
    assert np.abs(fields["v"] - V[:, None]).max() < 1e-14


def test_reconstruct_periodicity(tiny_tables, cfg881, equilibrium):
    state, report = equilibrium
    k_f = report.k_f
    z0 = np.array([0.123, 0.456])
    f1 = reconstruct_velocity(state, tiny_tables, cfg881, z0)
    f2 = reconstruct_velocity(state, tiny_tables, cfg881, z0 + 2 * np.pi / k_f)
    assert np.abs(f1["v"] - f2["v"]).max() < 1e-10


def test_z_average_isolates_mean_components(tiny_tables, cfg881, equilibrium):
    state, _ = equilibrium
    k_f = 3.0
    nz = 96
    z = np.arange(nz) * (2 * np.pi / k_f) / nz
    fields = reconstruct_velocity(state, tiny_tables, cfg881, z)
    vbar = fields["v"].mean(axis=1) - cfg881.base_velocity(tiny_tables.nodes)
    # k = 0 contributions: first-order mode plus all (k, -k) pair fields
    i0 = tiny_tables.index(0.0)
    want = np.real(state.amplitudes[i0]) * tiny_tables.dk * tiny_tables.mode_v[i0]
    for i, k in enumerate(tiny_tables.k_grid):
        coef = (state.amplitudes[i] * state.amplitudes[len(state.amplitudes) - 1 - i]).real
        _, v2, _ = tiny_tables.pair_field(k, -k)
        want = want + coef * tiny_tables.dk**2 * v2
    assert np.abs(vbar - want).max() < 1e-8


def test_torque_formula_consistency_with_reconstruction(tiny_tables, cfg881, equilibrium):
    """Same truncation, two code paths: formula vs differentiated z-average."""
    state, report = equilibrium
    k_f = report.k_f
    masked = make_state(tiny_tables)
    for k in (0.0, k_f, -k_f):
        i = tiny_tables.index(k)
        masked.amplitudes[i] = state.amplitudes[i]
    nz = 64
    z = np.arange(nz) * (2 * np.pi / k_f) / nz
    keep = {(k_f, -k_f), (-k_f, k_f)}
    fields = reconstruct_velocity(masked, tiny_tables, cfg881, z,
                                  pair_filter=lambda a, b: (a, b) in keep)
    from couette_spectrum import build_grid

    grid = build_grid(tiny_tables.meta["n_points"], cfg881.r_i, cfg881.r_o)
    vbar = fields["v"].mean(axis=1)
    shear = (grid.d1 @ vbar)[0] - vbar[0] / grid.nodes[0]
    ratio_recon = shear / couette_wall_shear(cfg881)
    tq = torque_ratio(report, tiny_tables, cfg881)
    assert ratio_recon == pytest.approx(tq.ratio, abs=1e-6)
