from dataclasses import replace

import numpy as np
import pytest

from couette_spectrum import (
    ConfigError,
    EvolutionParams,
    gl_coefficients,
    landau_constant,
    landau_equilibrium_curve,
    landau_evolution,
    landau_model,
    make_state,
    meanflow_coupled_coefficients,
    meanflow_coupled_evolution,
    meanflow_fixed_point,
    mode_mask,
    step,
)


def test_landau_constant_parity(tiny_tables):
    assert landau_constant(2.0, tiny_tables) == pytest.approx(
        landau_constant(-2.0, tiny_tables), rel=1e-12)


def test_landau_equilibrium_phase_line(tiny_tables):
    m = landau_model(3.0, tiny_tables)
    assert m.a > 0 and m.a1 < 0
    eq = m.equilibrium
    ts, traj = landau_evolution(3.0, 0.01, (0.0, 8.0), tiny_tables)
    amp = np.abs(traj)
    assert np.all(np.diff(amp) >= -1e-12)  # monotone approach from below
    assert amp[-1] == pytest.approx(eq, rel=1e-6)


def test_landau_zero_stays_zero(tiny_tables):
    _, traj = landau_evolution(3.0, 0.0, (0.0, 5.0), tiny_tables)
    assert np.abs(traj).max() == 0.0


def test_landau_reference_vs_rk(tiny_tables):
    from scipy.integrate import solve_ivp

    m = landau_model(3.0, tiny_tables)
    ts, ref = landau_evolution(3.0, 0.02, (0.0, 1.0), tiny_tables, n_out=21)

    def rhs(_, y):
        a = y[0]
        return [m.a * a + m.a1 * a**3]

    sol = solve_ivp(rhs, (0, 1.0), [0.02], rtol=1e-12, atol=1e-14, t_eval=ts)
    assert np.abs(sol.y[0] - ref.real).max() < 1e-8


def test_landau_masked_grid_equivalence(tiny_tables):
    """Spectrum engine restricted to +-k0 is algebraically the Landau map."""
    k0 = 3.0
    dk = tiny_tables.dk
    abar0 = 0.04
    state = make_state(tiny_tables, seeds=[(k0, abar0 / dk)])
    mask = mode_mask(tiny_tables, [k0])
    params = EvolutionParams(dt=0.01, picard_tol=1e-14)
    i = tiny_tables.index(k0)
    traj = [state.amplitudes[i] * dk]
    for _ in range(100):
        state = step(state, tiny_tables, params, mask=mask)
        traj.append(state.amplitudes[i] * dk)
    _, ref = landau_evolution(k0, abar0, (0.0, 1.0), tiny_tables,
                              method="implicit_euler", dt=0.01)
    err = np.abs(np.array(traj) - ref) / np.abs(ref)
    assert err.max() < 1e-6


def test_meanflow_coefficients_real_and_locked(tiny_tables):
    model = meanflow_coupled_coefficients(3.0, tiny_tables)
    for name in ("a31", "a41", "a42", "b31", "b32", "b41", "b42", "a_k", "a_0"):
        val = getattr(model, name)
        assert np.isreal(val) and np.isfinite(val)
    assert model.a_k > 0 and model.a_0 < 0


def test_meanflow_masked_grid_equivalence(tiny_tables):
    k0 = 3.0
    dk = tiny_tables.dk
    model = meanflow_coupled_coefficients(k0, tiny_tables)
    state = make_state(tiny_tables, seeds=[(k0, 0.04 / dk), (0.0, 0.01 / dk)])
    mask = mode_mask(tiny_tables, [0.0, k0])
    params = EvolutionParams(dt=0.01, picard_tol=1e-14)
    ik = tiny_tables.index(k0)
    i0 = tiny_tables.index(0.0)
    tk = [state.amplitudes[ik] * dk]
    t0 = [state.amplitudes[i0].real * dk]
    for _ in range(100):
        state = step(state, tiny_tables, params, mask=mask)
        tk.append(state.amplitudes[ik] * dk)
        t0.append(state.amplitudes[i0].real * dk)
    _, a0s, aks = meanflow_coupled_evolution(model, 0.01, 0.04, (0.0, 1.0),
                                             method="implicit_euler", dt=0.01)
    assert np.abs(np.array(tk) - aks).max() / np.abs(aks).max() < 1e-6
    assert np.abs(np.array(t0) - a0s).max() / max(np.abs(a0s).max(), 1e-12) < 1e-6


def test_meanflow_zero_initial_stays_zero(tiny_tables):
    model = meanflow_coupled_coefficients(3.0, tiny_tables)
    _, a0s, aks = meanflow_coupled_evolution(model, 0.0, 0.0, (0.0, 2.0))
    assert np.abs(a0s).max() == 0.0 and np.abs(aks).max() == 0.0


def test_meanflow_equilibrium_couples(tiny_tables):
    model = meanflow_coupled_coefficients(3.0, tiny_tables)
    a0_eq, ak_eq = meanflow_fixed_point(model, guess=(0.01, landau_model(3.0, tiny_tables).equilibrium))
    assert abs(ak_eq) > 0
    assert abs(a0_eq) > 0  # driven by b32 |A_k|^2
    # and it differs from the pure Landau equilibrium (indirect interaction)
    assert abs(ak_eq) != pytest.approx(landau_model(3.0, tiny_tables).equilibrium,
                                       rel=1e-3)


def test_meanflow_decoupled_reduces_to_landau(tiny_tables):
    model = meanflow_coupled_coefficients(3.0, tiny_tables)
    dec = replace(model, a31=0.0, a42=0.0, b32=0.0, b41=0.0)
    _, a0s, aks = meanflow_coupled_evolution(dec, 0.0, 0.02, (0.0, 1.5),
                                             method="reference")
    _, ref = landau_evolution(3.0, 0.02, (0.0, 1.5), tiny_tables, n_out=201)
    assert np.abs(a0s).max() == 0.0
    assert np.abs(aks - ref).max() < 1e-7


def test_gl_coefficients(mid_tables, cfg881):
    gl = gl_coefficients(mid_tables, cfg881, k_c=3.16)
    assert gl.a > 0          # inside the unstable band at R = 88.1
    assert gl.a2 > 0         # concave growth-rate maximum
    # parabola fit through the tabulated growth curve around the peak
    i = int(np.argmax(mid_tables.a))
    ks = mid_tables.k_grid[i - 1:i + 2]
    ss = mid_tables.a[i - 1:i + 2]
    coef = np.polyfit(ks, ss, 2)
    assert gl.a2 == pytest.approx(-coef[0], rel=0.35)


def test_gl_edge_guard(tiny_tables, cfg881):
    with pytest.raises(ConfigError):
        gl_coefficients(tiny_tables, cfg881, k_c=3.9)


def test_landau_curve_zero_outside_band(mid_tables):
    curve = landau_equilibrium_curve(mid_tables)
    for k, val in zip(mid_tables.k_grid, curve):
        if abs(k) > 1e-12 and mid_tables.a[mid_tables.index(k)] <= 0:
            assert val == 0.0
    assert curve.max() > 0
