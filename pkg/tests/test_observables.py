import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import poisson

from antenna_sps.dynamics import steady_state
from antenna_sps.effective import adiabatic_photon_numbers, evolve_effective
from antenna_sps.hilbert import SpaceConfig, ground_state
from antenna_sps.model import SystemParams, full_liouvillian
from antenna_sps.observables import (
    ObservableSeries,
    ceiling_population,
    emitter_state,
    g2_zero,
    mean_photon,
    mode_distribution,
    n_gen,
    populations,
)

from conftest import baseline_values


def product_state(emitter, p1, p2):
    """Diagonal state emitter (x) diag(p1) (x) diag(p2)."""
    return np.kron(np.kron(np.asarray(emitter, dtype=complex), np.diag(p1)), np.diag(p2))


def test_populations_examples():
    cfg = SpaceConfig(2, 1)
    assert populations(ground_state(cfg), cfg) == (1.0, 0.0, 0.0)
    vac1, vac2 = [1, 0, 0], [1, 0]
    mixed = product_state(np.eye(3) / 3, vac1, vac2)
    np.testing.assert_allclose(populations(mixed, cfg), [1 / 3] * 3)
    assert populations(np.diag([0.2, 0.3, 0.5])) == pytest.approx((0.2, 0.3, 0.5))
    with pytest.raises(ValueError):
        emitter_state(mixed)


def test_idealized_population_ends_in_2(baseline):
    traj = evolve_effective(baseline.replace(gamma_sp_e2=0.0, gamma_12=0.0), np.linspace(0, 3e-8, 601))
    assert populations(traj.states[-1])[1] == pytest.approx(1.0, abs=1e-6)


def test_mode_distribution_and_mean():
    cfg = SpaceConfig(3, 2)
    p1 = np.array([0.1, 0.2, 0.3, 0.4])
    p2 = np.array([0.5, 0.25, 0.25])
    rho = product_state(np.diag([1, 0, 0]), p1, p2)
    np.testing.assert_allclose(mode_distribution(rho, 1, cfg), p1)
    np.testing.assert_allclose(mode_distribution(rho, 2, cfg), p2)
    assert mean_photon(rho, 1, cfg) == pytest.approx(2.0)
    assert mean_photon(rho, 2, cfg) == pytest.approx(0.75)
    assert ceiling_population(rho, cfg) == pytest.approx((0.4, 0.25))
    with pytest.raises(ValueError):
        mode_distribution(rho, 3, cfg)


def test_g2_fock_and_coherent():
    cfg = SpaceConfig(10, 2)
    one = np.zeros(11)
    one[1] = 1
    assert g2_zero(product_state(np.diag([1, 0, 0]), one, [1, 0, 0]), 1, cfg) == 0.0
    # truncated coherent state |alpha|^2 = 0.1
    p = poisson.pmf(np.arange(11), 0.1)
    p /= p.sum()
    rho = product_state(np.diag([1, 0, 0]), p, [1, 0, 0])
    assert g2_zero(rho, 1, cfg) == pytest.approx(1.0, abs=1e-6)


def test_g2_errors():
    cfg = SpaceConfig(3, 1)
    rho = ground_state(cfg)
    with pytest.raises(ValueError, match="two photons"):
        g2_zero(rho, 2, cfg)
    with pytest.raises(ValueError, match="floor"):
        g2_zero(rho, 1, cfg)


def test_g2_is_never_negative():
    cfg = SpaceConfig(3, 1)
    p = np.array([1 - 1e-6, 1e-6, -1e-30, 0.0])
    rho = product_state(np.diag([1, 0, 0]), p, [1, 0])
    assert g2_zero(rho, 1, cfg) == 0.0


@settings(max_examples=30)
@given(st.floats(0.01, 2.0))
def test_g2_coherent_states_any_amplitude(mean):
    n_max = 40
    cfg = SpaceConfig(n_max, 0)
    p = poisson.pmf(np.arange(n_max + 1), mean)
    p /= p.sum()
    rho = product_state(np.diag([1, 0, 0]), p, [1])
    assert g2_zero(rho, 1, cfg) == pytest.approx(1.0, abs=1e-6)


def test_g2_invariant_under_truncation_increase():
    p = SystemParams(kappa1=0.3, kappa2=0.3, drive=0.3, gamma_12=0.2, gamma_rad1=1.0, gamma_rad2=1.0)
    values = []
    for n2 in (4, 5):
        cfg = SpaceConfig(5, n2)
        rho = steady_state(full_liouvillian(p, cfg))
        assert ceiling_population(rho, cfg)[1] < 1e-8
        values.append(g2_zero(rho, 2, cfg))
    assert values[1] == pytest.approx(values[0], rel=1e-4)


def test_g2_flat_or_decreasing_in_Gamma2():
    cfg = SpaceConfig(3, 3)
    g = []
    for G2 in (1e14, 3.2e14, 1e15):
        p = baseline_values(pump=1e9, gamma_rad2=G2 / 2, gamma_nonrad2=G2 / 2)
        g.append(g2_zero(steady_state(full_liouvillian(p, cfg)), 2, cfg))
    assert max(g) < 1e-6
    assert g[1] <= g[0] * 1.01 + 1e-15
    assert g[2] <= g[1] * 1.01 + 1e-15


def test_n_gen_examples():
    t = np.linspace(0, 1, 11)
    zero = n_gen(ObservableSeries("n2", t, np.zeros_like(t)), 5.0)
    assert np.all(zero.values == 0)
    const = n_gen(ObservableSeries("n2", t, np.full_like(t, 2.0)), 3.0)
    np.testing.assert_allclose(const.values, 6.0 * t)
    with pytest.raises(ValueError):
        ObservableSeries("n2", t, np.zeros(3))


@settings(max_examples=30)
@given(st.lists(st.floats(0, 1e3), min_size=2, max_size=50))
def test_n_gen_monotone(values):
    t = np.arange(len(values), dtype=float)
    out = n_gen(ObservableSeries("n2", t, np.array(values)), 1.5).values
    assert np.all(np.diff(out) >= 0)


def _scenario_n_gen(params, t_end, points):
    times = np.linspace(0, t_end, points)
    traj = evolve_effective(params, times)
    _, n2 = adiabatic_photon_numbers(traj.states, params)
    return n_gen(ObservableSeries("n2", times, n2), params.Gamma2).values[-1]


def test_n_gen_idealized_and_grid_refinement(baseline):
    p = baseline.replace(gamma_sp_e2=0.0, gamma_12=0.0)
    coarse = _scenario_n_gen(p, 2e-8, 1001)
    fine = _scenario_n_gen(p, 2e-8, 2001)
    assert fine == pytest.approx(1.0, abs=0.02)
    assert abs(fine - coarse) / fine < 0.005


def test_n_gen_branching_with_spontaneous_decay(baseline):
    # every excitation ends in |2>; the fraction routed through mode 2 is the branching ratio
    p = baseline.replace(gamma_12=0.0)
    value = _scenario_n_gen(p, 2e-8, 2001)
    eff_direct = 4 * p.kappa2**2 / p.Gamma2
    assert value == pytest.approx(eff_direct / (eff_direct + p.gamma_sp_e2), rel=1e-3)
    assert math.isfinite(value)
