import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from antenna_sps.dynamics import TimeDependentGenerator, evolve
from antenna_sps.effective import effective_generator, evolve_effective, ground_state, steady_state_effective
from antenna_sps.hilbert import SpaceConfig
from antenna_sps.model import full_liouvillian
from antenna_sps.observables import populations
from antenna_sps.pulses import PulseTrain, as_generator_envelope, evaluate

from conftest import baseline_values

DRIVE = PulseTrain(2e12, [4e-9, 28e-9, 64e-9], 1e-9)
PUMP = PulseTrain(2e12, [16e-9, 40e-9], 1e-9)


def test_peak_and_shape():
    train = PulseTrain(3.0, [1.0], 0.2)
    assert evaluate(train, 1.0) == 3.0
    assert evaluate(train, 1.2) == pytest.approx(3.0 * np.exp(-0.5))
    # isolated centre: neighbours more than 10 widths away are negligible
    spaced = PulseTrain(1.0, [0.0, 11.0], 1.0)
    assert abs(evaluate(spaced, 0.0) - 1.0) < 1e-20 or evaluate(spaced, 0.0) == 1.0


def test_validation():
    with pytest.raises(ValueError):
        PulseTrain(1.0, [0.0], 0.0)
    with pytest.raises(ValueError):
        PulseTrain(1.0, [np.inf], 1.0)


def test_baseline_sequence_structure():
    t = np.linspace(0, 80e-9, 8001)
    drive = evaluate(DRIVE, t)
    pump = evaluate(PUMP, t)
    peaks = t[1:-1][(drive[1:-1] > drive[:-2]) & (drive[1:-1] > drive[2:])]
    np.testing.assert_allclose(peaks, DRIVE.centers, atol=1e-11)
    assert drive.max() == pytest.approx(2e12)
    assert pump[np.argmin(abs(t - 16e-9))] == pytest.approx(2e12)
    # drive and pump pulses sit six widths apart or more
    assert np.max(np.minimum(drive, pump)) < 1e-7 * 2e12


@settings(max_examples=40)
@given(st.lists(st.floats(-10, 10), min_size=1, max_size=4), st.lists(st.floats(-10, 10), min_size=1, max_size=4),
       st.floats(-5, 5), st.floats(0.1, 3))
def test_concatenation_is_additive(c1, c2, amp, width):
    a, b = PulseTrain(amp, c1, width), PulseTrain(amp, c2, width)
    t = np.linspace(-12, 12, 97)
    np.testing.assert_allclose(evaluate(a.concatenate(b), t), evaluate(a, t) + evaluate(b, t), atol=1e-12)


@settings(max_examples=40)
@given(st.lists(st.floats(-10, 10), max_size=4), st.floats(0, 5), st.floats(0.1, 3))
def test_non_negative_for_non_negative_amplitude(centers, amp, width):
    assert np.all(evaluate(PulseTrain(amp, centers, width), np.linspace(-15, 15, 61)) >= 0)


def test_concatenate_mismatch():
    with pytest.raises(ValueError):
        PulseTrain(1.0, [0.0], 1.0).concatenate(PulseTrain(2.0, [1.0], 1.0))


def test_zero_amplitude_addend_is_inert(baseline):
    cfg = SpaceConfig(2, 1)
    zero = PulseTrain(0.0, [1e-9], 1e-9)
    base = TimeDependentGenerator(full_liouvillian(baseline, cfg))
    env, addend = as_generator_envelope(zero, "drive", baseline, cfg)
    gen = base.add(env, addend)
    for t in (0.0, 1e-9, 5e-9):
        assert abs(gen.at(t).matrix - base.static.matrix).max() == 0


def test_pump_rejects_negative_amplitude(baseline):
    with pytest.raises(ValueError):
        as_generator_envelope(PulseTrain(-1.0, [0.0], 1.0), "pump", baseline, effective=True)
    with pytest.raises(ValueError):
        as_generator_envelope(PulseTrain(1.0, [0.0], 1.0), "probe", baseline, effective=True)


def test_wide_pulse_reproduces_constant_drive():
    p = baseline_values(drive=0.0)
    omega = 5e11
    wide = PulseTrain(omega, [0.0], 1e-3)
    times = np.linspace(0, 2e-7, 201)
    traj = evolve_effective(p, times, drive_train=wide)
    rho_const = steady_state_effective(p.replace(drive=omega))
    np.testing.assert_allclose(traj.states[-1], rho_const, atol=1e-6)


def test_drive_addend_matches_constant_drive_generator(baseline):
    cfg = SpaceConfig(2, 1)
    p0 = baseline.replace(drive=0.0)
    _, addend = as_generator_envelope(PulseTrain(1.0, [0.0], 1.0), "drive", p0, cfg)
    diff = full_liouvillian(p0, cfg).matrix + 5e11 * addend.matrix - full_liouvillian(baseline, cfg).matrix
    assert abs(diff).max() <= 1e-9 * abs(full_liouvillian(baseline, cfg).matrix).max()


def test_pulsed_run_flips_population():
    p = baseline_values(drive=0.0, pump=0.0)
    gen = effective_generator(p, DRIVE, PUMP)
    times = np.linspace(0, 80e-9, 4001)
    traj = evolve(gen, ground_state(), times)
    p22 = lambda t: populations(traj.states[np.argmin(abs(times - t))])[1]  # noqa: E731
    assert p22(0.0) == 0.0
    # after each drive pulse the emitter sits in |2>, after each pump back in |1>
    for t_after_drive in (6e-9, 30e-9, 66e-9):
        assert p22(t_after_drive) > 0.95
    for t_after_pump in (20e-9, 44e-9):
        assert p22(t_after_pump) < 0.05
