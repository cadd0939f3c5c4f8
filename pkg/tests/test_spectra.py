import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from antenna_sps.spectra import (
    EmitterPhysical,
    FitError,
    LorentzianFit,
    SpectrumParseError,
    SpectrumSamples,
    coupling_from_purcell,
    efficiency,
    extract_rates,
    fit_lorentzian,
    lorentzian,
    parse_spectrum,
    purcell_ratio,
    read_spectrum,
    synthesize,
    weisskopf_wigner,
    write_spectrum,
)

W1 = 2 * np.pi * 2.7e14
G1 = 1.36e14


def single_channel(omega, power, channel="scattered"):
    return SpectrumSamples(np.asarray(omega), np.asarray(power), np.full(len(omega), channel, dtype=object))


def test_noiseless_roundtrip():
    w = np.linspace(W1 - 3 * G1, W1 + 3 * G1, 200)
    fit = fit_lorentzian(single_channel(w, lorentzian(w, W1, G1, 1.0)), "scattered")
    assert fit.center == pytest.approx(W1, rel=1e-6)
    assert fit.width == pytest.approx(G1, rel=1e-6)
    assert fit.amplitude == pytest.approx(1.0, rel=1e-6)


def test_noisy_fit_seeded():
    w = np.linspace(W1 - 3 * G1, W1 + 3 * G1, 200)
    rng = np.random.default_rng(7)
    p = lorentzian(w, W1, G1, 1.0) * (1 + 0.01 * rng.standard_normal(w.size))
    fit = fit_lorentzian(single_channel(w, np.clip(p, 0, None)), "scattered")
    assert fit.center == pytest.approx(W1, rel=1e-3)
    assert fit.width == pytest.approx(G1, rel=0.02)


def test_degenerate_and_short_data():
    w = np.linspace(1.0, 2.0, 50)
    with pytest.raises(FitError, match="degenerate"):
        fit_lorentzian(single_channel(w, np.ones_like(w)), "scattered")
    with pytest.raises(FitError, match="5 samples"):
        fit_lorentzian(single_channel(w, lorentzian(w, 1.5, 0.2, 1.0)), "scattered", window=(1.0, 1.05))


def test_window_restricts_fit():
    w = np.linspace(0, 10, 1001)
    p = lorentzian(w, 3.0, 0.5, 1.0) + lorentzian(w, 8.0, 0.5, 2.0)
    fit = fit_lorentzian(single_channel(w, p), "scattered", window=(1.0, 5.0))
    # the distant second peak leaves only a small bias
    assert fit.center == pytest.approx(3.0, abs=0.01)


@settings(max_examples=15, deadline=None)
@given(st.floats(1e-3, 1e3))
def test_scale_equivariance(c):
    w = np.linspace(-5, 5, 201)
    p = lorentzian(w, 0.3, 1.2, 2.0)
    a = fit_lorentzian(single_channel(w, p), "scattered")
    b = fit_lorentzian(single_channel(w, c * p), "scattered")
    assert b.amplitude == pytest.approx(c * a.amplitude, rel=1e-8)
    assert b.center == pytest.approx(a.center, abs=1e-9)
    assert b.width == pytest.approx(a.width, rel=1e-8)


def test_extract_rates_baseline_modes():
    for center, rad, nonrad, eta in ((W1, 6.8e13, 6.8e13, 0.5), (2 * np.pi * 2.5e14, 1.0e14, 2.2e14, 0.3125)):
        Gamma = rad + nonrad
        w = np.linspace(center - 4 * Gamma, center + 4 * Gamma, 401)
        s = synthesize(center, rad, nonrad, w)
        rates = extract_rates(fit_lorentzian(s, "scattered"), fit_lorentzian(s, "absorbed"))
        assert rates.eta == pytest.approx(eta, rel=1e-9)
        assert rates.Gamma_rad == pytest.approx(rad, rel=1e-6)
        assert rates.Gamma_nonrad == pytest.approx(nonrad, rel=1e-6)
    assert efficiency(1.0e14, 2.2e14) == 0.3125


def test_extract_rates_edge_cases():
    sca = LorentzianFit(1.0, 0.2, 3.0)
    assert extract_rates(sca, None).eta == 1.0
    assert extract_rates(sca, LorentzianFit(1.0, 0.2, 0.0)).eta == 1.0
    with pytest.raises(ValueError, match="disjoint"):
        extract_rates(sca, LorentzianFit(2.0, 0.2, 1.0))


@settings(max_examples=30)
@given(st.floats(0.1, 10), st.floats(0.1, 10), st.floats(0.5, 2.0), st.floats(0.0, 0.1))
def test_extract_rates_conserves_total(a_s, a_a, w_s, dc):
    sca = LorentzianFit(1.0, w_s, a_s)
    ab = LorentzianFit(1.0 + dc * w_s, 1.3 * w_s, a_a)
    rates = extract_rates(sca, ab)
    Gamma = (sca.weight * sca.width + ab.weight * ab.width) / (sca.weight + ab.weight)
    assert rates.Gamma_rad + rates.Gamma_nonrad == pytest.approx(Gamma, rel=1e-12)
    assert 0 <= rates.eta <= 1


def test_weisskopf_wigner():
    phys = EmitterPhysical(6e-29, 2.25, W1)
    assert weisskopf_wigner(phys) == pytest.approx(1.11e8, rel=0.01)
    assert weisskopf_wigner(EmitterPhysical(0.0, 2.25, W1)) == 0.0
    assert weisskopf_wigner(EmitterPhysical(6e-29, 2.25, 2 * W1)) == pytest.approx(8 * weisskopf_wigner(phys))
    with pytest.raises(ValueError):
        EmitterPhysical(6e-29, 0.5, W1)


def test_purcell_examples():
    assert coupling_from_purcell(1.0, 0.5, G1, 1.11e8) == 0.0
    ratio = purcell_ratio(5.73e11, 0.5, G1, 1.11e8)
    assert ratio == pytest.approx(44.5, abs=0.1)
    assert coupling_from_purcell(44.5, 0.5, G1, 1.11e8) == pytest.approx(5.73e11, rel=2e-3)
    with pytest.raises(ValueError):
        coupling_from_purcell(0.5, 0.5, G1, 1.11e8)
    with pytest.raises(ValueError):
        coupling_from_purcell(2.0, 0.0, G1, 1.11e8)


@settings(max_examples=50)
@given(st.floats(1e6, 1e14), st.floats(0.01, 1.0), st.floats(1e10, 1e16), st.floats(1e5, 1e10))
def test_purcell_roundtrip(kappa, eta, Gamma, gamma_sp):
    ratio = purcell_ratio(kappa, eta, Gamma, gamma_sp)
    if ratio - 1 < 1e-6:
        return  # enhancement lost to rounding of the leading 1
    back = coupling_from_purcell(ratio, eta, Gamma, gamma_sp)
    tol = 1e-12 + 2 * np.finfo(float).eps / (ratio - 1)
    assert back == pytest.approx(kappa, rel=tol)


def test_parse_errors_name_the_line():
    good = "frequency_rad_per_s,power,channel\n1.0,0.5,scattered\n"
    assert parse_spectrum(good).power[0] == 0.5
    with pytest.raises(SpectrumParseError, match=r"x\.csv:1"):
        parse_spectrum("frequency_rad_per_s,power\n1.0,0.5\n", source="x.csv")
    with pytest.raises(SpectrumParseError, match=r":3: expected 3 columns"):
        parse_spectrum(good + "2.0,0.4\n")
    with pytest.raises(SpectrumParseError, match=r":2: non-numeric"):
        parse_spectrum("frequency_rad_per_s,power,channel\nabc,0.5,scattered\n")
    with pytest.raises(SpectrumParseError, match=r":2: unknown channel"):
        parse_spectrum("frequency_rad_per_s,power,channel\n1.0,0.5,emitted\n")
    with pytest.raises(SpectrumParseError, match="header"):
        parse_spectrum("")


def test_file_roundtrip(tmp_path):
    w = np.linspace(W1 - 3 * G1, W1 + 3 * G1, 50)
    s = synthesize(W1, 6.8e13, 6.8e13, w, noise=0.01, seed=3)
    path = tmp_path / "s.csv"
    write_spectrum(path, s)
    back = read_spectrum(path)
    np.testing.assert_array_equal(back.frequency, s.frequency)
    np.testing.assert_array_equal(back.power, s.power)
    assert list(back.channel) == list(s.channel)
