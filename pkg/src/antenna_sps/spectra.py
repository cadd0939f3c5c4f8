"""Lorentzian analysis of antenna spectra and extraction of model rates.

Spectrum files are delimiter-separated text with a header row naming the
columns ``frequency_rad_per_s``, ``power`` and ``channel`` (``scattered``
or ``absorbed``).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy import constants
from scipy.optimize import least_squares

CHANNELS = ("scattered", "absorbed")
COLUMNS = ("frequency_rad_per_s", "power", "channel")


class SpectrumParseError(ValueError):
    pass


class FitError(RuntimeError):
    pass


@dataclass(frozen=True)
class SpectrumSamples:
    frequency: np.ndarray
    power: np.ndarray
    channel: np.ndarray
    source: str = ""

    def __post_init__(self):
        if not (len(self.frequency) == len(self.power) == len(self.channel)):
            raise ValueError("frequency, power and channel columns differ in length")
        bad = set(np.unique(self.channel)) - set(CHANNELS)
        if bad:
            raise ValueError(f"unknown channel(s) {sorted(bad)}; expected {CHANNELS}")
        if np.any(np.asarray(self.power) < 0):
            raise ValueError("powers must be non-negative")
        for name in CHANNELS:
            w, _ = self.select(name)
            if np.any(np.diff(w) <= 0):
                raise ValueError(f"frequencies of channel {name!r} must be strictly increasing")

    def select(self, channel: str, window: Optional[Sequence[float]] = None):
        mask = np.asarray(self.channel) == channel
        w = np.asarray(self.frequency, dtype=float)[mask]
        p = np.asarray(self.power, dtype=float)[mask]
        if window is not None:
            lo, hi = window
            keep = (w >= lo) & (w <= hi)
            w, p = w[keep], p[keep]
        return w, p


def read_spectrum(path, delimiter: str = ",") -> SpectrumSamples:
    """Parse a spectrum file; errors name the offending line."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    return parse_spectrum(text, delimiter=delimiter, source=str(path))


def parse_spectrum(text: str, delimiter: str = ",", source: str = "") -> SpectrumSamples:
    rows = csv.reader(io.StringIO(text), delimiter=delimiter)
    header = None
    freq, power, chan = [], [], []
    for lineno, row in enumerate(rows, start=1):
        if not row or not "".join(row).strip() or row[0].lstrip().startswith("#"):
            continue
        cells = [c.strip() for c in row]
        if header is None:
            if tuple(cells) != COLUMNS:
                raise SpectrumParseError(f"{source}:{lineno}: expected header {','.join(COLUMNS)}, got {','.join(cells)}")
            header = cells
            continue
        if len(cells) != len(COLUMNS):
            raise SpectrumParseError(f"{source}:{lineno}: expected {len(COLUMNS)} columns, got {len(cells)}")
        try:
            w, p = float(cells[0]), float(cells[1])
        except ValueError:
            raise SpectrumParseError(f"{source}:{lineno}: non-numeric frequency or power") from None
        if cells[2] not in CHANNELS:
            raise SpectrumParseError(f"{source}:{lineno}: unknown channel {cells[2]!r}")
        if not (np.isfinite(w) and np.isfinite(p)) or p < 0:
            raise SpectrumParseError(f"{source}:{lineno}: frequency must be finite and power >= 0")
        freq.append(w)
        power.append(p)
        chan.append(cells[2])
    if header is None:
        raise SpectrumParseError(f"{source}: missing header row")
    try:
        return SpectrumSamples(np.array(freq), np.array(power), np.array(chan, dtype=object), source)
    except ValueError as exc:
        raise SpectrumParseError(f"{source}: {exc}") from None


def write_spectrum(path, samples: SpectrumSamples, delimiter: str = ",") -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        writer.writerow(COLUMNS)
        for w, p, c in zip(samples.frequency, samples.power, samples.channel):
            writer.writerow((repr(float(w)), repr(float(p)), c))


def lorentzian(omega, center: float, width: float, amplitude: float):
    """Peak-normalized Lorentzian with full width ``width``."""
    half = 0.5 * width
    return amplitude * half**2 / ((np.asarray(omega) - center) ** 2 + half**2)


@dataclass(frozen=True)
class LorentzianFit:
    center: float
    width: float
    amplitude: float
    residual_norm: float = 0.0
    channel: str = ""

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("Lorentzian width must be positive")
        if self.amplitude < 0:
            raise ValueError("Lorentzian amplitude must be non-negative")

    @property
    def weight(self) -> float:
        """Integrated power up to the common factor pi/2."""
        return self.amplitude * self.width


def _initial_guess(w, p):
    i = int(np.argmax(p))
    half = 0.5 * p[i]
    above = np.nonzero(p >= half)[0]
    lo, hi = above[0], above[-1]
    # interpolate the half-maximum crossings where the window brackets them
    left = w[lo] if lo == 0 else np.interp(half, [p[lo - 1], p[lo]], [w[lo - 1], w[lo]])
    right = w[hi] if hi == len(w) - 1 else np.interp(half, [p[hi + 1], p[hi]], [w[hi + 1], w[hi]])
    width = right - left
    if width <= 0:
        width = 2 * np.median(np.diff(w))
    return w[i], width, p[i]


def fit_lorentzian(samples: SpectrumSamples, channel: str, window: Optional[Sequence[float]] = None,
                   gtol: float = 1e-12) -> LorentzianFit:
    """Least-squares single-Lorentzian fit of one channel inside ``window``.

    Starts from the sample maximum and the half-maximum crossing distance,
    then refines with Levenberg-Marquardt in scaled coordinates.
    """
    if channel not in CHANNELS:
        raise ValueError(f"unknown channel {channel!r}")
    w, p = samples.select(channel, window)
    if w.size < 5:
        raise FitError(f"channel {channel!r} window {window}: need at least 5 samples, got {w.size}")
    peak = float(np.max(p))
    if peak <= 0 or np.ptp(p) <= 1e-12 * peak:
        raise FitError(f"channel {channel!r} window {window}: degenerate (flat) data")
    c0, g0, a0 = _initial_guess(w, p)
    x = (w - c0) / g0
    y = p / peak

    def residual(theta):
        c, g, a = theta
        return lorentzian(x, c, g, a) - y

    def jacobian(theta):
        c, g, a = theta
        h = 0.5 * g
        den = (x - c) ** 2 + h**2
        shape = h**2 / den
        d_c = a * shape * 2 * (x - c) / den
        d_g = a * (h / den - h**3 / den**2)
        return np.column_stack([d_c, d_g, shape])

    res = least_squares(residual, x0=[0.0, 1.0, a0 / peak], jac=jacobian, method="lm",
                        xtol=1e-15, ftol=1e-15, gtol=gtol, max_nfev=2000)
    if not res.success:
        raise FitError(f"channel {channel!r} window {window}: fit did not converge ({res.message})")
    c, g, a = res.x
    if g <= 0 or a < 0:
        # the model is even in the width; fold the sign back
        g = abs(g)
        if a < 0:
            raise FitError(f"channel {channel!r} window {window}: negative amplitude")
    grad = np.linalg.norm(res.jac.T @ res.fun) / max(np.linalg.norm(y) ** 2, 1e-300)
    if grad > 1e-9:
        raise FitError(f"channel {channel!r} window {window}: residual gradient {grad:.2e} above 1e-9")
    return LorentzianFit(
        center=float(c0 + c * g0),
        width=float(g * g0),
        amplitude=float(a * peak),
        residual_norm=float(np.linalg.norm(res.fun) * peak),
        channel=channel,
    )


@dataclass(frozen=True)
class ModeRates:
    Gamma_rad: float
    Gamma_nonrad: float
    eta: float

    @property
    def Gamma(self) -> float:
        return self.Gamma_rad + self.Gamma_nonrad


def efficiency(gamma_rad: float, gamma_nonrad: float) -> float:
    total = gamma_rad + gamma_nonrad
    if total <= 0:
        raise ValueError("efficiency undefined without losses")
    return gamma_rad / total


def extract_rates(fit_sca: LorentzianFit, fit_abs: Optional[LorentzianFit]) -> ModeRates:
    """Split a mode's total loss into radiative and nonradiative parts.

    Each channel's share is its integrated Lorentzian weight; the total
    width is the weight-averaged fitted width.  ``fit_abs=None`` or a zero
    amplitude means a lossless (purely radiative) antenna.
    """
    if fit_abs is None or fit_abs.amplitude == 0:
        return ModeRates(fit_sca.width, 0.0, 1.0)
    if fit_sca.amplitude == 0:
        return ModeRates(0.0, fit_abs.width, 0.0)
    half = 0.5 * max(fit_sca.width, fit_abs.width)
    if abs(fit_sca.center - fit_abs.center) > half:
        raise ValueError(
            f"scattering ({fit_sca.center:.4e}) and absorption ({fit_abs.center:.4e}) resonances are disjoint"
        )
    ws, wa = fit_sca.weight, fit_abs.weight
    eta = ws / (ws + wa)
    Gamma = (ws * fit_sca.width + wa * fit_abs.width) / (ws + wa)
    return ModeRates(eta * Gamma, (1 - eta) * Gamma, eta)


@dataclass(frozen=True)
class EmitterPhysical:
    dipole: float  # C m
    permittivity: float
    frequency: float  # rad/s

    def __post_init__(self):
        if self.dipole < 0:
            raise ValueError("dipole moment must be non-negative")
        if self.permittivity < 1:
            raise ValueError("host permittivity must be >= 1")


def weisskopf_wigner(phys: EmitterPhysical) -> float:
    """Free-space spontaneous emission rate (1/s) in a dielectric host."""
    c = constants.c
    return (phys.frequency**3 * np.sqrt(phys.permittivity) * phys.dipole**2
            / (3 * np.pi * constants.epsilon_0 * constants.hbar * c**3))


def purcell_ratio(kappa: complex, eta: float, Gamma: float, gamma_sp: float) -> float:
    """Scattered-power enhancement ``1 + eta * 4|kappa|^2 / (Gamma gamma_sp)``."""
    return 1.0 + eta * 4 * abs(kappa) ** 2 / (Gamma * gamma_sp)


def coupling_from_purcell(ratio: float, eta: float, Gamma: float, gamma_sp: float) -> float:
    """Invert :func:`purcell_ratio` for ``|kappa|``."""
    if not 0 < eta <= 1:
        raise ValueError(f"efficiency must lie in (0, 1], got {eta}")
    if Gamma <= 0 or gamma_sp <= 0:
        raise ValueError("loss and spontaneous-emission rates must be positive")
    if ratio < 1:
        raise ValueError(f"enhancement ratio {ratio} < 1: coupling undefined")
    return float(np.sqrt((ratio - 1) * Gamma * gamma_sp / (4 * eta)))


def synthesize(center: float, Gamma_rad: float, Gamma_nonrad: float, omega, source: str = "synthetic",
               noise: float = 0.0, seed: Optional[int] = None) -> SpectrumSamples:
    """Two-channel spectrum of one mode: peaks in proportion to the loss shares."""
    omega = np.asarray(omega, dtype=float)
    Gamma = Gamma_rad + Gamma_nonrad
    rng = np.random.default_rng(seed)
    parts = []
    for name, share in (("scattered", Gamma_rad / Gamma), ("absorbed", Gamma_nonrad / Gamma)):
        p = lorentzian(omega, center, Gamma, share)
        if noise:
            p = p * (1 + noise * rng.standard_normal(p.shape))
        parts.append((omega, np.clip(p, 0, None), np.full(omega.shape, name, dtype=object)))
    return SpectrumSamples(*(np.concatenate(col) for col in zip(*parts)), source=source)
