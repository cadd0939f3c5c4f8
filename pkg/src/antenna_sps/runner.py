"""Scenario execution without I/O: dynamics, steady-state grids, model comparison, fits."""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .config import ConfigError, Scenario, sweep_axes
from .dynamics import TimeDependentGenerator, evolve, steady_state
from .effective import adiabatic_photon_numbers, evolve_effective, steady_state_effective
from .hilbert import SpaceConfig, embed, emitter_flip, ground_state, number
from .model import SystemParams, full_liouvillian
from .observables import g2_zero, mean_photon, populations
from .pulses import as_generator_envelope, evaluate
from .spectra import (
    EmitterPhysical,
    FitError,
    coupling_from_purcell,
    extract_rates,
    fit_lorentzian,
    read_spectrum,
    weisskopf_wigner,
)

UNITS = {
    "time": "s",
    "n1": "1",
    "n2": "1",
    "rho_11": "1",
    "rho_22": "1",
    "rho_ee": "1",
    "n_gen": "1",
    "drive_envelope": "rad/s",
    "pump_envelope": "1/s",
    "g2_mode1": "1",
    "g2_mode2": "1",
}


@dataclass
class Table:
    """Named columns of equal length plus run diagnostics."""

    columns: dict
    diagnostics: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)

    def names(self) -> list:
        return list(self.columns)

    def as_array(self) -> np.ndarray:
        return np.column_stack([np.asarray(v, dtype=float) for v in self.columns.values()])


def _envelopes(scn: Scenario, times) -> tuple[np.ndarray, np.ndarray]:
    drive = np.full(times.shape, float(np.real(scn.params.drive)))
    pump = np.full(times.shape, scn.params.pump)
    if scn.drive_train is not None:
        drive = drive + evaluate(scn.drive_train, times)
    if scn.pump_train is not None:
        pump = pump + evaluate(scn.pump_train, times)
    return drive, pump


def _n_gen(times, n2, Gamma2) -> np.ndarray:
    return Gamma2 * cumulative_trapezoid(n2, times, initial=0.0)


def effective_series(scn: Scenario, times) -> tuple[dict, dict]:
    """Emitter populations and slaved photon numbers from the effective model."""
    integ = scn.integrator
    traj = evolve_effective(
        scn.params, times, drive_train=scn.drive_train, pump_train=scn.pump_train,
        rtol=integ["rtol"], atol=integ["atol"], method=integ["method"],
        max_evaluations=integ["max_evaluations"],
    )
    drive, _ = _envelopes(scn, times)
    rho = traj.states
    n1, n2 = adiabatic_photon_numbers(rho, scn.params, drive=drive)
    out = {
        "rho_11": rho[:, 0, 0].real,
        "rho_22": rho[:, 1, 1].real,
        "rho_ee": rho[:, 2, 2].real,
        "n1": n1,
        "n2": n2,
    }
    return out, traj.diagnostics


def full_generator(params: SystemParams, space: SpaceConfig, drive_train=None, pump_train=None):
    gen = TimeDependentGenerator(full_liouvillian(params, space))
    for train, which in ((drive_train, "drive"), (pump_train, "pump")):
        if train is not None:
            gen = gen.add(*as_generator_envelope(train, which, params, space))
    return gen


def full_series(scn: Scenario, times) -> tuple[dict, dict]:
    """Same observables from the full emitter-plus-modes model."""
    space = scn.space
    gen = full_generator(scn.params, space, scn.drive_train, scn.pump_train)
    ops = {
        "rho_11": embed(emitter_flip("1", "1"), "emitter", space),
        "rho_22": embed(emitter_flip("2", "2"), "emitter", space),
        "rho_ee": embed(emitter_flip("e", "e"), "emitter", space),
        "n1": embed(number(space.n_max1), "mode1", space),
        "n2": embed(number(space.n_max2), "mode2", space),
    }
    integ = scn.integrator
    traj = evolve(
        gen, ground_state(space), times, rtol=integ["rtol"], atol=integ["atol"], method=integ["method"],
        max_evaluations=integ["max_evaluations"], expect=ops, store_states=False,
    )
    return dict(traj.expect), traj.diagnostics


def _select(series: dict, scn: Scenario, times, suffix: str = "") -> dict:
    drive, pump = _envelopes(scn, times)
    extra = {
        "n_gen": _n_gen(times, series["n2"], scn.params.Gamma2),
        "drive_envelope": drive,
        "pump_envelope": pump,
    }
    out = {}
    for name in scn.observables:
        value = series[name] if name in series else extra[name]
        out[name + suffix] = np.asarray(value, dtype=float)
    return out


def _summary(columns: dict) -> dict:
    return {f"final_{k}": float(v[-1]) for k, v in columns.items() if k != "time"}


def simulate(scn: Scenario) -> Table:
    """Time series of the requested observables on the configured grid."""
    if "time" not in scn.raw:
        raise ConfigError("simulate needs a time section")
    times = scn.times
    columns = {"time": times}
    diagnostics = {}
    runs = {"effective": [("effective", "")], "full": [("full", "")],
            "both": [("full", "_full"), ("effective", "_eff")]}[scn.model]
    for model, suffix in runs:
        series, diag = (full_series if model == "full" else effective_series)(scn, times)
        columns.update(_select(series, scn, times, suffix))
        diagnostics[model] = diag
    return Table(columns, diagnostics, _summary(columns))


# ----------------------------------------------------------------------------
# steady-state grids


def steady_observables(params: SystemParams, space: SpaceConfig, model: str, observables) -> dict:
    """Stationary values of ``observables`` for one parameter point."""
    if model == "effective":
        rho = steady_state_effective(params)
        p = populations(rho)
        n1, n2 = adiabatic_photon_numbers(rho, params)
        values = {"rho_11": p[0], "rho_22": p[1], "rho_ee": p[2], "n1": n1, "n2": n2}
    else:
        rho = steady_state(full_liouvillian(params, space))
        p = populations(rho, space)
        values = {"rho_11": p[0], "rho_22": p[1], "rho_ee": p[2],
                  "n1": mean_photon(rho, 1, space), "n2": mean_photon(rho, 2, space)}
        for name in observables:
            if name.startswith("g2_mode"):
                values[name] = g2_zero(rho, int(name[-1]), space)
    return {name: float(values[name]) for name in observables}


def _sweep_point(task):
    params, space, model, observables = task
    return steady_observables(params, space, model, observables)


def sweep(scn: Scenario, workers: int = 1) -> Table:
    """Steady states over the Cartesian product of the sweep axes.

    Points are independent; with ``workers > 1`` they are spread over a
    process pool.  Row order is the product order regardless of workers.
    """
    axes = sweep_axes(scn)
    names = [n for n, _ in axes]
    points = list(itertools.product(*(values for _, values in axes)))
    model = "full" if scn.model == "full" else "effective"
    if scn.model == "both":
        raise ConfigError("sweep supports model 'full' or 'effective'")
    tasks = [
        (scn.params.replace(**dict(zip(names, point))), scn.space, model, scn.observables)
        for point in points
    ]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_point, tasks))
    else:
        results = [_sweep_point(t) for t in tasks]
    columns = {name: np.array([p[i] for p in points]) for i, name in enumerate(names)}
    for obs in scn.observables:
        columns[obs] = np.array([r[obs] for r in results])
    summary = {f"max_{o}": float(np.max(columns[o])) for o in scn.observables}
    summary.update({f"min_{o}": float(np.min(columns[o])) for o in scn.observables})
    return Table(columns, {"points": len(points), "model": model}, summary)


# ----------------------------------------------------------------------------
# full vs effective comparison


def relative_deviation(reference, other) -> float:
    """``max_t |reference - other| / max_t |reference|``."""
    reference = np.asarray(reference)
    scale = float(np.max(np.abs(reference)))
    if scale == 0.0:
        raise ValueError("reference series is identically zero")
    return float(np.max(np.abs(reference - np.asarray(other))) / scale)


@dataclass
class ValidationReport:
    table: Table
    rho_ee_deviation: float
    n2_deviation: float
    min_deviation: Optional[float]
    max_deviation: Optional[float]

    @property
    def passed(self) -> bool:
        ok = True
        if self.min_deviation is not None:
            ok &= self.rho_ee_deviation >= self.min_deviation
        if self.max_deviation is not None:
            ok &= self.rho_ee_deviation <= self.max_deviation
        return bool(ok)


def validate(scn: Scenario) -> ValidationReport:
    """Run both models and compare ``rho_ee`` and ``n2`` along the trajectory."""
    if scn.model != "both":
        raise ConfigError("validate needs model: both")
    times = scn.times
    full, diag_full = full_series(scn, times)
    eff, diag_eff = effective_series(scn, times)
    dev_ee = relative_deviation(full["rho_ee"], eff["rho_ee"])
    dev_n2 = relative_deviation(full["n2"], eff["n2"])
    columns = {
        "time": times,
        "rho_ee_full": full["rho_ee"],
        "rho_ee_eff": eff["rho_ee"],
        "rho_ee_deviation": np.abs(full["rho_ee"] - eff["rho_ee"]) / np.max(np.abs(full["rho_ee"])),
        "n2_full": full["n2"],
        "n2_eff": eff["n2"],
        "n2_deviation": np.abs(full["n2"] - eff["n2"]) / np.max(np.abs(full["n2"])),
    }
    bounds = scn.raw.get("validate", {})
    table = Table(columns, {"full": diag_full, "effective": diag_eff},
                  {"max_rho_ee_deviation": dev_ee, "max_n2_deviation": dev_n2})
    return ValidationReport(table, dev_ee, dev_n2, bounds.get("min_deviation"), bounds.get("max_deviation"))


# ----------------------------------------------------------------------------
# spectra -> parameters


@dataclass
class ModeFit:
    Gamma_rad: float
    Gamma_nonrad: float
    eta: float
    center: float
    gamma_sp: float
    kappa: float


def fit_mode(spectrum_path, window, purcell_ratio: float, transition_frequency: float,
             emitter: dict, label: str) -> ModeFit:
    samples = read_spectrum(spectrum_path)
    try:
        sca = fit_lorentzian(samples, "scattered", window)
        abs_ = fit_lorentzian(samples, "absorbed", window) if "absorbed" in set(samples.channel) else None
        rates = extract_rates(sca, abs_)
    except (FitError, ValueError) as exc:
        where = f"window {list(window)}" if window is not None else "full range"
        raise FitError(f"{label} ({spectrum_path}, {where}): {exc}") from exc
    gamma_sp = weisskopf_wigner(EmitterPhysical(emitter["dipole"], emitter["permittivity"], transition_frequency))
    kappa = coupling_from_purcell(purcell_ratio, rates.eta, rates.Gamma, gamma_sp)
    return ModeFit(rates.Gamma_rad, rates.Gamma_nonrad, rates.eta, sca.center, gamma_sp, kappa)


def fit_parameters(scn: Scenario) -> dict:
    """Parameter fragment (``version``/``params``/``derived``) from the fit section."""
    block = scn.raw["fit"]
    base = scn.source.parent if scn.source else Path.cwd()
    params, derived = {}, {}
    for j in (1, 2):
        mode = block["modes"][f"mode{j}"]
        fit = fit_mode(base / mode["spectrum"], mode.get("window"), mode["purcell_ratio"],
                       mode["transition_frequency"], block["emitter"], f"mode{j}")
        params[f"gamma_rad{j}"] = fit.Gamma_rad
        params[f"gamma_nonrad{j}"] = fit.Gamma_nonrad
        params[f"kappa{j}"] = fit.kappa
        params[f"gamma_sp_e{j}"] = fit.gamma_sp
        derived[f"eta{j}"] = fit.eta
        derived[f"center{j}"] = fit.center
    return {"version": 1, "source": f"fit:{scn.name}", "params": params, "derived": derived}
