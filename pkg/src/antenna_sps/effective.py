"""Adiabatically eliminated three-level model.

When the antenna losses dominate every other rate, both modes can be slaved
to the emitter.  What remains is a three-level emitter (levels ``1, 2, e``)
driven on ``1 <-> e`` by an effective field, with Purcell-enhanced decay
rates and a coupling-induced shift of the excited level.  Photon numbers
are then reconstructed from the emitter state.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .dynamics import TimeDependentGenerator, Trajectory, evolve, steady_state
from .hilbert import emitter_flip
from .model import CollapseTerm, Liouvillian, SystemParams, build_liouvillian, dissipator

RECOMMENDED_MULTIPLIER = 10.0


@dataclass(frozen=True)
class EffectiveParams:
    omega_e_eff: float
    drive_eff: complex
    gamma1_eff: float
    gamma2_eff: float
    delta1: float
    Gamma_1e: float
    omega_1: float
    omega_2: float
    omega_L: float
    gamma_12: float
    pump: float
    gamma_deph_1e: float
    gamma_deph_2e: float
    gamma_deph_12: float


def local_flip(k, l) -> sp.csr_matrix:
    return emitter_flip(k, l)


def _lorentz_denominator(params: SystemParams, j: int) -> float:
    detuning = (params.omega_m1 if j == 1 else params.omega_m2) - params.omega_L
    Gamma = params.Gamma1 if j == 1 else params.Gamma2
    return detuning**2 + (Gamma / 2) ** 2


def drive_transfer(params: SystemParams) -> complex:
    """Effective emitter drive per unit (real) antenna drive."""
    params.require_lossy_modes()
    return -1j * np.conj(params.kappa1) / (1j * (params.omega_m1 - params.omega_L) + params.Gamma1 / 2)


def effective_params(params: SystemParams) -> EffectiveParams:
    params.require_lossy_modes()
    p = params
    shift = 0.0
    for j, kappa, omega_m in ((1, p.kappa1, p.omega_m1), (2, p.kappa2, p.omega_m2)):
        shift += abs(kappa) ** 2 * (omega_m - p.omega_L) / _lorentz_denominator(p, j)
    omega_e_eff = p.omega_e + shift
    gamma1 = p.gamma_sp_e1 + abs(p.kappa1) ** 2 * p.Gamma1 / _lorentz_denominator(p, 1)
    gamma2 = p.gamma_sp_e2 + abs(p.kappa2) ** 2 * p.Gamma2 / _lorentz_denominator(p, 2)
    return EffectiveParams(
        omega_e_eff=omega_e_eff,
        drive_eff=complex(drive_transfer(p) * p.drive),
        gamma1_eff=gamma1,
        gamma2_eff=gamma2,
        delta1=omega_e_eff - p.omega_L - p.omega_1,
        Gamma_1e=gamma1 + gamma2 + p.gamma_deph_12 + 4 * p.gamma_deph_1e + p.gamma_deph_2e,
        omega_1=p.omega_1,
        omega_2=p.omega_2,
        omega_L=p.omega_L,
        gamma_12=p.gamma_12,
        pump=p.pump,
        gamma_deph_1e=p.gamma_deph_1e,
        gamma_deph_2e=p.gamma_deph_2e,
        gamma_deph_12=p.gamma_deph_12,
    )


def effective_hamiltonian(eff: EffectiveParams, drive_eff: Optional[complex] = None) -> sp.csr_matrix:
    omega = eff.drive_eff if drive_eff is None else drive_eff
    f = local_flip
    H = (
        (eff.omega_e_eff - eff.omega_L) * f("e", "e")
        + eff.omega_1 * f("1", "1")
        + eff.omega_2 * f("2", "2")
        + omega * f("e", "1")
        + np.conj(omega) * f("1", "e")
    )
    return sp.csr_matrix(H, dtype=complex)


def effective_collapse_terms(eff: EffectiveParams, pump: Optional[float] = None) -> list[CollapseTerm]:
    f = local_flip
    candidates = [
        (eff.gamma1_eff, f("1", "e"), "decay e->1"),
        (eff.gamma2_eff, f("2", "e"), "decay e->2"),
        (eff.gamma_12, f("1", "2"), "spin transfer 2->1"),
        (eff.pump if pump is None else pump, f("1", "2"), "pump 2->1"),
        (eff.gamma_deph_1e, f("1", "1") - f("e", "e"), "dephasing 1e"),
        (eff.gamma_deph_2e, f("2", "2") - f("e", "e"), "dephasing 2e"),
        (eff.gamma_deph_12, f("1", "1") - f("2", "2"), "dephasing 12"),
    ]
    return [CollapseTerm(float(r), sp.csr_matrix(op), label) for r, op, label in candidates if r > 0]


def effective_liouvillian(eff: EffectiveParams, *, drive_eff: Optional[complex] = None,
                          pump: Optional[float] = None) -> Liouvillian:
    return build_liouvillian(effective_hamiltonian(eff, drive_eff), effective_collapse_terms(eff, pump))


def unit_drive_liouvillian(params: SystemParams) -> Liouvillian:
    """Generator of a unit real antenna drive, mapped to the emitter."""
    c = drive_transfer(params)
    H = c * local_flip("e", "1") + np.conj(c) * local_flip("1", "e")
    return build_liouvillian(sp.csr_matrix(H, dtype=complex), [])


def effective_generator(params: SystemParams, drive_train=None, pump_train=None) -> TimeDependentGenerator:
    """Constant part from ``params`` plus optional pulse-train addends."""
    eff = effective_params(params)
    gen = TimeDependentGenerator(effective_liouvillian(eff))
    if drive_train is not None:
        gen = gen.add(drive_train, unit_drive_liouvillian(params))
    if pump_train is not None:
        if pump_train.amplitude < 0:
            raise ValueError("pump trains must have non-negative amplitude")
        gen = gen.add(pump_train, Liouvillian(dissipator(local_flip("1", "2")), 3))
    return gen


def ground_state() -> np.ndarray:
    rho = np.zeros((3, 3), dtype=complex)
    rho[0, 0] = 1.0
    return rho


def evolve_effective(params: SystemParams, times, rho0=None, *, drive_train=None, pump_train=None,
                     rtol: float = 1e-8, atol: float = 1e-10, **kwargs) -> Trajectory:
    """Evolve the emitter density matrix (starting in ``|1>`` by default)."""
    gen = effective_generator(params, drive_train, pump_train)
    rho0 = ground_state() if rho0 is None else rho0
    return evolve(gen, rho0, times, rtol=rtol, atol=atol, **kwargs)


def steady_state_effective(params: SystemParams) -> np.ndarray:
    return steady_state(effective_liouvillian(effective_params(params)))


def adiabatic_photon_numbers(rho_qd, params: SystemParams, drive=None):
    """Mode occupations slaved to the emitter state(s).

    ``rho_qd`` may be a single 3x3 matrix or a stack ``(K, 3, 3)``;
    ``drive`` overrides ``params.drive`` (scalar or per-sample array) for
    pulsed runs.
    """
    rho = np.asarray(rho_qd)
    omega = params.drive if drive is None else np.asarray(drive)
    k1 = params.kappa1
    rho_ee = rho[..., 2, 2].real
    rho_1e = rho[..., 0, 2]
    cross = 2 * np.real(omega * np.conj(k1) * rho_1e)
    n1 = (abs(k1) ** 2 * rho_ee + cross + np.abs(omega) ** 2) / _lorentz_denominator(params, 1)
    n2 = abs(params.kappa2) ** 2 * rho_ee / _lorentz_denominator(params, 2)
    if np.ndim(n1) == 0:
        return float(n1), float(n2)
    return n1, n2


def xi(drive_eff: complex, eff: EffectiveParams) -> float:
    """Ratio ``rho_11 + rho_ee`` over ``rho_22`` in the unpumped steady state."""
    if eff.gamma2_eff <= 0:
        raise ValueError("xi requires a positive effective decay rate into |2>")
    if abs(drive_eff) == 0:
        raise ZeroDivisionError("xi diverges for zero effective drive")
    bracket = 2 + (eff.gamma1_eff + eff.gamma2_eff) * (eff.Gamma_1e**2 + 4 * eff.delta1**2) / (
        4 * eff.Gamma_1e * abs(drive_eff) ** 2
    )
    return eff.gamma_12 / eff.gamma2_eff * bracket


def stationary_rho22(params: SystemParams) -> float:
    """``1 / (1 + xi)`` at the drive in ``params``."""
    eff = effective_params(params)
    return 1.0 / (1.0 + xi(eff.drive_eff, eff))


def threshold(params: SystemParams) -> float:
    """Drive strength the antenna drive has to exceed by a wide margin.

    Resonant form; efficient triggering needs ``|drive|`` at least
    ``RECOMMENDED_MULTIPLIER`` times this value.
    """
    params.require_lossy_modes()
    k1, k2 = abs(params.kappa1), abs(params.kappa2)
    if k1 == 0 or k2 == 0:
        raise ValueError("threshold undefined without coupling to both modes")
    G1, G2 = params.Gamma1, params.Gamma2
    return G1 * np.sqrt(G2 * params.gamma_12) / (2 * k1 * k2) * (k1**2 / G1 + k2**2 / G2)


@dataclass(frozen=True)
class DriveRequirement:
    threshold: float
    recommended_multiplier: float = RECOMMENDED_MULTIPLIER

    @property
    def recommended_drive(self) -> float:
        return self.threshold * self.recommended_multiplier


def drive_requirement(params: SystemParams) -> DriveRequirement:
    return DriveRequirement(threshold(params))
