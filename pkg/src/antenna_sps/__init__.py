"""Triggered single-photon generation in a lambda emitter coupled to a two-mode nanoantenna.

The package provides the full truncated master-equation model, the
adiabatically eliminated three-level model, the derived observables
(n_gen, g2(0)), spectral parameter extraction and a scenario CLI.
"""

from .hilbert import SpaceConfig, annihilation, embed, emitter_flip, expectation
from .model import SystemParams, build_hamiltonian, build_liouvillian, collapse_terms
from .dynamics import TimeDependentGenerator, Trajectory, evolve, steady_state
from .effective import (
    EffectiveParams,
    adiabatic_photon_numbers,
    effective_params,
    evolve_effective,
    stationary_rho22,
    steady_state_effective,
    threshold,
    xi,
)
from .observables import g2_zero, mean_photon, n_gen, populations
from .pulses import PulseTrain

__version__ = "0.1.0"

__all__ = [
    "SpaceConfig",
    "annihilation",
    "embed",
    "emitter_flip",
    "expectation",
    "SystemParams",
    "build_hamiltonian",
    "build_liouvillian",
    "collapse_terms",
    "TimeDependentGenerator",
    "Trajectory",
    "evolve",
    "steady_state",
    "EffectiveParams",
    "adiabatic_photon_numbers",
    "effective_params",
    "evolve_effective",
    "stationary_rho22",
    "steady_state_effective",
    "threshold",
    "xi",
    "g2_zero",
    "mean_photon",
    "n_gen",
    "populations",
    "PulseTrain",
]
