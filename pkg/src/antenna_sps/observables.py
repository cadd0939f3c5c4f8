"""Populations, photon numbers, generated-photon count and g2(0)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .hilbert import SpaceConfig

G2_FLOOR = 1e-30


@dataclass(frozen=True)
class ObservableSeries:
    label: str
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if np.shape(self.times) != np.shape(self.values):
            raise ValueError(f"series {self.label!r}: {np.size(self.values)} values for {np.size(self.times)} times")
        if not np.all(np.isfinite(self.values)):
            raise ValueError(f"series {self.label!r} contains non-finite values")


def _reshape(rho, config: SpaceConfig) -> np.ndarray:
    rho = np.asarray(rho)
    if rho.shape != (config.dim, config.dim):
        raise ValueError(f"state of shape {rho.shape} does not match space of dim {config.dim}")
    return rho.reshape(config.dims + config.dims)


def emitter_state(rho, config: Optional[SpaceConfig] = None) -> np.ndarray:
    """Reduced 3x3 emitter density matrix (identity for effective states)."""
    rho = np.asarray(rho)
    if rho.shape == (3, 3):
        return rho
    if config is None:
        raise ValueError("a SpaceConfig is needed to reduce a full-model state")
    return np.einsum("iabjab->ij", _reshape(rho, config))


def mode_distribution(rho, mode: int, config: SpaceConfig) -> np.ndarray:
    """Photon-number distribution of one mode."""
    r = _reshape(rho, config)
    if mode == 1:
        return np.einsum("xabxab->a", r).real
    if mode == 2:
        return np.einsum("xabxab->b", r).real
    raise ValueError(f"mode must be 1 or 2, got {mode!r}")


def populations(rho, config: Optional[SpaceConfig] = None) -> tuple[float, float, float]:
    """Emitter populations ``(p1, p2, pe)``."""
    p = np.real(np.diag(emitter_state(rho, config)))
    return float(p[0]), float(p[1]), float(p[2])


def mean_photon(rho, mode: int, config: SpaceConfig) -> float:
    dist = mode_distribution(rho, mode, config)
    return float(np.dot(np.arange(dist.size), dist))


def g2_zero(rho, mode: int, config: SpaceConfig, floor: float = G2_FLOOR) -> float:
    """``<a^dag a^dag a a> / <a^dag a>^2`` of one mode.

    Raises ``ValueError`` when the mode is essentially empty (mean below
    ``floor``) or truncated below two photons.  Fock populations that come
    out negative through solver roundoff are clipped to zero, so the
    result is never negative.
    """
    n_max = config.n_max1 if mode == 1 else config.n_max2
    if n_max < 2:
        raise ValueError("g2(0) needs a truncation of at least two photons")
    dist = np.clip(mode_distribution(rho, mode, config), 0.0, None)
    n = np.arange(dist.size)
    mean = float(np.dot(n, dist))
    if mean < floor:
        raise ValueError(f"g2(0) undefined: mean photon number {mean:.3e} below floor {floor:.0e}")
    return float(np.dot(n * (n - 1), dist)) / mean**2


def ceiling_population(rho, config: SpaceConfig) -> tuple[float, float]:
    """Population in the highest retained Fock state of each mode."""
    return (float(mode_distribution(rho, 1, config)[-1]), float(mode_distribution(rho, 2, config)[-1]))


def n_gen(n2: ObservableSeries, Gamma2: float) -> ObservableSeries:
    """Cumulative photons emitted from mode 2, trapezoid rule on the sample grid."""
    values = Gamma2 * cumulative_trapezoid(n2.values, n2.times, initial=0.0)
    return ObservableSeries("n_gen", n2.times, values)
