"""Gaussian pulse trains for the time-dependent drive and pump."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class PulseTrain:
    """``amplitude * sum_i exp(-(t - t_i)^2 / (2 width^2))``.

    Amplitudes are real: the drive envelope scales the drive term of the
    Hamiltonian, the pump envelope scales a dissipator rate.
    """

    amplitude: float
    centers: tuple
    width: float

    def __init__(self, amplitude: float, centers: Sequence[float], width: float):
        if isinstance(amplitude, complex) or not np.isfinite(amplitude):
            raise ValueError("pulse amplitude must be a finite real number")
        if not width > 0:
            raise ValueError(f"pulse width must be positive, got {width}")
        centers = tuple(float(c) for c in centers)
        if not all(np.isfinite(centers)):
            raise ValueError("pulse centers must be finite")
        object.__setattr__(self, "amplitude", float(amplitude))
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "width", float(width))

    def __call__(self, t):
        return evaluate(self, t)

    def concatenate(self, other: "PulseTrain") -> "PulseTrain":
        if (self.amplitude, self.width) != (other.amplitude, other.width):
            raise ValueError("only trains with equal amplitude and width can be concatenated")
        return PulseTrain(self.amplitude, self.centers + other.centers, self.width)


def evaluate(train: PulseTrain, t):
    """Envelope value at ``t`` (scalar or array)."""
    t = np.asarray(t, dtype=float)
    if not train.centers or train.amplitude == 0.0:
        return np.zeros_like(t) if t.ndim else 0.0
    c = np.asarray(train.centers)
    z = (t[..., None] - c) / train.width
    out = train.amplitude * np.exp(-0.5 * z * z).sum(axis=-1)
    return out if t.ndim else float(out)


def as_generator_envelope(train: PulseTrain, which: str, params, config=None, *, effective: bool = False):
    """``(envelope, addend)`` pair for a :class:`TimeDependentGenerator`.

    ``which="drive"`` returns the Liouvillian of a unit real drive
    (``a1^dag + a1`` in the full model, the corresponding effective drive
    on the emitter otherwise); ``which="pump"`` returns the unit-rate
    ``sigma_12`` dissipator.  ``config`` is required for the full model.
    """
    from . import effective as eff_mod
    from .model import Liouvillian, build_liouvillian, dissipator, drive_operator, sigma
    from .hilbert import dag

    if which == "pump":
        if train.amplitude < 0:
            raise ValueError("pump trains must have non-negative amplitude")
        if effective:
            op = eff_mod.local_flip("1", "2")
            dim = 3
        else:
            op = sigma("1", "2", config)
            dim = config.dim
        addend = Liouvillian(dissipator(op), dim)
    elif which == "drive":
        if effective:
            addend = eff_mod.unit_drive_liouvillian(params)
        else:
            d = drive_operator(config)
            addend = build_liouvillian(d + dag(d), [])
    else:
        raise ValueError(f"unknown envelope target {which!r}; expected 'drive' or 'pump'")
    return train, addend
