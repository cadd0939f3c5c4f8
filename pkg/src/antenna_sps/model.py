"""Hamiltonian, dissipators and Liouvillian of the emitter-antenna system.

All quoted rates and couplings enter the equations as angular rates, in the
frame rotating at the laser frequency (hbar = 1).  Vectorization stacks
columns: ``vec(A X B) = (B.T kron A) vec(X)``.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .hilbert import SpaceConfig, annihilation, dag, embed, emitter_flip

_RATE_FIELDS = (
    "gamma_rad1",
    "gamma_nonrad1",
    "gamma_rad2",
    "gamma_nonrad2",
    "gamma_sp_e1",
    "gamma_sp_e2",
    "gamma_12",
    "pump",
    "gamma_deph_1e",
    "gamma_deph_2e",
    "gamma_deph_12",
)


@dataclass(frozen=True)
class SystemParams:
    """Frequencies (rad/s), couplings (rad/s) and rates (1/s) of the hybrid system.

    ``omega_e``, ``omega_1`` and ``omega_2`` are the emitter level energies,
    ``omega_m1``/``omega_m2`` the antenna mode frequencies and ``omega_L`` the
    laser.  Only the combinations appearing in the rotating-frame
    Hamiltonian matter, so scenarios usually set them all to zero
    ("everything resonant").
    """

    omega_e: float = 0.0
    omega_1: float = 0.0
    omega_2: float = 0.0
    omega_L: float = 0.0
    omega_m1: float = 0.0
    omega_m2: float = 0.0
    kappa1: complex = 0.0
    kappa2: complex = 0.0
    drive: complex = 0.0
    gamma_rad1: float = 0.0
    gamma_nonrad1: float = 0.0
    gamma_rad2: float = 0.0
    gamma_nonrad2: float = 0.0
    gamma_sp_e1: float = 0.0
    gamma_sp_e2: float = 0.0
    gamma_12: float = 0.0
    pump: float = 0.0
    gamma_deph_1e: float = 0.0
    gamma_deph_2e: float = 0.0
    gamma_deph_12: float = 0.0

    def __post_init__(self):
        for name in _RATE_FIELDS:
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise ValueError(f"rate {name} must be finite and >= 0, got {value!r}")

    @property
    def Gamma1(self) -> float:
        return self.gamma_rad1 + self.gamma_nonrad1

    @property
    def Gamma2(self) -> float:
        return self.gamma_rad2 + self.gamma_nonrad2

    @property
    def eta1(self) -> float:
        return _efficiency(self.gamma_rad1, self.gamma_nonrad1)

    @property
    def eta2(self) -> float:
        return _efficiency(self.gamma_rad2, self.gamma_nonrad2)

    def require_lossy_modes(self):
        if self.Gamma1 <= 0 or self.Gamma2 <= 0:
            raise ValueError("both antenna modes need a positive total loss rate")

    def replace(self, **changes) -> "SystemParams":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


def _efficiency(rad: float, nonrad: float) -> float:
    total = rad + nonrad
    if total <= 0:
        raise ValueError("efficiency undefined for a lossless mode")
    return rad / total


@dataclass(frozen=True)
class CollapseTerm:
    rate: float
    operator: sp.csr_matrix
    label: str = ""

    def __post_init__(self):
        if self.rate < 0:
            raise ValueError(f"collapse rate must be >= 0, got {self.rate}")


@dataclass(frozen=True)
class Liouvillian:
    """Sparse generator acting on column-stacked ``vec(rho)``."""

    matrix: sp.csr_matrix
    dim: int

    def __post_init__(self):
        if self.matrix.shape != (self.dim**2, self.dim**2):
            raise ValueError(f"Liouvillian shape {self.matrix.shape} inconsistent with dim {self.dim}")

    def apply(self, rho) -> np.ndarray:
        rho = np.asarray(rho)
        return unvec(self.matrix @ vec(rho), self.dim)

    def __add__(self, other: "Liouvillian") -> "Liouvillian":
        if self.dim != other.dim:
            raise ValueError(f"cannot add Liouvillians of dims {self.dim} and {other.dim}")
        return Liouvillian((self.matrix + other.matrix).tocsr(), self.dim)

    def scaled(self, factor) -> "Liouvillian":
        return Liouvillian((factor * self.matrix).tocsr(), self.dim)


def vec(rho) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v, dim: int) -> np.ndarray:
    return np.asarray(v).reshape((dim, dim), order="F")


def mode_operators(config: SpaceConfig):
    a1 = embed(annihilation(config.n_max1), "mode1", config)
    a2 = embed(annihilation(config.n_max2), "mode2", config)
    return a1, a2


def sigma(k, l, config: SpaceConfig) -> sp.csr_matrix:
    return embed(emitter_flip(k, l), "emitter", config)


def drive_operator(config: SpaceConfig) -> sp.csr_matrix:
    """``a1^dag``; the drive term is ``Omega * a1^dag + h.c.``."""
    a1, _ = mode_operators(config)
    return dag(a1).tocsr()


def build_hamiltonian(params: SystemParams, config: SpaceConfig) -> sp.csr_matrix:
    """Rotating-frame Hamiltonian (hbar = 1) on the truncated space."""
    p = params
    a1, a2 = mode_operators(config)
    H = (p.omega_e - p.omega_L) * sigma("e", "e", config)
    H = H + p.omega_1 * sigma("1", "1", config) + p.omega_2 * sigma("2", "2", config)
    H = H + (p.omega_m1 - p.omega_L) * (dag(a1) @ a1) + (p.omega_m2 - p.omega_L) * (dag(a2) @ a2)
    for j, (kappa, a) in enumerate(((p.kappa1, a1), (p.kappa2, a2)), start=1):
        coupling = kappa * (dag(a) @ sigma(str(j), "e", config))
        H = H + coupling + dag(coupling)
    drive = p.drive * dag(a1)
    H = H + drive + dag(drive)
    H = sp.csr_matrix(H, dtype=complex)
    H.eliminate_zeros()
    return H


def collapse_terms(params: SystemParams, config: SpaceConfig) -> list[CollapseTerm]:
    """Dissipators in fixed order; zero-rate terms are dropped."""
    p = params
    a1, a2 = mode_operators(config)
    s = lambda k, l: sigma(k, l, config)  # noqa: E731
    candidates = [
        (p.Gamma1, a1, "mode1 loss"),
        (p.Gamma2, a2, "mode2 loss"),
        (p.gamma_sp_e1, s("1", "e"), "spontaneous e->1"),
        (p.gamma_sp_e2, s("2", "e"), "spontaneous e->2"),
        (p.gamma_12, s("1", "2"), "spin transfer 2->1"),
        (p.pump, s("1", "2"), "pump 2->1"),
        (p.gamma_deph_1e, s("1", "1") - s("e", "e"), "dephasing 1e"),
        (p.gamma_deph_2e, s("2", "2") - s("e", "e"), "dephasing 2e"),
        (p.gamma_deph_12, s("1", "1") - s("2", "2"), "dephasing 12"),
    ]
    return [CollapseTerm(float(rate), sp.csr_matrix(op), label) for rate, op, label in candidates if rate > 0]


def hamiltonian_superoperator(H) -> sp.csr_matrix:
    """``-i[H, .]`` in column-stacking form."""
    H = sp.csr_matrix(H, dtype=complex)
    eye = sp.identity(H.shape[0], dtype=complex, format="csr")
    return (-1j * (sp.kron(eye, H) - sp.kron(H.T, eye))).tocsr()


def dissipator(C) -> sp.csr_matrix:
    """``C . C^dag - (C^dag C . + . C^dag C)/2`` in column-stacking form."""
    C = sp.csr_matrix(C, dtype=complex)
    eye = sp.identity(C.shape[0], dtype=complex, format="csr")
    CdC = (dag(C) @ C).tocsr()
    return (sp.kron(C.conj(), C) - 0.5 * sp.kron(eye, CdC) - 0.5 * sp.kron(CdC.T, eye)).tocsr()


def build_liouvillian(H, terms: list[CollapseTerm]) -> Liouvillian:
    dim = H.shape[0]
    if H.shape != (dim, dim):
        raise ValueError(f"Hamiltonian must be square, got {H.shape}")
    L = hamiltonian_superoperator(H)
    for term in terms:
        if term.operator.shape != (dim, dim):
            raise ValueError(f"collapse operator {term.label!r} has shape {term.operator.shape}, expected {(dim, dim)}")
        L = L + term.rate * dissipator(term.operator)
    L = sp.csr_matrix(L)
    L.eliminate_zeros()
    return Liouvillian(L, dim)


def full_liouvillian(params: SystemParams, config: SpaceConfig) -> Liouvillian:
    return build_liouvillian(build_hamiltonian(params, config), collapse_terms(params, config))
