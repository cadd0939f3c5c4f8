"""Truncated Hilbert space: three-level emitter x Fock(mode 1) x Fock(mode 2).

Basis ordering (normative)::

    index = level * (n_max1 + 1) * (n_max2 + 1) + n1 * (n_max2 + 1) + n2

with emitter levels ordered ``("1", "2", "e")``.  Operators are stored as
complex ``scipy.sparse`` CSR matrices; density matrices are dense
``numpy`` arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

LEVELS = ("1", "2", "e")
SLOTS = ("emitter", "mode1", "mode2")


def level_index(label) -> int:
    """Position of an emitter level in the basis ordering."""
    key = str(label)
    if key not in LEVELS:
        raise ValueError(f"invalid emitter level {label!r}; expected one of {LEVELS}")
    return LEVELS.index(key)


@dataclass(frozen=True)
class SpaceConfig:
    """Photon-number truncation of the two antenna modes."""

    n_max1: int = 10
    n_max2: int = 5

    def __post_init__(self):
        for name in ("n_max1", "n_max2"):
            value = getattr(self, name)
            if int(value) != value or value < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {value!r}")

    @property
    def dims(self) -> tuple[int, int, int]:
        return (3, self.n_max1 + 1, self.n_max2 + 1)

    @property
    def dim(self) -> int:
        return 3 * (self.n_max1 + 1) * (self.n_max2 + 1)

    def index(self, level, n1: int, n2: int) -> int:
        if not (0 <= n1 <= self.n_max1 and 0 <= n2 <= self.n_max2):
            raise ValueError(f"photon numbers ({n1}, {n2}) outside truncation {self.dims[1:]}")
        return (level_index(level) * (self.n_max1 + 1) + n1) * (self.n_max2 + 1) + n2

    def basis(self, level, n1: int, n2: int) -> np.ndarray:
        ket = np.zeros(self.dim, dtype=complex)
        ket[self.index(level, n1, n2)] = 1.0
        return ket

    def projector(self, level, n1: int, n2: int) -> np.ndarray:
        """Density matrix of a single basis state."""
        rho = np.zeros((self.dim, self.dim), dtype=complex)
        i = self.index(level, n1, n2)
        rho[i, i] = 1.0
        return rho

    def slot_dim(self, slot: str) -> int:
        try:
            return self.dims[SLOTS.index(slot)]
        except ValueError:
            raise ValueError(f"invalid slot {slot!r}; expected one of {SLOTS}") from None


def annihilation(n_max: int) -> sp.csr_matrix:
    """Bosonic lowering operator on Fock states ``|0>..|n_max>``."""
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    n = np.arange(1, n_max + 1)
    return sp.diags(np.sqrt(n).astype(complex), 1, shape=(n_max + 1, n_max + 1), format="csr")


def number(n_max: int) -> sp.csr_matrix:
    return sp.diags(np.arange(n_max + 1).astype(complex), 0, format="csr")


def emitter_flip(k, l) -> sp.csr_matrix:
    """Flip operator ``|k><l|`` on the emitter, levels labelled ``1``, ``2`` or ``e``."""
    op = sp.lil_matrix((3, 3), dtype=complex)
    op[level_index(k), level_index(l)] = 1.0
    return op.tocsr()


def embed(op, slot: str, config: SpaceConfig) -> sp.csr_matrix:
    """Lift a subsystem operator to the full space (identity on the other factors)."""
    op = sp.csr_matrix(op, dtype=complex)
    local = config.slot_dim(slot)
    if op.shape != (local, local):
        raise ValueError(f"operator shape {op.shape} does not match {slot} dimension {local}")
    factors = [sp.identity(d, dtype=complex, format="csr") for d in config.dims]
    factors[SLOTS.index(slot)] = op
    return sp.kron(sp.kron(factors[0], factors[1]), factors[2], format="csr")


def dag(op):
    return op.conj().T


def expectation(rho, op) -> complex:
    """``Tr(rho @ op)``."""
    rho = np.asarray(rho)
    if rho.shape != op.shape:
        raise ValueError(f"dimension mismatch: rho {rho.shape} vs operator {op.shape}")
    if sp.issparse(op):
        # Tr(rho op) = sum_ij rho_ji op_ij
        coo = op.tocoo()
        return complex(np.sum(rho[coo.col, coo.row] * coo.data))
    return complex(np.einsum("ij,ji->", rho, op))


def density_diagnostics(rho) -> dict:
    """Trace, Hermiticity and positivity deviations of a density matrix."""
    rho = np.asarray(rho)
    scale = max(np.max(np.abs(rho)), 1e-300)
    return {
        "trace_error": abs(np.trace(rho) - 1.0),
        "hermiticity_error": float(np.max(np.abs(rho - rho.conj().T))),
        "relative_hermiticity_error": float(np.max(np.abs(rho - rho.conj().T)) / scale),
        "min_eigenvalue": float(np.min(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)))),
    }


def check_density_matrix(rho, *, hermiticity=1e-10, trace=1e-8, positivity=-1e-8) -> None:
    """Raise ``ValueError`` when ``rho`` violates the density-matrix invariants."""
    d = density_diagnostics(rho)
    if d["relative_hermiticity_error"] > hermiticity:
        raise ValueError(f"density matrix not Hermitian: {d['relative_hermiticity_error']:.3e}")
    if d["trace_error"] > trace:
        raise ValueError(f"density matrix trace deviates from one by {d['trace_error']:.3e}")
    if d["min_eigenvalue"] < positivity:
        raise ValueError(f"density matrix has negative eigenvalue {d['min_eigenvalue']:.3e}")


def ground_state(config: SpaceConfig) -> np.ndarray:
    """Emitter in ``|1>``, both modes in vacuum."""
    return config.projector("1", 0, 0)
