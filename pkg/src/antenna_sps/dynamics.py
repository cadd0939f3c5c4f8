"""Time propagation and steady states of Lindblad generators.

Propagation uses scipy's variable-order BDF integrator with the (sparse)
generator as analytic Jacobian, so stiffness ratios of 1e7 and beyond are
handled without step-size collapse.  Constant generators can instead be
propagated with the action of the matrix exponential, which avoids the
sparse factorizations that dominate BDF on large truncations.  Steady states come from a direct sparse
solve with one equation swapped for the trace condition.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import solve_ivp

from .model import Liouvillian, unvec, vec

logger = logging.getLogger(__name__)

# generators with at most this many vectorized entries are handled densely
_DENSE_LIMIT = 400


class IntegrationError(RuntimeError):
    """The integrator failed, exceeded its budget or produced non-finite values."""


class SteadyStateError(RuntimeError):
    """No unique steady state could be computed."""


@dataclass
class TimeDependentGenerator:
    """``L(t) = static + sum_k envelope_k(t) * addend_k``."""

    static: Liouvillian
    addends: list = field(default_factory=list)

    def __post_init__(self):
        for _, addend in self.addends:
            if addend.dim != self.static.dim:
                raise ValueError("addend dimension does not match the static generator")

    @property
    def dim(self) -> int:
        return self.static.dim

    def add(self, envelope: Callable[[float], float], addend: Liouvillian) -> "TimeDependentGenerator":
        return TimeDependentGenerator(self.static, [*self.addends, (envelope, addend)])

    @property
    def max_step(self) -> float:
        """Largest safe step: half the narrowest pulse width among the envelopes."""
        widths = [getattr(env, "width", np.inf) for env, _ in self.addends]
        return 0.5 * min(widths, default=np.inf)

    def at(self, t: float) -> Liouvillian:
        L = self.static.matrix
        for envelope, addend in self.addends:
            L = L + envelope(t) * addend.matrix
        return Liouvillian(sp.csr_matrix(L), self.dim)


@dataclass
class Trajectory:
    times: np.ndarray
    states: Optional[np.ndarray]
    expect: dict
    diagnostics: dict

    def series(self, label: str) -> np.ndarray:
        return self.expect[label]


def _as_generator(gen) -> TimeDependentGenerator:
    if isinstance(gen, TimeDependentGenerator):
        return gen
    if isinstance(gen, Liouvillian):
        return TimeDependentGenerator(gen)
    raise TypeError(f"expected a Liouvillian or TimeDependentGenerator, got {type(gen).__name__}")


def evolve(
    gen,
    rho0,
    times,
    rtol: float = 1e-8,
    atol: float = 1e-10,
    *,
    expect: Optional[dict] = None,
    store_states: bool = True,
    max_evaluations: int = 2_000_000,
    trace_tolerance: float = 1e-7,
    positivity_checks: int = 10,
    first_step: Optional[float] = None,
    max_step: Optional[float] = None,
    method: str = "bdf",
) -> Trajectory:
    """Integrate ``d vec(rho)/dt = L(t) vec(rho)`` and sample at ``times``.

    Parameters
    ----------
    gen : Liouvillian or TimeDependentGenerator
    rho0 : (D, D) array
    times : increasing sample times; ``times[0]`` is the initial time.
    expect : mapping label -> operator; expectation series are recorded
        for each sample.  Useful with ``store_states=False`` for large D.
    trace_tolerance : samples whose trace drifts further than this from one
        abort the run; smaller drifts are renormalized at the sample.
    max_step : defaults to :attr:`TimeDependentGenerator.max_step` so that
        pulses cannot be stepped over.
    method : ``"bdf"`` (default) or ``"expm"``.  The latter is exact up to
        the expm_multiply truncation and only accepts constant generators;
        ``rtol``/``atol`` and the step controls are ignored.

    Raises
    ------
    IntegrationError
        On solver failure, budget exhaustion, non-finite values or trace drift.
    """
    gen = _as_generator(gen)
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 1 or not np.all(np.isfinite(times)):
        raise ValueError("times must be a finite one-dimensional grid")
    if np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly increasing")
    if rtol <= 0 or atol <= 0:
        raise ValueError("rtol and atol must be positive")
    rho0 = np.asarray(rho0, dtype=complex)
    D = gen.dim
    if rho0.shape != (D, D):
        raise ValueError(f"rho0 has shape {rho0.shape}, generator expects {(D, D)}")

    if method not in ("bdf", "expm"):
        raise ValueError(f"unknown method {method!r}; expected 'bdf' or 'expm'")
    y0 = vec(rho0)
    counter = {"rhs": 0}
    if method == "expm":
        if gen.addends:
            raise ValueError("method='expm' requires a time-independent generator")
        columns = _expm_columns(gen.static.matrix.tocsr(), y0, times)
        info = {"nfev": 0, "njev": 0, "nlu": 0}
    else:
        ys, info = _bdf_columns(gen, y0, times, rtol, atol, counter, max_evaluations, first_step, max_step)
        columns = (ys[:, k] for k in range(times.size))

    expect = dict(expect or {})
    series = {label: np.empty(times.size) for label in expect}
    ops = {label: sp.csr_matrix(op) for label, op in expect.items()}
    states = np.empty((times.size, D, D), dtype=complex) if store_states else None
    check_at = _check_points(times.size, positivity_checks)
    samples = []
    max_trace = 0.0
    max_herm = 0.0
    for k, y in enumerate(columns):
        if not np.all(np.isfinite(y)):
            raise IntegrationError(f"non-finite state at t={times[k]:.6e}")
        rho = unvec(y, D)
        tr = np.trace(rho)
        drift = abs(tr - 1.0)
        max_trace = max(max_trace, drift)
        max_herm = max(max_herm, float(np.max(np.abs(rho - rho.conj().T))))
        if drift > trace_tolerance:
            raise IntegrationError(f"trace drifted by {drift:.3e} at t={times[k]:.6e}")
        rho = rho / tr
        if store_states:
            states[k] = rho
        for label, op in ops.items():
            series[label][k] = _expect_real(rho, op)
        if k in check_at:
            samples.append(rho)

    min_eig = min((float(np.min(np.linalg.eigvalsh(0.5 * (r + r.conj().T)))) for r in samples), default=0.0)
    diagnostics = {
        **info,
        "rhs_evaluations": counter["rhs"],
        "max_trace_error": max_trace,
        "max_hermiticity_error": max_herm,
        "min_sampled_eigenvalue": min_eig,
        "method": method,
        "rtol": rtol,
        "atol": atol,
    }
    logger.debug("evolve finished: %s", diagnostics)
    return Trajectory(times, states, series, diagnostics)


def _bdf_columns(gen, y0, times, rtol, atol, counter, max_evaluations, first_step, max_step):
    if max_step is None:
        max_step = gen.max_step
    D = gen.dim
    dense = D * D <= _DENSE_LIMIT
    static = gen.static.matrix.toarray() if dense else gen.static.matrix.tocsr()
    addends = [(env, a.matrix.toarray() if dense else a.matrix.tocsr()) for env, a in gen.addends]

    def rhs(t, y):
        counter["rhs"] += 1
        if counter["rhs"] > max_evaluations:
            raise IntegrationError(f"step budget exhausted after {max_evaluations} evaluations at t={t:.6e}")
        out = static @ y
        for env, A in addends:
            e = env(t)
            if e != 0.0:
                out = out + e * (A @ y)
        return out

    def jac(t, y):
        J = static
        for env, A in addends:
            e = env(t)
            if e != 0.0:
                J = J + e * A
        return J if dense else sp.csc_matrix(J)

    if times.size == 1:
        return y0[:, None], {"nfev": 0, "njev": 0, "nlu": 0}
    try:
        sol = solve_ivp(
            rhs, (times[0], times[-1]), y0, method="BDF", t_eval=times, rtol=rtol, atol=atol,
            jac=jac, first_step=first_step, max_step=max_step,
        )
    except IntegrationError:
        raise
    except (ValueError, RuntimeError, FloatingPointError) as exc:
        raise IntegrationError(f"integrator failure: {exc}") from exc
    if sol.status != 0:
        raise IntegrationError(f"integrator failure: {sol.message}")
    return sol.y, {"nfev": int(sol.nfev), "njev": int(sol.njev), "nlu": int(sol.nlu)}


def _expm_columns(L, y0, times, chunk: int = 200):
    """Yield ``exp(L (t_k - t_0)) y0`` for every sample, a chunk at a time."""
    yield y0
    steps = np.diff(times)
    uniform = steps.size > 0 and np.allclose(steps, steps[0], rtol=1e-9, atol=0.0)
    y = y0
    k = 0
    while k < steps.size:
        if uniform:
            m = min(chunk, steps.size - k)
            block = spla.expm_multiply(L, y, start=0.0, stop=steps[0] * m, num=m + 1, endpoint=True)
            yield from block[1:]
            y = block[-1]
            k += m
        else:
            y = spla.expm_multiply(L * steps[k], y)
            yield y
            k += 1


def _check_points(n: int, count: int) -> set:
    if count <= 0:
        return set()
    rng = np.random.default_rng(12345)
    picks = rng.choice(n, size=min(count, n), replace=False)
    return set(int(i) for i in picks) | {n - 1}


def _expect_real(rho, op) -> float:
    coo = op.tocoo()
    return float(np.real(np.sum(rho[coo.col, coo.row] * coo.data)))


def _trace_functional(D: int) -> np.ndarray:
    w = np.zeros(D * D, dtype=complex)
    w[np.arange(D) * (D + 1)] = 1.0
    return w


def steady_state(L: Liouvillian, *, check_unique: bool = False, residual_tolerance: float = 1e-8,
                 refinement_steps: int = 2) -> np.ndarray:
    """Normalized kernel vector of ``L`` as a density matrix.

    Solves ``L vec(rho) = 0`` with the first equation replaced by
    ``Tr rho = 1``; a couple of iterative-refinement sweeps follow the LU
    solve.  ``check_unique`` additionally verifies a one-dimensional kernel
    (see :func:`kernel_dimension`).
    """
    D = L.dim
    A = L.matrix.tocsr()
    scale = float(np.max(np.abs(A.data))) if A.nnz else 0.0
    if scale == 0.0:
        raise SteadyStateError("zero generator: every state is stationary")
    if check_unique:
        k = kernel_dimension(L)
        if k != 1:
            raise SteadyStateError(f"kernel dimension {k}: steady state is not unique")
    A = (A / scale).tolil()
    w = _trace_functional(D)
    A[0, :] = w
    M = A.tocsc()
    b = np.zeros(D * D, dtype=complex)
    b[0] = 1.0
    try:
        lu = spla.splu(M, permc_spec="COLAMD")
    except RuntimeError as exc:
        raise SteadyStateError(f"singular constrained system ({exc}); kernel is likely degenerate") from exc
    x = lu.solve(b)
    for _ in range(refinement_steps):
        x = x + lu.solve(b - M @ x)
    if not np.all(np.isfinite(x)):
        raise SteadyStateError("non-finite steady-state solution; kernel is likely degenerate")
    rho = unvec(x, D)
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real
    residual = float(np.max(np.abs(L.matrix @ vec(rho)))) / scale
    if residual > residual_tolerance:
        raise SteadyStateError(f"steady-state residual {residual:.3e} exceeds {residual_tolerance:.1e}")
    return rho


def kernel_dimension(L: Liouvillian, tol: float = 1e-10, probe: int = 4) -> int:
    """Number of generator eigenvalues with ``|lambda| <= tol * max|L|``."""
    A = L.matrix
    scale = float(np.max(np.abs(A.data))) if A.nnz else 1.0
    n = A.shape[0]
    if n <= 4096:
        s = np.linalg.svd(A.toarray() / scale, compute_uv=False)
        return int(np.sum(s <= tol))
    k = min(probe, n - 2)
    shift = -1e-3 * tol
    vals = spla.eigs((A / scale).tocsc(), k=k, sigma=shift, return_eigenvectors=False)
    return int(np.sum(np.abs(vals) <= tol))
