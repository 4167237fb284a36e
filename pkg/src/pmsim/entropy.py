"""Quantum entropy of a single system and its behavior under dynamics.

The entropy implemented here is S = -tr(rho ln rho) in nats, computed from
the eigenvalue spectrum with the 0 ln 0 := 0 convention.  It vanishes exactly
on pure states, is invariant under unitary evolution, and grows for a
subsystem as it entangles with the rest of a composite -- while the entropy
of the isolated total system stays constant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import TimeDependentHamiltonian, default_step_count, evolve_interval
from .hilbert import DensityMatrix, Operator, PureState, partial_trace

# Eigenvalues below this are invalid input; within [-CLAMP, 0) they are
# numerical PSD slack and get clamped to zero before the logarithm.
EIGENVALUE_FLOOR = -1e-8
EIGENVALUE_CLAMP = -1e-10

LN2 = float(np.log(2.0))


@dataclass(frozen=True)
class EntropyReport:
    """Entropy value in nats together with the spectrum it came from."""

    value: float
    spectrum: np.ndarray
    purity: float

    def __post_init__(self):
        spec = np.asarray(self.spectrum, dtype=float)
        spec.setflags(write=False)
        object.__setattr__(self, "spectrum", spec)
        dim = spec.shape[0]
        if not -1e-10 <= self.value <= np.log(dim) + 1e-10:
            raise ValueError(f"entropy {self.value!r} outside [0, ln {dim}]")
        if not 1.0 / dim - 1e-10 <= self.purity <= 1.0 + 1e-10:
            raise ValueError(f"purity {self.purity!r} outside [1/{dim}, 1]")

    @property
    def bits(self) -> float:
        return self.value / LN2


def von_neumann_entropy(rho: DensityMatrix) -> EntropyReport:
    """S = -sum_k lambda_k ln lambda_k over the spectrum of rho, in nats."""
    evals = np.linalg.eigvalsh(rho.entries)
    if evals[0] < EIGENVALUE_FLOOR:
        raise ValueError(f"invalid density matrix: eigenvalue {evals[0]!r}")
    clamped = np.clip(evals, 0.0, None)
    positive = clamped[clamped > 0.0]
    value = float(-np.sum(positive * np.log(positive)))
    return EntropyReport(
        value=max(value, 0.0),
        spectrum=evals,
        purity=float(np.sum(clamped**2)),
    )


def entropy_under_unitary(rho: DensityMatrix, u: Operator) -> tuple[float, float]:
    """Entropy before and after rho -> u rho u^dag; equal for any unitary."""
    deviation = np.max(np.abs(u.entries.conj().T @ u.entries - np.eye(u.dim)))
    if deviation > 1e-10:
        raise ValueError(f"operator is not unitary (|u^dag u - I| = {deviation:.3e})")
    if u.dim != rho.dim:
        raise ValueError("dimension mismatch between state and unitary")
    before = von_neumann_entropy(rho).value
    rotated = DensityMatrix(u.entries @ rho.entries @ u.entries.conj().T)
    return before, von_neumann_entropy(rotated).value


def entanglement_growth(
    h_total: TimeDependentHamiltonian,
    psi0: PureState,
    dims: tuple[int, int],
    sample_times,
) -> list[tuple[float, float]]:
    """Subsystem-1 entropy along the evolution of an initially product state.

    The composite state stays pure (its total entropy stays zero under the
    unitary evolution) while the first factor's entropy rises and falls with
    the entanglement the interaction generates.  Returns (t, S) rows at the
    requested times.
    """
    d1, d2 = dims
    if d1 * d2 != psi0.dim or h_total.dim != psi0.dim:
        raise ValueError("dims must factor the state and Hamiltonian dimension")
    rho1 = partial_trace(psi0.density_matrix(), dims, keep=1)
    if rho1.purity() < 1.0 - 1e-10:
        raise ValueError("psi0 must be a tensor-product state")
    times = [float(t) for t in sample_times]
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError("sample_times must be strictly ascending")
    if times and times[-1] > h_total.schedule.total_time + 1e-12:
        raise ValueError("sample_times exceed the schedule window")

    hnorm = h_total.norm_bound()
    rows = []
    state, t_prev = psi0, 0.0
    for t in times:
        if t > t_prev:
            steps = default_step_count(t - t_prev, hnorm)
            state = evolve_interval(h_total, state, t_prev, t, steps)
            t_prev = t
        reduced = partial_trace(state.density_matrix(), dims, keep=1)
        rows.append((t, von_neumann_entropy(reduced).value))
    return rows
