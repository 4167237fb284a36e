"""Dense complex linear algebra and quantum-state primitives.

Everything downstream (propagation, pointer readout, tomography, entropy,
ensemble statistics) is built on the three value types defined here:
``Operator``, ``PureState`` and ``DensityMatrix``.  All values are immutable
after construction (the wrapped arrays are marked read-only), so they can be
shared freely across threads.  Units use hbar = 1 throughout.

Index convention: in tensor products the FIRST factor is the major index,
i.e. ``tensor(a, b)`` lays out basis states as |i_a, j_b> with i_a varying
slowest.  This matches ``numpy.kron``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Absolute entrywise tolerance for Hermiticity checks.
HERMITIAN_ATOL = 1e-12
# Unit-norm tolerance for state vectors.
NORM_ATOL = 1e-12
# Density matrices must have eigenvalues >= -PSD_ATOL and unit trace
# within TRACE_ATOL.
PSD_ATOL = 1e-10
TRACE_ATOL = 1e-10

# Dense storage only; constructors reject dimensions beyond this limit.
# Reassign (e.g. ``pmsim.hilbert.DIM_LIMIT = 4096``) to raise the ceiling.
DIM_LIMIT = 1024


def _as_square_complex(entries) -> np.ndarray:
    m = np.array(entries, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if m.shape[0] < 1:
        raise ValueError("dimension must be >= 1")
    if m.shape[0] > DIM_LIMIT:
        raise ValueError(f"dimension {m.shape[0]} exceeds DIM_LIMIT={DIM_LIMIT}")
    return m


@dataclass(frozen=True)
class Operator:
    """A dense complex square matrix with a cached Hermiticity flag."""

    entries: np.ndarray
    hermitian: bool = field(init=False)

    def __post_init__(self):
        m = _as_square_complex(self.entries)
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)
        herm = bool(np.max(np.abs(m - m.conj().T)) <= HERMITIAN_ATOL)
        object.__setattr__(self, "hermitian", herm)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def dagger(self) -> "Operator":
        return Operator(self.entries.conj().T)

    def spectral_norm(self) -> float:
        """Largest singular value; equals max |eigenvalue| when Hermitian."""
        if self.hermitian:
            return float(np.max(np.abs(np.linalg.eigvalsh(self.entries))))
        return float(np.linalg.norm(self.entries, 2))

    def __add__(self, other: "Operator") -> "Operator":
        return Operator(self.entries + other.entries)

    def __sub__(self, other: "Operator") -> "Operator":
        return Operator(self.entries - other.entries)

    def __mul__(self, scalar) -> "Operator":
        return Operator(self.entries * scalar)

    __rmul__ = __mul__

    def __matmul__(self, other: "Operator") -> "Operator":
        return Operator(self.entries @ other.entries)


@dataclass(frozen=True)
class PureState:
    """A normalized complex state vector."""

    amplitudes: np.ndarray

    def __post_init__(self):
        v = np.array(self.amplitudes, dtype=np.complex128)
        if v.ndim != 1:
            raise ValueError(f"expected a 1-D amplitude vector, got shape {v.shape}")
        if not 1 <= v.shape[0] <= DIM_LIMIT:
            raise ValueError(f"dimension {v.shape[0]} out of range [1, {DIM_LIMIT}]")
        norm = float(np.linalg.norm(v))
        if abs(norm - 1.0) > NORM_ATOL:
            raise ValueError(f"state vector is not normalized: |psi| = {norm!r}")
        v.setflags(write=False)
        object.__setattr__(self, "amplitudes", v)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def overlap(self, other: "PureState") -> complex:
        """Inner product <self|other>."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def density_matrix(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, positive-semidefinite, trace-one matrix."""

    entries: np.ndarray

    def __post_init__(self):
        m = _as_square_complex(self.entries)
        if np.max(np.abs(m - m.conj().T)) > HERMITIAN_ATOL:
            raise ValueError("density matrix is not Hermitian")
        evals = np.linalg.eigvalsh(m)
        if evals[0] < -PSD_ATOL:
            raise ValueError(f"density matrix has negative eigenvalue {evals[0]!r}")
        tr = float(np.trace(m).real)
        if abs(tr - 1.0) > TRACE_ATOL:
            raise ValueError(f"density matrix trace is {tr!r}, expected 1")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def purity(self) -> float:
        """tr(rho^2); 1 for pure states, 1/dim for maximally mixed."""
        return float(np.trace(self.entries @ self.entries).real)


# Standard single-qubit operators.
PAULI_X = Operator([[0, 1], [1, 0]])
PAULI_Y = Operator([[0, -1j], [1j, 0]])
PAULI_Z = Operator([[1, 0], [0, -1]])


def identity(dim: int) -> Operator:
    return Operator(np.eye(dim))


def basis_state(dim: int, index: int) -> PureState:
    v = np.zeros(dim, dtype=np.complex128)
    v[index] = 1.0
    return PureState(v)


def plus_x() -> PureState:
    return PureState(np.array([1, 1]) / math.sqrt(2))


def minus_x() -> PureState:
    return PureState(np.array([1, -1]) / math.sqrt(2))


def plus_y() -> PureState:
    return PureState(np.array([1, 1j]) / math.sqrt(2))


def pure_state_from_bloch(r) -> PureState:
    """Qubit state with Bloch vector r; requires |r| = 1 (pure states only)."""
    r = np.asarray(r, dtype=float)
    if r.shape != (3,):
        raise ValueError("Bloch vector must have three components")
    if abs(np.linalg.norm(r) - 1.0) > 1e-9:
        raise ValueError("pure states require a unit Bloch vector")
    theta = math.acos(max(-1.0, min(1.0, r[2])))
    phi = math.atan2(r[1], r[0])
    return PureState(
        np.array([math.cos(theta / 2), math.sin(theta / 2) * complex(math.cos(phi), math.sin(phi))])
    )


def density_from_bloch(r) -> DensityMatrix:
    """Qubit density matrix (1/2)(I + r . sigma); requires |r| <= 1."""
    r = np.asarray(r, dtype=float)
    if abs(np.linalg.norm(r)) > 1.0 + 1e-12:
        raise ValueError("Bloch vector must lie inside the unit ball")
    m = 0.5 * (
        np.eye(2) + r[0] * PAULI_X.entries + r[1] * PAULI_Y.entries + r[2] * PAULI_Z.entries
    )
    return DensityMatrix(m)


def bloch_vector(rho: DensityMatrix) -> np.ndarray:
    """Expectation values (|.|<=1) of the three Pauli operators for a qubit."""
    if rho.dim != 2:
        raise ValueError("Bloch vector is defined for qubits only")
    return np.array([expectation(rho, p) for p in (PAULI_X, PAULI_Y, PAULI_Z)])


def tensor(a, b):
    """Kronecker product of two values of the same kind.

    The first factor is the major index.  Supported kinds: two Operators,
    two PureStates, or two DensityMatrices.
    """
    if isinstance(a, Operator) and isinstance(b, Operator):
        return Operator(np.kron(a.entries, b.entries))
    if isinstance(a, PureState) and isinstance(b, PureState):
        return PureState(np.kron(a.amplitudes, b.amplitudes))
    if isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix):
        return DensityMatrix(np.kron(a.entries, b.entries))
    raise TypeError(
        f"tensor requires two values of the same kind, got {type(a).__name__} and {type(b).__name__}"
    )


def partial_trace(rho: DensityMatrix, dims: tuple[int, int], keep: int) -> DensityMatrix:
    """Reduced density matrix of one factor of a bipartite system.

    ``dims = (d1, d2)`` with ``d1 * d2 == rho.dim``; ``keep`` selects the
    factor (1 or 2) whose state is returned, the other is traced out.
    """
    d1, d2 = dims
    if d1 * d2 != rho.dim:
        raise ValueError(f"dims {dims} do not factor dimension {rho.dim}")
    if keep not in (1, 2):
        raise ValueError("keep must be 1 or 2")
    t = rho.entries.reshape(d1, d2, d1, d2)
    if keep == 1:
        reduced = np.trace(t, axis1=1, axis2=3)
    else:
        reduced = np.trace(t, axis1=0, axis2=2)
    return DensityMatrix(reduced)


def expectation(rho: DensityMatrix, a: Operator) -> float:
    """tr(rho A) for Hermitian A; the tiny imaginary residue is checked and dropped."""
    if not a.hermitian:
        raise ValueError("expectation requires a Hermitian observable")
    if a.dim != rho.dim:
        raise ValueError(f"dimension mismatch: rho is {rho.dim}, observable is {a.dim}")
    val = complex(np.trace(rho.entries @ a.entries))
    if abs(val.imag) > 1e-10:
        raise ValueError(f"tr(rho A) has imaginary part {val.imag!r}")
    return val.real


def eig_hermitian(a: Operator) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvector columns of a Hermitian operator."""
    if not a.hermitian:
        raise ValueError("eig_hermitian requires a Hermitian operator")
    return np.linalg.eigh(a.entries)


def mix(components) -> DensityMatrix:
    """Convex mixture sum_a w_a |phi_a><phi_a| of pure states.

    Weights must be non-negative and sum to 1 within 1e-12.
    """
    components = list(components)
    if not components:
        raise ValueError("mix requires at least one component")
    weights = np.array([w for _, w in components], dtype=float)
    if np.any(weights < 0):
        raise ValueError("mixture weights must be non-negative")
    if abs(weights.sum() - 1.0) > 1e-12:
        raise ValueError(f"mixture weights sum to {weights.sum()!r}, expected 1")
    dim = components[0][0].dim
    out = np.zeros((dim, dim), dtype=np.complex128)
    for state, w in components:
        if state.dim != dim:
            raise ValueError("all mixture components must share one dimension")
        out += w * np.outer(state.amplitudes, state.amplitudes.conj())
    return DensityMatrix(out)


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    """Half the trace norm of (a - b)."""
    if a.dim != b.dim:
        raise ValueError("trace_distance requires equal dimensions")
    evals = np.linalg.eigvalsh(a.entries - b.entries)
    return 0.5 * float(np.sum(np.abs(evals)))


def fidelity_with_pure(rho: DensityMatrix, psi: PureState) -> float:
    """<psi|rho|psi>, the fidelity of a mixed state with a pure reference."""
    if rho.dim != psi.dim:
        raise ValueError("fidelity requires equal dimensions")
    v = psi.amplitudes
    return float(np.real(np.vdot(v, rho.entries @ v)))
