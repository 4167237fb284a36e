"""Density-matrix reconstruction from protectively measured expectation values.

An informationally complete set of Hermitian observables determines the state
of a single system: each protective run yields one number tr(rho A), and a
constrained linear least-squares fit inverts the collection.  The trace
constraint is enforced exactly by solving in the traceless subspace with an
I/d offset; the fit is then projected onto the PSD cone by clipping negative
eigenvalues and renormalizing.  Global phases of pure states are invisible to
every expectation value, so reconstruction is phase-blind by construction.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

import numpy as np

from .hilbert import DensityMatrix, Operator, PureState, expectation, identity
from .protective import ProtectiveSetup, run_protective

# Warn when the sum of squared residuals of the pre-projection fit exceeds
# this: the measured values are mutually inconsistent at a gross level.
RESIDUAL_WARN_DEFAULT = 0.1

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class ObservableSet:
    """Labelled Hermitian observables used as a tomography basis."""

    dim: int
    labels: tuple[str, ...]
    operators: tuple[Operator, ...]

    def __post_init__(self):
        if len(self.labels) != len(self.operators):
            raise ValueError("labels and operators must have equal length")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("labels must be unique")
        for label, op in zip(self.labels, self.operators):
            if not op.hermitian:
                raise ValueError(f"observable {label!r} is not Hermitian")
            if op.dim != self.dim:
                raise ValueError(f"observable {label!r} has dimension {op.dim}, expected {self.dim}")

    @property
    def informationally_complete(self) -> bool:
        """True when the observables plus I span all Hermitian matrices."""
        vecs = [np.eye(self.dim, dtype=complex).ravel()]
        vecs += [op.entries.ravel() for op in self.operators]
        return int(np.linalg.matrix_rank(np.array(vecs))) == self.dim**2

    def by_label(self, label: str) -> Operator:
        try:
            return self.operators[self.labels.index(label)]
        except ValueError:
            raise KeyError(f"no observable labelled {label!r}") from None

    def non_identity(self):
        """(label, operator) pairs excluding multiples of the identity."""
        out = []
        for label, op in zip(self.labels, self.operators):
            trace_part = np.trace(op.entries) / self.dim
            if np.max(np.abs(op.entries - trace_part * np.eye(self.dim))) > 1e-12:
                out.append((label, op))
        return out


@dataclass(frozen=True)
class Tomogram:
    """Measured (label, value) pairs with their provenance."""

    entries: tuple[tuple[str, float], ...]
    source: str = "exact"
    dim: int | None = None

    def __post_init__(self):
        object.__setattr__(
            self, "entries", tuple((str(k), float(v)) for k, v in self.entries)
        )
        labels = [k for k, _ in self.entries]
        if len(set(labels)) != len(labels):
            raise ValueError("tomogram labels must be unique")
        if self.source not in ("exact", "protective-simulated"):
            raise ValueError(f"unknown tomogram source {self.source!r}")

    def values(self) -> dict[str, float]:
        return dict(self.entries)


def _gell_mann(dim: int) -> tuple[list[str], list[np.ndarray]]:
    """Generalized Gell-Mann matrices, tr(G_i G_j) = 2 delta_ij."""
    labels, mats = [], []
    for j, k in itertools.combinations(range(dim), 2):
        sym = np.zeros((dim, dim), dtype=complex)
        sym[j, k] = sym[k, j] = 1.0
        labels.append(f"S{j}{k}")
        mats.append(sym)
        asym = np.zeros((dim, dim), dtype=complex)
        asym[j, k] = -1j
        asym[k, j] = 1j
        labels.append(f"A{j}{k}")
        mats.append(asym)
    for level in range(1, dim):
        diag = np.zeros(dim)
        diag[:level] = 1.0
        diag[level] = -level
        labels.append(f"D{level}")
        mats.append(np.diag(diag * np.sqrt(2.0 / (level * (level + 1)))).astype(complex))
    return labels, mats


def hermitian_basis(dim: int) -> ObservableSet:
    """Trace-orthogonal Hermitian basis: Pauli strings for dim = 2^n,
    otherwise identity plus generalized Gell-Mann matrices.

    The returned set is informationally complete with d^2 elements.
    """
    if dim < 2:
        raise ValueError("hermitian_basis requires dim >= 2")
    n = dim.bit_length() - 1
    if dim == 2**n:
        labels, operators = [], []
        for combo in itertools.product("IXYZ", repeat=n):
            label = "".join(combo)
            mat = np.array([[1.0]], dtype=complex)
            for ch in combo:
                mat = np.kron(mat, _PAULI[ch])
            labels.append(label)
            operators.append(Operator(mat))
        return ObservableSet(dim, tuple(labels), tuple(operators))
    labels, mats = _gell_mann(dim)
    labels = ["I"] + labels
    operators = [identity(dim)] + [Operator(m) for m in mats]
    return ObservableSet(dim, tuple(labels), tuple(operators))


def _orthonormal_traceless_basis(dim: int) -> list[np.ndarray]:
    """Hilbert-Schmidt-orthonormal basis of the traceless Hermitian matrices."""
    basis = hermitian_basis(dim)
    out = []
    for label, op in zip(basis.labels, basis.operators):
        m = op.entries
        if abs(np.trace(m)) > 1e-12:
            continue  # drop the identity element
        out.append(m / np.linalg.norm(m))
    assert len(out) == dim**2 - 1
    return out


def exact_tomogram(rho: DensityMatrix, observable_set: ObservableSet) -> Tomogram:
    """Ideal tomogram: exact expectation values for every non-identity element."""
    entries = [
        (label, expectation(rho, op)) for label, op in observable_set.non_identity()
    ]
    return Tomogram(tuple(entries), source="exact", dim=observable_set.dim)


def noisy_tomogram(
    rho: DensityMatrix, observable_set: ObservableSet, sigma: float, seed: int
) -> Tomogram:
    """Exact tomogram plus additive Gaussian noise of scale sigma (seeded)."""
    rng = np.random.default_rng(seed)
    entries = [
        (label, expectation(rho, op) + sigma * rng.normal())
        for label, op in observable_set.non_identity()
    ]
    return Tomogram(tuple(entries), source="exact", dim=observable_set.dim)


def _least_squares_fit(
    tomogram: Tomogram, observable_set: ObservableSet
) -> tuple[np.ndarray, float]:
    """Trace-one Hermitian least-squares solution and its squared residual."""
    dim = observable_set.dim
    measured = [(observable_set.by_label(label), value) for label, value in tomogram.entries]
    basis = _orthonormal_traceless_basis(dim)
    design = np.array(
        [[np.trace(op.entries @ b).real for b in basis] for op, _ in measured]
    )
    if np.linalg.matrix_rank(design) < dim**2 - 1:
        raise ValueError(
            "measured observables are not informationally complete (rank-deficient design)"
        )
    target = np.array(
        [value - np.trace(op.entries).real / dim for op, value in measured]
    )
    coeffs, *_ = np.linalg.lstsq(design, target, rcond=None)
    residual_sq = float(np.sum((design @ coeffs - target) ** 2))
    sigma = np.eye(dim, dtype=complex) / dim
    for c, b in zip(coeffs, basis):
        sigma += c * b
    return sigma, residual_sq


def project_to_density(matrix: np.ndarray) -> tuple[DensityMatrix, float]:
    """Clip negative eigenvalues, renormalize the trace; returns the state and
    the total clipped negative mass."""
    evals, evecs = np.linalg.eigh(0.5 * (matrix + matrix.conj().T))
    clipped = float(-np.sum(evals[evals < 0.0]))
    evals = np.clip(evals, 0.0, None)
    evals /= evals.sum()
    return DensityMatrix((evecs * evals) @ evecs.conj().T), clipped


def reconstruct(
    tomogram: Tomogram,
    observable_set: ObservableSet,
    residual_warn: float = RESIDUAL_WARN_DEFAULT,
) -> DensityMatrix:
    """Reconstruct a density matrix from measured expectation values.

    Solves min over Hermitian sigma of sum_a (tr(sigma A_a) - m_a)^2 subject
    to tr sigma = 1, then projects onto the PSD cone.  Exact inputs reproduce
    the state to numerical precision; noisy inputs always yield a valid
    density matrix.  A squared residual above ``residual_warn`` triggers a
    warning (reported, not fatal).
    """
    sigma, residual_sq = _least_squares_fit(tomogram, observable_set)
    if residual_sq > residual_warn:
        warnings.warn(
            f"tomogram values are mutually inconsistent: squared residual "
            f"{residual_sq:.3e} exceeds {residual_warn:.3e}",
            stacklevel=2,
        )
    rho, _ = project_to_density(sigma)
    return rho


def fit_residual(
    rho: DensityMatrix, tomogram: Tomogram, observable_set: ObservableSet
) -> float:
    """Sum of squared mismatches of ``rho`` against the tomogram values."""
    return float(
        sum(
            (expectation(rho, observable_set.by_label(label)) - value) ** 2
            for label, value in tomogram.entries
        )
    )


def tomograph_via_protective(
    setup_factory,
    observable_set: ObservableSet,
) -> tuple[Tomogram, DensityMatrix]:
    """End-to-end tomography of a single system with protective readouts.

    ``setup_factory(observable)`` must return a ProtectiveSetup protecting
    one fixed state and coupling the pointer to the given observable (for a
    subsystem tomography, to observable (x) I on the composite).  One
    protective run per non-identity element feeds the reconstruction.
    """
    entries = []
    for label, op in observable_set.non_identity():
        setup = setup_factory(op)
        if not isinstance(setup, ProtectiveSetup):
            raise TypeError("setup_factory must return a ProtectiveSetup")
        outcome = run_protective(setup)
        entries.append((label, outcome.estimate))
    tomogram = Tomogram(tuple(entries), source="protective-simulated", dim=observable_set.dim)
    return tomogram, reconstruct(tomogram, observable_set)
