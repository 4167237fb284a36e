"""Finite-ensemble statistics: proper mixtures, fluctuations, and memory.

A finite collection of sub-ensembles, each holding N_a copies of a pure
state, is NOT interchangeable with its density matrix sum_a (N_a/N)
|phi_a><phi_a|: drawing members without replacement leaves a record (the
remaining ratios shift), whereas the density matrix predicts history-free
statistics.  The operations here make that contrast computable --
conditional distributions after a measured prefix, total- and averaged-spin
fluctuations for the two classic unpolarized-beam preparations, a
Monte Carlo realization of the distinguishing experiment, a beam-merge toy
where the spin-path correlation survives recombination, and the convergence
of frequencies as the collection grows at fixed ratios.

All randomness flows through numpy's PCG64 generator with explicit integer
seeds; independent streams are spawned from a master SeedSequence, so every
stochastic result is bit-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hilbert import (
    DensityMatrix,
    PAULI_Z,
    PureState,
    basis_state,
    expectation,
    minus_x,
    mix,
    partial_trace,
    plus_x,
    tensor,
    trace_distance,
)

WITH_REPLACEMENT = "with_replacement"
WITHOUT_REPLACEMENT = "without_replacement"
_MODES = (WITH_REPLACEMENT, WITHOUT_REPLACEMENT)


@dataclass(frozen=True)
class FiniteEnsemble:
    """Sub-ensembles (state, count) drawn from one species of system."""

    components: tuple[tuple[PureState, int], ...]

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise ValueError("an ensemble needs at least one component")
        dim = comps[0][0].dim
        for state, count in comps:
            if not isinstance(count, (int, np.integer)) or count < 0:
                raise ValueError(f"counts must be non-negative integers, got {count!r}")
            if state.dim != dim:
                raise ValueError("all component states must share one dimension")
        if sum(c for _, c in comps) < 1:
            raise ValueError("total population must be at least 1")
        object.__setattr__(self, "components", comps)

    @property
    def size(self) -> int:
        return len(self.components)

    @property
    def total(self) -> int:
        return sum(c for _, c in self.components)

    @property
    def dim(self) -> int:
        return self.components[0][0].dim

    def counts(self) -> np.ndarray:
        return np.array([c for _, c in self.components], dtype=np.int64)

    def weights(self) -> np.ndarray:
        return self.counts() / self.total


@dataclass(frozen=True)
class DrawRecord:
    """Ordered component indices produced by ``sample``."""

    outcomes: tuple[int, ...]
    mode: str
    seed: int

    def __post_init__(self):
        if self.mode not in _MODES:
            raise ValueError(f"mode must be one of {_MODES}")
        object.__setattr__(self, "outcomes", tuple(int(i) for i in self.outcomes))

    def component_counts(self, size: int) -> np.ndarray:
        counts = np.zeros(size, dtype=np.int64)
        for idx in self.outcomes:
            if not 0 <= idx < size:
                raise ValueError(f"outcome index {idx} out of range for {size} components")
            counts[idx] += 1
        return counts


def ensemble_density_matrix(ensemble: FiniteEnsemble) -> DensityMatrix:
    """sum_a (N_a / N) |phi_a><phi_a| for the collection."""
    total = ensemble.total
    return mix(
        [(state, count / total) for state, count in ensemble.components if count > 0]
    )


def sample(ensemble: FiniteEnsemble, n: int, mode: str, seed: int) -> DrawRecord:
    """Draw n members and record which component each came from.

    with_replacement: independent categorical draws with probabilities
    N_a / N.  without_replacement: the first n entries of a uniformly random
    permutation of the expanded population, which realizes sequential
    multivariate-hypergeometric draws.  Both use numpy's PCG64 generator
    seeded with ``seed``.
    """
    if mode not in _MODES:
        raise ValueError(f"mode must be one of {_MODES}")
    if n < 0:
        raise ValueError("n must be non-negative")
    rng = np.random.default_rng(seed)
    if mode == WITH_REPLACEMENT:
        outcomes = rng.choice(ensemble.size, size=n, p=ensemble.weights())
    else:
        if n > ensemble.total:
            raise ValueError(
                f"cannot draw {n} from {ensemble.total} members without replacement"
            )
        population = np.repeat(np.arange(ensemble.size), ensemble.counts())
        outcomes = rng.permutation(population)[:n]
    return DrawRecord(tuple(int(i) for i in outcomes), mode, seed)


def conditional_distribution(ensemble: FiniteEnsemble, observed: DrawRecord) -> np.ndarray:
    """Component probabilities for the next draw given an observed prefix.

    Without replacement the remaining ratios shift to
    (N_a - k_a) / (N - n); with replacement history is irrelevant and the
    answer stays N_a / N.
    """
    drawn = observed.component_counts(ensemble.size)
    if observed.mode == WITH_REPLACEMENT:
        return ensemble.weights()
    counts = ensemble.counts()
    if np.any(drawn > counts):
        raise ValueError("observed prefix draws a component more often than it exists")
    remaining = ensemble.total - len(observed.outcomes)
    if remaining < 1:
        raise ValueError("no members remain after the observed prefix")
    return (counts - drawn) / remaining


def _spin_z_moments(state: PureState) -> tuple[float, float]:
    mean = abs(state.amplitudes[0]) ** 2 - abs(state.amplitudes[1]) ** 2
    return mean, 1.0 - mean * mean  # sigma_z^2 = I


def total_spin_z_stats(ensemble: FiniteEnsemble) -> tuple[float, float]:
    """Mean and standard deviation of the total z spin sum_n sigma_z,n.

    The collection is a product state over its members, so means and
    variances add component by component.
    """
    if ensemble.dim != 2:
        raise ValueError("total spin statistics require qubit components")
    mean = 0.0
    variance = 0.0
    for state, count in ensemble.components:
        m, v = _spin_z_moments(state)
        mean += count * m
        variance += count * v
    return mean, math.sqrt(variance)


def averaged_spin_stats(ensemble: FiniteEnsemble) -> tuple[float, float]:
    """Mean and standard deviation of the averaged spin (1/N) sum_n sigma_z,n."""
    mean, std = total_spin_z_stats(ensemble)
    n = ensemble.total
    return mean / n, std / n


def z_pair_ensemble(n_members: int) -> FiniteEnsemble:
    """Half spin-up, half spin-down along z."""
    if n_members % 2:
        raise ValueError("n_members must be even")
    half = n_members // 2
    return FiniteEnsemble(((basis_state(2, 0), half), (basis_state(2, 1), half)))


def x_pair_ensemble(n_members: int) -> FiniteEnsemble:
    """Half spin-up, half spin-down along x."""
    if n_members % 2:
        raise ValueError("n_members must be even")
    half = n_members // 2
    return FiniteEnsemble(((plus_x(), half), (minus_x(), half)))


@dataclass(frozen=True)
class PreparationStats:
    """Per-preparation summary of the simulated total-spin measurement."""

    label: str
    empirical_mean: float
    empirical_std: float
    analytic_mean: float
    analytic_std: float
    totals: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.totals)
        t.setflags(write=False)
        object.__setattr__(self, "totals", t)


@dataclass(frozen=True)
class DespagnatReport:
    n_members: int
    trials: int
    seed: int
    z_prepared: PreparationStats
    x_prepared: PreparationStats
    shared_density_matrix: DensityMatrix


def _simulate_total_spin(ensemble: FiniteEnsemble, trials: int, rng) -> np.ndarray:
    """Per-trial totals of sigma_z measured on every member.

    Each member's outcome is +-1 with its state's Born probabilities; a
    component of count N_a contributes 2 * Binomial(N_a, p_up) - N_a.
    """
    totals = np.zeros(trials, dtype=np.int64)
    for state, count in ensemble.components:
        p_up = abs(state.amplitudes[0]) ** 2
        ups = rng.binomial(count, min(1.0, max(0.0, p_up)), size=trials)
        totals += 2 * ups - count
    return totals


def despagnat_experiment(n_members: int, trials: int, seed: int) -> DespagnatReport:
    """Distinguish the z- and x-prepared unpolarized collections by their
    total-spin fluctuations.

    Both preparations share the single-system density matrix (1/2) I, yet
    measuring sigma_z on every member gives totals with standard deviation 0
    for the z pair and sqrt(N) for the x pair.  Monte Carlo totals for each
    preparation are returned next to the analytic values.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    ensembles = {"z": z_pair_ensemble(n_members), "x": x_pair_ensemble(n_members)}
    streams = np.random.SeedSequence(seed).spawn(2)
    stats = {}
    for (label, ensemble), stream in zip(ensembles.items(), streams):
        totals = _simulate_total_spin(ensemble, trials, np.random.default_rng(stream))
        mean, std = total_spin_z_stats(ensemble)
        stats[label] = PreparationStats(
            label=label,
            empirical_mean=float(np.mean(totals)),
            empirical_std=float(np.std(totals)),
            analytic_mean=mean,
            analytic_std=std,
            totals=totals,
        )
    rho_z = ensemble_density_matrix(ensembles["z"])
    rho_x = ensemble_density_matrix(ensembles["x"])
    assert trace_distance(rho_z, rho_x) <= 1e-12
    return DespagnatReport(
        n_members=n_members,
        trials=trials,
        seed=seed,
        z_prepared=stats["z"],
        x_prepared=stats["x"],
        shared_density_matrix=rho_z,
    )


@dataclass(frozen=True)
class BeamMergeResult:
    rho_full_a: DensityMatrix
    rho_full_b: DensityMatrix
    rho_spin_a: DensityMatrix
    rho_spin_b: DensityMatrix
    rho_path_a: DensityMatrix
    rho_path_b: DensityMatrix
    full_trace_distance: float
    spin_trace_distance: float
    path_trace_distance: float


def beam_merge_demo() -> BeamMergeResult:
    """Recombined beams keep their spin-path correlation.

    Preparation A correlates z eigenstates with two path states (a path
    qubit); preparation B does the same with x eigenstates.  The spin
    reductions coincide at (1/2) I, but the full spin (x) path matrices stay
    distinguishable: the correlation survives in the position variables.
    """
    path0, path1 = basis_state(2, 0), basis_state(2, 1)
    prep_a = FiniteEnsemble(
        ((tensor(basis_state(2, 0), path0), 1), (tensor(basis_state(2, 1), path1), 1))
    )
    prep_b = FiniteEnsemble(((tensor(plus_x(), path0), 1), (tensor(minus_x(), path1), 1)))
    rho_a = ensemble_density_matrix(prep_a)
    rho_b = ensemble_density_matrix(prep_b)
    spin_a = partial_trace(rho_a, (2, 2), keep=1)
    spin_b = partial_trace(rho_b, (2, 2), keep=1)
    path_a = partial_trace(rho_a, (2, 2), keep=2)
    path_b = partial_trace(rho_b, (2, 2), keep=2)
    return BeamMergeResult(
        rho_full_a=rho_a,
        rho_full_b=rho_b,
        rho_spin_a=spin_a,
        rho_spin_b=spin_b,
        rho_path_a=path_a,
        rho_path_b=path_b,
        full_trace_distance=trace_distance(rho_a, rho_b),
        spin_trace_distance=trace_distance(spin_a, spin_b),
        path_trace_distance=trace_distance(path_a, path_b),
    )


@dataclass(frozen=True)
class FrequencyRow:
    total: int
    counts: tuple[int, ...]
    distance: float


@dataclass(frozen=True)
class FrequencyTable:
    weights: tuple[float, ...]
    n_draws: int
    seed: int
    rows: tuple[FrequencyRow, ...]

    def distances(self) -> list[float]:
        return [row.distance for row in self.rows]


def frequency_convergence(weights, n_ladder, n_draws: int, seed: int = 0) -> FrequencyTable:
    """Memory decay along a ladder of growing collections at fixed ratios.

    For each N in the ladder (counts N * w_a must be integers), the
    worst-case observed prefix -- n_draws members all from the first
    component -- shifts the without-replacement conditional distribution
    away from the nominal weights.  Rows hold the total-variation distance,
    which shrinks like n_draws / (N - n_draws): no finite member of the
    sequence reproduces the weights exactly, only the limit does.

    The distances are closed-form; ``seed`` is carried into the table so
    exports share the provenance fields of the sampled experiments.
    """
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
        raise ValueError("weights must be non-negative and sum to 1")
    ladder = [int(n) for n in n_ladder]
    if any(b <= a for a, b in zip(ladder, ladder[1:])):
        raise ValueError("N_ladder must be strictly ascending")
    if n_draws < 0:
        raise ValueError("n_draws must be non-negative")
    rows = []
    for total in ladder:
        raw = w * total
        counts = np.rint(raw).astype(np.int64)
        if np.max(np.abs(raw - counts)) > 1e-9:
            raise ValueError(f"weights give non-integral counts at N={total}: {raw}")
        if n_draws > counts[0]:
            raise ValueError(
                f"worst-case prefix needs {n_draws} members of component 0, "
                f"only {counts[0]} exist at N={total}"
            )
        if n_draws >= total:
            raise ValueError(f"n_draws={n_draws} exhausts the N={total} collection")
        drawn = np.zeros_like(counts)
        drawn[0] = n_draws
        conditional = (counts - drawn) / (total - n_draws)
        distance = 0.5 * float(np.sum(np.abs(conditional - w)))
        rows.append(
            FrequencyRow(total=total, counts=tuple(int(c) for c in counts), distance=distance)
        )
    return FrequencyTable(
        weights=tuple(float(x) for x in w),
        n_draws=n_draws,
        seed=seed,
        rows=tuple(rows),
    )
