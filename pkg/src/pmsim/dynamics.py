"""Time-dependent Schrodinger propagation and adiabatic coupling schedules.

Hamiltonians have the form H(t) = H_static + g(t) * H_coupling, where the
envelope g comes from a ``Schedule``.  Propagation multiplies per-step
unitaries exp(-i H(t_mid) dt) built by eigendecomposition at the midpoint of
each step, which is unconditionally unitary (no norm drift) and second-order
accurate in dt.  The envelope is normalized so that the midpoint-rule sum of
g over the schedule's own steps equals 1, i.e. the quadrature used for
normalization is the one the propagator samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .hilbert import Operator, PureState, eig_hermitian

ENVELOPES = ("sin2", "constant", "trapezoid")

# Default resolution: steps per unit of T * ||H||.
STEPS_PER_UNIT = 64
MIN_STEPS = 32


class DegenerateLevelError(ValueError):
    """The protected eigenvalue is degenerate, so protection fails."""


def default_step_count(total_time: float, hnorm: float, per_unit: int = STEPS_PER_UNIT) -> int:
    """Step count for a run of duration ``total_time`` with ||H(t)|| <= hnorm."""
    return max(MIN_STEPS, math.ceil(per_unit * total_time * max(hnorm, 1e-12)))


def _raw_envelope(name: str, ramp_fraction: float):
    if name == "sin2":
        return lambda t, T: math.sin(math.pi * t / T) ** 2
    if name == "constant":
        return lambda t, T: 1.0
    if name == "trapezoid":
        r = ramp_fraction

        def shape(t, T):
            s = t / T
            if s < r:
                return s / r
            if s > 1.0 - r:
                return (1.0 - s) / r
            return 1.0

        return shape
    raise ValueError(f"unknown envelope {name!r}; expected one of {ENVELOPES}")


@dataclass(frozen=True)
class Schedule:
    """Coupling envelope g(t) on [0, T], normalized to unit time integral.

    The normalization constant is fixed at construction by midpoint
    quadrature over ``steps`` sub-intervals, so the propagated coupling
    accumulates exactly unit weight.
    """

    total_time: float
    steps: int
    envelope: str = "sin2"
    ramp_fraction: float = 0.2
    _norm: float = field(init=False, repr=False)

    def __post_init__(self):
        if self.total_time <= 0:
            raise ValueError("total_time must be positive")
        if self.steps < 1:
            raise ValueError("steps must be a positive integer")
        if self.envelope == "trapezoid" and not 0.0 < self.ramp_fraction < 0.5:
            raise ValueError("ramp_fraction must lie in (0, 0.5)")
        shape = _raw_envelope(self.envelope, self.ramp_fraction)
        dt = self.total_time / self.steps
        total = sum(shape(self.midpoint(i), self.total_time) for i in range(self.steps)) * dt
        if total <= 0:
            raise ValueError("envelope integrates to zero")
        object.__setattr__(self, "_norm", total)

    @property
    def dt(self) -> float:
        return self.total_time / self.steps

    def midpoint(self, i: int) -> float:
        return (i + 0.5) * self.dt

    def g(self, t: float) -> float:
        if not 0.0 <= t <= self.total_time:
            raise ValueError(f"t={t!r} outside [0, {self.total_time}]")
        return _raw_envelope(self.envelope, self.ramp_fraction)(t, self.total_time) / self._norm

    def midpoint_values(self) -> np.ndarray:
        """g at every step midpoint, the samples the propagator uses."""
        return np.array([self.g(self.midpoint(i)) for i in range(self.steps)])

    def quadrature_integral(self) -> float:
        """Midpoint-rule integral of g; equals 1 up to rounding by construction."""
        return float(np.sum(self.midpoint_values()) * self.dt)

    def g_max(self) -> float:
        return float(np.max(self.midpoint_values()))

    def with_total_time(self, total_time: float, steps: int | None = None) -> "Schedule":
        return Schedule(
            total_time=total_time,
            steps=self.steps if steps is None else steps,
            envelope=self.envelope,
            ramp_fraction=self.ramp_fraction,
        )


@dataclass(frozen=True)
class TimeDependentHamiltonian:
    """H(t) = static_part + g(t) * coupling_part."""

    static_part: Operator
    coupling_part: Operator
    schedule: Schedule

    def __post_init__(self):
        if not self.static_part.hermitian or not self.coupling_part.hermitian:
            raise ValueError("both Hamiltonian parts must be Hermitian")
        if self.static_part.dim != self.coupling_part.dim:
            raise ValueError("static and coupling parts must have equal dimensions")

    @property
    def dim(self) -> int:
        return self.static_part.dim

    def matrix_at(self, t: float) -> np.ndarray:
        return self.static_part.entries + self.schedule.g(t) * self.coupling_part.entries

    def norm_bound(self) -> float:
        """Upper bound on max_t ||H(t)||, used by the default step rule."""
        return self.static_part.spectral_norm() + self.schedule.g_max() * self.coupling_part.spectral_norm()


def _step(h: TimeDependentHamiltonian, psi: np.ndarray, t_mid: float, dt: float) -> np.ndarray:
    w, v = np.linalg.eigh(h.matrix_at(t_mid))
    return v @ (np.exp(-1j * w * dt) * (v.conj().T @ psi))


def propagate(
    h: TimeDependentHamiltonian, psi0: PureState, record_every: int
) -> list[tuple[float, PureState]]:
    """Evolve psi0 under H(t) over [0, T], recording intermediate states.

    Returns (t, state) pairs: the initial state, every ``record_every``-th
    step, and always the final state.
    """
    if psi0.dim != h.dim:
        raise ValueError(f"state dimension {psi0.dim} does not match Hamiltonian {h.dim}")
    if record_every < 1:
        raise ValueError("record_every must be >= 1")
    sched = h.schedule
    dt = sched.dt
    psi = psi0.amplitudes.copy()
    trajectory = [(0.0, psi0)]
    for i in range(sched.steps):
        psi = _step(h, psi, sched.midpoint(i), dt)
        if (i + 1) % record_every == 0 or i == sched.steps - 1:
            trajectory.append(((i + 1) * dt, PureState(psi)))
    return trajectory


def evolve_interval(
    h: TimeDependentHamiltonian, psi0: PureState, t_start: float, t_end: float, steps: int
) -> PureState:
    """Final state after evolving from t_start to t_end under the same H(t)."""
    if psi0.dim != h.dim:
        raise ValueError(f"state dimension {psi0.dim} does not match Hamiltonian {h.dim}")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if not 0.0 <= t_start <= t_end <= h.schedule.total_time + 1e-12:
        raise ValueError("interval must satisfy 0 <= t_start <= t_end <= T")
    if t_end == t_start:
        return psi0
    dt = (t_end - t_start) / steps
    psi = psi0.amplitudes.copy()
    for i in range(steps):
        psi = _step(h, psi, min(t_start + (i + 0.5) * dt, h.schedule.total_time), dt)
    return PureState(psi)


def constant_hamiltonian(h0: Operator, total_time: float, steps: int | None = None) -> TimeDependentHamiltonian:
    """Wrap a static Hamiltonian for propagation over ``total_time``."""
    if steps is None:
        steps = default_step_count(total_time, h0.spectral_norm())
    zero = Operator(np.zeros((h0.dim, h0.dim)))
    return TimeDependentHamiltonian(h0, zero, Schedule(total_time, steps, "constant"))


def adiabatic_gap(h0: Operator, protected_index: int) -> float:
    """Distance from the protected eigenvalue to the nearest other level."""
    evals, _ = eig_hermitian(h0)
    if not 0 <= protected_index < len(evals):
        raise ValueError(f"protected_index {protected_index} out of range for dim {len(evals)}")
    others = np.delete(evals, protected_index)
    if others.size == 0:
        raise ValueError("a one-dimensional space has no gap")
    gap = float(np.min(np.abs(others - evals[protected_index])))
    if gap < 1e-10:
        raise DegenerateLevelError(
            f"protected level is degenerate (gap {gap!r}); protection requires a non-degenerate eigenvalue"
        )
    return gap


def rotate_spin_to_z(initial_axis: str, omega: float = 1.0, steps: int | None = None):
    """Rotate a spin from the +X or +Y direction onto +Z with a transverse field.

    The +1 eigenstate of sigma_{initial_axis} evolves under
    H = -(omega/2) sigma_field for a quarter Larmor period, with the field
    along Y (for initial X) or along -X (for initial Y).  Both paths land on
    the same final state |0>.

    Returns (final_state, field_axis_used).
    """
    from .hilbert import PAULI_X, PAULI_Y, plus_x, plus_y

    axis = initial_axis.upper()
    if axis == "X":
        psi0, field_op, field_label = plus_x(), PAULI_Y, "Y"
    elif axis == "Y":
        psi0, field_op, field_label = plus_y(), -1.0 * PAULI_X, "-X"
    else:
        raise ValueError("initial_axis must be 'X' or 'Y'")
    h0 = (-omega / 2.0) * field_op
    quarter_period = math.pi / (2.0 * omega)
    h = constant_hamiltonian(h0, quarter_period, steps)
    trajectory = propagate(h, psi0, record_every=h.schedule.steps)
    return trajectory[-1][1], field_label
