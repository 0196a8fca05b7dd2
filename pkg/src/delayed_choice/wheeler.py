"""Wheeler's delayed choice experiment in a Mach-Zehnder interferometer.

The photon lives in span{|↑⟩, |↓⟩} and the quantum random bit generator in
span{|off⟩, |on⟩}.  The joint basis is ordered ↑off, ↑on, ↓off, ↓on.

Scenario 1 has no second beamsplitter, scenario 2 always has one, and in
scenario 3 a random bit generator decides after the mirrors whether the
second beamsplitter is in place.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .qcore import (
    Factor,
    QuantumState,
    apply,
    born_distribution,
    identity,
    is_unitary,
    kron_all,
    max_abs,
)

PHOTON = Factor("photon", ("↑", "↓"))
RANDOMIZER = Factor("randomizer", ("off", "on"))

_S = 1 / np.sqrt(2)

H = _S * np.array([[1, 1], [1, -1]], dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
# named Y after the source convention; this is the usual Pauli Z
Y = np.array([[1, 0], [0, -1]], dtype=complex)
# Hadamard on the photon, controlled by the randomizer being "on"
R = np.array(
    [
        [1, 0, 0, 0],
        [0, _S, 0, _S],
        [0, 0, 1, 0],
        [0, _S, 0, -_S],
    ],
    dtype=complex,
)

EXPLICIT_A = 0.5 * np.array(
    [
        [1, 1, -1, -1],
        [np.sqrt(2), -np.sqrt(2), 0, 0],
        [1, 1, 1, 1],
        [0, 0, -np.sqrt(2), np.sqrt(2)],
    ],
    dtype=complex,
)

I2 = identity(2)


@dataclass(frozen=True)
class WheelerGateSet:
    H: np.ndarray = field(default_factory=lambda: H.copy())
    X: np.ndarray = field(default_factory=lambda: X.copy())
    R: np.ndarray = field(default_factory=lambda: R.copy())
    rng_gate: np.ndarray = field(default_factory=lambda: kron_all(I2, H))
    Y: np.ndarray = field(default_factory=lambda: Y.copy())

    def check(self, tol: float = 1e-12) -> None:
        for name in ("H", "X", "R", "rng_gate"):
            if not is_unitary(getattr(self, name), tol):
                raise AssertionError(f"{name} is not unitary")
        if max_abs(self.H @ self.X @ self.H - self.Y) > tol:
            raise AssertionError("HXH != Y")


GATES = WheelerGateSet()


@dataclass(frozen=True)
class WheelerTimeline:
    """Stage-indexed states of one scenario plus the operator producing each stage."""

    scenario: int
    states: tuple[tuple[int, QuantumState], ...]
    operators: tuple[np.ndarray, ...]

    def state(self, t: int) -> QuantumState:
        for stage, s in self.states:
            if stage == t:
                return s
        raise KeyError(f"scenario {self.scenario} has no stage t={t}")

    @property
    def final(self) -> QuantumState:
        return self.states[-1][1]


def stage_operators(scenario: int, gates: WheelerGateSet = GATES) -> list[np.ndarray]:
    """Operators taking stage t to t+1, for t = 1, 2, 3."""
    if scenario in (1, 2):
        ops = [gates.H, gates.X]
        if scenario == 2:
            ops.append(gates.H)
        return ops
    if scenario == 3:
        return [
            kron_all(gates.H, I2),
            kron_all(gates.X, I2),
            # the random bit is drawn after the mirrors, then steers the beamsplitter
            gates.R @ gates.rng_gate,
        ]
    raise ValueError(f"unknown Wheeler scenario {scenario!r}; expected 1, 2 or 3")


def initial_state(scenario: int) -> QuantumState:
    if scenario in (1, 2):
        return QuantumState.from_terms([PHOTON], {"↓": 1})
    if scenario == 3:
        return QuantumState.from_terms([PHOTON, RANDOMIZER], {("↓", "off"): 1})
    raise ValueError(f"unknown Wheeler scenario {scenario!r}; expected 1, 2 or 3")


def scenario_states(scenario: int) -> WheelerTimeline:
    """Evolve the initial state stage by stage (t = 1..3, or 1..4)."""
    state = initial_state(scenario)
    ops = stage_operators(scenario)
    states = [(1, state)]
    for t, op in enumerate(ops, start=2):
        state = apply(op, state)
        states.append((t, state))
    return WheelerTimeline(scenario, tuple(states), tuple(ops))


def compose_delayed(gates: WheelerGateSet = GATES) -> np.ndarray:
    """A = R (I⊗H) (X⊗I) (H⊗I): randomizer fired after the mirrors."""
    return gates.R @ gates.rng_gate @ kron_all(gates.X, I2) @ kron_all(gates.H, I2)


def compose_nondelayed(gates: WheelerGateSet = GATES) -> np.ndarray:
    """A' = R (X⊗I) (H⊗I) (I⊗H): randomizer fired before the first beamsplitter."""
    return gates.R @ kron_all(gates.X, I2) @ kron_all(gates.H, I2) @ gates.rng_gate


def optics_rng_commutator(gates: WheelerGateSet = GATES) -> np.ndarray:
    optics = kron_all(gates.X, I2) @ kron_all(gates.H, I2)
    return optics @ gates.rng_gate - gates.rng_gate @ optics


def detector_distribution(scenario: int) -> dict[str, float]:
    """Born probabilities of the final state; scenario 3 is keyed by photon+reading."""
    return born_distribution(scenario_states(scenario).final)


@dataclass(frozen=True)
class IdentityReport:
    delayed: np.ndarray
    nondelayed: np.ndarray
    max_abs_diff: float
    max_abs_explicit: float
    commutator_norm: float

    def holds(self, tol: float = 1e-12) -> bool:
        return max(self.max_abs_diff, self.max_abs_explicit, self.commutator_norm) <= tol


def verify_identity() -> IdentityReport:
    a, a2 = compose_delayed(), compose_nondelayed()
    return IdentityReport(
        delayed=a,
        nondelayed=a2,
        max_abs_diff=max_abs(a - a2),
        max_abs_explicit=max_abs(a - EXPLICIT_A),
        commutator_norm=max_abs(optics_rng_commutator()),
    )
