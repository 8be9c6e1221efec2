"""Single-qubit teleportation over a shared Bell pair.

The sender holds qubits 0 (the payload |psi>) and 1 (her half of the pair);
the receiver holds qubit 2.  The sender entangles and measures, two classical
bits travel to the receiver, and the receiver applies the conditional
correction.  With clean channels the protocol is exact.

Classical bit order on the wire is (m1, m2) with m1 the measurement of the
Hadamard-ed payload qubit.  The correction for outcome (1, 1) is X first,
then Z - the unique order that restores |psi> from a|1> - b|0>.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qstate import (
    PHI_PLUS,
    PauliError,
    StateVector,
    apply_gate,
    apply_pauli,
    discard_qubit,
    fidelity,
    make_bell,
    measure_qubit,
    tensor,
)

# A teleported qubit counts as erroneous iff its fidelity to the input drops
# below this.  All injected errors are Pauli mismatches, which are exactly
# fidelity-reducing for generic test states.
ERROR_FIDELITY_TOL = 1e-9

# Generic test state 0.6|0> + 0.8 e^{i pi/5}|1>: |a| != |b| and a complex
# relative phase, so no single Pauli mismatch leaves its fidelity at 1.
DEFAULT_TEST_STATE = StateVector(
    1, np.array([0.6, 0.8 * np.exp(1j * np.pi / 5)], dtype=complex)
)


@dataclass(frozen=True)
class BellOutcome:
    """The two classical bits produced by the sender's Bell measurement."""

    m1: int
    m2: int

    def __post_init__(self):
        if self.m1 not in (0, 1) or self.m2 not in (0, 1):
            raise ValueError("BellOutcome bits must be 0 or 1")


@dataclass(frozen=True)
class TeleportResult:
    outcome: BellOutcome
    receiver_state: StateVector
    fidelity_to_input: float

    @property
    def is_error(self) -> bool:
        return self.fidelity_to_input < 1.0 - ERROR_FIDELITY_TOL


def sender_measure(joint: StateVector, rng) -> tuple[BellOutcome, StateVector]:
    """Sender-side Bell measurement on qubits 0 and 1 of a 3-qubit state.

    Applies CNOT(0 -> 1) then H on qubit 0, measures both, and returns the
    classical outcome together with the receiver's residual 1-qubit state.
    """
    if joint.n_qubits != 3:
        raise ValueError(f"sender_measure needs a 3-qubit state, got {joint.n_qubits}")
    s = apply_gate(joint, "CNOT", (0, 1))
    s = apply_gate(s, "H", 0)
    o1 = measure_qubit(s, 0, rng)
    o2 = measure_qubit(o1.post_state, 1, rng)
    residual = discard_qubit(o2.post_state, 1, o2.bit)
    residual = discard_qubit(residual, 0, o1.bit)
    return BellOutcome(o1.bit, o2.bit), residual


def receiver_correct(qubit3: StateVector, outcome: BellOutcome) -> StateVector:
    """Receiver-side conditional correction: 00 -> I, 01 -> X, 10 -> Z, 11 -> X then Z."""
    state = qubit3
    if outcome.m2 == 1:
        state = apply_gate(state, "X", 0)
    if outcome.m1 == 1:
        state = apply_gate(state, "Z", 0)
    return state


def teleport_once(
    psi: StateVector,
    classical_error: tuple[int, int] = (0, 0),
    pauli_on_pair: PauliError = PauliError.I,
    rng=None,
) -> TeleportResult:
    """Run the full teleportation pipeline for one payload qubit.

    ``classical_error`` is XOR-ed onto the transmitted (m1, m2);
    ``pauli_on_pair`` corrupts the receiver-bound half of the shared pair
    before the protocol runs.
    """
    if psi.n_qubits != 1:
        raise ValueError("teleport_once moves a single qubit")
    if rng is None:
        raise ValueError("teleport_once needs an rng stream")
    pair = make_bell(PHI_PLUS)
    pair = apply_pauli(pair, 1, pauli_on_pair)
    outcome, residual = sender_measure(tensor(psi, pair), rng)
    received = BellOutcome(
        outcome.m1 ^ classical_error[0], outcome.m2 ^ classical_error[1]
    )
    corrected = receiver_correct(residual, received)
    return TeleportResult(outcome, corrected, fidelity(corrected, psi))
