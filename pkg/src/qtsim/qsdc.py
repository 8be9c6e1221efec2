"""Secure-and-reliable teleportation sessions with eavesdropper detection.

Session flow (one attempt):

  1. distribute n real pairs in (|00>+|11>)/sqrt(2) and m virtual decoy
     pairs in (|01>+|10>)/sqrt(2) at secret positions;
  2. protect each receiver-bound half with the Shor code, pass its nine
     physical qubits through the depolarizing channel, decode at the
     receiver (optionally attacked per the EveModel);
  3. both sides measure the virtual pairs - outcomes must be opposite -
     and the virtual QBER decides accept vs abort against a threshold;
  4. on accept, payload qubits are teleported over the surviving real
     pairs, with the measurement bits protected by the Turbo/QPSK/Rician
     classical chain.

The position/result comparison channel for virtual pairs is modeled as
out-of-band and error-free, so detection statistics are not conflated with
classical-channel noise.  Aborted sessions can never reach the payload
phase (the phase machine raises).
"""
from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .cchannel import RicianParams
from .link import send_bits
from .qchannel import (
    DepolarizingParams,
    EveModel,
    NO_EVE,
    depolarize_qubit,
    effective_params,
    eve_entanglement_swap,
)
from .qstate import (
    PHI_PLUS,
    PSI_PLUS,
    StateVector,
    fidelity,
    make_bell,
    measure_qubit,
    tensor,
)
from .shor import exact_logical_rate, shor_decode, shor_encode
from .teleport import (
    ERROR_FIDELITY_TOL,
    BellOutcome,
    receiver_correct,
    sender_measure,
)
from .turbo import TurboConfig

PHASES = ("distributed", "encoded", "transmitted", "decoded", "verified", "aborted", "completed")


class ProtocolError(RuntimeError):
    """Raised when the session phase machine is violated."""


@dataclass(frozen=True)
class QsdcConfig:
    n_pairs: int = 32
    m_virtual: int = 100
    threshold: float | None = None  # None: derive via choose_threshold
    depol: DepolarizingParams = field(
        default_factory=lambda: DepolarizingParams.from_total(0.005)
    )
    eve: EveModel = NO_EVE
    turbo: TurboConfig = field(default_factory=TurboConfig)
    rician: RicianParams = field(default_factory=RicianParams)
    snr_db: float = math.inf
    seed: int = 0
    use_shor: bool = True
    use_turbo: bool = True
    classical_bypass_ber: float | None = None  # i.i.d. bit flips instead of the chain
    max_retries: int = 3

    def __post_init__(self):
        if self.m_virtual < 1:
            raise ValueError("at least one virtual pair is required")
        if self.n_pairs < 0:
            raise ValueError("n_pairs must be >= 0")
        if self.threshold is not None and not 0.0 < self.threshold < 1.0:
            raise ValueError("threshold must lie in (0, 1)")
        if self.m_virtual < 20:
            warnings.warn(
                f"m_virtual = {self.m_virtual} gives coarse detection; "
                "more virtual pairs make the check more precise",
                stacklevel=2,
            )


@dataclass
class SessionState:
    pair_states: list[StateVector]
    virtual_positions: frozenset[int]
    phase: str = "distributed"
    virtual_qber: float | None = None
    decision: str | None = None
    pair_trace: list[tuple] = field(default_factory=list)

    def require_phase(self, expected: str) -> None:
        if self.phase != expected:
            raise ProtocolError(f"expected phase {expected!r}, got {self.phase!r}")


@dataclass(frozen=True)
class QsdcReport:
    virtual_qber: float
    decision: str
    payload_qber: float | None
    eve_present_truth: bool
    per_phase_timings: dict[str, float]
    classical_ber: float | None = None
    attempts: int = 1
    pair_trace: tuple = ()  # (attempt, kind, position, bit_a, bit_b, ok) rows

    def __post_init__(self):
        if self.decision == "abort" and self.payload_qber is not None:
            raise ValueError("aborted sessions carry no payload QBER")


def distribute_pairs(cfg: QsdcConfig, rng) -> SessionState:
    """Create n real + m virtual pairs, decoys at rng-chosen secret slots."""
    total = cfg.n_pairs + cfg.m_virtual
    positions = frozenset(
        int(i) for i in rng.choice(total, size=cfg.m_virtual, replace=False)
    )
    real = make_bell(PHI_PLUS)
    virtual = make_bell(PSI_PLUS)
    states = [virtual if i in positions else real for i in range(total)]
    return SessionState(pair_states=states, virtual_positions=positions)


def _transit_pair(pair: StateVector, cfg: QsdcConfig, channel: DepolarizingParams, rng):
    """Send the receiver-bound half (qubit 1) of one pair through the channel."""
    if cfg.use_shor:
        state, block = shor_encode(pair, 1)
        for pos in block.qubit_indices:
            state, _ = depolarize_qubit(state, pos, channel, rng)
        state, _ = shor_decode(state, block, rng)
    else:
        state, _ = depolarize_qubit(pair, 1, channel, rng)
    if cfg.eve.mode == "swap" and rng.random() < cfg.eve.intercept_fraction:
        state, _ = eve_entanglement_swap(state, rng)
    return state


def transmit_protected(state: SessionState, cfg: QsdcConfig, rng) -> SessionState:
    """Run every pair through the (optionally Shor-protected) quantum channel."""
    state.require_phase("distributed")
    channel = cfg.depol
    if cfg.eve.mode == "depolarize_boost":
        channel = effective_params(cfg.depol, cfg.eve)
    state.pair_states = [
        _transit_pair(pair, cfg, channel, rng) for pair in state.pair_states
    ]
    state.phase = "decoded"
    return state


def resolve_threshold(cfg: QsdcConfig) -> float:
    return (
        cfg.threshold
        if cfg.threshold is not None
        else choose_threshold(cfg.depol, m_virtual=cfg.m_virtual)
    )


def verify_virtual(state: SessionState, cfg: QsdcConfig, rng) -> QsdcReport:
    """Measure the decoy pairs and decide accept vs abort.

    The receiver measures first and reveals positions and results; the
    sender then measures her halves and counts non-opposite outcomes.
    """
    state.require_phase("decoded")
    disagreements = 0
    for pos in sorted(state.virtual_positions):
        pair = state.pair_states[pos]
        bob = measure_qubit(pair, 1, rng)
        alice = measure_qubit(bob.post_state, 0, rng)
        opposite = alice.bit != bob.bit  # required for (|01>+|10>)/sqrt(2)
        if not opposite:
            disagreements += 1
        state.pair_trace.append(("virtual", pos, alice.bit, bob.bit, int(opposite)))
    virtual_qber = disagreements / cfg.m_virtual
    threshold = resolve_threshold(cfg)
    decision = "accept" if virtual_qber <= threshold else "abort"
    state.virtual_qber = virtual_qber
    state.decision = decision
    state.phase = "verified" if decision == "accept" else "aborted"
    return QsdcReport(
        virtual_qber=virtual_qber,
        decision=decision,
        payload_qber=None,
        eve_present_truth=cfg.eve.mode != "none",
        per_phase_timings={},
    )


def _send_classical_bits(bits: np.ndarray, cfg: QsdcConfig, rng) -> np.ndarray:
    """Push measurement bits through the configured classical channel."""
    return send_bits(
        bits,
        rng,
        snr_db=cfg.snr_db,
        rician=cfg.rician,
        turbo_cfg=cfg.turbo if cfg.use_turbo else None,
        bypass_ber=cfg.classical_bypass_ber,
    )


def teleport_payload(
    state: SessionState, payload: list[StateVector], cfg: QsdcConfig, rng
) -> QsdcReport:
    """Teleport payload qubits over verified pairs; bits ride the classical chain."""
    if state.phase == "aborted":
        raise ProtocolError("aborted session cannot carry payload")
    state.require_phase("verified")
    real_positions = [
        i for i in range(len(state.pair_states)) if i not in state.virtual_positions
    ]
    if len(payload) > len(real_positions):
        raise ValueError(
            f"payload of {len(payload)} exceeds {len(real_positions)} surviving pairs"
        )

    sent_bits = np.empty(2 * len(payload), dtype=np.int8)
    residuals = []
    for i, psi in enumerate(payload):
        pair = state.pair_states[real_positions[i]]
        outcome, residual = sender_measure(tensor(psi, pair), rng)
        sent_bits[2 * i] = outcome.m1
        sent_bits[2 * i + 1] = outcome.m2
        residuals.append(residual)

    received_bits = _send_classical_bits(sent_bits, cfg, rng)
    n_errors = 0
    for i, psi in enumerate(payload):
        outcome = BellOutcome(int(received_bits[2 * i]), int(received_bits[2 * i + 1]))
        corrected = receiver_correct(residuals[i], outcome)
        exact = fidelity(corrected, psi) >= 1.0 - ERROR_FIDELITY_TOL
        if not exact:
            n_errors += 1
        state.pair_trace.append(
            ("payload", real_positions[i], int(sent_bits[2 * i]),
             int(sent_bits[2 * i + 1]), int(exact))
        )

    payload_qber = n_errors / len(payload) if payload else 0.0
    classical_ber = (
        float(np.count_nonzero(sent_bits != received_bits)) / sent_bits.size
        if sent_bits.size
        else 0.0
    )
    state.phase = "completed"
    return QsdcReport(
        virtual_qber=state.virtual_qber if state.virtual_qber is not None else 0.0,
        decision="accept",
        payload_qber=payload_qber,
        eve_present_truth=cfg.eve.mode != "none",
        per_phase_timings={},
        classical_ber=classical_ber,
    )


def geometric_threshold(
    p_no_eve: float, p_eve: float, m_virtual: int | None = None
) -> float:
    """Threshold between the clean and attacked decoded-error rates.

    Geometric mean of the two rates, floored at 1/m when the virtual-pair
    count is known (a batch of m decoys cannot resolve rates below one
    error in m).
    """
    base = math.sqrt(p_no_eve * p_eve) if p_no_eve > 0 and p_eve > 0 else 0.0
    floor = 1.0 / m_virtual if m_virtual else 0.0
    return max(base, floor)


def choose_threshold(
    depol: DepolarizingParams,
    delta_pe: float = 0.10,
    m_virtual: int | None = None,
) -> float:
    """Security threshold from the clean and boosted decoded error rates."""
    p_no_eve = exact_logical_rate(depol)
    boosted = DepolarizingParams.from_total(min(1.0, depol.p_eq + delta_pe))
    return geometric_threshold(p_no_eve, exact_logical_rate(boosted), m_virtual)


def run_session(
    cfg: QsdcConfig,
    session_id: int = 0,
    payload: list[StateVector] | None = None,
    collect_trace: bool = False,
) -> QsdcReport:
    """One full session with up to ``max_retries`` restarts on abort.

    With ``collect_trace`` the report carries one trace row per measured
    pair: (attempt, kind, position, bit_a, bit_b, ok).
    """
    timings: dict[str, float] = {}
    trace: list[tuple] = []
    last_report = None
    attempts = 0
    for attempt in range(max(1, cfg.max_retries)):
        attempts += 1
        rng = np.random.default_rng(
            np.random.SeedSequence((cfg.seed, 0x5E55, session_id, attempt))
        )
        t0 = time.perf_counter()
        state = distribute_pairs(cfg, rng)
        t1 = time.perf_counter()
        state = transmit_protected(state, cfg, rng)
        t2 = time.perf_counter()
        report = verify_virtual(state, cfg, rng)
        t3 = time.perf_counter()
        timings["distribute"] = timings.get("distribute", 0.0) + (t1 - t0)
        timings["transmit"] = timings.get("transmit", 0.0) + (t2 - t1)
        timings["verify"] = timings.get("verify", 0.0) + (t3 - t2)
        last_report = report
        if report.decision == "accept":
            if payload:
                report = teleport_payload(state, payload, cfg, rng)
                timings["payload"] = time.perf_counter() - t3
            if collect_trace:
                trace.extend((attempt,) + row for row in state.pair_trace)
            return replace(
                report, per_phase_timings=timings, attempts=attempts,
                pair_trace=tuple(trace),
            )
        if collect_trace:
            trace.extend((attempt,) + row for row in state.pair_trace)
    return replace(
        last_report, per_phase_timings=timings, attempts=attempts,
        pair_trace=tuple(trace),
    )
