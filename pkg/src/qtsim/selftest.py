"""Fast invariant suite behind ``qtsim selftest`` (target: well under 60 s).

Covers the exact/trivial contracts of every layer: Bell-state amplitudes,
gate involutions, noiseless teleportation, the channel sampling rule order,
exhaustive weight-<=1 Shor correction, turbo round trips, QPSK mapping, and
sweep determinism.  Statistical acceptance checks live in the test suite.
"""
from __future__ import annotations

import math

import numpy as np

from .cchannel import llrs_to_bits, qpsk_demodulate_soft, qpsk_modulate, transmit, RicianParams
from .qchannel import DepolarizingParams, EveModel, NO_EVE, effective_params, sample_pauli
from .qsdc import choose_threshold, geometric_threshold
from .qstate import (
    PHI_MINUS,
    PHI_PLUS,
    PSI_MINUS,
    PSI_PLUS,
    PauliError,
    apply_gate,
    basis_state,
    fidelity,
    make_bell,
    random_state,
)
from .shor import PauliPattern, apply_pattern, classify_pattern, shor_decode, shor_encode
from .sweeps import SweepSpec, render_csv, run_sweep
from .teleport import DEFAULT_TEST_STATE, teleport_once
from .turbo import TurboConfig, turbo_decode, turbo_encode


class _ScriptedRng:
    """Feeds a fixed uniform stream to code expecting rng.random()."""

    def __init__(self, values):
        self._values = list(values)

    def random(self):
        return self._values.pop(0)


def _checks():
    sqrt2 = math.sqrt(2.0)
    rng = np.random.default_rng(20240)

    def bell_amplitudes():
        expected = {
            PHI_PLUS: [1 / sqrt2, 0, 0, 1 / sqrt2],
            PHI_MINUS: [1 / sqrt2, 0, 0, -1 / sqrt2],
            PSI_PLUS: [0, 1 / sqrt2, 1 / sqrt2, 0],
            PSI_MINUS: [0, 1 / sqrt2, -1 / sqrt2, 0],
        }
        return all(
            np.allclose(make_bell(kind).amplitudes, amps, atol=1e-12)
            for kind, amps in expected.items()
        )

    def involutions():
        state = random_state(3, rng)
        for gate in ("X", "Z", "H"):
            twice = apply_gate(apply_gate(state, gate, 1), gate, 1)
            if fidelity(twice, state) < 1 - 1e-9:
                return False
        return True

    def teleport_exact():
        return all(
            not teleport_once(random_state(1, rng), rng=rng).is_error
            for _ in range(100)
        )

    def teleport_wrong_bit():
        result = teleport_once(DEFAULT_TEST_STATE, classical_error=(0, 1), rng=rng)
        return result.is_error

    def sampling_rule_order():
        params = DepolarizingParams.from_total(0.3)
        stream = _ScriptedRng([0.0999, 0.1001, 0.2999, 0.3001])
        got = [sample_pauli(params, stream) for _ in range(4)]
        return got == [PauliError.X, PauliError.Z, PauliError.Y, PauliError.I]

    def shor_weight_one():
        psi = random_state(1, rng)
        for pos in range(9):
            for err in (PauliError.X, PauliError.Y, PauliError.Z):
                pattern = PauliPattern(
                    tuple(err if k == pos else PauliError.I for k in range(9))
                )
                if classify_pattern(pattern).logical_error is not PauliError.I:
                    return False
        encoded, block = shor_encode(psi, 0)
        corrupted = apply_pattern(
            encoded,
            block,
            PauliPattern((PauliError.Y,) + (PauliError.I,) * 8),
        )
        decoded, _ = shor_decode(corrupted, block, rng)
        return fidelity(decoded, psi) > 1 - 1e-9

    def turbo_roundtrip():
        cfg = TurboConfig(block_length=256, iterations=4)
        info = rng.integers(0, 2, size=256, dtype=np.int8)
        bits = turbo_encode(info, cfg).to_bits()
        llrs = 20.0 * (1.0 - 2.0 * bits.astype(float))
        return bool(np.array_equal(turbo_decode(llrs, cfg), info))

    def qpsk_roundtrip():
        bits = rng.integers(0, 2, size=64, dtype=np.int8)
        frame = qpsk_modulate(bits, math.inf)
        received = transmit(frame, RicianParams(zeta=1e9), rng)
        return bool(
            np.array_equal(llrs_to_bits(qpsk_demodulate_soft(received)), bits)
        )

    def boost_params():
        boosted = effective_params(
            DepolarizingParams.from_total(0.005),
            EveModel(mode="depolarize_boost", delta_pe=0.10),
        )
        return math.isclose(boosted.p_eq, 0.105)

    def threshold_construction():
        mid = geometric_threshold(1e-4, 0.1213)
        between = 1e-4 < mid < 0.1213
        floored = geometric_threshold(0.0, 0.1213, m_virtual=100) == 0.01
        auto = choose_threshold(DepolarizingParams.from_total(0.005), m_virtual=100)
        return between and floored and 0.0 < auto < 0.1213

    def sweep_determinism():
        spec = SweepSpec(
            sweep_kind="teleport_demo", snr_grid_db=(math.inf,),
            p_eq_list=(0.01,), trials_per_point=400, seed=11,
        )
        a = render_csv(spec, run_sweep(spec))
        b = render_csv(spec, run_sweep(spec))
        return a == b

    return [
        ("bell amplitudes match the four Bell states", bell_amplitudes),
        ("X/Z/H are involutions", involutions),
        ("noiseless teleportation is exact", teleport_exact),
        ("a flipped classical bit corrupts the payload", teleport_wrong_bit),
        ("channel sampler follows the X/Z/Y/I rule order", sampling_rule_order),
        ("all weight-1 Pauli errors decode cleanly", shor_weight_one),
        ("turbo decode inverts encode on clean LLRs", turbo_roundtrip),
        ("QPSK demod inverts modulation on a clean link", qpsk_roundtrip),
        ("eavesdropper boost adds 0.10 to the channel", boost_params),
        ("threshold sits between the two operating rates", threshold_construction),
        ("same-seed sweeps are byte-identical", sweep_determinism),
    ]


def run_selftest(verbose: bool = False) -> int:
    """Run all checks; returns the number of failures."""
    failures = 0
    for name, check in _checks():
        try:
            ok = check()
        except Exception as exc:  # a crash is a failure, keep going
            ok = False
            if verbose:
                print(f"FAIL {name}: {type(exc).__name__}: {exc}")
        if verbose and ok:
            print(f"ok   {name}")
        elif verbose and not ok:
            print(f"FAIL {name}")
        failures += not ok
    return failures
