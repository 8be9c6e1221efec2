"""Turbo codec: encoder structure, golden vectors, decoder performance."""
import json
import math
import pathlib

import numpy as np
import pytest

from qtsim.turbo import (
    CodedFrame,
    RscTrellis,
    TurboConfig,
    coded_block_bits,
    deinterleave,
    interleave,
    split_llrs,
    turbo_decode,
    turbo_decode_batch,
    turbo_encode,
)

DATA = pathlib.Path(__file__).parent / "data"


def reference_rsc_encode(bits, feedback=0o13, feedforward=0o15):
    """Independent bit-by-bit shift-register encoder (oracle for the tables).

    Registers hold the last three feedback bits, newest first.  The parity
    taps read the feedforward polynomial MSB-first over (new bit, registers).
    """
    regs = [0, 0, 0]
    parity = []
    for x in bits:
        a = x ^ regs[1] ^ regs[2]          # feedback taps of 1011
        parity.append(a ^ regs[0] ^ regs[2])  # feedforward taps of 1101
        regs = [a, regs[0], regs[1]]
    tail_in, tail_par = [], []
    for _ in range(3):
        x = regs[1] ^ regs[2]              # cancels the feedback
        tail_in.append(x)
        tail_par.append(0 ^ regs[0] ^ regs[2])
        regs = [0, regs[0], regs[1]]
    assert regs == [0, 0, 0]
    return np.array(parity, dtype=np.int8), np.array(tail_in, dtype=np.int8), np.array(
        tail_par, dtype=np.int8
    )


def awgn_llrs(coded_bits, ebn0_db, rng, rate):
    n0 = 1.0 / (rate * 10 ** (ebn0_db / 10.0))
    sigma = math.sqrt(n0 / 2.0)
    y = (1.0 - 2.0 * coded_bits) + sigma * rng.normal(size=coded_bits.shape)
    return 2.0 * y / (n0 / 2.0)


# ---------------------------------------------------------------------------
# encoder
# ---------------------------------------------------------------------------

def test_zero_word_encodes_to_zero():
    cfg = TurboConfig(block_length=64)
    frame = turbo_encode(np.zeros(64, dtype=np.int8), cfg)
    assert not frame.to_bits().any()


def test_trellis_matches_reference_encoder():
    rng = np.random.default_rng(60)
    trellis = RscTrellis()
    for _ in range(20):
        bits = rng.integers(0, 2, size=100, dtype=np.int8)
        parity, tail_in, tail_par = trellis.encode(bits, terminate=True)
        ref_parity, ref_tail_in, ref_tail_par = reference_rsc_encode(bits)
        assert np.array_equal(parity, ref_parity)
        assert np.array_equal(tail_in, ref_tail_in)
        assert np.array_equal(tail_par, ref_tail_par)


def test_golden_vectors():
    for vec in json.loads((DATA / "turbo_golden.json").read_text()):
        cfg = TurboConfig(
            block_length=vec["block_length"],
            generators=tuple(vec["generators"]),
            interleaver_seed=vec["interleaver_seed"],
        )
        frame = turbo_encode(np.array(vec["info"], dtype=np.int8), cfg)
        assert frame.to_bits().tolist() == vec["coded"]


def test_rate_accounting_exact():
    cfg = TurboConfig(block_length=1024)
    frame = turbo_encode(np.zeros(1024, dtype=np.int8), cfg)
    assert frame.to_bits().size == 3 * 1024 + 6
    assert coded_block_bits(cfg) == 3078
    assert frame.length == 1024


def test_single_bit_has_long_impulse_response():
    # recursive encoder: one flipped info bit disturbs parity1 to the end
    cfg = TurboConfig(block_length=256)
    for pos in (0, 100, 250):
        info = np.zeros(256, dtype=np.int8)
        info[pos] = 1
        frame = turbo_encode(info, cfg)
        nz = np.nonzero(frame.parity1)[0]
        assert nz.size > 0 and nz[0] >= pos
        # feedback 13 (octal) has period 7: parity keeps toggling until the tail
        assert nz[-1] > 256 - 8


def test_encode_is_deterministic():
    cfg = TurboConfig(block_length=128)
    info = np.random.default_rng(61).integers(0, 2, size=128, dtype=np.int8)
    a = turbo_encode(info, cfg).to_bits()
    b = turbo_encode(info, cfg).to_bits()
    assert np.array_equal(a, b)


def test_encode_rejects_wrong_length():
    with pytest.raises(ValueError):
        turbo_encode(np.zeros(100, dtype=np.int8), TurboConfig(block_length=128))


def test_config_validation():
    with pytest.raises(ValueError):
        TurboConfig(block_length=8)
    with pytest.raises(ValueError):
        TurboConfig(iterations=0)
    with pytest.raises(ValueError):
        TurboConfig(decoder="viterbi")


# ---------------------------------------------------------------------------
# interleaver
# ---------------------------------------------------------------------------

def test_interleave_roundtrip_and_multiset():
    rng = np.random.default_rng(62)
    values = rng.normal(size=257)
    shuffled = interleave(values, seed=5)
    assert sorted(shuffled) == sorted(values)
    assert not np.array_equal(shuffled, values)
    assert np.array_equal(deinterleave(shuffled, seed=5), values)


def test_interleave_same_seed_same_permutation():
    values = np.arange(100)
    assert np.array_equal(interleave(values, seed=9), interleave(values, seed=9))
    assert not np.array_equal(interleave(values, seed=9), interleave(values, seed=10))


# ---------------------------------------------------------------------------
# decoder
# ---------------------------------------------------------------------------

def test_noiseless_decode_recovers_info():
    cfg = TurboConfig(block_length=256, iterations=4)
    rng = np.random.default_rng(63)
    info = rng.integers(0, 2, size=256, dtype=np.int8)
    bits = turbo_encode(info, cfg).to_bits()
    llrs = 30.0 * (1.0 - 2.0 * bits.astype(float))
    assert np.array_equal(turbo_decode(llrs, cfg), info)


def test_max_log_map_decoder_also_recovers():
    cfg = TurboConfig(block_length=256, iterations=4, decoder="max_log_map")
    rng = np.random.default_rng(64)
    info = rng.integers(0, 2, size=256, dtype=np.int8)
    bits = turbo_encode(info, cfg).to_bits()
    llrs = 30.0 * (1.0 - 2.0 * bits.astype(float))
    assert np.array_equal(turbo_decode(llrs, cfg), info)


def test_split_llrs_layout():
    cfg = TurboConfig(block_length=64)
    llrs = np.arange(3 * 64 + 6, dtype=float)
    sys, p1, p2, tail_sys, tail_p1 = split_llrs(llrs, cfg)
    assert np.array_equal(sys[0], np.arange(64))
    assert np.array_equal(p1[0], np.arange(64, 128))
    assert np.array_equal(p2[0], np.arange(128, 192))
    assert np.array_equal(tail_sys[0], [192, 193, 194])
    assert np.array_equal(tail_p1[0], [195, 196, 197])
    with pytest.raises(ValueError):
        split_llrs(np.zeros(100), cfg)


def _run_awgn(cfg, ebn0_db, n_blocks, seed):
    rng = np.random.default_rng(seed)
    rate = cfg.block_length / coded_block_bits(cfg)
    infos = rng.integers(0, 2, size=(n_blocks, cfg.block_length), dtype=np.int8)
    coded = np.stack([turbo_encode(infos[i], cfg).to_bits() for i in range(n_blocks)])
    llrs = awgn_llrs(coded.astype(float), ebn0_db, rng, rate)
    decoded = turbo_decode_batch(llrs, cfg)
    return int(np.count_nonzero(decoded != infos)), infos.size


def test_waterfall_ber_at_2db():
    # regression: measured 9.8e-6 at first build; the contract is < 1e-4
    cfg = TurboConfig()
    errors, total = _run_awgn(cfg, 2.0, 1000, seed=65)
    assert total >= 1_000_000
    assert errors / total < 1e-4


def test_no_error_floor_at_4db():
    cfg = TurboConfig()
    errors, total = _run_awgn(cfg, 4.0, 2000, seed=66)
    assert errors / total < 5e-6


def test_iteration_trace_ber_non_increasing():
    cfg = TurboConfig(block_length=1024, iterations=8)
    rng = np.random.default_rng(67)
    rate = cfg.block_length / coded_block_bits(cfg)
    n_blocks = 100
    infos = rng.integers(0, 2, size=(n_blocks, cfg.block_length), dtype=np.int8)
    coded = np.stack([turbo_encode(infos[i], cfg).to_bits() for i in range(n_blocks)])
    llrs = awgn_llrs(coded.astype(float), 0.5, rng, rate)
    trace = turbo_decode_batch(llrs, cfg, iteration_trace=True)
    bers = [np.count_nonzero(step != infos) / infos.size for step in trace]
    n = infos.size
    for earlier, later in zip(bers, bers[1:]):
        sigma = math.sqrt(max(earlier, 1e-9) * (1 - earlier) / n)
        assert later <= earlier + 4 * sigma
    assert bers[-1] < bers[0]
