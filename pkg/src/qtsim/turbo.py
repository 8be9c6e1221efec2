"""Rate-1/3 parallel-concatenated convolutional (turbo) codec.

Constituent code: recursive systematic convolutional encoder with octal
generators (13, 15) - feedback 13, feedforward 15, memory 3, 8 states.
Encoder 1 runs on natural-order bits and is terminated to the zero state
with 3 tail steps; encoder 2 runs on pseudorandomly interleaved bits and is
left unterminated.

Frame layout (bit-exact, ``CodedFrame.to_bits`` / ``split_llrs``):

    systematic[K] || parity1[K] || parity2[K] || tail_sys[3] || tail_par1[3]

so a block carries exactly 3*K + 6 channel bits.

Decoding is iterative BCJR (exact log-MAP via logaddexp, or max-log) with
extrinsic exchange between the two constituent decoders.  LLR convention
throughout: positive favors bit 0.  The decoder is batched over blocks;
``turbo_decode`` is the single-frame wrapper.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@dataclass(frozen=True)
class TurboConfig:
    block_length: int = 1024
    generators: tuple[int, int] = (0o13, 0o15)  # (feedback, feedforward)
    interleaver_seed: int = 1
    iterations: int = 8
    decoder: str = "log_map"

    def __post_init__(self):
        if self.block_length < 40:
            raise ValueError("block_length must be >= 40")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.decoder not in ("log_map", "max_log_map"):
            raise ValueError(f"unknown decoder {self.decoder!r}")


@dataclass(frozen=True)
class CodedFrame:
    """One encoded block; all streams are 0/1 int8 arrays."""

    systematic: np.ndarray
    parity1: np.ndarray
    parity2: np.ndarray
    tail_systematic: np.ndarray
    tail_parity1: np.ndarray

    @property
    def length(self) -> int:
        return int(self.systematic.size)

    def to_bits(self) -> np.ndarray:
        """Serialize to the documented channel layout."""
        return np.concatenate(
            [
                self.systematic,
                self.parity1,
                self.parity2,
                self.tail_systematic,
                self.tail_parity1,
            ]
        )


class RscTrellis:
    """Transition tables for one recursive systematic convolutional code."""

    def __init__(self, feedback: int = 0o13, feedforward: int = 0o15):
        length = feedback.bit_length()
        self.memory = length - 1
        self.n_states = 1 << self.memory
        fb = [(feedback >> (length - 1 - i)) & 1 for i in range(length)]
        ff = [(feedforward >> (length - 1 - i)) & 1 for i in range(length)]
        if fb[0] != 1:
            raise ValueError("feedback polynomial must have a leading 1")

        self.next_state = np.zeros((2, self.n_states), dtype=np.int64)
        self.parity = np.zeros((2, self.n_states), dtype=np.int8)
        self.term_input = np.zeros(self.n_states, dtype=np.int8)
        for s in range(self.n_states):
            s_bits = [(s >> (self.memory - 1 - j)) & 1 for j in range(self.memory)]
            fb_sum = 0
            for j in range(self.memory):
                fb_sum ^= fb[j + 1] & s_bits[j]
            self.term_input[s] = fb_sum  # input that drives the feedback to 0
            for x in (0, 1):
                a = x ^ fb_sum
                p = ff[0] & a
                for j in range(self.memory):
                    p ^= ff[j + 1] & s_bits[j]
                self.parity[x, s] = p
                self.next_state[x, s] = (a << (self.memory - 1)) | (s >> 1)

    def encode(self, bits: np.ndarray, terminate: bool):
        """Parity stream for ``bits``; optionally append the 3 tail steps.

        Returns (parity, tail_inputs, tail_parity); the tails are empty
        arrays when ``terminate`` is False.
        """
        parity = np.empty(bits.size, dtype=np.int8)
        s = 0
        for k, b in enumerate(bits):
            parity[k] = self.parity[b, s]
            s = self.next_state[b, s]
        tail_in = np.empty(self.memory if terminate else 0, dtype=np.int8)
        tail_par = np.empty_like(tail_in)
        if terminate:
            for k in range(self.memory):
                x = self.term_input[s]
                tail_in[k] = x
                tail_par[k] = self.parity[x, s]
                s = self.next_state[x, s]
            assert s == 0, "termination must reach the zero state"
        return parity, tail_in, tail_par


@lru_cache(maxsize=8)
def _trellis(generators: tuple[int, int]) -> RscTrellis:
    return RscTrellis(*generators)


@lru_cache(maxsize=32)
def _permutation(seed: int, length: int) -> np.ndarray:
    return np.random.default_rng(seed).permutation(length)


def interleave(values, seed: int) -> np.ndarray:
    """Pseudorandom permutation of a 1-D sequence (deterministic per seed)."""
    values = np.asarray(values)
    return values[_permutation(seed, values.shape[-1])]


def deinterleave(values, seed: int) -> np.ndarray:
    """Inverse of ``interleave`` with the same seed."""
    values = np.asarray(values)
    out = np.empty_like(values)
    out[_permutation(seed, values.shape[-1])] = values
    return out


def turbo_encode(info, cfg: TurboConfig) -> CodedFrame:
    """Encode one block of ``cfg.block_length`` info bits."""
    info = np.asarray(info, dtype=np.int8)
    if info.size != cfg.block_length:
        raise ValueError(
            f"expected {cfg.block_length} info bits, got {info.size}"
        )
    trellis = _trellis(cfg.generators)
    parity1, tail_in, tail_par1 = trellis.encode(info, terminate=True)
    interleaved = interleave(info, cfg.interleaver_seed)
    parity2, _, _ = trellis.encode(interleaved, terminate=False)
    return CodedFrame(info.copy(), parity1, parity2, tail_in, tail_par1)


def coded_block_bits(cfg: TurboConfig) -> int:
    """Channel bits per block: 3*K plus the termination overhead."""
    trellis = _trellis(cfg.generators)
    return 3 * cfg.block_length + 2 * trellis.memory


def split_llrs(llrs: np.ndarray, cfg: TurboConfig):
    """Split flat channel LLRs (frame layout order) into the five streams."""
    k = cfg.block_length
    m = _trellis(cfg.generators).memory
    llrs = np.atleast_2d(np.asarray(llrs, dtype=float))
    if llrs.shape[-1] != 3 * k + 2 * m:
        raise ValueError(
            f"LLR frame has {llrs.shape[-1]} values, expected {3 * k + 2 * m}"
        )
    return (
        llrs[:, :k],
        llrs[:, k : 2 * k],
        llrs[:, 2 * k : 3 * k],
        llrs[:, 3 * k : 3 * k + m],
        llrs[:, 3 * k + m :],
    )


def _logsumexp_states(a: np.ndarray) -> np.ndarray:
    """log-sum-exp over the state axis of a (B, S) metric array."""
    peak = a.max(axis=1)
    return peak + np.log(np.exp(a - peak[:, None]).sum(axis=1))


def _bcjr(l_sys, l_par, l_apriori, trellis: RscTrellis, terminated: bool, max_log: bool):
    """Batched BCJR pass: posterior info-bit LLRs of shape (B, T).

    All inputs are (B, T).  ``terminated`` pins the backward recursion to
    state 0; otherwise it starts uniform.
    """
    acc = np.maximum if max_log else np.logaddexp
    reduce_states = (lambda a: a.max(axis=1)) if max_log else _logsumexp_states
    batch, steps = l_sys.shape
    n_states = trellis.n_states
    ns0 = trellis.next_state[0]
    ns1 = trellis.next_state[1]
    par_sign0 = (1.0 - 2.0 * trellis.parity[0]).astype(float)  # (S,)
    par_sign1 = (1.0 - 2.0 * trellis.parity[1]).astype(float)

    # Branch metrics for every step at once: (T, B, S).
    half_in = (0.5 * (l_sys + l_apriori)).T[:, :, None]
    half_par = (0.5 * l_par).T[:, :, None]
    g0 = half_in + half_par * par_sign0
    g1 = -half_in + half_par * par_sign1

    alpha = np.empty((steps + 1, batch, n_states))
    alpha[0] = -np.inf
    alpha[0, :, 0] = 0.0
    c0 = np.empty((batch, n_states))
    c1 = np.empty((batch, n_states))
    for t in range(steps):
        c0[:, ns0] = alpha[t] + g0[t]
        c1[:, ns1] = alpha[t] + g1[t]
        nxt = alpha[t + 1]
        acc(c0, c1, out=nxt)
        nxt -= nxt.max(axis=1, keepdims=True)

    beta = np.zeros((batch, n_states))
    if terminated:
        beta[:] = -np.inf
        beta[:, 0] = 0.0
    posterior = np.empty((batch, steps))
    for t in range(steps - 1, -1, -1):
        b0 = beta[:, ns0] + g0[t]
        b1 = beta[:, ns1] + g1[t]
        posterior[:, t] = reduce_states(alpha[t] + b0) - reduce_states(alpha[t] + b1)
        beta = acc(b0, b1)
        beta -= beta.max(axis=1, keepdims=True)
    return posterior


def turbo_decode_batch(llrs, cfg: TurboConfig, iteration_trace: bool = False):
    """Iteratively decode a batch of blocks.

    ``llrs`` is (B, 3K+6) in frame layout order.  Returns (B, K) hard bits,
    or with ``iteration_trace`` a list of per-iteration hard-bit arrays.
    """
    trellis = _trellis(cfg.generators)
    max_log = cfg.decoder == "max_log_map"
    l_sys, l_par1, l_par2, l_tail_sys, l_tail_par1 = split_llrs(llrs, cfg)
    batch, k = l_sys.shape
    perm = _permutation(cfg.interleaver_seed, k)
    inv = np.empty_like(perm)
    inv[perm] = np.arange(k)

    sys1 = np.concatenate([l_sys, l_tail_sys], axis=1)
    par1 = np.concatenate([l_par1, l_tail_par1], axis=1)
    sys2 = l_sys[:, perm]

    apriori1 = np.zeros((batch, k + trellis.memory))
    trace = []
    for _ in range(cfg.iterations):
        post1 = _bcjr(sys1, par1, apriori1, trellis, terminated=True, max_log=max_log)
        extrinsic1 = post1[:, :k] - l_sys - apriori1[:, :k]
        apriori2 = extrinsic1[:, perm]
        post2 = _bcjr(sys2, l_par2, apriori2, trellis, terminated=False, max_log=max_log)
        extrinsic2 = post2 - sys2 - apriori2
        apriori1[:, :k] = extrinsic2[:, inv]
        if iteration_trace:
            trace.append((post2[:, inv] < 0).astype(np.int8))
    decisions = (post2[:, inv] < 0).astype(np.int8)
    return trace if iteration_trace else decisions


def turbo_decode(llrs, cfg: TurboConfig) -> np.ndarray:
    """Decode a single block of channel LLRs to hard info bits."""
    arr = llrs if isinstance(llrs, np.ndarray) else np.asarray(llrs, dtype=float)
    return turbo_decode_batch(arr.reshape(1, -1), cfg)[0]
