"""Classical link: QPSK over Rician fading with soft-output demodulation.

The fading coefficient is

    H = sqrt(p0/d^2) * ( sqrt(zeta/(zeta+1)) * H_los
                         + sqrt(1/(zeta+1)) * H_nlos )

with H_los = exp(i*los_phase) deterministic and H_nlos circularly-symmetric
complex Gaussian of unit variance, so E[|H|^2] = p0/d^2 for every zeta.
zeta = 0 is pure Rayleigh scatter; zeta -> inf is a clean line-of-sight link.

SNR convention: ``snr_db`` is average received symbol energy over noise
spectral density, Es/N0, with Es measured at the modulator (unit-energy
constellation) and the average channel gain folded in.  Each QPSK branch
(I or Q) then sees a per-bit detection SNR of Es/N0.

Demodulation assumes perfect channel state information: matched filtering
by conj(H) followed by per-branch Gaussian LLRs.  LLR sign convention:
positive means bit 0 is more likely.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class RicianParams:
    """Fading model parameters; defaults model a strong-LOS relay link."""

    p0: float = 1.0
    d: float = 1.0
    zeta: float = 10.0
    los_phase: float = 0.0

    def __post_init__(self):
        if self.p0 <= 0:
            raise ValueError("p0 must be positive")
        if self.d <= 0:
            raise ValueError("d must be positive")
        if self.zeta < 0:
            raise ValueError("zeta must be >= 0")

    @property
    def mean_power(self) -> float:
        """E[|H|^2] = p0 / d^2."""
        return self.p0 / self.d**2


@dataclass(frozen=True)
class SymbolFrame:
    """Unit-average-energy constellation points plus the link SNR."""

    symbols: np.ndarray
    snr_db: float

    def __post_init__(self):
        symbols = np.asarray(self.symbols, dtype=complex)
        if symbols.size == 0:
            raise ValueError("SymbolFrame must be nonempty")
        object.__setattr__(self, "symbols", symbols)


@dataclass(frozen=True)
class ReceivedFrame:
    """Channel output: received samples, realized fading, and noise variance.

    ``noise_var`` is the complex noise variance N0 (per-component N0/2).
    """

    symbols: np.ndarray
    csi: np.ndarray
    noise_var: float


@dataclass(frozen=True)
class LlrFrame:
    """Per-bit log-likelihood ratios; positive favors bit 0."""

    llrs: np.ndarray


def qpsk_modulate(bits, snr_db: float = math.inf) -> SymbolFrame:
    """Gray-mapped QPSK: pair (b0, b1) -> ((1-2*b0) + i*(1-2*b1))/sqrt(2)."""
    bits = np.asarray(bits, dtype=np.int8)
    if bits.size % 2 != 0:
        raise ValueError(f"QPSK needs an even bit count, got {bits.size}")
    b0 = bits[0::2]
    b1 = bits[1::2]
    symbols = ((1.0 - 2.0 * b0) + 1j * (1.0 - 2.0 * b1)) / _SQRT2
    return SymbolFrame(symbols, snr_db)


def fading_coefficients(params: RicianParams, rng, n: int) -> np.ndarray:
    """Draw n i.i.d. Rician coefficients."""
    scale = math.sqrt(params.mean_power)
    los = math.sqrt(params.zeta / (params.zeta + 1.0)) * np.exp(1j * params.los_phase)
    nlos_sd = math.sqrt(1.0 / (params.zeta + 1.0) / 2.0)
    nlos = nlos_sd * (rng.normal(size=n) + 1j * rng.normal(size=n))
    return scale * (los + nlos)


def fading_coefficient(params: RicianParams, rng) -> complex:
    """Draw one Rician coefficient."""
    return complex(fading_coefficients(params, rng, 1)[0])


def transmit(
    frame: SymbolFrame,
    params: RicianParams,
    rng,
    coherence: str = "per_symbol",
) -> ReceivedFrame:
    """y_k = H_k * x_k + n_k with noise set by the frame's Es/N0.

    ``coherence`` 'per_symbol' draws an independent H per symbol;
    'per_frame' holds one H for the whole frame.
    """
    x = frame.symbols
    if coherence == "per_symbol":
        h = fading_coefficients(params, rng, x.size)
    elif coherence == "per_frame":
        h = np.full(x.size, fading_coefficient(params, rng))
    else:
        raise ValueError(f"unknown coherence mode {coherence!r}")
    if math.isinf(frame.snr_db):
        noise_var = 0.0
        y = h * x
    else:
        noise_var = params.mean_power / 10.0 ** (frame.snr_db / 10.0)
        noise = math.sqrt(noise_var / 2.0) * (
            rng.normal(size=x.size) + 1j * rng.normal(size=x.size)
        )
        y = h * x + noise
    return ReceivedFrame(y, h, noise_var)


def qpsk_demodulate_soft(received, csi=None, noise_var: float | None = None) -> LlrFrame:
    """Coherent per-bit LLRs from matched filtering with known CSI.

    Accepts a ReceivedFrame (csi/noise_var taken from it) or a raw symbol
    array plus explicit csi and noise_var.  Output order matches the
    modulator: [b0 of symbol 0, b1 of symbol 0, b0 of symbol 1, ...].
    """
    if isinstance(received, ReceivedFrame):
        symbols = received.symbols
        csi = received.csi if csi is None else np.asarray(csi)
        noise_var = received.noise_var if noise_var is None else noise_var
    else:
        symbols = np.asarray(received, dtype=complex)
        if csi is None or noise_var is None:
            raise ValueError("raw-symbol demodulation needs csi and noise_var")
        csi = np.asarray(csi)
    if csi.shape != symbols.shape:
        raise ValueError(f"csi length {csi.size} != symbol count {symbols.size}")
    # Floor keeps the noiseless limit finite; LLRs just become huge.
    scale = 2.0 * _SQRT2 / max(noise_var, 1e-12)
    z = np.conj(csi) * symbols
    llrs = np.empty(2 * symbols.size)
    llrs[0::2] = scale * z.real
    llrs[1::2] = scale * z.imag
    return LlrFrame(llrs)


def llrs_to_bits(llrs) -> np.ndarray:
    """Hard decisions from LLRs (positive -> 0)."""
    arr = llrs.llrs if isinstance(llrs, LlrFrame) else np.asarray(llrs)
    return (arr < 0).astype(np.int8)
