"""Experiment sweeps: BER/QBER curves, decoded-error curves, session batches.

Every sweep is deterministic under a fixed seed and independent of the
worker count: trials are cut into fixed-size chunks, each chunk re-derives
its own rng stream from (seed, kind, point indices, chunk index), and chunk
results merge in chunk order.  ``wall_ms`` is written as 0 unless timing is
explicitly enabled, so default CSV output is byte-stable run to run.

CSV schema (curve sweeps), one row per grid point:

    sweep_kind,variant,snr_db,p_eq,ber,ber_ci_lo,ber_ci_hi,
    qber,qber_ci_lo,qber_ci_hi,p_shor,p_shor_exact,trials,seed,wall_ms,error

``variant`` distinguishes the uncoded and turbo curves of the classical
sweep; ``error`` carries a message for failed points (the sweep continues).
Session batches (kind ``qsdc_batch``) write one row per session:

    sweep_kind,session_id,decision,virtual_qber,payload_qber,classical_ber,
    attempts,n_pairs,m_virtual,threshold,p_eq,eve_mode,seed,wall_ms,error
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .cchannel import RicianParams
from .link import send_bits
from .metrics import MetricAccumulator
from .qchannel import (
    DepolarizingParams,
    EveModel,
    NO_EVE,
    depolarize_qubit,
    sample_pauli_flags,
)
from .qsdc import QsdcConfig, resolve_threshold, run_session
from .qstate import PHI_PLUS, fidelity, make_bell, random_state, tensor
from .shor import axis_params, exact_logical_rate, pauli_frame_batch, shor_decode, shor_encode
from .teleport import (
    DEFAULT_TEST_STATE,
    ERROR_FIDELITY_TOL,
    BellOutcome,
    receiver_correct,
    sender_measure,
)
from .turbo import TurboConfig

SWEEP_KINDS = ("classical_ber", "qber_vs_snr", "shor_curve", "qsdc_batch", "teleport_demo")
_KIND_CODE = {kind: i for i, kind in enumerate(SWEEP_KINDS)}

SWEEP_COLUMNS = [
    "sweep_kind", "variant", "snr_db", "p_eq",
    "ber", "ber_ci_lo", "ber_ci_hi",
    "qber", "qber_ci_lo", "qber_ci_hi",
    "p_shor", "p_shor_exact", "trials", "seed", "wall_ms", "error",
]
SESSION_COLUMNS = [
    "sweep_kind", "session_id", "decision", "virtual_qber", "payload_qber",
    "classical_ber", "attempts", "n_pairs", "m_virtual", "threshold",
    "p_eq", "eve_mode", "seed", "wall_ms", "error",
]

# Fixed chunk sizes: part of the determinism contract, never thread-dependent.
UNCODED_CHUNK_BITS = 1 << 17
CODED_CHUNK_BLOCKS = 128
QBER_CHUNK_TRIALS = 1 << 16
SHOR_QBER_CHUNK_TRIALS = 1 << 12
SHOR_CHUNK_TRIALS = 1 << 20
SESSION_CHUNK = 8

_STATISTICAL_KINDS = ("classical_ber", "qber_vs_snr", "shor_curve")


@dataclass(frozen=True)
class SweepSpec:
    sweep_kind: str
    snr_grid_db: tuple[float, ...] = (math.inf,)
    p_eq_list: tuple[float, ...] = (0.0,)
    trials_per_point: int = 100_000
    seed: int = 0
    output_path: str | None = None
    threads: int = 1
    rician: RicianParams = field(default_factory=RicianParams)
    turbo: TurboConfig = field(default_factory=TurboConfig)
    eve: EveModel = NO_EVE
    use_turbo: bool = True
    use_shor: bool = False
    coherence: str = "per_symbol"
    classical_bypass_ber: float | None = None
    random_payload: bool = False
    axis_convention: str = "total"  # decoded-error-curve x-axis reading
    n_pairs: int = 16
    m_virtual: int = 100
    threshold: float | None = None
    payload_per_session: int = 0
    timing: bool = False

    def __post_init__(self):
        if self.sweep_kind not in SWEEP_KINDS:
            raise ValueError(f"unknown sweep kind {self.sweep_kind!r}")
        if not self.snr_grid_db or not self.p_eq_list:
            raise ValueError("sweep grids must be nonempty")
        if self.trials_per_point < 1:
            raise ValueError("trials_per_point must be positive")
        if self.sweep_kind in _STATISTICAL_KINDS and self.trials_per_point < 1000:
            raise ValueError(
                f"{self.sweep_kind} needs >= 1000 trials per point for "
                f"meaningful statistics, got {self.trials_per_point}"
            )
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        object.__setattr__(self, "snr_grid_db", tuple(float(s) for s in self.snr_grid_db))
        object.__setattr__(self, "p_eq_list", tuple(float(p) for p in self.p_eq_list))


def _chunk_sizes(total: int, chunk: int) -> list[int]:
    return [min(chunk, total - start) for start in range(0, total, chunk)]


def _rng_for(spec: SweepSpec, *key: int):
    return np.random.default_rng(
        np.random.SeedSequence((spec.seed, _KIND_CODE[spec.sweep_kind], *key))
    )


def _run_chunks(spec: SweepSpec, worker, jobs: list[tuple]):
    """Run chunk jobs serially or on a process pool; results in job order."""
    if spec.threads == 1 or len(jobs) <= 1:
        return [worker(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=spec.threads) as pool:
        return list(pool.map(worker, jobs, chunksize=1))


# ---------------------------------------------------------------------------
# classical_ber: uncoded vs turbo-coded QPSK over the fading link
# ---------------------------------------------------------------------------

def _uncoded_chunk(job) -> tuple[int, int]:
    spec, snr_db, i_snr, chunk_idx, n_bits = job
    rng = _rng_for(spec, i_snr, 0, chunk_idx)
    bits = rng.integers(0, 2, size=n_bits, dtype=np.int8)
    out = send_bits(
        bits, rng, snr_db=snr_db, rician=spec.rician,
        turbo_cfg=None, coherence=spec.coherence,
    )
    return int(np.count_nonzero(bits != out)), n_bits


def _coded_chunk(job) -> tuple[int, int]:
    spec, snr_db, i_snr, chunk_idx, n_blocks = job
    rng = _rng_for(spec, i_snr, 1, chunk_idx)
    k = spec.turbo.block_length
    bits = rng.integers(0, 2, size=n_blocks * k, dtype=np.int8)
    out = send_bits(
        bits, rng, snr_db=snr_db, rician=spec.rician,
        turbo_cfg=spec.turbo, coherence=spec.coherence,
    )
    return int(np.count_nonzero(bits != out)), n_blocks * k


def _classical_point(spec: SweepSpec, snr_db: float, i_snr: int) -> list[dict]:
    n_bits = spec.trials_per_point
    jobs = [
        (spec, snr_db, i_snr, ci, n)
        for ci, n in enumerate(_chunk_sizes(n_bits, UNCODED_CHUNK_BITS))
    ]
    uncoded = MetricAccumulator()
    for err, tot in _run_chunks(spec, _uncoded_chunk, jobs):
        uncoded.add(err, tot)

    rows = [_curve_row(spec, "classical_ber", "uncoded", snr_db, None, ber=uncoded)]
    if spec.use_turbo:
        n_blocks = max(1, math.ceil(n_bits / spec.turbo.block_length))
        jobs = [
            (spec, snr_db, i_snr, ci, nb)
            for ci, nb in enumerate(_chunk_sizes(n_blocks, CODED_CHUNK_BLOCKS))
        ]
        coded = MetricAccumulator()
        for err, tot in _run_chunks(spec, _coded_chunk, jobs):
            coded.add(err, tot)
        rows.append(_curve_row(spec, "classical_ber", "turbo", snr_db, None, ber=coded))
    return rows


# ---------------------------------------------------------------------------
# qber_vs_snr / teleport_demo: teleportation with noisy pre-shared pairs
# ---------------------------------------------------------------------------

@lru_cache(maxsize=1)
def _teleport_tables():
    """Protocol-path matrices for the batched teleport kernel.

    Everything is derived by driving the protocol modules themselves, so the
    batched kernel cannot drift from the per-trial path: pair variants come
    from apply_pauli on a Bell pair, the sender unitary from apply_gate, the
    correction matrices from receiver_correct.
    """
    from .qstate import PauliError, basis_state

    pair_for_flags = {}
    pauli_for_flags = {
        (0, 0): PauliError.I, (1, 0): PauliError.X,
        (0, 1): PauliError.Z, (1, 1): PauliError.Y,
    }
    clean = make_bell(PHI_PLUS)
    from .qstate import apply_pauli

    for flags, pauli in pauli_for_flags.items():
        pair_for_flags[flags] = apply_pauli(clean, 1, pauli).amplitudes
    pair_stack = np.stack(
        [pair_for_flags[(0, 0)], pair_for_flags[(1, 0)],
         pair_for_flags[(0, 1)], pair_for_flags[(1, 1)]]
    )  # indexed by x + 2*z

    from .qstate import apply_gate as _ag

    sender = np.empty((8, 8), dtype=complex)
    for i in range(8):
        col = _ag(_ag(basis_state(3, i), "CNOT", (0, 1)), "H", 0)
        sender[:, i] = col.amplitudes

    corrections = np.empty((4, 2, 2), dtype=complex)
    for o in range(4):
        outcome = BellOutcome(o >> 1, o & 1)
        for i in range(2):
            corrections[o, :, i] = receiver_correct(
                basis_state(1, i), outcome
            ).amplitudes
    return pair_stack, sender, corrections


def _teleport_batch(spec: SweepSpec, p_eq: float, snr_db: float, rng, n_trials: int):
    """Vectorized teleport trials (exact Born sampling, stacked amplitudes)."""
    pair_stack, sender, corrections = _teleport_tables()
    params = DepolarizingParams.from_total(p_eq)
    x_flip, z_flip = sample_pauli_flags(params, rng, n_trials)
    pair_idx = x_flip.astype(np.int8) + 2 * z_flip.astype(np.int8)
    pairs = pair_stack[pair_idx]  # (N, 4)

    if spec.random_payload:
        raw = rng.normal(size=(n_trials, 2)) + 1j * rng.normal(size=(n_trials, 2))
        psis = raw / np.linalg.norm(raw, axis=1, keepdims=True)
    else:
        psis = np.broadcast_to(DEFAULT_TEST_STATE.amplitudes, (n_trials, 2))
    joint = (psis[:, :, None] * pairs[:, None, :]).reshape(n_trials, 8)

    amps = joint @ sender.T
    grouped = amps.reshape(n_trials, 4, 2)
    probs = np.abs(grouped) ** 2
    outcome_probs = probs.sum(axis=2)
    u = rng.random(n_trials)
    outcomes = np.minimum(
        (u[:, None] >= np.cumsum(outcome_probs, axis=1)).sum(axis=1), 3
    )
    rows = np.arange(n_trials)
    residual = grouped[rows, outcomes, :] / np.sqrt(
        outcome_probs[rows, outcomes]
    )[:, None]

    bits = np.empty(2 * n_trials, dtype=np.int8)
    bits[0::2] = outcomes >> 1
    bits[1::2] = outcomes & 1
    received = send_bits(
        bits, rng, snr_db=snr_db, rician=spec.rician,
        turbo_cfg=spec.turbo if spec.use_turbo else None,
        bypass_ber=spec.classical_bypass_ber, coherence=spec.coherence,
    )
    recv_outcomes = (received[0::2].astype(np.int64) << 1) | received[1::2]
    final = np.einsum("nij,nj->ni", corrections[recv_outcomes], residual)
    fid = np.abs(np.einsum("ni,ni->n", np.conj(psis), final)) ** 2
    qubit_errors = int(np.count_nonzero(fid < 1.0 - ERROR_FIDELITY_TOL))
    bit_errors = int(np.count_nonzero(bits != received))
    return qubit_errors, n_trials, bit_errors, 2 * n_trials


def _qber_chunk(job) -> tuple[int, int, int, int]:
    spec, snr_db, p_eq, i_snr, i_p, chunk_idx, n_trials = job
    rng = _rng_for(spec, i_snr, i_p, chunk_idx)
    if not spec.use_shor:
        return _teleport_batch(spec, p_eq, snr_db, rng, n_trials)

    # Shor-protected pairs: full state-vector transit per trial.
    depol = DepolarizingParams.from_total(p_eq)
    clean_pair = make_bell(PHI_PLUS)
    psis = []
    residuals = []
    bits = np.empty(2 * n_trials, dtype=np.int8)
    for t in range(n_trials):
        psi = random_state(1, rng) if spec.random_payload else DEFAULT_TEST_STATE
        state, block = shor_encode(clean_pair, 1)
        for pos in block.qubit_indices:
            state, _ = depolarize_qubit(state, pos, depol, rng)
        pair, _ = shor_decode(state, block, rng)
        outcome, residual = sender_measure(tensor(psi, pair), rng)
        bits[2 * t] = outcome.m1
        bits[2 * t + 1] = outcome.m2
        psis.append(psi)
        residuals.append(residual)

    received = send_bits(
        bits, rng, snr_db=snr_db, rician=spec.rician,
        turbo_cfg=spec.turbo if spec.use_turbo else None,
        bypass_ber=spec.classical_bypass_ber, coherence=spec.coherence,
    )
    qubit_errors = 0
    for t in range(n_trials):
        outcome = BellOutcome(int(received[2 * t]), int(received[2 * t + 1]))
        corrected = receiver_correct(residuals[t], outcome)
        if fidelity(corrected, psis[t]) < 1.0 - ERROR_FIDELITY_TOL:
            qubit_errors += 1
    bit_errors = int(np.count_nonzero(bits != received))
    return qubit_errors, n_trials, bit_errors, 2 * n_trials


def _qber_point(spec: SweepSpec, snr_db: float, p_eq: float, i_snr: int, i_p: int) -> dict:
    chunk = SHOR_QBER_CHUNK_TRIALS if spec.use_shor else QBER_CHUNK_TRIALS
    jobs = [
        (spec, snr_db, p_eq, i_snr, i_p, ci, n)
        for ci, n in enumerate(_chunk_sizes(spec.trials_per_point, chunk))
    ]
    qber = MetricAccumulator()
    ber = MetricAccumulator()
    for qe, qn, be, bn in _run_chunks(spec, _qber_chunk, jobs):
        qber.add(qe, qn)
        ber.add(be, bn)
    return _curve_row(spec, spec.sweep_kind, "", snr_db, p_eq, ber=ber, qber=qber)


# ---------------------------------------------------------------------------
# shor_curve: decoded-error probability vs channel probability
# ---------------------------------------------------------------------------

def _shor_chunk(job) -> int:
    spec, p_axis, i_p, chunk_idx, n_trials = job
    rng = _rng_for(spec, i_p, chunk_idx)
    return pauli_frame_batch(axis_params(p_axis, spec.axis_convention), rng, n_trials)


def _shor_point(spec: SweepSpec, p_axis: float, i_p: int) -> dict:
    jobs = [
        (spec, p_axis, i_p, ci, n)
        for ci, n in enumerate(_chunk_sizes(spec.trials_per_point, SHOR_CHUNK_TRIALS))
    ]
    n_logical = sum(_run_chunks(spec, _shor_chunk, jobs))
    logical = MetricAccumulator(n_total=spec.trials_per_point, n_error=n_logical)
    exact = exact_logical_rate(axis_params(p_axis, spec.axis_convention))
    row = _curve_row(spec, "shor_curve", "", None, p_axis)
    row["p_shor"] = logical.rate
    row["p_shor_exact"] = exact
    row["trials"] = spec.trials_per_point
    return row


# ---------------------------------------------------------------------------
# qsdc_batch: one protocol session per trial index
# ---------------------------------------------------------------------------

def _session_cfg(spec: SweepSpec, p_eq: float, snr_db: float) -> QsdcConfig:
    return QsdcConfig(
        n_pairs=spec.n_pairs,
        m_virtual=spec.m_virtual,
        threshold=spec.threshold,
        depol=DepolarizingParams.from_total(p_eq),
        eve=spec.eve,
        turbo=spec.turbo,
        rician=spec.rician,
        snr_db=snr_db,
        seed=spec.seed,
        use_shor=spec.use_shor,
        use_turbo=spec.use_turbo,
        classical_bypass_ber=spec.classical_bypass_ber,
    )


def session_row(spec: SweepSpec, session_id: int, report, threshold: float) -> dict:
    return {
        "sweep_kind": "qsdc_batch",
        "session_id": session_id,
        "decision": report.decision,
        "virtual_qber": report.virtual_qber,
        "payload_qber": report.payload_qber,
        "classical_ber": report.classical_ber,
        "attempts": report.attempts,
        "n_pairs": spec.n_pairs,
        "m_virtual": spec.m_virtual,
        "threshold": threshold,
        "p_eq": spec.p_eq_list[0],
        "eve_mode": spec.eve.mode,
        "seed": spec.seed,
        "wall_ms": 0,
        "error": "",
    }


def session_payload(spec: SweepSpec, session_id: int):
    if not spec.payload_per_session:
        return None
    payload_rng = _rng_for(spec, 1, session_id)
    return [random_state(1, payload_rng) for _ in range(spec.payload_per_session)]


def _session_chunk(job) -> list[dict]:
    spec, p_eq, snr_db, session_ids = job
    cfg = _session_cfg(spec, p_eq, snr_db)
    threshold = resolve_threshold(cfg)
    return [
        session_row(
            spec, sid,
            run_session(cfg, session_id=sid, payload=session_payload(spec, sid)),
            threshold,
        )
        for sid in session_ids
    ]


def _qsdc_points(spec: SweepSpec) -> list[dict]:
    p_eq = spec.p_eq_list[0]
    snr_db = spec.snr_grid_db[0]
    ids = list(range(spec.trials_per_point))
    jobs = [
        (spec, p_eq, snr_db, ids[i : i + SESSION_CHUNK])
        for i in range(0, len(ids), SESSION_CHUNK)
    ]
    rows: list[dict] = []
    for chunk_rows in _run_chunks(spec, _session_chunk, jobs):
        rows.extend(chunk_rows)
    return rows


# ---------------------------------------------------------------------------
# assembly
# ---------------------------------------------------------------------------

def _curve_row(
    spec: SweepSpec,
    kind: str,
    variant: str,
    snr_db,
    p_eq,
    ber: MetricAccumulator | None = None,
    qber: MetricAccumulator | None = None,
) -> dict:
    row = {c: "" for c in SWEEP_COLUMNS}
    row.update(
        sweep_kind=kind, variant=variant, trials=spec.trials_per_point,
        seed=spec.seed, wall_ms=0, error="",
    )
    if snr_db is not None:
        row["snr_db"] = snr_db
    if p_eq is not None:
        row["p_eq"] = p_eq
    if ber is not None:
        lo, hi = ber.wilson_ci95
        row.update(ber=ber.rate, ber_ci_lo=lo, ber_ci_hi=hi)
    if qber is not None:
        lo, hi = qber.wilson_ci95
        row.update(qber=qber.rate, qber_ci_lo=lo, qber_ci_hi=hi)
    return row


def _error_row(spec: SweepSpec, snr_db, p_eq, exc: Exception) -> dict:
    row = {c: "" for c in SWEEP_COLUMNS}
    row.update(
        sweep_kind=spec.sweep_kind,
        snr_db="" if snr_db is None else snr_db,
        p_eq="" if p_eq is None else p_eq,
        trials=spec.trials_per_point, seed=spec.seed, wall_ms=0,
        error=f"{type(exc).__name__}: {exc}",
    )
    return row


def run_sweep(spec: SweepSpec) -> list[dict]:
    """Run every grid point, optionally writing the CSV to spec.output_path."""
    rows: list[dict] = []
    if spec.sweep_kind == "qsdc_batch":
        rows = _qsdc_points(spec)
    elif spec.sweep_kind == "classical_ber":
        for i_snr, snr_db in enumerate(spec.snr_grid_db):
            t0 = time.perf_counter()
            try:
                point_rows = _classical_point(spec, snr_db, i_snr)
            except Exception as exc:  # point failures must not kill the sweep
                point_rows = [_error_row(spec, snr_db, None, exc)]
            if spec.timing:
                ms = int(1000 * (time.perf_counter() - t0))
                for r in point_rows:
                    r["wall_ms"] = ms
            rows.extend(point_rows)
    elif spec.sweep_kind == "shor_curve":
        for i_p, p_axis in enumerate(spec.p_eq_list):
            t0 = time.perf_counter()
            try:
                row = _shor_point(spec, p_axis, i_p)
            except Exception as exc:
                row = _error_row(spec, None, p_axis, exc)
            if spec.timing:
                row["wall_ms"] = int(1000 * (time.perf_counter() - t0))
            rows.append(row)
    else:  # qber_vs_snr, teleport_demo
        for i_snr, snr_db in enumerate(spec.snr_grid_db):
            for i_p, p_eq in enumerate(spec.p_eq_list):
                t0 = time.perf_counter()
                try:
                    row = _qber_point(spec, snr_db, p_eq, i_snr, i_p)
                except Exception as exc:
                    row = _error_row(spec, snr_db, p_eq, exc)
                if spec.timing:
                    row["wall_ms"] = int(1000 * (time.perf_counter() - t0))
                rows.append(row)

    if spec.output_path:
        text = render_csv(spec, rows)
        try:
            with open(spec.output_path, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            raise SweepIOError(str(exc)) from exc
    return rows


class SweepIOError(OSError):
    """Output path could not be written."""


def _fmt(value) -> str:
    if value is None or value == "":
        return ""
    if isinstance(value, float):
        return format(value, ".10g")
    return str(value)


def spec_summary(spec: SweepSpec) -> list[str]:
    """Deterministic key=value description of a spec (CSV provenance header)."""
    pairs = [
        ("kind", spec.sweep_kind),
        ("seed", spec.seed),
        ("trials_per_point", spec.trials_per_point),
        ("snr_grid_db", ",".join(_fmt(s) for s in spec.snr_grid_db)),
        ("p_eq_list", ",".join(_fmt(p) for p in spec.p_eq_list)),
        ("rician", f"p0={_fmt(spec.rician.p0)};d={_fmt(spec.rician.d)};"
                   f"zeta={_fmt(spec.rician.zeta)};coherence={spec.coherence}"),
        ("turbo", f"K={spec.turbo.block_length};gen={spec.turbo.generators[0]:o},"
                  f"{spec.turbo.generators[1]:o};iters={spec.turbo.iterations};"
                  f"decoder={spec.turbo.decoder};use={spec.use_turbo}"),
        ("shor", f"use={spec.use_shor};axis={spec.axis_convention}"),
        ("eve", f"mode={spec.eve.mode};fraction={_fmt(spec.eve.intercept_fraction)};"
                f"delta={_fmt(spec.eve.delta_pe)}"),
        ("qsdc", f"n={spec.n_pairs};m={spec.m_virtual};"
                 f"threshold={_fmt(spec.threshold) if spec.threshold is not None else 'auto'};"
                 f"payload={spec.payload_per_session}"),
    ]
    if spec.classical_bypass_ber is not None:
        pairs.append(("classical_bypass_ber", _fmt(spec.classical_bypass_ber)))
    return [f"# {k}={v}" for k, v in pairs]


def render_csv(spec: SweepSpec, rows: list[dict]) -> str:
    """Serialize sweep rows with a provenance comment header (no timestamps)."""
    from . import __version__

    columns = SESSION_COLUMNS if spec.sweep_kind == "qsdc_batch" else SWEEP_COLUMNS
    lines = [f"# qtsim {__version__} sweep"]
    lines += spec_summary(spec)
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(row.get(c, "")) for c in columns))
    return "\n".join(lines) + "\n"
