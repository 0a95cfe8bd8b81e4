"""Rayleigh block-fading simulation with coherent and non-coherent ML decoding.

Each trial is one coherence block: a uniformly drawn codeword ``Phi``, a fresh
channel ``H`` (``n_t x n_r``) and noise ``N`` (``T x n_r``), received as
``Y = sqrt(rho T / n_t) Phi H + N``.

Random numbers come from a counter-based generator (Philox-4x64-10).  The key
of an SNR point is derived from ``(master_seed, snr_index)`` and trial ``t``
reads a fixed number of 256-bit blocks starting at counter
``t * blocks_per_trial``.  A trial's draws therefore never depend on how the
trials are split into chunks or spread across workers.
"""

from __future__ import annotations

import csv
import io
import math
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .codes import MODES, SpaceTimeCode, load_code
from .errors import DomainMismatchError, InvalidSpecError

RNG_NAME = "philox4x64-10"
RNG_SCHEME = "key=SeedSequence(master_seed,spawn_key=(snr_index,)).generate_state(2,uint64); counter=trial*blocks_per_trial"
CSV_COLUMNS = ("snr_db", "trials", "symbol_errors", "bit_errors", "ser", "ber", "ber_lo95", "ber_hi95")
#: Default number of trials generated and decoded together.
CHUNK_TRIALS = 4096
#: Rough cap on the number of complex entries in a decoder metric buffer.
METRIC_BUDGET = 4_000_000


def snr_linear(snr_db: float) -> float:
    return 10.0 ** (snr_db / 10.0)


@dataclass(frozen=True)
class ChannelRealization:
    H: np.ndarray  # n_t x n_r
    N: np.ndarray  # T x n_r


def transmit(Phi: np.ndarray, rho: float, realization: ChannelRealization) -> np.ndarray:
    """``Y = sqrt(rho T / n_t) Phi H + N``."""
    Phi = np.asarray(Phi)
    H, N = np.asarray(realization.H), np.asarray(realization.N)
    T, n_t = Phi.shape
    if H.shape[0] != n_t or N.shape != (T, H.shape[1]):
        raise DomainMismatchError(f"shapes Phi {Phi.shape}, H {H.shape}, N {N.shape} are inconsistent")
    return math.sqrt(rho * T / n_t) * (Phi @ H) + N


def _codewords(code) -> np.ndarray:
    return code.codewords if isinstance(code, SpaceTimeCode) else np.asarray(code, dtype=complex)


def ml_coherent(Y: np.ndarray, H: np.ndarray, code, rho: float) -> int:
    """``argmin_k ||Y - sqrt(rho T / n_t) Phi_k H||_F``, smallest index on ties."""
    C = _codewords(code)
    _, T, n_t = C.shape
    c = math.sqrt(rho * T / n_t)
    resid = Y[None] - c * (C @ H)
    return int(np.argmin(np.sum(np.abs(resid) ** 2, axis=(1, 2))))


def ml_noncoherent(Y: np.ndarray, code) -> int:
    """``argmax_k ||Y* Phi_k||_F``, smallest index on ties."""
    C = _codewords(code)
    metric = np.sum(np.abs(np.swapaxes(C.conj(), 1, 2) @ Y) ** 2, axis=(1, 2))
    return int(np.argmax(metric))


def _batch_rows(K: int, width: int) -> int:
    return max(1, METRIC_BUDGET // max(1, K * width))


def decode_coherent(Y: np.ndarray, H: np.ndarray, C: np.ndarray) -> np.ndarray:
    """Batched coherent ML for ``Y`` of shape ``(B, T, n_r)`` and ``H`` ``(B, n_t, n_r)``.

    All codewords have orthonormal columns, so ``||Phi H||`` does not depend on
    the codeword and the rule reduces to ``argmax Re tr(Phi* Y H*)``.
    """
    K = C.shape[0]
    Z = (Y @ np.swapaxes(H.conj(), 1, 2)).reshape(Y.shape[0], -1)
    flat = C.reshape(K, -1).conj().T
    out = np.empty(Y.shape[0], dtype=np.int64)
    step = _batch_rows(K, 1)
    for s in range(0, Y.shape[0], step):
        out[s:s + step] = np.argmax((Z[s:s + step] @ flat).real, axis=1)
    return out


def decode_noncoherent(Y: np.ndarray, C: np.ndarray) -> np.ndarray:
    """Batched non-coherent ML for ``Y`` of shape ``(B, T, n_r)``."""
    K, T, n_t = C.shape
    B, _, n_r = Y.shape
    P = C.conj().transpose(0, 2, 1).reshape(K * n_t, T)
    out = np.empty(B, dtype=np.int64)
    step = _batch_rows(K * n_t, n_r)
    for s in range(0, B, step):
        Yb = Y[s:s + step]
        b = Yb.shape[0]
        G = (P @ Yb.transpose(1, 0, 2).reshape(T, b * n_r)).reshape(K, n_t, b, n_r)
        metric = np.sum(G.real**2 + G.imag**2, axis=(1, 3))
        out[s:s + step] = np.argmax(metric, axis=0)
    return out


# --- random numbers -------------------------------------------------------------

def point_key(master_seed: int, snr_index: int) -> np.ndarray:
    seq = np.random.SeedSequence(master_seed, spawn_key=(snr_index,))
    return seq.generate_state(2, np.uint64)


def words_per_trial(T: int, n_t: int, n_r: int) -> int:
    """Raw 64-bit words consumed by one trial, rounded up to whole Philox blocks."""
    need = 1 + 2 * (n_t + T) * n_r  # codeword index, then real/imag parts
    need += need % 2  # Box-Muller consumes uniforms in pairs
    return 4 * math.ceil(need / 4)


def _uniform53(raw: np.ndarray) -> np.ndarray:
    # open interval (0, 1): safe for log in Box-Muller
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def draw_trials(key: np.ndarray, start: int, count: int, K: int, T: int, n_t: int, n_r: int):
    """Codeword indices, channels and noise for trials ``start .. start+count-1``."""
    words = words_per_trial(T, n_t, n_r)
    bitgen = np.random.Philox(key=key, counter=start * (words // 4))
    raw = bitgen.random_raw(count * words).reshape(count, words)
    index = np.minimum((_uniform53(raw[:, 0]) * K).astype(np.int64), K - 1)
    n_normal = 2 * (n_t + T) * n_r
    u = _uniform53(raw[:, 1:1 + n_normal + n_normal % 2])
    u1, u2 = u[:, 0::2], u[:, 1::2]
    r = np.sqrt(-np.log(u1))  # variance 1/2 per component
    z = np.empty((count, u1.shape[1] * 2))
    z[:, 0::2] = r * np.cos(2 * np.pi * u2)
    z[:, 1::2] = r * np.sin(2 * np.pi * u2)
    cz = z[:, 0:n_normal:2] + 1j * z[:, 1:n_normal:2]
    H = cz[:, : n_t * n_r].reshape(count, n_t, n_r)
    N = cz[:, n_t * n_r:].reshape(count, T, n_r)
    return index, H, N


# --- results --------------------------------------------------------------------

def wilson_interval(successes: int, n: int, level: float = 0.95) -> tuple[float, float]:
    if n <= 0:
        return 0.0, 1.0
    z = statistics.NormalDist().inv_cdf(0.5 + level / 2)
    p = successes / n
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == n else min(1.0, centre + half)
    return lo, hi


@dataclass(frozen=True)
class BerPoint:
    snr_db: float
    trials: int
    symbol_errors: int
    bit_errors: int
    bits: int  # bits per codeword label

    @property
    def ser(self) -> float:
        return self.symbol_errors / self.trials

    @property
    def ber(self) -> float:
        return self.bit_errors / (self.trials * self.bits) if self.bits else 0.0

    @property
    def ber_interval(self) -> tuple[float, float]:
        return wilson_interval(self.bit_errors, self.trials * self.bits)


@dataclass(frozen=True)
class BerCurve:
    points: tuple[BerPoint, ...]
    metadata: dict = field(default_factory=dict, compare=False)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for p in self.points:
            lo, hi = p.ber_interval
            writer.writerow([repr(float(p.snr_db)), p.trials, p.symbol_errors, p.bit_errors,
                             repr(p.ser), repr(p.ber), repr(lo), repr(hi)])
        return buf.getvalue()

    def write(self, path) -> None:
        path = Path(path)
        path.write_text(self.to_csv())
        meta = "".join(f"{k} = {v}\n" for k, v in self.metadata.items())
        path.with_name(path.name + ".meta").write_text(meta)


# --- harness --------------------------------------------------------------------

@dataclass(frozen=True)
class SimConfig:
    code: SpaceTimeCode | str | Path
    snr_grid_db: Sequence[float]
    trials_per_point: int
    master_seed: int = 0
    n_r: int = 1
    mode: str | None = None  # defaults to the code's own mode
    workers: int = 1
    chunk_trials: int = CHUNK_TRIALS

    def __post_init__(self):
        object.__setattr__(self, "snr_grid_db", tuple(float(s) for s in self.snr_grid_db))
        if not self.snr_grid_db:
            raise InvalidSpecError("SNR grid is empty")
        if self.trials_per_point < 1:
            raise InvalidSpecError(f"trials must be >= 1, got {self.trials_per_point}")
        if not 0 <= self.master_seed < 2**64:
            raise InvalidSpecError("master seed must be an unsigned 64-bit integer")
        if self.n_r < 1 or self.workers < 1 or self.chunk_trials < 1:
            raise InvalidSpecError("n_r, workers and chunk_trials must be positive")
        if self.mode is not None and self.mode not in MODES:
            raise InvalidSpecError(f"unknown mode {self.mode!r}")

    def resolve_code(self) -> SpaceTimeCode:
        return self.code if isinstance(self.code, SpaceTimeCode) else load_code(self.code)


def _run_chunk(C, mode, rho, key, start, count, n_r, bits):
    K, T, n_t = C.shape
    index, H, N = draw_trials(key, start, count, K, T, n_t, n_r)
    Y = math.sqrt(rho * T / n_t) * (C[index] @ H) + N
    decided = decode_coherent(Y, H, C) if mode == "coherent" else decode_noncoherent(Y, C)
    wrong = decided != index
    bit_errors = int(np.bitwise_count(index[wrong] ^ decided[wrong]).sum()) if bits else 0
    return int(wrong.sum()), bit_errors


def run_ber(config: SimConfig) -> BerCurve:
    """Monte Carlo SER/BER over the SNR grid; deterministic for a given seed."""
    code = config.resolve_code()
    mode = config.mode or code.mode
    C = code.codewords
    bits = code.bits
    points = []
    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        for i, snr_db in enumerate(config.snr_grid_db):
            rho = snr_linear(snr_db)
            key = point_key(config.master_seed, i)
            starts = range(0, config.trials_per_point, config.chunk_trials)
            jobs = [pool.submit(_run_chunk, C, mode, rho, key, s,
                                min(config.chunk_trials, config.trials_per_point - s), config.n_r, bits)
                    for s in starts]
            results = [j.result() for j in jobs]
            points.append(BerPoint(snr_db, config.trials_per_point,
                                   sum(r[0] for r in results), sum(r[1] for r in results), bits))
    metadata = {
        "rng": RNG_NAME,
        "rng_scheme": RNG_SCHEME,
        "words_per_trial": words_per_trial(code.T, code.n_t, config.n_r),
        "master_seed": config.master_seed,
        "mode": mode,
        "n_r": config.n_r,
        "cardinality": len(code),
        "bits_per_codeword": bits,
        "labeling": "natural binary of the codeword index",
    }
    return BerCurve(tuple(points), metadata)
