"""BPSK mapping and fading/AWGN channel simulation.

SNR convention: ``snr_db`` is Es/N0 per BPSK channel use with Es = 1, so
``n0 = 10 ** (-snr_db / 10)``. The non-coherent scheme spends two channel uses
per bit with symbol energy ``a**2`` and uses the same N0 mapping.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

KINDS = ("awgn", "rayleigh_coherent", "rayleigh_noncoherent")
ZERO_GAIN = 1e-12

# stream ids for per-trial generators
STREAM_MESSAGE = 0
STREAM_CHANNEL = 1
STREAM_SAMPLER = 2


def normalize_kind(kind: str) -> str:
    k = kind.strip().lower().replace("-", "_")
    if k not in KINDS:
        raise ValueError(f"unknown channel kind {kind!r}; expected one of {', '.join(KINDS)}")
    return k


@dataclass(frozen=True)
class ChannelConfig:
    kind: str
    snr_db: float
    a: float = 1.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", normalize_kind(self.kind))
        if not np.isfinite(self.snr_db):
            raise ValueError("snr_db must be finite")
        if self.a <= 0:
            raise ValueError("amplitude a must be positive")

    @property
    def n0(self) -> float:
        return snr_to_n0(self.snr_db)


@dataclass(frozen=True)
class CoherentObservation:
    r: np.ndarray
    gain_mag: np.ndarray
    n0: float


@dataclass(frozen=True)
class NoncoherentObservation:
    e1: np.ndarray
    e2: np.ndarray
    a: float
    n0: float


def snr_to_n0(snr_db: float) -> float:
    return float(10.0 ** (-snr_db / 10.0))


def _float_key(x: float) -> int:
    return struct.unpack("<Q", struct.pack("<d", float(x)))[0]


def trial_rng(master_seed: int, snr_db: float, trial_idx: int, stream: int) -> np.random.Generator:
    """Independent generator for one (seed, snr, trial, stream) cell; independent of scheduling."""
    ss = np.random.SeedSequence([int(master_seed), _float_key(snr_db), int(trial_idx), int(stream)])
    return np.random.default_rng(ss)


def bpsk_modulate(bits) -> np.ndarray:
    """Bit 1 -> +1, bit 0 -> -1."""
    b = np.asarray(bits)
    if not np.isin(b, (0, 1)).all():
        raise ValueError("bits must be 0/1")
    return 2.0 * b.astype(np.float64) - 1.0


def hard_decision(symbols) -> np.ndarray:
    return (np.asarray(symbols) > 0).astype(np.uint8)


def sample_rayleigh_gain(rng: np.random.Generator, size=None):
    """CN(0, 1) gain: real and imaginary parts N(0, 1/2), so E|h|^2 = 1."""
    s = np.sqrt(0.5)
    re = rng.normal(0.0, s, size)
    im = rng.normal(0.0, s, size)
    return re + 1j * im


def _complex_noise(rng: np.random.Generator, n0: float, size) -> np.ndarray:
    s = np.sqrt(n0 / 2.0)
    return rng.normal(0.0, s, size) + 1j * rng.normal(0.0, s, size)


def transmit_awgn(x, n0: float, rng: np.random.Generator) -> np.ndarray:
    """Real channel: y = x + n with n ~ N(0, n0/2)."""
    if n0 <= 0:
        raise ValueError("n0 must be positive")
    x = np.asarray(x, dtype=np.float64)
    return x + rng.normal(0.0, np.sqrt(n0 / 2.0), x.shape)


def coherent_statistic(y, h) -> tuple[np.ndarray, np.ndarray]:
    """Phase-derotated projection r = Re{conj(h/|h|) y}, with zero-gain erasures."""
    y = np.asarray(y, dtype=np.complex128)
    h = np.asarray(h, dtype=np.complex128)
    mag = np.abs(h)
    erased = mag < ZERO_GAIN
    safe = np.where(erased, 1.0, mag)
    r = np.real(np.conj(h / safe) * y)
    r = np.where(erased, 0.0, r)
    mag = np.where(erased, 0.0, mag)
    return r, mag


def transmit_rayleigh_coherent(x, n0: float, rng: np.random.Generator) -> CoherentObservation:
    if n0 <= 0:
        raise ValueError("n0 must be positive")
    x = np.asarray(x, dtype=np.float64)
    h = sample_rayleigh_gain(rng, x.shape)
    y = h * x + _complex_noise(rng, n0, x.shape)
    r, mag = coherent_statistic(y, h)
    return CoherentObservation(r, mag, float(n0))


def transmit_rayleigh_noncoherent(x, a: float, n0: float, rng: np.random.Generator) -> NoncoherentObservation:
    """Orthogonal mapping: +1 -> (a, 0), -1 -> (0, a); each slot sees its own fade and noise."""
    if a <= 0 or n0 <= 0:
        raise ValueError("a and n0 must be positive")
    x = np.asarray(x, dtype=np.float64)
    t1 = np.where(x > 0, a, 0.0)
    t2 = np.where(x > 0, 0.0, a)
    h1 = sample_rayleigh_gain(rng, x.shape)
    h2 = sample_rayleigh_gain(rng, x.shape)
    y1 = h1 * t1 + _complex_noise(rng, n0, x.shape)
    y2 = h2 * t2 + _complex_noise(rng, n0, x.shape)
    return NoncoherentObservation(np.abs(y1) ** 2, np.abs(y2) ** 2, float(a), float(n0))


def transmit(x, cfg: ChannelConfig, rng: np.random.Generator):
    if cfg.kind == "awgn":
        return transmit_awgn(x, cfg.n0, rng)
    if cfg.kind == "rayleigh_coherent":
        return transmit_rayleigh_coherent(x, cfg.n0, rng)
    return transmit_rayleigh_noncoherent(x, cfg.a, cfg.n0, rng)
