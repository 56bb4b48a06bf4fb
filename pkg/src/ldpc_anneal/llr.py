"""Soft information: per-bit LLRs and Pr(bit = 1) from channel observations.

Polarity follows ``channel.bpsk_modulate``: bit 1 is the +1 symbol, so a
positive LLR favours bit 1.
"""

from __future__ import annotations

import numpy as np

from .channel import CoherentObservation, NoncoherentObservation

LLR_CLAMP = 30.0
PROB_MODES = ("sigmoid", "paper_literal")
LLR_MODES = ("exact", "paper_literal")


def _mode(mode: str, allowed: tuple[str, ...]) -> str:
    m = mode.strip().lower().replace("-", "_")
    if m not in allowed:
        raise ValueError(f"unknown mode {mode!r}; expected one of {', '.join(allowed)}")
    return m


def _clamp(l):
    return np.clip(l, -LLR_CLAMP, LLR_CLAMP)


def llr_awgn(y, n0: float):
    """l = 2y / sigma^2 with sigma^2 = n0/2."""
    return _clamp(4.0 * np.asarray(y, dtype=np.float64) / n0)


def llr_rayleigh_coherent(r, gain_mag, n0: float, mode: str = "exact"):
    """Exact mode: 4|h| r / n0. Paper-literal mode: 2|h| r, no noise normalisation.

    A zero gain (erasure) gives l = 0 in both modes.
    """
    mode = _mode(mode, LLR_MODES)
    r = np.asarray(r, dtype=np.float64)
    g = np.asarray(gain_mag, dtype=np.float64)
    if mode == "exact":
        l = 4.0 * g * r / n0
    else:
        l = 2.0 * g * r
    return _clamp(np.where(g > 0, l, 0.0))


def llr_rayleigh_noncoherent(e1, e2, a: float, n0: float):
    e1 = np.asarray(e1, dtype=np.float64)
    e2 = np.asarray(e2, dtype=np.float64)
    return _clamp((e1 - e2) * a * a / ((a * a + n0) * n0))


def llr_to_p1(l, mode: str = "sigmoid"):
    """Pr(bit = 1) from an LLR.

    ``sigmoid``: e^l / (1 + e^l). ``paper_literal``: (e^l - 1) / (e^l + 1), i.e.
    tanh(l/2), clipped to [0, 1] since negative values are not probabilities.
    """
    mode = _mode(mode, PROB_MODES)
    l = _clamp(np.asarray(l, dtype=np.float64))
    if mode == "sigmoid":
        # evaluate the l >= 0 half and mirror it, so p(-l) == 1 - p(l) exactly
        p = np.where(l >= 0, 1.0 / (1.0 + np.exp(-l)), 0.0)
        p = np.where(l < 0, 1.0 - 1.0 / (1.0 + np.exp(l)), p)
        return p
    return np.clip(np.tanh(l / 2.0), 0.0, 1.0)


def observation_llrs(obs, llr_mode: str = "exact", n0: float | None = None) -> np.ndarray:
    """LLRs for whatever ``channel.transmit`` returned. AWGN observations need ``n0``."""
    if isinstance(obs, CoherentObservation):
        return llr_rayleigh_coherent(obs.r, obs.gain_mag, obs.n0, llr_mode)
    if isinstance(obs, NoncoherentObservation):
        return llr_rayleigh_noncoherent(obs.e1, obs.e2, obs.a, obs.n0)
    if n0 is None:
        raise ValueError("n0 is required for AWGN observations")
    return llr_awgn(obs, n0)
