"""Sum-product belief propagation over the Tanner graph (flooding schedule)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codes import ParityCheckMatrix

_ATANH_LIMIT = 1.0 - 1e-12


@dataclass(frozen=True)
class BpConfig:
    max_iters: int = 50
    early_stop: bool = True
    llr_clamp: float = 30.0

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass(frozen=True)
class BpResult:
    bits: np.ndarray
    converged: bool
    iterations: int


class _Graph:
    """Edge arrays in row-major order, padded per check to the max row weight."""

    def __init__(self, h: ParityCheckMatrix):
        dc = max(h.row_weights)
        self.slot = np.full((h.rows, dc), -1, dtype=np.int64)
        var, e = [], 0
        for c, bits in enumerate(h.row_index):
            for k, b in enumerate(bits):
                self.slot[c, k] = e
                var.append(b)
                e += 1
        self.var = np.array(var, dtype=np.int64)
        self.mask = self.slot >= 0
        self.n = h.cols
        self.dense = h.dense.astype(np.int64)


def _exclusive_products(t: np.ndarray) -> np.ndarray:
    """Product of each row's other entries, without division."""
    ones = np.ones((t.shape[0], 1))
    left = np.cumprod(np.hstack([ones, t[:, :-1]]), axis=1)
    right = np.cumprod(np.hstack([ones, t[:, :0:-1]]), axis=1)[:, ::-1]
    return left * right


def bp_decode(h: ParityCheckMatrix, channel_llrs, cfg: BpConfig | None = None) -> BpResult:
    """Decode with positive LLR meaning bit 1; a zero posterior decides 0."""
    cfg = cfg or BpConfig()
    llr = np.clip(np.asarray(channel_llrs, dtype=np.float64).ravel(), -cfg.llr_clamp, cfg.llr_clamp)
    if llr.shape[0] != h.cols:
        raise ValueError(f"LLR length {llr.shape[0]} != n={h.cols}")
    g = _Graph(h)
    to_check = llr[g.var]
    bits = (llr > 0).astype(np.uint8)
    it = 0
    for it in range(1, cfg.max_iters + 1):
        t = np.ones(g.slot.shape)
        t[g.mask] = np.tanh(to_check[g.slot[g.mask]] / 2.0)
        prod = np.clip(_exclusive_products(t), -_ATANH_LIMIT, _ATANH_LIMIT)
        to_var = np.clip(2.0 * np.arctanh(prod[g.mask]), -cfg.llr_clamp, cfg.llr_clamp)
        posterior = llr + np.bincount(g.var, weights=to_var, minlength=g.n)
        bits = (posterior > 0).astype(np.uint8)
        if cfg.early_stop and not (g.dense @ bits % 2).any():
            return BpResult(bits, True, it)
        to_check = np.clip(posterior[g.var] - to_var, -cfg.llr_clamp, cfg.llr_clamp)
    converged = not (g.dense @ bits % 2).any()
    return BpResult(bits, bool(converged), it)
