"""Pick one codeword out of a SampleSet.

The annealer returns several candidates per decode. Candidates that violate a
parity check are dropped, duplicates collapse, and the survivor closest to the
channel posterior wins (``select_min_distance``). ``select_lowest_energy`` is
the conventional choice it is compared against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codes import CodeError, GeneratorMatrix, ParityCheckMatrix
from .solvers import SampleSet


@dataclass(frozen=True, eq=False)
class CandidatePool:
    """Distinct decision-bit vectors with the lowest model energy seen for each.

    ``satisfies[i]`` records whether candidate ``i`` has zero syndrome;
    ``fallback`` is set when no read satisfied every check and the pool holds
    the unfiltered candidates instead.
    """

    bits: np.ndarray
    energies: np.ndarray
    satisfies: np.ndarray
    raw_reads: int
    after_filter: int
    after_dedupe: int
    fallback: bool

    def __len__(self):
        return len(self.energies)

    def diagnostics(self) -> str:
        return (
            f"reads={self.raw_reads} valid={self.after_filter} unique={self.after_dedupe} "
            f"fallback={int(self.fallback)}"
        )


def _lex_order(bits: np.ndarray, *primary) -> np.ndarray:
    keys = tuple(bits[:, i] for i in range(bits.shape[1] - 1, -1, -1)) + tuple(reversed(primary))
    return np.lexsort(keys)


def filter_and_dedupe(samples: SampleSet, h: ParityCheckMatrix, constrained: bool = True) -> CandidatePool:
    """Strip ancillas, keep zero-syndrome reads, collapse duplicates.

    With ``constrained=False`` nothing is filtered, which gives the plain
    annealer view used by the lowest-energy baseline.
    """
    if len(samples) == 0:
        raise ValueError("empty SampleSet")
    n = h.cols
    dec = samples.assignments[:, :n]
    energies = samples.energies
    valid = ~((dec.astype(np.int64) @ h.dense.T.astype(np.int64)) % 2).any(axis=1)
    raw = samples.num_reads
    after_filter = int(samples.counts[valid].sum())
    fallback = constrained and not valid.any()
    keep = valid if constrained and not fallback else np.ones(len(dec), dtype=bool)
    dec, energies, sat = dec[keep], energies[keep], valid[keep]

    order = _lex_order(dec, energies)
    dec, energies, sat = dec[order], energies[order], sat[order]
    # after sorting by (energy, bits) the first occurrence of each vector has its minimum energy
    _, first = np.unique(dec, axis=0, return_index=True)
    first = np.sort(first)
    return CandidatePool(
        bits=dec[first],
        energies=energies[first],
        satisfies=sat[first],
        raw_reads=raw,
        after_filter=after_filter,
        after_dedupe=len(first),
        fallback=fallback,
    )


def squared_distances(bits: np.ndarray, p1) -> np.ndarray:
    p = np.asarray(p1, dtype=np.float64)
    d = bits.astype(np.float64) - p
    return (d * d).sum(axis=1)


def select_min_distance(pool: CandidatePool, p1) -> np.ndarray:
    """Candidate nearest to ``p1`` in Euclidean distance; ties by energy, then lexicographic."""
    if len(pool) == 0:
        raise ValueError("empty candidate pool")
    d = squared_distances(pool.bits, p1)
    return pool.bits[_lex_order(pool.bits, d, pool.energies)[0]].copy()


def select_lowest_energy(pool: CandidatePool) -> np.ndarray:
    if len(pool) == 0:
        raise ValueError("empty candidate pool")
    return pool.bits[_lex_order(pool.bits, pool.energies)[0]].copy()


def ml_oracle_decode(h: ParityCheckMatrix, g: GeneratorMatrix, p1) -> np.ndarray:
    """Closest codeword to ``p1`` over the whole codebook (k <= 20)."""
    if g.k > 20:
        raise CodeError(f"ML oracle refused for k={g.k} > 20")
    if g.n != h.cols:
        raise CodeError("generator and parity-check lengths differ")
    book = g.codebook
    d = squared_distances(book, p1)
    best = np.flatnonzero(d == d.min())
    if len(best) > 1:
        cand = book[best]
        return cand[_lex_order(cand)[0]].copy()
    return book[best[0]].copy()
