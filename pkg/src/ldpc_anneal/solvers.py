"""Low-energy search over a QuboModel.

``solve_exact`` enumerates every assignment (the oracle), ``solve_sa`` runs
independent single-flip Metropolis anneals. Both return a SampleSet, and the
``Sampler`` protocol lets the decoding pipeline swap in any other backend,
e.g. a client for a remote annealer.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

import numba
import numpy as np

from .qubo import QuboModel

EXACT_GUARD = 26
SPECTRUM_GUARD = 20


class SamplerError(RuntimeError):
    """Raised by sampler backends that cannot produce a SampleSet."""


def _as_rows(x, nv: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.uint8)
    if nv == 0:
        # reshape(-1, 0) is ambiguous; keep the row count of a 2-D input
        return x.reshape(len(x) if x.ndim == 2 else 1, 0)
    return x.reshape(-1, nv)


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Distinct assignments sorted by (energy, assignment), with read counts."""

    assignments: np.ndarray
    energies: np.ndarray
    counts: np.ndarray

    def __len__(self):
        return len(self.energies)

    def __iter__(self):
        for x, e, c in zip(self.assignments, self.energies, self.counts):
            yield x, float(e), int(c)

    @property
    def num_reads(self) -> int:
        return int(self.counts.sum())

    @property
    def lowest_energy(self) -> float:
        return float(self.energies[0])

    @classmethod
    def from_reads(cls, model: QuboModel, reads) -> SampleSet:
        """Aggregate raw reads; energies are recomputed from the model."""
        reads = _as_rows(reads, model.num_vars)
        if len(reads) == 0:
            raise SamplerError("no reads to aggregate")
        uniq, counts = np.unique(reads, axis=0, return_counts=True)
        return cls.from_unique(model, uniq, counts)

    @classmethod
    def from_unique(cls, model: QuboModel, assignments, counts=None) -> SampleSet:
        x = _as_rows(assignments, model.num_vars)
        counts = np.ones(len(x), dtype=np.int64) if counts is None else np.asarray(counts, dtype=np.int64)
        e = model.energies(x)
        # lexsort: last key is primary
        order = np.lexsort(tuple(x[:, i] for i in range(x.shape[1] - 1, -1, -1)) + (e,))
        return cls(x[order], e[order], counts[order])

    def lines(self) -> list[str]:
        return [f"{e:.17g} {c} {''.join(map(str, x.tolist()))}" for x, e, c in self]


@dataclass(frozen=True)
class AnnealSchedule:
    num_reads: int = 20
    sweeps_per_read: int = 1000
    beta_start: float = 0.1
    beta_end: float = 10.0

    def __post_init__(self):
        if self.num_reads < 1 or self.sweeps_per_read < 1:
            raise ValueError("num_reads and sweeps_per_read must be >= 1")
        if not 0 < self.beta_start < self.beta_end:
            raise ValueError("need 0 < beta_start < beta_end")

    def betas(self) -> np.ndarray:
        return np.geomspace(self.beta_start, self.beta_end, self.sweeps_per_read)


# ---------------------------------------------------------------- kernels


@numba.njit(cache=True)
def _splitmix(state):
    state = state + np.uint64(0x9E3779B97F4A7C15)
    z = state
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    z = z ^ (z >> np.uint64(31))
    return state, z


@numba.njit(cache=True)
def _anneal(lin, indptr, indices, weights, betas, seeds):
    reads = seeds.shape[0]
    nv = lin.shape[0]
    out = np.zeros((reads, nv), dtype=np.uint8)
    field = np.empty(nv)
    scale = 1.0 / 9007199254740992.0  # 2**-53
    for r in range(reads):
        state = seeds[r]
        s = out[r]
        for i in range(nv):
            state, z = _splitmix(state)
            s[i] = np.uint8(z >> np.uint64(63))
        # field[i] = energy change of setting s_i from 0 to 1 given the others
        for i in range(nv):
            f = lin[i]
            for k in range(indptr[i], indptr[i + 1]):
                if s[indices[k]]:
                    f += weights[k]
            field[i] = f
        for b in range(betas.shape[0]):
            beta = betas[b]
            for i in range(nv):
                delta = field[i] if s[i] == 0 else -field[i]
                accept = delta <= 0.0
                if not accept:
                    state, z = _splitmix(state)
                    u = np.float64(z >> np.uint64(11)) * scale
                    accept = u < np.exp(-beta * delta)
                if accept:
                    if s[i] == 0:
                        s[i] = 1
                        sign = 1.0
                    else:
                        s[i] = 0
                        sign = -1.0
                    for k in range(indptr[i], indptr[i + 1]):
                        field[indices[k]] += sign * weights[k]
    return out


@numba.njit(cache=True)
def _gray_enumerate(lin, indptr, indices, weights, offset, tol):
    """Walk all 2^V states in Gray-code order; return (min energy, argmin states)."""
    nv = lin.shape[0]
    s = np.zeros(nv, dtype=np.uint8)
    field = lin.copy()
    e = offset
    best = e
    cap = 64
    found = np.zeros((cap, nv), dtype=np.uint8)
    nfound = 1
    total = np.int64(1) << nv
    for t in range(1, total):
        # bit to flip is the lowest set bit of t
        i = 0
        tt = t
        while (tt & 1) == 0:
            tt >>= 1
            i += 1
        if s[i] == 0:
            e += field[i]
            s[i] = 1
            sign = 1.0
        else:
            e -= field[i]
            s[i] = 0
            sign = -1.0
        for k in range(indptr[i], indptr[i + 1]):
            field[indices[k]] += sign * weights[k]
        if e < best - tol:
            best = e
            nfound = 0
        if e <= best + tol:
            if nfound == found.shape[0]:
                grown = np.zeros((found.shape[0] * 2, nv), dtype=np.uint8)
                grown[:nfound] = found
                found = grown
            found[nfound] = s
            nfound += 1
    return best, found[:nfound]


# ---------------------------------------------------------------- solvers


def _seed_int(rng) -> int:
    if isinstance(rng, np.random.Generator):
        return int(rng.integers(0, 2**63))
    return int(rng)


def read_seeds(seed: int, num_reads: int) -> np.ndarray:
    """One 64-bit stream seed per read, derived from (seed, read index)."""
    return np.array(
        [np.random.SeedSequence([seed, r]).generate_state(1, np.uint64)[0] for r in range(num_reads)],
        dtype=np.uint64,
    )


def solve_sa(model: QuboModel, schedule: AnnealSchedule | None = None, rng=0) -> SampleSet:
    """Independent anneals from random starts over a geometric inverse-temperature ladder.

    ``rng`` may be an integer seed or a numpy Generator (one integer is drawn from it).
    """
    schedule = schedule or AnnealSchedule()
    seed = _seed_int(rng)
    if model.num_vars == 0:
        return SampleSet.from_reads(model, np.zeros((schedule.num_reads, 0), dtype=np.uint8))
    indptr, indices, weights = model.csr
    reads = _anneal(
        model.linear_array, indptr, indices, weights, schedule.betas(), read_seeds(seed, schedule.num_reads)
    )
    return SampleSet.from_reads(model, reads)


def _all_states(nv: int) -> np.ndarray:
    return ((np.arange(1 << nv)[:, None] >> np.arange(nv)) & 1).astype(np.uint8)


def enumerate_energies(model: QuboModel) -> np.ndarray:
    """Energy of every assignment, index bit i = variable i. Limited to SPECTRUM_GUARD variables."""
    if model.num_vars > SPECTRUM_GUARD:
        raise ValueError(f"full spectrum refused for {model.num_vars} > {SPECTRUM_GUARD} variables")
    return model.energies(_all_states(model.num_vars))


def _forward_minimum(model: QuboModel, tol: float) -> tuple[float, np.ndarray]:
    """Counting-order enumeration in blocks: low variables vectorised, high variables looped."""
    nv = model.num_vars
    lo = min(nv, 14)
    hi = nv - lo
    lin = model.linear_array
    jm = model.coupling_matrix
    xl = _all_states(lo).astype(np.float64)
    e_low = xl @ lin[:lo] + np.einsum("ri,ij,rj->r", xl, jm[:lo, :lo], xl)
    cross = jm[:lo, lo:]
    best = np.inf
    hits: list[np.ndarray] = []
    for t in range(1 << hi):
        xh = ((t >> np.arange(hi)) & 1).astype(np.float64)
        e_high = xh @ lin[lo:] + xh @ jm[lo:, lo:] @ xh
        e = model.offset + e_high + e_low + xl @ (cross @ xh)
        m = e.min()
        if m < best - tol:
            best = m
            hits = []
        if m <= best + tol:
            idx = np.flatnonzero(e <= best + tol)
            full = np.empty((len(idx), nv), dtype=np.uint8)
            full[:, :lo] = xl[idx]
            full[:, lo:] = xh
            hits.append(full)
    return float(best), np.concatenate(hits)


def solve_exact(model: QuboModel, method: str = "gray", spectrum: bool = False, tol: float = 1e-9) -> SampleSet:
    """Global minimum by exhaustive enumeration.

    Returns every assignment within ``tol`` of the optimum, or with ``spectrum``
    every assignment (at most SPECTRUM_GUARD variables). ``method`` picks the
    enumeration order: ``"gray"`` (incremental single-flip walk) or
    ``"forward"`` (blocked counting order).
    """
    nv = model.num_vars
    if nv > EXACT_GUARD:
        raise ValueError(f"exact solve refused: {nv} variables exceeds guard of {EXACT_GUARD}")
    if spectrum:
        return SampleSet.from_unique(model, _all_states(nv))
    if nv == 0:
        return SampleSet.from_unique(model, np.zeros((1, 0), dtype=np.uint8))
    if method == "gray":
        indptr, indices, weights = model.csr
        _, states = _gray_enumerate(model.linear_array, indptr, indices, weights, model.offset, tol)
    elif method == "forward":
        _, states = _forward_minimum(model, tol)
    else:
        raise ValueError(f"unknown method {method!r}")
    return SampleSet.from_unique(model, states)


class Sampler(Protocol):
    def sample(self, model: QuboModel, num_reads: int, seed: int) -> SampleSet: ...


class ExactSampler:
    """Returns the optimal set once, regardless of ``num_reads``."""

    def sample(self, model: QuboModel, num_reads: int = 1, seed: int = 0) -> SampleSet:
        try:
            return solve_exact(model)
        except ValueError as exc:
            raise SamplerError(str(exc)) from exc


class SimulatedAnnealingSampler:
    def __init__(self, sweeps_per_read: int = 1000, beta_start: float = 0.1, beta_end: float = 10.0):
        self.sweeps_per_read = sweeps_per_read
        self.beta_start = beta_start
        self.beta_end = beta_end

    def sample(self, model: QuboModel, num_reads: int = 20, seed: int = 0) -> SampleSet:
        schedule = AnnealSchedule(num_reads, self.sweeps_per_read, self.beta_start, self.beta_end)
        return solve_sa(model, schedule, seed)
