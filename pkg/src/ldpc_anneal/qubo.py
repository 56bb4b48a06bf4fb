"""Compile LDPC decoding into a QUBO.

For every check with bit set R and ancillas a_0..a_{m-1} the satisfier term is
``(sum_{j in R} q_j - 2 * sum_k 2^k a_k)^2``, which can reach zero only when
the check has even parity. Each codeword bit also gets a distance term
``(q_i - p_i)^2`` against the channel posterior ``p_i = Pr(bit i = 1)``. The
model is ``w1 * satisfier + w2 * distance`` with ``q^2 = q`` folded into the
linear biases.

Variables 0..n-1 are the codeword bits; ancillas follow, check by check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np

from .codes import ParityCheckMatrix


class QuboParseError(ValueError):
    def __init__(self, line: int, msg: str):
        super().__init__(f"line {line}: {msg}")
        self.line = line


@dataclass(frozen=True, eq=False)
class QuboModel:
    num_vars: int
    num_decision_vars: int
    linear: dict[int, float]
    quadratic: dict[tuple[int, int], float]
    offset: float = 0.0
    ancilla_map: tuple[tuple[tuple[int, int], ...], ...] = ()
    weights: tuple[float, float] = (1.0, 1.0)

    def __post_init__(self):
        for i in self.linear:
            if not 0 <= i < self.num_vars:
                raise ValueError(f"linear index {i} out of range")
        for i, j in self.quadratic:
            if not 0 <= i < j < self.num_vars:
                raise ValueError(f"quadratic key {(i, j)} must satisfy 0 <= i < j < num_vars")
        for anc in self.ancilla_map:
            for var, _ in anc:
                if var < self.num_decision_vars:
                    raise ValueError("ancilla indices must follow the decision variables")

    def __eq__(self, other):
        if not isinstance(other, QuboModel):
            return NotImplemented
        return (
            self.num_vars == other.num_vars
            and self.num_decision_vars == other.num_decision_vars
            and self.linear == other.linear
            and self.quadratic == other.quadratic
            and self.offset == other.offset
            and self.ancilla_map == other.ancilla_map
            and tuple(self.weights) == tuple(other.weights)
        )

    __hash__ = None

    @cached_property
    def linear_array(self) -> np.ndarray:
        lin = np.zeros(self.num_vars)
        for i, v in self.linear.items():
            lin[i] = v
        return lin

    @cached_property
    def coupling_matrix(self) -> np.ndarray:
        """Strictly upper-triangular coupler matrix."""
        j = np.zeros((self.num_vars, self.num_vars))
        for (a, b), v in self.quadratic.items():
            j[a, b] = v
        return j

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Symmetric adjacency (indptr, indices, weights) for local-field updates."""
        nbrs: list[list[tuple[int, float]]] = [[] for _ in range(self.num_vars)]
        for (a, b), v in sorted(self.quadratic.items()):
            if v != 0.0:
                nbrs[a].append((b, v))
                nbrs[b].append((a, v))
        indptr = np.zeros(self.num_vars + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([len(x) for x in nbrs])
        indices = np.array([j for row in nbrs for j, _ in row], dtype=np.int64)
        weights = np.array([v for row in nbrs for _, v in row], dtype=np.float64)
        return indptr, indices, weights

    def energies(self, assignments) -> np.ndarray:
        """Vectorised energy of a batch of assignments (rows)."""
        x = np.atleast_2d(np.asarray(assignments, dtype=np.float64))
        if x.shape[1] != self.num_vars:
            raise ValueError(f"assignment length {x.shape[1]} != num_vars={self.num_vars}")
        return self.offset + x @ self.linear_array + np.einsum("ri,ij,rj->r", x, self.coupling_matrix, x)


@dataclass(frozen=True, eq=False)
class DecodingInstance:
    h: ParityCheckMatrix
    p1: np.ndarray
    w1: float | None = None
    w2: float = 1.0

    def __post_init__(self):
        p = np.asarray(self.p1, dtype=np.float64).ravel()
        if p.shape[0] != self.h.cols:
            raise ValueError(f"p1 length {p.shape[0]} != n={self.h.cols}")
        if (p < 0).any() or (p > 1).any():
            raise ValueError("p1 entries must lie in [0, 1]")
        object.__setattr__(self, "p1", p)
        if self.w1 is None:
            object.__setattr__(self, "w1", dominance_w1(self.h.cols, self.w2))
        if self.w1 < 0 or self.w2 < 0:
            raise ValueError("weights must be nonnegative")


def dominance_w1(n: int, w2: float = 1.0) -> float:
    """Smallest integer-step w1 for which every codeword outranks every non-codeword."""
    return n * w2 + 1.0


def annealing_w1(w2: float = 1.0) -> float:
    """Penalty weight for sampled (non-exact) decoding.

    Dominance weights make codeword-to-codeword barriers so tall that a
    single-flip annealer lands on an arbitrary codeword. A penalty below the
    per-bit distance scale keeps the landscape passable; invalid reads are
    discarded afterwards by the parity filter.
    """
    return 0.5 * w2


def ancilla_count(weight: int) -> int:
    return math.ceil(math.log2(weight // 2 + 1))


def _add(d: dict, key, v: float) -> None:
    d[key] = d.get(key, 0.0) + v


@dataclass(frozen=True)
class Polynomial:
    """Quadratic pseudo-boolean polynomial in QUBO form (q^2 already folded)."""

    linear: dict = field(default_factory=dict)
    quadratic: dict = field(default_factory=dict)
    offset: float = 0.0


@lru_cache(maxsize=64)
def build_satisfier(h: ParityCheckMatrix) -> tuple[Polynomial, tuple[tuple[tuple[int, int], ...], ...]]:
    """Unweighted satisfier polynomial and per-check ancilla map ((var, place value), ...)."""
    lin: dict[int, float] = {}
    quad: dict[tuple[int, int], float] = {}
    ancillas = []
    nxt = h.cols
    for bits in h.row_index:
        m = ancilla_count(len(bits))
        anc = tuple((nxt + k, 1 << k) for k in range(m))
        nxt += m
        ancillas.append(anc)
        # (sum_j q_j - sum_k c_k a_k)^2 with c_k = 2 * 2^k
        terms = [(j, 1.0) for j in bits] + [(a, -2.0 * pv) for a, pv in anc]
        for t, (u, cu) in enumerate(terms):
            _add(lin, u, cu * cu)
            for v, cv in terms[t + 1 :]:
                _add(quad, (u, v) if u < v else (v, u), 2.0 * cu * cv)
    return Polynomial(lin, quad, 0.0), tuple(ancillas)


def build_distance(p1) -> Polynomial:
    """(q_i - p_i)^2 = (1 - 2 p_i) q_i + p_i^2."""
    p = np.asarray(p1, dtype=np.float64).ravel()
    if (p < 0).any() or (p > 1).any():
        raise ValueError("p1 entries must lie in [0, 1]")
    lin = {i: float(1.0 - 2.0 * pi) for i, pi in enumerate(p)}
    return Polynomial(lin, {}, float(np.sum(p * p)))


def build_qubo(inst: DecodingInstance) -> QuboModel:
    sat, ancillas = build_satisfier(inst.h)
    dist = build_distance(inst.p1)
    w1, w2 = float(inst.w1), float(inst.w2)
    num_vars = inst.h.cols + sum(len(a) for a in ancillas)
    lin: dict[int, float] = {}
    quad: dict[tuple[int, int], float] = {}
    for i, v in sat.linear.items():
        _add(lin, i, w1 * v)
    for i, v in dist.linear.items():
        _add(lin, i, w2 * v)
    for k, v in sat.quadratic.items():
        _add(quad, k, w1 * v)
    return QuboModel(
        num_vars=num_vars,
        num_decision_vars=inst.h.cols,
        linear=dict(sorted(lin.items())),
        quadratic=dict(sorted(quad.items())),
        offset=w1 * sat.offset + w2 * dist.offset,
        ancilla_map=ancillas,
        weights=(w1, w2),
    )


def energy(model: QuboModel, assignment) -> float:
    x = np.asarray(assignment).ravel()
    if x.shape[0] != model.num_vars:
        raise ValueError(f"assignment length {x.shape[0]} != num_vars={model.num_vars}")
    e = model.offset
    for i, v in model.linear.items():
        if x[i]:
            e += v
    for (i, j), v in model.quadratic.items():
        if x[i] and x[j]:
            e += v
    return float(e)


def _fmt(v: float) -> str:
    return f"{float(v):.17g}"


def export_qubo(model: QuboModel) -> str:
    """Coordinate-list text. Model metadata rides in ``c`` comment lines so import is lossless."""
    lines = [f"p qubo 0 {model.num_vars} {len(model.linear)} {len(model.quadratic)} {_fmt(model.offset)}"]
    if model.num_decision_vars != model.num_vars or model.ancilla_map:
        lines.append(f"c decision {model.num_decision_vars}")
    if tuple(model.weights) != (1.0, 1.0):
        lines.append(f"c weights {_fmt(model.weights[0])} {_fmt(model.weights[1])}")
    for c, anc in enumerate(model.ancilla_map):
        lines.append(f"c ancilla {c} " + " ".join(f"{v}:{pv}" for v, pv in anc))
    for i in sorted(model.linear):
        lines.append(f"{i} {i} {_fmt(model.linear[i])}")
    for i, j in sorted(model.quadratic):
        lines.append(f"{i} {j} {_fmt(model.quadratic[(i, j)])}")
    return "\n".join(lines) + "\n"


def import_qubo(text: str) -> QuboModel:
    header = None
    decision = None
    weights = (1.0, 1.0)
    ancillas: dict[int, tuple[tuple[int, int], ...]] = {}
    lin: dict[int, float] = {}
    quad: dict[tuple[int, int], float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        toks = raw.split()
        if not toks:
            continue
        try:
            if toks[0] == "p":
                if header is not None:
                    raise QuboParseError(lineno, "duplicate header")
                if len(toks) != 7 or toks[1] != "qubo":
                    raise QuboParseError(lineno, "header must be 'p qubo 0 <vars> <linear> <quadratic> <offset>'")
                header = (int(toks[3]), int(toks[4]), int(toks[5]), float(toks[6]))
            elif toks[0] == "c":
                if len(toks) >= 3 and toks[1] == "decision":
                    decision = int(toks[2])
                elif len(toks) == 4 and toks[1] == "weights":
                    weights = (float(toks[2]), float(toks[3]))
                elif len(toks) >= 3 and toks[1] == "ancilla":
                    ancillas[int(toks[2])] = tuple(
                        (int(a), int(b)) for a, b in (t.split(":") for t in toks[3:])
                    )
            else:
                if header is None:
                    raise QuboParseError(lineno, "coefficient before header")
                if len(toks) != 3:
                    raise QuboParseError(lineno, "expected 'i j value'")
                i, j, v = int(toks[0]), int(toks[1]), float(toks[2])
                if not (0 <= i < header[0] and 0 <= j < header[0]):
                    raise QuboParseError(lineno, f"index out of range 0..{header[0] - 1}")
                if i == j:
                    if i in lin:
                        raise QuboParseError(lineno, f"duplicate linear term {i}")
                    lin[i] = v
                elif i < j:
                    if (i, j) in quad:
                        raise QuboParseError(lineno, f"duplicate coupler {(i, j)}")
                    quad[(i, j)] = v
                else:
                    raise QuboParseError(lineno, "quadratic terms need i < j")
        except QuboParseError:
            raise
        except ValueError as exc:
            raise QuboParseError(lineno, str(exc)) from None
    if header is None:
        raise QuboParseError(1, "missing header")
    num_vars, n_lin, n_quad, offset = header
    if len(lin) != n_lin or len(quad) != n_quad:
        raise QuboParseError(lineno, f"header declares {n_lin}/{n_quad} terms, found {len(lin)}/{len(quad)}")
    if sorted(ancillas) != list(range(len(ancillas))):
        raise QuboParseError(lineno, "ancilla check indices must be contiguous from 0")
    return QuboModel(
        num_vars=num_vars,
        num_decision_vars=num_vars if decision is None else decision,
        linear=lin,
        quadratic=quad,
        offset=offset,
        ancilla_map=tuple(ancillas[c] for c in range(len(ancillas))),
        weights=weights,
    )


def to_ising(model: QuboModel) -> tuple[dict[int, float], dict[tuple[int, int], float], float]:
    """Spin form under q = (s + 1) / 2 with s in {-1, +1}; returns (h, J, offset)."""
    hs: dict[int, float] = {i: 0.0 for i in range(model.num_vars)}
    js: dict[tuple[int, int], float] = {}
    off = model.offset
    for i, v in model.linear.items():
        hs[i] += v / 2.0
        off += v / 2.0
    for (i, j), v in model.quadratic.items():
        js[(i, j)] = v / 4.0
        hs[i] += v / 4.0
        hs[j] += v / 4.0
        off += v / 4.0
    return hs, js, off
