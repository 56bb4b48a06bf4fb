"""Binary linear block codes over GF(2): parity-check matrices, generators, ALIST I/O."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np


class CodeError(ValueError):
    """Invalid code parameters or matrix contents."""


class AlistParseError(ValueError):
    def __init__(self, line: int, msg: str):
        super().__init__(f"line {line}: {msg}")
        self.line = line


@dataclass(frozen=True)
class ParityCheckMatrix:
    """Sparse binary parity-check matrix, stored as incidence lists in both directions.

    ``row_index[c]`` holds the sorted bit positions touched by check ``c`` and
    ``col_index[b]`` the sorted checks that bit ``b`` participates in.
    """

    rows: int
    cols: int
    row_index: tuple[tuple[int, ...], ...]
    col_index: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.row_index) != self.rows or len(self.col_index) != self.cols:
            raise CodeError("incidence lists do not match matrix shape")
        for c, bits in enumerate(self.row_index):
            if not bits:
                raise CodeError(f"check {c} has no bits")
        for b, checks in enumerate(self.col_index):
            if not checks:
                raise CodeError(f"bit {b} participates in no checks")

    @classmethod
    def from_dense(cls, h) -> ParityCheckMatrix:
        h = np.asarray(h)
        if h.ndim != 2 or h.size == 0:
            raise CodeError("parity-check matrix must be a nonempty 2-D array")
        if not np.isin(h, (0, 1)).all():
            raise CodeError("parity-check matrix entries must be 0 or 1")
        m, n = h.shape
        rows = tuple(tuple(int(j) for j in np.flatnonzero(h[i])) for i in range(m))
        cols = tuple(tuple(int(i) for i in np.flatnonzero(h[:, j])) for j in range(n))
        return cls(m, n, rows, cols)

    @classmethod
    def from_rows(cls, cols: int, row_index) -> ParityCheckMatrix:
        rows = tuple(tuple(sorted(set(int(b) for b in r))) for r in row_index)
        col_lists: list[list[int]] = [[] for _ in range(cols)]
        for c, bits in enumerate(rows):
            for b in bits:
                if not 0 <= b < cols:
                    raise CodeError(f"bit index {b} out of range")
                col_lists[b].append(c)
        return cls(len(rows), cols, rows, tuple(tuple(c) for c in col_lists))

    @cached_property
    def dense(self) -> np.ndarray:
        h = np.zeros((self.rows, self.cols), dtype=np.uint8)
        for c, bits in enumerate(self.row_index):
            h[c, list(bits)] = 1
        return h

    @property
    def n(self) -> int:
        return self.cols

    @property
    def row_weights(self) -> list[int]:
        return [len(r) for r in self.row_index]

    @property
    def col_weights(self) -> list[int]:
        return [len(c) for c in self.col_index]

    @cached_property
    def rank(self) -> int:
        return gf2_rank(self.dense)

    def is_regular(self, d_b: int, d_c: int) -> bool:
        return all(w == d_b for w in self.col_weights) and all(w == d_c for w in self.row_weights)


@dataclass(frozen=True, eq=False)
class GeneratorMatrix:
    """Generator in the parity-check matrix's own bit order.

    The code is systematic on ``column_permutation[:k]``: message bit ``i``
    appears verbatim at codeword position ``column_permutation[i]``.
    """

    matrix: np.ndarray
    column_permutation: tuple[int, ...]

    @property
    def k(self) -> int:
        return self.matrix.shape[0]

    @property
    def n(self) -> int:
        return self.matrix.shape[1]

    @cached_property
    def codebook(self) -> np.ndarray:
        """All 2^k codewords, row ``m`` encoding the message whose bits are the binary digits of m (MSB first)."""
        k = self.k
        if k > 20:
            raise CodeError(f"codebook enumeration refused for k={k} > 20")
        msgs = ((np.arange(1 << k)[:, None] >> np.arange(k - 1, -1, -1)) & 1).astype(np.uint8)
        return (msgs.astype(np.int64) @ self.matrix.astype(np.int64) % 2).astype(np.uint8)


def gf2_rref(a: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over GF(2). Returns (R, pivot columns); zero rows are dropped."""
    r = (np.asarray(a) & 1).astype(np.uint8).copy()
    m, n = r.shape
    pivots: list[int] = []
    row = 0
    for col in range(n):
        if row >= m:
            break
        nz = np.flatnonzero(r[row:, col])
        if nz.size == 0:
            continue
        piv = row + nz[0]
        if piv != row:
            r[[row, piv]] = r[[piv, row]]
        others = np.flatnonzero(r[:, col])
        others = others[others != row]
        r[others] ^= r[row]
        pivots.append(col)
        row += 1
    return r[:row], pivots


def gf2_rank(a: np.ndarray) -> int:
    return len(gf2_rref(a)[1])


def derive_generator(h: ParityCheckMatrix) -> GeneratorMatrix:
    """Systematic generator from H by Gaussian elimination; rank-deficient H gives k = n - rank."""
    r, pivots = gf2_rref(h.dense)
    n = h.cols
    free = [j for j in range(n) if j not in set(pivots)]
    k = len(free)
    g = np.zeros((k, n), dtype=np.uint8)
    if k:
        g[:, free] = np.eye(k, dtype=np.uint8)
        # pivot bit p_i is the parity of the free bits that row i of R touches
        g[:, pivots] = r[:, free].T
    return GeneratorMatrix(g, tuple(free + pivots))


def encode(u, g: GeneratorMatrix) -> np.ndarray:
    u = np.asarray(u, dtype=np.int64).ravel()
    if u.shape[0] != g.k:
        raise CodeError(f"message length {u.shape[0]} != k={g.k}")
    return (u @ g.matrix.astype(np.int64) % 2).astype(np.uint8)


def syndrome(h: ParityCheckMatrix, c) -> np.ndarray:
    c = np.asarray(c, dtype=np.int64).ravel()
    if c.shape[0] != h.cols:
        raise CodeError(f"word length {c.shape[0]} != n={h.cols}")
    return (h.dense.astype(np.int64) @ c % 2).astype(np.uint8)


def _four_cycles(rows: list[set[int]]) -> int:
    count = 0
    for i in range(len(rows)):
        for j in range(i + 1, len(rows)):
            ov = len(rows[i] & rows[j])
            count += ov * (ov - 1) // 2
    return count


def _repair_sockets(perm: np.ndarray, rng: np.random.Generator, tries: int = 50) -> bool:
    """Swap sockets in place until no bit connects to the same check twice."""
    n, d_b = perm.shape
    for b in range(n):
        for s in range(d_b):
            if perm[b, s] not in perm[b, :s]:
                continue
            for _ in range(tries):
                b2, s2 = int(rng.integers(n)), int(rng.integers(d_b))
                c, c2 = perm[b, s], perm[b2, s2]
                if b2 == b or c2 in perm[b] or c in np.delete(perm[b2], s2):
                    continue
                perm[b, s], perm[b2, s2] = c2, c
                break
            else:
                return False
    return True


def construct_regular_code(
    n: int, num_checks: int, d_b: int, d_c: int, seed: int, attempts: int = 200
) -> ParityCheckMatrix:
    """Random (d_b, d_c)-regular parity-check matrix by socket permutation.

    Each attempt matches the n*d_b bit sockets to a random permutation of the
    check sockets. A repeated (check, bit) edge is repaired by swapping one of
    its sockets with a random compatible socket elsewhere; attempts that cannot
    be repaired are dropped. Among the rest the one with the fewest rank
    losses, then fewest 4-cycles, wins.
    """
    if d_b < 2 or d_c < 2:
        raise CodeError("column and row weights must both be >= 2")
    if n <= 0 or num_checks <= 0 or n * d_b != num_checks * d_c:
        raise CodeError(f"degree equation n*d_b == checks*d_c fails: {n}*{d_b} != {num_checks}*{d_c}")
    if d_c > n or d_b > num_checks:
        raise CodeError("weights exceed matrix dimensions")

    rng = np.random.default_rng(seed)
    check_sockets = np.repeat(np.arange(num_checks), d_c)
    best = None
    best_key = None
    for _ in range(attempts):
        perm = rng.permutation(check_sockets).reshape(n, d_b)
        if not _repair_sockets(perm, rng):
            continue
        rows: list[set[int]] = [set() for _ in range(num_checks)]
        for b, checks in enumerate(perm.tolist()):
            for c in checks:
                rows[c].add(b)
        h = ParityCheckMatrix.from_rows(n, rows)
        key = (num_checks - h.rank, _four_cycles(rows))
        if best_key is None or key < best_key:
            best, best_key = h, key
            if key == (0, 0):
                break
    if best is None:
        raise CodeError(f"no simple regular graph found in {attempts} attempts")
    return best


def save_alist(h: ParityCheckMatrix) -> str:
    max_col = max(h.col_weights)
    max_row = max(h.row_weights)
    lines = [
        f"{h.cols} {h.rows}",
        f"{max_col} {max_row}",
        " ".join(map(str, h.col_weights)),
        " ".join(map(str, h.row_weights)),
    ]
    for checks in h.col_index:
        idx = [c + 1 for c in checks] + [0] * (max_col - len(checks))
        lines.append(" ".join(map(str, idx)))
    for bits in h.row_index:
        idx = [b + 1 for b in bits] + [0] * (max_row - len(bits))
        lines.append(" ".join(map(str, idx)))
    return "\n".join(lines) + "\n"


def _ints(line: str, lineno: int) -> list[int]:
    try:
        return [int(t) for t in line.split()]
    except ValueError:
        raise AlistParseError(lineno, f"non-integer token in {line.strip()!r}") from None


def _index_list(tokens: list[int], weight: int, max_weight: int, limit: int, lineno: int) -> list[int]:
    if len(tokens) < weight:
        raise AlistParseError(lineno, f"expected {weight} indices, found {len(tokens)}")
    if len(tokens) > max_weight:
        raise AlistParseError(lineno, f"more than {max_weight} entries")
    entries, padding = tokens[:weight], tokens[weight:]
    for t in entries:
        if not 1 <= t <= limit:
            raise AlistParseError(lineno, f"index {t} out of range 1..{limit}")
    if any(t != 0 for t in padding):
        raise AlistParseError(lineno, "entries beyond the declared weight must be 0 padding")
    if len(set(entries)) != len(entries):
        raise AlistParseError(lineno, "duplicate index")
    return [t - 1 for t in entries]


def load_alist(text: str) -> ParityCheckMatrix:
    lines = [(i + 1, ln) for i, ln in enumerate(text.splitlines()) if ln.strip()]
    if len(lines) < 4:
        raise AlistParseError(len(lines) + 1, "truncated header")

    def header(pos: int, count: int) -> list[int]:
        lineno, ln = lines[pos]
        vals = _ints(ln, lineno)
        if len(vals) != count:
            raise AlistParseError(lineno, f"expected {count} values, found {len(vals)}")
        return vals

    n, m = header(0, 2)
    if n <= 0 or m <= 0:
        raise AlistParseError(lines[0][0], "dimensions must be positive")
    max_col, max_row = header(1, 2)
    col_w = header(2, n)
    row_w = header(3, m)
    if max(col_w) != max_col or max(row_w) != max_row:
        raise AlistParseError(lines[1][0], "max weights disagree with weight lists")
    if len(lines) < 4 + n + m:
        raise AlistParseError(lines[-1][0] + 1, f"expected {n} column and {m} row lists")

    col_sets = []
    for j in range(n):
        lineno, ln = lines[4 + j]
        col_sets.append(_index_list(_ints(ln, lineno), col_w[j], max_col, m, lineno))
    row_sets = []
    for i in range(m):
        lineno, ln = lines[4 + n + i]
        row_sets.append(_index_list(_ints(ln, lineno), row_w[i], max_row, n, lineno))
    if len(lines) > 4 + n + m:
        raise AlistParseError(lines[4 + n + m][0], "trailing content")

    from_cols = {(c, j) for j, cs in enumerate(col_sets) for c in cs}
    from_rows = {(i, b) for i, bs in enumerate(row_sets) for b in bs}
    if from_cols != from_rows:
        bad = min(from_cols ^ from_rows)
        raise AlistParseError(lines[4 + n + bad[0]][0], "row and column lists disagree")
    try:
        return ParityCheckMatrix.from_rows(n, row_sets)
    except CodeError as exc:
        raise AlistParseError(lines[0][0], str(exc)) from None


def read_alist(path) -> ParityCheckMatrix:
    return load_alist(Path(path).read_text())


def write_alist(h: ParityCheckMatrix, path) -> None:
    Path(path).write_text(save_alist(h))


DATA_DIR = Path(__file__).parent / "data"


def bundled_code(name: str) -> ParityCheckMatrix:
    """Load one of the shipped ALIST codes, e.g. ``"ldpc_22_11"``."""
    return read_alist(DATA_DIR / f"{name}.alist")


def hamming_7_4() -> ParityCheckMatrix:
    return ParityCheckMatrix.from_dense(
        [
            [1, 0, 1, 0, 1, 0, 1],
            [0, 1, 1, 0, 0, 1, 1],
            [0, 0, 0, 1, 1, 1, 1],
        ]
    )
