from __future__ import annotations

import numpy as np
import pytest

from ldpc_anneal import codes


def random_pcm(rng: np.random.Generator, max_rows: int = 8, max_cols: int = 16) -> codes.ParityCheckMatrix:
    """Random binary matrix with no empty row or column (irregular in general)."""
    m = int(rng.integers(1, max_rows + 1))
    n = int(rng.integers(1, max_cols + 1))
    h = (rng.random((m, n)) < rng.uniform(0.15, 0.6)).astype(np.uint8)
    for i in range(m):
        if not h[i].any():
            h[i, rng.integers(n)] = 1
    for j in range(n):
        if not h[:, j].any():
            h[rng.integers(m), j] = 1
    return codes.ParityCheckMatrix.from_dense(h)


@pytest.fixture(scope="session")
def code63():
    return codes.bundled_code("ldpc_6_3")


@pytest.fixture(scope="session")
def code84():
    return codes.bundled_code("ldpc_8_4")


@pytest.fixture(scope="session")
def code2211():
    return codes.bundled_code("ldpc_22_11")


@pytest.fixture(scope="session")
def hamming():
    return codes.hamming_7_4()


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report():
    """Record one pass/fail line for the acceptance summary and return the verdict."""

    def record(criterion: int, ok: bool, detail: str) -> bool:
        line = f"criterion {criterion:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(line)
        _ACCEPTANCE_LINES.append(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
