from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ldpc_anneal import channel as ch
from ldpc_anneal import llr

finite = st.floats(-1e6, 1e6, allow_nan=False)


def test_awgn_examples():
    assert llr.llr_awgn(0.0, 1.0) == 0.0
    assert llr.llr_awgn(1.0, 1.0) == pytest.approx(4.0)
    assert llr.llr_awgn(-0.5, 2.0) == pytest.approx(-1.0)


def test_coherent_examples():
    assert llr.llr_rayleigh_coherent(0.0, 1.3, 0.7) == 0.0
    assert llr.llr_rayleigh_coherent(1.0, 1.0, 2.0) == pytest.approx(2.0)
    assert llr.llr_rayleigh_coherent(1.0, 1.0, 2.0, "paper-literal") == pytest.approx(2.0)
    assert llr.llr_rayleigh_coherent(0.5, 2.0, 1.0) == pytest.approx(4.0)
    assert llr.llr_rayleigh_coherent(0.5, 2.0, 1.0, "paper_literal") == pytest.approx(2.0)


def test_coherent_zero_gain_is_erasure():
    assert llr.llr_rayleigh_coherent(5.0, 0.0, 0.1) == 0.0
    assert llr.llr_rayleigh_coherent(5.0, 0.0, 0.1, "paper-literal") == 0.0


def test_noncoherent_examples():
    assert llr.llr_rayleigh_noncoherent(1.5, 1.5, 1.0, 0.3) == 0.0
    assert llr.llr_rayleigh_noncoherent(2.0, 0.0, 1.0, 1.0) == pytest.approx(1.0)
    assert llr.llr_rayleigh_noncoherent(0.0, 3.0, 2.0, 0.5) == pytest.approx(-16 / 3)


def test_unknown_mode_rejected():
    with pytest.raises(ValueError):
        llr.llr_to_p1(0.0, "logistic")
    with pytest.raises(ValueError):
        llr.llr_rayleigh_coherent(1.0, 1.0, 1.0, "approx")


def test_llrs_are_clamped():
    assert llr.llr_awgn(1e9, 1e-9) == 30.0
    assert llr.llr_rayleigh_noncoherent(0.0, 1e9, 1.0, 1e-3) == -30.0


def test_p1_examples():
    assert llr.llr_to_p1(0.0) == 0.5
    assert llr.llr_to_p1(0.0, "paper_literal") == 0.0
    assert llr.llr_to_p1(2.0) == pytest.approx(0.8808, abs=1e-4)
    for mode in llr.PROB_MODES:
        assert llr.llr_to_p1(30.0, mode) == pytest.approx(1.0, abs=1e-9)
        assert llr.llr_to_p1(1e9, mode) == pytest.approx(1.0, abs=1e-9)


def test_p1_antisymmetry_exact():
    l = np.random.default_rng(0).uniform(-40, 40, 1000)
    assert np.array_equal(llr.llr_to_p1(-l), 1.0 - llr.llr_to_p1(l))


def test_p1_monotone():
    grid = np.linspace(-30, 30, 6001)
    p = llr.llr_to_p1(grid)
    assert np.all(np.diff(p) > 0)
    lit = llr.llr_to_p1(grid, "paper_literal")
    assert np.all(np.diff(lit) >= 0)
    pos = np.linspace(1e-3, 30, 3000)
    assert np.all(np.diff(llr.llr_to_p1(pos, "paper_literal")) > 0)


@given(finite)
def test_p1_in_unit_interval_and_sign_agrees(l):
    p = float(llr.llr_to_p1(l))
    assert 0.0 <= p <= 1.0
    assert 0.0 <= float(llr.llr_to_p1(l, "paper_literal")) <= 1.0
    # below ~1e-16 the shift away from 1/2 is under one ulp
    if l > 1e-15:
        assert p > 0.5
    elif l < -1e-15:
        assert p < 0.5
    elif l == 0:
        assert p == 0.5


@given(finite, st.floats(1e-6, 1e3), st.floats(1e-3, 1e2))
def test_coherent_sign_matches_r(r, gain, n0):
    l = float(llr.llr_rayleigh_coherent(r, gain, n0))
    assert np.sign(l) == np.sign(r) or (l == 0 and abs(4 * gain * r / n0) < 1e-300)


@given(st.floats(0, 1e4), st.floats(0, 1e4), st.floats(1e-2, 10), st.floats(1e-2, 10))
def test_noncoherent_exchange_antisymmetry(e1, e2, a, n0):
    assert llr.llr_rayleigh_noncoherent(e2, e1, a, n0) == -llr.llr_rayleigh_noncoherent(e1, e2, a, n0)


def test_awgn_calibration():
    rng = np.random.default_rng(1)
    n0 = 1.0
    bits = rng.integers(0, 2, 100_000)
    y = ch.transmit_awgn(ch.bpsk_modulate(bits), n0, rng)
    p = llr.llr_to_p1(llr.llr_awgn(y, n0))
    edges = np.linspace(0, 1, 21)
    idx = np.clip(np.digitize(p, edges) - 1, 0, 19)
    for b in range(20):
        sel = idx == b
        if sel.sum() < 500:
            continue
        center = (edges[b] + edges[b + 1]) / 2
        assert bits[sel].mean() == pytest.approx(center, abs=0.03), b


def test_observation_llrs_dispatch():
    obs = ch.CoherentObservation(np.array([0.5]), np.array([2.0]), 1.0)
    assert llr.observation_llrs(obs).tolist() == [4.0]
    assert llr.observation_llrs(obs, "paper-literal").tolist() == [2.0]
    nc = ch.NoncoherentObservation(np.array([2.0]), np.array([0.0]), 1.0, 1.0)
    assert llr.observation_llrs(nc).tolist() == [1.0]
    assert llr.observation_llrs(np.array([1.0]), n0=1.0).tolist() == [4.0]
    with pytest.raises(ValueError):
        llr.observation_llrs(np.array([1.0]))
