from __future__ import annotations

import dataclasses
from pathlib import Path

import matplotlib
import numpy as np
import pytest

from ldpc_anneal import channel as ch
from ldpc_anneal import codes, harness
from ldpc_anneal.harness import BerRecord, ConfigError, ExperimentConfig
from ldpc_anneal.qubo import QuboModel
from ldpc_anneal.solvers import SampleSet

GOLDEN = Path(__file__).parent / "golden"


def transmitted(cfg: ExperimentConfig, snr: float, idx: int) -> np.ndarray:
    g = codes.derive_generator(codes.bundled_code(cfg.code))
    u = ch.trial_rng(cfg.seed, snr, idx, ch.STREAM_MESSAGE).integers(0, 2, g.k)
    return codes.encode(u, g)


class FixedSampler:
    """Returns the same reads for every model: the all-zero word and one invalid word."""

    def __init__(self):
        self.calls = 0

    def sample(self, model: QuboModel, num_reads: int, seed: int) -> SampleSet:
        self.calls += 1
        x = np.zeros((2, model.num_vars), dtype=np.uint8)
        x[1, 0] = 1
        return SampleSet(x, np.array([5.0, -1.0]), np.array([num_reads - 1, 1]))


@pytest.fixture
def mock_sampler():
    return FixedSampler()


def test_config_validation():
    with pytest.raises(ConfigError):
        ExperimentConfig(trials=0)
    with pytest.raises(ConfigError):
        ExperimentConfig(decoders=("qubo+magic+min-dist",))
    with pytest.raises(ConfigError):
        ExperimentConfig(channel="rician")
    with pytest.raises(ConfigError):
        ExperimentConfig(prob_mode="softmax")
    with pytest.raises(ConfigError):
        ExperimentConfig(snrs=())
    with pytest.raises(ConfigError):
        ExperimentConfig(workers=0)
    cfg = ExperimentConfig(channel="rayleigh_noncoherent", prob_mode="paper-literal")
    assert cfg.channel == "rayleigh-noncoherent"


def test_resolve_decoders():
    assert harness.resolve_decoders("sa") == ("qubo+sa+min-dist",)
    assert harness.resolve_decoders("sa,bp", "both") == ("qubo+sa+min-dist", "qubo+sa+lowest-energy", "bp")
    assert harness.resolve_decoders("exact", "lowest-energy") == ("qubo+exact+lowest-energy",)
    assert harness.resolve_decoders(["ml-oracle", "ml-oracle"]) == ("ml-oracle",)
    with pytest.raises(ConfigError):
        harness.resolve_decoders(" , ")


def test_code_path_resolution(tmp_path):
    assert harness.resolve_code_path("ldpc_6_3").name == "ldpc_6_3.alist"
    p = tmp_path / "mine.alist"
    codes.write_alist(codes.hamming_7_4(), p)
    assert harness.resolve_code_path(str(p)) == p
    assert ExperimentConfig(code=str(p)).code_id == "mine"
    with pytest.raises(ConfigError):
        harness.resolve_code_path("no_such_code")


def test_noiseless_trials_have_no_errors():
    small = ExperimentConfig(code="ldpc_6_3", decoders=harness.DECODERS, sweeps=200)
    big = ExperimentConfig(code="ldpc_22_11", decoders=("sa", "bp", "ml-oracle"), sweeps=200)
    for cfg in (small, big):
        for t in range(5):
            for dec, (bits, frame) in harness.run_trial(cfg, 60.0, t).items():
                assert (bits, frame) == (0, False), dec


def test_ml_oracle_equals_exact_pipeline():
    cfg = ExperimentConfig(code="ldpc_6_3", decoders=("exact", "ml-oracle"))
    for t in range(200):
        res = harness.run_trial(cfg, 2.0, t)
        assert res["qubo+exact+min-dist"] == res["ml-oracle"]


def test_trial_is_deterministic():
    cfg = ExperimentConfig(code="ldpc_22_11", decoders=harness.resolve_decoders("sa,bp", "both"), sweeps=300)
    for t in range(5):
        assert harness.run_trial(cfg, 4.0, t) == harness.run_trial(cfg, 4.0, t)


def test_mock_sampler_drives_pipeline(mock_sampler):
    cfg = ExperimentConfig(code="ldpc_22_11", decoders=harness.resolve_decoders("sa", "both"))
    for t in range(5):
        c = transmitted(cfg, 7.0, t)
        res = harness.run_trial(cfg, 7.0, t, samplers={"sa": mock_sampler})
        w = int(c.sum())
        # min-dist keeps only the valid all-zero read; lowest-energy takes the invalid read at -1
        assert res["qubo+sa+min-dist"] == (w, w > 0)
        e1 = np.zeros(22, dtype=np.uint8)
        e1[0] = 1
        le = int(np.count_nonzero(e1 != c))
        assert res["qubo+sa+lowest-energy"] == (le, le > 0)
    assert mock_sampler.calls == 5


def test_trial_errors_carry_context():
    class Broken:
        def sample(self, model, num_reads, seed):
            raise RuntimeError("backend down")

    cfg = ExperimentConfig(code="ldpc_6_3")
    with pytest.raises(harness.TrialError, match="trial=3"):
        harness.run_trial(cfg, 5.0, 3, samplers={"sa": Broken()})


def test_sweep_aggregation_is_exact():
    cfg = ExperimentConfig(code="ldpc_6_3", snrs=(3.0, 6.0), trials=40, decoders=("exact", "bp"))
    records = harness.run_sweep(cfg)
    assert [(r.snr_db, r.decoder) for r in records] == [
        (3.0, "qubo+exact+min-dist"), (3.0, "bp"), (6.0, "qubo+exact+min-dist"), (6.0, "bp")
    ]
    for r in records:
        per_trial = [harness.run_trial(cfg, r.snr_db, t)[r.decoder] for t in range(cfg.trials)]
        assert r.bit_errors == sum(b for b, _ in per_trial)
        assert r.frame_errors == sum(f for _, f in per_trial)
        assert r.ber == r.bit_errors / (40 * 6)
        assert r.fer >= r.ber
        r.validate()


def test_sweep_independent_of_workers(tmp_path):
    base = ExperimentConfig(
        code="ldpc_6_3", snrs=(2.0, 5.0), trials=30, decoders=("sa", "bp"), sweeps=100, timing=False
    )
    one = tmp_path / "one.csv"
    three = tmp_path / "three.csv"
    harness.run_sweep(base, one)
    harness.run_sweep(dataclasses.replace(base, workers=3), three)
    assert one.read_bytes() == three.read_bytes()


def test_timing_column():
    cfg = ExperimentConfig(code="ldpc_6_3", snrs=(5.0,), trials=3, decoders=("bp",), timing=False)
    assert harness.run_sweep(cfg)[0].wall_time_ms == 0


def test_csv_format_and_reparse(tmp_path):
    cfg = ExperimentConfig(code="ldpc_6_3", snrs=(1.0, 4.0), trials=25, decoders=("bp", "ml-oracle"))
    path = tmp_path / "r.csv"
    records = harness.run_sweep(cfg, path)
    text = path.read_text()
    assert text.splitlines()[0] == ",".join(harness.CSV_COLUMNS)
    assert harness.read_csv(path) == records


def test_csv_rejects_bad_rows():
    header = ",".join(harness.CSV_COLUMNS)
    with pytest.raises(ValueError, match="line 2"):
        harness.parse_csv(header + "\n4.0,10,3,0.5,2,0.2,bp,awgn,c,0\n")
    with pytest.raises(ValueError, match="missing columns"):
        harness.parse_csv("snr_db,trials\n1,2\n")


def test_awgn_bp_sweep_is_sane():
    cfg = ExperimentConfig(
        code="ldpc_22_11", channel="awgn", snrs=tuple(range(4, 11)), trials=1000, decoders=("bp",)
    )
    bers = [r.ber for r in harness.run_sweep(cfg)]
    assert all(0.0 <= b <= 1.0 for b in bers)
    inversions = [(a, b) for a, b in zip(bers, bers[1:]) if b > a]
    assert len(inversions) <= 1 and all(b <= 2 * a for a, b in inversions)


def test_default_workers(monkeypatch):
    monkeypatch.delenv(harness.WORKERS_ENV, raising=False)
    assert harness.default_workers() == 1
    monkeypatch.setenv(harness.WORKERS_ENV, "4")
    assert harness.default_workers() == 4
    monkeypatch.setenv(harness.WORKERS_ENV, "many")
    with pytest.raises(ConfigError):
        harness.default_workers()


def plot_records() -> list[BerRecord]:
    trials, n = 2000, 22
    bit_errors = [5280, 2640, 1100, 352, 88, 20, 0]
    frame_errors = [1500, 900, 500, 180, 50, 12, 0]
    return [
        BerRecord(float(s), trials, b, b / (trials * n), f, f / trials, "bp", "awgn", "ldpc_22_11", 10)
        for s, b, f in zip(range(4, 11), bit_errors, frame_errors)
    ]


def test_plot_series_single_decoder():
    series = harness.plot_series(plot_records())
    assert len(series) == 1
    s = series[0]
    assert len(s.snr_db) == 7
    assert s.zero_error == (False,) * 6 + (True,)
    assert s.ber[-1] == pytest.approx(1 / (2000 * 22))


def test_plot_series_explicit_frame_length():
    assert harness.plot_series(plot_records(), bits_per_frame=10)[0].ber[-1] == pytest.approx(1 / 20000)


def test_plot_empty_csv(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text(",".join(harness.CSV_COLUMNS) + "\n")
    with pytest.raises(ValueError, match="no data rows"):
        harness.emit_plot(path, tmp_path / "x.svg")


def test_plot_is_byte_stable(tmp_path):
    csv_path = tmp_path / "in.csv"
    harness.write_csv(plot_records(), csv_path)
    a = harness.emit_plot(csv_path, tmp_path / "a.svg").read_bytes()
    b = harness.emit_plot(csv_path, tmp_path / "b.svg").read_bytes()
    assert a == b
    assert a.lstrip().startswith(b"<?xml")


def test_plot_golden(tmp_path):
    golden = GOLDEN / f"plot-mpl{matplotlib.__version__}.svg"
    if not golden.exists():
        pytest.skip(f"no golden SVG recorded for matplotlib {matplotlib.__version__}")
    csv_path = tmp_path / "in.csv"
    harness.write_csv(plot_records(), csv_path)
    assert harness.emit_plot(csv_path, tmp_path / "out.svg").read_bytes() == golden.read_bytes()
