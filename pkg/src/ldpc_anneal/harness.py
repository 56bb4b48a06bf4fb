"""Monte Carlo BER/FER sweeps: message -> encode -> channel -> LLR -> decode.

Every trial draws from its own generators keyed on (seed, snr, trial index,
stream), so a sweep's counts do not depend on how trials are split across
workers.
"""

from __future__ import annotations

import csv
import io
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import channel as ch
from .bp import BpConfig, bp_decode
from .codes import DATA_DIR, derive_generator, encode, read_alist
from .llr import LLR_MODES, PROB_MODES, llr_to_p1, observation_llrs
from .postprocess import filter_and_dedupe, ml_oracle_decode, select_lowest_energy, select_min_distance
from .qubo import DecodingInstance, annealing_w1, build_qubo, dominance_w1
from .solvers import ExactSampler, Sampler, SimulatedAnnealingSampler

log = logging.getLogger(__name__)

WORKERS_ENV = "LDPC_ANNEAL_WORKERS"
CSV_COLUMNS = (
    "snr_db",
    "trials",
    "bit_errors",
    "ber",
    "frame_errors",
    "fer",
    "decoder",
    "channel",
    "code",
    "wall_time_ms",
)
QUBO_DECODERS = tuple(
    f"qubo+{s}+{p}" for s in ("sa", "exact") for p in ("min-dist", "lowest-energy")
)
DECODERS = QUBO_DECODERS + ("bp", "ml-oracle")


class ConfigError(ValueError):
    pass


class TrialError(RuntimeError):
    pass


def resolve_decoders(names, post: str = "min-dist") -> tuple[str, ...]:
    """Expand a comma list; bare ``sa``/``exact`` combine with ``post`` (which may be ``both``)."""
    items = names.split(",") if isinstance(names, str) else list(names)
    posts = ("min-dist", "lowest-energy") if post == "both" else (post,)
    out: list[str] = []
    for raw in items:
        d = raw.strip()
        if not d:
            continue
        expanded = [f"qubo+{d}+{p}" for p in posts] if d in ("sa", "exact") else [d]
        for name in expanded:
            if name not in DECODERS:
                raise ConfigError(f"unknown decoder {name!r}; choose from {', '.join(DECODERS)}")
            if name not in out:
                out.append(name)
    if not out:
        raise ConfigError("no decoder selected")
    return tuple(out)


def resolve_code_path(code: str) -> Path:
    p = Path(code)
    if p.exists():
        return p
    bundled = DATA_DIR / f"{code}.alist"
    if bundled.exists():
        return bundled
    raise ConfigError(f"code file not found: {code}")


@dataclass(frozen=True)
class ExperimentConfig:
    code: str = "ldpc_22_11"
    channel: str = "rayleigh-coherent"
    snrs: tuple[float, ...] = (4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0)
    trials: int = 2000
    decoders: tuple[str, ...] = ("qubo+sa+min-dist",)
    num_reads: int = 20
    sweeps: int = 1000
    beta_start: float = 0.1
    beta_end: float = 10.0
    w1: float | None = None
    w2: float = 1.0
    prob_mode: str = "sigmoid"
    llr_mode: str = "exact"
    amp_a: float = 1.0
    bp_iters: int = 50
    seed: int = 0
    workers: int = 1
    timing: bool = True
    verbose: bool = False

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not self.snrs:
            raise ConfigError("snr list is empty")
        if not all(np.isfinite(s) for s in self.snrs):
            raise ConfigError("snr values must be finite")
        if self.num_reads < 1 or self.sweeps < 1 or self.bp_iters < 1:
            raise ConfigError("num_reads, sweeps and bp_iters must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.w2 < 0 or (self.w1 is not None and self.w1 < 0):
            raise ConfigError("weights must be nonnegative")
        if self.amp_a <= 0:
            raise ConfigError("amplitude must be positive")
        object.__setattr__(self, "snrs", tuple(float(s) for s in self.snrs))
        object.__setattr__(self, "decoders", resolve_decoders(self.decoders))
        try:
            object.__setattr__(self, "channel", ch.normalize_kind(self.channel).replace("_", "-"))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        for value, allowed in ((self.prob_mode, PROB_MODES), (self.llr_mode, LLR_MODES)):
            if value.replace("-", "_") not in allowed:
                raise ConfigError(f"unknown mode {value!r}")

    @property
    def code_id(self) -> str:
        return Path(self.code).stem if self.code.endswith(".alist") else self.code


@dataclass(frozen=True)
class BerRecord:
    snr_db: float
    trials: int
    bit_errors: int
    ber: float
    frame_errors: int
    fer: float
    decoder: str
    channel: str
    code: str
    wall_time_ms: int

    def validate(self) -> None:
        if self.trials < 1 or not 0 <= self.frame_errors <= self.trials:
            raise ValueError(f"bad frame counts in {self}")
        if self.bit_errors < self.frame_errors:
            raise ValueError(f"fewer bit errors than frame errors in {self}")
        if not (0.0 <= self.ber <= 1.0 and 0.0 <= self.fer <= 1.0):
            raise ValueError(f"rate out of [0, 1] in {self}")
        if abs(self.fer - self.frame_errors / self.trials) > 1e-12:
            raise ValueError(f"fer inconsistent with counts in {self}")
        if self.ber > self.fer + 1e-15:
            raise ValueError(f"ber exceeds fer in {self}")
        if self.ber > 0:
            n = self.bit_errors / (self.ber * self.trials)
            if abs(n - round(n)) > 1e-6:
                raise ValueError(f"ber inconsistent with an integer frame length in {self}")
        elif self.bit_errors:
            raise ValueError(f"zero ber with nonzero errors in {self}")


@lru_cache(maxsize=16)
def _load_code(code: str):
    h = read_alist(resolve_code_path(code))
    return h, derive_generator(h)


def _sampler(kind: str, cfg: ExperimentConfig) -> Sampler:
    if kind == "exact":
        return ExactSampler()
    return SimulatedAnnealingSampler(cfg.sweeps, cfg.beta_start, cfg.beta_end)


@dataclass
class TrialOutcome:
    errors: dict[str, tuple[int, bool]] = field(default_factory=dict)
    elapsed_ns: dict[str, int] = field(default_factory=dict)


def _run_trial(cfg: ExperimentConfig, snr_db: float, trial_idx: int, samplers: dict | None = None) -> TrialOutcome:
    h, g = _load_code(cfg.code)
    msg_rng = ch.trial_rng(cfg.seed, snr_db, trial_idx, ch.STREAM_MESSAGE)
    chan_rng = ch.trial_rng(cfg.seed, snr_db, trial_idx, ch.STREAM_CHANNEL)
    sample_seed = int(ch.trial_rng(cfg.seed, snr_db, trial_idx, ch.STREAM_SAMPLER).integers(0, 2**63))

    u = msg_rng.integers(0, 2, g.k)
    c = encode(u, g)
    chan = ch.ChannelConfig(cfg.channel, snr_db, cfg.amp_a, cfg.seed)
    obs = ch.transmit(ch.bpsk_modulate(c), chan, chan_rng)
    llrs = observation_llrs(obs, cfg.llr_mode, chan.n0)
    p1 = llr_to_p1(llrs, cfg.prob_mode)

    out = TrialOutcome()
    samples_by_solver: dict[str, tuple] = {}
    pools: dict[tuple[str, bool], object] = {}
    for dec in cfg.decoders:
        t0 = time.perf_counter_ns()
        shared_ns = 0
        try:
            if dec == "bp":
                bits = bp_decode(h, llrs, BpConfig(max_iters=cfg.bp_iters)).bits
            elif dec == "ml-oracle":
                bits = ml_oracle_decode(h, g, p1)
            else:
                _, solver, post = dec.split("+")
                key = (solver, post == "min-dist")
                if solver not in samples_by_solver:
                    w1 = cfg.w1
                    if w1 is None:
                        w1 = annealing_w1(cfg.w2) if solver == "sa" else dominance_w1(h.cols, cfg.w2)
                    model = build_qubo(DecodingInstance(h, p1, w1, cfg.w2))
                    sampler = (samplers or {}).get(solver) or _sampler(solver, cfg)
                    samples = sampler.sample(model, cfg.num_reads, sample_seed)
                    samples_by_solver[solver] = (samples, time.perf_counter_ns() - t0)
                    t0 = time.perf_counter_ns()
                # sampling cost is charged to every decoder that shares the reads
                samples, shared_ns = samples_by_solver[solver]
                if key not in pools:
                    pools[key] = filter_and_dedupe(samples, h, constrained=key[1])
                pool = pools[key]
                bits = select_min_distance(pool, p1) if post == "min-dist" else select_lowest_energy(pool)
                if cfg.verbose:
                    log.info("snr=%g trial=%d %s %s", snr_db, trial_idx, dec, pool.diagnostics())
        except Exception as exc:
            raise TrialError(f"decoder {dec} failed at snr={snr_db} trial={trial_idx}: {exc}") from exc
        out.elapsed_ns[dec] = time.perf_counter_ns() - t0 + shared_ns
        nerr = int(np.count_nonzero(bits != c))
        out.errors[dec] = (nerr, nerr > 0)
    return out


def run_trial(
    cfg: ExperimentConfig, snr_db: float, trial_idx: int, samplers: dict[str, Sampler] | None = None
) -> dict[str, tuple[int, bool]]:
    """(bit errors over the n codeword bits, frame error flag) for every configured decoder.

    ``samplers`` overrides the backend per solver name (``"sa"``, ``"exact"``).
    """
    return _run_trial(cfg, snr_db, trial_idx, samplers).errors


def _run_block(cfg: ExperimentConfig, snr_db: float, start: int, stop: int):
    bit = {d: 0 for d in cfg.decoders}
    frame = {d: 0 for d in cfg.decoders}
    ns = {d: 0 for d in cfg.decoders}
    for t in range(start, stop):
        res = _run_trial(cfg, snr_db, t)
        for d, (b, f) in res.errors.items():
            bit[d] += b
            frame[d] += int(f)
            ns[d] += res.elapsed_ns[d]
    return snr_db, bit, frame, ns


def _blocks(cfg: ExperimentConfig, block: int):
    for snr in cfg.snrs:
        for start in range(0, cfg.trials, block):
            yield snr, start, min(start + block, cfg.trials)


def run_sweep(cfg: ExperimentConfig, out: str | Path | None = None) -> list[BerRecord]:
    """One record per (snr, decoder); optionally written to ``out`` as CSV."""
    h, _ = _load_code(cfg.code)
    totals = {(s, d): [0, 0, 0] for s in cfg.snrs for d in cfg.decoders}

    def accumulate(result):
        snr, bit, frame, ns = result
        for d in cfg.decoders:
            acc = totals[(snr, d)]
            acc[0] += bit[d]
            acc[1] += frame[d]
            acc[2] += ns[d]

    if cfg.workers == 1:
        for snr, a, b in _blocks(cfg, cfg.trials):
            accumulate(_run_block(cfg, snr, a, b))
    else:
        block = max(1, cfg.trials // (4 * cfg.workers))
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            futures = [pool.submit(_run_block, cfg, s, a, b) for s, a, b in _blocks(cfg, block)]
            for fut in futures:
                accumulate(fut.result())

    records = []
    for snr in cfg.snrs:
        for d in cfg.decoders:
            bit, frame, ns = totals[(snr, d)]
            records.append(
                BerRecord(
                    snr_db=snr,
                    trials=cfg.trials,
                    bit_errors=bit,
                    ber=bit / (cfg.trials * h.cols),
                    frame_errors=frame,
                    fer=frame / cfg.trials,
                    decoder=d,
                    channel=cfg.channel,
                    code=cfg.code_id,
                    wall_time_ms=ns // 1_000_000 if cfg.timing else 0,
                )
            )
    if out is not None:
        write_csv(records, out)
    return records


def records_to_csv(records: list[BerRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow(
            [repr(r.snr_db), r.trials, r.bit_errors, repr(r.ber), r.frame_errors, repr(r.fer),
             r.decoder, r.channel, r.code, r.wall_time_ms]
        )
    return buf.getvalue()


def write_csv(records: list[BerRecord], path) -> None:
    try:
        Path(path).write_text(records_to_csv(records))
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc


def parse_csv(text: str) -> list[BerRecord]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None:
        raise ValueError("empty CSV")
    missing = [c for c in CSV_COLUMNS if c not in header]
    if missing:
        raise ValueError(f"missing columns: {', '.join(missing)}")
    idx = {c: header.index(c) for c in CSV_COLUMNS}
    types = {f.name: f.type for f in fields(BerRecord)}
    conv = {"float": float, "int": int, "str": str}
    records = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        try:
            rec = BerRecord(**{c: conv[types[c]](row[idx[c]]) for c in CSV_COLUMNS})
            rec.validate()
        except (ValueError, IndexError) as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
        records.append(rec)
    return records


def read_csv(path) -> list[BerRecord]:
    return parse_csv(Path(path).read_text())


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if not raw:
        return 1
    try:
        w = int(raw)
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    if w < 1:
        raise ConfigError(f"{WORKERS_ENV} must be >= 1")
    return w


@dataclass(frozen=True)
class PlotSeries:
    label: str
    snr_db: tuple[float, ...]
    ber: tuple[float, ...]
    zero_error: tuple[bool, ...]


def plot_series(records: list[BerRecord], bits_per_frame: int | None = None) -> list[PlotSeries]:
    """One series per (decoder, channel, code), sorted by SNR.

    Points with no observed errors sit at 1/(trials * n). ``n`` is inferred from
    rows with errors unless ``bits_per_frame`` is given.
    """
    if not records:
        raise ValueError("no data rows")
    frame_len: dict[str, int] = {}
    for r in records:
        if r.ber > 0 and r.code not in frame_len:
            frame_len[r.code] = round(r.bit_errors / (r.ber * r.trials))

    groups: dict[tuple[str, str, str], list[BerRecord]] = {}
    for r in records:
        groups.setdefault((r.decoder, r.channel, r.code), []).append(r)
    multi = len({(c, k) for _, c, k in groups}) > 1

    out = []
    for (dec, chan, code), rows in groups.items():
        rows = sorted(rows, key=lambda r: r.snr_db)
        n = bits_per_frame or frame_len.get(code, 1)
        out.append(
            PlotSeries(
                label=f"{dec} ({chan}, {code})" if multi else dec,
                snr_db=tuple(r.snr_db for r in rows),
                ber=tuple(r.ber if r.ber > 0 else 1.0 / (r.trials * n) for r in rows),
                zero_error=tuple(r.ber == 0 for r in rows),
            )
        )
    return out


def emit_plot(csv_path, out_path, bits_per_frame: int | None = None) -> Path:
    """Log-scale BER vs SNR as SVG, one line per series; zero-error points drawn hollow."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    series = plot_series(read_csv(csv_path), bits_per_frame)
    with plt.rc_context({"svg.hashsalt": "ldpc-anneal", "svg.fonttype": "path"}):
        fig, ax = plt.subplots(figsize=(6.4, 4.8))
        for s in series:
            (line,) = ax.semilogy(s.snr_db, s.ber, marker="o", label=s.label)
            zeros = [(x, b) for x, b, z in zip(s.snr_db, s.ber, s.zero_error) if z]
            if zeros:
                zs, zb = zip(*zeros)
                ax.scatter(zs, zb, marker="v", s=60, facecolors="none", edgecolors=line.get_color(), zorder=3)
                for x, b in zeros:
                    ax.annotate("0 err", (x, b), textcoords="offset points", xytext=(0, -14), ha="center", fontsize=7)
        ax.set_xlabel("SNR (dB)")
        ax.set_ylabel("BER")
        ax.grid(True, which="both", alpha=0.3)
        ax.legend(fontsize=8)
        fig.tight_layout()
        out_path = Path(out_path)
        fig.savefig(out_path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return out_path
