"""Command line entry point: gen-code, export-qubo, solve, simulate, plot."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import codes, harness, qubo, solvers

# simulate flags that may also come from a key=value config file: name -> type
SIM_KEYS = {
    "code": str,
    "channel": str,
    "snr-min": float,
    "snr-max": float,
    "snr-step": float,
    "trials": int,
    "decoder": str,
    "post": str,
    "num-reads": int,
    "sweeps": int,
    "beta-start": float,
    "beta-end": float,
    "w1": float,
    "w2": float,
    "prob-mode": str,
    "llr-mode": str,
    "amp-a": float,
    "bp-iters": int,
    "seed": int,
    "workers": int,
    "out": str,
    "no-timing": bool,
    "verbose": bool,
}
SIM_DEFAULTS = {
    "code": "ldpc_22_11",
    "channel": "rayleigh-coherent",
    "snr-min": 4.0,
    "snr-max": 10.0,
    "snr-step": 1.0,
    "trials": 2000,
    "decoder": "sa",
    "post": "min-dist",
    "num-reads": 20,
    "sweeps": 1000,
    "beta-start": 0.1,
    "beta-end": 10.0,
    "w1": None,
    "w2": 1.0,
    "prob-mode": "sigmoid",
    "llr-mode": "exact",
    "amp-a": 1.0,
    "bp-iters": 50,
    "seed": 0,
    "workers": None,
    "out": "results.csv",
    "no-timing": False,
    "verbose": False,
}


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def parse_config_file(path) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment. Keys are the simulate flag names."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise harness.ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("_", "-")
        if key not in SIM_KEYS:
            raise harness.ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        typ = SIM_KEYS[key]
        try:
            values[key] = _bool(value) if typ is bool else typ(value)
        except ValueError as exc:
            raise harness.ConfigError(f"{path}:{lineno}: {exc}") from None
    return values


def snr_range(lo: float, hi: float, step: float) -> tuple[float, ...]:
    if step <= 0:
        raise harness.ConfigError("snr-step must be positive")
    if hi < lo:
        raise harness.ConfigError("snr-max is below snr-min")
    count = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return tuple(round(lo + i * step, 10) for i in range(count))


def experiment_from_args(args: argparse.Namespace) -> tuple[harness.ExperimentConfig, str]:
    merged = dict(SIM_DEFAULTS)
    if args.config:
        merged.update(parse_config_file(args.config))
    for key in SIM_KEYS:
        v = getattr(args, key.replace("-", "_"))
        if v is not None and v is not False:
            merged[key] = v
    workers = merged["workers"] if merged["workers"] is not None else harness.default_workers()
    cfg = harness.ExperimentConfig(
        code=merged["code"],
        channel=merged["channel"],
        snrs=snr_range(merged["snr-min"], merged["snr-max"], merged["snr-step"]),
        trials=merged["trials"],
        decoders=harness.resolve_decoders(merged["decoder"], merged["post"]),
        num_reads=merged["num-reads"],
        sweeps=merged["sweeps"],
        beta_start=merged["beta-start"],
        beta_end=merged["beta-end"],
        w1=merged["w1"],
        w2=merged["w2"],
        prob_mode=merged["prob-mode"],
        llr_mode=merged["llr-mode"],
        amp_a=merged["amp-a"],
        bp_iters=merged["bp-iters"],
        seed=merged["seed"],
        workers=workers,
        timing=not merged["no-timing"],
        verbose=merged["verbose"],
    )
    return cfg, merged["out"]


def cmd_gen_code(args) -> int:
    h = codes.construct_regular_code(args.n, args.checks, args.db, args.dc, args.seed)
    codes.write_alist(h, args.out)
    k = codes.derive_generator(h).k
    print(f"wrote {args.out}: {h.rows}x{h.cols}, rank {h.rank}, k={k}")
    return 0


def cmd_export_qubo(args) -> int:
    h = codes.read_alist(harness.resolve_code_path(args.code))
    p1 = np.loadtxt(args.p1, dtype=np.float64, ndmin=1).ravel()
    model = qubo.build_qubo(qubo.DecodingInstance(h, p1, args.w1, args.w2))
    Path(args.out).write_text(qubo.export_qubo(model))
    print(f"wrote {args.out}: {model.num_vars} variables")
    return 0


def cmd_solve(args) -> int:
    model = qubo.import_qubo(Path(args.qubo).read_text())
    if args.solver == "exact":
        ss = solvers.solve_exact(model)
    else:
        sched = solvers.AnnealSchedule(args.num_reads, args.sweeps, args.beta_start, args.beta_end)
        ss = solvers.solve_sa(model, sched, args.seed)
    for line in ss.lines():
        print(line)
    return 0


def cmd_simulate(args) -> int:
    cfg, out = experiment_from_args(args)
    if cfg.verbose:
        logging.getLogger().setLevel(logging.INFO)
    records = harness.run_sweep(cfg, out)
    for r in records:
        print(f"snr={r.snr_db:g} {r.decoder}: ber={r.ber:.3e} fer={r.fer:.3e} ({r.bit_errors} bit errors)")
    print(f"wrote {out}")
    return 0


def cmd_plot(args) -> int:
    path = harness.emit_plot(args.inp, args.out, args.bits_per_frame)
    print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ldpc-anneal", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-code", help="construct a seeded (d_b, d_c)-regular code as ALIST")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--checks", type=int, required=True)
    p.add_argument("--db", type=int, required=True)
    p.add_argument("--dc", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_code)

    p = sub.add_parser("export-qubo", help="compile a decoding instance to coordinate-list QUBO text")
    p.add_argument("--code", required=True, help="ALIST file or bundled code name")
    p.add_argument("--p1", required=True, help="whitespace-separated Pr(bit=1) values")
    p.add_argument("--w1", type=float, default=None, help="default: n*w2 + 1")
    p.add_argument("--w2", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export_qubo)

    p = sub.add_parser("solve", help="sample a QUBO file and print 'energy multiplicity bits'")
    p.add_argument("--qubo", required=True)
    p.add_argument("--solver", choices=("exact", "sa"), default="sa")
    p.add_argument("--num-reads", type=int, default=20)
    p.add_argument("--sweeps", type=int, default=1000)
    p.add_argument("--beta-start", type=float, default=0.1)
    p.add_argument("--beta-end", type=float, default=10.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("simulate", help="Monte Carlo BER/FER sweep to CSV")
    p.add_argument("--config", help="key=value file; command line flags override it")
    p.add_argument("--code")
    p.add_argument("--channel", choices=("awgn", "rayleigh-coherent", "rayleigh-noncoherent"))
    p.add_argument("--snr-min", type=float)
    p.add_argument("--snr-max", type=float)
    p.add_argument("--snr-step", type=float)
    p.add_argument("--trials", type=int)
    p.add_argument("--decoder", help="comma list of: sa, exact, bp, ml-oracle or full pipeline ids")
    p.add_argument("--post", choices=("min-dist", "lowest-energy", "both"))
    p.add_argument("--num-reads", type=int)
    p.add_argument("--sweeps", type=int)
    p.add_argument("--beta-start", type=float)
    p.add_argument("--beta-end", type=float)
    p.add_argument("--w1", type=float, help="default: 0.5*w2 for sa, n*w2+1 for exact")
    p.add_argument("--w2", type=float)
    p.add_argument("--prob-mode", choices=("sigmoid", "paper-literal"))
    p.add_argument("--llr-mode", choices=("exact", "paper-literal"))
    p.add_argument("--amp-a", type=float)
    p.add_argument("--bp-iters", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, help=f"default: ${harness.WORKERS_ENV} or 1")
    p.add_argument("--out")
    p.add_argument("--no-timing", action="store_true", help="write wall_time_ms as 0 (reproducible CSV)")
    p.add_argument("--verbose", action="store_true", help="log per-frame candidate pool sizes")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("plot", help="BER vs SNR chart (SVG) from a results CSV")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--bits-per-frame", type=int, default=None)
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
        format="%(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
