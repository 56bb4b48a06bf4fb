"""QUBO-based LDPC decoding over fading channels, with annealing samplers and a BP baseline."""

from .bp import BpConfig, BpResult, bp_decode
from .codes import (
    GeneratorMatrix,
    ParityCheckMatrix,
    bundled_code,
    construct_regular_code,
    derive_generator,
    encode,
    load_alist,
    save_alist,
    syndrome,
)
from .harness import BerRecord, ExperimentConfig, run_sweep, run_trial
from .qubo import DecodingInstance, QuboModel, build_qubo, energy
from .solvers import AnnealSchedule, SampleSet, solve_exact, solve_sa

__version__ = "0.1.0"
