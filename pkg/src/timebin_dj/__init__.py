"""Simulator of a fiber-optic time-bin implementation of the Deutsch-Jozsa
and Bernstein-Vazirani algorithms."""

__version__ = "0.1.0"

from .timebin import TimeBinState, total_probability
from .oracles import OracleSpec, oracle_bv, oracle_complement, classify, enumerate_bv_family
from .experiment import ExperimentConfig, Imperfections, run_ideal, throughput, validate_config
from .detection import DetectorModel, SourceModel, simulate_counts, visibility_table
from .reference import dj_distribution

__all__ = [
    "TimeBinState", "total_probability",
    "OracleSpec", "oracle_bv", "oracle_complement", "classify", "enumerate_bv_family",
    "ExperimentConfig", "Imperfections", "run_ideal", "throughput", "validate_config",
    "DetectorModel", "SourceModel", "simulate_counts", "visibility_table",
    "dj_distribution",
]
