"""Runnable estimation protocols."""

from .bayesian import identifiability_period, run_bare_ghz, run_bitflip, run_combined
from .binary_search import run_binary_search
from .common import PROTOCOLS, Ledger, RunConfig, RunResult, ShotRecord, TargetResult
from .rejection import effective_time, rejection_filter
from .sequential import run_sequential
from .sql import run_sql_barrier_probe, run_sql_baseline

BAYESIAN = {"bare_ghz": run_bare_ghz, "bitflip": run_bitflip, "combined": run_combined}


def run(config: RunConfig):
    """Dispatch on the protocol tag."""
    fn = {
        **BAYESIAN,
        "binary_search_ghz": run_binary_search,
        "binary_search_code": run_binary_search,
        "sequential": run_sequential,
        "sql_baseline": run_sql_baseline,
        "sql_barrier_probe": run_sql_barrier_probe,
    }[config.protocol]
    return fn(config)


__all__ = [
    "BAYESIAN",
    "PROTOCOLS",
    "Ledger",
    "RunConfig",
    "RunResult",
    "ShotRecord",
    "TargetResult",
    "effective_time",
    "identifiability_period",
    "rejection_filter",
    "run",
    "run_bare_ghz",
    "run_binary_search",
    "run_bitflip",
    "run_combined",
    "run_sequential",
    "run_sql_barrier_probe",
    "run_sql_baseline",
]
