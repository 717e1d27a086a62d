"""Product-state baselines: the tensor-product SQL estimator and the syndrome FI probe."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..signal import DomainError
from .common import RunConfig, stream

_TAG_SQL = 0x5A1
_TAG_PROBE = 0x5A2


@dataclass
class SQLResult:
    estimates: np.ndarray
    mean: float
    variance: float
    predicted_variance: float
    degenerate: bool


def sql_predicted_variance(N: int, sigma_eps: float) -> float:
    return 1.0 / (4 * N) + sigma_eps**2 / N


def run_sql_baseline(config: RunConfig) -> SQLResult:
    """N independent X-basis qubits per trial, each with a fresh Z offset.

    The per-trial estimate inverts the pooled +1 frequency, w = arccos(sqrt(p)),
    which agrees with averaging per-qubit inversions to first order.
    """
    if config.protocol != "sql_baseline":
        raise DomainError("config is not for the SQL baseline")
    N, trials = config.sql_qubits, config.trials
    w, sigma = config.omega_true, config.noise.sigma_eps
    rng = stream(config.seed, _TAG_SQL)
    counts = np.empty(trials)
    # rows of at most ~4M draws keep memory flat for large N
    rows = max(1, (1 << 22) // N)
    for t0 in range(0, trials, rows):
        n = min(rows, trials - t0)
        offs = sigma * rng.standard_normal((n, N)) if sigma > 0 else 0.0
        p = np.cos(w + offs) ** 2
        counts[t0 : t0 + n] = (rng.random((n, N)) < p).sum(axis=1)
    est = np.arccos(np.sqrt(counts / N))
    # at w = 0 every outcome is +1: no fringe slope, the estimator is pinned
    degenerate = bool(math.sin(2 * w) == 0.0)
    return SQLResult(
        estimates=est,
        mean=float(est.mean()),
        variance=float(est.var(ddof=1)) if trials > 1 else 0.0,
        predicted_variance=sql_predicted_variance(N, sigma),
        degenerate=degenerate,
    )


@dataclass
class BarrierProbeResult:
    N: int
    exact: float
    monte_carlo: float
    stderr: float
    shots: int


def _weight_logprob_terms(N: int, j: np.ndarray, phi: float):
    """log P(j) and its phi-derivative for decoded weight j of N X-rotations by phi."""
    s, c = math.sin(phi), math.cos(phi)
    ls, lc = math.log(abs(s)), math.log(abs(c))
    logC = np.array([math.lgamma(N + 1) - math.lgamma(x + 1) - math.lgamma(N - x + 1) for x in j])
    a1 = 2 * j * ls + 2 * (N - j) * lc
    a2 = 2 * (N - j) * ls + 2 * j * lc
    top = np.maximum(a1, a2)
    e1, e2 = np.exp(a1 - top), np.exp(a2 - top)
    # d/dphi of s^(2j) c^(2(N-j)) is that term times 2j cot - 2(N-j) tan
    cot, tan = c / s, s / c
    g1 = 2 * j * cot - 2 * (N - j) * tan
    g2 = 2 * (N - j) * cot - 2 * j * tan
    score = (e1 * g1 + e2 * g2) / (e1 + e2)
    return logC + top + np.log(e1 + e2), score


def _logical_score(k: np.ndarray, phi: float, above: np.ndarray):
    """Score of the logical outcome, P(above) = sin^2 Theta, tan Theta = tan^k phi."""
    t2 = math.tan(phi) ** 2
    x = k * math.log(t2)
    q = 1.0 / (1.0 + np.exp(-x))  # sin^2 Theta
    # d q / d phi = q (1 - q) * k * d ln t2 / d phi, with d ln t2/d phi = 2 / (sin cos)
    dq = q * (1 - q) * k * 2.0 / (math.sin(phi) * math.cos(phi))
    return np.where(above, dq / q, -dq / (1 - q))


def barrier_exact(N: int) -> float:
    """sum_j P(j) 4 (N - 2j)^2 at phi = pi/4, in integer arithmetic."""
    num = sum(math.comb(N, c) * (N - 2 * min(c, N - c)) ** 2 for c in range(N + 1))
    return 4 * num / 2**N


def run_sql_barrier_probe(config: RunConfig, phi: float = math.pi / 4) -> BarrierProbeResult:
    """Empirical Fisher information of (syndrome weight, logical outcome) data."""
    if config.protocol != "sql_barrier_probe":
        raise DomainError("config is not for the barrier probe")
    N, shots = config.probe_size, config.shots
    if N % 2 == 0:
        raise DomainError("probe size must be odd")
    rng = stream(config.seed, _TAG_PROBE)
    c = rng.binomial(N, math.sin(phi) ** 2, size=shots)
    j = np.minimum(c, N - c)
    k = N - 2 * j
    t2k = np.exp(k * math.log(math.tan(phi) ** 2))
    above = rng.random(shots) < t2k / (1 + t2k)
    uj, inv = np.unique(j, return_inverse=True)
    _, sj = _weight_logprob_terms(N, uj, phi)
    score = sj[inv] + _logical_score(k, phi, above)
    sq = score**2
    return BarrierProbeResult(
        N=N,
        exact=barrier_exact(N) if abs(phi - math.pi / 4) < 1e-15 else float("nan"),
        monte_carlo=float(sq.mean()),
        stderr=float(sq.std(ddof=1) / math.sqrt(shots)),
        shots=shots,
    )
