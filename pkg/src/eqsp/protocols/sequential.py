"""Ternary-threshold search with product-state repetition-code queries."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..signal import DomainError
from .common import RunConfig, eps_key, stream

_TAG = 0x5E9
QUERY_CONSTANT = 3.0


@dataclass
class SequentialResult:
    estimate: float
    interval: tuple
    rounds: int
    total_M: int
    queries: int
    attempts: int
    accepted: int
    widths: list = field(default_factory=list)

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.attempts if self.attempts else 0.0


def query_multiplier(width: float, N: int, delta: float, c: float = QUERY_CONSTANT) -> int:
    """M_r = ceil(c ln(1/delta) / (W sqrt N)), capped so M * 2W/3 < pi/2."""
    m = math.ceil(c * math.log(1 / delta) / (width * math.sqrt(N)))
    cap = math.floor(0.99 * 3 * math.pi / (4 * width))
    return max(1, min(m, cap))


def min_kept(N: int) -> float:
    return math.sqrt(N) / 2


def logical_above_prob(k: int, shifted: float) -> float:
    """sin^2 of Theta = arctan(tan^k(shifted)), via the amplitude ratio."""
    s2, c2 = math.sin(shifted) ** 2, math.cos(shifted) ** 2
    if s2 == 0.0:
        return 0.0
    if c2 == 0.0:
        return 1.0
    # sin^2 Theta = t^(2k) / (1 + t^(2k)) with t^2 = s2 / c2
    x = k * (math.log(s2) - math.log(c2))
    return 1.0 / (1.0 + math.exp(-x)) if x > -700 else 0.0


def query(rng, N: int, M: int, phi: float, threshold: float):
    """One threshold query with post-selection; returns (above, attempts)."""
    shifted = M * (phi - threshold) + math.pi / 4
    p_flip = math.sin(shifted) ** 2
    attempts = 0
    while True:
        attempts += 1
        c = int(rng.binomial(N, p_flip))
        j = min(c, N - c)
        k = N - 2 * j
        if k >= min_kept(N):
            return bool(rng.random() < logical_above_prob(k, shifted)), attempts


def run_sequential(config: RunConfig, eps: float | None = None) -> SequentialResult:
    if config.protocol != "sequential":
        raise DomainError("config is not for the sequential protocol")
    if config.noise.gamma_mean != 0 or config.noise.sigma_eps != 0:
        raise DomainError("the sequential protocol assumes noiseless signal unitaries")
    eps = config.eps_targets[-1] if eps is None else eps
    N = config.probe_size
    lo, hi = config.interval if config.interval is not None else (0.0, math.pi / 2)
    if not hi > lo:
        raise DomainError("degenerate search interval")
    phi = config.omega_true
    rng = stream(config.seed, _TAG, eps_key(eps))
    total_M = queries = attempts = 0
    widths = [hi - lo]
    rounds = 0
    while hi - lo > 2 * eps:
        W = hi - lo
        M = query_multiplier(W, N, config.delta)
        above = []
        for t in (lo + W / 3, lo + 2 * W / 3):
            a, n = query(rng, N, M, phi, t)
            above.append(a)
            attempts += n
            total_M += n * M
            queries += 1
        if not above[0] and not above[1]:
            hi = lo + W / 2
        elif above[0] and above[1]:
            lo = lo + W / 2
        else:
            lo, hi = lo + W / 4, lo + 3 * W / 4
        widths.append(hi - lo)
        rounds += 1
    return SequentialResult(
        estimate=0.5 * (lo + hi),
        interval=(lo, hi),
        rounds=rounds,
        total_M=total_M,
        queries=queries,
        attempts=attempts,
        accepted=queries,
        widths=widths,
    )


def center_acceptance(N: int) -> float:
    """Exact post-selection acceptance when the query sits on its threshold (p = 1/2)."""
    keep = min_kept(N)
    acc = 0
    for c in range(N + 1):
        if N - 2 * min(c, N - c) >= keep:
            acc += math.comb(N, c)
    return acc / 2**N
