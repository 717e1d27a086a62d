"""Majority-vote bisection on a GHZ probe (and a repetition-code variant)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..signal import Category, DomainError, kl_half_vs_p, three_category
from .common import RunConfig, eps_key, stream

_TAG = 0xB15EC7


@dataclass
class BinarySearchResult:
    estimate: float
    interval: tuple
    iterations: int
    shots_per_iteration: int
    total_shots: int
    total_cost: int
    widths: list = field(default_factory=list)


def initial_width(N: int) -> float:
    """Widest interval on which the quadrature decision stays monotone."""
    return math.pi / (4 * N)


def decision_prob(N: int, delta_phase: float, sigma_eps: float) -> float:
    """P(+1) at the quadrature operating point, marginalised over Z offsets.

    The parity basis is turned by a quarter period so that the fringe is
    sin(2 N delta) rather than cos; the sign then tells which half of the
    interval holds omega.
    """
    return 0.5 * (1.0 - math.sin(2 * N * delta_phase) * math.exp(-2 * N * sigma_eps**2))


def iteration_count(width: float, eps: float) -> int:
    return max(1, math.ceil(math.log2(width / eps)))


def shots_per_iteration(N: int, eps: float, delta: float, T: int, sigma_eps: float = 0.0) -> int:
    """M = max(ceil(ln(T/delta) / D), 10), D the KL at half-precision separation."""
    p = decision_prob(N, eps / 2, sigma_eps)
    D = kl_half_vs_p(p)
    if D <= 0:
        raise DomainError("zero divergence; the decision carries no information")
    return max(math.ceil(math.log(T / delta) / D), 10)


def _default_interval(config: RunConfig, N: int):
    W = initial_width(N)
    u = stream(config.seed, _TAG, 0).random()
    lo = config.omega_true - u * W
    return lo, lo + W


def run_binary_search(config: RunConfig, eps: float | None = None) -> BinarySearchResult:
    if config.protocol not in ("binary_search_ghz", "binary_search_code"):
        raise DomainError("config is not for binary search")
    eps = config.eps_targets[-1] if eps is None else eps
    N = config.probe_size
    sigma = config.noise.sigma_eps
    lo, hi = config.interval if config.interval is not None else _default_interval(config, N)
    if not hi > lo:
        raise DomainError("degenerate search interval")
    if hi - lo > initial_width(N) * (1 + 1e-12):
        raise DomainError(f"interval wider than pi/(4N) = {initial_width(N):.6g}")
    code_variant = config.protocol == "binary_search_code"
    if code_variant and not 0 < sigma < math.pi / 4:
        raise DomainError("repetition-code variant needs 0 < sigma_eps < pi/4 (tau = sigma_eps)")

    W0 = hi - lo
    T = iteration_count(W0, eps)
    M = shots_per_iteration(N, eps, config.delta, T, sigma)
    rng = stream(config.seed, _TAG, 1, eps_key(eps))
    widths = [W0]
    w = config.omega_true
    for _ in range(T):
        mid = 0.5 * (lo + hi)
        dlt = w - mid
        if code_variant:
            below = _code_vote(rng, dlt, sigma, M)
        else:
            plus = rng.binomial(M, decision_prob(N, dlt, sigma))
            below = plus > M / 2
        if below:
            hi = mid
        else:
            lo = mid
        widths.append(hi - lo)
    return BinarySearchResult(
        estimate=0.5 * (lo + hi),
        interval=(lo, hi),
        iterations=T,
        shots_per_iteration=M,
        total_shots=T * M,
        total_cost=T * M * N,
        widths=widths,
    )


def _code_vote(rng, dlt: float, sigma: float, M: int) -> bool:
    """Three-category vote: sampled phases are High, Low or abstain (Middle)."""
    samples = dlt + sigma * rng.standard_normal(M)
    cats = [three_category(float(s), sigma) for s in samples]
    high = sum(c is Category.HIGH for c in cats)
    low = sum(c is Category.LOW for c in cats)
    return low > high
