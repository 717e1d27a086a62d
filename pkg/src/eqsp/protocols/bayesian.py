"""Grid-Bayesian estimation runs: bare GHZ, bit-flip code and the combined protocol.

All three share one loop.  Experiments are simulated in fixed blocks of
``CHUNK`` so experiment i always consumes the same random numbers, then fed to
the posterior between convergence checkpoints.
"""

from __future__ import annotations

import math

import numpy as np

from .. import bayes
from ..signal import DomainError, flip_probability_table
from .common import (
    CHUNK,
    MAX_PROBE,
    Ledger,
    RunConfig,
    RunResult,
    TargetResult,
    multiplier_limit,
    probe_limit,
    stream,
    target_stream,
)

IDENT_PERIOD = math.pi
_DEVICE = 0xDE71CE


def identifiability_period(protocol: str, mode: str, N: int = 1) -> float:
    """Smallest period of every likelihood the inference can see.

    Post-selected code rounds only carry harmonics that are multiples of the
    qubit count, so the phase is identifiable modulo pi / (qubits).
    """
    if protocol == "bare_ghz" or mode == "full_likelihood":
        return IDENT_PERIOD
    if protocol == "bitflip":
        return IDENT_PERIOD / N
    if protocol == "combined":
        return IDENT_PERIOD / (3 * N)
    raise DomainError(f"no identifiability rule for {protocol!r}")


def _run_targets(config: RunConfig, simulate, cadence, count_key, blocks=1) -> RunResult:
    period = identifiability_period(config.protocol, config.mode, config.code.N)
    result = RunResult(config)
    for eps in config.eps_targets:
        result.targets.append(_run_one(config, eps, simulate, cadence, count_key, blocks, period))
    return result


def _run_one(config, eps, simulate, cadence, count_key, blocks, period) -> TargetResult:
    grid = bayes.init_uniform(config.grid_bits, IDENT_PERIOD)
    ledger = Ledger(blocks) if config.keep_ledger else None
    sim = simulate(eps)
    K = config.budget_K
    done = 0
    cost_so_far = 0
    count_so_far = 0
    accepted_so_far = 0
    converged = False
    stop_at = K
    block = 0
    while done < K and not converged:
        n = min(CHUNK, K - done)
        rng = target_stream(config.seed, config.protocol, eps, block)
        ch = sim(rng, CHUNK)
        block += 1
        ch = {k: v[:n] for k, v in ch.items()}
        counts = np.cumsum(ch[count_key]) + count_so_far
        is_check = np.zeros(n, dtype=bool)
        inc = ch[count_key].astype(bool)
        is_check[inc] = counts[inc] % cadence == 0
        cuts = list(np.flatnonzero(is_check) + 1)
        if not cuts or cuts[-1] != n:
            cuts.append(n)
        lo = 0
        for hi in cuts:
            use = ch["use"][lo:hi]
            if use.any():
                bayes.update_trig(grid, ch["k"][lo:hi][use], ch["a"][lo:hi][use], ch["b"][lo:hi][use])
            if is_check[hi - 1] and bayes.converged(grid, config.omega_true, eps, period):
                converged = True
                stop_at = done + hi
                break
            lo = hi
        used = int(stop_at - done) if converged else n
        cost_so_far += int(ch["cost"][:used].sum())
        accepted_so_far += int(ch["accepted"][:used].sum())
        count_so_far = int(counts[used - 1]) if used else count_so_far
        if ledger is not None:
            idx = np.arange(done, done + used)
            ledger.append(
                idx, ch["multiplier"][:used], ch["theta"][:used], ch["d"][:used],
                ch["outcome"][:used], ch["accepted"][:used], ch["cost"][:used],
            )
        done += used
    est = math.fmod(bayes.map_estimate(grid), period)
    return TargetResult(
        eps=eps,
        converged=converged,
        total_cost=cost_so_far,
        experiments_used=done,
        estimate=est,
        circ_error=bayes.circular_error(est, config.omega_true, period),
        acceptance_rate=float(accepted_so_far / done) if done else 0.0,
        ledger=ledger,
    )


def depolarizing_rates(seed: int, gamma: float, h: float, size: int = MAX_PROBE) -> np.ndarray:
    """Per-qubit rates Normal(gamma, (gamma h)^2) clipped to [0, 0.99], fixed per seed."""
    rng = stream(seed, _DEVICE, 1)
    g = gamma + gamma * h * rng.standard_normal(size)
    return np.clip(g, 0.0, 0.99)


def ghz_visibility(rates: np.ndarray) -> np.ndarray:
    """V_n = prod_{k<=n} (1 - gamma_k), indexed by n - 1."""
    return np.cumprod(1.0 - rates)


def run_bare_ghz(config: RunConfig) -> RunResult:
    if config.protocol != "bare_ghz":
        raise DomainError("config is not for bare_ghz")
    if config.noise.model != "depolarizing":
        raise DomainError("bare GHZ uses the depolarizing noise model")
    w = config.omega_true
    V = ghz_visibility(depolarizing_rates(config.seed, config.noise.gamma_mean, config.noise.heterogeneity_h))

    def simulate(eps):
        nmax = probe_limit(eps)

        def sim(rng, size):
            n = rng.integers(1, nmax + 1, size=size)
            u = rng.random(size)
            vis = V[n - 1]
            p = 0.5 * (1.0 + vis * np.cos(2 * n * w))
            out = np.where(u < p, 1, -1)
            return dict(
                multiplier=n, theta=np.zeros(size), d=np.zeros((size, 1), dtype=np.int64),
                outcome=out, accepted=np.ones(size, dtype=bool), cost=n,
                k=n.astype(np.int64), a=out * vis, b=np.zeros(size),
                # a likelihood of exactly 1/2 everywhere is a no-op
                use=(1.0 + vis) != 1.0, tick=np.ones(size, dtype=np.int64),
            )

        return sim

    return _run_targets(config, simulate, cadence=100, count_key="tick")


def code_devices(seed: int, qubits: int, gamma: float, h: float, sigma_eps: float):
    """Frozen per-qubit transverse fields and Z offsets for one device realisation."""
    g = gamma + gamma * h * stream(seed, _DEVICE, 2).standard_normal(qubits)
    e = sigma_eps * stream(seed, _DEVICE, 3).standard_normal(qubits)
    return g, e


def simulate_code_shots(rng, size, *, N, blocks, mmax, ptab, eps_k, omega, sigma_eps):
    """Syndrome rounds for `blocks` repetition codes sharing one logical parity.

    ptab[M-1, q] is the flip probability of qubit q at multiplier M.  Flipped
    qubits drop out of the signal; a block with more than L flips is decoded
    into a logical flip, reversing its phase.  Inference later assumes the
    decoded weights.
    """
    L = (N - 1) // 2
    nq = N * blocks
    M = rng.integers(1, mmax + 1, size=size)
    theta = rng.uniform(0.0, 2 * math.pi, size=size)
    flips = rng.random((size, nq)) < ptab[M - 1]
    u = rng.random(size)

    fb = flips.reshape(size, blocks, N)
    c = fb.sum(axis=2)
    d = np.minimum(c, N - c)
    sign = np.where(c <= L, 1.0, -1.0)
    offs = np.where(fb, 0.0, eps_k.reshape(blocks, N)[None]).sum(axis=2)
    phase = (sign * ((N - c) * M[:, None] * omega + offs)).sum(axis=1) - theta / 2
    p = np.cos(phase) ** 2
    out = np.where(u < p, 1, -1)

    K = (N - d).sum(axis=1)
    vis = np.exp(-2.0 * K * sigma_eps**2)
    accepted = (d == 0).all(axis=1)
    return dict(
        multiplier=M, theta=theta, d=d, outcome=out, accepted=accepted, cost=nq * M,
        k=(K * M).astype(np.int64), a=out * vis * np.cos(theta), b=out * vis * np.sin(theta),
        flips=c,  # true per-block flip counts, for diagnostics only
    )


def _run_code(config: RunConfig, blocks: int) -> RunResult:
    N = config.code.N
    nq = N * blocks
    w = config.omega_true
    sigma = config.noise.sigma_eps if blocks > 1 else 0.0
    g, eps_k = code_devices(config.seed, nq, config.noise.gamma_mean, config.noise.heterogeneity_h, sigma)
    post = config.mode == "post_selection"

    def simulate(eps):
        mmax = multiplier_limit(eps, nq, config.grid_bits)
        ptab = flip_probability_table(w, g, np.arange(1, mmax + 1))

        def sim(rng, size):
            ch = simulate_code_shots(
                rng, size, N=N, blocks=blocks, mmax=mmax, ptab=ptab, eps_k=eps_k, omega=w, sigma_eps=sigma
            )
            ch["use"] = ch["accepted"] if post else np.ones(size, dtype=bool)
            ch["tick"] = ch["use"].astype(np.int64)
            return ch

        return sim

    return _run_targets(config, simulate, cadence=100 if post else 10, count_key="tick", blocks=blocks)


def run_bitflip(config: RunConfig) -> RunResult:
    if config.protocol != "bitflip":
        raise DomainError("config is not for bitflip")
    if config.code.blocks != 1:
        raise DomainError("bit-flip protocol uses a single code block")
    return _run_code(config, 1)


def run_combined(config: RunConfig) -> RunResult:
    if config.protocol != "combined":
        raise DomainError("config is not for combined")
    if config.code.blocks != 3:
        raise DomainError("combined protocol uses three code blocks")
    return _run_code(config, 3)
