"""Fisher information and Cramer-Rao helpers."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .signal import DomainError


class SingularPointError(ArithmeticError):
    pass


@dataclass(frozen=True)
class FisherReport:
    value: float
    method: str
    operating_point: float

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("Fisher information is non-negative")


def fd_step(omega: float) -> float:
    return max(1e-6, 1e-8 * abs(omega))


def classical_fi_binary(
    prob_fn: Callable[[float], float],
    omega: float,
    dprob_fn: Callable[[float], float] | None = None,
) -> FisherReport:
    """(p')^2 (1/p + 1/(1-p)) for a two-outcome measurement.

    p' comes from dprob_fn when given, else from a central difference.
    """
    p = prob_fn(omega)
    if p <= 0.0 or p >= 1.0:
        raise SingularPointError(f"p = {p} at omega = {omega}; the binary FI is singular")
    if dprob_fn is not None:
        dp, method = dprob_fn(omega), "analytic"
    else:
        h = fd_step(omega)
        dp, method = (prob_fn(omega + h) - prob_fn(omega - h)) / (2 * h), "finite_difference"
    return FisherReport(dp * dp / (p * (1 - p)), method, omega)


def sql_barrier_total(N: int) -> FisherReport:
    """sum_j P(j) 4 (N-2j)^2 with P(j) = C(N,j) 2^(1-N) at the balanced point.

    The sum over raw flip counts c covers both cosets of each weight, so the
    moment is an exact integer before the final division.
    """
    if N < 1 or N % 2 == 0:
        raise DomainError("N must be odd")
    num = sum(math.comb(N, c) * (N - 2 * c) ** 2 for c in range(N + 1))
    return FisherReport(4 * num / 2**N, "analytic", math.pi / 4)


def poisson_binomial(probs) -> np.ndarray:
    """Distribution of the number of successes among independent Bernoulli(p_k)."""
    dist = np.zeros(len(probs) + 1)
    dist[0] = 1.0
    for i, p in enumerate(probs):
        if not 0.0 <= p <= 1.0:
            raise DomainError("probabilities must lie in [0, 1]")
        dist[1 : i + 2] = dist[1 : i + 2] * (1 - p) + dist[: i + 1] * p
        dist[0] *= 1 - p
    return dist


def bitflip_qfi(N: int, per_qubit_flip_probs) -> FisherReport:
    """4 E[(N - d)^2] with d Poisson-binomial over the per-qubit flip probabilities."""
    probs = list(per_qubit_flip_probs)
    if len(probs) != N:
        raise DomainError("need one flip probability per qubit")
    if any(p >= 1 for p in probs):
        raise DomainError("flip probabilities must be below 1")
    dist = poisson_binomial(probs)
    d = np.arange(N + 1)
    return FisherReport(float(4 * np.sum(dist * (N - d) ** 2)), "analytic", float("nan"))


def cramer_rao_bound(F: float, M_measurements: int) -> float:
    if M_measurements < 1:
        raise DomainError("need at least one measurement")
    if F < 0:
        raise DomainError("Fisher information must be non-negative")
    if F == 0:
        return math.inf
    return 1.0 / (M_measurements * F)


def monte_carlo_fi(score_samples) -> FisherReport:
    """Mean squared score as an FI estimate."""
    s = np.asarray(score_samples, dtype=float)
    return FisherReport(float(np.mean(s * s)), "monte_carlo", float("nan"))


def ghz_fisher(N: int, omega: float, sigma_eps: float) -> FisherReport:
    """Analytic FI of the marginalised parity measurement."""
    v = math.exp(-2 * N * sigma_eps**2)
    c, s = math.cos(2 * N * omega), math.sin(2 * N * omega)
    p = 0.5 * (1 + v * c)
    dp = -N * v * s
    if p <= 0 or p >= 1:
        raise SingularPointError("parity probability at 0 or 1")
    return FisherReport(dp * dp / (p * (1 - p)), "analytic", omega)
