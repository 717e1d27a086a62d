"""Closed-form angles, probabilities and likelihoods.

Everything in here is pure and deterministic.  Functions take plain floats
unless noted; the few that accept arrays say so.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

# exp() overflows just above 709; tan^N beyond e^700 is pinned to the asymptote
_LOG_CLAMP = 700.0


class DomainError(ValueError):
    """Raised when an argument lies outside an operation's domain."""


class ApproximationWarning(UserWarning):
    """A leading-order expansion is being used outside its comfortable range."""


@dataclass(frozen=True)
class QubitHamiltonian:
    omega: float
    gamma: float = 0.0
    chi: float = 0.0

    def __post_init__(self):
        for v in (self.omega, self.gamma, self.chi):
            if not math.isfinite(v):
                raise DomainError("Hamiltonian fields must be finite")

    @property
    def Omega(self) -> float:
        return math.sqrt(self.omega**2 + self.gamma**2 + self.chi**2)


@dataclass(frozen=True)
class RotationDecomposition:
    beta: float
    phi: float
    upsilon: float


@dataclass(frozen=True)
class CodeShape:
    L: int
    blocks: int = 1

    def __post_init__(self):
        if self.L < 0:
            raise DomainError("code parameter L must be non-negative")
        if self.blocks < 1:
            raise DomainError("need at least one block")

    @property
    def N(self) -> int:
        return 2 * self.L + 1

    @property
    def total_qubits(self) -> int:
        return self.blocks * self.N


@dataclass(frozen=True)
class NoiseSpec:
    sigma_eps: float = 0.0
    gamma_mean: float = 0.0
    heterogeneity_h: float = 0.0
    model: str = "depolarizing"

    def __post_init__(self):
        if self.sigma_eps < 0 or self.heterogeneity_h < 0 or self.gamma_mean < 0:
            raise DomainError("noise parameters must be non-negative")
        if self.model not in ("depolarizing", "hamiltonian"):
            raise DomainError(f"unknown noise model {self.model!r}")


def _code_L(N: int) -> int:
    if N < 1 or N % 2 == 0:
        raise DomainError(f"code length must be odd and positive, got {N}")
    return (N - 1) // 2


def _atan_signed_exp(sign: float, log_mag: float) -> float:
    """arctan(sign * exp(log_mag)) without overflow."""
    if sign == 0.0:
        return 0.0
    return math.copysign(math.atan(math.exp(min(log_mag, _LOG_CLAMP))), sign)


def _atan_tan_power(k: int, x: float) -> float:
    """arctan(tan(x)**k) for odd k, computed in log-magnitude form."""
    s, c = math.sin(x), math.cos(x)
    if s == 0.0:
        return 0.0
    if c == 0.0:
        return math.copysign(math.pi / 2, s)
    t = s / c
    return _atan_signed_exp(math.copysign(1.0, t), k * math.log(abs(t)))


def decompose(h: QubitHamiltonian) -> RotationDecomposition:
    """Split exp(-i(wZ + gX + cY)) into a Z-signal amplitude/phase and an error axis.

    The Z coefficient of the unitary is cos(Omega) - i sin(Omega) w/Omega, which
    we write as +-beta exp(-i phi) with phi folded into (-pi/2, pi/2].
    """
    Om = h.Omega
    if Om == 0.0:
        return RotationDecomposition(1.0, 0.0, 0.0)
    s, c = math.sin(Om), math.cos(Om)
    zs = s * h.omega / Om
    beta = min(1.0, math.hypot(c, zs))
    phi = math.atan2(zs, c)
    if phi > math.pi / 2:
        phi -= math.pi
    elif phi <= -math.pi / 2:
        phi += math.pi
    upsilon = 0.5 * math.atan2(h.chi, h.gamma)
    return RotationDecomposition(beta, phi, upsilon)


def phase_amplification(N: int, omega: float) -> float:
    """Phi_N(w) = arctan((-1)^L tan^N w), the step-like amplification map."""
    L = _code_L(N)
    if not abs(omega) < math.pi / 2:
        raise DomainError("|omega| must be below pi/2")
    val = _atan_tan_power(N, omega)
    return -val if L % 2 else val


def phase_amplification_derivative(N: int, omega: float) -> float:
    L = _code_L(N)
    if not abs(omega) < math.pi / 2:
        raise DomainError("|omega| must be below pi/2")
    t = math.tan(omega)
    sec2 = 1.0 + t * t
    sign = -1.0 if L % 2 else 1.0
    if t == 0.0:
        return sign * sec2 if N == 1 else 0.0
    lt = math.log(abs(t))
    # t^(N-1) / (1 + t^(2N)); N-1 is even so no sign from t
    log_ratio = (N - 1) * lt - _log1pexp(2 * N * lt)
    return sign * N * math.exp(log_ratio) * sec2


def _log1pexp(x: float) -> float:
    return x + math.log1p(math.exp(-x)) if x > 0 else math.log1p(math.exp(x))


def syndrome_rotation_angle(N: int, j: int, phi: float) -> float:
    """Logical rotation angle Theta_j = arctan(tan^(N-2j) phi) for decoded weight j."""
    L = _code_L(N)
    if not 0 <= j <= L:
        raise DomainError(f"decoded weight must lie in [0, {L}], got {j}")
    if not abs(phi) < math.pi / 2:
        raise DomainError("|phi| must be below pi/2")
    k = N - 2 * j
    if k == 1:
        return phi
    return _atan_tan_power(k, phi)


def effective_axis(N: int, j: int, vartheta: float) -> float:
    L = _code_L(N)
    if not 0 <= j <= L:
        raise DomainError(f"decoded weight must lie in [0, {L}], got {j}")
    return ((N - 2 * j) * vartheta + (L - j) * math.pi) % (2 * math.pi)


def ghz_parity_prob(N: int, omega: float, S: float = 0.0) -> float:
    return math.cos(N * omega + S) ** 2


def marginalized_parity_prob(N: int, omega: float, sigma_eps: float) -> float:
    """Parity +1 probability averaged over Gaussian per-qubit offsets."""
    if sigma_eps < 0:
        raise DomainError("sigma_eps must be non-negative")
    return 0.5 * (1.0 + math.cos(2 * N * omega) * math.exp(-2 * N * sigma_eps**2))


def bitflip_shot_likelihood(
    N: int,
    d: int,
    M: int,
    theta: float,
    phi: float,
    outcome: int = 1,
    visibility: float = 1.0,
) -> float:
    """Probability of a logical-X outcome after a syndrome round.

    Uses the squared-cosine convention: the logical phase (N-d) M phi enters
    doubled, P(+1) = (1 + V cos(2 (N-d) M phi - theta)) / 2.  Equivalently the
    basis rotation theta is stored as twice the physical Z_L rotation angle.
    """
    if not 0 <= d <= N:
        raise DomainError("d must lie in [0, N]")
    if M < 1:
        raise DomainError("M must be at least 1")
    c = visibility * math.cos(2 * (N - d) * M * phi - theta)
    return 0.5 * (1.0 + c) if outcome == 1 else 0.5 * (1.0 - c)


def flip_probability(d: RotationDecomposition) -> float:
    return min(1.0, max(0.0, 1.0 - d.beta**2))


def hetero_expected_flip_prob(omega: float, gamma: float, h: float) -> float:
    """Leading-order mean flip probability for gamma_k ~ Normal(gamma, (gamma h)^2)."""
    if omega == 0.0:
        raise DomainError("omega must be non-zero")
    if abs(gamma) * (1 + h) / abs(omega) > 0.3:
        warnings.warn(
            "gamma(1+h)/omega > 0.3; the weak-field expansion is unreliable",
            ApproximationWarning,
            stacklevel=2,
        )
    return math.sin(omega) ** 2 / omega**2 * gamma**2 * (1 + h * h)


def qsp_activation(N: int, phi: float) -> tuple[float, float]:
    """Post-selected logical angle and success probability for X-rotations by phi."""
    L = _code_L(N)
    val = _atan_tan_power(N, phi)
    angle = -val if L % 2 else val
    c2, s2 = math.cos(phi) ** 2, math.sin(phi) ** 2
    return angle, c2**N + s2**N


def subset_phase(omega_list, subset) -> float:
    """phi_S with tan(phi_S) = (-1)^(L+|S|) prod_S tan w_k prod_notS cot w_j."""
    N = len(omega_list)
    L = _code_L(N)
    S = set(subset)
    if not S <= set(range(N)):
        raise DomainError("subset indices out of range")
    log_mag = 0.0
    sign = -1.0 if (L + len(S)) % 2 else 1.0
    for k, w in enumerate(omega_list):
        s, c = math.sin(w), math.cos(w)
        if abs(s) < 1e-300 or abs(c) < 1e-15:
            raise DomainError("omega_k at a multiple of pi/2")
        t = s / c
        if t < 0:
            sign = -sign
        lt = math.log(abs(t))
        log_mag += lt if k in S else -lt
    return _atan_signed_exp(sign, log_mag)


class Category(enum.Enum):
    LOW = -1
    MIDDLE = 0
    HIGH = 1


def three_category(phi_sample: float, tau: float) -> Category:
    if not 0 < tau < math.pi / 4:
        raise DomainError("tau must lie in (0, pi/4)")
    if phi_sample > tau:
        return Category.HIGH
    if phi_sample < -tau:
        return Category.LOW
    return Category.MIDDLE


def kl_half_vs_p(p: float) -> float:
    """KL divergence of Bernoulli(1/2) from Bernoulli(p), in nats."""
    if p <= 0.0 or p >= 1.0:
        return math.inf
    return -0.5 * math.log(4 * p * (1 - p))


def arctan_projection_prob(L: int, x: float) -> float:
    """Code-space return probability after X-rotating every qubit by arccos(x)."""
    if abs(x) > 1:
        raise DomainError("|x| must be at most 1")
    N = 2 * L + 1
    return x ** (2 * N) + (1 - x * x) ** N


def arctan_logical_angle(L: int, x: float) -> float:
    """Logical X-rotation angle actually produced by the projected protocol.

    Equals Phi_N(arccos x) = (-1)^L arctan((1-x^2)^(N/2) / x^N).  At x = 0 the
    continuous limit is (-1)^L pi/2.
    """
    if abs(x) > 1:
        raise DomainError("|x| must be at most 1")
    N = 2 * L + 1
    s2 = max(0.0, 1 - x * x)
    if s2 == 0.0:
        return 0.0
    if x == 0.0:
        val = math.pi / 2
    else:
        val = _atan_signed_exp(math.copysign(1.0, x), 0.5 * N * math.log(s2) - N * math.log(abs(x)))
    return -val if L % 2 else val


def arctan_profile(L: int, x: float) -> float:
    """Sigmoid profile (-1)^L arctan(x^N / (1-x^2)^(N/2)).

    This is the complement of the rotation angle: for x > 0,
    arctan_logical_angle = (-1)^L pi/2 - arctan_profile.
    """
    if abs(x) > 1:
        raise DomainError("|x| must be at most 1")
    N = 2 * L + 1
    s2 = max(0.0, 1 - x * x)
    if x == 0.0:
        val = 0.0
    elif s2 == 0.0:
        val = math.copysign(math.pi / 2, x)
    else:
        val = _atan_signed_exp(math.copysign(1.0, x), N * math.log(abs(x)) - 0.5 * N * math.log(s2))
    return -val if L % 2 else val


def noise_level_to_field(level: float, omega: float, mapping: str = "direct") -> float:
    """Transverse Hamiltonian field for a nominal noise level such as 0.1.

    "direct" uses the level as the field itself.  "weak-noise" matches the
    single-step flip probability to the level, sqrt(level) * w / sin(w).
    """
    if level < 0:
        raise DomainError("noise level must be non-negative")
    if mapping == "direct":
        return float(level)
    if mapping == "weak-noise":
        return math.sqrt(level) * omega / math.sin(omega)
    raise DomainError(f"unknown noise mapping {mapping!r}")


def flip_probability_table(omega: float, gammas, multipliers):
    """Flip probabilities 1 - beta^2 for exp(-iM(wZ + g_k X)), as a (len(M), len(g)) array.

    Vectorised twin of ``flip_probability(decompose(...))`` for the simulators:
    1 - beta^2 = sin^2(M Omega) g^2 / Omega^2 with Omega = sqrt(w^2 + g^2).
    """
    g = np.asarray(gammas, dtype=float)[None, :]
    M = np.asarray(multipliers, dtype=float)[:, None]
    om2 = omega * omega + g * g
    with np.errstate(invalid="ignore", divide="ignore"):
        p = np.where(om2 > 0, np.sin(M * np.sqrt(om2)) ** 2 * (g * g) / om2, 0.0)
    return np.clip(p, 0.0, 1.0)
