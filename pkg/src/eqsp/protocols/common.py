"""Configuration, ledger and result types shared by all protocols."""

from __future__ import annotations

import csv
import hashlib
import io
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ..signal import CodeShape, DomainError, NoiseSpec

PROTOCOLS = (
    "bare_ghz",
    "bitflip",
    "combined",
    "binary_search_ghz",
    "binary_search_code",
    "sequential",
    "sql_baseline",
    "sql_barrier_probe",
)
MODES = ("post_selection", "full_likelihood")

# experiments drawn per RNG block; fixes which random numbers experiment i sees
CHUNK = 256
MAX_PROBE = 16384
MIN_PROBE = 10

_PROTOCOL_TAG = {name: i + 1 for i, name in enumerate(PROTOCOLS)}
_DEVICE_TAG = 0xDE71CE


def stream(seed: int, *keys: int) -> np.random.Generator:
    """Counter-based generator keyed on (seed, *keys)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed) & (2**64 - 1), *keys])))


def device_stream(seed: int) -> np.random.Generator:
    return stream(seed, _DEVICE_TAG)


def eps_key(eps: float) -> int:
    """Bit pattern of eps; keys a target's stream independently of its grid position."""
    return int(np.float64(eps).view(np.uint64))


def target_stream(seed: int, protocol: str, eps: float, block: int) -> np.random.Generator:
    return stream(seed, _PROTOCOL_TAG[protocol], eps_key(eps), block)


@dataclass(frozen=True)
class RunConfig:
    protocol: str
    seed: int = 2
    omega_true: float = 0.3
    eps_targets: tuple = (0.01,)
    budget_K: int = 10_000
    mode: str = "post_selection"
    code: CodeShape = CodeShape(1)
    noise: NoiseSpec = NoiseSpec()
    grid_bits: int = 14
    # protocol-specific extensions
    delta: float = 0.05
    probe_size: int = 15
    interval: tuple | None = None
    sql_qubits: int = 10_000
    trials: int = 1_000
    shots: int = 1_000_000
    keep_ledger: bool = False

    def __post_init__(self):
        if self.protocol not in PROTOCOLS:
            raise DomainError(f"unknown protocol {self.protocol!r}")
        if self.mode not in MODES:
            raise DomainError(f"unknown mode {self.mode!r}")
        eps = tuple(float(e) for e in self.eps_targets)
        if not eps or any(not e > 0 for e in eps):
            raise DomainError("eps_targets must be positive")
        if any(a < b for a, b in zip(eps, eps[1:])):
            raise DomainError("eps_targets must be sorted in descending order")
        object.__setattr__(self, "eps_targets", eps)
        if self.budget_K < 1:
            raise DomainError("budget_K must be at least 1")
        if not 0 < self.delta < 1:
            raise DomainError("delta must lie in (0, 1)")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["eps_targets"] = list(self.eps_targets)
        return d


@dataclass(frozen=True)
class ShotRecord:
    index: int
    multiplier: int
    theta: float
    syndrome_d: tuple
    outcome: int
    accepted: bool
    cost: int


class Ledger:
    """Column store of shot records; cheap to append in blocks."""

    COLUMNS = ("index", "multiplier", "theta", "d0", "d1", "d2", "outcome", "accepted", "cost")

    def __init__(self, blocks: int = 1):
        self.blocks = blocks
        self._parts: list[dict] = []

    def append(self, index, multiplier, theta, d, outcome, accepted, cost):
        d = np.asarray(d).reshape(len(index), -1)
        self._parts.append(
            dict(
                index=np.asarray(index),
                multiplier=np.asarray(multiplier),
                theta=np.asarray(theta, dtype=float),
                d=d,
                outcome=np.asarray(outcome),
                accepted=np.asarray(accepted, dtype=bool),
                cost=np.asarray(cost),
            )
        )

    def _cat(self, key):
        if not self._parts:
            return np.zeros((0, self.blocks), dtype=int) if key == "d" else np.zeros(0)
        return np.concatenate([p[key] for p in self._parts])

    def truncate(self, n: int) -> None:
        """Keep only the first n records."""
        cols = {k: self._cat(k)[:n] for k in ("index", "multiplier", "theta", "d", "outcome", "accepted", "cost")}
        self._parts = [cols] if n else []

    def __len__(self) -> int:
        return sum(len(p["index"]) for p in self._parts)

    def records(self) -> list[ShotRecord]:
        cols = {k: self._cat(k) for k in ("index", "multiplier", "theta", "d", "outcome", "accepted", "cost")}
        return [
            ShotRecord(
                int(cols["index"][i]),
                int(cols["multiplier"][i]),
                float(cols["theta"][i]),
                tuple(int(x) for x in cols["d"][i]),
                int(cols["outcome"][i]),
                bool(cols["accepted"][i]),
                int(cols["cost"][i]),
            )
            for i in range(len(cols["index"]))
        ]

    def total_cost(self) -> int:
        return int(self._cat("cost").sum())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.COLUMNS)
        for r in self.records():
            d = list(r.syndrome_d) + [""] * (3 - len(r.syndrome_d))
            w.writerow([r.index, r.multiplier, repr(r.theta), *d, r.outcome, int(r.accepted), r.cost])
        return buf.getvalue()


@dataclass
class TargetResult:
    eps: float
    converged: bool
    total_cost: int
    experiments_used: int
    estimate: float
    circ_error: float
    acceptance_rate: float
    ledger: Ledger | None = field(default=None, repr=False, compare=False)


@dataclass
class RunResult:
    config: RunConfig
    targets: list = field(default_factory=list)

    def digest(self) -> str:
        h = hashlib.sha256()
        for t in self.targets:
            h.update(
                f"{t.eps!r},{t.converged},{t.total_cost},{t.experiments_used},"
                f"{t.estimate!r},{t.circ_error!r},{t.acceptance_rate!r};".encode()
            )
        return h.hexdigest()


def probe_limit(eps: float) -> int:
    return int(min(MAX_PROBE, max(MIN_PROBE, math.floor(1 / eps))))


def multiplier_limit(eps: float, qubits: int, grid_bits: int) -> int:
    """Largest time multiplier: floor(1/eps)/qubits, capped against grid aliasing."""
    m = math.floor(1 / eps) // qubits
    cap = (1 << (grid_bits - 2)) // qubits
    return int(max(1, min(m, cap)))
