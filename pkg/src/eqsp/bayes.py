"""Log-space Bayesian posterior on a uniform periodic phase grid.

Most likelihoods in this package have the form

    P(outcome | w) = (1 + a cos(2 pi k w / P) + b sin(2 pi k w / P)) / 2

with an integer harmonic k and P the grid period.  On a 2^m grid those are
table lookups, which is what the compiled kernel exploits.  Arbitrary
likelihood callables are supported through ``update``.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Callable, Iterable, Protocol, Sequence

import numpy as np

from . import _fallback

if os.environ.get("EQSP_PURE", "") not in ("", "0"):
    _apply_batch = _fallback.apply_batch
    KERNEL = "numpy"
else:
    try:
        from ._kernels import apply_batch as _apply_batch

        KERNEL = "cython"
    except ImportError:  # extension not built
        _apply_batch = _fallback.apply_batch
        KERNEL = "numpy"

LOG_FLOOR = -745.0
MIN_BITS, MAX_BITS = 4, 24

_tables: dict[int, tuple[np.ndarray, np.ndarray]] = {}


class ConfigError(ValueError):
    pass


class NumericalDegeneracyError(ArithmeticError):
    pass


def _trig_tables(G: int):
    if G not in _tables:
        t = 2 * np.pi * np.arange(G) / G
        _tables[G] = (np.cos(t), np.sin(t))
    return _tables[G]


@dataclass
class PosteriorGrid:
    bits: int
    period: float
    log_weights: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return 1 << self.bits

    def points(self) -> np.ndarray:
        return np.arange(self.size) * (self.period / self.size)

    def copy(self) -> "PosteriorGrid":
        return PosteriorGrid(self.bits, self.period, self.log_weights.copy())

    def probabilities(self) -> np.ndarray:
        w = np.exp(self.log_weights)
        return w / w.sum()


def init_uniform(m: int, period: float = math.pi) -> PosteriorGrid:
    if not MIN_BITS <= m <= MAX_BITS:
        raise ConfigError(f"grid bits must lie in [{MIN_BITS}, {MAX_BITS}], got {m}")
    if not period > 0:
        raise ConfigError("period must be positive")
    return PosteriorGrid(m, float(period), np.zeros(1 << m))


def update(grid: PosteriorGrid, likelihood: Callable[[np.ndarray], np.ndarray]) -> PosteriorGrid:
    """Multiply the posterior by likelihood(grid points), in place."""
    lik = np.asarray(likelihood(grid.points()), dtype=float)
    if lik.shape != (grid.size,):
        lik = np.broadcast_to(lik, (grid.size,))
    if np.any(lik < 0) or np.any(lik > 1 + 1e-12) or np.any(np.isnan(lik)):
        raise ValueError("likelihood values must lie in [0, 1]")
    if not np.any(lik > 0):
        raise NumericalDegeneracyError(
            f"likelihood vanishes on all {grid.size} grid points (period {grid.period})"
        )
    with np.errstate(divide="ignore"):
        lw = grid.log_weights + np.log(lik)
    np.maximum(lw, LOG_FLOOR, out=lw)
    lw -= lw.max()
    np.maximum(lw, LOG_FLOOR, out=lw)
    grid.log_weights = lw
    return grid


def update_trig(grid: PosteriorGrid, harmonics, a, b) -> PosteriorGrid:
    """Batch update with (1 + a cos(2 pi k w/P) + b sin(2 pi k w/P)) / 2 factors."""
    k = np.ascontiguousarray(harmonics, dtype=np.int64)
    a = np.ascontiguousarray(a, dtype=float)
    b = np.ascontiguousarray(b, dtype=float)
    if k.size == 0:
        return grid
    if np.any(a * a + b * b > 1 + 1e-12):
        raise ValueError("trigonometric likelihood coefficients exceed unit visibility")
    ctab, stab = _trig_tables(grid.size)
    _apply_batch(grid.log_weights, k, a, b, ctab, stab)
    return grid


def map_index(grid: PosteriorGrid) -> int:
    return int(np.argmax(grid.log_weights))


def map_estimate(grid: PosteriorGrid) -> float:
    """Grid point with the largest weight; ties go to the lowest index."""
    return map_index(grid) * grid.period / grid.size


def circular_error(a: float, b: float, period: float) -> float:
    if not period > 0:
        raise ValueError("period must be positive")
    r = math.fmod(a - b, period)
    r = abs(r)
    return min(r, period - r)


def converged(grid: PosteriorGrid, omega_true: float, eps: float, period: float | None = None) -> bool:
    if not eps > 0:
        raise ValueError("eps must be positive")
    p = grid.period if period is None else period
    return circular_error(map_estimate(grid), omega_true, p) < 1.2 * eps


class TrigModel(Protocol):
    def trig_params(self, record) -> tuple[int, float, float]: ...


def batch_params(records: Sequence, model: TrigModel):
    rows = [model.trig_params(r) for r in records]
    k = np.array([r[0] for r in rows], dtype=np.int64)
    a = np.array([r[1] for r in rows], dtype=float)
    b = np.array([r[2] for r in rows], dtype=float)
    return k, a, b


def mle_finalize(records: Iterable, model: TrigModel, m: int, period: float = math.pi) -> float:
    """Argmax over the grid of the product likelihood of all records."""
    records = list(records)
    if not records:
        raise ValueError("need at least one record")
    grid = init_uniform(m, period)
    update_trig(grid, *batch_params(records, model))
    return map_estimate(grid)
