"""Rejection sampling that turns syndrome-shifted evolution times into uniform ones."""

from __future__ import annotations

import logging
from typing import Callable, Sequence

from ..signal import DomainError
from .common import ShotRecord

log = logging.getLogger(__name__)


def effective_time(record: ShotRecord) -> int:
    """Intended time minus the detected error count."""
    return record.multiplier - sum(record.syndrome_d)


def rejection_filter(
    records: Sequence[ShotRecord],
    d_max: int,
    P_min: float,
    prob_d: Callable[[int, int], float],
    rng,
) -> list[ShotRecord]:
    """Keep record i with probability P_min / (Pr(d_i | t_i) (d_max + 1)) if d_i <= d_max.

    prob_d(d, t) is the syndrome-weight distribution at intended time t.  With
    P_min <= min_d Pr(d)(d_max + 1) the accepted effective times are uniform on
    the interior of their range.
    """
    if not 0 < P_min <= 1:
        raise DomainError("P_min must lie in (0, 1]")
    if d_max < 0:
        raise DomainError("d_max must be non-negative")
    kept = []
    clipped = 0
    u = rng.random(len(records))
    for r, x in zip(records, u):
        d = sum(r.syndrome_d)
        if d > d_max:
            continue
        pd = prob_d(d, r.multiplier)
        if pd <= 0:
            log.warning("record %d: Pr(d=%d | t=%d) = 0, skipped", r.index, d, r.multiplier)
            continue
        acc = P_min / (pd * (d_max + 1))
        if acc > 1:
            clipped += 1
            acc = 1.0
        if x < acc:
            kept.append(r)
    if clipped:
        log.warning("%d records had acceptance above 1 (P_min too large); uniformity is not guaranteed", clipped)
    return kept
