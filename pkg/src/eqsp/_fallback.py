"""Pure numpy version of the compiled grid update, same contract as _kernels."""

import numpy as np

LOG_FLOOR = -745.0
_TINY = 1e-290
_BATCH = 8


def apply_batch(logw, freq, a, b, ctab, stab):
    G = logw.shape[0]
    if G & (G - 1):
        raise ValueError("grid size must be a power of two")
    if ctab.shape[0] != G or stab.shape[0] != G:
        raise ValueError("table size mismatch")
    mask = G - 1
    j = np.arange(G, dtype=np.int64)
    acc = logw.copy()
    for i0 in range(0, len(freq), _BATCH):
        sl = slice(i0, min(i0 + _BATCH, len(freq)))
        idx = (freq[sl, None] * j[None, :]) & mask
        terms = 0.5 * (1.0 + a[sl, None] * ctab[idx] + b[sl, None] * stab[idx])
        p = np.ones(G)
        for row in terms:
            p *= row
        ok = p > _TINY
        with np.errstate(divide="ignore"):
            acc[ok] += np.log(p[ok])
            if not ok.all():
                lt = np.log(np.where(terms[:, ~ok] > 0.0, terms[:, ~ok], 1.0))
                lt[terms[:, ~ok] <= 0.0] = LOG_FLOOR
                acc[~ok] += lt.sum(axis=0)
    np.maximum(acc, LOG_FLOOR, out=acc)
    best = acc.max()
    acc -= best
    np.maximum(acc, LOG_FLOOR, out=acc)
    logw[:] = acc
    return best
