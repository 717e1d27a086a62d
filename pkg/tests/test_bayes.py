import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eqsp import _fallback, bayes
from eqsp.bayes import ConfigError, NumericalDegeneracyError


def _random_batch(rng, n, kmax=400, vis=0.95):
    k = rng.integers(1, kmax, n).astype(np.int64)
    th = rng.uniform(0, 2 * math.pi, n)
    o = rng.choice([-1.0, 1.0], n)
    return k, vis * o * np.cos(th), vis * o * np.sin(th)


def _ghz_shots(rng, n, omega, nmax=50):
    ns = rng.integers(1, nmax + 1, n)
    p = 0.5 * (1 + np.cos(2 * ns * omega))
    out = np.where(rng.random(n) < p, 1.0, -1.0)
    return ns.astype(np.int64), out, np.zeros(n)


def test_init_uniform_sizes():
    assert bayes.init_uniform(16, 2 * math.pi).size == 65536
    assert bayes.init_uniform(4).size == 16
    g = bayes.init_uniform(20, 2 * math.pi)
    assert g.size == 1_048_576 and not g.log_weights.any()
    for m in (3, 25):
        with pytest.raises(ConfigError):
            bayes.init_uniform(m)


def test_constant_likelihood_is_a_noop():
    g = bayes.init_uniform(8)
    bayes.update(g, lambda w: np.full_like(w, 0.3))
    assert not g.log_weights.any()


def test_indicator_gives_delta_posterior():
    g = bayes.init_uniform(8)
    bayes.update(g, lambda w: (np.arange(len(w)) == 37).astype(float))
    assert bayes.map_index(g) == 37
    assert g.log_weights[37] == 0.0 and g.log_weights.min() == bayes.LOG_FLOOR
    assert bayes.map_estimate(g) == 37 * math.pi / 256


def test_all_zero_likelihood_raises():
    g = bayes.init_uniform(6)
    with pytest.raises(NumericalDegeneracyError, match="64 grid points"):
        bayes.update(g, lambda w: np.zeros_like(w))


def test_likelihood_range_checked():
    g = bayes.init_uniform(6)
    with pytest.raises(ValueError):
        bayes.update(g, lambda w: np.full_like(w, 1.5))
    with pytest.raises(ValueError):
        bayes.update_trig(g, [3], [0.9], [0.9])


def test_map_tie_break_is_lowest_index():
    assert bayes.map_estimate(bayes.init_uniform(10)) == 0.0


def test_symmetric_bimodal_takes_lower_mode():
    g = bayes.init_uniform(10, 2 * math.pi)
    j = np.arange(g.size)
    bayes.update(g, lambda w: ((j == 49) | (j == 49 + g.size // 2)).astype(float))
    assert bayes.map_index(g) == 49


def test_circular_error_examples():
    assert bayes.circular_error(0.1, 0.1, 2 * math.pi) == 0.0
    assert bayes.circular_error(0.05, 2 * math.pi - 0.05, 2 * math.pi) == pytest.approx(0.1)
    assert bayes.circular_error(0.3, 0.3 + math.pi, math.pi) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ValueError):
        bayes.circular_error(0.0, 0.0, 0.0)


@given(st.floats(-50, 50), st.floats(-50, 50), st.floats(0.01, 10))
def test_circular_error_range(a, b, p):
    e = bayes.circular_error(a, b, p)
    assert 0.0 <= e <= p / 2 + 1e-12


def test_converged_is_strict():
    g = bayes.init_uniform(8)
    bayes.update(g, lambda w: (np.arange(len(w)) == 0).astype(float))
    assert bayes.converged(g, 0.0, 0.01)
    assert not bayes.converged(g, 0.012, 0.01)
    assert bayes.converged(g, 0.0119, 0.01)
    with pytest.raises(ValueError):
        bayes.converged(g, 0.0, 0.0)


def test_kernel_matches_fallback():
    rng = np.random.default_rng(5)
    k, a, b = _random_batch(rng, 3000)
    C, S = bayes._trig_tables(1 << 12)
    w1 = np.zeros(1 << 12)
    w2 = np.zeros(1 << 12)
    bayes._apply_batch(w1, k, a, b, C, S)
    _fallback.apply_batch(w2, k, a, b, C, S)
    assert np.max(np.abs(w1 - w2)) < 1e-9
    assert bayes.KERNEL in ("cython", "numpy")


def test_kernel_handles_near_zero_factors():
    # visibility-1 shots drive many cells to the floor; both paths must agree there too
    rng = np.random.default_rng(9)
    k, a, b = _random_batch(rng, 500, vis=1.0)
    C, S = bayes._trig_tables(1 << 10)
    w1, w2 = np.zeros(1 << 10), np.zeros(1 << 10)
    bayes._apply_batch(w1, k, a, b, C, S)
    _fallback.apply_batch(w2, k, a, b, C, S)
    assert np.array_equal(w1 == bayes.LOG_FLOOR, w2 == bayes.LOG_FLOOR)
    live = w1 > -600
    assert np.max(np.abs(w1[live] - w2[live])) < 1e-9


def test_update_trig_matches_generic_update():
    rng = np.random.default_rng(6)
    k, a, b = _random_batch(rng, 40, kmax=60)
    g1 = bayes.init_uniform(10)
    g2 = bayes.init_uniform(10)
    bayes.update_trig(g1, k, a, b)
    for ki, ai, bi in zip(k, a, b):
        bayes.update(g2, lambda w: 0.5 * (1 + ai * np.cos(2 * ki * w) + bi * np.sin(2 * ki * w)))
    assert np.max(np.abs(g1.log_weights - g2.log_weights)) < 1e-9
    assert g1.log_weights.max() == 0.0


def test_sequential_equals_batch_argmax():
    rng = np.random.default_rng(7)
    k, a, b = _random_batch(rng, 500)
    seq = bayes.init_uniform(12)
    for i in range(500):
        bayes.update_trig(seq, k[i : i + 1], a[i : i + 1], b[i : i + 1])
        assert seq.log_weights.max() == 0.0
    batch = bayes.init_uniform(12)
    bayes.update_trig(batch, k, a, b)
    assert bayes.map_index(seq) == bayes.map_index(batch)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_permutation_invariance(seed):
    rng = np.random.default_rng(seed)
    k, a, b = _random_batch(rng, 200)
    perm = rng.permutation(200)
    g1, g2 = bayes.init_uniform(11), bayes.init_uniform(11)
    bayes.update_trig(g1, k, a, b)
    bayes.update_trig(g2, k[perm], a[perm], b[perm])
    assert bayes.map_index(g1) == bayes.map_index(g2)


def test_ghz_posterior_is_pi_periodic_on_full_circle():
    rng = np.random.default_rng(8)
    n, out, _ = _ghz_shots(rng, 300, 0.3)
    g = bayes.init_uniform(12, 2 * math.pi)
    # cos(2 n w) on a 2 pi grid is harmonic 2n
    bayes.update_trig(g, 2 * n, out, np.zeros_like(out))
    half = g.size // 2
    assert np.max(np.abs(g.log_weights[:half] - g.log_weights[half:])) < 1e-12


def test_bare_ghz_map_within_one_cell():
    rng = np.random.default_rng(10)
    n, out, b = _ghz_shots(rng, 200, 0.3)
    # 200 shots pin the phase to ~1e-3, so a 2^10 grid is the resolution limit
    g = bayes.init_uniform(10)
    bayes.update_trig(g, n, out, b)
    cell = math.pi / g.size
    assert bayes.circular_error(bayes.map_estimate(g), 0.3, math.pi) <= cell


class _GHZModel:
    def trig_params(self, rec):
        n, out = rec
        return n, float(out), 0.0


def test_mle_finalize():
    rng = np.random.default_rng(12)
    n, out, _ = _ghz_shots(rng, 50, 0.3, nmax=200)
    recs = list(zip(n.tolist(), out.tolist()))
    est = bayes.mle_finalize(recs, _GHZModel(), 16)
    assert bayes.circular_error(est, 0.3, math.pi) < 1e-3
    g = bayes.init_uniform(16)
    for r in recs:
        bayes.update_trig(g, [r[0]], [r[1]], [0.0])
    assert est == bayes.map_estimate(g)
    with pytest.raises(ValueError):
        bayes.mle_finalize([], _GHZModel(), 10)


def test_mle_single_record():
    est = bayes.mle_finalize([(1, 1.0)], _GHZModel(), 8)
    assert est == 0.0
    est = bayes.mle_finalize([(1, -1.0)], _GHZModel(), 8)
    assert est == pytest.approx(math.pi / 2)
