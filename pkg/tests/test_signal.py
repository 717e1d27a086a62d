import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from eqsp import signal
from eqsp.oracle import expm_2x2, X, Y, Z
from eqsp.signal import (
    ApproximationWarning,
    Category,
    CodeShape,
    DomainError,
    NoiseSpec,
    QubitHamiltonian,
    RotationDecomposition,
)

odd_n = st.integers(0, 20).map(lambda L: 2 * L + 1)


def test_code_shape():
    c = CodeShape(3, blocks=3)
    assert c.N == 7 and c.total_qubits == 21
    with pytest.raises(DomainError):
        CodeShape(-1)
    with pytest.raises(DomainError):
        CodeShape(1, blocks=0)


def test_noise_spec_validation():
    with pytest.raises(DomainError):
        NoiseSpec(sigma_eps=-0.1)
    with pytest.raises(DomainError):
        NoiseSpec(model="amplitude")


def test_decompose_pure_z():
    d = signal.decompose(QubitHamiltonian(0.3))
    assert d == RotationDecomposition(1.0, 0.3, 0.0)


def test_decompose_pure_x():
    d = signal.decompose(QubitHamiltonian(0.0, 0.4))
    assert d.beta == pytest.approx(abs(math.cos(0.4)), abs=1e-15)
    assert d.phi == 0.0 and d.upsilon == 0.0


def test_decompose_zero_field_is_identity():
    assert signal.decompose(QubitHamiltonian(0.0)) == RotationDecomposition(1.0, 0.0, 0.0)


def _fold(phi):
    return (phi + math.pi / 2) % math.pi - math.pi / 2 if phi != math.pi / 2 else phi


def test_decompose_matches_matrix_exponential():
    w, g, c = 0.3, 0.1, 0.05
    U = expm_2x2(w * Z + g * X + c * Y)
    d = signal.decompose(QubitHamiltonian(w, g, c))
    # the |0><0| entry is beta e^{-i phi} up to a sign
    assert abs(U[0, 0]) == pytest.approx(d.beta, abs=1e-12)
    assert _fold(-np.angle(U[0, 0])) == pytest.approx(d.phi, abs=1e-12)
    assert d.upsilon == pytest.approx(0.5 * math.atan2(c, g), abs=1e-15)


@given(
    st.floats(-3, 3, allow_nan=False),
    st.floats(-2, 2, allow_nan=False),
    st.floats(-2, 2, allow_nan=False),
)
def test_decompose_unitarity(w, g, c):
    d = signal.decompose(QubitHamiltonian(w, g, c))
    assert 0.0 <= d.beta <= 1.0
    assert -math.pi / 2 < d.phi <= math.pi / 2
    U = expm_2x2(w * Z + g * X + c * Y)
    assert abs(U[0, 0]) == pytest.approx(d.beta, abs=1e-12)
    assert d.beta**2 + signal.flip_probability(d) == pytest.approx(1.0, abs=1e-12)
    assert abs(U[0, 0]) ** 2 + abs(U[1, 0]) ** 2 == pytest.approx(1.0, abs=1e-12)


def test_phase_amplification_examples():
    assert signal.phase_amplification(7, 0.0) == 0.0
    assert signal.phase_amplification(3, math.pi / 4) == pytest.approx(-math.pi / 4, abs=1e-15)
    assert math.pi / 2 - signal.phase_amplification(5, math.pi / 3) <= 3 ** (-2.5)
    with pytest.raises(DomainError):
        signal.phase_amplification(3, math.pi / 2)
    with pytest.raises(DomainError):
        signal.phase_amplification(4, 0.1)


def test_phase_amplification_large_n_does_not_overflow():
    assert signal.phase_amplification(10001, 1.0) == pytest.approx(math.pi / 2)
    assert signal.phase_amplification(10001, 0.5) == 0.0


def test_derivative_examples():
    assert signal.phase_amplification_derivative(3, math.pi / 4) == pytest.approx(-3.0, rel=1e-14)
    assert signal.phase_amplification_derivative(5, 0.0) == 0.0
    h = 1e-6
    fd = (signal.phase_amplification(5, 0.6 + h) - signal.phase_amplification(5, 0.6 - h)) / (2 * h)
    assert fd == pytest.approx(signal.phase_amplification_derivative(5, 0.6), rel=1e-6)


@given(odd_n, st.floats(-1.5, 1.5))
def test_phase_amplification_is_odd(N, w):
    assert signal.phase_amplification(N, -w) == -signal.phase_amplification(N, w)


@given(odd_n, st.floats(0.01, 1.5))
def test_derivative_sign(N, w):
    L = (N - 1) // 2
    assert signal.phase_amplification_derivative(N, w) * (-1) ** L >= 0


@given(st.integers(1, 6), st.floats(1e-4, 1.0))
def test_small_angle_expansion(L, scale):
    N = 2 * L + 1
    w = scale / (2 * N)
    lead = (-1) ** L * w**N
    assert abs(signal.phase_amplification(N, w) - lead) <= 2 * N**2 * w**2 * abs(w) ** N


def test_syndrome_rotation_angle_examples():
    assert signal.syndrome_rotation_angle(3, 1, 0.37) == 0.37
    assert signal.syndrome_rotation_angle(5, 0, math.pi / 4) == pytest.approx(math.pi / 4, abs=1e-15)
    assert signal.syndrome_rotation_angle(7, 2, 0.2) == pytest.approx(math.atan(math.tan(0.2) ** 3), abs=1e-15)
    with pytest.raises(DomainError):
        signal.syndrome_rotation_angle(5, 3, 0.2)


def test_effective_axis_examples():
    assert signal.effective_axis(3, 1, 0.0) == 0.0
    assert signal.effective_axis(5, 0, 0.0) == pytest.approx(0.0, abs=1e-12)
    assert signal.effective_axis(5, 1, 0.1) == pytest.approx(0.3 + math.pi, abs=1e-12)


def test_parity_probabilities():
    assert signal.ghz_parity_prob(4, 0.0) == 1.0
    assert signal.ghz_parity_prob(3, 0.05, math.pi / 4 - 0.15) == pytest.approx(0.5)
    assert signal.marginalized_parity_prob(3, 0.2, 0.0) == pytest.approx(signal.ghz_parity_prob(3, 0.2))
    assert signal.marginalized_parity_prob(5, math.pi / 20, 0.3) == pytest.approx(0.5)


def test_marginalized_parity_matches_monte_carlo():
    N, w, s = 5, 0.1, 0.05
    rng = np.random.default_rng(11)
    S = rng.normal(0.0, math.sqrt(N) * s, 1_000_000)
    v = np.cos(N * w + S) ** 2
    se = v.std() / math.sqrt(len(v))
    want = 0.5 * (1 + math.cos(1.0) * math.exp(-0.025))
    assert signal.marginalized_parity_prob(N, w, s) == want
    assert abs(v.mean() - want) < 3 * se


@given(st.integers(1, 30), st.floats(0.0, 0.2), st.floats(0.001, 0.99))
def test_marginalized_parity_decreasing_and_concave(N, s, frac):
    w = frac * math.pi / (4 * N)
    h = 1e-4 * math.pi / (4 * N)
    f = lambda x: signal.marginalized_parity_prob(N, x, s)  # noqa: E731
    assert f(w + h) < f(w)
    assert f(w + h) - 2 * f(w) + f(w - h) < 0


def test_bitflip_likelihood_examples():
    assert signal.bitflip_shot_likelihood(3, 3, 4, math.pi / 2, 0.7) == pytest.approx(0.5)
    assert signal.bitflip_shot_likelihood(3, 0, 1, 0.0, 0.0) == 1.0
    p = signal.bitflip_shot_likelihood(5, 1, 2, 0.3, 0.2)
    assert signal.bitflip_shot_likelihood(5, 1, 2, 0.3, 0.2, outcome=-1) == pytest.approx(1 - p)
    with pytest.raises(DomainError):
        signal.bitflip_shot_likelihood(5, 6, 1, 0.0, 0.1)
    with pytest.raises(DomainError):
        signal.bitflip_shot_likelihood(5, 0, 0, 0.0, 0.1)


def test_flip_probability():
    assert signal.flip_probability(RotationDecomposition(1.0, 0.1, 0.0)) == 0.0
    assert signal.flip_probability(RotationDecomposition(0.0, 0.0, 0.0)) == 1.0
    p = signal.flip_probability(signal.decompose(QubitHamiltonian(0.3, 0.03)))
    lead = math.sin(0.3) ** 2 * 0.03**2 / 0.3**2
    assert abs(p - lead) < lead * (0.03 / 0.3) ** 2


def test_flip_table_matches_scalar_route():
    gs = [0.0, 0.01, 0.05, 0.2]
    tab = signal.flip_probability_table(0.3, gs, [1, 2, 7])
    for i, M in enumerate([1, 2, 7]):
        for j, g in enumerate(gs):
            d = signal.decompose(QubitHamiltonian(M * 0.3, M * g))
            assert tab[i, j] == pytest.approx(signal.flip_probability(d), abs=1e-14)


def test_hetero_expected_flip_prob():
    base = signal.hetero_expected_flip_prob(0.3, 0.03, 0.0)
    assert base == pytest.approx(8.733e-4, rel=1e-3)
    assert signal.hetero_expected_flip_prob(0.3, 0.03, 0.3) == pytest.approx(1.09 * base)
    with pytest.warns(ApproximationWarning):
        signal.hetero_expected_flip_prob(0.3, 0.1, 0.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        signal.hetero_expected_flip_prob(0.3, 0.03, 0.5)


def test_qsp_activation_examples():
    assert signal.qsp_activation(5, 0.0) == (0.0, 1.0)
    ang, p = signal.qsp_activation(3, math.pi / 4)
    assert ang == pytest.approx(-math.pi / 4) and p == pytest.approx(0.25)
    ang, p = signal.qsp_activation(5, 0.3)
    assert ang == pytest.approx(signal.phase_amplification(5, 0.3), abs=1e-15)
    assert p == pytest.approx(math.cos(0.3) ** 10 + math.sin(0.3) ** 10, abs=1e-15)


def test_qsp_success_window():
    # |x| outside the transition window keeps the success probability above 1 - delta
    N, delta = 7, 0.05
    lo = math.sqrt(1 - (1 - delta) ** (1 / N))
    hi = (1 - delta) ** (1 / (2 * N))
    for x in list(np.linspace(0, lo, 5)) + list(np.linspace(hi, 1, 5)):
        _, p = signal.qsp_activation(N, math.acos(x))
        assert p >= 1 - delta - 1e-12


def test_subset_phase_examples():
    assert signal.subset_phase([math.pi / 4] * 3, (0, 1, 2)) == pytest.approx(math.pi / 4)
    ws = [0.2, 0.3, 0.4]
    want = math.atan(math.tan(0.2) / math.tan(0.3) / math.tan(0.4))
    assert signal.subset_phase(ws, (0,)) == pytest.approx(want, abs=1e-12)
    with pytest.raises(DomainError):
        signal.subset_phase([0.2, math.pi / 2, 0.3], (0,))
    with pytest.raises(DomainError):
        signal.subset_phase([0.2, 0.3, 0.4], (5,))


def test_three_category():
    tau = 0.1
    assert signal.three_category(0.0, tau) is Category.MIDDLE
    assert signal.three_category(tau + 0.01, tau) is Category.HIGH
    assert signal.three_category(-tau - 0.01, tau) is Category.LOW
    assert signal.three_category(tau, tau) is Category.MIDDLE
    with pytest.raises(DomainError):
        signal.three_category(0.0, math.pi / 4)


@pytest.mark.parametrize("k", [1.0, 2.0, 3.0])
def test_three_category_reliability(k):
    tau, sigma = 0.1, 0.02
    w = tau + k * sigma
    rng = np.random.default_rng(int(k))
    samples = w + sigma * rng.standard_normal(100_000)
    middle = np.mean([signal.three_category(float(s), tau) is Category.MIDDLE for s in samples[:20000]])
    assert middle <= 0.5 * math.exp(-k * k / 2)


def test_kl_half_vs_p():
    assert signal.kl_half_vs_p(0.5) == 0.0
    assert signal.kl_half_vs_p(0.0) == math.inf
    pointwise = 0.5 * math.log(0.5 / 0.75) + 0.5 * math.log(0.5 / 0.25)
    assert signal.kl_half_vs_p(0.75) == pytest.approx(pointwise, abs=1e-15)
    assert signal.kl_half_vs_p(0.75) == pytest.approx(0.1438, abs=1e-4)
    e = 1e-3
    assert signal.kl_half_vs_p(0.5 + e) == pytest.approx(2 * e * e, rel=1e-5)


def test_arctan_projection_prob():
    assert signal.arctan_projection_prob(2, 1.0) == 1.0
    assert signal.arctan_projection_prob(1, 0.0) == 1.0
    x = 1 / math.sqrt(2)
    assert signal.arctan_projection_prob(1, x) == pytest.approx(2 * 0.5**3)
    with pytest.raises(DomainError):
        signal.arctan_projection_prob(1, 1.2)


@given(st.integers(0, 6), st.floats(0.01, 0.99))
def test_arctan_angle_and_profile_are_complements(L, x):
    a = signal.arctan_logical_angle(L, x)
    p = signal.arctan_profile(L, x)
    assert a == pytest.approx((-1) ** L * math.pi / 2 - p, abs=1e-12)
    assert a == pytest.approx(signal.phase_amplification(2 * L + 1, math.acos(x)), abs=1e-12)


def test_arctan_angle_endpoints():
    assert signal.arctan_logical_angle(1, 0.0) == pytest.approx(-math.pi / 2)
    assert signal.arctan_logical_angle(2, 0.0) == pytest.approx(math.pi / 2)
    assert signal.arctan_logical_angle(3, 1.0) == 0.0


def test_noise_level_to_field():
    assert signal.noise_level_to_field(0.1, 0.3) == 0.1
    g = signal.noise_level_to_field(0.1, 0.3, "weak-noise")
    assert math.sin(0.3) ** 2 * g**2 / 0.3**2 == pytest.approx(0.1)
    with pytest.raises(DomainError):
        signal.noise_level_to_field(-0.1, 0.3)
    with pytest.raises(DomainError):
        signal.noise_level_to_field(0.1, 0.3, "strong")
