"""Dense statevector reference simulator for small codes.

Brute force on purpose: every quantity is obtained from explicit 2^N
amplitude vectors and 2x2 matrices, never from the closed forms in
``eqsp.signal``.  Capacity is capped at 14 qubits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .signal import CodeShape, DomainError

MAX_QUBITS = 14

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)


class CapacityError(ValueError):
    pass


@dataclass
class DenseState:
    amplitudes: np.ndarray
    qubit_count: int

    def __post_init__(self):
        if self.qubit_count > MAX_QUBITS:
            raise CapacityError(f"at most {MAX_QUBITS} qubits")
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (2**self.qubit_count,):
            raise ValueError("amplitude vector has the wrong length")

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True)
class SubsetAmplitude:
    subset: tuple
    amplitude: complex
    probability: float


def basis_state(N: int, index: int = 0) -> DenseState:
    a = np.zeros(2**N, dtype=complex)
    a[index] = 1.0
    return DenseState(a, N)


def code_state(N: int, a0: complex, a1: complex) -> DenseState:
    """a0|0...0> + a1|1...1> (normalised)."""
    v = np.zeros(2**N, dtype=complex)
    v[0], v[-1] = a0, a1
    v /= np.linalg.norm(v)
    return DenseState(v, N)


def ghz_state(N: int) -> DenseState:
    return code_state(N, 1.0, 1.0)


def expm_2x2(H: np.ndarray) -> np.ndarray:
    """exp(-iH) for a Hermitian 2x2 matrix, by eigendecomposition."""
    w, V = np.linalg.eigh(H)
    return (V * np.exp(-1j * w)) @ V.conj().T


def field_unitary(omega: float, gamma: float = 0.0, chi: float = 0.0) -> np.ndarray:
    return expm_2x2(omega * Z + gamma * X + chi * Y)


def _check_unitary(U: np.ndarray) -> None:
    if U.shape != (2, 2) or not np.allclose(U.conj().T @ U, I2, atol=1e-12, rtol=0):
        raise ValueError("single-qubit operator is not unitary")


def apply_local(state: DenseState, ops) -> DenseState:
    """Apply one 2x2 matrix per qubit (qubit 0 is the most significant bit)."""
    N = state.qubit_count
    if len(ops) != N:
        raise ValueError("need one operator per qubit")
    psi = state.amplitudes.reshape((2,) * N)
    for k, U in enumerate(ops):
        psi = np.moveaxis(np.tensordot(U, psi, axes=([1], [k])), 0, k)
    return DenseState(psi.reshape(-1), N)


def evolve_product(state: DenseState, unitaries) -> DenseState:
    for U in unitaries:
        _check_unitary(np.asarray(U, dtype=complex))
    out = apply_local(state, [np.asarray(U, dtype=complex) for U in unitaries])
    if abs(out.norm() - 1.0) > 1e-10:
        raise AssertionError("norm drifted")
    return out


def subset_decomposition(omega_list) -> list[SubsetAmplitude]:
    """Expand prod_k exp(-i w_k Z_k) |GHZ> into Z-string terms.

    Term S is (prod_{k not in S} cos w_k I)(prod_{k in S} -i sin w_k Z_k) applied
    to GHZ.  The GHZ support is just |0..0> and |1..1>, so each term is read off
    from the diagonal entries of its 2x2 factors.  The returned amplitude is the
    coefficient along (|0..0> + (-1)^|S| |1..1>)/sqrt(2).
    """
    N = len(omega_list)
    if N > MAX_QUBITS:
        raise CapacityError(f"at most {MAX_QUBITS} qubits")
    id_part = [math.cos(w) * I2 for w in omega_list]
    z_part = [-1j * math.sin(w) * Z for w in omega_list]
    out = []
    for mask in range(2**N):
        S = tuple(k for k in range(N) if mask >> (N - 1 - k) & 1)
        f = [z_part[k] if k in S else id_part[k] for k in range(N)]
        amp0 = np.prod([m[0, 0] for m in f]) / math.sqrt(2)
        amp1 = np.prod([m[1, 1] for m in f]) / math.sqrt(2)
        ref1 = (-1) ** len(S)
        # amp1 should equal ref1 * amp0; project onto the normalised target
        coef = (amp0 + ref1 * amp1) / math.sqrt(2)
        out.append(SubsetAmplitude(S, complex(coef), float(abs(coef) ** 2)))
    return out


def subset_term_state(omega_list, subset) -> np.ndarray:
    """Dense vector of one expansion term, for summing back to the evolved state."""
    N = len(omega_list)
    ops = [(-1j * math.sin(w) * Z) if k in subset else math.cos(w) * I2 for k, w in enumerate(omega_list)]
    return apply_local(ghz_state(N), ops).amplitudes


def parity_prob_exact(state: DenseState) -> float:
    """Probability of +1 for the all-X parity operator."""
    a = state.amplitudes
    flipped = a[::-1]  # index i -> i XOR (2^N - 1)
    expval = float(np.real(np.vdot(a, flipped)))
    return 0.5 * (1.0 + expval)


def _bits(index: int, N: int) -> np.ndarray:
    return np.array([(index >> (N - 1 - k)) & 1 for k in range(N)], dtype=np.int8)


def _syndrome_table(N: int) -> np.ndarray:
    idx = np.arange(2**N)
    bits = (idx[:, None] >> (N - 1 - np.arange(N))[None, :]) & 1
    return bits[:, :-1] ^ bits[:, 1:]


def decode_syndrome(syndrome) -> np.ndarray:
    """Minimum-weight X error pattern consistent with Z_i Z_{i+1} outcomes."""
    s = np.asarray(syndrome, dtype=np.int8)
    e = np.concatenate([[0], np.cumsum(s) % 2]).astype(np.int8)
    if 2 * e.sum() > len(e):
        e = 1 - e
    return e


def syndrome_outcomes(state: DenseState, code: CodeShape):
    """Enumerate stabilizer outcomes as (syndrome, j, corrected post_state, prob)."""
    N = state.qubit_count
    if N != code.N:
        raise ValueError("state size does not match the code")
    table = _syndrome_table(N)
    keys = table @ (1 << np.arange(N - 2, -1, -1)) if N > 1 else np.zeros(2**N, dtype=int)
    out = []
    for key in np.unique(keys):
        mask = keys == key
        proj = np.where(mask, state.amplitudes, 0)
        p = float(np.sum(np.abs(proj) ** 2))
        if p < 1e-300:
            continue
        syn = table[np.argmax(mask)]
        e = decode_syndrome(syn)
        post = DenseState(proj / math.sqrt(p), N)
        post = apply_local(post, [X if b else I2 for b in e])
        out.append((tuple(int(b) for b in syn), int(e.sum()), post, p))
    return out


def syndrome_project(state: DenseState, code: CodeShape, rng=None):
    """Sample one stabilizer outcome; returns (j, corrected post_state, prob)."""
    outs = syndrome_outcomes(state, code)
    probs = np.array([o[3] for o in outs])
    if rng is None:
        i = int(np.argmax(probs))
    else:
        i = int(rng.choice(len(outs), p=probs / probs.sum()))
    _, j, post, p = outs[i]
    return j, post, p


def weight_distribution(state: DenseState, code: CodeShape) -> dict[int, float]:
    dist: dict[int, float] = {}
    for _, j, _, p in syndrome_outcomes(state, code):
        dist[j] = dist.get(j, 0.0) + p
    return dist


def signal_rotation(phi: float, vartheta: float) -> np.ndarray:
    """cos(phi) I - i sin(phi) (cos(vartheta) X + sin(vartheta) Y)."""
    R = math.cos(vartheta) * X + math.sin(vartheta) * Y
    return math.cos(phi) * I2 - 1j * math.sin(phi) * R


def logical_operator(N: int, physical: np.ndarray, syndrome) -> np.ndarray:
    """2x2 logical map for a fixed syndrome after minimum-weight correction.

    Entry [a, b] is <a_L| C P_s U^{(x)N} |b_L>, where P_s projects on the
    syndrome and C is the decoder's X correction.  Not normalised.
    """
    code = CodeShape((N - 1) // 2)
    V = np.zeros((2, 2), dtype=complex)
    for b in (0, 1):
        inp = code_state(N, 1.0 - b, float(b))
        out = apply_local(inp, [physical] * N)
        for syn, _, post, p in syndrome_outcomes(out, code):
            if syn == tuple(syndrome):
                vec = post.amplitudes * math.sqrt(p)
                V[0, b], V[1, b] = vec[0], vec[-1]
    return V


def su2_rotation_params(V: np.ndarray):
    """Write V ~ (cos T I - i sin T R(axis)) diag(e^{i a}, e^{-i a}) up to global phase.

    Returns (T, axis, a) with T in [0, pi/2], axis in [0, 2pi).
    """
    det = np.linalg.det(V)
    U = V / np.sqrt(det)
    T = math.atan2(abs(U[0, 1]), abs(U[0, 0]))
    a = float(np.angle(U[0, 0])) if abs(U[0, 0]) > 1e-14 else 0.0
    if abs(U[0, 1]) > 1e-14:
        # U01 = -i sin T e^{-i axis} e^{-i a}
        axis = float(-np.angle(1j * U[0, 1] * np.exp(1j * a)))
    else:
        axis = 0.0
    return T, axis % (2 * math.pi), a


def trace_fidelity(A: np.ndarray, B: np.ndarray) -> float:
    """|tr(A^dag B)| / 2 for SU(2)-normalised inputs; 1 means equal up to phase."""
    A = A / np.sqrt(np.linalg.det(A))
    B = B / np.sqrt(np.linalg.det(B))
    return float(abs(np.trace(A.conj().T @ B)) / 2)


def syndrome_rotation_exact(N: int, phi: float, vartheta: float) -> dict:
    """Map decoded weight j -> (Theta_j, vartheta_eff, frame) from enumeration.

    For every j a representative syndrome (errors on the first j qubits) is
    used; the logical operator is split into a rotation about an XY axis and
    a residual Z frame rotation diag(e^{i frame}, e^{-i frame}).
    """
    if N > 9:
        raise CapacityError("syndrome enumeration limited to N <= 9")
    L = (N - 1) // 2
    U = signal_rotation(phi, vartheta)
    res = {}
    for j in range(L + 1):
        e = np.array([1] * j + [0] * (N - j), dtype=np.int8)
        syn = tuple(int(b) for b in (e[:-1] ^ e[1:]))
        V = logical_operator(N, U, syn)
        res[j] = su2_rotation_params(V)
    return res


def arctan_protocol_exact(L: int, x: float) -> tuple[float, float]:
    """Rotate each qubit of |0_L> by exp(-i X arccos x), project on the code space.

    Returns (projection_prob, logical_angle), where the angle psi is defined by
    the projected logical state being exp(-i psi X_L)|0_L>, reduced mod pi into
    (-pi/2, pi/2].
    """
    if abs(x) > 1:
        raise DomainError("|x| must be at most 1")
    N = 2 * L + 1
    if N > MAX_QUBITS:
        raise CapacityError(f"at most {MAX_QUBITS} qubits")
    return _project_x_rotated(N, math.acos(max(-1.0, min(1.0, x))))


def qsp_activation_exact(N: int, phi: float) -> tuple[float, float]:
    """Apply exp(-i phi X) to every qubit of |0_L>, post-select the code space."""
    prob, psi = _project_x_rotated(N, phi)
    return psi, prob


def _project_x_rotated(N: int, phi: float) -> tuple[float, float]:
    # exp(-i psi X)|0> = cos psi |0> - i sin psi |1>; strip the global phase first
    Ux = expm_2x2(phi * X)
    out = apply_local(basis_state(N, 0), [Ux] * N)
    c0, c1 = out.amplitudes[0], out.amplitudes[-1]
    prob = float(abs(c0) ** 2 + abs(c1) ** 2)
    ref = c0 if abs(c0) > 1e-300 else -1j * c1
    ph = ref / abs(ref)
    psi = math.atan2(float(np.real(1j * c1 / ph)), float(np.real(c0 / ph)))
    if psi > math.pi / 2:
        psi -= math.pi
    elif psi <= -math.pi / 2:
        psi += math.pi
    return prob, psi


def ghz_parity_exact(omegas, offsets=None) -> float:
    """Parity probability of a GHZ state after per-qubit exp(-i (w_k + s_k) Z)."""
    N = len(omegas)
    offsets = np.zeros(N) if offsets is None else np.asarray(offsets)
    ops = [field_unitary(w + s) for w, s in zip(omegas, offsets)]
    return parity_prob_exact(evolve_product(ghz_state(N), ops))


def bitflip_logical_prob_exact(N: int, d: int, M: int, theta: float, phi: float) -> float:
    """P(+1) of logical X after M Z-evolutions with d flipped qubits and a Z_L rotation.

    Flipped qubits carry no signal phase in this idealised picture (their
    evolution is replaced by identity), the remaining N-d qubits each get
    exp(-i M phi Z).  Then exp(+i theta Z_L / 2) is applied by rotating qubit 0,
    and logical X = X^{(x)N} is measured.
    """
    ops = [field_unitary(M * phi) if k >= d else I2 for k in range(N)]
    st = apply_local(code_state(N, 1.0, 1.0), ops)
    st = apply_local(st, [expm_2x2(-theta / 2 * Z)] + [I2] * (N - 1))
    return parity_prob_exact(st)
