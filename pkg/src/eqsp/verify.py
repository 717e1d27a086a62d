"""Closed-form vs statevector checks and invariant batteries, grouped into suites."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import oracle, signal
from .fisher import classical_fi_binary, sql_barrier_total

TOL = 1e-9


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    passed: bool
    detail: str = ""


def _mod_pi_gap(a: float, b: float) -> float:
    d = (a - b) % math.pi
    return min(d, math.pi - d)


def subset_deviation(ws) -> float:
    """Oracle subset probabilities vs prod sin^2 prod cos^2, and the tangent ratio angle."""
    N = len(ws)
    terms = {t.subset: t.probability for t in oracle.subset_decomposition(ws)}
    sin2, cos2 = np.sin(ws) ** 2, np.cos(ws) ** 2
    worst = 0.0
    for S, p in terms.items():
        inS = np.zeros(N, dtype=bool)
        inS[list(S)] = True
        worst = max(worst, abs(p - float(np.prod(np.where(inS, sin2, cos2)))))
        comp = tuple(k for k in range(N) if k not in S)
        ratio_angle = math.atan2(math.sqrt(p), math.sqrt(terms[comp]))
        worst = max(worst, abs(ratio_angle - abs(signal.subset_phase(ws, S))))
    return worst


def oracle_suite(draws: int = 25, seed: int = 7) -> list[Check]:
    """Analytic formulas against dense simulation for N in {3, 5, 7}."""
    rng = np.random.default_rng(seed)
    out = []
    for N in (3, 5, 7):
        L = (N - 1) // 2
        worst = dict(subset=0.0, parity=0.0, theta=0.0, axis=0.0, qsp=0.0, arctan=0.0, likelihood=0.0)
        for _ in range(draws):
            ws = rng.uniform(0.05, 1.5, N)
            worst["subset"] = max(worst["subset"], subset_deviation(ws))
            w = rng.uniform(-1.5, 1.5)
            worst["parity"] = max(worst["parity"], abs(oracle.ghz_parity_exact([w] * N) - signal.ghz_parity_prob(N, w)))
            phi, vt = rng.uniform(0.05, 1.5), rng.uniform(0, 2 * math.pi)
            for j, (T, axis, _) in oracle.syndrome_rotation_exact(N, phi, vt).items():
                th = signal.syndrome_rotation_angle(N, j, phi)
                worst["theta"] = max(worst["theta"], abs(T - abs(th)))
                ax = signal.effective_axis(N, j, vt) + (math.pi if th < 0 else 0.0)
                if T > 1e-6:
                    d = (axis - ax) % (2 * math.pi)
                    worst["axis"] = max(worst["axis"], min(d, 2 * math.pi - d))
            ang, prob = signal.qsp_activation(N, phi)
            ang_o, prob_o = oracle.qsp_activation_exact(N, phi)
            worst["qsp"] = max(worst["qsp"], _mod_pi_gap(ang, ang_o), abs(prob - prob_o))
            x = rng.uniform(-1, 1)
            p_o, psi_o = oracle.arctan_protocol_exact(L, x)
            worst["arctan"] = max(
                worst["arctan"],
                abs(p_o - signal.arctan_projection_prob(L, x)),
                _mod_pi_gap(psi_o, signal.arctan_logical_angle(L, x)),
            )
            d, M, th = int(rng.integers(0, N + 1)), int(rng.integers(1, 6)), rng.uniform(0, 2 * math.pi)
            worst["likelihood"] = max(
                worst["likelihood"],
                abs(oracle.bitflip_logical_prob_exact(N, d, M, th, phi) - signal.bitflip_shot_likelihood(N, d, M, th, phi)),
            )
        for k, v in worst.items():
            out.append(Check("oracle", f"{k} N={N}", v <= TOL, f"max dev {v:.2e}"))
    return out


def sql_barrier_suite(n_max: int = 51) -> list[Check]:
    out = []
    for N in range(3, n_max + 1, 2):
        F = sql_barrier_total(N).value
        out.append(Check("sql-barrier", f"N={N}", F == 4 * N, f"F_total={F:g} 4N={4 * N}"))
    return out


def step_function_suite(n_max: int = 41) -> list[Check]:
    """Oddness, monotone sign, saturation, small-angle bound and derivative accuracy."""
    out = []
    ws = np.linspace(-1.5, 1.5, 61)
    for N in range(3, n_max + 1, 2):
        L = (N - 1) // 2
        sign = -1.0 if L % 2 else 1.0
        f = [signal.phase_amplification(N, w) for w in ws]
        odd = max(abs(signal.phase_amplification(N, -w) + v) for w, v in zip(ws, f))
        steps = np.diff(f) * sign
        mono = bool(np.all(steps >= -1e-15))
        sat_hi = math.pi / 2 - abs(signal.phase_amplification(N, math.pi / 3))
        sat_lo = abs(signal.phase_amplification(N, math.pi / 6))
        # the bound is arctan(3^(-N/2)) < 3^(-N/2); pi/2 - x rounds at ~1e-16
        bound = 3 ** (-N / 2) + 4e-16
        sat = sat_hi <= bound and sat_lo <= bound
        small = all(abs(signal.phase_amplification(N, w)) <= abs(math.tan(w)) ** N * (1 + 1e-12) for w in (1e-3, 0.05, 0.2, 0.5))
        worst = 0.0
        for w in math.pi / 4 + np.linspace(-1.5, 1.5, 7) / N:
            h = 1e-6 / N
            fd = (signal.phase_amplification(N, w + h) - signal.phase_amplification(N, w - h)) / (2 * h)
            an = signal.phase_amplification_derivative(N, w)
            worst = max(worst, abs(fd - an) / abs(an))
        out.append(Check("step-function", f"odd N={N}", odd <= 1e-15, f"{odd:.1e}"))
        out.append(Check("step-function", f"monotone N={N}", mono))
        out.append(Check("step-function", f"saturation N={N}", sat, f"{max(sat_hi, sat_lo):.2e} <= {3 ** (-N / 2):.2e}"))
        out.append(Check("step-function", f"small-angle N={N}", small))
        out.append(Check("step-function", f"derivative N={N}", worst <= 1e-6, f"rel {worst:.1e}"))
    return out


def ghz_fisher_suite() -> list[Check]:
    out = []
    for N in (3, 15, 101):
        w = math.pi / (4 * N)
        for sigma in (0.0, 0.01, 0.05):
            F = classical_fi_binary(
                lambda x: signal.marginalized_parity_prob(N, x, sigma), w,
                lambda x: -N * math.sin(2 * N * x) * math.exp(-2 * N * sigma**2),
            ).value
            want = 4 * N * N * math.exp(-4 * N * sigma**2)
            rel = abs(F - want) / want
            out.append(Check("ghz-fisher", f"N={N} sigma={sigma}", rel <= 1e-6, f"rel {rel:.1e}"))
    return out


def kernel_suite(seed: int = 3) -> list[Check]:
    from . import _fallback, bayes

    rng = np.random.default_rng(seed)
    g = bayes.init_uniform(12)
    k = rng.integers(1, 500, 2000)
    th = rng.uniform(0, 2 * math.pi, 2000)
    o = rng.choice([-1.0, 1.0], 2000)
    a, b = o * np.cos(th) * 0.9, o * np.sin(th) * 0.9
    ref = g.copy()
    bayes.update_trig(g, k, a, b)
    C, S = bayes._trig_tables(ref.size)
    _fallback.apply_batch(ref.log_weights, k.astype(np.int64), a, b, C, S)
    dev = float(np.max(np.abs(np.exp(g.log_weights) - np.exp(ref.log_weights))))
    return [Check("kernel", f"{bayes.KERNEL} vs numpy", dev <= 1e-10, f"max dev {dev:.1e}")]


SUITES = {
    "oracle": oracle_suite,
    "sql-barrier": sql_barrier_suite,
    "step-function": step_function_suite,
    "ghz-fisher": ghz_fisher_suite,
    "kernel": kernel_suite,
}


def run_suites(names=None) -> list[Check]:
    names = list(SUITES) if not names else list(names)
    checks = []
    for n in names:
        checks.extend(SUITES[n]())
    return checks
