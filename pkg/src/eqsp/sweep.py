"""Multi-seed, multi-target sweeps, power-law fits and comparison with reference tables."""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .bayes import ConfigError
from .protocols import BAYESIAN, RunConfig, run_binary_search, run_sequential

log = logging.getLogger(__name__)

CSV_COLUMNS = (
    "seed", "protocol", "mode", "L", "gamma", "sigma_eps", "eps",
    "converged", "T", "experiments", "estimate", "circ_error", "acceptance", "status",
)
SWEEPABLE = (*BAYESIAN, "binary_search_ghz", "binary_search_code", "sequential")
WLS_LABEL = "WLS(weights=local log-eps spacing)"


class InsufficientDataError(ValueError):
    pass


def default_budget(protocol: str) -> int:
    """Raw experiment budget per target: 10k for bare GHZ, 50k for code protocols."""
    return 10_000 if protocol == "bare_ghz" else 50_000


@dataclass(frozen=True)
class SweepPlan:
    seeds: tuple
    eps_count: int
    eps_range: tuple
    template: RunConfig

    def __post_init__(self):
        seeds = tuple(int(s) for s in self.seeds)
        if not seeds:
            raise ConfigError("sweep needs at least one seed")
        if len(set(seeds)) != len(seeds):
            raise ConfigError("duplicate seeds")
        object.__setattr__(self, "seeds", seeds)
        lo, hi = (float(x) for x in self.eps_range)
        if not 0 < lo <= hi:
            raise ConfigError("eps range must satisfy 0 < lo <= hi")
        if self.eps_count < 1 or (self.eps_count > 1 and lo == hi):
            raise ConfigError("eps grid must have at least one distinct point")
        object.__setattr__(self, "eps_range", (lo, hi))
        if self.template.protocol not in SWEEPABLE:
            raise ConfigError(f"protocol {self.template.protocol!r} has no per-target cost to sweep")

    @classmethod
    def desk(cls, template: RunConfig) -> "SweepPlan":
        return cls(tuple(range(2, 12)), 30, (1e-3, 1e-1), template)

    @classmethod
    def paper(cls, template: RunConfig) -> "SweepPlan":
        return cls(tuple(range(2, 42)), 60, (1e-4, 1e-1), template)

    def eps_grid(self) -> np.ndarray:
        """Log-spaced targets, largest first."""
        lo, hi = self.eps_range
        if self.eps_count == 1:
            return np.array([hi])
        return np.logspace(math.log10(hi), math.log10(lo), self.eps_count)

    def units(self) -> list:
        return [(s, float(e)) for s in self.seeds for e in self.eps_grid()]


@dataclass(frozen=True)
class SweepRow:
    seed: int
    protocol: str
    mode: str
    L: int
    gamma: float
    sigma_eps: float
    eps: float
    converged: bool
    T: int
    experiments: int
    estimate: float
    circ_error: float
    acceptance: float
    status: str = "ok"

    def cells(self) -> list:
        return [
            self.seed, self.protocol, self.mode, self.L, repr(self.gamma), repr(self.sigma_eps),
            repr(self.eps), int(self.converged), self.T, self.experiments,
            repr(self.estimate), repr(self.circ_error), repr(self.acceptance), self.status,
        ]


def _row(cfg: RunConfig, eps, converged, T, experiments, estimate, err, acc, status=None) -> SweepRow:
    bare = cfg.protocol == "bare_ghz"
    return SweepRow(
        seed=cfg.seed,
        protocol=cfg.protocol,
        mode="any" if bare else cfg.mode,
        L=0 if bare else cfg.code.L,
        gamma=float(cfg.noise.gamma_mean),
        sigma_eps=float(cfg.noise.sigma_eps),
        eps=float(eps),
        converged=bool(converged),
        T=int(T),
        experiments=int(experiments),
        estimate=float(estimate),
        circ_error=float(err),
        acceptance=float(acc),
        status=status or ("ok" if converged else "not_converged"),
    )


def run_unit(template: RunConfig, seed: int, eps: float) -> SweepRow:
    """One (seed, eps) run.  Exceptions become a row with status 'failed'."""
    cfg = dataclasses.replace(template, seed=seed, eps_targets=(eps,), keep_ledger=False)
    try:
        if cfg.protocol in BAYESIAN:
            t = BAYESIAN[cfg.protocol](cfg).targets[0]
            return _row(cfg, eps, t.converged, t.total_cost, t.experiments_used,
                        t.estimate, t.circ_error, t.acceptance_rate)
        if cfg.protocol == "sequential":
            r = run_sequential(cfg, eps)
            err = abs(r.estimate - cfg.omega_true)
            return _row(cfg, eps, err <= eps, r.total_M * cfg.probe_size, r.attempts,
                        r.estimate, err, r.acceptance_rate)
        r = run_binary_search(cfg, eps)
        err = abs(r.estimate - cfg.omega_true)
        return _row(cfg, eps, err <= eps, r.total_cost, r.total_shots, r.estimate, err, 1.0)
    except Exception as exc:  # isolate the unit; the sweep goes on
        log.error("seed %d eps %r failed: %s", seed, eps, exc)
        return _row(cfg, eps, False, 0, 0, float("nan"), float("nan"), float("nan"), "failed")


def _unit_star(args):
    return run_unit(*args)


def worker_count(n_units: int) -> int:
    env = os.environ.get("EQSP_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"EQSP_THREADS must be an integer, got {env!r}") from None
        if n < 1:
            raise ConfigError("EQSP_THREADS must be at least 1")
    else:
        n = os.cpu_count() or 1
    return max(1, min(n, n_units))


def run_sweep(plan: SweepPlan) -> list[SweepRow]:
    """Every (seed, eps) unit, ordered by seed then descending eps.

    Each unit draws from streams keyed on (seed, eps) alone, so the table does
    not depend on worker count or scheduling.
    """
    units = plan.units()
    jobs = [(plan.template, s, e) for s, e in units]
    workers = worker_count(len(jobs))
    if workers == 1:
        return [_unit_star(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # small chunks so slow low-eps units spread across workers
        return list(pool.map(_unit_star, jobs, chunksize=1))


def config_hash(resolved: dict) -> str:
    blob = json.dumps(resolved, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def rows_to_csv(rows, resolved: dict | None = None) -> str:
    """CSV text with a leading '#' metadata line carrying the config and its hash."""
    buf = io.StringIO()
    meta = resolved or {}
    buf.write(f"# eqsp-sweep config_sha256={config_hash(meta)} config={json.dumps(meta, sort_keys=True)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow(r.cells())
    return buf.getvalue()


def read_csv(text: str):
    """Parse sweep CSV text into (rows, metadata dict)."""
    lines = text.splitlines()
    meta = {}
    body = []
    for ln in lines:
        if ln.startswith("#"):
            if "config=" in ln:
                meta = json.loads(ln.split("config=", 1)[1])
        elif ln.strip():
            body.append(ln)
    if not body:
        raise ConfigError("CSV has no header")
    reader = csv.DictReader(body)
    missing = [c for c in CSV_COLUMNS if c != "status" and c not in (reader.fieldnames or [])]
    if missing:
        raise ConfigError(f"CSV is missing columns: {', '.join(missing)}")
    rows = []
    for i, rec in enumerate(reader, start=2):
        try:
            conv = rec["converged"].strip().lower() in ("1", "true")
            rows.append(SweepRow(
                seed=int(rec["seed"]), protocol=rec["protocol"], mode=rec["mode"], L=int(rec["L"]),
                gamma=float(rec["gamma"]), sigma_eps=float(rec["sigma_eps"]), eps=float(rec["eps"]),
                converged=conv, T=int(float(rec["T"])), experiments=int(float(rec["experiments"])),
                estimate=float(rec["estimate"]), circ_error=float(rec["circ_error"]),
                acceptance=float(rec["acceptance"]),
                status=rec.get("status") or ("ok" if conv else "not_converged"),
            ))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed CSV row {i}: {exc}") from None
    return rows, meta


@dataclass(frozen=True)
class FitResult:
    alpha: float
    intercept: float
    stderr_alpha: float
    n_points: int
    method: str
    converged_fraction: float = float("nan")


def wls_weights(log_eps: np.ndarray) -> np.ndarray:
    """Inverse local point density in log eps: half the gap to each neighbour."""
    order = np.argsort(log_eps)
    x = log_eps[order]
    gaps = np.diff(x)
    w = np.empty_like(x)
    if len(x) == 1:
        return np.ones(1)
    w[0], w[-1] = gaps[0], gaps[-1]
    w[1:-1] = 0.5 * (gaps[:-1] + gaps[1:])
    if not np.all(w > 0):
        # repeated eps values: fall back to equal weights
        w = np.ones_like(x)
    out = np.empty_like(w)
    out[order] = w
    return out


def fit_power_law(eps, T, method: str = "OLS", converged_fraction: float = float("nan")) -> FitResult:
    """Fit log T = -alpha log eps + c."""
    eps = np.asarray(eps, dtype=float)
    T = np.asarray(T, dtype=float)
    if eps.shape != T.shape:
        raise ValueError("eps and T must have the same length")
    if len(eps) < 3:
        raise InsufficientDataError(f"need at least 3 converged points, got {len(eps)}")
    if np.any(eps <= 0) or np.any(T <= 0):
        raise ValueError("eps and T must be positive")
    x, y = np.log(eps), np.log(T)
    if method == "OLS":
        w = np.ones_like(x)
    elif method == "WLS":
        w = wls_weights(x)
    else:
        raise ConfigError(f"unknown fit method {method!r}")
    sw = w.sum()
    xm, ym = (w * x).sum() / sw, (w * y).sum() / sw
    sxx = (w * (x - xm) ** 2).sum()
    if sxx == 0:
        raise InsufficientDataError("all eps values coincide")
    slope = (w * (x - xm) * (y - ym)).sum() / sxx
    c = ym - slope * xm
    resid = y - (slope * x + c)
    n = len(x)
    # weights rescaled to sum to n so the residual variance is on the OLS scale
    wn = w * n / sw
    s2 = (wn * resid**2).sum() / (n - 2) if n > 2 else 0.0
    se = math.sqrt(max(s2, 0.0) / (sxx * n / sw))
    return FitResult(-float(slope), float(c), se, n, method, converged_fraction)


@dataclass(frozen=True)
class Aggregate:
    mean_alpha: float
    sem: float | None
    mean_converged_fraction: float
    n_seeds: int
    acceptance: float = float("nan")


def aggregate_seeds(fits, acceptance: float = float("nan")) -> Aggregate:
    """Mean alpha with SEM (ddof = 1) across seeds; SEM is None for a single fit."""
    fits = list(fits)
    if not fits:
        raise InsufficientDataError("no fits to aggregate")
    a = np.array([f.alpha for f in fits])
    cf = np.array([f.converged_fraction for f in fits])
    sem = float(a.std(ddof=1) / math.sqrt(len(a))) if len(a) > 1 else None
    return Aggregate(float(a.mean()), sem, float(np.nanmean(cf)) if np.isfinite(cf).any() else float("nan"),
                     len(fits), acceptance)


ConfigKey = tuple  # (protocol, mode, L, gamma, sigma_eps)


def group_rows(rows) -> dict:
    groups: dict = {}
    for r in rows:
        groups.setdefault((r.protocol, r.mode, r.L, r.gamma, r.sigma_eps), []).append(r)
    return groups


@dataclass
class ConfigSummary:
    key: ConfigKey
    fits: list
    aggregate: Aggregate | None
    skipped_seeds: list = field(default_factory=list)


def summarize(rows, method: str = "OLS") -> list[ConfigSummary]:
    """Per-configuration seed fits and their aggregate.

    Acceptance is pooled over every experiment in the configuration.
    """
    out = []
    for key, grp in sorted(group_rows(rows).items()):
        by_seed: dict = {}
        for r in grp:
            by_seed.setdefault(r.seed, []).append(r)
        fits, skipped = [], []
        for seed in sorted(by_seed):
            rs = by_seed[seed]
            ok = [r for r in rs if r.converged and r.T > 0]
            frac = sum(r.converged for r in rs) / len(rs)
            try:
                fits.append(fit_power_law([r.eps for r in ok], [r.T for r in ok], method, frac))
            except InsufficientDataError:
                skipped.append(seed)
        live = [r for r in grp if r.status != "failed" and r.experiments > 0]
        n_exp = sum(r.experiments for r in live)
        acc = sum(r.acceptance * r.experiments for r in live) / n_exp if n_exp else float("nan")
        agg = aggregate_seeds(fits, acc) if fits else None
        out.append(ConfigSummary(key, fits, agg, skipped))
    return out


@dataclass(frozen=True)
class ReferenceRow:
    table: str
    protocol: str
    mode: str
    L: int
    gamma: float
    hetero_h: float
    sigma_eps: float
    alpha: float
    alpha_sem: float
    converged_pct: float
    acceptance_pct: float
    acceptance_lower_bound: bool


def load_reference() -> list[ReferenceRow]:
    text = resources.files("eqsp").joinpath("data/reference_tables.csv").read_text()
    body = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    rows = []
    for rec in csv.DictReader(body):
        rows.append(ReferenceRow(
            rec["table"], rec["protocol"], rec["mode"], int(rec["L"]), float(rec["gamma"]),
            float(rec["hetero_h"]), float(rec["sigma_eps"]), float(rec["alpha"]), float(rec["alpha_sem"]),
            float(rec["converged_pct"]), float(rec["acceptance_pct"]), rec["acceptance_lower_bound"] == "1",
        ))
    return rows


def find_reference(protocol, mode, L, gamma, sigma_eps, hetero_h=0.0, table=None) -> ReferenceRow | None:
    for r in table if table is not None else load_reference():
        if (r.protocol == protocol and r.mode in (mode, "any") and (r.protocol == "bare_ghz" or r.L == L)
                and math.isclose(r.gamma, gamma, abs_tol=1e-12)
                and math.isclose(r.sigma_eps, sigma_eps, abs_tol=1e-12)
                and math.isclose(r.hetero_h, hetero_h, abs_tol=1e-12)):
            return r
    return None


@dataclass
class Comparison:
    passed: bool
    matched: bool
    checks: list = field(default_factory=list)

    def report(self) -> str:
        if not self.matched:
            return "UNMATCHED: no reference row for this configuration"
        return "; ".join(f"{'PASS' if ok else 'FAIL'} {msg}" for ok, msg in self.checks)


def compare_to_reference(
    aggregate: Aggregate | None,
    reference: ReferenceRow | None,
    alpha_band: float = 0.2,
    acceptance_slack: float | None = None,
    converged_slack: float | None = None,
) -> Comparison:
    """Pass iff mean alpha is within alpha_band of the reference and optional
    acceptance / convergence percentages are within their slack (in points)."""
    if reference is None:
        return Comparison(False, False)
    if aggregate is None:
        return Comparison(False, True, [(False, "no seed had enough converged points to fit")])
    checks = []
    d = aggregate.mean_alpha - reference.alpha
    checks.append((abs(d) <= alpha_band, f"alpha {aggregate.mean_alpha:.3f} vs {reference.alpha:.3f} +- {alpha_band}"))
    if acceptance_slack is not None:
        acc = 100 * aggregate.acceptance
        if reference.acceptance_lower_bound:
            ok = acc >= reference.acceptance_pct - acceptance_slack
        else:
            ok = abs(acc - reference.acceptance_pct) <= acceptance_slack
        checks.append((ok, f"acceptance {acc:.1f}% vs {reference.acceptance_pct:g}% +- {acceptance_slack:g}"))
    if converged_slack is not None:
        cf = 100 * aggregate.mean_converged_fraction
        checks.append((abs(cf - reference.converged_pct) <= converged_slack,
                       f"converged {cf:.1f}% vs {reference.converged_pct:g}% +- {converged_slack:g}"))
    return Comparison(all(ok for ok, _ in checks), True, checks)
