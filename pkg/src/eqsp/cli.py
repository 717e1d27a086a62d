"""Command-line entry point: run sweeps, fit exponents, verify formulas, report."""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from pathlib import Path

import click

from . import sweep
from .bayes import ConfigError
from .protocols import RunConfig
from .signal import CodeShape, DomainError, NoiseSpec
from .verify import SUITES, run_suites

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

# documented schema of the JSON config file: key -> accepted python types
SCHEMA = {
    "protocol": (str,),
    "mode": (str,),
    "L": (int,),
    "blocks": (int,),
    "gamma": (int, float),
    "hetero_h": (int, float),
    "sigma_eps": (int, float),
    "noise_model": (str,),
    "omega_true": (int, float),
    "budget_K": (int,),
    "grid_bits": (int,),
    "delta": (int, float),
    "probe_size": (int,),
    "seeds": (list,),
    "eps_count": (int,),
    "eps_min": (int, float),
    "eps_max": (int, float),
    "profile": (str,),
}

PROFILES = {
    "desk": dict(seeds=list(range(2, 12)), eps_count=30, eps_min=1e-3, eps_max=1e-1),
    "paper": dict(seeds=list(range(2, 42)), eps_count=60, eps_min=1e-4, eps_max=1e-1),
}


class UsageProblem(click.ClickException):
    exit_code = EXIT_USAGE


def _canonical_protocol(name: str) -> str:
    return name.replace("-", "_")


def load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageProblem(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageProblem(f"config is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise UsageProblem("config must be a JSON object")
    return validate_schema(data)


def validate_schema(data: dict) -> dict:
    problems = []
    for k, v in data.items():
        if k not in SCHEMA:
            problems.append(f"unknown key {k!r}")
        elif isinstance(v, bool) or not isinstance(v, SCHEMA[k]):
            want = "/".join(t.__name__ for t in SCHEMA[k])
            problems.append(f"key {k!r} must be {want}, got {type(v).__name__}")
    if "seeds" in data and isinstance(data["seeds"], list):
        if any(isinstance(s, bool) or not isinstance(s, int) for s in data["seeds"]):
            problems.append("seeds must be a list of integers")
    if problems:
        raise UsageProblem("config schema errors:\n  " + "\n  ".join(problems))
    return dict(data)


def parse_seeds(text: str) -> list[int]:
    """'2..11' (inclusive) or a comma list '2,3,5'."""
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            return list(range(int(a), int(b) + 1))
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise UsageProblem(f"bad seed specification {text!r}") from None


def resolve(file_cfg: dict, overrides: dict) -> dict:
    """Profile defaults, then the config file, then command-line flags."""
    profile = overrides.get("profile") or file_cfg.get("profile") or "desk"
    if profile not in PROFILES:
        raise UsageProblem(f"unknown profile {profile!r}")
    out = dict(PROFILES[profile], profile=profile)
    out.update(file_cfg)
    out.update({k: v for k, v in overrides.items() if v is not None})
    out["profile"] = profile
    if "protocol" not in out:
        raise UsageProblem("no protocol given (flag --protocol or config key 'protocol')")
    out["protocol"] = _canonical_protocol(out["protocol"])
    out.setdefault("mode", "post_selection")
    out["mode"] = _canonical_protocol(out["mode"])
    out.setdefault("L", 1)
    out.setdefault("blocks", 3 if out["protocol"] == "combined" else 1)
    out.setdefault("gamma", 0.0)
    out.setdefault("hetero_h", 0.0)
    out.setdefault("sigma_eps", 0.0)
    out.setdefault("noise_model", "depolarizing" if out["protocol"] == "bare_ghz" else "hamiltonian")
    out.setdefault("omega_true", 0.3)
    out.setdefault("budget_K", sweep.default_budget(out["protocol"]))
    out.setdefault("grid_bits", 14)
    out.setdefault("delta", 0.05)
    out.setdefault("probe_size", 9 if out["protocol"] == "sequential" else 15)
    for k in ("gamma", "hetero_h", "sigma_eps", "omega_true", "delta", "eps_min", "eps_max"):
        out[k] = float(out[k])
    return dict(sorted(out.items()))


def build_plan(cfg: dict) -> sweep.SweepPlan:
    try:
        template = RunConfig(
            protocol=cfg["protocol"],
            omega_true=cfg["omega_true"],
            eps_targets=(cfg["eps_max"],),
            budget_K=cfg["budget_K"],
            mode=cfg["mode"],
            code=CodeShape(cfg["L"], cfg["blocks"]),
            noise=NoiseSpec(cfg["sigma_eps"], cfg["gamma"], cfg["hetero_h"], cfg["noise_model"]),
            grid_bits=cfg["grid_bits"],
            delta=cfg["delta"],
            probe_size=cfg["probe_size"],
        )
        return sweep.SweepPlan(tuple(cfg["seeds"]), cfg["eps_count"], (cfg["eps_min"], cfg["eps_max"]), template)
    except (DomainError, ConfigError) as exc:
        raise UsageProblem(f"invalid configuration: {exc}") from None


@click.group()
def cli():
    """Error-detected phase estimation toolkit."""


@cli.command()
@click.option("--config", "config_path", type=click.Path(dir_okay=False), help="JSON config file.")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False), help="Output CSV.")
@click.option("--profile", type=click.Choice(["desk", "paper"]), default=None)
@click.option("--protocol", default=None, help="bare-ghz, bitflip, combined, binary-search-ghz, ...")
@click.option("--mode", default=None, help="post-selection or full-likelihood.")
@click.option("--L", "L", type=int, default=None, help="Code parameter, N = 2L + 1.")
@click.option("--blocks", type=int, default=None)
@click.option("--gamma", type=float, default=None, help="Noise level.")
@click.option("--hetero", "hetero_h", type=float, default=None, help="Relative spread of per-qubit noise.")
@click.option("--sigma-eps", "sigma_eps", type=float, default=None)
@click.option("--omega", "omega_true", type=float, default=None)
@click.option("--budget", "budget_K", type=int, default=None, help="Experiments per target.")
@click.option("--grid-bits", type=int, default=None)
@click.option("--seeds", default=None, help="'2..11' or '2,3,4'.")
@click.option("--eps-count", type=int, default=None)
@click.option("--eps-min", type=float, default=None)
@click.option("--eps-max", type=float, default=None)
def run(config_path, out_path, **flags):
    """Run a (seed, eps) sweep and write one CSV row per unit."""
    if flags.get("seeds") is not None:
        flags["seeds"] = parse_seeds(flags["seeds"])
    cfg = resolve(load_config_file(config_path), flags)
    plan = build_plan(cfg)
    try:
        rows = sweep.run_sweep(plan)
        text = sweep.rows_to_csv(rows, cfg)
        Path(out_path).write_text(text)
    except (OSError, RuntimeError) as exc:
        click.echo(f"run failed: {exc}", err=True)
        sys.exit(EXIT_FAIL)
    failed = sum(r.status == "failed" for r in rows)
    for s in sweep.summarize(rows):
        click.echo(_summary_line(s))
    if failed:
        click.echo(f"{failed} unit(s) failed", err=True)
        sys.exit(EXIT_FAIL)


def _fmt_key(key) -> str:
    protocol, mode, L, gamma, sigma = key
    return f"{protocol} mode={mode} L={L} gamma={gamma:g} sigma_eps={sigma:g}"


def _summary_line(s: sweep.ConfigSummary) -> str:
    a = s.aggregate
    if a is None:
        return f"{_fmt_key(s.key)}: no seed had 3 converged points"
    sem = "n/a" if a.sem is None else f"{a.sem:.3f}"
    acc = "" if math.isnan(a.acceptance) else f" acceptance={100 * a.acceptance:.1f}%"
    return (f"{_fmt_key(s.key)}: alpha={a.mean_alpha:.3f} +- {sem} (seeds={a.n_seeds}) "
            f"converged={100 * a.mean_converged_fraction:.1f}%{acc}")


def _read_sweep(path):
    try:
        return sweep.read_csv(Path(path).read_text())
    except OSError as exc:
        raise UsageProblem(f"cannot read {path}: {exc}") from None
    except (ConfigError, json.JSONDecodeError) as exc:
        raise UsageProblem(f"malformed CSV {path}: {exc}") from None


def _comparisons(summaries, meta, alpha_band, acceptance_slack):
    h = float(meta.get("hetero_h", 0.0))
    ref = sweep.load_reference()
    for s in summaries:
        protocol, mode, L, gamma, sigma = s.key
        row = sweep.find_reference(protocol, mode, L, gamma, sigma, h, table=ref)
        slack = acceptance_slack if protocol != "bare_ghz" else None
        yield s, row, sweep.compare_to_reference(s.aggregate, row, alpha_band, slack)


@cli.command()
@click.argument("csv_path", type=click.Path(dir_okay=False))
@click.option("--method", type=click.Choice(["OLS", "WLS"]), default="OLS")
@click.option("--compare", is_flag=True, help="Compare against the shipped reference tables.")
@click.option("--alpha-band", type=float, default=0.2, show_default=True)
@click.option("--acceptance-slack", type=float, default=6.0, show_default=True, help="Percentage points.")
def fit(csv_path, method, compare, alpha_band, acceptance_slack):
    """Fit log T = -alpha log eps + c per seed and aggregate across seeds."""
    rows, meta = _read_sweep(csv_path)
    summaries = sweep.summarize(rows, method)
    if method == "WLS":
        click.echo(f"# method: {sweep.WLS_LABEL}")
    for s in summaries:
        click.echo(_summary_line(s))
    if compare:
        ok = True
        for s, _, cmp in _comparisons(summaries, meta, alpha_band, acceptance_slack):
            click.echo(f"  {_fmt_key(s.key)}: {cmp.report()}")
            ok &= cmp.passed
        if not ok:
            sys.exit(EXIT_FAIL)


@cli.command()
@click.option("--suite", "suites", multiple=True, type=click.Choice(sorted(SUITES)), help="Repeatable; default all.")
def verify(suites):
    """Closed forms against the statevector oracle plus invariant batteries."""
    checks = run_suites(suites)
    width = max(len(c.name) for c in checks)
    for c in checks:
        click.echo(f"{'PASS' if c.passed else 'FAIL'}  {c.suite:<14} {c.name:<{width}}  {c.detail}")
    n_bad = sum(not c.passed for c in checks)
    click.echo(f"{len(checks) - n_bad}/{len(checks)} checks passed")
    sys.exit(EXIT_FAIL if n_bad else EXIT_OK)


REPORT_COLUMNS = (
    "protocol", "mode", "L", "gamma", "sigma_eps", "method", "n_seeds", "alpha", "alpha_sem",
    "converged_pct", "acceptance_pct", "ref_alpha", "ref_alpha_sem", "ref_converged_pct",
    "ref_acceptance_pct", "within_band",
)


@cli.command()
@click.argument("csv_paths", nargs=-1, required=True, type=click.Path(dir_okay=False))
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None, help="Defaults to stdout.")
@click.option("--alpha-band", type=float, default=0.2, show_default=True)
def report(csv_paths, out_path, alpha_band):
    """Plot-ready summary table of sweeps next to the reference values."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    for path in csv_paths:
        rows, meta = _read_sweep(path)
        for method in ("OLS", "WLS"):
            summaries = sweep.summarize(rows, method)
            for s, ref, cmp in _comparisons(summaries, meta, alpha_band, None):
                a = s.aggregate
                w.writerow([
                    *s.key, method,
                    a.n_seeds if a else 0,
                    f"{a.mean_alpha:.6g}" if a else "",
                    f"{a.sem:.6g}" if a and a.sem is not None else "",
                    f"{100 * a.mean_converged_fraction:.4g}" if a else "",
                    f"{100 * a.acceptance:.4g}" if a and not math.isnan(a.acceptance) else "",
                    ref.alpha if ref else "", ref.alpha_sem if ref else "",
                    ref.converged_pct if ref else "", ref.acceptance_pct if ref else "",
                    int(cmp.passed) if cmp.matched else "",
                ])
    if out_path:
        Path(out_path).write_text(buf.getvalue())
    else:
        click.echo(buf.getvalue(), nl=False)


def main(argv=None):
    try:
        cli.main(args=argv, prog_name="eqsp", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.exceptions.Abort:
        return EXIT_FAIL
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_FAIL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
