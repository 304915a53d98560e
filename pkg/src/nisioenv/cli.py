"""Experiment orchestration: configs, subcommands, verification suite, reports.

Subcommands wire the library together on a JSON experiment configuration:

* ``envelope``       dyadic envelope run + upper-bound certificate
* ``generator``      difference-quotient table against the supremum generator
* ``derivative``     derivative + integral identity checks
* ``compare-hjb``    envelope vs. the upwind PDE oracle
* ``compare-ode``    envelope vs. the RK4 integrator (compound Poisson)
* ``counterexample`` blow-up scan for the uncertain shift family
* ``verify``         the full invariant suite at small or full scale

Exit codes: 0 all checks passed, 1 a check failed (report still written),
2 configuration error (nothing written). Reports are byte-identical for
identical (config, seed, version); wall-clock timings go to a separate file
so the determinism contract holds for report.json.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import calculus, envelope, funcspace, kernels, reference
from .errors import ConfigurationError
from .funcspace import GridFunction, PNorm, lp_norm, make_grid, pointwise_max
from .kernels import (
    CompoundPoisson,
    GaussianDrift,
    JumpDistribution,
    LambdaInterval,
    LambdaValues,
    PureShift,
)

SUBCOMMANDS = (
    "envelope",
    "generator",
    "derivative",
    "compare-hjb",
    "compare-ode",
    "counterexample",
    "verify",
)


# ---------------------------------------------------------------------------
# Configuration


@dataclass
class ExperimentConfig:
    raw: dict
    grid: funcspace.Grid
    norm: PNorm
    family: kernels.KernelFamily
    family_name: str
    initial: GridFunction
    t: float
    tol_rel: float
    n_max: int
    seed: int
    output_dir: str
    options: dict = field(default_factory=dict)

    def envelope_params(self) -> envelope.EnvelopeParams:
        return envelope.EnvelopeParams(norm=self.norm, tol_rel=self.tol_rel, n_max=self.n_max)


def _require(mapping: dict, key: str, context: str):
    if key not in mapping:
        raise ConfigurationError(f"missing key `{context}{key}`")
    return mapping[key]


def _number(mapping: dict, key: str, context: str, default=None) -> float:
    if key not in mapping:
        if default is None:
            raise ConfigurationError(f"missing key `{context}{key}`")
        return default
    val = mapping[key]
    if not isinstance(val, (int, float)) or isinstance(val, bool):
        raise ConfigurationError(f"key `{context}{key}` must be a number, got {val!r}")
    return float(val)


def build_family(spec: dict, context: str = "family.") -> tuple[kernels.KernelFamily, str]:
    name = _require(spec, "family", context)
    if name not in ("gaussian_drift", "compound_poisson", "pure_shift"):
        raise ConfigurationError(f"key `{context}family` must be one of gaussian_drift, compound_poisson, pure_shift; got {name!r}")
    has_interval = "lambda_interval" in spec
    has_list = "lambda_list" in spec
    if has_interval == has_list:
        raise ConfigurationError(f"`{context}` needs exactly one of lambda_interval or lambda_list")
    try:
        if has_interval:
            lo, hi = spec["lambda_interval"]
            lset: kernels.LambdaSet = LambdaInterval(float(lo), float(hi))
        else:
            values = spec["lambda_list"]
            if not isinstance(values, list) or not values:
                raise ConfigurationError(f"key `{context}lambda_list` must be a nonempty list")
            lset = LambdaValues(tuple(float(v) for v in values))
        if name == "gaussian_drift":
            fam: kernels.KernelFamily = GaussianDrift(lset)
        elif name == "pure_shift":
            fam = PureShift(lset)
        else:
            atoms = _require(spec, "jump_atoms", context)
            if not isinstance(atoms, list) or not atoms:
                raise ConfigurationError(f"key `{context}jump_atoms` must be a nonempty list of [offset, weight]")
            mu = JumpDistribution(tuple((float(y), float(w)) for y, w in atoms))
            fam = CompoundPoisson(lset, mu)
        kernels.levy_condition_bound(fam)
        return fam, name
    except ConfigurationError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"invalid `{context}` specification: {exc}") from exc


def build_initial(spec: dict, grid: funcspace.Grid, context: str = "initial.") -> GridFunction:
    kind = _require(spec, "kind", context)
    params = spec.get("params", {})
    if not isinstance(params, dict):
        raise ConfigurationError(f"key `{context}params` must be an object")
    if kind == "bump":
        return funcspace.bump(
            grid,
            center=_number(params, "center", context + "params.", 0.0),
            radius=_number(params, "radius", context + "params.", 1.0),
            height=_number(params, "height", context + "params.", 1.0),
        )
    if kind == "gaussian":
        return funcspace.gaussian_profile(
            grid,
            center=_number(params, "center", context + "params.", 0.0),
            sigma=_number(params, "sigma", context + "params.", 1.0),
            height=_number(params, "height", context + "params.", 1.0),
        )
    if kind == "ramp":
        return funcspace.ramp(
            grid,
            slope=_number(params, "slope", context + "params.", 1.0),
            intercept=_number(params, "intercept", context + "params.", 0.0),
        )
    if kind == "custom_csv":
        path = _require(params, "path", context + "params.")
        if not Path(path).is_file():
            raise ConfigurationError(f"key `{context}params.path`: file not found: {path}")
        f = funcspace.read_csv(path)
        if f.grid != grid:
            raise ConfigurationError(f"key `{context}params.path`: CSV grid does not match the configured grid")
        return f
    raise ConfigurationError(f"key `{context}kind` must be one of bump, gaussian, ramp, custom_csv; got {kind!r}")


_TOP_LEVEL_KEYS = {
    "grid", "norm", "family", "initial", "time", "seeds", "output_dir",
    "generator", "derivative", "compare", "ode", "hjb", "counterexample",
}


def load_config(path) -> ExperimentConfig:
    """Parse and fully validate a JSON experiment configuration.

    Every numeric field is checked against the target module preconditions
    before any computation; errors name the offending key.
    """
    cfg_path = Path(path)
    if not cfg_path.is_file():
        raise ConfigurationError(f"config file not found: {path}")
    try:
        raw = json.loads(cfg_path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigurationError("config must be a JSON object")
    unknown = set(raw) - _TOP_LEVEL_KEYS
    if unknown:
        raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")

    gspec = _require(raw, "grid", "")
    grid = make_grid(
        _number(gspec, "lower", "grid."),
        _number(gspec, "upper", "grid."),
        int(_number(gspec, "n_nodes", "grid.")),
    )
    norm = PNorm(_number(_require(raw, "norm", ""), "p", "norm."))
    family, family_name = build_family(_require(raw, "family", ""))
    initial = build_initial(_require(raw, "initial", ""), grid)
    tspec = _require(raw, "time", "")
    t = _number(tspec, "t", "time.")
    if t <= 0:
        raise ConfigurationError(f"key `time.t` must be > 0, got {t}")
    tol_rel = _number(tspec, "tol_rel", "time.", 1e-4)
    if tol_rel <= 0:
        raise ConfigurationError(f"key `time.tol_rel` must be > 0, got {tol_rel}")
    n_max = int(_number(tspec, "n_max", "time.", 12))
    if n_max < 0:
        raise ConfigurationError(f"key `time.n_max` must be >= 0, got {n_max}")
    seed = int(_number(raw, "seeds", "", 0)) if "seeds" in raw else 0
    output_dir = raw.get("output_dir", "out")
    if not isinstance(output_dir, str):
        raise ConfigurationError("key `output_dir` must be a string")

    options = {k: raw[k] for k in ("generator", "derivative", "compare", "ode", "hjb", "counterexample") if k in raw}
    return ExperimentConfig(
        raw=raw, grid=grid, norm=norm, family=family, family_name=family_name,
        initial=initial, t=t, tol_rel=tol_rel, n_max=n_max, seed=seed,
        output_dir=output_dir, options=options,
    )


# ---------------------------------------------------------------------------
# Reports


@dataclass
class CheckResult:
    name: str
    passed: bool
    measured: float
    tolerance: float

    def to_json_dict(self) -> dict:
        def finite_or_none(v):
            return v if isinstance(v, float) and math.isfinite(v) else None

        return {
            "name": self.name,
            "passed": bool(self.passed),
            "measured": finite_or_none(self.measured),
            "tolerance": finite_or_none(self.tolerance),
        }


@dataclass
class Report:
    subcommand: str
    config_echo: dict
    checks: list[CheckResult]
    seed: int

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> str:
        doc = {
            "subcommand": self.subcommand,
            "config": self.config_echo,
            "checks": [c.to_json_dict() for c in self.checks],
            "provenance": {"version": __version__, "seed": self.seed},
            "passed": self.passed,
        }
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _config_echo(cfg: ExperimentConfig) -> dict:
    echo = {k: v for k, v in cfg.raw.items() if k != "output_dir"}
    echo["seeds"] = cfg.seed
    return echo


def _write_rows_csv(path: Path, header: str, rows) -> None:
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(f"{v:.17g}" if isinstance(v, float) else str(v) for v in row) + "\n")


# ---------------------------------------------------------------------------
# Subcommand handlers (each returns the checks and writes its artifacts)


def _cmd_envelope(cfg: ExperimentConfig, outdir: Path) -> list[CheckResult]:
    res = envelope.nisio_dyadic(cfg.family, cfg.t, cfg.initial, cfg.tol_rel, cfg.n_max, cfg.norm)
    passed, margin = envelope.check_upper_bound(cfg.family, cfg.t, res, cfg.initial, cfg.norm)
    (outdir / "envelope_result.json").write_text(res.to_json())
    funcspace.write_csv(res.final, outdir / "final.csv")
    _write_rows_csv(outdir / "convergence.csv", "level,steps,h,increment_lp,norm_lp", res.convergence_rows(cfg.t))
    tol = 1e-6 * (1.0 + cfg.initial.max_abs())
    # compound Poisson one-steps compose exactly (shared jump powers), so the
    # dyadic iterates increase to roundoff; the Gaussian steps resample between
    # sub-steps and are monotone only up to the O(dx^2) interpolation commutator
    if isinstance(cfg.family, CompoundPoisson):
        drop_tol = -1e-9
    else:
        drop_tol = -(1e-9 + 4.0 * cfg.grid.dx**2 * cfg.initial.max_abs())
    worst_drop = min(res.min_increments) if res.min_increments else 0.0
    return [
        CheckResult("upper_bound_certificate", passed, margin, tol),
        CheckResult("dyadic_monotone_increase", worst_drop >= drop_tol, worst_drop, drop_tol),
    ]


def _cmd_generator(cfg: ExperimentConfig, outdir: Path) -> list[CheckResult]:
    opts = cfg.options.get("generator", {})
    h0 = _number(opts, "h0", "generator.", 0.1)
    k_steps = int(_number(opts, "k_steps", "generator.", 6))
    est = calculus.generator_fd(cfg.family, cfg.initial, h0, k_steps, cfg.envelope_params())
    _write_rows_csv(outdir / "generator.csv", "h,error_lp", list(zip(est.h_schedule, est.errors_vs_B)))
    decreasing = all(b < a for a, b in zip(est.errors_vs_B, est.errors_vs_B[1:]))
    final_ratio = est.errors_vs_B[-1] / max(est.errors_vs_B[0], 1e-300)
    return [
        CheckResult("generator_errors_decreasing", decreasing, final_ratio, 1.0),
        CheckResult("generator_final_error_ratio", final_ratio <= 0.1, final_ratio, 0.1),
    ]


def _cmd_derivative(cfg: ExperimentConfig, outdir: Path) -> list[CheckResult]:
    opts = cfg.options.get("derivative", {})
    quad_nodes = int(_number(opts, "quad_nodes", "derivative.", 33))
    identity_tol = _number(opts, "identity_tol", "derivative.", 5e-2)
    integral_tol = _number(opts, "integral_tol", "derivative.", 2e-2)
    params = cfg.envelope_params()
    report = calculus.derivative_identity_check(cfg.family, cfg.t, cfg.initial, params, identity_tol=identity_tol)
    deviation = calculus.integral_identity_check(cfg.family, cfg.t, cfg.initial, quad_nodes, params)
    doc = {"t": cfg.t, "gaps": report.gaps(), "integral_deviation": deviation,
           "identity_tol": identity_tol, "integral_tol": integral_tol,
           "pass": bool(report.passed and deviation <= integral_tol)}
    (outdir / "derivative_report.json").write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    worst_gap = max(report.gaps().values())
    return [
        CheckResult("derivative_identity_gaps", report.passed, worst_gap, identity_tol),
        CheckResult("integral_identity_deviation", deviation <= integral_tol, deviation, integral_tol),
    ]


def _cmd_compare_hjb(cfg: ExperimentConfig, outdir: Path) -> list[CheckResult]:
    if not isinstance(cfg.family, GaussianDrift):
        raise ConfigurationError("key `family.family`: compare-hjb needs gaussian_drift")
    opts = cfg.options.get("compare", {})
    tol = _number(opts, "tolerance", "compare.", 5e-2)
    margin = _number(opts, "boundary_margin", "compare.", 0.05)
    cfl = _number(cfg.options.get("hjb", {}), "cfl", "hjb.", 0.9)
    res = envelope.nisio_dyadic(cfg.family, cfg.t, cfg.initial, cfg.tol_rel, cfg.n_max, cfg.norm)
    oracle = reference.hjb_upwind(cfg.initial, cfg.t, cfg.family.lambda_set.sup_abs, cfl=cfl)
    comp = reference.compare(res.final, oracle, cfg.norm, margin)
    (outdir / "comparison.json").write_text(
        json.dumps(comp.to_json_dict(margin), sort_keys=True, indent=2) + "\n")
    funcspace.write_csv(res.final, outdir / "envelope.csv")
    funcspace.write_csv(oracle, outdir / "hjb.csv")
    return [CheckResult("envelope_vs_hjb_rel_l2", comp.rel_err <= tol, comp.rel_err, tol)]


def _cmd_compare_ode(cfg: ExperimentConfig, outdir: Path) -> list[CheckResult]:
    if not isinstance(cfg.family, CompoundPoisson):
        raise ConfigurationError("key `family.family`: compare-ode needs compound_poisson")
    opts = cfg.options.get("compare", {})
    tol = _number(opts, "tolerance", "compare.", 1e-2)
    margin = _number(opts, "boundary_margin", "compare.", 0.05)
    dt = _number(cfg.options.get("ode", {}), "dt", "ode.", 1e-3)
    res = envelope.nisio_dyadic(cfg.family, cfg.t, cfg.initial, cfg.tol_rel, cfg.n_max, cfg.norm)
    oracle = reference.ode_reference(cfg.family, cfg.initial, cfg.t, dt)
    comp = reference.compare(res.final, oracle, cfg.norm, margin)
    (outdir / "comparison.json").write_text(
        json.dumps(comp.to_json_dict(margin), sort_keys=True, indent=2) + "\n")
    funcspace.write_csv(res.final, outdir / "envelope.csv")
    funcspace.write_csv(oracle, outdir / "ode.csv")
    return [CheckResult("envelope_vs_ode_rel_lp", comp.rel_err <= tol, comp.rel_err, tol)]


def _default_epsilons(grid: funcspace.Grid) -> list[float]:
    eps, out = 0.1, []
    while eps >= 4.0 * grid.dx and len(out) < 6:
        out.append(eps)
        eps /= 10.0
    # at least two decades, otherwise there is no ratio to check
    if len(out) < 2:
        raise ConfigurationError(
            f"key `grid.n_nodes`: grid resolves {len(out)} epsilon decade(s), need >= 2 "
            f"(dx = {grid.dx:g}, smallest resolvable epsilon is 4*dx)")
    return out


def _cmd_counterexample(cfg: ExperimentConfig, outdir: Path) -> list[CheckResult]:
    opts = cfg.options.get("counterexample", {})
    t = _number(opts, "t", "counterexample.", min(cfg.t, 0.5))
    epsilons = opts.get("epsilons", _default_epsilons(cfg.grid))
    table = reference.counterexample_scan(cfg.grid, cfg.norm.p, t, list(epsilons))
    _write_rows_csv(outdir / "scan.csv", "epsilon,norm_lp", table)
    ratios = [b / a for (_, a), (_, b) in zip(table, table[1:])]
    worst = min(ratios) if ratios else math.inf
    return [CheckResult("counterexample_norm_growth", all(r >= 1.5 for r in ratios), worst, 1.5)]


def _cmd_verify(cfg: ExperimentConfig, outdir: Path, scale: str) -> list[CheckResult]:
    report = verify_suite(scale, seed=cfg.seed)
    probes = sampled_probes(scale, seed=cfg.seed)
    (outdir / "probes.json").write_text(json.dumps(probes, sort_keys=True, indent=2) + "\n")
    checks = list(report.checks)
    # sublinear + bounded gives a global Lipschitz cap 2||S(t)||_1, and the
    # operator norm is dominated by the upper-bound factor exp(qt lam^2/(2p))
    lip_cap = 2.0 * math.exp(0.25 / 2.0)
    ok = bool(probes["pass"]) and probes["L_estimate"] <= lip_cap
    checks.append(CheckResult("calculus.sampled_probes", ok, probes["L_estimate"], lip_cap))
    return checks


def sampled_probes(scale: str = "small", seed: int = 0) -> dict:
    """Lipschitz / directional-gap / growth probe report for the drift family."""
    grid = make_grid(-8.0, 8.0, 257 if scale == "small" else 1025)
    norm = PNorm(2.0)
    fam = GaussianDrift(LambdaInterval(-1.0, 1.0))
    params = envelope.EnvelopeParams(norm=norm, tol_rel=1e-4, n_max=4)
    t = 0.25
    f0 = funcspace.bump(grid, radius=1.0)
    lip = calculus.lipschitz_probe(fam, t, f0, 1.0, 8 if scale == "small" else 24, params, seed=seed)
    probe = calculus.directional_derivative(
        fam, t, f0, kernels.sup_generator(fam, f0), calculus.geometric_schedule(0.1, 3), params)
    M, omega = calculus.growth_bound_estimate(fam, [0.125, 0.25, 0.5], [f0], params)
    passed = lip.lemma_ok and probe.quotient_monotone and math.isfinite(lip.L)
    return {
        "t": t,
        "gap": probe.gap,
        "L_estimate": lip.L,
        "M": M,
        "omega": omega,
        "pass": bool(passed),
    }


def _dispatch(cfg: ExperimentConfig, subcommand: str, outdir: Path, scale: str) -> list[CheckResult]:
    if subcommand == "envelope":
        return _cmd_envelope(cfg, outdir)
    if subcommand == "generator":
        return _cmd_generator(cfg, outdir)
    if subcommand == "derivative":
        return _cmd_derivative(cfg, outdir)
    if subcommand == "compare-hjb":
        return _cmd_compare_hjb(cfg, outdir)
    if subcommand == "compare-ode":
        return _cmd_compare_ode(cfg, outdir)
    if subcommand == "counterexample":
        return _cmd_counterexample(cfg, outdir)
    return _cmd_verify(cfg, outdir, scale)


def _validate_for_subcommand(cfg: ExperimentConfig, subcommand: str) -> None:
    if subcommand == "envelope" and isinstance(cfg.family, PureShift):
        raise ConfigurationError(
            "key `family.family`: no envelope bound available for pure_shift; use `counterexample`")
    if (
        subcommand == "envelope"
        and isinstance(cfg.family, GaussianDrift)
        and cfg.norm.p == 1.0
        and cfg.family.lambda_set.sup_abs > 0.0
    ):
        raise ConfigurationError(
            "key `norm.p`: the gaussian_drift upper bound needs p > 1 (conjugate exponent is infinite)")
    if subcommand == "compare-hjb" and not isinstance(cfg.family, GaussianDrift):
        raise ConfigurationError("key `family.family`: compare-hjb needs gaussian_drift")
    if subcommand == "compare-ode" and not isinstance(cfg.family, CompoundPoisson):
        raise ConfigurationError("key `family.family`: compare-ode needs compound_poisson")
    if subcommand == "counterexample":
        opts = cfg.options.get("counterexample", {})
        t = _number(opts, "t", "counterexample.", min(cfg.t, 0.5))
        if not (0.0 < t < 1.0):
            raise ConfigurationError(f"key `counterexample.t` must lie in (0, 1), got {t}")
        epsilons = opts.get("epsilons", _default_epsilons(cfg.grid))
        if any(e < 4.0 * cfg.grid.dx for e in epsilons):
            needed = math.ceil((cfg.grid.upper - cfg.grid.lower) / (min(epsilons) / 4.0)) + 1
            raise ConfigurationError(
                f"key `counterexample.epsilons`: smallest epsilon needs dx <= {min(epsilons) / 4.0:g}; "
                f"use at least {needed} nodes")


def run(subcommand: str, config_path, out_dir=None, seed=None, scale: str = "small") -> int:
    """Execute one subcommand; returns the process exit code (0/1/2)."""
    if subcommand not in SUBCOMMANDS:
        print(f"configuration error: unknown subcommand {subcommand!r}", file=sys.stderr)
        return 2
    try:
        cfg = load_config(config_path)
        if out_dir is not None:
            cfg.output_dir = str(out_dir)
        if seed is not None:
            cfg.seed = int(seed)
        _validate_for_subcommand(cfg, subcommand)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2

    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    checks = _dispatch(cfg, subcommand, outdir, scale)
    elapsed_ms = (time.perf_counter() - t0) * 1000.0

    report = Report(subcommand=subcommand, config_echo=_config_echo(cfg), checks=checks, seed=cfg.seed)
    (outdir / "report.json").write_text(report.to_json())
    (outdir / "timings.json").write_text(
        json.dumps({"stage_ms": {subcommand: elapsed_ms}}, sort_keys=True, indent=2) + "\n")
    n_pass = sum(1 for c in checks if c.passed)
    print(f"[{subcommand}] {'PASS' if report.passed else 'FAIL'} ({n_pass}/{len(checks)} checks) -> {outdir}")
    return 0 if report.passed else 1


# ---------------------------------------------------------------------------
# Verification suite


def monotone_stepper_violation(stepper, grid: funcspace.Grid, rng, pairs: int, dt: float, steps: int) -> float:
    """Worst order violation of an explicit stepper on random ordered pairs.

    The stepper maps (samples, dt, dx) to new samples; a monotone scheme
    keeps f0 <= g0 ordered, so the returned violation is <= 0 up to roundoff.
    """
    worst = -math.inf
    for _ in range(pairs):
        f = kernels._heat_convolve_arr(rng.standard_normal(grid.n_nodes), grid.dx**2, grid.dx)
        g = f + np.abs(kernels._heat_convolve_arr(rng.standard_normal(grid.n_nodes), grid.dx**2, grid.dx))
        for _ in range(steps):
            f = stepper(f, dt, grid.dx)
            g = stepper(g, dt, grid.dx)
        worst = max(worst, float(np.max(f - g)))
    return worst


def _random_smooth(grid: funcspace.Grid, rng) -> GridFunction:
    arr = kernels._heat_convolve_arr(rng.standard_normal(grid.n_nodes), grid.dx**2, grid.dx)
    return GridFunction(grid, arr)


def verify_suite(scale: str = "small", seed: int = 0) -> Report:
    """Run every module's invariant checks at the given scale with fixed seeds."""
    if scale not in ("small", "full"):
        raise ConfigurationError(f"scale must be small or full, got {scale!r}")
    n_nodes = 257 if scale == "small" else 1025
    reps = 20 if scale == "small" else 100
    grid = make_grid(-8.0, 8.0, n_nodes)
    norm = PNorm(2.0)
    rng = np.random.default_rng(seed)
    gauss = GaussianDrift(LambdaInterval(-1.0, 1.0))
    cp = CompoundPoisson(LambdaValues((0.0, 1.0)), JumpDistribution(((1.0, 1.0),)))
    f0 = funcspace.bump(grid, radius=1.0)
    checks: list[CheckResult] = []

    def add(name: str, measured: float, tol: float, passed=None):
        ok = (measured <= tol) if passed is None else passed
        checks.append(CheckResult(name, bool(ok), float(measured), float(tol)))

    # funcspace: interpolation order preservation and linearity
    worst = -math.inf
    lin = 0.0
    for _ in range(reps):
        f = _random_smooth(grid, rng)
        g = f + abs(_random_smooth(grid, rng))
        d = rng.uniform(-2, 2)
        worst = max(worst, float(np.max(
            funcspace.interp_shift(f, d).samples - funcspace.interp_shift(g, d).samples)))
        a, b = rng.uniform(-2, 2, size=2)
        combo = funcspace.interp_shift(a * f + b * g, d)
        split = a * funcspace.interp_shift(f, d) + b * funcspace.interp_shift(g, d)
        scale_arr = (abs(a) * funcspace.interp_shift(abs(f), d)
                     + abs(b) * funcspace.interp_shift(abs(g), d)).samples
        lin = max(lin, float(np.max(np.abs(combo.samples - split.samples) / (4.0 * np.spacing(scale_arr + 1e-300)))))
    add("funcspace.interp_shift_monotone", worst, 0.0)
    add("funcspace.interp_shift_linear_ulps", lin, 4.0)

    f = _random_smooth(grid, rng)
    c = 3.7
    add("funcspace.norm_scaling",
        abs(lp_norm(c * f, norm) - abs(c) * lp_norm(f, norm)) / max(abs(c) * lp_norm(f, norm), 1e-300), 1e-12)
    fs = [_random_smooth(grid, rng) for _ in range(5)]
    m_all = pointwise_max(fs)
    perm = pointwise_max([fs[i] for i in (3, 1, 4, 0, 2)])
    add("funcspace.max_permutation_bitexact", 0.0 if np.array_equal(m_all.samples, perm.samples) else 1.0, 0.0)
    drop = pointwise_max(fs[:-1])
    add("funcspace.max_least_upper_bound", float(np.max(drop.samples - m_all.samples)), 0.0)

    # kernels: linearity, monotonicity, mass conservation, domination, C flow
    # (mass check: interior margin of 4 units must exceed the operator reach,
    # so the compound Poisson family here uses quarter-unit jumps)
    cp_small = CompoundPoisson(LambdaValues((0.0, 1.0)), JumpDistribution(((0.25, 1.0),)))
    lin = worst = mass = 0.0
    for fam, lam, t in ((gauss, 0.7, 0.25), (cp_small, 1.0, 0.25)):
        fa, fb = _random_smooth(grid, rng), _random_smooth(grid, rng)
        a, b = 1.3, -0.4
        combo = kernels.apply_member(fam, lam, t, a * fa + b * fb)
        split = a * kernels.apply_member(fam, lam, t, fa) + b * kernels.apply_member(fam, lam, t, fb)
        lin = max(lin, lp_norm(combo - split, norm) / max(lp_norm(split, norm), 1e-300))
        g = fa + abs(_random_smooth(grid, rng))
        worst = max(worst, float(np.max(
            kernels.apply_member(fam, lam, t, fa).samples - kernels.apply_member(fam, lam, t, g).samples)))
        const = GridFunction(grid, np.ones(grid.n_nodes))
        moved = kernels.apply_member(fam, lam, t, const)
        sl = grid.interior_slice(0.25)
        mass = max(mass, float(np.max(np.abs(moved.samples[sl] - 1.0))))
    add("kernels.apply_member_linear", lin, 1e-10)
    add("kernels.apply_member_monotone", worst, 0.0)
    add("kernels.mass_conservation_interior", mass, 1e-10)

    dom = -math.inf
    for fam in (gauss, cp):
        h = 0.25
        bound = kernels.upper_bound_C(fam, h, f0, norm)
        lams = fam.lambda_set.samples(5) if isinstance(fam.lambda_set, LambdaInterval) else fam.lambda_set.values
        for lam in lams:
            dom = max(dom, float(np.max(kernels.apply_member(fam, float(lam), h, f0).samples - bound.samples)))
    add("kernels.member_below_C", dom, 1e-9)

    flow = 0.0
    for fam in (gauss, cp):
        two = kernels.upper_bound_C(fam, 0.1, kernels.upper_bound_C(fam, 0.15, f0, norm), norm)
        one = kernels.upper_bound_C(fam, 0.25, f0, norm)
        flow = max(flow, lp_norm(two - one, norm) / max(lp_norm(one, norm), 1e-300))
    add("kernels.C_flow_property", flow, 1e-6)

    coarse_grid, fine_grid = make_grid(-8.0, 8.0, 257), make_grid(-8.0, 8.0, 513)
    errs = []
    for g_ in (coarse_grid, fine_grid):
        fb = funcspace.bump(g_, radius=1.0)
        lhs = kernels.apply_member(gauss, 0.5, 0.3, fb)
        rhs = kernels.apply_member(gauss, 0.5, 0.18, kernels.apply_member(gauss, 0.5, 0.12, fb))
        errs.append(lp_norm(lhs - rhs, norm))
    add("kernels.member_semigroup_refines", errs[1] / max(errs[0], 1e-300), 1.0)

    # supremum generator lands in L^p (finite norm) for smooth compact data
    add("kernels.sup_generator_in_lp", 0.0,
        1.0, passed=math.isfinite(lp_norm(kernels.sup_generator(gauss, f0), norm)))

    # upper-bound mass outside an enlarged support vanishes like o(h)
    decay = []
    for h in (0.2, 0.1, 0.05):
        bound = kernels.upper_bound_C(gauss, h, f0, norm)
        outside = bound.samples.copy()
        outside[np.abs(grid.nodes()) <= 2.0] = 0.0
        decay.append(lp_norm(GridFunction(grid, outside), norm) ** norm.p / h)
    add("kernels.C_boundary_mass_decay", 0.0, 1.0, passed=decay[2] < decay[1] < decay[0])

    # envelope: monotone/convex/homogeneous, refinement, no exceedance
    worst = conv = hom = 0.0
    for _ in range(reps):
        fa = _random_smooth(grid, rng)
        fb = fa + abs(_random_smooth(grid, rng))
        worst = max(worst, float(np.max(
            envelope.step_J(gauss, 0.2, fa).samples - envelope.step_J(gauss, 0.2, fb).samples)))
        alpha = rng.uniform(0.1, 0.9)
        mix = envelope.step_J(gauss, 0.2, alpha * fa + (1 - alpha) * fb)
        hull = alpha * envelope.step_J(gauss, 0.2, fa) + (1 - alpha) * envelope.step_J(gauss, 0.2, fb)
        conv = max(conv, float(np.max(mix.samples - hull.samples)))
        cpos = rng.uniform(0.2, 3.0)
        scaled = envelope.step_J(gauss, 0.2, cpos * fa)
        hom = max(hom, lp_norm(scaled - cpos * envelope.step_J(gauss, 0.2, fa), norm)
                  / max(lp_norm(scaled, norm), 1e-300))
    add("envelope.step_monotone", worst, 0.0)
    add("envelope.step_convex", conv, 1e-10)
    add("envelope.step_homogeneous", hom, 1e-10)

    worst = -math.inf
    for _ in range(reps):
        times = np.sort(rng.choice(np.arange(1, 16), size=4, replace=False)) * (0.5 / 16.0)
        pi1 = envelope.Partition((0.0, *times.tolist()))
        extra = np.sort(rng.choice(np.arange(1, 16), size=3, replace=False)) * (0.5 / 16.0)
        pi2 = pi1.refine_with((0.0, *extra.tolist()))
        v1 = envelope.apply_partition(cp, pi1, f0)
        v2 = envelope.apply_partition(cp, pi2, f0)
        worst = max(worst, float(np.max(v1.samples - v2.samples)))
    add("envelope.refinement_monotone_cp", worst, 1e-9)

    res = envelope.nisio_dyadic(gauss, 0.5, f0, 1e-4, 6, norm)
    worst = -math.inf
    for _ in range(reps):
        k = int(rng.integers(1, 8))
        times = np.sort(rng.uniform(0.0, 0.5, size=k))
        pi = envelope.Partition((0.0, *[float(v) for v in times if v > 1e-3], 0.5))
        val = envelope.apply_partition(gauss, pi, f0)
        worst = max(worst, float(np.max(val.samples - res.final.samples)))
    add("envelope.random_partition_no_exceedance", worst, 1e-4 * lp_norm(f0, norm))

    single = GaussianDrift(LambdaValues((0.4,)))
    direct = kernels.apply_member(single, 0.4, 0.3, f0)
    add("envelope.singleton_step_bitexact",
        0.0 if np.array_equal(envelope.step_J(single, 0.3, f0).samples, direct.samples) else 1.0, 0.0)

    # calculus: quotient orderings
    params = envelope.EnvelopeParams(norm=norm, tol_rel=1e-4, n_max=4)
    schedule = calculus.geometric_schedule(0.2, 3)
    worst = gap = 0.0
    for _ in range(max(3, reps // 4)):
        x = _random_smooth(grid, rng)
        y = _random_smooth(grid, rng)
        probe = calculus.directional_derivative(gauss, 0.25, x, y, schedule, params)
        worst = max(worst, probe.monotonicity_violation)
        gap = max(gap, float(np.max(probe.minus.samples - probe.plus.samples)))
    add("calculus.plus_quotient_monotone", worst, 1e-9)
    add("calculus.minus_below_plus", gap, 1e-9)

    q1 = (calculus._S(gauss, 0.2, f0, params, level=3) - f0) / 0.2
    c = 2.5
    qc = (calculus._S(gauss, 0.2, c * f0, params, level=3) - c * f0) / 0.2
    add("calculus.quotient_scaling",
        lp_norm(qc - c * q1, norm) / max(lp_norm(qc, norm), 1e-300), 1e-10)

    # reference: monotone upwind scheme, interior constants, scan growth
    viol = monotone_stepper_violation(
        lambda u, dt, dx: reference.hjb_step(u, dt, dx, 1.0), grid, rng, max(5, reps // 4),
        dt=0.4 * grid.dx**2, steps=20)
    add("reference.hjb_monotone", viol, 1e-12)
    const = GridFunction(grid, np.ones(grid.n_nodes))
    sol = reference.hjb_upwind(const, 0.01, 1.0)
    sl = grid.interior_slice(0.25)
    add("reference.hjb_constants_interior", float(np.max(np.abs(sol.samples[sl] - 1.0))), 1e-12)

    scan_grid = make_grid(-2.0, 2.0, 8001 if scale == "small" else 80001)
    eps_list = [0.1, 0.01] if scale == "small" else [0.1, 0.01, 0.001]
    table = reference.counterexample_scan(scan_grid, 2.0, 0.5, eps_list)
    add("reference.scan_norms_increase", 0.0, 1.0,
        passed=all(b > a for (_, a), (_, b) in zip(table, table[1:])))

    return Report(subcommand="verify", config_echo={"scale": scale}, checks=checks, seed=seed)


# ---------------------------------------------------------------------------
# Entry point


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(
        prog="nisioenv",
        description="Semigroup envelopes of convolution families on a discretized L^p line.",
    )
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", required=True, help="JSON experiment configuration")
    parser.add_argument("--out", default=None, help="output directory (overrides config)")
    parser.add_argument("--seed", type=int, default=None, help="seed (overrides config)")
    parser.add_argument("--scale", choices=("small", "full"), default="small")
    args = parser.parse_args(argv)
    sys.exit(run(args.subcommand, args.config, out_dir=args.out, seed=args.seed, scale=args.scale))


if __name__ == "__main__":
    main()
