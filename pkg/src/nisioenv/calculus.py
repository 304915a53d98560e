"""Differential structure of the envelope, evaluated numerically.

Generator difference quotients against the closed-form supremum generator,
one-sided directional derivatives of the convex envelope operator, the
derivative identity (time derivative equals the directional derivative in
the generator direction, from either side), the integral identity recovering
S(t)f - f, and sampled Lipschitz/growth probes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .envelope import EnvelopeParams, Partition, apply_partition, nisio_dyadic
from .errors import UsageError
from .funcspace import GridFunction, lp_norm
from .kernels import KernelFamily, heat_convolve, sup_generator
from .reference import compare

__all__ = [
    "GeneratorEstimate",
    "DerivativeProbe",
    "LipschitzProbe",
    "geometric_schedule",
    "generator_fd",
    "directional_derivative",
    "derivative_identity_check",
    "IdentityReport",
    "integral_identity_check",
    "lipschitz_probe",
    "growth_bound_estimate",
    "ball_samples",
]

# Nodewise slack for the convexity-driven orderings of difference quotients;
# the underlying maps are convex exactly, so only roundoff accumulates.
QUOTIENT_TOL = 1e-9


def geometric_schedule(h0: float = 0.1, halvings: int = 6) -> list[float]:
    """Strictly decreasing step schedule h0, h0/2, ..., h0/2^halvings."""
    if h0 <= 0 or halvings < 0:
        raise UsageError("schedule needs h0 > 0 and halvings >= 0")
    return [h0 * 0.5**k for k in range(halvings + 1)]


def _S(
    fam: KernelFamily,
    t: float,
    f: GridFunction,
    params: EnvelopeParams,
    level: int | None = None,
) -> GridFunction:
    """Envelope evaluation; a fixed dyadic level when comparisons must match."""
    if t == 0.0:
        return GridFunction(f.grid, f.samples.copy())
    if level is not None:
        return apply_partition(fam, Partition.dyadic(t, level), f, cp_interior=params.cp_interior)
    res = nisio_dyadic(
        fam, t, f, params.tol_rel, params.n_max, params.norm,
        n_min=params.n_min, cp_interior=params.cp_interior,
    )
    return res.final


# ---------------------------------------------------------------------------
# Generator difference quotients


@dataclass
class GeneratorEstimate:
    """Table of quotients (S(h)f - f)/h along a halving h-schedule.

    errors_vs_B holds the interior L^p distance to the closed-form supremum
    generator; extrapolated is the first-order Richardson combination of the
    two smallest-h quotients.
    """

    h_schedule: list[float]
    quotients: list[GridFunction]
    errors_vs_B: list[float]
    extrapolated: GridFunction


def generator_fd(
    fam: KernelFamily,
    f: GridFunction,
    h0: float,
    k_steps: int,
    envelope_params: EnvelopeParams,
) -> GeneratorEstimate:
    """Difference quotients of the envelope at f against the supremum generator.

    Each S(h)f is a dyadic envelope run whose time step is at most h/4. A
    non-decreasing tail in the error table is reported, never raised.
    """
    params = envelope_params
    schedule = geometric_schedule(h0, k_steps)
    target = sup_generator(fam, f)
    quotients: list[GridFunction] = []
    errors: list[float] = []
    for h in schedule:
        res = nisio_dyadic(
            fam, h, f, params.tol_rel, max(params.n_max, 2), params.norm,
            n_min=2, cp_interior=params.cp_interior,
        )
        q = (res.final - f) / h
        quotients.append(q)
        errors.append(compare(q, target, params.norm, params.boundary_margin).abs_err)
    extrapolated = 2.0 * quotients[-1] - quotients[-2] if len(quotients) >= 2 else quotients[-1]
    return GeneratorEstimate(schedule, quotients, errors, extrapolated)


# ---------------------------------------------------------------------------
# Directional derivatives


@dataclass
class DerivativeProbe:
    """One-sided directional derivative estimates of the envelope at x.

    plus/minus are the smallest-h difference quotients from above/below; the
    convexity of the computed operator forces the plus quotients to be
    nodewise non-increasing as h decreases (and minus non-decreasing), which
    is recorded in quotient_monotone / monotonicity_violation.
    """

    t: float
    x: GridFunction
    y: GridFunction
    plus: GridFunction | None
    minus: GridFunction | None
    gap: float
    quotient_monotone: bool
    monotonicity_violation: float
    quotients_plus: list[GridFunction] = field(default_factory=list)
    quotients_minus: list[GridFunction] = field(default_factory=list)


def _side_quotients(
    fam: KernelFamily,
    t: float,
    x: GridFunction,
    y: GridFunction,
    h_schedule: list[float],
    params: EnvelopeParams,
    level: int | None,
    sign: float,
) -> tuple[list[GridFunction], float]:
    """Quotients (S(t)(x + sign*h*y) - S(t)x)/(sign*h) plus worst ordering slack."""
    base = _S(fam, t, x, params, level=level)
    quotients = []
    for h in h_schedule:
        moved = _S(fam, t, x + (sign * h) * y, params, level=level)
        quotients.append((moved - base) / (sign * h))
    worst = 0.0
    for prev, nxt in zip(quotients, quotients[1:]):
        # plus side decreases toward the inf, minus side increases toward the sup
        drop = np.max(sign * (nxt.samples - prev.samples))
        worst = max(worst, float(drop))
    return quotients, worst


def directional_derivative(
    fam: KernelFamily,
    t: float,
    x: GridFunction,
    y: GridFunction,
    h_schedule: list[float],
    envelope_params: EnvelopeParams,
    side: str = "both",
) -> DerivativeProbe:
    """Gateaux derivative probe of the envelope at x in direction y.

    side selects which family of quotients to evaluate ("plus", "minus" or
    "both"); the gap needs both. At t = 0 the envelope is the identity and
    both derivatives are y exactly.
    """
    if side not in ("plus", "minus", "both"):
        raise UsageError(f"side must be plus, minus or both, got {side!r}")
    if any(b >= a for a, b in zip(h_schedule, h_schedule[1:])) or not h_schedule:
        raise UsageError("h_schedule must be nonempty and strictly decreasing")
    params = envelope_params
    if t == 0.0:
        ycopy = GridFunction(y.grid, y.samples.copy())
        return DerivativeProbe(
            t=0.0, x=x, y=y, plus=ycopy, minus=ycopy, gap=0.0,
            quotient_monotone=True, monotonicity_violation=0.0,
            quotients_plus=[ycopy], quotients_minus=[ycopy],
        )
    level = params.n_max
    plus = minus = None
    q_plus: list[GridFunction] = []
    q_minus: list[GridFunction] = []
    violation = 0.0
    if side in ("plus", "both"):
        q_plus, v = _side_quotients(fam, t, x, y, h_schedule, params, level, +1.0)
        plus = q_plus[-1]
        violation = max(violation, v)
    if side in ("minus", "both"):
        q_minus, v = _side_quotients(fam, t, x, y, h_schedule, params, level, -1.0)
        minus = q_minus[-1]
        violation = max(violation, v)
    gap = lp_norm(plus - minus, params.norm) if (plus is not None and minus is not None) else math.nan
    return DerivativeProbe(
        t=t, x=x, y=y, plus=plus, minus=minus, gap=gap,
        quotient_monotone=violation <= QUOTIENT_TOL,
        monotonicity_violation=violation,
        quotients_plus=q_plus, quotients_minus=q_minus,
    )


# ---------------------------------------------------------------------------
# Derivative and integral identities


@dataclass
class IdentityReport:
    """Pairwise comparison of the three realizations of d/dt S(t)f."""

    t: float
    h: float
    gap_forward_plus: float
    gap_forward_minus: float
    gap_plus_minus: float
    tol: float
    passed: bool

    def gaps(self) -> dict[str, float]:
        return {
            "forward_vs_plus": self.gap_forward_plus,
            "forward_vs_minus": self.gap_forward_minus,
            "plus_vs_minus": self.gap_plus_minus,
        }


def derivative_identity_check(
    fam: KernelFamily,
    t: float,
    f: GridFunction,
    envelope_params: EnvelopeParams,
    h_schedule: list[float] | None = None,
    identity_tol: float = 5e-2,
) -> IdentityReport:
    """Compare the forward time quotient of the envelope with both one-sided
    directional derivatives in the supremum-generator direction.

    All three limits coincide for f in the generator's domain; the check
    passes when the pairwise interior L^p distances, relative to the largest
    of the three norms, stay below identity_tol.
    """
    params = envelope_params
    schedule = h_schedule or geometric_schedule()
    h = schedule[-1]
    level = params.n_max
    target_dir = sup_generator(fam, f)

    st = _S(fam, t, f, params, level=level)
    st_h = _S(fam, t + h, f, params, level=level)
    forward = (st_h - st) / h

    probe = directional_derivative(fam, t, f, target_dir, schedule, params, side="both")
    plus, minus = probe.plus, probe.minus

    scale = max(
        lp_norm(forward, params.norm),
        lp_norm(plus, params.norm),
        lp_norm(minus, params.norm),
        1e-14,
    )
    margin = params.boundary_margin
    g_fp = compare(forward, plus, params.norm, margin).abs_err / scale
    g_fm = compare(forward, minus, params.norm, margin).abs_err / scale
    g_pm = compare(plus, minus, params.norm, margin).abs_err / scale
    passed = max(g_fp, g_fm, g_pm) <= identity_tol
    return IdentityReport(t, h, g_fp, g_fm, g_pm, identity_tol, passed)


def _simpson_weights(n_nodes: int, t: float) -> np.ndarray:
    if n_nodes < 3 or n_nodes % 2 == 0:
        raise UsageError(f"composite Simpson needs an odd node count >= 3, got {n_nodes}")
    w = np.ones(n_nodes)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (t / (n_nodes - 1)) / 3.0


def integral_identity_check(
    fam: KernelFamily,
    t: float,
    f: GridFunction,
    quad_nodes: int,
    envelope_params: EnvelopeParams,
    h_dir: float | None = None,
) -> float:
    """Relative deviation of S(t)f - f from the time integral of the
    directional derivative S'_+(s, f) applied to the supremum generator.

    The integral runs over composite Simpson nodes in [0, t]; each integrand
    is the smallest-h plus quotient at a fixed dyadic level. Returns 0 when
    ||S(t)f - f||_p is below 1e-12.
    """
    params = envelope_params
    if h_dir is None:
        h_dir = geometric_schedule()[-1]
    weights = _simpson_weights(quad_nodes, t)
    level = params.n_max
    direction = sup_generator(fam, f)

    acc = np.zeros(f.grid.n_nodes)
    for j in range(quad_nodes):
        s = t * j / (quad_nodes - 1)
        if s == 0.0:
            integrand = direction
        else:
            base = _S(fam, s, f, params, level=level)
            moved = _S(fam, s, f + h_dir * direction, params, level=level)
            integrand = (moved - base) / h_dir
        acc = acc + weights[j] * integrand.samples

    lhs = _S(fam, t, f, params, level=level) - f
    denom = lp_norm(lhs, params.norm)
    if denom < 1e-12:
        return 0.0
    residual = lhs - GridFunction(f.grid, acc)
    return lp_norm(residual, params.norm) / denom


# ---------------------------------------------------------------------------
# Sampled probes


def ball_samples(
    center: GridFunction,
    radius: float,
    count: int,
    norm,
    seed: int = 0,
) -> list[GridFunction]:
    """Deterministic smooth samples in the L^p ball around center.

    White noise is mollified by one heat step of size dx^2 (keeping samples
    grid-resolved), scaled to a uniformly drawn norm in (0, radius].
    """
    if radius <= 0 or count < 1:
        raise UsageError("ball sampling needs radius > 0 and count >= 1")
    rng = np.random.default_rng(seed)
    grid = center.grid
    out = []
    for _ in range(count):
        noise = GridFunction(grid, rng.standard_normal(grid.n_nodes))
        smooth = heat_convolve(noise, grid.dx**2)
        size = lp_norm(smooth, norm)
        rho = radius * rng.uniform(0.05, 1.0)
        out.append(center + (rho / max(size, 1e-300)) * smooth)
    return out


@dataclass
class LipschitzProbe:
    """Sampled local Lipschitz constant and the recentered-operator bound.

    lemma_ok reports whether every sampled w in B(0, r) satisfied
    ||T w|| <= (2 b / r) ||w|| for T = S(t)(.) - S(t)0, with b the largest
    sampled norm of T on the radius-r sphere through the samples.
    """

    t: float
    L: float
    b: float
    lemma_ok: bool
    lemma_slack: float


def lipschitz_probe(
    fam: KernelFamily,
    t: float,
    x0: GridFunction,
    r: float,
    samples: int,
    envelope_params: EnvelopeParams,
    seed: int = 0,
) -> LipschitzProbe:
    """Empirical Lipschitz constant of the envelope on the ball B(x0, r)."""
    if samples < 2:
        raise UsageError("lipschitz probe needs at least 2 samples")
    params = envelope_params
    norm = params.norm
    pts = ball_samples(x0, r, samples, norm, seed=seed)
    images = [_S(fam, t, y, params) for y in pts]
    L = 0.0
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            dist = lp_norm(pts[i] - pts[j], norm)
            if dist < 1e-12:
                continue
            L = max(L, lp_norm(images[i] - images[j], norm) / dist)

    zero = GridFunction(x0.grid, np.zeros(x0.grid.n_nodes))
    s_zero = _S(fam, t, zero, params)

    def T(y: GridFunction) -> GridFunction:
        return _S(fam, t, y, params) - s_zero

    offsets = [y - x0 for y in pts]
    b = 0.0
    for w in offsets:
        size = lp_norm(w, norm)
        if size < 1e-12:
            continue
        sphere = (r / size) * w
        b = max(b, lp_norm(T(sphere), norm), lp_norm(T(-1.0 * sphere), norm))
    lemma_ok = True
    slack = -math.inf
    for w in offsets:
        size = lp_norm(w, norm)
        if size < 1e-12:
            continue
        excess = lp_norm(T(w), norm) - (2.0 * b / r) * size
        slack = max(slack, excess)
        if excess > QUOTIENT_TOL:
            lemma_ok = False
    return LipschitzProbe(t=t, L=L, b=b, lemma_ok=lemma_ok, lemma_slack=slack)


def growth_bound_estimate(
    fam: KernelFamily,
    t_grid: list[float],
    f_samples: list[GridFunction],
    envelope_params: EnvelopeParams,
) -> tuple[float, float]:
    """Least-squares fit of log sup_f ||S(t)f||/||f|| against t; returns (M, omega)."""
    if len(t_grid) < 2:
        raise UsageError("growth fit needs at least two horizons")
    params = envelope_params
    norm = params.norm
    log_ratios = []
    for t in t_grid:
        ratio = 0.0
        for f in f_samples:
            base = lp_norm(f, norm)
            if base < 1e-12:
                continue
            ratio = max(ratio, lp_norm(_S(fam, t, f, params), norm) / base)
        log_ratios.append(math.log(max(ratio, 1e-300)))
    omega, log_m = np.polyfit(np.asarray(t_grid, dtype=float), np.asarray(log_ratios), 1)
    return float(math.exp(log_m)), float(omega)
