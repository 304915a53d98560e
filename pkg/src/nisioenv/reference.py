"""Independent oracles and the negative result.

* A monotone explicit upwind solver for du/dt = 1/2 u_xx + lam_bar |u_x|,
  the PDE satisfied by the drift-uncertain Gaussian envelope.
* A classical RK4 integrator for du/dt = Bu with the bounded compound
  Poisson supremum generator (the Picard-Lindeloef regime).
* The blow-up scan for the uncertain shift family, whose one-step supremum
  leaves L^p for a spreading-pole initial condition.
* Windowed comparison metrics shared by the tests and the CLI.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .envelope import step_J
from .errors import ConfigurationError, UsageError
from .funcspace import Grid, GridFunction, PNorm, lp_norm
from .kernels import CompoundPoisson, KernelFamily, LambdaInterval, PureShift, sup_generator

__all__ = [
    "hjb_upwind",
    "hjb_step",
    "ode_reference",
    "counterexample_scan",
    "pole_initial_condition",
    "compare",
    "ComparisonResult",
]


def hjb_step(u: np.ndarray, dt: float, dx: float, lambda_bar: float) -> np.ndarray:
    """One explicit Euler step of the upwind scheme, zero Dirichlet boundary.

    Diffusion by central differences; lam_bar |u_x| by the monotone upwind
    form lam_bar * max(D+ u, -D- u, 0).
    """
    out = np.zeros_like(u)
    upw = np.maximum.reduce([u[2:] - u[1:-1], u[:-2] - u[1:-1], np.zeros(u.shape[0] - 2)])
    diff = u[2:] - 2.0 * u[1:-1] + u[:-2]
    out[1:-1] = u[1:-1] + dt * (0.5 * diff / (dx * dx) + lambda_bar * upw / dx)
    return out


def hjb_upwind(f0: GridFunction, t: float, lambda_bar: float, cfl: float = 0.9) -> GridFunction:
    """Upwind finite-difference solution of the envelope PDE at time t.

    The step obeys dt <= cfl * min(dx^2, dx/lam_bar); it is chosen as
    cfl / (1/dx^2 + lam_bar/dx), which also keeps every stencil coefficient
    nonnegative, so the scheme is monotone for any cfl in (0, 1].
    """
    if t < 0:
        raise UsageError(f"time must be >= 0, got {t}")
    if lambda_bar < 0:
        raise UsageError(f"lambda_bar must be >= 0, got {lambda_bar}")
    if not (0.0 < cfl <= 1.0):
        raise UsageError(f"cfl must lie in (0, 1], got {cfl}")
    if t == 0.0:
        return GridFunction(f0.grid, f0.samples.copy())
    dx = f0.grid.dx
    dt_max = cfl / (1.0 / (dx * dx) + lambda_bar / dx)
    steps = max(1, math.ceil(t / dt_max))
    dt = t / steps
    u = f0.samples.copy()
    for _ in range(steps):
        u = hjb_step(u, dt, dx, lambda_bar)
    return GridFunction(f0.grid, u)


def ode_reference(fam: KernelFamily, f0: GridFunction, t: float, dt: float) -> GridFunction:
    """Classical RK4 for u' = Bu with the compound Poisson supremum generator.

    B is bounded and globally Lipschitz, so the trajectory is the unique
    solution of the Cauchy problem and must match the envelope.
    """
    if not isinstance(fam, CompoundPoisson):
        raise UsageError("ode_reference is defined for compound Poisson families only")
    if dt <= 0:
        raise UsageError(f"dt must be > 0, got {dt}")
    if t < 0:
        raise UsageError(f"time must be >= 0, got {t}")
    if t == 0.0:
        return GridFunction(f0.grid, f0.samples.copy())
    steps = max(1, round(t / dt))
    dt = t / steps

    def rhs(arr: np.ndarray) -> np.ndarray:
        return sup_generator(fam, GridFunction(f0.grid, arr)).samples

    u = f0.samples.copy()
    for _ in range(steps):
        k1 = rhs(u)
        k2 = rhs(u + 0.5 * dt * k1)
        k3 = rhs(u + 0.5 * dt * k2)
        k4 = rhs(u + dt * k3)
        u = u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return GridFunction(f0.grid, u)


# ---------------------------------------------------------------------------
# Blow-up scan for the uncertain shift family


def pole_initial_condition(grid: Grid, p: float, eps: float) -> GridFunction:
    """|x|^(-1/(2p)) capped at eps^(-1/(2p)), supported on [-1, 1].

    The cap keeps the function in L^p while the uncapped profile spreads to
    an unbounded supremum under the uncertain shift step.
    """
    a = 1.0 / (2.0 * p)
    x = grid.nodes()
    absx = np.abs(x)
    vals = np.where(absx >= eps, np.where(absx > 0, absx, eps) ** (-a), eps ** (-a))
    vals = np.where(absx <= 1.0, vals, 0.0)
    return GridFunction(grid, vals)


def counterexample_scan(
    grid: Grid,
    p: float,
    t: float,
    epsilons: list[float],
) -> list[tuple[float, float]]:
    """Norm table of the one-step shift supremum on the regularized pole.

    Applies the uncertain shift step J_t with drift set [-1, 1] and window
    h = t to each capped pole f_eps and returns (eps, ||J_t f_eps||_p). The
    norms must grow without bound as eps decreases; an eps the grid cannot
    resolve (eps < 4 dx) is rejected with the grid that would be required.
    """
    if not (0.0 < t < 1.0):
        raise UsageError(f"scan time must lie in (0, 1), got {t}")
    if not epsilons:
        raise UsageError("scan needs at least one epsilon")
    if any(b >= a for a, b in zip(epsilons, epsilons[1:])):
        raise UsageError("epsilons must be strictly decreasing")
    floor = 4.0 * grid.dx
    for eps in epsilons:
        if eps < floor:
            needed = math.ceil((grid.upper - grid.lower) / (eps / 4.0)) + 1
            raise ConfigurationError(
                f"epsilon = {eps} is under-resolved: need dx <= eps/4 = {eps / 4.0:g} "
                f"(grid dx = {grid.dx:g}); use at least {needed} nodes on "
                f"[{grid.lower}, {grid.upper}]"
            )
    fam = PureShift(LambdaInterval(-1.0, 1.0))
    norm = PNorm(p)
    table = []
    for eps in epsilons:
        f_eps = pole_initial_condition(grid, p, eps)
        table.append((float(eps), lp_norm(step_J(fam, t, f_eps), norm)))
    return table


# ---------------------------------------------------------------------------
# Comparison metrics


@dataclass(frozen=True)
class ComparisonResult:
    abs_err: float
    rel_err: float
    max_err: float

    def to_json_dict(self, margin: float) -> dict:
        d = asdict(self)
        d["margin"] = margin
        return d


def compare(
    a: GridFunction,
    b: GridFunction,
    norm: PNorm,
    boundary_margin: float = 0.05,
) -> ComparisonResult:
    """L^p and sup distances over the interior window.

    abs_err is the rectangle-rule L^p norm of a - b over the window, rel_err
    divides by max(||a||_p over the window, 1e-14), max_err is the sup there.
    """
    a._check_same_grid(b)
    sl = a.grid.interior_slice(boundary_margin)
    window = np.zeros(a.grid.n_nodes)

    window[sl] = a.samples[sl] - b.samples[sl]
    abs_err = lp_norm(GridFunction(a.grid, window), norm)
    max_err = float(np.max(np.abs(window[sl]))) if sl.stop > sl.start else 0.0

    window[:] = 0.0
    window[sl] = a.samples[sl]
    denom = max(lp_norm(GridFunction(a.grid, window), norm), 1e-14)
    return ComparisonResult(abs_err, abs_err / denom, max_err)
