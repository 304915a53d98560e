"""Discretized function space on a uniform 1-D grid.

The computational stand-in for L^p(R): sampled real functions on a uniform
mesh, rectangle-rule norms, shifts by linear interpolation with zero
extension, and the lattice operations (pointwise max, pointwise order) that
realize suprema of families of functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, UsageError

__all__ = [
    "Grid",
    "GridFunction",
    "PNorm",
    "make_grid",
    "lp_norm",
    "interp_shift",
    "pointwise_max",
    "pointwise_leq",
    "bump",
    "gaussian_profile",
    "ramp",
    "write_csv",
    "read_csv",
]

# Fractional parts of (shift / dx) closer than this to an integer are snapped,
# so shifts by exact node multiples are pure reindexing with no interpolation.
_SNAP_TOL = 1e-9


@dataclass(frozen=True)
class Grid:
    """Uniform mesh on [lower, upper] with nodes x_i = lower + i*dx."""

    lower: float
    upper: float
    n_nodes: int
    dx: float

    def nodes(self) -> np.ndarray:
        return self.lower + self.dx * np.arange(self.n_nodes)

    def interior_slice(self, margin: float) -> slice:
        """Index window that drops a fraction `margin` of nodes on each side."""
        k = int(math.floor(margin * self.n_nodes))
        return slice(k, self.n_nodes - k)


def make_grid(lower: float, upper: float, n_nodes: int) -> Grid:
    """Build a uniform grid; rejects degenerate intervals and n_nodes < 2."""
    if not (upper > lower):
        raise ConfigurationError(f"grid needs upper > lower, got [{lower}, {upper}]")
    if n_nodes < 2:
        raise ConfigurationError(f"grid needs n_nodes >= 2, got {n_nodes}")
    dx = (upper - lower) / (n_nodes - 1)
    return Grid(float(lower), float(upper), int(n_nodes), dx)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """A real function sampled on a Grid. Immutable; all samples finite."""

    grid: Grid
    samples: np.ndarray

    def __post_init__(self):
        arr = np.array(self.samples, dtype=float)
        if arr.shape != (self.grid.n_nodes,):
            raise UsageError(
                f"samples shape {arr.shape} does not match grid with "
                f"{self.grid.n_nodes} nodes"
            )
        if not np.all(np.isfinite(arr)):
            raise UsageError("samples must all be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "samples", arr)

    def with_samples(self, arr: np.ndarray) -> "GridFunction":
        return GridFunction(self.grid, arr)

    def _check_same_grid(self, other: "GridFunction") -> None:
        if self.grid != other.grid:
            raise UsageError("grid functions live on different grids")

    def __add__(self, other: "GridFunction") -> "GridFunction":
        self._check_same_grid(other)
        return GridFunction(self.grid, self.samples + other.samples)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        self._check_same_grid(other)
        return GridFunction(self.grid, self.samples - other.samples)

    def __mul__(self, c: float) -> "GridFunction":
        return GridFunction(self.grid, self.samples * float(c))

    __rmul__ = __mul__

    def __truediv__(self, c: float) -> "GridFunction":
        return GridFunction(self.grid, self.samples / float(c))

    def __neg__(self) -> "GridFunction":
        return GridFunction(self.grid, -self.samples)

    def __abs__(self) -> "GridFunction":
        return GridFunction(self.grid, np.abs(self.samples))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.samples)))


@dataclass(frozen=True)
class PNorm:
    """Lebesgue exponent p in [1, inf) with its conjugate q (inf when p = 1)."""

    p: float
    q: float = math.nan

    def __post_init__(self):
        if self.p < 1.0 or not math.isfinite(self.p):
            raise ConfigurationError(f"norm exponent p must be in [1, inf), got {self.p}")
        if math.isnan(self.q):
            q = math.inf if self.p == 1.0 else self.p / (self.p - 1.0)
            object.__setattr__(self, "q", q)
        elif self.p == 1.0:
            if not math.isinf(self.q):
                raise ConfigurationError("p = 1 requires q = inf")
        elif abs(1.0 / self.p + 1.0 / self.q - 1.0) > 1e-12:
            raise ConfigurationError(f"conjugate pair violated: 1/{self.p} + 1/{self.q} != 1")


def lp_norm(f: GridFunction, norm: PNorm) -> float:
    """Rectangle-rule L^p norm (sum_i |f_i|^p dx)^(1/p).

    Terms are accumulated strictly left to right so the result does not
    depend on any parallel reduction schedule.
    """
    p = norm.p
    if p == 1.0:
        terms = np.abs(f.samples) * f.grid.dx
    elif p == 2.0:
        terms = f.samples * f.samples * f.grid.dx
    else:
        terms = np.abs(f.samples) ** p * f.grid.dx
    total = sum(terms.tolist())
    if p == 1.0:
        return total
    if p == 2.0:
        return math.sqrt(total)
    return total ** (1.0 / p)


def _shift_int(arr: np.ndarray, k: int) -> np.ndarray:
    """out[i] = arr[i + k], zero where i + k falls outside the array."""
    n = arr.shape[0]
    out = np.zeros(n)
    if k >= 0:
        if k < n:
            out[: n - k] = arr[k:]
    else:
        if -k < n:
            out[-k:] = arr[: n + k]
    return out


def _interp_shift_arr(arr: np.ndarray, delta: float, dx: float) -> np.ndarray:
    s = delta / dx
    k = math.floor(s)
    frac = s - k
    if frac < _SNAP_TOL:
        frac = 0.0
    elif frac > 1.0 - _SNAP_TOL:
        k += 1
        frac = 0.0
    if frac == 0.0:
        return _shift_int(arr, k)
    # Nonnegative weights keep the map monotone and order-preserving exactly.
    return (1.0 - frac) * _shift_int(arr, k) + frac * _shift_int(arr, k + 1)


def interp_shift(f: GridFunction, delta: float) -> GridFunction:
    """Evaluate x -> f(x + delta) by linear interpolation, zero outside the grid.

    Linear and monotone in f; exact (pure reindex) when delta is a node
    multiple. Out-of-range queries are absorbed by the zero extension.
    """
    return GridFunction(f.grid, _interp_shift_arr(f.samples, float(delta), f.grid.dx))


def pointwise_max(fs: list[GridFunction]) -> GridFunction:
    """Nodewise max over a nonempty list of functions on one grid."""
    if not fs:
        raise UsageError("pointwise_max needs a nonempty list")
    grid = fs[0].grid
    for g in fs[1:]:
        if g.grid != grid:
            raise UsageError("pointwise_max arguments live on different grids")
    return GridFunction(grid, np.maximum.reduce([g.samples for g in fs]))


def pointwise_leq(f: GridFunction, g: GridFunction, tol: float = 0.0) -> tuple[bool, float]:
    """Whether f <= g + tol at every node, plus the worst excess max_i(f_i - g_i)."""
    f._check_same_grid(g)
    worst = float(np.max(f.samples - g.samples))
    return worst <= tol, worst


# ---------------------------------------------------------------------------
# Standard initial data


def bump(grid: Grid, center: float = 0.0, radius: float = 1.0, height: float = 1.0) -> GridFunction:
    """Smooth compactly supported bump, height at the center, zero for |x-c| >= r.

    The classical C_c^infinity profile exp(1 - 1/(1 - u^2)) with u = (x-c)/r.
    """
    if radius <= 0:
        raise ConfigurationError("bump radius must be positive")
    u = (grid.nodes() - center) / radius
    vals = np.zeros(grid.n_nodes)
    inside = np.abs(u) < 1.0
    with np.errstate(over="ignore", under="ignore"):
        vals[inside] = height * np.exp(1.0 - 1.0 / (1.0 - u[inside] ** 2))
    return GridFunction(grid, vals)


def gaussian_profile(grid: Grid, center: float = 0.0, sigma: float = 1.0, height: float = 1.0) -> GridFunction:
    if sigma <= 0:
        raise ConfigurationError("gaussian sigma must be positive")
    x = grid.nodes()
    return GridFunction(grid, height * np.exp(-((x - center) ** 2) / (2.0 * sigma**2)))


def ramp(grid: Grid, slope: float = 1.0, intercept: float = 0.0) -> GridFunction:
    return GridFunction(grid, slope * grid.nodes() + intercept)


# ---------------------------------------------------------------------------
# Serialization: CSV with header `x,value`, 17 significant digits per entry.


def write_csv(f: GridFunction, path) -> None:
    x = f.grid.nodes()
    with open(path, "w") as fh:
        fh.write("x,value\n")
        for xi, vi in zip(x.tolist(), f.samples.tolist()):
            fh.write(f"{xi:.17g},{vi:.17g}\n")


def read_csv(path) -> GridFunction:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != 2 or data.shape[0] < 2:
        raise ConfigurationError(f"{path}: expected two columns `x,value` with >= 2 rows")
    x, v = data[:, 0], data[:, 1]
    grid = make_grid(float(x[0]), float(x[-1]), len(x))
    if np.max(np.abs(x - grid.nodes())) > 1e-9 * grid.dx:
        raise ConfigurationError(f"{path}: x column is not a uniform grid")
    return GridFunction(grid, v)
