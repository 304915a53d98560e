import math

import numpy as np
import pytest

from nisioenv import ConfigurationError, UsageError
from nisioenv.cli import monotone_stepper_violation
from nisioenv.envelope import step_J
from nisioenv.funcspace import GridFunction, bump, gaussian_profile, lp_norm, make_grid
from nisioenv.kernels import (
    CompoundPoisson,
    JumpDistribution,
    LambdaInterval,
    LambdaValues,
    PureShift,
    apply_member,
)
from nisioenv.reference import (
    compare,
    counterexample_scan,
    hjb_step,
    hjb_upwind,
    ode_reference,
    pole_initial_condition,
)


class TestHjbUpwind:
    def test_zero_drift_matches_heat_closed_form(self, norm2):
        # lam = 0 reduces to the heat equation; N(0, s0) widens to N(0, s0+t)
        g = make_grid(-10.0, 10.0, 2001)
        s0, t = 0.5, 0.5
        f = gaussian_profile(g, sigma=math.sqrt(s0))
        sol = hjb_upwind(f, t, 0.0)
        exact = GridFunction(g, math.sqrt(s0 / (s0 + t)) * np.exp(-g.nodes() ** 2 / (2.0 * (s0 + t))))
        assert compare(sol, exact, norm2).rel_err < 1e-3

    def test_constants_interior(self):
        g = make_grid(-8.0, 8.0, 401)
        const = GridFunction(g, np.ones(401))
        sol = hjb_upwind(const, 0.01, 1.0)
        sl = g.interior_slice(0.25)
        assert np.max(np.abs(sol.samples[sl] - 1.0)) < 1e-12

    def test_monotone_on_random_pairs(self):
        g = make_grid(-8.0, 8.0, 257)
        rng = np.random.default_rng(31)
        viol = monotone_stepper_violation(
            lambda u, dt, dx: hjb_step(u, dt, dx, 1.0), g, rng, pairs=10, dt=0.4 * g.dx**2, steps=30
        )
        assert viol <= 1e-12

    def test_mutated_downwind_sign_breaks_monotonicity(self):
        # mutation check: advecting from the wrong side puts a negative weight
        # on a neighbor node, which the monotonicity probe must catch
        def broken_step(u, dt, dx):
            out = np.zeros_like(u)
            diff = u[2:] - 2.0 * u[1:-1] + u[:-2]
            out[1:-1] = u[1:-1] + dt * (0.5 * diff / (dx * dx) + 20.0 * (u[1:-1] - u[2:]) / dx)
            return out

        g = make_grid(-8.0, 8.0, 257)
        rng = np.random.default_rng(31)
        viol = monotone_stepper_violation(broken_step, g, rng, pairs=10, dt=0.4 * g.dx**2, steps=30)
        assert viol > 1e-12

    def test_parameter_validation(self):
        g = make_grid(-1.0, 1.0, 101)
        f = bump(g, radius=0.3)
        with pytest.raises(UsageError):
            hjb_upwind(f, 0.1, 1.0, cfl=0.0)
        with pytest.raises(UsageError):
            hjb_upwind(f, 0.1, 1.0, cfl=1.5)
        with pytest.raises(UsageError):
            hjb_upwind(f, -0.1, 1.0)


class TestOdeReference:
    def test_zero_intensity_is_identity(self):
        g = make_grid(-4.0, 4.0, 401)
        fam = CompoundPoisson(LambdaValues((0.0,)), JumpDistribution(((1.0, 1.0),)))
        f = bump(g, radius=1.0)
        out = ode_reference(fam, f, 1.0, 1e-2)
        assert np.max(np.abs(out.samples - f.samples)) < 1e-14

    def test_singleton_matches_poisson_series(self, norm2):
        # linear case: the exact solution is the member semigroup itself
        g = make_grid(-10.0, 10.0, 2001)
        fam = CompoundPoisson(LambdaValues((1.0,)), JumpDistribution(((1.0, 1.0),)))
        f = bump(g, radius=1.0)
        out = ode_reference(fam, f, 1.0, 1e-3)
        series = apply_member(fam, 1.0, 1.0, f)
        assert lp_norm(out - series, norm2) < 1e-8

    def test_fourth_order_step_halving(self, norm2):
        g = make_grid(-10.0, 10.0, 1001)
        fam = CompoundPoisson(LambdaValues((1.0,)), JumpDistribution(((1.0, 1.0),)))
        f = bump(g, radius=1.0)
        exact = apply_member(fam, 1.0, 1.0, f)
        e_dt = lp_norm(ode_reference(fam, f, 1.0, 0.05) - exact, norm2)
        e_half = lp_norm(ode_reference(fam, f, 1.0, 0.025) - exact, norm2)
        assert 12.0 <= e_dt / e_half <= 20.0

    def test_rejects_non_compound_poisson(self, gauss_family):
        g = make_grid(-1.0, 1.0, 101)
        with pytest.raises(UsageError):
            ode_reference(gauss_family, bump(g, radius=0.3), 0.5, 1e-2)


class TestCounterexampleScan:
    def test_norm_ratios_exceed_rate(self):
        g = make_grid(-3.0, 3.0, 240001)
        table = counterexample_scan(g, 2.0, 0.5, [1e-2, 1e-3, 1e-4])
        ratios = [b / a for (_, a), (_, b) in zip(table, table[1:])]
        assert all(r >= 1.5 for r in ratios)
        assert all(b > a for (_, a), (_, b) in zip(table, table[1:]))

    def test_bounded_control_stays_bounded(self, norm2):
        # shifts of a bounded profile keep a bounded supremum
        g = make_grid(-3.0, 3.0, 24001)
        fam = PureShift(LambdaInterval(-1.0, 1.0))
        f = bump(g, radius=0.5)
        out = step_J(fam, 0.5, f)
        measure = 2.0 * (0.5 + 0.5)
        assert lp_norm(out, norm2) <= f.max_abs() * measure ** 0.5

    def test_zero_shift_singleton_keeps_norm(self, norm2):
        g = make_grid(-3.0, 3.0, 24001)
        f_eps = pole_initial_condition(g, 2.0, 0.01)
        fam = PureShift(LambdaValues((0.0,)))
        out = step_J(fam, 0.5, f_eps)
        assert np.array_equal(out.samples, f_eps.samples)
        assert lp_norm(out, norm2) == lp_norm(f_eps, norm2)

    def test_under_resolved_epsilon_names_required_grid(self):
        g = make_grid(-3.0, 3.0, 1001)
        with pytest.raises(ConfigurationError, match="nodes"):
            counterexample_scan(g, 2.0, 0.5, [1e-4])

    def test_epsilons_must_decrease(self):
        g = make_grid(-3.0, 3.0, 24001)
        with pytest.raises(UsageError):
            counterexample_scan(g, 2.0, 0.5, [1e-3, 1e-2])

    def test_time_domain(self):
        g = make_grid(-3.0, 3.0, 24001)
        with pytest.raises(UsageError):
            counterexample_scan(g, 2.0, 1.5, [1e-2])


class TestCompare:
    def test_identical(self, norm2, bump_small):
        out = compare(bump_small, bump_small, norm2)
        assert out.abs_err == 0.0 and out.rel_err == 0.0 and out.max_err == 0.0

    def test_constant_offset(self, norm2):
        g = make_grid(0.0, 1.0, 101)
        f = GridFunction(g, np.ones(101))
        h = GridFunction(g, np.ones(101) + 0.5)
        margin = 0.05
        out = compare(f, h, norm2, boundary_margin=margin)
        k = math.floor(margin * g.n_nodes)
        window_measure = (g.n_nodes - 2 * k) * g.dx
        assert out.abs_err == pytest.approx(0.5 * window_measure**0.5, rel=1e-12)
        assert out.max_err == pytest.approx(0.5, rel=1e-15)

    def test_relative_error_guard(self, norm2):
        g = make_grid(0.0, 1.0, 101)
        zero = GridFunction(g, np.zeros(101))
        tiny = GridFunction(g, 1e-20 * np.ones(101))
        out = compare(zero, tiny, norm2)
        assert math.isfinite(out.rel_err)
