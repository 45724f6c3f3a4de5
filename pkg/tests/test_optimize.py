"""Unit tests for barrier amplitude optimization and threshold search."""
from __future__ import annotations

import numpy as np
import pytest
from scipy import special

from dpimsim.bounds import BoundInput, ber_bound_bdpim_osd
from dpimsim.modulation import BarrierSpec, ModulationSpec
from dpimsim.optimize import (
    BarrierOptimum,
    OptimizationProblem,
    golden_section,
    make_bound_objective,
    optimize_barrier,
    snr_threshold_search,
)


class TestGoldenSection:
    def test_quadratic_minimum(self):
        x, fx = golden_section(lambda x: (x - 1.3) ** 2, 0.0, 2.0, 1e-8)
        assert x == pytest.approx(1.3, abs=1e-6)
        assert fx == pytest.approx(0.0, abs=1e-12)

    def test_respects_tolerance(self):
        x, _ = golden_section(lambda x: (x - 0.25) ** 2, 0.0, 1.0, 0.05)
        assert abs(x - 0.25) < 0.05

    def test_boundary_minimum(self):
        x, _ = golden_section(lambda x: x, 0.0, 1.0, 1e-8)
        assert x == pytest.approx(0.0, abs=1e-6)


class TestOptimizeBarrier:
    def test_constant_objective_returns_midpoint(self):
        problem = OptimizationProblem(K=10, A=1.0, objective=lambda a: 1.0)
        out = optimize_barrier(problem, tol=1e-6)
        lo, hi = problem.feasible
        assert out.A_L == pytest.approx(0.5 * (lo + hi))

    def test_quadratic_objective(self):
        problem = OptimizationProblem(K=10, A=1.0,
                                      objective=lambda a: (a - 0.7) ** 2)
        out = optimize_barrier(problem, tol=1e-6)
        assert out.A_L == pytest.approx(0.7, abs=1e-5)
        assert out.value == pytest.approx(0.0, abs=1e-9)

    def test_power_constraint_holds_exactly(self):
        problem = OptimizationProblem(K=7, A=1.3,
                                      objective=lambda a: (a - 0.9) ** 2)
        out = optimize_barrier(problem, tol=1e-6)
        assert (problem.K - 1) * out.A_L + out.A_H == pytest.approx(
            problem.K * problem.A, abs=1e-10)
        assert 0 < out.A_L < problem.A < out.A_H

    def test_escapes_shallow_local_minimum(self):
        # Two basins: a shallow one near 0.2 and the global one near 0.8.
        def f(a):
            return min((a - 0.2) ** 2 + 0.05, (a - 0.8) ** 2)
        problem = OptimizationProblem(K=5, A=1.0, objective=f)
        out = optimize_barrier(problem, tol=1e-5)
        assert out.A_L == pytest.approx(0.8, abs=1e-3)

    def test_rejects_bad_problem(self):
        with pytest.raises(ValueError):
            OptimizationProblem(K=1, A=1.0, objective=lambda a: a)
        with pytest.raises(ValueError):
            OptimizationProblem(K=5, A=0.0, objective=lambda a: a)
        with pytest.raises(ValueError):
            optimize_barrier(OptimizationProblem(K=5, A=1.0, objective=lambda a: a),
                             tol=0.0)


class TestBoundObjective:
    MOD = ModulationSpec(M=4, g=1)

    def test_optimum_near_design_value(self):
        # Minimizing the sort-detection bound at a mid-waterfall operating
        # point reproduces the design low amplitude within a tenth.
        objective = make_bound_objective(16.0, self.MOD, 100, K=10)
        problem = OptimizationProblem(K=10, A=1.0, objective=objective)
        out = optimize_barrier(problem, tol=1e-4)
        assert abs(out.A_L - 0.86) <= 0.1

    def test_matches_grid_scan(self):
        objective = make_bound_objective(16.0, self.MOD, 100, K=10)
        problem = OptimizationProblem(K=10, A=1.0, objective=objective)
        out = optimize_barrier(problem, tol=1e-4)
        lo, hi = problem.feasible
        grid = np.linspace(lo, hi, 801)
        vals = [objective(x) for x in grid]
        assert abs(out.A_L - grid[int(np.argmin(vals))]) < 2 * (hi - lo) / 800

    def test_objective_evaluates_bound(self):
        objective = make_bound_objective(14.0, self.MOD, 100, K=10)
        a_l = 0.86
        barrier = BarrierSpec.from_low_amplitude(10, 1.0, a_l)
        inp = BoundInput.from_snr_db(14.0, self.MOD, 100, barrier=barrier)
        assert objective(a_l) == pytest.approx(ber_bound_bdpim_osd(inp).value)

    def test_streaming_detector_objective(self):
        objective = make_bound_objective(16.0, self.MOD, 100, K=10,
                                         detector="bdpim-otd-osd")
        assert 0 <= objective(0.86) <= 0.5

    def test_unknown_detector_rejected(self):
        with pytest.raises(ValueError):
            make_bound_objective(16.0, self.MOD, 100, K=10, detector="osd")


class TestThresholdSearch:
    @staticmethod
    def _analytic_fn(ci: float = 0.0):
        # A deterministic waterfall with a known inverse.
        def fn(snr_db: float) -> tuple[float, float]:
            gamma = 10 ** (snr_db / 10)
            return float(special.ndtr(-np.sqrt(gamma) / 2)), ci
        return fn

    def test_finds_known_crossing(self):
        fn = self._analytic_fn()
        target = 1e-3
        # Q(x) = 1e-3 at x = 3.0902; snr = 20 log10(2 x).
        expected = 20 * np.log10(2 * (-special.ndtri(1e-3)))
        found = snr_threshold_search(fn, target, (10.0, 22.0), min_width_db=0.01)
        assert found == pytest.approx(expected, abs=0.01)

    def test_stops_when_ci_contains_target(self):
        calls = []

        def fn(snr_db):
            calls.append(snr_db)
            gamma = 10 ** (snr_db / 10)
            return float(special.ndtr(-np.sqrt(gamma) / 2)), 1.0  # huge CI
        found = snr_threshold_search(fn, 1e-3, (10.0, 22.0))
        assert found == pytest.approx(16.0)  # first midpoint
        assert len(calls) == 3  # two endpoints plus one midpoint

    def test_respects_min_width(self):
        fn = self._analytic_fn()
        found = snr_threshold_search(fn, 1e-3, (10.0, 22.0), min_width_db=2.0)
        expected = 20 * np.log10(2 * (-special.ndtri(1e-3)))
        assert abs(found - expected) <= 1.0

    def test_rejects_unbracketed_target(self):
        fn = self._analytic_fn()
        with pytest.raises(ValueError):
            snr_threshold_search(fn, 1e-3, (30.0, 40.0))
        with pytest.raises(ValueError):
            snr_threshold_search(fn, 1e-3, (22.0, 10.0))
