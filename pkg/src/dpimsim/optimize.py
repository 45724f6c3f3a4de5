"""Barrier amplitude optimization and SNR-threshold search.

Given the barrier period K and the average amplitude A, the only free
barrier parameter is the low level A_L (the high level follows from the
power constraint).  The bound evaluators are smooth but their derivative
in A_L has no convenient form, so the minimization is a derivative-free
golden-section search over the open interval (eps, A - eps), verified
against a uniform grid scan to guard against non-unimodal surprises.

The SNR-threshold search locates the SNR at which a Monte Carlo BER
curve crosses a target level.  Because each evaluation is a noisy
estimate with a confidence interval, bisection steps are taken only
while the interval at the midpoint clearly separates the estimate from
the target; once the target falls inside the interval the midpoint is
already statistically indistinguishable from the crossing and is
returned as the answer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .bounds import BoundInput, ber_bound_bdpim_osd, ber_bound_bdpim_otd_osd
from .modulation import BarrierSpec, ModulationSpec, barrier_amplitude

__all__ = [
    "OptimizationProblem",
    "BarrierOptimum",
    "golden_section",
    "optimize_barrier",
    "make_bound_objective",
    "snr_threshold_search",
]

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

# Fraction of A excluded at each end of the feasible A_L interval.
FEASIBLE_MARGIN = 1e-4

GRID_POINTS = 200


@dataclass(frozen=True)
class OptimizationProblem:
    """One-dimensional barrier optimization: minimize objective over A_L.

    ``objective`` maps a candidate low amplitude to the bound value at a
    fixed operating point; the feasible range is (eps, A - eps) with
    eps = FEASIBLE_MARGIN * A, which keeps 0 < A_L < A < A_H.
    """

    K: int
    A: float
    objective: Callable[[float], float]

    def __post_init__(self) -> None:
        if self.K < 2:
            raise ValueError(f"barrier period must be at least 2, got {self.K}")
        if self.A <= 0:
            raise ValueError(f"average amplitude must be positive, got {self.A}")

    @property
    def feasible(self) -> tuple[float, float]:
        eps = FEASIBLE_MARGIN * self.A
        return (eps, self.A - eps)


class BarrierOptimum(NamedTuple):
    A_L: float
    A_H: float
    value: float


def golden_section(f: Callable[[float], float], lo: float, hi: float,
                   tol: float) -> tuple[float, float]:
    """Derivative-free minimization on [lo, hi]; returns (x, f(x))."""
    c = hi - _GOLDEN * (hi - lo)
    d = lo + _GOLDEN * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > tol:
        if fc <= fd:
            hi, d, fd = d, c, fc
            c = hi - _GOLDEN * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _GOLDEN * (hi - lo)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def optimize_barrier(problem: OptimizationProblem, tol: float) -> BarrierOptimum:
    """Minimize the bound over A_L; return (A_L*, A_H*, objective value).

    Golden-section search refined against a uniform grid scan: if the
    grid finds a strictly better basin further than ``tol`` away, the
    search re-runs inside that basin and the better of the two wins.  A
    constant objective returns the midpoint of the feasible interval by
    convention.
    """
    if tol <= 0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    lo, hi = problem.feasible
    grid = np.linspace(lo, hi, GRID_POINTS)
    grid_vals = np.array([problem.objective(x) for x in grid], dtype=np.float64)

    spread = float(grid_vals.max() - grid_vals.min())
    if spread <= 1e-14 * max(1.0, float(np.abs(grid_vals).max())):
        a_l = 0.5 * (lo + hi)
        return BarrierOptimum(a_l, barrier_amplitude(problem.K, problem.A, a_l),
                              problem.objective(a_l))

    best_x, best_f = golden_section(problem.objective, lo, hi, tol)

    i = int(np.argmin(grid_vals))
    if grid_vals[i] < best_f and abs(grid[i] - best_x) > tol:
        b_lo = grid[max(i - 1, 0)]
        b_hi = grid[min(i + 1, GRID_POINTS - 1)]
        alt_x, alt_f = golden_section(problem.objective, b_lo, b_hi, tol)
        if alt_f < best_f:
            best_x, best_f = alt_x, alt_f

    return BarrierOptimum(best_x, barrier_amplitude(problem.K, problem.A, best_x),
                          best_f)


_BOUND_EVALUATORS = {
    "bdpim-osd": ber_bound_bdpim_osd,
    "bdpim-otd-osd": ber_bound_bdpim_otd_osd,
}


def make_bound_objective(snr_db: float, spec: ModulationSpec, n_symbols: int,
                         K: int, A: float = 1.0, h: float = 1.0,
                         detector: str = "bdpim-osd",
                         mode: str = "exact") -> Callable[[float], float]:
    """Bound value as a function of A_L at a fixed operating point."""
    try:
        evaluator = _BOUND_EVALUATORS[detector]
    except KeyError:
        raise ValueError(
            f"no barrier bound for detector {detector!r}; "
            f"choose from {sorted(_BOUND_EVALUATORS)}"
        ) from None

    def objective(a_l: float) -> float:
        barrier = BarrierSpec.from_low_amplitude(K, A, a_l)
        inp = BoundInput.from_snr_db(snr_db, spec, n_symbols, A=A, h=h,
                                     barrier=barrier)
        return evaluator(inp, mode=mode).value

    return objective


def snr_threshold_search(ber_fn: Callable[[float], tuple[float, float]],
                         target_ber: float,
                         window: tuple[float, float],
                         min_width_db: float = 0.1) -> float:
    """SNR (dB) at which a Monte Carlo BER curve crosses ``target_ber``.

    ``ber_fn`` maps an SNR in dB to (ber, ci_halfwidth).  The window
    endpoints must bracket the target (BER above it on the left, below
    on the right); bisection then narrows until either the midpoint's
    confidence interval contains the target or the window is below
    ``min_width_db`` wide.
    """
    lo, hi = window
    if lo >= hi:
        raise ValueError(f"window must be increasing, got {window}")
    ber_lo, _ = ber_fn(lo)
    ber_hi, _ = ber_fn(hi)
    if not (ber_lo > target_ber > ber_hi):
        raise ValueError(
            f"target {target_ber} not bracketed: BER({lo} dB)={ber_lo}, "
            f"BER({hi} dB)={ber_hi}"
        )
    while hi - lo >= min_width_db:
        mid = 0.5 * (lo + hi)
        ber, ci = ber_fn(mid)
        if abs(ber - target_ber) <= ci:
            return mid
        if ber > target_ber:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
