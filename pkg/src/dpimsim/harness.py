"""Deterministic Monte Carlo driver, metric accounting, and CSV output.

A run is described by a :class:`RunConfig`; :func:`run_monte_carlo`
executes it over the SNR grid and returns one :class:`BerEstimate` per
point.  Packets are processed in fixed blocks of ``BLOCK`` packets; the
random stream of block ``b`` at grid index ``s`` is seeded from
``SeedSequence(seed, spawn_key=(s, b))``, so the set of draws is a pure
function of (seed, grid position, block index).  Per-block results are
integer counters and integer sums are associative, which makes the
final numbers — and therefore the emitted CSV bytes — independent of
how blocks are ordered or distributed across worker processes.

Confidence intervals treat the packet as the sampling unit: bit errors
within a packet are strongly dependent (one misplaced pulse shifts all
following bits), so the 95% halfwidth is computed from the per-packet
error-count variance, not from a binomial model on individual bits.

The analytical-bound columns pair each scheme/detector combination with
its matching error envelope; over the fading channel the bound is
averaged against the turbulence density.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .bounds import (
    BoundInput,
    ber_bound_bdpim_osd,
    ber_bound_bdpim_otd_osd,
    ber_bound_dpim_osd,
    ber_bound_dpim_otd,
    ergodic_bound,
)
from .channel import TurbulenceSpec
from .coding import ConvCodeSpec, InterleaverSpec
from .modulation import BarrierSpec, ModulationSpec
from .optimize import (
    BarrierOptimum,
    OptimizationProblem,
    golden_section,
    make_bound_objective,
    optimize_barrier,
)
from .pipeline import BlockSetup, simulate_block

__all__ = [
    "BLOCK",
    "ConfigError",
    "RunConfig",
    "BerEstimate",
    "run_monte_carlo",
    "bounds_for_config",
    "emit_csv",
    "make_ber_fn",
    "optimize_barrier_mc",
    "CSV_COLUMNS",
]

# Packets per simulation block; fixed so random draws never depend on
# packet budget or worker count.
BLOCK = 1024

CSV_COLUMNS = (
    "snr_db",
    "scheme",
    "detector",
    "coded",
    "ber_sim",
    "ci",
    "per_sim",
    "ber_bound_exact",
    "ber_bound_tractable",
    "packets",
    "seed",
)


class ConfigError(ValueError):
    """A run configuration that fails validation before any work starts."""


@dataclass(frozen=True)
class RunConfig:
    """Everything one Monte Carlo sweep needs, in user-level units."""

    scheme: str
    detector: str
    snr_db: tuple[float, ...]
    M: int = 4
    g: int = 1
    n_symbols: int = 100
    K: int = 10
    A: float = 1.0
    A_L: float | None = None  # None: optimized from the bound (barrier scheme)
    packets: int = 100_000
    seed: int = 0
    coded: bool = False
    channel: str = "awgn"
    lam: float = 11.6
    mu: float = 10.1
    alpha: float = 0.82
    mdpim_ratio: float = 2.0
    interleaver_depth: int = 20

    def __post_init__(self) -> None:
        if not self.snr_db:
            raise ConfigError("SNR grid must be non-empty")
        if self.packets < 1:
            raise ConfigError(f"need at least one packet, got {self.packets}")
        if self.channel not in ("awgn", "gg"):
            raise ConfigError(f"unknown channel: {self.channel!r}")
        try:
            # Build a trial setup (placeholder amplitude when auto-optimized)
            # so every cross-field rule is enforced up front.
            self._setup(a_l=self.A_L if self.A_L is not None else self.A / 2.0)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def _setup(self, a_l: float | None) -> BlockSetup:
        spec = ModulationSpec(M=self.M, g=self.g)
        barrier = None
        if self.scheme == "bdpim":
            if a_l is None:
                raise ValueError("bdpim needs A_L (or auto-optimization)")
            barrier = BarrierSpec.from_low_amplitude(self.K, self.A, a_l)
        turbulence = TurbulenceSpec(self.lam, self.mu) if self.channel == "gg" else None
        code = ConvCodeSpec() if self.coded else None
        interleaver = InterleaverSpec(depth=self.interleaver_depth) if self.coded else None
        return BlockSetup(
            scheme=self.scheme,
            detector=self.detector,
            spec=spec,
            n_symbols=self.n_symbols,
            A=self.A,
            barrier=barrier,
            turbulence=turbulence,
            coded=self.coded,
            code=code,
            interleaver=interleaver,
            mdpim_ratio=self.mdpim_ratio,
        )

    def resolved(self) -> "RunConfig":
        """Fill in an auto-optimized A_L so sim and bounds share one value.

        The low amplitude is chosen by minimizing the detector's exact
        bound at the middle of the SNR grid.
        """
        if self.scheme != "bdpim" or self.A_L is not None:
            return self
        mid_snr = sorted(self.snr_db)[len(self.snr_db) // 2]
        spec = ModulationSpec(M=self.M, g=self.g)
        objective = make_bound_objective(
            mid_snr, spec, self.n_symbols, self.K, A=self.A,
            detector=self.detector, mode="exact",
        )
        problem = OptimizationProblem(K=self.K, A=self.A, objective=objective)
        best = optimize_barrier(problem, tol=1e-3 * self.A)
        return replace(self, A_L=best.A_L)

    def setup(self) -> BlockSetup:
        return self._setup(self.A_L)

    def sigma_for(self, snr_db: float) -> float:
        return self.A / math.sqrt(10.0 ** (snr_db / 10.0))


@dataclass(frozen=True)
class BerEstimate:
    """Accumulated error statistics for one grid point."""

    packets: int
    bit_errors: int
    bits_total: int
    packet_errors: int
    ber: float
    per: float
    ci_halfwidth: float
    sum_sq_errors: int = field(default=0, repr=False)

    @classmethod
    def from_counts(cls, packets: int, bits_per_packet: int, bit_errors: int,
                    sum_sq: int, packet_errors: int) -> "BerEstimate":
        bits_total = packets * bits_per_packet
        ber = bit_errors / bits_total
        per = packet_errors / packets
        if packets > 1:
            var = (sum_sq - bit_errors**2 / packets) / (packets - 1)
            ci = 1.96 * math.sqrt(max(var, 0.0) / packets) / bits_per_packet
        else:
            ci = 0.0
        return cls(packets=packets, bit_errors=bit_errors, bits_total=bits_total,
                   packet_errors=packet_errors, ber=ber, per=per,
                   ci_halfwidth=ci, sum_sq_errors=sum_sq)


def _run_block(args) -> tuple[int, int, int, int]:
    setup, sigma_n, seed, snr_idx, block_idx, n_pkts = args
    rng = np.random.default_rng(
        np.random.SeedSequence(seed, spawn_key=(snr_idx, block_idx))
    )
    errs = simulate_block(setup, sigma_n, rng, n_pkts)
    return (
        snr_idx,
        int(errs.sum()),
        int((errs.astype(np.int64) ** 2).sum()),
        int(np.count_nonzero(errs)),
    )


def run_monte_carlo(config: RunConfig, workers: int = 1) -> list[BerEstimate]:
    """Simulate every grid point; deterministic for a given seed.

    ``workers`` only distributes blocks across processes; the counters
    are integers whose sums do not depend on arrival order, so results
    are identical for any worker count.
    """
    config = config.resolved()
    setup = config.setup()
    n_blocks = -(-config.packets // BLOCK)
    tasks = []
    for snr_idx, snr in enumerate(config.snr_db):
        sigma = config.sigma_for(snr)
        for b in range(n_blocks):
            n_pkts = min(BLOCK, config.packets - b * BLOCK)
            tasks.append((setup, sigma, config.seed, snr_idx, b, n_pkts))

    n_points = len(config.snr_db)
    bit_errors = np.zeros(n_points, dtype=np.int64)
    sq_sums = np.zeros(n_points, dtype=np.int64)
    pkt_errors = np.zeros(n_points, dtype=np.int64)

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = pool.map(_run_block, tasks, chunksize=4)
            for snr_idx, be, sq, pe in results:
                bit_errors[snr_idx] += be
                sq_sums[snr_idx] += sq
                pkt_errors[snr_idx] += pe
    else:
        for task in tasks:
            snr_idx, be, sq, pe = _run_block(task)
            bit_errors[snr_idx] += be
            sq_sums[snr_idx] += sq
            pkt_errors[snr_idx] += pe

    bits_pp = setup.n_payload_bits
    return [
        BerEstimate.from_counts(config.packets, bits_pp, int(bit_errors[i]),
                                int(sq_sums[i]), int(pkt_errors[i]))
        for i in range(n_points)
    ]


_BOUND_PAIRING = {
    ("dpim", "otd"): "plain-otd",
    ("dpim", "osd"): "plain-osd",
    ("dpim", "mlsd"): "plain-osd",  # MLSD and OSD are the same decision rule
    ("bdpim", "bdpim-osd"): "barrier-osd",
    ("bdpim", "bdpim-otd-osd"): "barrier-otd-osd",
}


def _bound_at(kind: str, inp: BoundInput, mode: str) -> float:
    if kind == "plain-otd":
        return ber_bound_dpim_otd(inp).value
    if kind == "plain-osd":
        return ber_bound_dpim_osd(inp, mode=mode).value
    if kind == "barrier-osd":
        return ber_bound_bdpim_osd(inp, mode=mode).value
    return ber_bound_bdpim_otd_osd(inp, mode=mode).value


def bounds_for_config(config: RunConfig) -> list[tuple[float, float] | None]:
    """(exact, tractable) bound per grid point, or None when no bound applies.

    Coded runs and the baseline schemes have no analytical bound.  The
    threshold-detector bound is a single closed form, reported in both
    columns.  Over the fading channel each bound is averaged against the
    turbulence density.
    """
    config = config.resolved()
    kind = _BOUND_PAIRING.get((config.scheme, config.detector))
    if kind is None or config.coded:
        return [None] * len(config.snr_db)

    spec = ModulationSpec(M=config.M, g=config.g)
    barrier = (
        BarrierSpec.from_low_amplitude(config.K, config.A, config.A_L)
        if config.scheme == "bdpim"
        else None
    )
    out: list[tuple[float, float] | None] = []
    for snr in config.snr_db:
        inp = BoundInput.from_snr_db(snr, spec, config.n_symbols, A=config.A,
                                     alpha=config.alpha, barrier=barrier)
        if config.channel == "gg":
            turb = TurbulenceSpec(config.lam, config.mu)
            exact = ergodic_bound(
                lambda h: _bound_at(kind, inp.with_h(h), "exact"), turb
            ).value
            tract = ergodic_bound(
                lambda h: _bound_at(kind, inp.with_h(h), "tractable"), turb
            ).value
        else:
            exact = _bound_at(kind, inp, "exact")
            tract = _bound_at(kind, inp, "tractable")
        out.append((exact, tract))
    return out


def _fmt(value: float | None) -> str:
    return "" if value is None else f"{value:.17g}"


def emit_csv(results: list[BerEstimate] | None,
             bounds: list[tuple[float, float] | None] | None,
             path: str, config: RunConfig, append: bool = False) -> None:
    """Write one row per grid point in the stable column layout.

    ``results=None`` emits a bounds-only file (simulation columns
    empty); ``append=True`` adds rows to an existing file without
    repeating the header, letting several curves share one CSV.
    """
    config = config.resolved()
    n = len(config.snr_db)
    if results is not None and len(results) != n:
        raise ValueError("results do not match the SNR grid")
    if bounds is None:
        bounds = [None] * n
    if results is None and all(b is None for b in bounds):
        raise ValueError("nothing to write: no simulation results and no bounds")

    lines = [] if append and os.path.exists(path) else [",".join(CSV_COLUMNS)]
    for i, snr in enumerate(config.snr_db):
        est = results[i] if results is not None else None
        bnd = bounds[i]
        row = (
            _fmt(snr),
            config.scheme,
            config.detector,
            "1" if config.coded else "0",
            _fmt(est.ber if est else None),
            _fmt(est.ci_halfwidth if est else None),
            _fmt(est.per if est else None),
            _fmt(bnd[0] if bnd else None),
            _fmt(bnd[1] if bnd else None),
            str(config.packets if est else 0),
            str(config.seed),
        )
        lines.append(",".join(row))
    mode = "a" if append and os.path.exists(path) else "w"
    with open(path, mode, encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def make_ber_fn(config: RunConfig, packets: int | None = None,
                workers: int = 1):
    """BER evaluator snr_db -> (ber, ci) for the threshold search.

    Every call reuses the config's seed, so evaluations at different
    SNRs (or with tweaked amplitudes) share common random numbers.
    """

    def ber_at(snr_db: float) -> tuple[float, float]:
        cfg = replace(config, snr_db=(float(snr_db),),
                      packets=packets or config.packets)
        est = run_monte_carlo(cfg, workers=workers)[0]
        return est.ber, est.ci_halfwidth

    return ber_at


def optimize_barrier_mc(config: RunConfig, snr_db: float, tol: float = 0.02,
                        grid_points: int = 13, packets: int = 2000,
                        workers: int = 1) -> BarrierOptimum:
    """Barrier low amplitude minimizing the *simulated* BER at one SNR.

    For coded systems no analytical bound exists, so the objective is a
    fixed-seed Monte Carlo estimate: common random numbers make the
    surface smooth enough for a coarse grid scan plus a golden-section
    refinement inside the best bracket.
    """
    from .modulation import barrier_amplitude

    def objective(a_l: float) -> float:
        cfg = replace(config, A_L=float(a_l), snr_db=(float(snr_db),),
                      packets=packets)
        return run_monte_carlo(cfg, workers=workers)[0].ber

    eps = 1e-4 * config.A
    grid = np.linspace(eps, config.A - eps, grid_points)
    vals = [objective(x) for x in grid]
    i = int(np.argmin(vals))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, grid_points - 1)]
    best_x, best_f = golden_section(objective, lo, hi, tol)
    if vals[i] < best_f:
        best_x, best_f = float(grid[i]), vals[i]
    return BarrierOptimum(best_x, barrier_amplitude(config.K, config.A, best_x),
                          best_f)
