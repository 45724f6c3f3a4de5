"""Pulse-interval modulation toolkit for intensity-modulated optical links.

The package simulates digital pulse interval modulation (DPIM) and its
barrier-signal variant (BDPIM) end to end — bit mapping, AWGN and
gamma-gamma turbulence channels, threshold/order-statistics/ML sequence
detectors, convolutional coding — and evaluates matching analytical BER
bounds built from order-statistics overlap probabilities.
"""

from .bounds import (
    BoundInput,
    BoundResult,
    OrQuery,
    QuadratureError,
    barrier_chip_error_prob,
    ber_bound_bdpim_osd,
    ber_bound_bdpim_otd_osd,
    ber_bound_dpim_osd,
    ber_bound_dpim_otd,
    chip_error_prob_dpim,
    erf_fast,
    ergodic_bound,
    extreme_order_stat_mean,
    or_approx,
    or_exact,
    order_stat_cdf,
    order_stat_pdf,
)
from .channel import (
    ChannelState,
    TurbulenceSpec,
    apply_awgn,
    gamma_gamma_pdf,
    gamma_gamma_sample,
)
from .coding import (
    ConvCodeSpec,
    InterleaverSpec,
    conv_encode,
    deinterleave,
    interleave,
    viterbi_decode,
    viterbi_decode_batch,
)
from .detection import (
    DetectionResult,
    EnumerationCapError,
    ThresholdSpec,
    bdpim_osd_detect,
    bdpim_otd_osd_detect,
    bdpim_otd_threshold,
    mdpim_otd_detect,
    mdpim_thresholds,
    mlsd_exhaustive,
    omp_detect,
    osd_detect,
    otd_detect,
    otd_threshold,
    storage_delay,
)
from .harness import (
    BerEstimate,
    ConfigError,
    RunConfig,
    bounds_for_config,
    emit_csv,
    make_ber_fn,
    optimize_barrier_mc,
    run_monte_carlo,
)
from .modulation import (
    BarrierSpec,
    ChipFrame,
    DemapResult,
    ModulationSpec,
    bits_to_symbols,
    demap_baseline,
    demap_dpim,
    map_baseline,
    map_bdpim,
    map_dpim,
    mdpim_levels,
    symbols_to_bits,
)
from .optimize import (
    BarrierOptimum,
    OptimizationProblem,
    golden_section,
    make_bound_objective,
    optimize_barrier,
    snr_threshold_search,
)
from .pipeline import BlockSetup, simulate_block

__version__ = "0.1.0"

__all__ = [
    "BarrierOptimum",
    "BarrierSpec",
    "BerEstimate",
    "BlockSetup",
    "BoundInput",
    "BoundResult",
    "ChannelState",
    "ChipFrame",
    "ConfigError",
    "ConvCodeSpec",
    "DemapResult",
    "DetectionResult",
    "EnumerationCapError",
    "InterleaverSpec",
    "ModulationSpec",
    "OptimizationProblem",
    "OrQuery",
    "QuadratureError",
    "RunConfig",
    "ThresholdSpec",
    "TurbulenceSpec",
    "apply_awgn",
    "barrier_chip_error_prob",
    "bdpim_osd_detect",
    "bdpim_otd_osd_detect",
    "bdpim_otd_threshold",
    "ber_bound_bdpim_osd",
    "ber_bound_bdpim_otd_osd",
    "ber_bound_dpim_osd",
    "ber_bound_dpim_otd",
    "bits_to_symbols",
    "bounds_for_config",
    "chip_error_prob_dpim",
    "conv_encode",
    "deinterleave",
    "demap_baseline",
    "demap_dpim",
    "emit_csv",
    "erf_fast",
    "ergodic_bound",
    "extreme_order_stat_mean",
    "gamma_gamma_pdf",
    "gamma_gamma_sample",
    "golden_section",
    "interleave",
    "make_ber_fn",
    "make_bound_objective",
    "map_baseline",
    "map_bdpim",
    "map_dpim",
    "mdpim_levels",
    "mdpim_otd_detect",
    "mdpim_thresholds",
    "mlsd_exhaustive",
    "omp_detect",
    "optimize_barrier",
    "optimize_barrier_mc",
    "or_approx",
    "or_exact",
    "order_stat_cdf",
    "order_stat_pdf",
    "osd_detect",
    "otd_detect",
    "otd_threshold",
    "run_monte_carlo",
    "simulate_block",
    "snr_threshold_search",
    "storage_delay",
    "symbols_to_bits",
    "viterbi_decode",
    "viterbi_decode_batch",
]
