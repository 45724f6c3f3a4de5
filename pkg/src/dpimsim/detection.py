"""Detectors for pulse-interval frames.

Four families are provided:

* threshold detection (OTD): a per-sample comparison against a level
  chosen to minimize the chip error probability; streaming, needs the
  SNR to place the threshold.
* ordered-sequence detection (OSD): declares the N_s largest samples of
  a packet to be the pulses; uses no channel knowledge.
* exhaustive maximum-likelihood sequence detection (MLSD): brute-force
  least-squares over all supports of the known pulse count; kept as the
  optimality oracle for OSD (its minimizer is exactly the N_s largest
  samples, so the two must agree).
* greedy matching-pursuit detection (OMP): iterative residual
  maximization over canonical basis vectors; a second equivalence
  oracle for OSD.

Barrier frames get a two-phase treatment: the barrier pulses are found
first (by global sort or by a running threshold), then each inter-
barrier segment is searched for its K - 1 low pulses.  A misplaced
barrier corrupts only the adjacent segments, which is the point of the
barrier construction.

All sorts break ties by preferring the lower index; ties have
probability zero under continuous noise, so this only pins down edge
cases deterministically.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb

import numpy as np

from .modulation import BarrierSpec

__all__ = [
    "DetectionResult",
    "ThresholdSpec",
    "EnumerationCapError",
    "otd_threshold",
    "otd_detect",
    "mdpim_thresholds",
    "mdpim_otd_detect",
    "mlsd_exhaustive",
    "osd_detect",
    "omp_detect",
    "bdpim_osd_detect",
    "bdpim_otd_threshold",
    "bdpim_otd_osd_detect",
    "storage_delay",
]

MLSD_ENUMERATION_CAP = 10_000_000


class EnumerationCapError(RuntimeError):
    """Raised when exhaustive MLSD would enumerate too many supports."""


@dataclass(frozen=True, eq=False)
class DetectionResult:
    """Hard-decision chips, the detected pulse indices, and anomaly flags."""

    chips: np.ndarray
    support: np.ndarray
    phase_flags: tuple[str, ...] = ()


@dataclass(frozen=True)
class ThresholdSpec:
    """Normalized decision level a_t; the comparison uses h * a_t."""

    a_t: float
    h: float = 1.0

    def __post_init__(self) -> None:
        if self.a_t <= 0:
            raise ValueError(f"threshold must be positive, got {self.a_t}")

    @property
    def threshold(self) -> float:
        return self.h * self.a_t


def otd_threshold(A: float, h: float, gamma: float, L_s: float) -> float:
    """Chip-error-optimal normalized threshold A/2 + A ln(L_s - 1) / (h^2 gamma).

    The ln term biases the midpoint upward because empty chips outnumber
    pulses L_s - 1 to one on average.
    """
    if L_s <= 1:
        raise ValueError(f"average symbol duration must exceed 1 chip, got {L_s}")
    if gamma <= 0:
        raise ValueError(f"SNR must be positive, got {gamma}")
    return A / 2.0 + A * np.log(L_s - 1.0) / (h * h * gamma)


def otd_detect(y: np.ndarray, spec: ThresholdSpec, amplitude: float = 1.0) -> DetectionResult:
    """Threshold detection: chip t is a pulse iff y[t] > h * a_t."""
    y = np.asarray(y, dtype=np.float64)
    mask = y > spec.threshold
    support = np.flatnonzero(mask)
    chips = np.where(mask, float(amplitude), 0.0)
    return DetectionResult(chips=chips, support=support)


def mdpim_thresholds(levels: tuple[float, float], h: float, sigma_n: float,
                     L_s: float) -> tuple[float, float]:
    """Two normalized decision levels for a two-amplitude interval frame.

    The lower level separates empty chips from low pulses; since empty
    chips outnumber low pulses 2(L_s - 1) to one on average, it carries
    the same log-prior bias as the single-amplitude threshold.  The two
    pulse classes are equally likely, so the upper level is their plain
    midpoint.
    """
    a_l, a_h = levels
    if not (0 < a_l < a_h):
        raise ValueError(f"need 0 < low < high amplitude, got {levels}")
    if L_s <= 1:
        raise ValueError(f"average symbol duration must exceed 1 chip, got {L_s}")
    if sigma_n <= 0 or h <= 0:
        raise ValueError("sigma_n and h must be positive")
    t1 = a_l / 2.0 + sigma_n * sigma_n * np.log(2.0 * (L_s - 1.0)) / (h * h * a_l)
    t2 = 0.5 * (a_l + a_h)
    return float(t1), float(t2)


def mdpim_otd_detect(y: np.ndarray, thresholds: tuple[float, float],
                     levels: tuple[float, float], h: float = 1.0) -> DetectionResult:
    """Per-sample three-way classification into {empty, low, high}."""
    t1, t2 = thresholds
    a_l, a_h = levels
    y = np.asarray(y, dtype=np.float64)
    chips = np.where(y > h * t1, np.where(y > h * t2, a_h, a_l), 0.0)
    return DetectionResult(chips=chips, support=np.flatnonzero(chips > 0))


# Support index tables, keyed by (length, pulse count).  Only small tables are
# kept; the cap limits memory to a few MB.
_SUPPORT_CACHE: dict[tuple[int, int], np.ndarray] = {}
_SUPPORT_CACHE_MAX_ROWS = 2_000_000


def _support_table(length: int, n_pulses: int) -> np.ndarray:
    key = (length, n_pulses)
    table = _SUPPORT_CACHE.get(key)
    if table is None:
        n_rows = comb(length, n_pulses)
        flat = np.fromiter(
            itertools.chain.from_iterable(itertools.combinations(range(length), n_pulses)),
            dtype=np.intp,
            count=n_rows * n_pulses,
        )
        table = flat.reshape(n_rows, n_pulses)
        if n_rows <= _SUPPORT_CACHE_MAX_ROWS:
            _SUPPORT_CACHE[key] = table
    return table


def mlsd_exhaustive(y: np.ndarray, h: float, n_pulses: int, amplitude: float = 1.0,
                    max_candidates: int = MLSD_ENUMERATION_CAP) -> DetectionResult:
    """Brute-force sequence detection over every support of size n_pulses.

    Minimizes ||y - h x||^2 where x carries ``amplitude`` on the support;
    ties go to the lexicographically smallest support.  Supports are
    enumerated explicitly, so the candidate count C(len(y), n_pulses)
    must stay below ``max_candidates``.
    """
    y = np.asarray(y, dtype=np.float64)
    length = y.size
    if n_pulses > length:
        raise ValueError(f"cannot place {n_pulses} pulses in {length} chips")
    n_rows = comb(length, n_pulses)
    if n_rows > max_candidates:
        raise EnumerationCapError(
            f"MLSD would enumerate {n_rows} supports for L={length}, "
            f"N_s={n_pulses}; cap is {max_candidates}"
        )
    table = _support_table(length, n_pulses)
    # ||y - h x||^2 = sum of off-support y^2 plus on-support (y - hA)^2;
    # accumulate the on-support difference against the all-zero baseline.
    pulse_term = (y - h * amplitude) ** 2 - y**2
    scores = y @ y + pulse_term[table].sum(axis=1)
    best = int(np.argmin(scores))  # first minimum = smallest support
    support = table[best].copy()
    chips = np.zeros(length)
    chips[support] = amplitude
    return DetectionResult(chips=chips, support=support)


def _largest(y: np.ndarray, count: int) -> np.ndarray:
    """Indices of the ``count`` largest entries, lower index winning ties."""
    order = np.argsort(-y, kind="stable")
    return np.sort(order[:count])


def osd_detect(y: np.ndarray, n_pulses: int, amplitude: float = 1.0) -> DetectionResult:
    """Ordered-sequence detection: the n_pulses largest samples are the pulses."""
    y = np.asarray(y, dtype=np.float64)
    if n_pulses > y.size:
        raise ValueError(f"cannot place {n_pulses} pulses in {y.size} chips")
    support = _largest(y, n_pulses)
    chips = np.zeros(y.size)
    chips[support] = amplitude
    return DetectionResult(chips=chips, support=support)


def omp_detect(y: np.ndarray, n_pulses: int, amplitude: float = 1.0) -> DetectionResult:
    """Greedy detection: repeatedly pick the largest residual coordinate.

    With the canonical basis, the least-squares update zeroes the
    residual at every selected coordinate, so each iteration grabs the
    largest remaining sample.
    """
    y = np.asarray(y, dtype=np.float64)
    if n_pulses > y.size:
        raise ValueError(f"cannot place {n_pulses} pulses in {y.size} chips")
    residual = y.copy()
    selectable = np.ones(y.size, dtype=bool)
    picked = []
    for _ in range(n_pulses):
        candidate = np.where(selectable, residual, -np.inf)
        t = int(np.argmax(candidate))
        picked.append(t)
        selectable[t] = False
        residual[t] = 0.0  # projection onto the selected basis vectors
    support = np.sort(np.asarray(picked, dtype=np.intp))
    chips = np.zeros(y.size)
    chips[support] = amplitude
    return DetectionResult(chips=chips, support=support)


def _segment_lows(y: np.ndarray, lo: int, hi: int, count: int,
                  chips: np.ndarray, amplitude: float,
                  flags: list[str], flag: str) -> list[int]:
    """Mark the ``count`` largest samples of y[lo:hi] as low pulses."""
    segment = y[lo:hi]
    if segment.size < count:
        flags.append(flag)
        picks = np.arange(lo, hi, dtype=np.intp)
    else:
        picks = _largest(segment, count) + lo
    chips[picks] = amplitude
    return list(picks)


def bdpim_osd_detect(y: np.ndarray, n_symbols: int, barrier: BarrierSpec) -> DetectionResult:
    """Two-phase sort detection for barrier frames.

    Phase one declares the Q = n_symbols / K largest samples to be the
    barrier pulses (amplitude A_H).  Phase two runs within each span
    between consecutive barrier positions (the span before the first
    barrier included) and declares its K - 1 largest samples to be low
    pulses.  Chips after the final barrier are guard/interval zeros in a
    well-formed frame and are left untouched.  A span shorter than K - 1
    chips is taken entirely as low pulses and flagged.
    """
    y = np.asarray(y, dtype=np.float64)
    K = barrier.K
    if n_symbols % K != 0:
        raise ValueError(f"symbol count {n_symbols} not divisible by K={K}")
    q = n_symbols // K
    if q > y.size:
        raise ValueError(f"cannot place {q} barriers in {y.size} chips")

    barriers = _largest(y, q)
    chips = np.zeros(y.size)
    chips[barriers] = barrier.A_H

    flags: list[str] = []
    support = list(barriers)
    prev_end = 0
    for t in barriers:
        support += _segment_lows(y, prev_end, int(t), K - 1, chips, barrier.A_L,
                                 flags, "short-segment")
        prev_end = int(t) + 1
    support_arr = np.sort(np.asarray(support, dtype=np.intp))
    return DetectionResult(chips=chips, support=support_arr, phase_flags=tuple(flags))


def bdpim_otd_threshold(barrier: BarrierSpec, h: float, sigma_n: float) -> float:
    """Threshold separating low from barrier pulses.

    Midpoint of the two amplitudes, biased upward because low pulses
    outnumber barriers K - 1 to one:
    (A_H + A_L)/2 + sigma_n^2 ln(K - 1) / (h^2 (A_H - A_L)).
    """
    gap = barrier.A_H - barrier.A_L
    if gap <= 0:
        raise ValueError(f"need A_H > A_L, got gap {gap}")
    return (barrier.A_H + barrier.A_L) / 2.0 + (
        sigma_n * sigma_n * np.log(barrier.K - 1.0) / (h * h * gap)
    )


def bdpim_otd_osd_detect(y: np.ndarray, n_symbols: int, barrier: BarrierSpec,
                         threshold: float, h: float = 1.0) -> DetectionResult:
    """Streaming two-phase detection for barrier frames.

    Samples are buffered until one exceeds h * threshold; that sample is
    a barrier pulse (A_H) and the buffered span is immediately searched
    for its K - 1 largest samples (A_L), after which the buffer resets.
    Storage never exceeds one inter-barrier span, unlike the sort
    detector which holds the whole packet.

    A trailing buffer at end of frame is only searched when fewer than
    Q barriers fired (the undetected pulses must then be inside it);
    after a full complement of barriers the tail holds only guard or
    interval zeros and is skipped.  If no sample crosses the threshold
    the entire frame becomes one flagged segment.
    """
    y = np.asarray(y, dtype=np.float64)
    K = barrier.K
    if n_symbols % K != 0:
        raise ValueError(f"symbol count {n_symbols} not divisible by K={K}")
    q = n_symbols // K

    level = h * threshold
    chips = np.zeros(y.size)
    flags: list[str] = []
    support: list[int] = []
    n_barriers = 0
    buf_start = 0
    for t in range(y.size):
        if y[t] > level:
            chips[t] = barrier.A_H
            support.append(t)
            support += _segment_lows(y, buf_start, t, K - 1, chips, barrier.A_L,
                                     flags, "short-segment")
            buf_start = t + 1
            n_barriers += 1
    if n_barriers == 0:
        flags.append("no-barrier")
    elif n_barriers > q:
        flags.append("extra-barrier")
    if n_barriers < q and buf_start < y.size:
        flags.append("trailing-segment")
        support += _segment_lows(y, buf_start, y.size, K - 1, chips, barrier.A_L,
                                 flags, "short-segment")
    support_arr = np.sort(np.asarray(support, dtype=np.intp))
    return DetectionResult(chips=chips, support=support_arr, phase_flags=tuple(flags))


def storage_delay(n_chips: int, chip_rate: float, mode: str = "packet") -> float:
    """Receiver buffering delay in seconds.

    Packet-level detectors must hold all n_chips before deciding;
    streaming detectors decide one sample at a time.
    """
    if chip_rate <= 0:
        raise ValueError(f"chip rate must be positive, got {chip_rate}")
    if mode == "packet":
        return n_chips / chip_rate
    if mode == "sample":
        return 1.0 / chip_rate
    raise ValueError(f"unknown delay mode: {mode!r}")
