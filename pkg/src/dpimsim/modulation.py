"""Bit-to-chip mapping and demapping for pulse-interval modulation.

DPIM carries each log2(M)-bit symbol value v in the gap after a pulse:
a symbol is one pulse chip followed by v + g empty chips, where g is a
fixed guard interval.  Symbol lengths therefore vary between 1 + g and
M + g chips and the chip length of a packet depends on its payload; on
average a symbol occupies (M + 2g + 1) / 2 chips.

The barrier variant (BDPIM) keeps the interval structure but raises the
pulse of every K-th symbol to a higher amplitude A_H while the remaining
pulses use A_L, subject to the average-power constraint
(K - 1) * A_L + A_H = K * A.  The elevated pulses act as known anchors
that stop demapping errors from propagating across symbol groups.

Baseline mappings (PPM, MDPIM, DHPIM) are provided for comparison runs.
Bit order is most-significant bit first within each symbol.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ModulationSpec",
    "BarrierSpec",
    "ChipFrame",
    "DemapResult",
    "avg_symbol_duration",
    "barrier_amplitude",
    "bits_to_symbols",
    "symbols_to_bits",
    "map_dpim",
    "demap_dpim",
    "map_bdpim",
    "map_baseline",
    "demap_baseline",
    "mdpim_levels",
]

# Relative slack for the barrier power-constraint check.
_POWER_CONSTRAINT_RTOL = 1e-12


@dataclass(frozen=True)
class ModulationSpec:
    """Modulation order M (power of two) and guard-interval length g in chips."""

    M: int
    g: int = 0

    def __post_init__(self) -> None:
        if self.M < 2 or (self.M & (self.M - 1)) != 0:
            raise ValueError(f"M must be a power of two >= 2, got {self.M}")
        if self.g < 0:
            raise ValueError(f"guard interval must be non-negative, got {self.g}")

    @property
    def bits_per_symbol(self) -> int:
        return self.M.bit_length() - 1

    @property
    def avg_symbol_duration(self) -> float:
        # (M + 2g + 1) / 2 is always a multiple of 0.5, so the float is exact.
        return (self.M + 2 * self.g + 1) / 2

    @property
    def max_symbol_chips(self) -> int:
        # Longest valid pulse-to-pulse interval: value M - 1 plus pulse and guard.
        return self.M + self.g


@dataclass(frozen=True)
class BarrierSpec:
    """Amplitude plan for barrier signalling.

    Every K-th pulse is sent at A_H, the others at A_L, with
    (K - 1) * A_L + A_H = K * A so the average pulse amplitude stays A.
    """

    K: int
    A: float
    A_L: float
    A_H: float

    def __post_init__(self) -> None:
        if self.K < 2:
            raise ValueError(f"barrier period K must be >= 2, got {self.K}")
        if not (0 < self.A_L < self.A_H):
            raise ValueError(
                f"need 0 < A_L < A_H, got A_L={self.A_L}, A_H={self.A_H}"
            )
        budget = self.K * self.A
        if abs((self.K - 1) * self.A_L + self.A_H - budget) > _POWER_CONSTRAINT_RTOL * abs(budget):
            raise ValueError(
                "amplitudes violate the power constraint "
                f"(K-1)*A_L + A_H = K*A: K={self.K}, A={self.A}, "
                f"A_L={self.A_L}, A_H={self.A_H}"
            )

    @classmethod
    def from_low_amplitude(cls, K: int, A: float, A_L: float) -> "BarrierSpec":
        """Build a spec from (K, A, A_L), deriving A_H from the power constraint."""
        return cls(K=K, A=A, A_L=A_L, A_H=barrier_amplitude(K, A, A_L))


@dataclass(frozen=True, eq=False)
class ChipFrame:
    """A packet's transmit chip sequence plus its symbol count and scheme tag."""

    chips: np.ndarray
    n_symbols: int
    scheme: str

    @property
    def n_chips(self) -> int:
        return int(self.chips.shape[0])


@dataclass(frozen=True, eq=False)
class DemapResult:
    """Demapped bits plus a validity flag.

    ``clean`` is False when the chip sequence was not a well-formed frame:
    no pulses at all, chips before the first pulse, an out-of-range
    pulse interval (clamped or split during decoding), or a symbol-count
    mismatch against the expected packet size.
    """

    bits: np.ndarray
    clean: bool


def avg_symbol_duration(spec: ModulationSpec) -> float:
    """Average chips per symbol over uniform data: (M + 2g + 1) / 2."""
    return spec.avg_symbol_duration


def barrier_amplitude(K: int, A: float, A_L: float) -> float:
    """High pulse amplitude A_H = K*A - (K-1)*A_L fixed by the power budget."""
    if K < 2:
        raise ValueError(f"barrier period K must be >= 2, got {K}")
    if not (0 < A_L < A):
        raise ValueError(f"need 0 < A_L < A (A_L={A_L}, A={A})")
    return K * A - (K - 1) * A_L


def bits_to_symbols(bits: np.ndarray, bits_per_symbol: int) -> np.ndarray:
    """Pack a flat bit array into symbol values, MSB first."""
    bits = np.asarray(bits)
    if bits.size % bits_per_symbol != 0:
        raise ValueError(
            f"bit count {bits.size} not divisible by {bits_per_symbol}"
        )
    grouped = bits.reshape(-1, bits_per_symbol).astype(np.int64)
    weights = 1 << np.arange(bits_per_symbol - 1, -1, -1, dtype=np.int64)
    return grouped @ weights


def symbols_to_bits(values: np.ndarray, bits_per_symbol: int) -> np.ndarray:
    """Unpack symbol values into a flat bit array, MSB first."""
    values = np.asarray(values, dtype=np.int64)
    shifts = np.arange(bits_per_symbol - 1, -1, -1, dtype=np.int64)
    return ((values[:, None] >> shifts) & 1).astype(np.uint8).ravel()


def _symbol_lengths(values: np.ndarray, spec: ModulationSpec) -> np.ndarray:
    # One pulse chip, then value + guard empty chips.
    return 1 + spec.g + values


def _build_frame(values: np.ndarray, spec: ModulationSpec, amplitudes: np.ndarray,
                 scheme: str) -> ChipFrame:
    lengths = _symbol_lengths(values, spec)
    starts = np.cumsum(lengths) - lengths
    chips = np.zeros(int(lengths.sum()), dtype=np.float64)
    chips[starts] = amplitudes
    return ChipFrame(chips=chips, n_symbols=int(values.size), scheme=scheme)


def map_dpim(bits: np.ndarray, spec: ModulationSpec, amplitude: float = 1.0) -> ChipFrame:
    """Map bits to a DPIM chip frame: pulse, then v + g empty chips per symbol."""
    values = bits_to_symbols(bits, spec.bits_per_symbol)
    amps = np.full(values.shape, float(amplitude))
    return _build_frame(values, spec, amps, "dpim")


def map_bdpim(bits: np.ndarray, spec: ModulationSpec, barrier: BarrierSpec) -> ChipFrame:
    """Map bits to a barrier frame: every K-th pulse at A_H, the rest at A_L."""
    values = bits_to_symbols(bits, spec.bits_per_symbol)
    if values.size % barrier.K != 0:
        raise ValueError(
            f"symbol count {values.size} not divisible by barrier period {barrier.K}"
        )
    index = np.arange(1, values.size + 1)
    amps = np.where(index % barrier.K == 0, barrier.A_H, barrier.A_L)
    return _build_frame(values, spec, amps, "bdpim")


def demap_dpim(chips: np.ndarray, spec: ModulationSpec,
               n_symbols: int | None = None,
               one_per_pulse: bool = False) -> DemapResult:
    """Recover bits from a hard-decision chip sequence.

    Splits the sequence at pulse positions (nonzero chips); a pulse
    followed by an interval of l chips total decodes to symbol value
    l - 1 - g.  Out-of-range intervals are repaired deterministically:
    intervals longer than M + g are split greedily into maximal valid
    symbols, and intervals shorter than 1 + g clamp to symbol value 0.
    When ``n_symbols`` is given the output is truncated or zero-padded
    to exactly n_symbols * log2(M) bits.

    With ``one_per_pulse`` each detected pulse starts exactly one
    symbol and over-long intervals clamp to value M - 1 instead of
    splitting.  This is the parse for detectors that fix the pulse
    count (sort-based detection): a displaced pulse then only scrambles
    the symbols between the false and the missed position, after which
    the parse falls back into step, instead of shifting everything to
    the end of the packet.
    """
    chips = np.asarray(chips, dtype=np.float64)
    if chips.size == 0:
        raise ValueError("cannot demap an empty chip sequence")
    m = spec.bits_per_symbol
    pulse_pos = np.flatnonzero(chips > 0)
    if pulse_pos.size == 0:
        n_bits = 0 if n_symbols is None else n_symbols * m
        return DemapResult(bits=np.zeros(n_bits, dtype=np.uint8), clean=False)

    clean = pulse_pos[0] == 0  # chips before the first pulse have no anchor
    # Interval owned by each pulse: up to the next pulse, or frame end.
    boundaries = np.append(pulse_pos, chips.size)
    intervals = np.diff(boundaries)

    span = spec.max_symbol_chips
    lo = 1 + spec.g
    clean = clean and bool(np.all((intervals >= lo) & (intervals <= span)))

    if one_per_pulse:
        values = np.clip(intervals - lo, 0, spec.M - 1)
        return _finalize_values(values, m, bool(clean), n_symbols)

    # Greedy split: carve off maximal-length symbols (value M - 1) until the
    # remainder fits a single symbol; clamp a too-short remainder to value 0.
    n_sub = (intervals - 1) // span + 1
    remainder = intervals - (n_sub - 1) * span
    last_value = np.clip(remainder - lo, 0, spec.M - 1)

    total = int(n_sub.sum())
    values = np.full(total, spec.M - 1, dtype=np.int64)
    last_slots = np.cumsum(n_sub) - 1
    values[last_slots] = last_value

    return _finalize_values(values, m, bool(clean), n_symbols)


def mdpim_levels(spec: ModulationSpec, A: float = 1.0, ratio: float = 2.0) -> tuple[float, float]:
    """Two-amplitude levels for MDPIM at the same average power per chip.

    MDPIM halves the interval alphabet and moves one bit into the pulse
    amplitude (A_L or A_H = ratio * A_L), so its average symbol duration
    (M/2 + 2g + 1) / 2 is shorter than DPIM's.  Levels are scaled so that
    mean pulse amplitude / mean symbol duration matches a DPIM reference
    of amplitude A, making comparison runs fair on optical power.
    """
    if ratio <= 1:
        raise ValueError(f"level ratio must exceed 1, got {ratio}")
    half_spec = ModulationSpec(M=spec.M // 2, g=spec.g)
    # (A_L + A_H)/2 / L_half = A / L_full with A_H = ratio * A_L.
    a_l = 2 * A * half_spec.avg_symbol_duration / (
        spec.avg_symbol_duration * (1 + ratio)
    )
    return a_l, ratio * a_l


def map_baseline(scheme: str, bits: np.ndarray, spec: ModulationSpec,
                 levels: float | tuple[float, float]) -> ChipFrame:
    """Map bits under one of the comparison schemes: ppm, mdpim, or dhpim.

    PPM places a single pulse in slot v of an M-chip symbol.  MDPIM uses
    the symbol's top bit to pick the pulse amplitude (low for values
    below M/2, high otherwise) and the remaining bits as a shortened
    interval of (v mod M/2) + g empty chips.  DHPIM widens the pulse to
    two chips for the upper half of values instead; ``levels`` is a
    (low, high) pair for MDPIM and a single amplitude otherwise.
    """
    scheme = scheme.lower()
    values = bits_to_symbols(bits, spec.bits_per_symbol)

    if scheme == "ppm":
        amplitude = float(levels)
        chips = np.zeros(values.size * spec.M, dtype=np.float64)
        chips[np.arange(values.size) * spec.M + values] = amplitude
        return ChipFrame(chips=chips, n_symbols=int(values.size), scheme="ppm")

    if spec.M < 4:
        raise ValueError(f"{scheme} needs M >= 4 to split the value range, got M={spec.M}")
    half = spec.M // 2
    sub_value = values % half
    high = values >= half

    if scheme == "mdpim":
        try:
            a_l, a_h = levels  # type: ignore[misc]
        except TypeError:
            raise ValueError("mdpim needs a (low, high) amplitude pair") from None
        if not (0 < a_l < a_h):
            raise ValueError(f"need 0 < low < high amplitude, got {levels}")
        lengths = 1 + spec.g + sub_value
        starts = np.cumsum(lengths) - lengths
        chips = np.zeros(int(lengths.sum()), dtype=np.float64)
        chips[starts] = np.where(high, a_h, a_l)
        return ChipFrame(chips=chips, n_symbols=int(values.size), scheme="mdpim")

    if scheme == "dhpim":
        amplitude = float(levels)
        header = np.where(high, 2, 1)  # double-width header for the upper half
        lengths = header + spec.g + sub_value
        starts = np.cumsum(lengths) - lengths
        chips = np.zeros(int(lengths.sum()), dtype=np.float64)
        chips[starts] = amplitude
        chips[starts[high] + 1] = amplitude
        return ChipFrame(chips=chips, n_symbols=int(values.size), scheme="dhpim")

    raise ValueError(f"unsupported baseline scheme: {scheme!r}")


def _finalize_values(values: np.ndarray, m: int, clean: bool,
                     n_symbols: int | None) -> DemapResult:
    if n_symbols is not None:
        if values.size != n_symbols:
            clean = False
        if values.size > n_symbols:
            values = values[:n_symbols]
        elif values.size < n_symbols:
            values = np.concatenate(
                [values, np.zeros(n_symbols - values.size, dtype=np.int64)]
            )
    return DemapResult(bits=symbols_to_bits(values, m), clean=bool(clean))


def demap_baseline(chips: np.ndarray, scheme: str, spec: ModulationSpec,
                   levels: float | tuple[float, float] | None = None,
                   n_symbols: int | None = None) -> DemapResult:
    """Recover bits from a hard-decision frame of a comparison scheme.

    PPM reads the strongest chip of each M-chip block.  MDPIM mirrors
    the plain-interval demapper on a halved alphabet and reads the
    symbol's top bit from the pulse amplitude class (``levels`` gives
    the (low, high) pair; the class boundary is their midpoint);
    intervals synthesized while repairing an over-long gap default to
    the low class.  DHPIM reads the top bit from the header width
    (two adjacent pulses = wide header) and needs at least one guard
    chip, since back-to-back symbols are otherwise not uniquely
    parseable.  Truncation/padding behavior matches :func:`demap_dpim`.
    """
    scheme = scheme.lower()
    chips = np.asarray(chips, dtype=np.float64)
    if chips.size == 0:
        raise ValueError("cannot demap an empty chip sequence")
    m = spec.bits_per_symbol

    if scheme == "ppm":
        n_blocks = chips.size // spec.M
        clean = n_blocks * spec.M == chips.size
        blocks = chips[: n_blocks * spec.M].reshape(n_blocks, spec.M)
        values = np.argmax(blocks, axis=1).astype(np.int64)
        return _finalize_values(values, m, clean, n_symbols)

    if scheme not in ("mdpim", "dhpim"):
        raise ValueError(f"unsupported baseline scheme: {scheme!r}")
    if spec.M < 4:
        raise ValueError(f"{scheme} needs M >= 4 to split the value range, got M={spec.M}")
    half = spec.M // 2
    lo = 1 + spec.g

    if scheme == "mdpim":
        try:
            a_l, a_h = levels  # type: ignore[misc]
        except TypeError:
            raise ValueError("mdpim needs a (low, high) amplitude pair") from None
        pulse_pos = np.flatnonzero(chips > 0)
        if pulse_pos.size == 0:
            return _finalize_values(np.zeros(0, dtype=np.int64), m, False, n_symbols)
        clean = pulse_pos[0] == 0
        high = chips[pulse_pos] >= 0.5 * (a_l + a_h)
        intervals = np.diff(np.append(pulse_pos, chips.size))
        span = half + spec.g
        clean = clean and bool(np.all((intervals >= lo) & (intervals <= span)))
        n_sub = (intervals - 1) // span + 1
        remainder = intervals - (n_sub - 1) * span
        last_value = np.clip(remainder - lo, 0, half - 1) + high * half
        total = int(n_sub.sum())
        values = np.full(total, half - 1, dtype=np.int64)
        values[np.cumsum(n_sub) - 1] = last_value
        return _finalize_values(values, m, clean, n_symbols)

    # dhpim
    if spec.g < 1:
        raise ValueError("dhpim demapping needs a guard chip to separate headers")
    pulse_pos = np.flatnonzero(chips > 0)
    if pulse_pos.size == 0:
        return _finalize_values(np.zeros(0, dtype=np.int64), m, False, n_symbols)
    is_pulse = chips > 0
    # Header starts: pulses not directly preceded by another pulse.
    preceded = np.zeros(pulse_pos.size, dtype=bool)
    preceded[pulse_pos > 0] = is_pulse[pulse_pos[pulse_pos > 0] - 1]
    starts = pulse_pos[~preceded]
    wide = np.zeros(starts.size, dtype=bool)
    inside = starts + 1 < chips.size
    wide[inside] = is_pulse[starts[inside] + 1]
    clean = starts[0] == 0 and starts.size + int(wide.sum()) == pulse_pos.size
    intervals = np.diff(np.append(starts, chips.size))
    width = np.where(wide, 2, 1)
    sub = intervals - width - spec.g
    clean = clean and bool(np.all((sub >= 0) & (sub <= half - 1)))
    values = np.clip(sub, 0, half - 1) + wide * half
    return _finalize_values(values.astype(np.int64), m, bool(clean), n_symbols)
