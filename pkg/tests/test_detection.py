"""Unit tests for the threshold, sort, exhaustive, and barrier detectors."""
from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dpimsim.detection import (
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
from dpimsim.modulation import (
    BarrierSpec,
    ModulationSpec,
    map_baseline,
    map_bdpim,
    mdpim_levels,
)


class TestOtd:
    def test_threshold_known_value(self):
        assert otd_threshold(1.0, 1.0, 10.0, 3.5) == pytest.approx(
            0.5 + 0.1 * np.log(2.5))

    def test_threshold_high_snr_limit(self):
        assert otd_threshold(1.0, 1.0, 1e12, 3.5) == pytest.approx(0.5, abs=1e-9)

    def test_threshold_no_bias_for_equal_priors(self):
        # L_s = 2 means one pulse per empty chip on average: plain midpoint.
        assert otd_threshold(1.0, 1.0, 10.0, 2.0) == 0.5

    def test_threshold_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            otd_threshold(1.0, 1.0, 10.0, 1.0)
        with pytest.raises(ValueError):
            otd_threshold(1.0, 1.0, 0.0, 3.5)

    def test_detect_marks_crossings(self):
        spec = ThresholdSpec(a_t=0.5)
        out = otd_detect(np.array([0.9, 0.3, 0.6]), spec)
        assert out.support.tolist() == [0, 2]
        assert out.chips.tolist() == [1.0, 0.0, 1.0]

    def test_detect_uses_channel_gain(self):
        spec = ThresholdSpec(a_t=0.5, h=2.0)
        assert spec.threshold == 1.0
        out = otd_detect(np.array([0.9, 1.2]), spec)
        assert out.support.tolist() == [1]

    def test_threshold_spec_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            ThresholdSpec(a_t=0.0)


class TestSortDetectors:
    def test_known_example(self):
        y = np.array([0.9, 0.1, 0.2, 0.8])
        for detect in (osd_detect, omp_detect):
            out = detect(y, 2)
            assert out.support.tolist() == [0, 3]
            assert out.chips.tolist() == [1.0, 0.0, 0.0, 1.0]
        out = mlsd_exhaustive(y, 1.0, 2)
        assert out.support.tolist() == [0, 3]

    def test_all_samples_selected(self):
        y = np.array([0.3, -0.2, 0.5])
        assert osd_detect(y, 3).support.tolist() == [0, 1, 2]

    def test_ties_prefer_lower_index(self):
        y = np.array([0.5, 0.7, 0.5])
        assert osd_detect(y, 2).support.tolist() == [0, 1]
        assert mlsd_exhaustive(y, 1.0, 2).support.tolist() == [0, 1]

    def test_scale_invariance(self, rng):
        y = rng.normal(size=64)
        base = osd_detect(y, 10).support
        assert np.array_equal(osd_detect(3.7 * y, 10).support, base)

    def test_rejects_too_many_pulses(self):
        for detect in (osd_detect, omp_detect):
            with pytest.raises(ValueError):
                detect(np.zeros(3), 4)

    @given(st.integers(4, 16), st.integers(0, 2**32 - 1))
    @settings(max_examples=60, deadline=None)
    def test_mlsd_osd_omp_agree(self, length, seed):
        # The least-squares minimizer over fixed-size supports is exactly
        # the set of largest samples, so all three detectors coincide.
        gen = np.random.default_rng(seed)
        y = gen.normal(0.3, 1.0, size=length)
        n_pulses = int(gen.integers(1, length + 1))
        ref = osd_detect(y, n_pulses).support
        assert np.array_equal(mlsd_exhaustive(y, 1.0, n_pulses).support, ref)
        assert np.array_equal(omp_detect(y, n_pulses).support, ref)

    def test_mlsd_amplitude_and_gain_do_not_change_support(self, rng):
        y = rng.normal(0.2, 1.0, size=12)
        ref = mlsd_exhaustive(y, 1.0, 4).support
        assert np.array_equal(mlsd_exhaustive(y, 0.6, 4, amplitude=1.4).support, ref)

    def test_mlsd_enumeration_cap(self):
        with pytest.raises(EnumerationCapError):
            mlsd_exhaustive(np.zeros(50), 1.0, 25)

    def test_mlsd_rejects_impossible_support(self):
        with pytest.raises(ValueError):
            mlsd_exhaustive(np.zeros(3), 1.0, 4)


class TestMdpimDetector:
    SPEC = ModulationSpec(M=8, g=1)

    def test_threshold_values(self):
        levels = (0.5, 1.0)
        t1, t2 = mdpim_thresholds(levels, h=1.0, sigma_n=0.2, L_s=2.5)
        assert t1 == pytest.approx(0.25 + 0.04 * np.log(3.0) / 0.5)
        assert t2 == pytest.approx(0.75)

    def test_threshold_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            mdpim_thresholds((1.0, 0.5), 1.0, 0.2, 2.5)
        with pytest.raises(ValueError):
            mdpim_thresholds((0.5, 1.0), 1.0, 0.2, 1.0)
        with pytest.raises(ValueError):
            mdpim_thresholds((0.5, 1.0), 1.0, 0.0, 2.5)

    def test_noiseless_classification(self, rng):
        levels = mdpim_levels(self.SPEC)
        bits = rng.integers(0, 2, size=60).astype(np.uint8)
        frame = map_baseline("mdpim", bits, self.SPEC, levels)
        thresholds = mdpim_thresholds(levels, 1.0, 0.05,
                                      self.SPEC.avg_symbol_duration)
        out = mdpim_otd_detect(frame.chips, thresholds, levels)
        assert np.allclose(out.chips, frame.chips)

    def test_three_way_split(self):
        out = mdpim_otd_detect(np.array([0.1, 0.45, 0.9]), (0.3, 0.7), (0.5, 1.0))
        assert out.chips.tolist() == [0.0, 0.5, 1.0]
        assert out.support.tolist() == [1, 2]


class TestBarrierDetectors:
    MOD = ModulationSpec(M=4, g=1)
    BARRIER = BarrierSpec.from_low_amplitude(K=5, A=1.0, A_L=0.8)

    def _frame(self, rng, n_symbols=20):
        bits = rng.integers(0, 2, size=n_symbols * 2).astype(np.uint8)
        return map_bdpim(bits, self.MOD, self.BARRIER)

    def test_osd_noiseless_recovery(self, rng):
        frame = self._frame(rng)
        out = bdpim_osd_detect(frame.chips, frame.n_symbols, self.BARRIER)
        assert np.allclose(out.chips, frame.chips)
        assert out.phase_flags == ()
        assert out.support.size == frame.n_symbols

    def test_osd_single_group_uses_global_max(self):
        barrier = BarrierSpec.from_low_amplitude(K=2, A=1.0, A_L=0.5)
        y = np.array([0.4, 0.1, 1.2, 0.0])
        out = bdpim_osd_detect(y, 2, barrier)
        assert np.flatnonzero(out.chips == barrier.A_H).tolist() == [2]

    def test_osd_short_segment_flagged(self):
        barrier = BarrierSpec.from_low_amplitude(K=2, A=1.0, A_L=0.5)
        # The largest sample sits at index 0, so the span before it cannot
        # hold the required low pulse.
        out = bdpim_osd_detect(np.array([1.4, 0.2, 0.1]), 2, barrier)
        assert "short-segment" in out.phase_flags

    def test_osd_rejects_partial_group(self):
        with pytest.raises(ValueError):
            bdpim_osd_detect(np.zeros(30), 21, self.BARRIER)

    def test_otd_threshold_values(self):
        b = BarrierSpec.from_low_amplitude(K=10, A=1.0, A_L=0.86)
        thr = bdpim_otd_threshold(b, h=1.0, sigma_n=0.5)
        expected = (b.A_H + b.A_L) / 2 + 0.25 * np.log(9.0) / (b.A_H - b.A_L)
        assert thr == pytest.approx(expected)
        assert thr == pytest.approx(1.9524, abs=2e-4)

    def test_otd_threshold_noiseless_is_midpoint(self):
        b = BarrierSpec.from_low_amplitude(K=10, A=1.0, A_L=0.86)
        assert bdpim_otd_threshold(b, 1.0, 0.0) == pytest.approx((b.A_H + b.A_L) / 2)

    def test_otd_threshold_equal_priors_is_midpoint(self):
        b = BarrierSpec.from_low_amplitude(K=2, A=1.0, A_L=0.5)
        assert bdpim_otd_threshold(b, 1.0, 0.7) == pytest.approx((b.A_H + b.A_L) / 2)

    def test_otd_osd_noiseless_recovery(self, rng):
        frame = self._frame(rng)
        thr = bdpim_otd_threshold(self.BARRIER, 1.0, 0.0)
        out = bdpim_otd_osd_detect(frame.chips, frame.n_symbols, self.BARRIER, thr)
        assert np.allclose(out.chips, frame.chips)
        assert out.phase_flags == ()

    def test_otd_osd_no_barrier_flag(self):
        out = bdpim_otd_osd_detect(np.zeros(12), 10,
                                   BarrierSpec.from_low_amplitude(K=5, A=1.0, A_L=0.8),
                                   threshold=5.0)
        assert "no-barrier" in out.phase_flags

    def test_otd_osd_extra_barrier_flag(self, rng):
        frame = self._frame(rng)
        # A threshold below A_L makes every low pulse fire as a barrier.
        out = bdpim_otd_osd_detect(frame.chips, frame.n_symbols, self.BARRIER,
                                   threshold=self.BARRIER.A_L / 2)
        assert "extra-barrier" in out.phase_flags

    def test_otd_osd_miss_confined_to_neighbourhood(self, rng):
        # Attenuating one barrier below threshold corrupts only the merged
        # span around it (plus a flagged trailing search); chips up to the
        # previous barrier and between later barriers are untouched.
        frame = self._frame(rng, n_symbols=25)
        thr = bdpim_otd_threshold(self.BARRIER, 1.0, 0.0)
        clean = bdpim_otd_osd_detect(frame.chips, frame.n_symbols, self.BARRIER, thr)
        positions = np.flatnonzero(np.isclose(frame.chips, self.BARRIER.A_H))
        assert positions.size == 5
        faulty = frame.chips.copy()
        faulty[positions[2]] = 0.5 * self.BARRIER.A_L
        out = bdpim_otd_osd_detect(faulty, frame.n_symbols, self.BARRIER, thr)
        assert "trailing-segment" in out.phase_flags
        # Identical through the barrier before the miss...
        assert np.array_equal(out.chips[: positions[1] + 1],
                              clean.chips[: positions[1] + 1])
        # ...and again between the barrier after the miss and the last one.
        assert np.array_equal(out.chips[positions[3] + 1: positions[4] + 1],
                              clean.chips[positions[3] + 1: positions[4] + 1])

    def test_otd_osd_rejects_partial_group(self):
        with pytest.raises(ValueError):
            bdpim_otd_osd_detect(np.zeros(30), 21, self.BARRIER, 1.5)

    def test_threshold_rejects_inverted_levels(self):
        b = BarrierSpec.from_low_amplitude(K=5, A=1.0, A_L=0.8)
        good = object.__new__(BarrierSpec)
        object.__setattr__(good, "K", b.K)
        object.__setattr__(good, "A", b.A)
        object.__setattr__(good, "A_L", b.A_H)
        object.__setattr__(good, "A_H", b.A_L)
        with pytest.raises(ValueError):
            bdpim_otd_threshold(good, 1.0, 0.1)


class TestStorageDelay:
    def test_packet_mode(self):
        assert storage_delay(350, 1e6, "packet") == pytest.approx(350e-6)

    def test_sample_mode(self):
        assert storage_delay(350, 1e6, "sample") == pytest.approx(1e-6)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            storage_delay(10, 0.0)
        with pytest.raises(ValueError):
            storage_delay(10, 1e6, "stream")
