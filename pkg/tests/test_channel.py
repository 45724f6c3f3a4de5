"""Unit tests for the AWGN channel and Gamma-Gamma fading model."""
from __future__ import annotations

import numpy as np
import pytest
from scipy import integrate, stats

from dpimsim.channel import (
    ChannelState,
    TurbulenceSpec,
    apply_awgn,
    gamma_gamma_pdf,
    gamma_gamma_sample,
)
from dpimsim.modulation import ModulationSpec, map_dpim


class TestChannelState:
    def test_snr_accessors(self):
        state = ChannelState.from_snr_db(20.0)
        assert state.sigma_n == pytest.approx(0.1)
        assert state.gamma == pytest.approx(100.0)
        assert state.snr_db == pytest.approx(20.0)

    def test_noiseless_gamma_is_infinite(self):
        assert ChannelState(h=1.0, sigma_n=0.0).gamma == np.inf

    @pytest.mark.parametrize("kw", [
        dict(h=0.0, sigma_n=0.1),
        dict(h=-1.0, sigma_n=0.1),
        dict(h=1.0, sigma_n=-0.1),
        dict(h=1.0, sigma_n=0.1, A=0.0),
    ])
    def test_rejects_bad_parameters(self, kw):
        with pytest.raises(ValueError):
            ChannelState(**kw)


class TestAwgn:
    def test_noiseless_limit_is_exact(self, rng):
        spec = ModulationSpec(M=4, g=1)
        bits = rng.integers(0, 2, size=200).astype(np.uint8)
        frame = map_dpim(bits, spec)
        y = apply_awgn(frame, ChannelState(h=0.7, sigma_n=0.0), rng)
        assert np.array_equal(y, 0.7 * frame.chips)

    def test_noise_statistics(self):
        n = 1_000_000
        sigma = 0.5
        rng = np.random.default_rng(99)
        y = apply_awgn(np.zeros(n), ChannelState(h=1.0, sigma_n=sigma), rng)
        assert abs(y.mean()) < 3 * sigma / np.sqrt(n)
        assert y.var() == pytest.approx(sigma**2, rel=0.01)

    def test_noise_is_white(self):
        n = 200_000
        rng = np.random.default_rng(5)
        y = apply_awgn(np.zeros(n), ChannelState(h=1.0, sigma_n=1.0), rng)
        for lag in (1, 2, 5):
            corr = np.dot(y[:-lag], y[lag:]) / (n - lag)
            # Sample autocovariance of white noise has std ~ sigma^2 / sqrt(n).
            assert abs(corr) < 3 / np.sqrt(n - lag)

    def test_noise_scales_linearly_with_sigma(self):
        x = np.zeros(1000)
        y1 = apply_awgn(x, ChannelState(h=1.0, sigma_n=0.25), np.random.default_rng(42))
        y2 = apply_awgn(x, ChannelState(h=1.0, sigma_n=0.5), np.random.default_rng(42))
        assert np.allclose(y2, 2.0 * y1)

    def test_channel_gain_applies_to_signal_only(self, rng):
        x = np.ones(64)
        state = ChannelState(h=0.3, sigma_n=0.0)
        assert np.allclose(apply_awgn(x, state, rng), 0.3)


class TestGammaGammaPdf:
    SPEC = TurbulenceSpec(lam=11.6, mu=10.1)

    def test_integrates_to_one(self):
        val, err = integrate.quad(lambda h: gamma_gamma_pdf(h, self.SPEC),
                                  0, np.inf, limit=200)
        assert val == pytest.approx(1.0, abs=1e-6)

    def test_unit_mean(self):
        val, err = integrate.quad(lambda h: h * gamma_gamma_pdf(h, self.SPEC),
                                  0, np.inf, limit=200)
        assert val == pytest.approx(1.0, abs=1e-6)

    def test_unimodal_with_mode_below_one(self):
        h = np.linspace(1e-3, 3.0, 4000)
        f = gamma_gamma_pdf(h, self.SPEC)
        peak = int(np.argmax(f))
        assert h[peak] < 1.0
        d = np.diff(f)
        # Rises up to the peak, falls after it: one sign change.
        assert np.all(d[:peak] > 0)
        assert np.all(d[peak + 1:] < 0)

    def test_rejects_nonpositive_h(self):
        with pytest.raises(ValueError):
            gamma_gamma_pdf(0.0, self.SPEC)
        with pytest.raises(ValueError):
            gamma_gamma_pdf(np.array([0.5, -1.0]), self.SPEC)

    def test_rejects_bad_shape_parameters(self):
        with pytest.raises(ValueError):
            TurbulenceSpec(lam=0.0, mu=10.0)
        with pytest.raises(ValueError):
            TurbulenceSpec(lam=10.0, mu=-1.0)

    def test_symmetric_in_parameters(self):
        h = np.array([0.3, 1.0, 2.4])
        a = gamma_gamma_pdf(h, TurbulenceSpec(11.6, 10.1))
        b = gamma_gamma_pdf(h, TurbulenceSpec(10.1, 11.6))
        assert np.allclose(a, b)


class TestGammaGammaSampler:
    SPEC = TurbulenceSpec(lam=11.6, mu=10.1)

    def test_sample_mean_is_one(self):
        rng = np.random.default_rng(17)
        h = gamma_gamma_sample(self.SPEC, rng, size=1_000_000)
        assert abs(h.mean() - 1.0) < 3 * h.std() / np.sqrt(h.size)

    def test_sample_matches_density(self):
        # Kolmogorov-Smirnov distance between the empirical CDF and the CDF
        # obtained by integrating the analytic density.
        rng = np.random.default_rng(23)
        h = np.sort(gamma_gamma_sample(self.SPEC, rng, size=1_000_000))
        grid = np.linspace(1e-4, float(h[-1]) * 1.05, 6000)
        pdf = gamma_gamma_pdf(grid, self.SPEC)
        cdf = integrate.cumulative_trapezoid(pdf, grid, initial=0.0)
        cdf /= cdf[-1]
        model_cdf = np.interp(h, grid, cdf)
        empirical = (np.arange(1, h.size + 1) - 0.5) / h.size
        ks = np.max(np.abs(model_cdf - empirical))
        assert ks < 0.005

    def test_variance_vanishes_for_weak_turbulence(self):
        rng = np.random.default_rng(31)
        strong = gamma_gamma_sample(TurbulenceSpec(4.0, 4.0), rng, size=100_000)
        weak = gamma_gamma_sample(TurbulenceSpec(500.0, 500.0), rng, size=100_000)
        assert weak.var() < strong.var() / 50
        assert weak.var() < 0.01

    def test_scintillation_index_matches_model(self):
        # Var[h] = 1/lam + 1/mu + 1/(lam mu) for the product of two
        # independent unit-mean Gamma factors.
        rng = np.random.default_rng(41)
        h = gamma_gamma_sample(self.SPEC, rng, size=2_000_000)
        lam, mu = self.SPEC.lam, self.SPEC.mu
        expected = 1 / lam + 1 / mu + 1 / (lam * mu)
        assert h.var() == pytest.approx(expected, rel=0.01)

    def test_scalar_draw(self):
        rng = np.random.default_rng(1)
        h = gamma_gamma_sample(self.SPEC, rng)
        assert np.ndim(h) == 0 and h > 0
