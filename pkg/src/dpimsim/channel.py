"""Channel models: additive white Gaussian noise and Gamma-Gamma fading.

The received sequence is y = h * x + n with a flat channel coefficient
h and i.i.d. zero-mean Gaussian noise of standard deviation sigma_n.
Electrical SNR is defined against a reference pulse amplitude A as
gamma = A^2 / sigma_n^2.

Turbulence-induced fading uses the Gamma-Gamma model: the coefficient
is the product of two independent unit-mean Gamma factors (large- and
small-scale irradiance fluctuations), so E[h] = 1 and SNR definitions
stay comparable with the unfaded case.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

__all__ = [
    "ChannelState",
    "TurbulenceSpec",
    "apply_awgn",
    "gamma_gamma_pdf",
    "gamma_gamma_sample",
]


@dataclass(frozen=True)
class ChannelState:
    """Channel coefficient, noise level, and the reference amplitude for SNR."""

    h: float
    sigma_n: float
    A: float = 1.0

    def __post_init__(self) -> None:
        if self.h <= 0:
            raise ValueError(f"channel coefficient must be positive, got {self.h}")
        if self.sigma_n < 0:
            raise ValueError(f"noise std must be non-negative, got {self.sigma_n}")
        if self.A <= 0:
            raise ValueError(f"reference amplitude must be positive, got {self.A}")

    @property
    def gamma(self) -> float:
        """Electrical SNR A^2 / sigma_n^2 (inf when noiseless)."""
        if self.sigma_n == 0:
            return np.inf
        return (self.A / self.sigma_n) ** 2

    @property
    def snr_db(self) -> float:
        return 10.0 * np.log10(self.gamma)

    @classmethod
    def from_snr_db(cls, snr_db: float, A: float = 1.0, h: float = 1.0) -> "ChannelState":
        gamma = 10.0 ** (snr_db / 10.0)
        return cls(h=h, sigma_n=A / np.sqrt(gamma), A=A)

    def with_h(self, h: float) -> "ChannelState":
        return ChannelState(h=h, sigma_n=self.sigma_n, A=self.A)


@dataclass(frozen=True)
class TurbulenceSpec:
    """Gamma-Gamma shape parameters for the two irradiance scales."""

    lam: float
    mu: float

    def __post_init__(self) -> None:
        if self.lam <= 0 or self.mu <= 0:
            raise ValueError(
                f"turbulence parameters must be positive, got ({self.lam}, {self.mu})"
            )


def apply_awgn(frame, state: ChannelState, rng: np.random.Generator) -> np.ndarray:
    """Return y = h * x + n for one frame (or raw chip array)."""
    x = np.asarray(getattr(frame, "chips", frame), dtype=np.float64)
    return state.h * x + rng.normal(0.0, state.sigma_n, size=x.shape)


def gamma_gamma_pdf(h, spec: TurbulenceSpec):
    """Normalized Gamma-Gamma density of the fading coefficient.

    f(h) = 2 (lam mu)^((lam+mu)/2) / (Gamma(lam) Gamma(mu))
           * h^((lam+mu)/2 - 1) * K_{lam-mu}(2 sqrt(lam mu h))

    Evaluated in log space with the exponentially scaled Bessel function
    so that large shape parameters do not underflow.  Accepts scalars or
    arrays; h must be strictly positive.
    """
    h_arr = np.asarray(h, dtype=np.float64)
    if np.any(h_arr <= 0):
        raise ValueError("fading coefficient must be strictly positive")
    lam, mu = spec.lam, spec.mu
    half = (lam + mu) / 2.0
    z = 2.0 * np.sqrt(lam * mu * h_arr)
    # kve(v, z) = K_v(z) * exp(z); log K_v = log kve - z.
    log_bessel = np.log(special.kve(lam - mu, z)) - z
    log_f = (
        np.log(2.0)
        + half * np.log(lam * mu)
        - special.gammaln(lam)
        - special.gammaln(mu)
        + (half - 1.0) * np.log(h_arr)
        + log_bessel
    )
    out = np.exp(log_f)
    return float(out) if np.isscalar(h) else out


def gamma_gamma_sample(spec: TurbulenceSpec, rng: np.random.Generator,
                       size: int | tuple | None = None):
    """Draw fading coefficients as the product of two unit-mean Gamma factors."""
    x = rng.gamma(spec.lam, 1.0 / spec.lam, size=size)
    y = rng.gamma(spec.mu, 1.0 / spec.mu, size=size)
    return x * y
