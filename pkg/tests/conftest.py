"""Shared fixtures and helpers for the test suite."""
from __future__ import annotations

import numpy as np
import pytest

# One line per acceptance criterion, printed in the terminal summary so the
# verdicts are visible regardless of output capturing.
_CRITERION_LINES: dict[int, str] = {}


def record_criterion(number: int, passed: bool, detail: str) -> None:
    verdict = "PASS" if passed else "FAIL"
    _CRITERION_LINES[number] = f"CRITERION {number:2d}: {verdict} — {detail}"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERION_LINES:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(_CRITERION_LINES):
        terminalreporter.write_line(_CRITERION_LINES[number])


@pytest.fixture
def rng() -> np.random.Generator:
    """Deterministic generator for tests that draw random data."""
    return np.random.default_rng(12345)


def crossing_db(snr_db: np.ndarray, ber: np.ndarray, target: float) -> float:
    """SNR where a log-BER curve crosses ``target``, by log-linear interpolation.

    Expects ber to be decreasing overall; uses the first bracket around the
    target and interpolates log10(ber) linearly in SNR.
    """
    snr_db = np.asarray(snr_db, dtype=float)
    ber = np.asarray(ber, dtype=float)
    for i in range(len(ber) - 1):
        if ber[i] >= target >= ber[i + 1] and ber[i + 1] > 0:
            lo, hi = np.log10(ber[i]), np.log10(ber[i + 1])
            t = np.log10(target)
            frac = (lo - t) / (lo - hi) if hi != lo else 0.0
            return float(snr_db[i] + frac * (snr_db[i + 1] - snr_db[i]))
    raise AssertionError(f"target {target} not bracketed by curve {ber}")
