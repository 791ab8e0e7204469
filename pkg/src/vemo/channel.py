"""Propagation: integer-sample delays, free-space amplitude gains, echoes, superposition.

No carrier is modeled, so gains are real (phase 0) and delays are whole
samples. Multipath is a list of extra taps the scenario supplies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .scenario import C, PhyDefaults


@dataclass(frozen=True)
class ChannelSpec:
    delay_samples: int
    gain: complex
    label: str = ""

    def __post_init__(self):
        if self.delay_samples < 0:
            raise ValueError("delay_samples must be >= 0")
        if not np.isfinite(complex(self.gain)):
            raise ValueError("gain must be finite")


def samples_for(distance: float, phy: PhyDefaults, epoch_duration: float) -> int:
    """Propagation delay over ``distance`` meters, rounded to whole samples."""
    return int(round(distance / C * phy.sample_rate_epochs / epoch_duration))


def direct_channel(tx_pos, rx_pos, phy: PhyDefaults, epoch_duration: float, label: str = "") -> ChannelSpec:
    """Line-of-sight link: amplitude ref_gain / d."""
    d = math.dist(tx_pos, rx_pos)
    if d == 0:
        raise ValueError("transmitter and receiver positions coincide")
    return ChannelSpec(samples_for(d, phy, epoch_duration), phy.ref_gain / d, label)


def echo_channel(tx_pos, target_pos, rx_pos, reflectivity: float, phy: PhyDefaults,
                 epoch_duration: float, label: str = "") -> ChannelSpec:
    """Bistatic echo: amplitude ref_gain^2 * reflectivity / (d1 * d2)."""
    d1 = math.dist(tx_pos, target_pos)
    d2 = math.dist(target_pos, rx_pos)
    if d1 == 0 or d2 == 0:
        raise ValueError("target coincides with transmitter or receiver")
    return ChannelSpec(samples_for(d1 + d2, phy, epoch_duration),
                       phy.ref_gain**2 * reflectivity / (d1 * d2), label)


def multipath_taps(main: ChannelSpec, phy: PhyDefaults) -> list[ChannelSpec]:
    """The main path followed by the scenario's extra taps, scaled relative to it."""
    taps = [main]
    for tap in phy.multipath:
        taps.append(ChannelSpec(main.delay_samples + tap.delay_samples, main.gain * tap.gain,
                                f"{main.label}+mp{tap.delay_samples}"))
    return taps


def complex_noise(rng: np.random.Generator, n: int, power: float) -> np.ndarray:
    """Circularly-symmetric complex white Gaussian noise of variance ``power``."""
    if power == 0:
        return np.zeros(n, dtype=complex)
    return np.sqrt(power / 2) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))


def superpose(emissions, length: int, noise_power: float = 0.0, seed=None) -> np.ndarray:
    """Sum gain * delayed(signal) over ``emissions`` and add seeded noise.

    ``emissions`` is an iterable of ``(signal, ChannelSpec)`` pairs. Samples
    falling past ``length`` are truncated.
    """
    out = np.zeros(length, dtype=complex)
    for sig, ch in emissions:
        sig = np.asarray(sig, dtype=complex)
        start = ch.delay_samples
        if start >= length:
            continue
        stop = min(length, start + sig.size)
        out[start:stop] += ch.gain * sig[: stop - start]
    if noise_power > 0:
        out += complex_noise(np.random.default_rng(seed), length, noise_power)
    return out
