"""Link quality measures."""

from __future__ import annotations

import math

import numpy as np

NO_SIGNAL = "no-signal"
NO_INTERFERENCE = "no-interference"


def ber(bits_a, bits_b) -> float:
    a = np.asarray(bits_a).ravel()
    b = np.asarray(bits_b).ravel()
    if a.size != b.size:
        raise ValueError(f"bit streams differ in length: {a.size} vs {b.size}")
    if a.size == 0:
        raise ValueError("BER of empty bit streams is undefined")
    return float(np.count_nonzero(a != b)) / a.size


def sinr_db(signal_power: float, interference_plus_noise: float) -> float:
    if interference_plus_noise <= 0:
        raise ZeroDivisionError("interference-plus-noise power must be positive")
    if signal_power < 0:
        raise ValueError("signal power must be >= 0")
    return 10 * math.log10(signal_power / interference_plus_noise) if signal_power > 0 else -math.inf


def jam_to_signal_db(jam_power: float, signal_power: float) -> float:
    """J/S at a victim receiver."""
    return sinr_db(jam_power, signal_power)


def q_function(x: float) -> float:
    return 0.5 * math.erfc(x / math.sqrt(2))


def qpsk_ber(es_n0: float) -> float:
    """Gray-coded QPSK bit error rate at symbol SNR ``es_n0`` (linear)."""
    return q_function(math.sqrt(es_n0))


def bpsk_ber(es_n0: float) -> float:
    return q_function(math.sqrt(2 * es_n0))


def db_or_flag(x: float, digits: int = 6):
    """Round a dB value for reports; non-finite values become an explicit flag."""
    if x is not None and x == math.inf:
        return NO_INTERFERENCE
    if x is None or not math.isfinite(x):
        return NO_SIGNAL
    return round(float(x), digits)
