"""Monte Carlo kernels behind ``vemo waveform-demo``.

Each ``*_trial`` draws one seeded scene and returns raw measurements; the
``*_curve`` functions sweep a parameter and return CSV-ready rows.
"""

from __future__ import annotations

import math

import numpy as np

from .channel import complex_noise
from .metrics import qpsk_ber
from .receiver import CommStructure, cancel_jam, extract_radar_return, matched_filter_delay, sic_decode
from .waveform import (
    NomaConfig,
    OfdmConfig,
    TransecKey,
    noma_combine,
    ofdm_burst,
    ofdm_modulate,
    papr_db,
    radar_pulse,
    transec_jam,
)

FULL = tuple(range(64))
COMM_CFG = OfdmConfig(64, 16, {"comm": FULL})
RADAR_CFG = OfdmConfig(64, 16, {"radar": FULL})


def _db(x: float) -> float:
    return 10 * math.log10(x) if x > 0 else -math.inf


# ---------------------------------------------------------------- PAPR


def papr_trial(rng: np.random.Generator, n_symbols: int, cfg: OfdmConfig = COMM_CFG,
               percentile: float = 99.9):
    """PAPR of a random OFDM stream and of an equal-length keyed jam sequence."""
    bits = rng.integers(0, 2, n_symbols * cfg.bits_per_symbol("comm"), dtype=np.int8)
    ofdm = ofdm_modulate(bits, cfg)
    pn = transec_jam(TransecKey(int(rng.integers(0, 2**63))), ofdm.size)
    return papr_db(ofdm, percentile), papr_db(pn, percentile)


def papr_curve(seed: int = 0, n_symbols: int = 2000):
    rng = np.random.default_rng(seed)
    bits = rng.integers(0, 2, n_symbols * COMM_CFG.bits_per_symbol("comm"), dtype=np.int8)
    ofdm = ofdm_modulate(bits, COMM_CFG)
    pn = transec_jam(TransecKey(seed), ofdm.size)
    rows = []
    for pct in (50, 90, 99, 99.9, 99.99, 100):
        rows.append({"percentile": pct, "ofdm_papr_db": papr_db(ofdm, pct), "pn_papr_db": papr_db(pn, pct)})
    return rows


# ---------------------------------------------------------------- SIC


def sic_trial(rng: np.random.Generator, split_db: float, snr_db: float | None, n_symbols: int = 64,
              cfg: OfdmConfig = COMM_CFG):
    """Radar-outer / comm-inner NOMA frame through AWGN, decoded by SIC with a known outer.

    ``snr_db`` is total received power over noise; ``None`` means noiseless.
    Returns ``(bit_errors, n_bits, residual_power_db)``.
    """
    bits = rng.integers(0, 2, n_symbols * cfg.bits_per_symbol("comm"), dtype=np.int8)
    inner = ofdm_modulate(bits, cfg)
    outer = radar_pulse(RADAR_CFG, int(rng.integers(0, 2**63)), n_symbols)
    noma = NomaConfig(split_db)
    rx = noma_combine(outer, inner, noma)
    if snr_db is not None:
        rx = rx + complex_noise(rng, rx.size, 10 ** (-snr_db / 10))
    res = sic_decode(rx, cfg, noma, outer_reference=outer)
    return int(np.count_nonzero(res.inner_bits != bits)), bits.size, res.residual_power_db


def sic_effective_snr(split_db: float, snr_db: float) -> float:
    """Inner-layer symbol SNR once the outer layer is gone (full-band allocation)."""
    alpha = NomaConfig(split_db).alpha
    return (1 - alpha) * 10 ** (snr_db / 10)


def sic_curve(seed: int = 0, split_db: float = 10.0, trials: int = 20, n_symbols: int = 64):
    rng = np.random.default_rng(seed)
    rows = []
    for snr in range(0, 31, 3):
        err = tot = 0
        for _ in range(trials):
            e, n, _ = sic_trial(rng, split_db, snr, n_symbols)
            err += e
            tot += n
        rows.append({"snr_db": snr, "split_db": split_db, "ber": err / tot,
                     "oracle_ber": qpsk_ber(sic_effective_snr(split_db, snr)), "bits": tot})
    return rows


# ---------------------------------------------------------------- radar extraction


def radar_trial(rng: np.random.Generator, comm_to_echo_db: float | None, cancel: bool,
                noise_db: float = -40.0, lag: int | None = None, n_data: int = 15,
                threshold_k: float = 6.0):
    """Strong comm burst plus a weak radar echo; returns ``(estimate, true_lag)``.

    ``comm_to_echo_db=None`` drops the echo (and the comm) for a noise-only
    false-alarm trial. Powers are relative to the comm burst.
    """
    burst_len = (n_data + 1) * COMM_CFG.symbol_len
    pulse = radar_pulse(RADAR_CFG, int(rng.integers(0, 2**63)))
    if lag is None:
        lag = int(rng.integers(0, burst_len - pulse.size + 1))
    noise = complex_noise(rng, burst_len, 10 ** (noise_db / 10))
    if comm_to_echo_db is None:
        return matched_filter_delay(noise, pulse, threshold_k), lag
    bits = rng.integers(0, 2, n_data * COMM_CFG.bits_per_symbol("comm"), dtype=np.int8)
    rx = ofdm_burst(bits, COMM_CFG) + noise
    rx[lag:lag + pulse.size] += 10 ** (-comm_to_echo_db / 20) * pulse
    ext = extract_radar_return(rx, CommStructure(COMM_CFG, 0, n_data), pulse, threshold_k, cancel=cancel)
    return ext.estimate, lag


def radar_hit(est, lag: int) -> bool:
    return bool(est.detected and abs(est.delay_samples - lag) <= 1)


def radar_curve(seed: int = 0, trials: int = 50):
    rng = np.random.default_rng(seed)
    rows = []
    for cer in range(0, 41, 5):
        pd_c = sum(radar_hit(*radar_trial(rng, cer, True)) for _ in range(trials)) / trials
        pd_n = sum(radar_hit(*radar_trial(rng, cer, False)) for _ in range(trials)) / trials
        rows.append({"comm_to_echo_db": cer, "pd_cancel": pd_c, "pd_no_cancel": pd_n, "trials": trials})
    return rows


# ---------------------------------------------------------------- TRANSEC


def transec_trial(rng: np.random.Generator, snr_db: float = 20.0, n: int = 4096):
    """Jam suppression in dB with the correct key and with an unrelated key.

    ``snr_db`` is jam power over noise. Suppression is jam power before over
    the jam component left after cancellation.
    """
    key = TransecKey(int(rng.integers(0, 2**63)))
    wrong = TransecKey(int(rng.integers(0, 2**63)))
    g = complex(rng.uniform(0.5, 2.0) * np.exp(2j * np.pi * rng.random()))
    jam = g * transec_jam(key, n)
    rest = complex_noise(rng, n, abs(g) ** 2 * 10 ** (-snr_db / 10))
    rx = jam + rest
    p_jam = float(np.mean(np.abs(jam) ** 2))
    out = []
    for k in (key, wrong):
        left = cancel_jam(rx, k) - rest
        out.append(_db(p_jam / float(np.mean(np.abs(left) ** 2))))
    return tuple(out)


def transec_curve(seed: int = 0, trials: int = 20):
    rng = np.random.default_rng(seed)
    rows = []
    for snr in range(0, 41, 5):
        vals = np.array([transec_trial(rng, snr) for _ in range(trials)])
        rows.append({"snr_db": snr, "correct_key_suppression_db": float(np.median(vals[:, 0])),
                     "wrong_key_suppression_db": float(np.median(vals[:, 1])), "trials": trials})
    return rows


CURVES = {"papr": papr_curve, "sic": sic_curve, "radar-extract": radar_curve, "transec": transec_curve}
