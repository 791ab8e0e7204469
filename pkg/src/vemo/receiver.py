"""Receiver-side processing.

Everything here works on complex sample arrays. Cancellation always follows
the same pattern: regenerate a reference, fit its complex gain by least
squares, subtract. A least-squares fit is an orthogonal projection, so a
cancellation step can never raise the residual power.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .waveform import (
    NomaConfig,
    OfdmConfig,
    TransecKey,
    demap_symbols,
    map_bits,
    mean_power,
    ofdm_bins,
    ofdm_burst,
    ofdm_demodulate,
    ofdm_modulate,
    pilot_bits,
    transec_jam,
)

DEFAULT_THRESHOLD_K = 6.0
# Equalized decision error above which a decode is treated as failed (about 3 dB SNR).
EVM_FAILURE = 0.5


class SicOrderError(ValueError):
    """Decision-directed SIC refused: the layers are too close in power to order."""


def power_db(p: float, ref: float) -> float:
    if ref <= 0:
        raise ValueError("reference power must be positive")
    return float(10 * np.log10(p / ref)) if p > 0 else float("-inf")


def _overlap(n_rx: int, n_ref: int, offset: int):
    lo = max(0, offset)
    hi = min(n_rx, offset + n_ref)
    return lo, hi


def estimate_gain(received, reference, offset: int = 0) -> complex:
    """Least-squares complex scale of ``reference`` placed at ``offset`` in ``received``.

    ``offset`` may be negative or run past the end; only the overlapping part
    of the reference is used.
    """
    rx = np.asarray(received, dtype=complex)
    ref = np.asarray(reference, dtype=complex)
    lo, hi = _overlap(rx.size, ref.size, offset)
    if hi <= lo:
        raise ValueError("reference window does not overlap the received signal")
    seg = ref[lo - offset:hi - offset]
    energy = np.vdot(seg, seg).real
    if energy == 0:
        raise ValueError("reference has zero power in the window")
    return complex(np.vdot(seg, rx[lo:hi]) / energy)


def subtract_known(received, reference, offset: int = 0, gain=None):
    """Remove ``gain * reference`` at ``offset``; gain is fitted when not given.

    Returns ``(cleaned, gain)``.
    """
    rx = np.array(received, dtype=complex)
    ref = np.asarray(reference, dtype=complex)
    lo, hi = _overlap(rx.size, ref.size, offset)
    if hi <= lo:
        return rx, 0j
    g = estimate_gain(rx, ref, offset) if gain is None else complex(gain)
    rx[lo:hi] -= g * ref[lo - offset:hi - offset]
    return rx, g


def joint_cancel(received, references):
    """Jointly fit gains of several full-length references and subtract them all."""
    rx = np.asarray(received, dtype=complex)
    A = np.stack([np.asarray(r, dtype=complex) for r in references], axis=1)
    gains, *_ = np.linalg.lstsq(A, rx, rcond=None)
    return rx - A @ gains, gains


# ---------------------------------------------------------------- OFDM reception


@dataclass
class OfdmReception:
    bits: np.ndarray
    channel: np.ndarray  # per allocated bin, from the pilot
    symbols: np.ndarray  # equalized data symbols, shape (n_data_symbols, n_bins)
    evm: float  # mean |y - decision|^2 over unit-energy decisions


def ofdm_receive(signal, cfg: OfdmConfig, app: str = "comm") -> OfdmReception:
    """Demodulate a pilot-led burst with one-tap per-bin equalization."""
    bins = ofdm_bins(signal, cfg)[:, cfg.bins(app)]
    if bins.shape[0] < 2:
        raise ValueError("burst needs a pilot symbol and at least one data symbol")
    pilot = map_bits(pilot_bits(cfg, app), cfg.modulation)
    h = bins[0] / pilot
    h = np.where(np.abs(h) > 0, h, 1.0)
    y = bins[1:] / h[None, :]
    bits = demap_symbols(y, cfg.modulation)
    decided = map_bits(bits, cfg.modulation).reshape(y.shape)
    evm = float(np.mean(np.abs(y - decided) ** 2))
    return OfdmReception(bits, h, y, evm)


# ---------------------------------------------------------------- SIC


@dataclass
class SicStage:
    name: str
    gain: complex
    residual_power_db: float


@dataclass
class SicResult:
    inner_bits: np.ndarray
    outer_symbols: np.ndarray | None  # decisions, decision-directed mode only
    residual_power_db: float
    stages: list = field(default_factory=list)


def _demod(x, cfg, app, pilot):
    return ofdm_receive(x, cfg, app).bits if pilot else ofdm_demodulate(x, cfg, app)


def _remod(bits, cfg, app, pilot):
    return ofdm_burst(bits, cfg, app) if pilot else ofdm_modulate(bits, cfg, app)


def sic_decode(received, inner_cfg: OfdmConfig, noma_cfg: NomaConfig, outer_reference=None,
               outer_cfg: OfdmConfig | None = None, app: str = "comm", pilot: bool = False) -> SicResult:
    """Peel the outer layer off a synchronized NOMA signal and decode the inner comm layer.

    With ``outer_reference`` (a regenerable radar or jam waveform) the outer
    layer is fitted and subtracted directly. Without it the outer layer is
    assumed to be OFDM comm (``outer_cfg``) and is detected, regenerated and
    subtracted; that needs at least 3 dB of power split to know which layer
    is which. After the inner bits are decoded both regenerated layers are
    re-fitted jointly and removed, leaving the noise residual.
    """
    rx = np.asarray(received, dtype=complex)
    p_rx = mean_power(rx)
    if p_rx == 0:
        raise ValueError("received signal has zero power")
    stages = []
    outer_symbols = None
    if outer_reference is not None:
        outer = np.asarray(outer_reference, dtype=complex)
    else:
        if noma_cfg.power_split_db < 3:
            raise SicOrderError(
                f"power split {noma_cfg.power_split_db} dB < 3 dB: layer order is ambiguous"
            )
        ocfg = outer_cfg or inner_cfg
        outer_bits = _demod(rx, ocfg, app, pilot)
        outer = _remod(outer_bits, ocfg, app, pilot)
        outer_symbols = map_bits(outer_bits, ocfg.modulation)
    if outer.size != rx.size:
        raise ValueError("outer layer length differs from the received signal")

    stripped, g_outer = subtract_known(rx, outer)
    stages.append(SicStage("outer", g_outer, power_db(mean_power(stripped), p_rx)))

    inner_bits = _demod(stripped, inner_cfg, app, pilot)
    inner = _remod(inner_bits, inner_cfg, app, pilot)
    residual, gains = joint_cancel(rx, [outer, inner])
    res_db = power_db(mean_power(residual), p_rx)
    stages.append(SicStage("inner", complex(gains[1]), res_db))
    return SicResult(inner_bits, outer_symbols, res_db, stages)


# ---------------------------------------------------------------- matched filter


@dataclass(frozen=True)
class DelayEstimate:
    delay_samples: int
    peak_metric: float
    detected: bool
    threshold: float


def normalized_xcorr(signal, reference) -> np.ndarray:
    """|<signal[l:l+L], reference>| / (|reference| |signal[l:l+L]|) for every full-overlap lag l."""
    x = np.asarray(signal, dtype=complex)
    r = np.asarray(reference, dtype=complex)
    L = r.size
    n_lags = x.size - L + 1
    if L == 0 or n_lags < 1:
        raise ValueError("reference must be nonempty and no longer than the signal")
    r_norm = np.sqrt(np.vdot(r, r).real)
    if r_norm == 0 or not np.any(x):
        raise ValueError("matched filtering needs nonzero signal and reference")
    m = 1 << (x.size + L - 1).bit_length()
    corr = np.fft.ifft(np.fft.fft(x, m) * np.conj(np.fft.fft(r, m)))[:n_lags]
    csum = np.concatenate([[0.0], np.cumsum(np.abs(x) ** 2)])
    win = np.sqrt(np.maximum(csum[L:L + n_lags] - csum[:n_lags], 0.0))
    floor = 1e-12 * np.sqrt(csum[-1] / x.size * L)
    return np.abs(corr) / (r_norm * np.maximum(win, floor))


def matched_filter_delay(signal, reference, threshold_k: float = DEFAULT_THRESHOLD_K,
                         guard: int = 2) -> DelayEstimate:
    """Best-lag delay estimate with a CFAR-style threshold.

    The threshold is mean + ``threshold_k`` standard deviations of the
    correlation metric away from the peak (lags within ``guard`` of the peak
    are excluded from the statistics).
    """
    metric = normalized_xcorr(signal, reference)
    peak = int(np.argmax(metric))
    mask = np.abs(np.arange(metric.size) - peak) > guard
    off = metric[mask]
    threshold = float(off.mean() + threshold_k * off.std()) if off.size >= 2 else float("inf")
    value = float(metric[peak])
    return DelayEstimate(peak, value, value >= threshold, threshold)


# ---------------------------------------------------------------- radar extraction


@dataclass(frozen=True)
class CommStructure:
    """Where a pilot-led comm burst sits inside a received window."""

    cfg: OfdmConfig
    offset: int
    n_data_symbols: int
    app: str = "comm"

    @property
    def length(self) -> int:
        return (self.n_data_symbols + 1) * self.cfg.symbol_len


@dataclass
class RadarExtraction:
    estimate: DelayEstimate
    residual: np.ndarray
    cancelled: bool  # False when no comm signal was (or could be) removed
    fallback: bool  # True when a comm decode failed its quality check
    comm_bits: list = field(default_factory=list)

    def __iter__(self):
        return iter((self.estimate, self.residual))


def extract_radar_return(received, comm, radar_reference, threshold_k: float = DEFAULT_THRESHOLD_K,
                         cancel: bool = True) -> RadarExtraction:
    """Demodulate the strong comm signal(s), regenerate, subtract, then matched-filter.

    ``comm`` is a :class:`CommStructure` or a sequence of them (strongest
    first). A burst whose equalized decisions fail the pilot-referenced
    quality check is left in place and the result is flagged ``fallback``.
    """
    x = np.array(received, dtype=complex)
    structures = [comm] if isinstance(comm, CommStructure) else list(comm or [])
    cancelled = False
    fallback = False
    bits_out = []
    if cancel:
        for cs in structures:
            lo, hi = cs.offset, cs.offset + cs.length
            if lo < 0 or hi > x.size:
                continue
            rec = ofdm_receive(x[lo:hi], cs.cfg, cs.app)
            if rec.evm > EVM_FAILURE:
                fallback = True
                continue
            regen = ofdm_burst(rec.bits, cs.cfg, cs.app)
            x, _ = subtract_known(x, regen, cs.offset)
            bits_out.append(rec.bits)
            cancelled = True
    if np.any(x):
        est = matched_filter_delay(x, radar_reference, threshold_k)
    else:
        est = DelayEstimate(0, 0.0, False, float("inf"))  # cancellation removed everything
    return RadarExtraction(est, x, cancelled, fallback, bits_out)


# ---------------------------------------------------------------- keyed jam cancellation


def cancel_jam(received, key: TransecKey, offset: int = 0, n: int | None = None) -> np.ndarray:
    """Regenerate the keyed jam sequence at ``offset`` and subtract its fitted copy.

    A wrong key yields a reference uncorrelated with the actual jam, so the
    fitted gain is near zero and the jam stays in the signal.
    """
    x = np.asarray(received, dtype=complex)
    if n is None:
        n = x.size - max(offset, 0)
    jam = transec_jam(key, n)
    cleaned, _ = subtract_known(x, jam, offset)
    return cleaned
