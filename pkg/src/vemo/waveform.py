"""Complex-baseband waveform synthesis.

Signals are 1-D ``complex128`` numpy arrays, discrete time, one sample per
chip (no pulse shaping). Every synthesis routine returns a signal normalized
to unit mean power.

Keyed sequences (radar references, TRANSEC jam) come from numpy's PCG64 bit
generator seeded directly with the key, so a key reproduces the identical
sequence on every platform numpy supports.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MODULATIONS = {"qpsk": 2, "bpsk_robust": 1}
PILOT_SEED = 0x5EED_0F_D1_107  # fixed pilot pattern known to every receiver


def keyed_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def mean_power(x) -> float:
    x = np.asarray(x)
    return float(np.mean(np.abs(x) ** 2)) if x.size else 0.0


def normalize(x: np.ndarray) -> np.ndarray:
    p = mean_power(x)
    if p == 0:
        raise ValueError("cannot normalize a zero-power signal")
    return x / np.sqrt(p)


@dataclass(frozen=True)
class OfdmConfig:
    """OFDM numerology and per-application subcarrier allocation.

    ``allocation`` maps an application tag (``"comm"``, ``"radar"``) to the
    subcarrier indices it owns; the sets must be disjoint.
    """

    n_subcarriers: int = 64
    cp_len: int = 16
    allocation: dict = field(default_factory=lambda: {"comm": tuple(range(64))})
    modulation: str = "qpsk"

    def __post_init__(self):
        n = self.n_subcarriers
        if n < 1 or n & (n - 1):
            raise ValueError("n_subcarriers must be a power of two")
        if not 0 <= self.cp_len < n:
            raise ValueError("cp_len must satisfy 0 <= cp_len < n_subcarriers")
        if self.modulation not in MODULATIONS:
            raise ValueError(f"modulation must be one of {sorted(MODULATIONS)}")
        alloc = {}
        used: set = set()
        for app, bins in self.allocation.items():
            bins = tuple(int(b) for b in bins)
            if any(not 0 <= b < n for b in bins) or len(set(bins)) != len(bins):
                raise ValueError(f"allocation[{app!r}] must hold distinct indices in [0, {n})")
            if used & set(bins):
                raise ValueError("allocations must be disjoint")
            used |= set(bins)
            alloc[app] = bins
        object.__setattr__(self, "allocation", alloc)

    @property
    def bits_per_subcarrier(self) -> int:
        return MODULATIONS[self.modulation]

    @property
    def symbol_len(self) -> int:
        return self.n_subcarriers + self.cp_len

    def bins(self, app: str) -> np.ndarray:
        if app not in self.allocation:
            raise KeyError(f"application {app!r} has no subcarrier allocation")
        return np.asarray(self.allocation[app], dtype=int)

    def bits_per_symbol(self, app: str) -> int:
        return self.bits_per_subcarrier * len(self.allocation[app])


def map_bits(bits, modulation: str = "qpsk") -> np.ndarray:
    """Gray-mapped unit-energy constellation points."""
    b = np.asarray(bits, dtype=np.int8)
    if modulation == "qpsk":
        b = b.reshape(-1, 2)
        return ((1 - 2 * b[:, 0]) + 1j * (1 - 2 * b[:, 1])) / np.sqrt(2)
    if modulation == "bpsk_robust":
        return (1 - 2 * b).astype(complex)
    raise ValueError(f"unknown modulation {modulation!r}")


def demap_symbols(symbols, modulation: str = "qpsk") -> np.ndarray:
    """Hard decisions back to bits (sign detector)."""
    y = np.asarray(symbols).ravel()
    if modulation == "qpsk":
        out = np.empty((y.size, 2), dtype=np.int8)
        out[:, 0] = y.real < 0
        out[:, 1] = y.imag < 0
        return out.ravel()
    if modulation == "bpsk_robust":
        return (y.real < 0).astype(np.int8)
    raise ValueError(f"unknown modulation {modulation!r}")


def _grid_to_time(grid: np.ndarray, cp_len: int) -> np.ndarray:
    body = np.fft.ifft(grid, axis=1)
    if cp_len:
        body = np.concatenate([body[:, -cp_len:], body], axis=1)
    return body.ravel()


def ofdm_modulate(bits, cfg: OfdmConfig, app: str = "comm") -> np.ndarray:
    """Map bits onto ``app``'s subcarriers, IDFT, prepend the cyclic prefix.

    ``len(bits)`` must be a whole number of OFDM symbols for this allocation.
    """
    bins = cfg.bins(app)
    per = cfg.bits_per_symbol(app)
    bits = np.asarray(bits, dtype=np.int8).ravel()
    if per == 0 or bits.size == 0 or bits.size % per:
        raise ValueError(f"bit count {bits.size} is not a positive multiple of {per} bits per symbol")
    n_sym = bits.size // per
    grid = np.zeros((n_sym, cfg.n_subcarriers), dtype=complex)
    grid[:, bins] = map_bits(bits, cfg.modulation).reshape(n_sym, len(bins))
    return normalize(_grid_to_time(grid, cfg.cp_len))


def ofdm_bins(signal, cfg: OfdmConfig) -> np.ndarray:
    """Strip cyclic prefixes and DFT each symbol; returns shape (n_symbols, n_subcarriers)."""
    x = np.asarray(signal, dtype=complex)
    L = cfg.symbol_len
    if x.size % L:
        raise ValueError(f"signal length {x.size} is not a multiple of the symbol length {L}")
    frames = x.reshape(-1, L)[:, cfg.cp_len:]
    return np.fft.fft(frames, axis=1)


def ofdm_demodulate(signal, cfg: OfdmConfig, app: str = "comm", equalizer=None) -> np.ndarray:
    """Hard-decision demodulation of ``app``'s subcarriers.

    ``equalizer`` is an optional per-allocated-bin complex channel estimate the
    bin values are divided by before the decision.
    """
    y = ofdm_bins(signal, cfg)[:, cfg.bins(app)]
    if equalizer is not None:
        y = y / np.asarray(equalizer)[None, :]
    return demap_symbols(y, cfg.modulation)


def pilot_bits(cfg: OfdmConfig, app: str = "comm") -> np.ndarray:
    """Known bits of the pilot symbol that opens every burst."""
    return keyed_rng(PILOT_SEED).integers(0, 2, cfg.bits_per_symbol(app), dtype=np.int8)


def ofdm_burst(bits, cfg: OfdmConfig, app: str = "comm") -> np.ndarray:
    """One pilot OFDM symbol followed by the data symbols carrying ``bits``."""
    return ofdm_modulate(np.concatenate([pilot_bits(cfg, app), np.asarray(bits, dtype=np.int8)]), cfg, app)


def radar_pulse(cfg: OfdmConfig, seed: int, n_symbols: int = 8) -> np.ndarray:
    """OFDM radar pulse: seeded pseudo-random QPSK on the ``radar`` subcarriers."""
    if not cfg.allocation.get("radar"):
        raise ValueError("radar allocation is empty")
    bins = cfg.bins("radar")
    rng = keyed_rng(seed)
    bits = rng.integers(0, 2, (n_symbols, 2 * len(bins)), dtype=np.int8)
    grid = np.zeros((n_symbols, cfg.n_subcarriers), dtype=complex)
    grid[:, bins] = map_bits(bits.ravel(), "qpsk").reshape(n_symbols, len(bins))
    return normalize(_grid_to_time(grid, cfg.cp_len))


def autocorrelation(x) -> np.ndarray:
    """Aperiodic autocorrelation magnitude for lags -(n-1)..(n-1)."""
    x = np.asarray(x, dtype=complex)
    n = x.size
    m = 1 << (2 * n - 1).bit_length()
    X = np.fft.fft(x, m)
    r = np.fft.ifft(X * np.conj(X))
    return np.abs(np.concatenate([r[m - n + 1:], r[:n]]))


def peak_sidelobe_db(x) -> float:
    """Zero-lag peak over the largest nonzero-lag sidelobe, in dB."""
    r = autocorrelation(x)
    mid = r.size // 2
    side = np.delete(r, mid)
    return float(20 * np.log10(r[mid] / side.max()))


@dataclass(frozen=True)
class NomaConfig:
    """Power-domain layering; ``power_split_db`` is the outer-over-inner ratio."""

    power_split_db: float = 10.0

    def __post_init__(self):
        if not self.power_split_db >= 0:
            raise ValueError("power_split_db must be >= 0")

    @property
    def alpha(self) -> float:
        r = 10 ** (self.power_split_db / 10)
        if np.isinf(r):
            return 1.0
        return r / (1 + r)


def noma_combine(outer, inner, cfg: NomaConfig) -> np.ndarray:
    """sqrt(alpha) * outer + sqrt(1 - alpha) * inner."""
    outer = np.asarray(outer, dtype=complex)
    inner = np.asarray(inner, dtype=complex)
    if outer.shape != inner.shape:
        raise ValueError(f"layer lengths differ: {outer.size} vs {inner.size}")
    a = cfg.alpha
    return np.sqrt(a) * outer + np.sqrt(1 - a) * inner


@dataclass(frozen=True)
class TransecKey:
    seed: int

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**128:
            raise ValueError("TRANSEC key must be a 128-bit unsigned integer")


def transec_jam(key: TransecKey, n: int) -> np.ndarray:
    """Constant-envelope pseudo-noise: unit-modulus samples with keyed uniform phases."""
    if n < 1:
        raise ValueError("n must be >= 1")
    phase = keyed_rng(key.seed).random(n)
    return np.exp(2j * np.pi * phase)


def papr_db(signal, percentile: float = 100.0) -> float:
    """10 log10(percentile of |x|^2 over the mean of |x|^2)."""
    p = np.abs(np.asarray(signal)) ** 2
    if p.size == 0 or p.mean() == 0:
        raise ValueError("PAPR undefined for an empty or zero-power signal")
    return float(10 * np.log10(np.percentile(p, percentile) / p.mean()))
