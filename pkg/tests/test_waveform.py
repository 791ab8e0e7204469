import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import brute_autocorr, naive_ofdm
from vemo.waveform import (
    NomaConfig,
    OfdmConfig,
    TransecKey,
    map_bits,
    mean_power,
    noma_combine,
    ofdm_bins,
    ofdm_burst,
    ofdm_demodulate,
    ofdm_modulate,
    papr_db,
    peak_sidelobe_db,
    radar_pulse,
    transec_jam,
)

EVEN = tuple(range(2, 64, 2))
ODD = tuple(range(1, 64, 2))
SPLIT = OfdmConfig(64, 16, {"comm": EVEN, "radar": ODD})


def bits_for(rng, cfg, n_sym, app="comm"):
    return rng.integers(0, 2, n_sym * cfg.bits_per_symbol(app), dtype=np.int8)


def test_config_validation():
    with pytest.raises(ValueError):
        OfdmConfig(48)
    with pytest.raises(ValueError):
        OfdmConfig(64, 64)
    with pytest.raises(ValueError):
        OfdmConfig(64, 16, {"comm": (1, 2), "radar": (2, 3)})
    with pytest.raises(ValueError):
        OfdmConfig(64, 16, {"comm": (64,)})
    with pytest.raises(ValueError):
        OfdmConfig(modulation="16qam")


def test_single_tone():
    cfg = OfdmConfig(64, 0, {"comm": (5,)})
    x = ofdm_modulate([0, 0], cfg)
    X = np.fft.fft(x)
    assert np.allclose(np.abs(x), 1.0)
    assert np.argmax(np.abs(X)) == 5
    assert np.allclose(np.delete(X, 5), 0, atol=1e-12)


def test_matches_explicit_idft():
    rng = np.random.default_rng(4)
    cfg = OfdmConfig(16, 4, {"comm": (1, 3, 4, 9)})
    b = bits_for(rng, cfg, 3)
    ref = naive_ofdm(b, 16, 4, (1, 3, 4, 9))
    ref = ref / np.sqrt(np.mean(np.abs(ref) ** 2))
    assert np.allclose(ofdm_modulate(b, cfg), ref, atol=1e-12)


def test_bpsk_matches_explicit_idft():
    rng = np.random.default_rng(5)
    cfg = OfdmConfig(8, 2, {"comm": (0, 5, 6)}, "bpsk_robust")
    b = bits_for(rng, cfg, 2)
    ref = naive_ofdm(b, 8, 2, (0, 5, 6), "bpsk_robust")
    assert np.allclose(ofdm_modulate(b, cfg), ref / np.sqrt(np.mean(np.abs(ref) ** 2)), atol=1e-12)


def test_bit_length_mismatch():
    with pytest.raises(ValueError):
        ofdm_modulate([0, 1, 0], SPLIT)
    with pytest.raises(KeyError):
        ofdm_modulate([0, 1], OfdmConfig(64, 16, {"comm": (1,)}), "radar")


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from(["qpsk", "bpsk_robust"]), st.integers(0, 31),
       st.integers(1, 5))
def test_round_trip(seed, mod, cp, n_sym):
    rng = np.random.default_rng(seed)
    bins = tuple(sorted(rng.choice(64, rng.integers(1, 65), replace=False)))
    cfg = OfdmConfig(64, cp, {"comm": bins}, mod)
    b = bits_for(rng, cfg, n_sym)
    x = ofdm_modulate(b, cfg)
    assert mean_power(x) == pytest.approx(1.0, abs=1e-9)
    assert np.array_equal(ofdm_demodulate(x, cfg), b)


def test_qpsk_gray_mapping():
    pts = map_bits([0, 0, 0, 1, 1, 1, 1, 0])
    assert np.allclose(pts * np.sqrt(2), [1 + 1j, 1 - 1j, -1 - 1j, -1 + 1j])


def test_radar_pulse_deterministic_and_orthogonal():
    a = radar_pulse(SPLIT, 99)
    assert np.array_equal(a, radar_pulse(SPLIT, 99))
    assert not np.array_equal(a, radar_pulse(SPLIT, 100))
    assert mean_power(a) == pytest.approx(1.0, abs=1e-12)
    Y = np.abs(ofdm_bins(a, SPLIT)) ** 2
    leak = Y[:, list(EVEN)].max() / Y[:, list(ODD)].mean()
    assert 10 * np.log10(leak + 1e-300) <= -100


def test_radar_pulse_needs_allocation():
    with pytest.raises(ValueError):
        radar_pulse(OfdmConfig(), 1)


def test_peak_sidelobe_frozen():
    cfg = OfdmConfig(64, 16, {"radar": tuple(range(64))})
    x = radar_pulse(cfg, 0, 8)
    r = brute_autocorr(x)
    mid = r.size // 2
    oracle = 20 * np.log10(r[mid] / np.delete(r, mid).max())
    assert oracle == pytest.approx(15.2103050077, abs=1e-6)
    assert peak_sidelobe_db(x) == pytest.approx(oracle, abs=1e-9)


def test_noma_alpha():
    assert NomaConfig(10).alpha == pytest.approx(10 / 11)
    assert NomaConfig(0).alpha == 0.5
    with pytest.raises(ValueError):
        NomaConfig(-1)


def test_noma_limits_and_power():
    rng = np.random.default_rng(0)
    outer = transec_jam(TransecKey(1), 100_000)
    inner = ofdm_modulate(bits_for(rng, OfdmConfig(), 1250), OfdmConfig())
    assert np.max(np.abs(noma_combine(outer, inner, NomaConfig(200)) - outer)) < 1e-9
    assert mean_power(noma_combine(outer, inner, NomaConfig(10))) == pytest.approx(1.0, abs=0.01)
    with pytest.raises(ValueError):
        noma_combine(outer, inner[:-1], NomaConfig(10))


def test_transec_jam():
    a = transec_jam(TransecKey(7), 10_000)
    assert np.array_equal(a.tobytes(), transec_jam(TransecKey(7), 10_000).tobytes())
    assert mean_power(a) == pytest.approx(1.0, abs=1e-6)
    b = transec_jam(TransecKey(8), 10_000)
    assert abs(np.vdot(a, b)) / a.size < 0.05
    with pytest.raises(ValueError):
        transec_jam(TransecKey(7), 0)
    with pytest.raises(ValueError):
        TransecKey(2**128)


def test_papr_basics():
    assert papr_db(np.ones(16)) == pytest.approx(0.0)
    x = np.zeros(1000, dtype=complex)
    x[3] = 1
    assert papr_db(x, 100) == pytest.approx(30.0)
    with pytest.raises(ValueError):
        papr_db(np.zeros(4))


def test_ofdm_papr_at_least_8db():
    cfg = OfdmConfig(64, 16, {"comm": tuple(range(8, 56))})
    rng = np.random.default_rng(0)
    assert papr_db(ofdm_modulate(bits_for(rng, cfg, 1000), cfg), 99.9) >= 8.0


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32))
def test_papr_ordering(seed):
    rng = np.random.default_rng(seed)
    ofdm = ofdm_modulate(bits_for(rng, OfdmConfig(), 200), OfdmConfig())
    pn = transec_jam(TransecKey(seed), ofdm.size)
    assert papr_db(ofdm, 99.9) > papr_db(pn, 99.9)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32), st.integers(0, 16))
def test_cp_absorbs_delay(seed, cp):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(0, cp + 1))
    cfg = OfdmConfig(64, cp, {"comm": EVEN})
    x = ofdm_modulate(bits_for(rng, cfg, 3), cfg)
    y = np.concatenate([np.zeros(n), x])[: x.size]
    X, Y = ofdm_bins(x, cfg), ofdm_bins(y, cfg)
    k = np.array(EVEN)
    rot = np.exp(-2j * np.pi * k * n / 64)
    assert np.allclose(Y[:, k], X[:, k] * rot[None, :], atol=1e-9)


def test_burst_has_pilot_prefix():
    rng = np.random.default_rng(2)
    b = bits_for(rng, SPLIT, 4)
    burst = ofdm_burst(b, SPLIT)
    assert burst.size == 5 * SPLIT.symbol_len
    assert np.array_equal(ofdm_demodulate(burst, SPLIT)[SPLIT.bits_per_symbol("comm"):], b)
