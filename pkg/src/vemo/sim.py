"""End-to-end epoch runner.

Every Tx activity emits one burst starting at the first sample of its epoch.
Each Rx activity sees the sum of everything in flight during its epoch
window, widened by a guard so bursts that start late in the epoch still fit.
Receivers are genie-synchronized to their wanted signal; matched filtering
is the only place where delays are searched.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from statistics import NormalDist

import numpy as np

from . import __version__
from .channel import complex_noise, direct_channel, echo_channel, multipath_taps
from .controlplane import check_dissemination
from .metrics import ber, db_or_flag
from .receiver import CommStructure, cancel_jam, extract_radar_return, ofdm_receive, subtract_known
from .scenario import CommLink, JamTask, PassiveIntercept, RadarTrack, Scenario
from .scheduler import (
    InvalidScheduleError,
    RxComm,
    RxIntercept,
    RxRadarEcho,
    Schedule,
    TxComm,
    TxJam,
    TxRadar,
    comm_delay,
    utility,
    validate_schedule,
)
from .waveform import OfdmConfig, TransecKey, ofdm_burst, papr_db, radar_pulse, transec_jam

SCHEMA = "vemo.simreport/1"
PAPR_PERCENTILE = 99.9


def derive_seed(*parts, bits: int = 64) -> int:
    """Stable integer seed from a tuple of labels (independent of PYTHONHASHSEED)."""
    digest = hashlib.sha256(":".join(str(p) for p in ("vemo",) + parts).encode()).digest()
    return int.from_bytes(digest[: bits // 8], "little")


@dataclass
class Emission:
    source: str
    epoch: int
    kind: str  # comm | radar | jam | enemy
    task: str | None
    signal: np.ndarray
    start: int  # absolute sample index of the first transmitted sample
    bits: np.ndarray | None = None
    key: TransecKey | None = None

    @property
    def friendly(self) -> bool:
        return self.kind != "enemy"


@dataclass
class Component:
    emission: Emission
    offset: int  # first sample relative to the receive window
    gain: float
    main: bool  # main path (not an added multipath tap)
    echo: bool


def _place(out: np.ndarray, sig: np.ndarray, offset: int, gain: float) -> None:
    lo = max(0, offset)
    hi = min(out.size, offset + sig.size)
    if hi > lo:
        out[lo:hi] += gain * sig[lo - offset:hi - offset]


class World:
    """Precomputed emissions and configs for one (scenario, schedule, seed)."""

    def __init__(self, s: Scenario, sched: Schedule, seed: int | None = None):
        violations = validate_schedule(s, sched)
        if violations:
            raise InvalidScheduleError(violations)
        self.s = s
        self.sched = sched
        self.phy = s.phy
        self.seed = s.phy.seed if seed is None else int(seed)
        ph = self.phy
        self.S = ph.sample_rate_epochs
        if ph.combine_mode == "noma":
            full = tuple(range(ph.n_subcarriers))
            self.comm_cfg = OfdmConfig(ph.n_subcarriers, ph.cp_len, {"comm": full}, ph.modulation)
            self.radar_cfg = OfdmConfig(ph.n_subcarriers, ph.cp_len, {"radar": full})
        else:
            cfg = OfdmConfig(ph.n_subcarriers, ph.cp_len,
                             {"comm": ph.comm_bins, "radar": ph.radar_bins}, ph.modulation)
            self.comm_cfg = self.radar_cfg = cfg
        self.burst_len = (ph.data_symbols + 1) * self.comm_cfg.symbol_len
        self.pulse_len = ph.radar_symbols * self.radar_cfg.symbol_len
        self.window_len = self.S + max(self.burst_len, self.pulse_len)
        self.emissions = self._emissions()
        self._by_key = {(em.source, em.epoch, em.kind): em for em in self.emissions}

    # -- emissions

    def _emissions(self) -> list[Emission]:
        out = []
        n_bits = self.phy.data_symbols * self.comm_cfg.bits_per_symbol("comm")
        for p, e, a in self.sched.entries:
            start = e * self.S
            if isinstance(a, TxComm):
                rng = np.random.default_rng(derive_seed(self.seed, "bits", a.task, p, e))
                bits = rng.integers(0, 2, n_bits, dtype=np.int8)
                out.append(Emission(p, e, "comm", a.task, ofdm_burst(bits, self.comm_cfg), start, bits))
            elif isinstance(a, TxRadar):
                sig = radar_pulse(self.radar_cfg, derive_seed(self.seed, "radar", a.task, e), self.phy.radar_symbols)
                out.append(Emission(p, e, "radar", a.task, sig, start))
            elif isinstance(a, TxJam):
                key = TransecKey(derive_seed(self.seed, "transec", a.task, p, e, bits=128))
                out.append(Emission(p, e, "jam", a.task, transec_jam(key, self.S), start, key=key))
        for em in self.s.emitters:
            for e in em.active_epochs:
                rng = np.random.default_rng(derive_seed(self.seed, "emitter", em.id, e))
                sig = complex_noise(rng, self.S, em.emitted_power)
                out.append(Emission(em.id, e, "enemy", None, sig, e * self.S))
        out.sort(key=lambda m: (m.epoch, m.source, m.kind))
        return out

    def emission(self, source: str, epoch: int, kind: str) -> Emission:
        return self._by_key[(source, epoch, kind)]

    # -- propagation

    def paths(self, em: Emission, rx: str):
        """(ChannelSpec, main, echo) triples from ``em`` to platform ``rx``."""
        s, ph, T = self.s, self.phy, self.s.epoch_duration
        rx_pos = s.position(rx)
        res = []
        if em.source != rx:
            main = direct_channel(s.position(em.source), rx_pos, ph, T, f"{em.source}->{rx}")
            res += [(c, i == 0, False) for i, c in enumerate(multipath_taps(main, ph))]
        if em.kind == "radar":
            t = s.task(em.task)
            main = echo_channel(s.position(t.illuminator), s.position(t.target), rx_pos,
                                t.reflectivity, ph, T, f"{em.source}->{t.target}->{rx}")
            res += [(c, i == 0, True) for i, c in enumerate(multipath_taps(main, ph))]
        return res

    def components(self, rx: str, epoch: int) -> list[Component]:
        w0 = epoch * self.S
        comps = []
        for em in self.emissions:
            for ch, main, echo in self.paths(em, rx):
                off = em.start + ch.delay_samples - w0
                if off >= self.window_len or off + em.signal.size <= 0:
                    continue
                comps.append(Component(em, off, float(abs(ch.gain)), main, echo))
        return comps

    def render(self, comps, noise_seed=None) -> np.ndarray:
        out = np.zeros(self.window_len, dtype=complex)
        for c in comps:
            _place(out, c.emission.signal, c.offset, c.gain)
        if noise_seed is not None and self.phy.noise_power > 0:
            out += complex_noise(np.random.default_rng(noise_seed), self.window_len, self.phy.noise_power)
        return out

    def received(self, rx: str, epoch: int):
        comps = self.components(rx, epoch)
        return comps, self.render(comps, derive_seed(self.seed, "noise", rx, epoch))

    # -- shared cancellation steps

    def cancel_friendly_jams(self, x, comps):
        for c in comps:
            if c.emission.kind == "jam":
                x = cancel_jam(x, c.emission.key, c.offset, c.emission.signal.size)
        return x

    def cancel_radar(self, x, comps, direct_only: bool):
        for c in comps:
            if c.emission.kind == "radar" and not (direct_only and c.echo):
                x, _ = subtract_known(x, c.emission.signal, c.offset)
        return x


# ---------------------------------------------------------------- receive chains


def _power_ratio_db(num: float, den: float) -> float:
    if num <= 0:
        return -math.inf
    if den <= 0:
        return math.inf
    return 10 * math.log10(num / den)


def _mp(x) -> float:
    return float(np.mean(np.abs(x) ** 2)) if x.size else 0.0


def _rx_comm(w: World, r: str, e: int, a: RxComm) -> dict:
    t = w.s.task(a.task)
    e_tx = e - comm_delay(w.s, t)
    em = w.emission(a.peer, e_tx, "comm")
    comps, total = w.received(r, e)
    wanted = [c for c in comps if c.emission is em]
    main = next(c for c in wanted if c.main)
    x = w.cancel_friendly_jams(total, comps)
    if w.phy.combine_mode == "noma":
        x = w.cancel_radar(x, comps, direct_only=False)
    lo, hi = main.offset, main.offset + em.signal.size
    wanted_sig = w.render(wanted)
    res = {
        "task": t.id, "src": a.peer, "dst": r, "tx_epoch": e_tx, "rx_epoch": e,
        "delay_samples": main.offset + e * w.S - em.start,
    }
    if hi > x.size or lo < 0:
        res.update(ber=0.5, bit_errors=None, bits=int(em.bits.size), evm_db=math.inf,
                   sinr_db=-math.inf, raw_sinr_db=-math.inf, truncated=True)
        return res
    rec = ofdm_receive(x[lo:hi], w.comm_cfg)
    p_sig = _mp(wanted_sig[lo:hi])
    res.update(
        ber=ber(rec.bits, em.bits),
        bit_errors=int(np.count_nonzero(rec.bits != em.bits)),
        bits=int(em.bits.size),
        evm_db=_power_ratio_db(rec.evm, 1.0),
        raw_sinr_db=_power_ratio_db(p_sig, _mp((total - wanted_sig)[lo:hi])),
        sinr_db=_power_ratio_db(p_sig, _mp((x - wanted_sig)[lo:hi])),
        truncated=False,
    )
    return res


def _rx_echo(w: World, r: str, e: int, a: RxRadarEcho) -> dict:
    t = w.s.task(a.task)
    em = w.emission(a.illuminator, a.tx_epoch, "radar")
    truth = echo_channel(w.s.position(t.illuminator), w.s.position(t.target), w.s.position(r),
                         t.reflectivity, w.phy, w.s.epoch_duration).delay_samples
    comps, total = w.received(r, e)
    x = w.cancel_friendly_jams(total, comps)
    x = w.cancel_radar(x, comps, direct_only=True)
    bursts = sorted(
        (c for c in comps if c.emission.kind == "comm" and c.main
         and c.offset >= 0 and c.offset + c.emission.signal.size <= w.window_len),
        key=lambda c: (-c.gain, c.offset, c.emission.source),
    )
    structures = [CommStructure(w.comm_cfg, c.offset, w.phy.data_symbols) for c in bursts]
    ext = extract_radar_return(x, structures, em.signal, w.phy.threshold_k)
    measured = (e - a.tx_epoch) * w.S + ext.estimate.delay_samples
    return {
        "task": t.id, "receiver": r, "illuminator": a.illuminator, "tx_epoch": a.tx_epoch, "rx_epoch": e,
        "measured_delay": int(measured), "true_delay": int(truth), "delay_error": int(measured - truth),
        "detected": bool(ext.estimate.detected), "peak_metric": ext.estimate.peak_metric,
        "threshold": ext.estimate.threshold, "comm_cancelled": len(ext.comm_bits),
        "fallback": bool(ext.fallback),
    }


def _rx_intercept(w: World, r: str, e: int, a: RxIntercept) -> dict:
    t = w.s.task(a.task)
    comps, total = w.received(r, e)
    # friendly waveforms are known cooperatively, so only foreign energy is tested
    friendly = w.render([c for c in comps if c.emission.friendly])
    x = (total - friendly)[: w.S]
    energy = _mp(x)
    n0 = w.phy.noise_power
    if n0 > 0:
        z = NormalDist().inv_cdf(1 - w.phy.intercept_pfa)
        threshold = n0 * (1 + z / math.sqrt(w.S))
    else:
        threshold = 0.0
    detected = energy > threshold
    active = e in w.s.emitter(a.source).active_epochs
    return {
        "task": t.id, "listener": r, "source": a.source, "epoch": e, "energy": energy,
        "threshold": threshold, "detected": bool(detected), "source_active": active,
        "hit": bool(detected and active),
    }


def _tx_event(w: World, p: str, e: int, a) -> dict:
    kind = {TxComm: "comm", TxRadar: "radar", TxJam: "jam"}[type(a)]
    em = w.emission(p, e, kind)
    out = {"task": a.task, "platform": p, "epoch": e, "kind": kind,
           "papr_db": papr_db(em.signal, PAPR_PERCENTILE)}
    if kind == "jam":
        t = w.s.task(a.task)
        g = direct_channel(w.s.position(p), w.s.position(t.victim), w.phy, w.s.epoch_duration)
        taps = multipath_taps(g, w.phy)
        out["jam_power_at_victim"] = float(sum(abs(c.gain) ** 2 for c in taps))
    return out


_CHAINS = {RxComm: _rx_comm, RxRadarEcho: _rx_echo, RxIntercept: _rx_intercept}


def _activity_name(a) -> str:
    return type(a).__name__


def run_epoch(w: World, epoch: int) -> list[dict]:
    """Outcomes of every scheduled activity at ``epoch``, in platform order."""
    outcomes = []
    for p, e, a in w.sched.entries:
        if e != epoch:
            continue
        if type(a) in _CHAINS:
            res = _CHAINS[type(a)](w, p, e, a)
        else:
            res = _tx_event(w, p, e, a)
        outcomes.append({"platform": p, "epoch": e, "activity": _activity_name(a), "task": a.task, "result": res})
    return outcomes


# ---------------------------------------------------------------- report


@dataclass
class SimReport:
    seed: int
    scenario: dict
    utility: dict
    per_task: dict
    per_link: list
    global_: dict
    events: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return _clean({
            "schema": SCHEMA,
            "generator": f"vemo {__version__}",
            "seed": self.seed,
            "scenario": self.scenario,
            "utility": self.utility,
            "per_task": self.per_task,
            "per_link": self.per_link,
            "global": self.global_,
            "events": self.events,
        })

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


_DB_KEYS = {"papr_db", "sinr_db", "raw_sinr_db", "evm_db", "js_db", "min_js_db", "mean", "max", "min"}


def _clean(obj, key=None):
    if isinstance(obj, dict):
        return {str(k): _clean(v, k) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if key in _DB_KEYS or not math.isfinite(x):
            return db_or_flag(x)
        return round(x, 12)
    return obj


def _stats(values) -> dict:
    if not values:
        return {"count": 0}
    return {"count": len(values), "mean": float(np.mean(values)), "max": float(np.max(values)),
            "min": float(np.min(values))}


def run_simulation(s: Scenario, sched: Schedule, seed: int | None = None,
                   orchestrator: str | None = None) -> SimReport:
    w = World(s, sched, seed)
    events = []
    for e in range(s.num_epochs):
        events.extend(run_epoch(w, e))

    util = utility(s, sched)
    scheduled = {a.task for _, _, a in sched.entries}
    per_task = {}
    for t in s.tasks:
        per_task[t.id] = {
            "type": {CommLink: "comm", RadarTrack: "radar", JamTask: "jam", PassiveIntercept: "intercept"}[type(t)],
            "priority": t.priority,
            "satisfaction": util.per_task[t.id],
            "scheduled": t.id in scheduled,
        }
        if t.id in sched.notes:
            per_task[t.id]["note"] = sched.notes[t.id]

    per_link = []
    papr = {"comm": [], "radar": [], "jam": []}
    jam_power: dict = {}
    for ev in events:
        r = ev["result"]
        rec = per_task[ev["task"]]
        if ev["activity"] == "RxComm":
            per_link.append(r)
            rec["bits"] = rec.get("bits", 0) + r["bits"]
            if r["bit_errors"] is not None:
                rec["bit_errors"] = rec.get("bit_errors", 0) + r["bit_errors"]
        elif ev["activity"] == "RxRadarEcho":
            rec.setdefault("echoes", []).append(r)
        elif ev["activity"] == "RxIntercept":
            rec.setdefault("intercepts", []).append(r)
            rec["hits"] = rec.get("hits", 0) + int(r["hit"])
        else:
            papr[r["kind"]].append(r["papr_db"])
            if r["kind"] == "jam":
                key = (ev["task"], ev["epoch"])
                jam_power[key] = jam_power.get(key, 0.0) + r["jam_power_at_victim"]
        if ev["activity"] == "TxJam":
            rec.setdefault("jammers", []).append([ev["platform"], ev["epoch"]])

    for t in s.tasks:
        rec = per_task[t.id]
        if isinstance(t, CommLink):
            rec.setdefault("bits", 0)
            rec["ber"] = rec["bit_errors"] / rec["bits"] if rec.get("bit_errors") is not None and rec["bits"] else None
        elif isinstance(t, RadarTrack):
            echoes = rec.setdefault("echoes", [])
            rec["delays_within_1_sample"] = all(abs(x["delay_error"]) <= 1 for x in echoes)
        elif isinstance(t, JamTask):
            js = {str(e): _power_ratio_db(p, t.victim_signal_power)
                  for (tid, e), p in sorted(jam_power.items()) if tid == t.id}
            rec["js_db"] = js
            rec["min_js_db"] = min(js.values()) if js else -math.inf
        elif isinstance(t, PassiveIntercept):
            rec.setdefault("hits", 0)

    orch = orchestrator or (s.platform_ids[0] if s.platforms else None)
    dissem = check_dissemination(s, sched, orch).to_dict() if orch else None
    global_ = {
        "papr_db": {k: _stats(v) for k, v in papr.items()},
        "papr_percentile": PAPR_PERCENTILE,
        "violations": [],
        "dissemination": dissem,
        "seeds": {"seed": w.seed, "derivation": "sha256 over ('vemo', seed, stream, ids...)"},
        "combine_mode": s.phy.combine_mode,
        "window_samples": w.window_len,
    }
    scen = {"num_epochs": s.num_epochs, "epoch_duration_s": s.epoch_duration,
            "platforms": len(s.platforms), "emitters": len(s.emitters), "tasks": len(s.tasks)}
    flat_events = [[ev["platform"], ev["epoch"], ev["activity"], ev["task"]] for ev in events]
    return SimReport(w.seed, scen, {"total": util.total, "per_task": dict(util.per_task)},
                     per_task, per_link, global_, flat_events)
