"""Scenario domain model: platforms, enemy emitters, mission tasks, epoch timing.

Scenarios are immutable. Every invariant is checked when a :class:`Scenario`
is constructed, so any instance in hand is valid. The on-disk format is a
strict JSON document (see :func:`parse_scenario` / :func:`render_scenario`).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Union

C = 299_792_458.0  # m/s

PLATFORM_KINDS = ("aircraft", "ground", "ship", "uav")
MODULATIONS = ("qpsk", "bpsk_robust")
COMBINE_MODES = ("ofdm", "noma")


class ScenarioError(ValueError):
    """Base class for scenario ingestion errors; ``path`` names the offending field."""

    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class ScenarioSyntaxError(ScenarioError):
    def __init__(self, message: str, line: int, col: int):
        self.line = line
        self.col = col
        super().__init__(f"{message} (line {line}, column {col})")


class UnknownIdError(ScenarioError):
    def __init__(self, ident: str, path: str):
        self.ident = ident
        super().__init__(f"unknown id {ident!r}", path)


class ScenarioValidationError(ScenarioError):
    pass


Vec3 = tuple[float, float, float]


@dataclass(frozen=True)
class Platform:
    id: str
    kind: str
    position: Vec3


@dataclass(frozen=True)
class EnemyEmitter:
    id: str
    position: Vec3
    active_epochs: tuple[int, ...] = ()
    emitted_power: float = 1.0


@dataclass(frozen=True)
class CommLink:
    id: str
    src: str
    dst: str
    payload_epochs: int = 1
    priority: float = 1.0
    control: bool = False  # marks orchestration traffic added by the control plane


@dataclass(frozen=True)
class RadarTrack:
    id: str
    illuminator: str
    target: str
    receivers: tuple[str, ...]
    dwells: int = 1
    priority: float = 1.0
    reflectivity: float = 0.1


@dataclass(frozen=True)
class JamTask:
    id: str
    candidate_jammers: tuple[str, ...]
    victim: str
    cover_epochs: tuple[int, ...]
    jammers_per_epoch: int = 1
    priority: float = 1.0
    victim_signal_power: float = 0.01  # power the victim receives from its own partner


@dataclass(frozen=True)
class PassiveIntercept:
    id: str
    listener: str
    source: str
    dwells: int = 1
    priority: float = 1.0
    label: str = "ELINT"


Task = Union[CommLink, RadarTrack, JamTask, PassiveIntercept]

TASK_TYPES = {"comm": CommLink, "radar": RadarTrack, "jam": JamTask, "intercept": PassiveIntercept}
_TYPE_NAMES = {cls: name for name, cls in TASK_TYPES.items()}


@dataclass(frozen=True)
class MultipathTap:
    delay_samples: int
    gain: float


@dataclass(frozen=True)
class PhyDefaults:
    """Physical-layer constants shared by every link in a scenario.

    ``ref_gain`` is the amplitude at 1 m; free-space amplitude falls as 1/d.
    ``sample_rate_epochs`` is the number of baseband samples per epoch.
    """

    ref_gain: float = 1.0
    noise_power: float = 0.0
    seed: int = 0
    sample_rate_epochs: int = 4096
    n_subcarriers: int = 64
    cp_len: int = 16
    comm_bins: tuple[int, ...] = tuple(range(2, 64, 2))
    radar_bins: tuple[int, ...] = tuple(range(1, 64, 2))
    modulation: str = "qpsk"
    data_symbols: int = 15
    radar_symbols: int = 8
    combine_mode: str = "ofdm"
    threshold_k: float = 6.0
    intercept_pfa: float = 1e-3
    multipath: tuple[MultipathTap, ...] = ()


@dataclass(frozen=True)
class Scenario:
    epoch_duration: float
    num_epochs: int
    platforms: tuple[Platform, ...] = ()
    emitters: tuple[EnemyEmitter, ...] = ()
    tasks: tuple[Task, ...] = ()
    phy: PhyDefaults = field(default_factory=PhyDefaults)

    def __post_init__(self):
        object.__setattr__(self, "platforms", tuple(self.platforms))
        object.__setattr__(self, "emitters", tuple(self.emitters))
        object.__setattr__(self, "tasks", tuple(self.tasks))
        _check_scenario(self)

    def platform(self, pid: str) -> Platform:
        return self._platform_map()[pid]

    def emitter(self, eid: str) -> EnemyEmitter:
        return {e.id: e for e in self.emitters}[eid]

    def task(self, tid: str) -> Task:
        return {t.id: t for t in self.tasks}[tid]

    def position(self, ident: str) -> Vec3:
        """Position of a platform or emitter."""
        for obj in self.platforms + self.emitters:
            if obj.id == ident:
                return obj.position
        raise KeyError(ident)

    def _platform_map(self):
        return {p.id: p for p in self.platforms}

    @property
    def platform_ids(self) -> tuple[str, ...]:
        return tuple(p.id for p in self.platforms)

    def with_tasks(self, tasks) -> "Scenario":
        return replace(self, tasks=tuple(tasks))


def task_type(task: Task) -> str:
    return _TYPE_NAMES[type(task)]


# ---------------------------------------------------------------- geometry


def path_length(a, b) -> float:
    """Euclidean distance in meters."""
    return math.dist(a, b)


def echo_path_length(tx, target, rx) -> float:
    """Bistatic echo path |tx - target| + |target - rx|."""
    return math.dist(tx, target) + math.dist(target, rx)


def delay_epochs(path_len: float, epoch_duration: float) -> int:
    """Whole epochs of propagation delay over ``path_len`` meters (floor)."""
    if path_len < 0 or epoch_duration <= 0:
        raise ValueError("path_length must be >= 0 and epoch_duration > 0")
    return math.floor(path_len / (C * epoch_duration))


# ---------------------------------------------------------------- validation


def _fail(msg, path):
    raise ScenarioValidationError(msg, path)


def _check_vec3(v, path):
    if len(v) != 3 or not all(math.isfinite(x) for x in v):
        _fail("position must be three finite coordinates", path)


def _check_scenario(s: Scenario) -> None:
    if not (math.isfinite(s.epoch_duration) and s.epoch_duration > 0):
        _fail("must be > 0", "epoch_duration_s")
    if s.num_epochs < 1:
        _fail("must be >= 1", "num_epochs")

    seen: dict[str, str] = {}
    for group, items in (("platforms", s.platforms), ("emitters", s.emitters), ("tasks", s.tasks)):
        for i, obj in enumerate(items):
            path = f"{group}[{i}].id"
            if not isinstance(obj.id, str) or not obj.id:
                _fail("id must be a nonempty string", path)
            if obj.id in seen:
                _fail(f"duplicate id {obj.id!r} (first used at {seen[obj.id]})", path)
            seen[obj.id] = path

    for i, p in enumerate(s.platforms):
        if p.kind not in PLATFORM_KINDS:
            _fail(f"kind must be one of {PLATFORM_KINDS}", f"platforms[{i}].kind")
        _check_vec3(p.position, f"platforms[{i}].position")

    for i, e in enumerate(s.emitters):
        _check_vec3(e.position, f"emitters[{i}].position")
        for ep in e.active_epochs:
            if not 0 <= ep < s.num_epochs:
                _fail(f"epoch {ep} outside [0, {s.num_epochs})", f"emitters[{i}].active_epochs")
        if len(set(e.active_epochs)) != len(e.active_epochs):
            _fail("duplicate epochs", f"emitters[{i}].active_epochs")
        if not e.emitted_power >= 0:
            _fail("must be >= 0", f"emitters[{i}].emitted_power")

    platforms = set(s.platform_ids)
    emitters = {e.id for e in s.emitters}

    def need(ident, pool, path):
        if ident not in pool:
            raise UnknownIdError(ident, path)

    for i, t in enumerate(s.tasks):
        base = f"tasks[{i}]"
        if not (math.isfinite(t.priority) and t.priority > 0):
            _fail("priority must be > 0", f"{base}.priority")
        if isinstance(t, CommLink):
            need(t.src, platforms, f"{base}.src")
            need(t.dst, platforms, f"{base}.dst")
            if t.src == t.dst:
                _fail("src and dst must differ", f"{base}.dst")
            if t.payload_epochs < 1:
                _fail("must be >= 1", f"{base}.payload_epochs")
        elif isinstance(t, RadarTrack):
            need(t.illuminator, platforms, f"{base}.illuminator")
            need(t.target, emitters, f"{base}.target")
            if not t.receivers:
                _fail("at least one receiver required", f"{base}.receivers")
            if len(set(t.receivers)) != len(t.receivers):
                _fail("duplicate receivers", f"{base}.receivers")
            for j, r in enumerate(t.receivers):
                need(r, platforms, f"{base}.receivers[{j}]")
            if t.dwells < 1:
                _fail("must be >= 1", f"{base}.dwells")
            if not t.reflectivity >= 0:
                _fail("must be >= 0", f"{base}.reflectivity")
        elif isinstance(t, JamTask):
            if not t.candidate_jammers:
                _fail("at least one candidate jammer required", f"{base}.candidate_jammers")
            if len(set(t.candidate_jammers)) != len(t.candidate_jammers):
                _fail("duplicate jammers", f"{base}.candidate_jammers")
            for j, p in enumerate(t.candidate_jammers):
                need(p, platforms, f"{base}.candidate_jammers[{j}]")
            need(t.victim, emitters, f"{base}.victim")
            if not t.cover_epochs:
                _fail("at least one epoch required", f"{base}.cover_epochs")
            if len(set(t.cover_epochs)) != len(t.cover_epochs):
                _fail("duplicate epochs", f"{base}.cover_epochs")
            for ep in t.cover_epochs:
                if not 0 <= ep < s.num_epochs:
                    _fail(f"epoch {ep} outside [0, {s.num_epochs})", f"{base}.cover_epochs")
            if t.jammers_per_epoch < 1:
                _fail("must be >= 1", f"{base}.jammers_per_epoch")
        elif isinstance(t, PassiveIntercept):
            need(t.listener, platforms, f"{base}.listener")
            need(t.source, emitters, f"{base}.source")
            if t.dwells < 1:
                _fail("must be >= 1", f"{base}.dwells")
        else:
            _fail(f"unsupported task {type(t).__name__}", base)

    phy = s.phy
    if phy.noise_power < 0:
        _fail("must be >= 0", "phy.noise_power")
    if not phy.ref_gain > 0:
        _fail("must be > 0", "phy.ref_gain")
    n = phy.n_subcarriers
    if n < 1 or n & (n - 1):
        _fail("must be a power of two", "phy.n_subcarriers")
    if not 0 <= phy.cp_len < n:
        _fail("must satisfy 0 <= cp_len < n_subcarriers", "phy.cp_len")
    if phy.sample_rate_epochs < n + phy.cp_len:
        _fail("must be >= n_subcarriers + cp_len", "phy.sample_rate_epochs")
    for name in ("comm_bins", "radar_bins"):
        bins = getattr(phy, name)
        if not bins or any(not 0 <= b < n for b in bins) or len(set(bins)) != len(bins):
            _fail(f"must be distinct indices in [0, {n})", f"phy.{name}")
    if set(phy.comm_bins) & set(phy.radar_bins):
        _fail("comm and radar allocations must be disjoint", "phy.radar_bins")
    if phy.modulation not in MODULATIONS:
        _fail(f"must be one of {MODULATIONS}", "phy.modulation")
    if phy.combine_mode not in COMBINE_MODES:
        _fail(f"must be one of {COMBINE_MODES}", "phy.combine_mode")
    if phy.data_symbols < 1 or phy.radar_symbols < 1:
        _fail("symbol counts must be >= 1", "phy.data_symbols")
    if not 0 < phy.intercept_pfa < 1:
        _fail("must be in (0, 1)", "phy.intercept_pfa")
    for j, tap in enumerate(phy.multipath):
        if tap.delay_samples < 1 or not math.isfinite(tap.gain):
            _fail("taps need delay_samples >= 1 and a finite gain", f"phy.multipath[{j}]")


# ---------------------------------------------------------------- file format

_TOP_KEYS = {"epoch_duration_s", "num_epochs", "platforms", "emitters", "tasks", "phy"}
_PLATFORM_KEYS = {"id", "kind", "position"}
_EMITTER_KEYS = {"id", "position", "active_epochs", "emitted_power"}
_TASK_KEYS = {
    "comm": {"id", "src", "dst", "payload_epochs", "priority", "control"},
    "radar": {"id", "illuminator", "target", "receivers", "dwells", "priority", "reflectivity"},
    "jam": {
        "id", "candidate_jammers", "victim", "cover_epochs", "jammers_per_epoch",
        "priority", "victim_signal_power",
    },
    "intercept": {"id", "listener", "source", "dwells", "priority", "label"},
}
_TASK_REQUIRED = {
    "comm": {"id", "src", "dst", "payload_epochs", "priority"},
    "radar": {"id", "illuminator", "target", "receivers", "dwells", "priority"},
    "jam": {"id", "candidate_jammers", "victim", "cover_epochs", "jammers_per_epoch", "priority"},
    "intercept": {"id", "listener", "source", "dwells", "priority"},
}
_PHY_REQUIRED = {"ref_gain", "noise_power", "seed"}
_PHY_KEYS = {
    "ref_gain", "noise_power", "seed", "sample_rate_epochs", "n_subcarriers", "cp_len",
    "comm_bins", "radar_bins", "modulation", "data_symbols", "radar_symbols",
    "combine_mode", "threshold_k", "intercept_pfa", "multipath",
}


def _keys(obj, allowed, required, path):
    if not isinstance(obj, dict):
        raise ScenarioValidationError("expected an object", path)
    for k in obj:
        if k not in allowed:
            raise ScenarioValidationError(f"unknown key {k!r}", f"{path}.{k}" if path else k)
    for k in sorted(required):
        if k not in obj:
            raise ScenarioValidationError("missing required key", f"{path}.{k}" if path else k)


def _num(v, path):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ScenarioValidationError("expected a number", path)
    return float(v)


def _int(v, path):
    if isinstance(v, bool) or not isinstance(v, int):
        raise ScenarioValidationError("expected an integer", path)
    return v


def _str(v, path):
    if not isinstance(v, str):
        raise ScenarioValidationError("expected a string", path)
    return v


def _list(v, path):
    if not isinstance(v, list):
        raise ScenarioValidationError("expected a list", path)
    return v


def _vec(v, path):
    v = _list(v, path)
    if len(v) != 3:
        raise ScenarioValidationError("expected three coordinates", path)
    return tuple(_num(x, f"{path}[{i}]") for i, x in enumerate(v))


def _ints(v, path):
    return tuple(_int(x, f"{path}[{i}]") for i, x in enumerate(_list(v, path)))


def _strs(v, path):
    return tuple(_str(x, f"{path}[{i}]") for i, x in enumerate(_list(v, path)))


def _parse_task(d, path) -> Task:
    if not isinstance(d, dict):
        raise ScenarioValidationError("expected an object", path)
    kind = d.get("type")
    if kind not in TASK_TYPES:
        raise ScenarioValidationError(f"type must be one of {sorted(TASK_TYPES)}", f"{path}.type")
    body = {k: v for k, v in d.items() if k != "type"}
    _keys(body, _TASK_KEYS[kind], _TASK_REQUIRED[kind], path)
    p = lambda k: f"{path}.{k}"  # noqa: E731
    common = dict(id=_str(body["id"], p("id")), priority=_num(body["priority"], p("priority")))
    if kind == "comm":
        control = body.get("control", False)
        if not isinstance(control, bool):
            raise ScenarioValidationError("expected a boolean", p("control"))
        return CommLink(
            src=_str(body["src"], p("src")), dst=_str(body["dst"], p("dst")),
            payload_epochs=_int(body["payload_epochs"], p("payload_epochs")),
            control=control, **common,
        )
    if kind == "radar":
        extra = {}
        if "reflectivity" in body:
            extra["reflectivity"] = _num(body["reflectivity"], p("reflectivity"))
        return RadarTrack(
            illuminator=_str(body["illuminator"], p("illuminator")),
            target=_str(body["target"], p("target")),
            receivers=_strs(body["receivers"], p("receivers")),
            dwells=_int(body["dwells"], p("dwells")), **extra, **common,
        )
    if kind == "jam":
        extra = {}
        if "victim_signal_power" in body:
            extra["victim_signal_power"] = _num(body["victim_signal_power"], p("victim_signal_power"))
        return JamTask(
            candidate_jammers=_strs(body["candidate_jammers"], p("candidate_jammers")),
            victim=_str(body["victim"], p("victim")),
            cover_epochs=tuple(sorted(_ints(body["cover_epochs"], p("cover_epochs")))),
            jammers_per_epoch=_int(body["jammers_per_epoch"], p("jammers_per_epoch")),
            **extra, **common,
        )
    extra = {}
    if "label" in body:
        extra["label"] = _str(body["label"], p("label"))
    return PassiveIntercept(
        listener=_str(body["listener"], p("listener")), source=_str(body["source"], p("source")),
        dwells=_int(body["dwells"], p("dwells")), **extra, **common,
    )


def _parse_phy(d) -> PhyDefaults:
    _keys(d, _PHY_KEYS, _PHY_REQUIRED, "phy")
    kw: dict = {
        "ref_gain": _num(d["ref_gain"], "phy.ref_gain"),
        "noise_power": _num(d["noise_power"], "phy.noise_power"),
        "seed": _int(d["seed"], "phy.seed"),
    }
    for k in ("sample_rate_epochs", "n_subcarriers", "cp_len", "data_symbols", "radar_symbols"):
        if k in d:
            kw[k] = _int(d[k], f"phy.{k}")
    for k in ("threshold_k", "intercept_pfa"):
        if k in d:
            kw[k] = _num(d[k], f"phy.{k}")
    for k in ("modulation", "combine_mode"):
        if k in d:
            kw[k] = _str(d[k], f"phy.{k}")
    for k in ("comm_bins", "radar_bins"):
        if k in d:
            kw[k] = _ints(d[k], f"phy.{k}")
    if "multipath" in d:
        taps = []
        for j, tap in enumerate(_list(d["multipath"], "phy.multipath")):
            path = f"phy.multipath[{j}]"
            _keys(tap, {"delay_samples", "gain"}, {"delay_samples", "gain"}, path)
            taps.append(MultipathTap(_int(tap["delay_samples"], f"{path}.delay_samples"),
                                     _num(tap["gain"], f"{path}.gain")))
        kw["multipath"] = tuple(taps)
    return PhyDefaults(**kw)


def parse_scenario(text: str) -> Scenario:
    """Parse and validate a scenario document.

    Raises :class:`ScenarioSyntaxError` for malformed JSON, :class:`UnknownIdError`
    for dangling references and :class:`ScenarioValidationError` otherwise.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioSyntaxError(exc.msg, exc.lineno, exc.colno) from None
    _keys(doc, _TOP_KEYS, _TOP_KEYS, "")

    platforms = []
    for i, d in enumerate(_list(doc["platforms"], "platforms")):
        path = f"platforms[{i}]"
        _keys(d, _PLATFORM_KEYS, _PLATFORM_KEYS, path)
        platforms.append(Platform(_str(d["id"], f"{path}.id"), _str(d["kind"], f"{path}.kind"),
                                  _vec(d["position"], f"{path}.position")))
    emitters = []
    for i, d in enumerate(_list(doc["emitters"], "emitters")):
        path = f"emitters[{i}]"
        _keys(d, _EMITTER_KEYS, {"id", "position", "active_epochs"}, path)
        emitters.append(EnemyEmitter(
            _str(d["id"], f"{path}.id"), _vec(d["position"], f"{path}.position"),
            tuple(sorted(_ints(d["active_epochs"], f"{path}.active_epochs"))),
            _num(d.get("emitted_power", 1.0), f"{path}.emitted_power"),
        ))
    tasks = [_parse_task(d, f"tasks[{i}]") for i, d in enumerate(_list(doc["tasks"], "tasks"))]

    return Scenario(
        epoch_duration=_num(doc["epoch_duration_s"], "epoch_duration_s"),
        num_epochs=_int(doc["num_epochs"], "num_epochs"),
        platforms=tuple(platforms), emitters=tuple(emitters), tasks=tuple(tasks),
        phy=_parse_phy(doc["phy"]),
    )


def load_scenario(path) -> Scenario:
    return parse_scenario(Path(path).read_text(encoding="utf-8"))


def _task_doc(t: Task) -> dict:
    d = {"type": task_type(t), "id": t.id, "priority": t.priority}
    if isinstance(t, CommLink):
        d.update(src=t.src, dst=t.dst, payload_epochs=t.payload_epochs, control=t.control)
    elif isinstance(t, RadarTrack):
        d.update(illuminator=t.illuminator, target=t.target, receivers=list(t.receivers),
                 dwells=t.dwells, reflectivity=t.reflectivity)
    elif isinstance(t, JamTask):
        d.update(candidate_jammers=list(t.candidate_jammers), victim=t.victim,
                 cover_epochs=list(t.cover_epochs), jammers_per_epoch=t.jammers_per_epoch,
                 victim_signal_power=t.victim_signal_power)
    else:
        d.update(listener=t.listener, source=t.source, dwells=t.dwells, label=t.label)
    return d


def scenario_to_dict(s: Scenario) -> dict:
    phy = s.phy
    return {
        "epoch_duration_s": s.epoch_duration,
        "num_epochs": s.num_epochs,
        "platforms": [{"id": p.id, "kind": p.kind, "position": list(p.position)} for p in s.platforms],
        "emitters": [
            {"id": e.id, "position": list(e.position), "active_epochs": list(e.active_epochs),
             "emitted_power": e.emitted_power}
            for e in s.emitters
        ],
        "tasks": [_task_doc(t) for t in s.tasks],
        "phy": {
            "ref_gain": phy.ref_gain, "noise_power": phy.noise_power, "seed": phy.seed,
            "sample_rate_epochs": phy.sample_rate_epochs, "n_subcarriers": phy.n_subcarriers,
            "cp_len": phy.cp_len, "comm_bins": list(phy.comm_bins), "radar_bins": list(phy.radar_bins),
            "modulation": phy.modulation, "data_symbols": phy.data_symbols,
            "radar_symbols": phy.radar_symbols, "combine_mode": phy.combine_mode,
            "threshold_k": phy.threshold_k, "intercept_pfa": phy.intercept_pfa,
            "multipath": [{"delay_samples": t.delay_samples, "gain": t.gain} for t in phy.multipath],
        },
    }


def render_scenario(s: Scenario) -> str:
    """Canonical rendering: sorted keys, floats as shortest round-trip repr."""
    return json.dumps(scenario_to_dict(s), sort_keys=True, indent=2) + "\n"

