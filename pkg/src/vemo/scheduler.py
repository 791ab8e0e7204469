"""Epoch-by-epoch activity scheduling.

A schedule assigns at most one activity to every (platform, epoch) cell. The
builder places tasks greedily (priority descending, earliest epochs first) and
then improves the result with seeded annealed local search. :func:`exhaustive_optimal`
is a brute-force oracle for small instances.

Each task is handled as a collection of *units*, the smallest increments of
satisfaction it can earn:

* comm: one Tx/Rx pair (transmit epoch ``e``, receive epoch ``e + delay``)
* radar: one dwell (illuminator pulse plus one echo reception per receiver)
* jam: one covered epoch (``jammers_per_epoch`` simultaneous TxJam)
* intercept: one reception during an epoch the source is active

Units of one task occupy distinct *slots* (their first epoch), so a task
never earns the same increment twice.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
import random
from dataclasses import dataclass, field
from typing import NamedTuple, Union

from .scenario import (
    CommLink,
    JamTask,
    PassiveIntercept,
    RadarTrack,
    Scenario,
    Task,
    delay_epochs,
    echo_path_length,
    path_length,
)

EPS = 1e-12
# extra annealing runs on the full horizon, where most of the value is decided
FINAL_RESTARTS = 2


# ---------------------------------------------------------------- activities


@dataclass(frozen=True)
class Idle:
    pass


@dataclass(frozen=True)
class TxComm:
    task: str
    peer: str


@dataclass(frozen=True)
class RxComm:
    task: str
    peer: str


@dataclass(frozen=True)
class TxRadar:
    task: str


@dataclass(frozen=True)
class RxRadarEcho:
    task: str
    illuminator: str
    tx_epoch: int


@dataclass(frozen=True)
class TxJam:
    task: str
    victim: str


@dataclass(frozen=True)
class RxIntercept:
    task: str
    source: str


IDLE = Idle()
Activity = Union[Idle, TxComm, RxComm, TxRadar, RxRadarEcho, TxJam, RxIntercept]
TRANSMIT = (TxComm, TxRadar, TxJam)
RECEIVE = (RxComm, RxRadarEcho, RxIntercept)
_ACTIVITY_TYPES = {cls.__name__: cls for cls in (TxComm, RxComm, TxRadar, RxRadarEcho, TxJam, RxIntercept)}


class Entry(NamedTuple):
    platform: str
    epoch: int
    activity: Activity


def _entry_key(e: Entry):
    return (e.platform, e.epoch, type(e.activity).__name__, repr(e.activity))


@dataclass(frozen=True)
class Schedule:
    """Per-platform, per-epoch activity assignment; absent cells are Idle.

    ``entries`` is kept in canonical order so that equal schedules compare and
    serialize identically. ``notes`` records why tasks were left short.
    """

    entries: tuple[Entry, ...] = ()
    notes: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        cleaned = [Entry(*e) for e in self.entries if not isinstance(e[2], Idle)]
        object.__setattr__(self, "entries", tuple(sorted(cleaned, key=_entry_key)))

    @classmethod
    def from_cells(cls, cells: dict, notes=None) -> "Schedule":
        return cls(tuple(Entry(p, e, a) for (p, e), a in cells.items()), dict(notes or {}))

    def at(self, platform: str, epoch: int) -> list[Activity]:
        return [e.activity for e in self.entries if e.platform == platform and e.epoch == epoch]

    @property
    def grid(self) -> dict:
        """(platform, epoch) -> activity. Only meaningful for single-aperture schedules."""
        return {(e.platform, e.epoch): e.activity for e in self.entries}

    def without(self, drop) -> "Schedule":
        drop = set(drop)
        return Schedule(tuple(e for e in self.entries if e not in drop), dict(self.notes))

    def __len__(self):
        return len(self.entries)


@dataclass(frozen=True)
class Violation:
    constraint: str  # C1..C5, or ROLE for an activity inconsistent with its task
    platform: str
    epoch: int
    detail: str = ""


class InvalidScheduleError(ValueError):
    def __init__(self, violations):
        self.violations = violations
        first = violations[0]
        super().__init__(
            f"{len(violations)} violation(s); first: {first.constraint} at "
            f"({first.platform}, {first.epoch}) {first.detail}"
        )


class CapExceededError(RuntimeError):
    pass


@dataclass(frozen=True)
class UtilityReport:
    total: float
    per_task: dict


# ---------------------------------------------------------------- geometry helpers


def comm_delay(s: Scenario, t: CommLink) -> int:
    return delay_epochs(path_length(s.position(t.src), s.position(t.dst)), s.epoch_duration)


def echo_delays(s: Scenario, t: RadarTrack) -> dict[str, int]:
    tx = s.position(t.illuminator)
    tgt = s.position(t.target)
    return {
        r: delay_epochs(echo_path_length(tx, tgt, s.position(r)), s.epoch_duration)
        for r in t.receivers
    }


# ---------------------------------------------------------------- validation


def validate_schedule(s: Scenario, sched: Schedule) -> list[Violation]:
    """Check single aperture (C1), pairing (C3, C4), epoch bounds (C5) and task roles.

    Half-duplex (C2) is implied by C1 and is never reported separately.
    """
    out: list[Violation] = []
    E = s.num_epochs
    platforms = set(s.platform_ids)
    tasks = {t.id: t for t in s.tasks}

    counts: dict = {}
    for en in sched.entries:
        counts[(en.platform, en.epoch)] = counts.get((en.platform, en.epoch), 0) + 1
    for (p, e), n in sorted(counts.items()):
        if n > 1:
            out.append(Violation("C1", p, e, f"{n} activities on one aperture"))

    comm_tx, comm_rx, radar_tx = set(), set(), set()
    echoes = []
    for p, e, act in sched.entries:
        if not 0 <= e < E:
            out.append(Violation("C5", p, e, f"epoch outside [0, {E})"))
        if p not in platforms:
            out.append(Violation("ROLE", p, e, "unknown platform"))
            continue
        t = tasks.get(act.task)
        bad = None
        if isinstance(act, (TxComm, RxComm)):
            if not isinstance(t, CommLink):
                bad = "not a comm task"
            elif isinstance(act, TxComm) and (p, act.peer) != (t.src, t.dst):
                bad = "TxComm must run on src toward dst"
            elif isinstance(act, RxComm) and (p, act.peer) != (t.dst, t.src):
                bad = "RxComm must run on dst from src"
            elif isinstance(act, TxComm):
                comm_tx.add((t.id, e))
            else:
                comm_rx.add((t.id, e))
        elif isinstance(act, TxRadar):
            if not isinstance(t, RadarTrack):
                bad = "not a radar task"
            elif p != t.illuminator:
                bad = "TxRadar must run on the illuminator"
            else:
                radar_tx.add((t.id, e))
        elif isinstance(act, RxRadarEcho):
            if not isinstance(t, RadarTrack):
                bad = "not a radar task"
            elif p not in t.receivers or act.illuminator != t.illuminator:
                bad = "echo receiver or illuminator does not match task"
            else:
                echoes.append((p, e, act, t))
        elif isinstance(act, TxJam):
            if not isinstance(t, JamTask):
                bad = "not a jam task"
            elif p not in t.candidate_jammers or act.victim != t.victim:
                bad = "jammer or victim does not match task"
        elif isinstance(act, RxIntercept):
            if not isinstance(t, PassiveIntercept):
                bad = "not an intercept task"
            elif p != t.listener or act.source != t.source:
                bad = "listener or source does not match task"
        else:
            bad = f"unknown activity {act!r}"
        if bad:
            out.append(Violation("ROLE", p, e, f"{getattr(act, 'task', '?')}: {bad}"))

    for tid, e in sorted(comm_tx):
        t = tasks[tid]
        d = comm_delay(s, t)
        if e + d >= E:
            out.append(Violation("C3", t.src, e, f"{tid}: receive epoch {e + d} beyond horizon"))
        elif (tid, e + d) not in comm_rx:
            out.append(Violation("C3", t.src, e, f"{tid}: no RxComm at {t.dst} epoch {e + d}"))
    for tid, e in sorted(comm_rx):
        t = tasks[tid]
        d = comm_delay(s, t)
        if (tid, e - d) not in comm_tx:
            out.append(Violation("C3", t.dst, e, f"{tid}: no TxComm at {t.src} epoch {e - d}"))

    for p, e, act, t in echoes:
        d = echo_delays(s, t)[p]
        if not 0 <= act.tx_epoch < E:
            out.append(Violation("C5", p, e, f"{t.id}: tx_epoch {act.tx_epoch} outside horizon"))
        elif act.tx_epoch != e - d:
            out.append(Violation("C4", p, e, f"{t.id}: tx_epoch {act.tx_epoch} != {e} - {d}"))
        elif (t.id, act.tx_epoch) not in radar_tx:
            out.append(Violation("C4", p, e, f"{t.id}: no TxRadar at epoch {act.tx_epoch}"))
    return out


# ---------------------------------------------------------------- utility


def utility(s: Scenario, sched: Schedule) -> UtilityReport:
    """Weighted mission satisfaction of a valid schedule."""
    violations = validate_schedule(s, sched)
    if violations:
        raise InvalidScheduleError(violations)

    comm_tx, comm_rx, radar_tx, echo_rx = set(), set(), set(), set()
    jam_count: dict = {}
    intercept_epochs: dict = {}
    for p, e, act in sched.entries:
        if isinstance(act, TxComm):
            comm_tx.add((act.task, e))
        elif isinstance(act, RxComm):
            comm_rx.add((act.task, e))
        elif isinstance(act, TxRadar):
            radar_tx.add((act.task, e))
        elif isinstance(act, RxRadarEcho):
            echo_rx.add((act.task, p, act.tx_epoch))
        elif isinstance(act, TxJam):
            jam_count[(act.task, e)] = jam_count.get((act.task, e), 0) + 1
        elif isinstance(act, RxIntercept):
            intercept_epochs.setdefault(act.task, set()).add(e)

    per_task = {}
    for t in s.tasks:
        if isinstance(t, CommLink):
            d = comm_delay(s, t)
            pairs = sum(1 for tid, e in comm_tx if tid == t.id and (tid, e + d) in comm_rx)
            sat = min(pairs, t.payload_epochs) / t.payload_epochs
        elif isinstance(t, RadarTrack):
            done = sum(
                1 for tid, e in radar_tx
                if tid == t.id and all((tid, r, e) in echo_rx for r in t.receivers)
            )
            sat = min(done, t.dwells) / t.dwells
        elif isinstance(t, JamTask):
            covered = sum(1 for e in t.cover_epochs if jam_count.get((t.id, e), 0) >= t.jammers_per_epoch)
            sat = covered / len(t.cover_epochs)
        else:
            active = set(s.emitter(t.source).active_epochs)
            hits = len(intercept_epochs.get(t.id, set()) & active)
            sat = min(hits, t.dwells) / t.dwells
        per_task[t.id] = sat
    total = sum(t.priority * per_task[t.id] for t in s.tasks)
    return UtilityReport(total, per_task)


# ---------------------------------------------------------------- placement units


class _Unit(NamedTuple):
    slot: int
    cells: tuple  # (((platform, epoch), activity), ...)
    last_epoch: int


def _task_units(s: Scenario, t: Task) -> list[_Unit]:
    """All individually feasible units of ``t`` over the full horizon, earliest first."""
    E = s.num_epochs
    units = []
    if isinstance(t, CommLink):
        d = comm_delay(s, t)
        for e in range(E - d):
            units.append(_Unit(e, (((t.src, e), TxComm(t.id, t.dst)), ((t.dst, e + d), RxComm(t.id, t.src))), e + d))
    elif isinstance(t, RadarTrack):
        delays = echo_delays(s, t)
        for e in range(E):
            if e + max(delays.values()) >= E:
                continue
            cells = [((t.illuminator, e), TxRadar(t.id))]
            cells += [((r, e + delays[r]), RxRadarEcho(t.id, t.illuminator, e)) for r in t.receivers]
            if len({c for c, _ in cells}) == len(cells):
                units.append(_Unit(e, tuple(cells), e + max(delays.values())))
    elif isinstance(t, JamTask):
        for e in t.cover_epochs:
            for combo in itertools.combinations(sorted(t.candidate_jammers), t.jammers_per_epoch):
                units.append(_Unit(e, tuple(((j, e), TxJam(t.id, t.victim)) for j in combo), e))
    else:
        for e in s.emitter(t.source).active_epochs:
            units.append(_Unit(e, (((t.listener, e), RxIntercept(t.id, t.source)),), e))
    return units


def _max_units(t: Task) -> int:
    if isinstance(t, CommLink):
        return t.payload_epochs
    if isinstance(t, JamTask):
        return len(t.cover_epochs)
    return t.dwells


def _units_conflict(a: _Unit, b: _Unit) -> bool:
    if a.slot == b.slot:
        return True
    cells = {c for c, _ in a.cells}
    return any(c in cells for c, _ in b.cells)


class _Problem:
    def __init__(self, s: Scenario):
        self.s = s
        self.tasks = list(s.tasks)
        self.n = len(self.tasks)
        self.all_units = [_task_units(s, t) for t in self.tasks]
        self.max_units = [_max_units(t) for t in self.tasks]
        self.value = [t.priority / m for t, m in zip(self.tasks, self.max_units)]
        self.order = sorted(range(self.n), key=lambda i: (-self.tasks[i].priority, self.tasks[i].id))

    def horizon(self, h: int) -> list[list[_Unit]]:
        return [[u for u in units if u.last_epoch < h] for units in self.all_units]

    def bound(self, units) -> float:
        return sum(
            self.value[i] * min(self.max_units[i], len({u.slot for u in units[i]}))
            for i in range(self.n)
        )


class _State:
    """Occupancy map plus the units placed for every task."""

    __slots__ = ("occ", "placed")

    def __init__(self, n: int):
        self.occ: dict = {}
        self.placed: list[dict] = [{} for _ in range(n)]

    def copy(self) -> "_State":
        st = _State.__new__(_State)
        st.occ = dict(self.occ)
        st.placed = [dict(p) for p in self.placed]
        return st

    def fits(self, i: int, u: _Unit) -> bool:
        if u.slot in self.placed[i]:
            return False
        return all(c not in self.occ for c, _ in u.cells)

    def add(self, i: int, u: _Unit) -> None:
        self.placed[i][u.slot] = u
        for c, _ in u.cells:
            self.occ[c] = (i, u.slot)

    def remove(self, i: int, slot: int) -> None:
        u = self.placed[i].pop(slot)
        for c, _ in u.cells:
            del self.occ[c]

    def clear(self, i: int) -> None:
        for slot in list(self.placed[i]):
            self.remove(i, slot)

    def utility(self, prob: _Problem) -> float:
        return sum(len(p) * v for p, v in zip(self.placed, prob.value))

    def fill(self, prob: _Problem, units, i: int, rng=None) -> None:
        cap = prob.max_units[i]
        cands = units[i]
        if rng is not None:
            cands = list(cands)
            rng.shuffle(cands)
        for u in cands:
            if len(self.placed[i]) >= cap:
                return
            if self.fits(i, u):
                self.add(i, u)

    def fill_all(self, prob: _Problem, units) -> None:
        for i in prob.order:
            self.fill(prob, units, i)

    def to_schedule(self, notes=None) -> Schedule:
        cells = {}
        for placed in self.placed:
            for u in placed.values():
                for c, act in u.cells:
                    cells[c] = act
        return Schedule.from_cells(cells, notes)


def _greedy(prob: _Problem, units) -> _State:
    st = _State(prob.n)
    st.fill_all(prob, units)
    return st


def _repair(prob, units, st: _State, rng: random.Random, first=()) -> None:
    """Refill every task after a move.

    Half the time tasks refill in priority order with earliest units first;
    otherwise both the task order and the unit order are shuffled, so a
    displaced low-value task does not always reclaim the cells it just lost.
    """
    if rng.random() < 0.5:
        order, unit_rng = prob.order, None
    else:
        order = list(range(prob.n))
        rng.shuffle(order)
        unit_rng = rng
    for i in list(first) + [i for i in order if i not in first]:
        st.fill(prob, units, i, unit_rng)


def _relocate(prob, units, st: _State, rng: random.Random):
    movable = [i for i in range(prob.n) if units[i]]
    if not movable:
        return None
    i = movable[rng.randrange(len(movable))]
    u = units[i][rng.randrange(len(units[i]))]
    if st.placed[i].get(u.slot) == u:
        return None
    new = st.copy()
    for slot in [sl for sl, v in new.placed[i].items() if _units_conflict(v, u)]:
        new.remove(i, slot)
    if len(new.placed[i]) >= prob.max_units[i]:
        slots = sorted(new.placed[i])
        new.remove(i, slots[rng.randrange(len(slots))])
    whole = rng.random() < 0.5
    for c, _ in u.cells:
        if c in new.occ:
            j, slot = new.occ[c]
            if whole and j != i:
                new.clear(j)
            else:
                new.remove(j, slot)
    new.add(i, u)
    _repair(prob, units, new, rng)
    return new


def _swap(prob, units, st: _State, rng: random.Random):
    movable = [i for i in range(prob.n) if units[i]]
    if len(movable) < 2:
        return None
    a, b = rng.sample(movable, 2)
    new = st.copy()
    new.clear(a)
    new.clear(b)
    _repair(prob, units, new, rng, first=(b, a))
    return new


def _improve(prob, units, st: _State, budget: int, rng: random.Random) -> _State:
    """Annealed local search; returns the best state visited.

    Worse candidates are accepted with probability exp(delta / temp), the
    temperature falling geometrically from a fraction of the mean unit value.
    """
    cur, cur_u = st, st.utility(prob)
    best, best_u = cur, cur_u
    bound = prob.bound(units)
    vals = [v for v, us in zip(prob.value, units) if us]
    t_hi = 0.5 * sum(vals) / len(vals) if vals else 0.0
    t_lo = 1e-3 * t_hi
    for k in range(budget):
        if best_u >= bound - EPS:
            break
        move = _swap if rng.random() < 0.3 else _relocate
        cand = move(prob, units, cur, rng)
        if cand is None:
            continue
        u = cand.utility(prob)
        delta = u - cur_u
        temp = t_hi * (t_lo / t_hi) ** (k / budget) if t_hi > 0 else 0.0
        if delta >= -EPS or (temp > 0 and rng.random() < math.exp(delta / temp)):
            cur, cur_u = cand, u
            if u > best_u + EPS:
                best, best_u = cand, u
    return best


def _extend(prob, units, prev: _State) -> _State:
    st = _State(prob.n)
    for i, placed in enumerate(prev.placed):
        for u in placed.values():
            st.add(i, u)
    st.fill_all(prob, units)
    return st


def _notes(prob: _Problem, st: _State) -> dict:
    notes = {}
    for i, t in enumerate(prob.tasks):
        got = len(st.placed[i])
        if got >= prob.max_units[i]:
            continue
        if not prob.all_units[i]:
            notes[t.id] = "infeasible: no placement fits inside the horizon"
        elif got == 0:
            notes[t.id] = "unscheduled: resources taken by higher-value tasks"
        else:
            notes[t.id] = f"partial: {got} of {prob.max_units[i]} units placed"
    return notes


def greedy_schedule(s: Scenario) -> Schedule:
    """Greedy-only baseline: priority descending, task id ascending, earliest epochs."""
    prob = _Problem(s)
    st = _greedy(prob, prob.all_units)
    return st.to_schedule(_notes(prob, st))


def build_schedule(s: Scenario, budget: int = 400, seed: int = 0) -> Schedule:
    """Build a valid schedule of high weighted satisfaction.

    The horizon is grown one epoch at a time. At horizon ``h`` the search
    starts from the better of a fresh greedy placement and the previous
    horizon's result (extended greedily), then runs ``budget`` local-search
    iterations seeded by ``(seed, h)``; the full horizon gets
    ``FINAL_RESTARTS`` more runs from the same start. Consequently the result never falls
    below the greedy baseline, and adding epochs to a scenario never lowers
    the achieved utility.
    """
    prob = _Problem(s)
    prev = None
    for h in range(1, s.num_epochs + 1):
        units = prob.horizon(h)
        start = _greedy(prob, units)
        if prev is not None:
            ext = _extend(prob, units, prev)
            if ext.utility(prob) >= start.utility(prob) - EPS:
                start = ext
        rng = random.Random(f"vemo-schedule:{seed}:{h}")
        best = _improve(prob, units, start, budget, rng)
        if h == s.num_epochs:
            for _ in range(FINAL_RESTARTS):
                cand = _improve(prob, units, start, budget, rng)
                if cand.utility(prob) > best.utility(prob) + EPS:
                    best = cand
        prev = best
    return prev.to_schedule(_notes(prob, prev))


# ---------------------------------------------------------------- exhaustive oracle


def _placements(units: list[_Unit], cap_units: int, limit: int) -> list[tuple[_Unit, ...]]:
    """Internally consistent unit subsets of size <= cap_units; larger sets first."""
    found: list[tuple] = []

    def rec(start, chosen, size):
        if len(chosen) == size:
            found.append(tuple(chosen))
            if len(found) > limit:
                raise CapExceededError
            return
        for k in range(start, len(units)):
            u = units[k]
            if any(_units_conflict(u, v) for v in chosen):
                continue
            chosen.append(u)
            rec(k + 1, chosen, size)
            chosen.pop()

    for size in range(min(cap_units, len(units)), -1, -1):
        rec(0, [], size)
    return found


def exhaustive_optimal(s: Scenario, combo_cap: int = 10**6) -> Schedule:
    """Maximum-utility schedule by exhaustive search.

    Tasks are enumerated in id order and each task's placements largest-first,
    so among equal-utility schedules the first one in that order wins.
    Raises :class:`CapExceededError` when the product of per-task placement
    counts exceeds ``combo_cap``.
    """
    prob = _Problem(s)
    order = sorted(range(prob.n), key=lambda i: prob.tasks[i].id)
    options = []
    total = 1
    for i in order:
        try:
            opts = _placements(prob.all_units[i], prob.max_units[i], combo_cap)
        except CapExceededError:
            raise CapExceededError(f"task {prob.tasks[i].id}: more than {combo_cap} placements") from None
        options.append(opts)
        total *= len(opts)
        if total > combo_cap:
            raise CapExceededError(f"{total}+ placement combinations exceed cap {combo_cap}")

    suffix = [0.0] * (len(order) + 1)
    for k in range(len(order) - 1, -1, -1):
        i = order[k]
        suffix[k] = suffix[k + 1] + prob.value[i] * min(prob.max_units[i], max(len(o) for o in options[k]))

    best = {"u": -1.0, "pick": None}
    occ: set = set()
    pick: list = [None] * len(order)

    def rec(k, cur):
        if cur + suffix[k] <= best["u"] + EPS:
            return
        if k == len(order):
            best["u"], best["pick"] = cur, list(pick)
            return
        i = order[k]
        for opt in options[k]:
            cells = [c for u in opt for c, _ in u.cells]
            if any(c in occ for c in cells):
                continue
            occ.update(cells)
            pick[k] = opt
            rec(k + 1, cur + prob.value[i] * len(opt))
            occ.difference_update(cells)
        pick[k] = None

    rec(0, 0.0)
    st = _State(prob.n)
    for k, opt in enumerate(best["pick"] or []):
        for u in opt:
            st.add(order[k], u)
    return st.to_schedule(_notes(prob, st))


# ---------------------------------------------------------------- rendering and export


def activity_label(s: Scenario, act: Activity) -> str:
    if isinstance(act, TxComm):
        return f"Comm Tx to {act.peer}"
    if isinstance(act, RxComm):
        return f"Comm Rx from {act.peer}"
    if isinstance(act, TxRadar):
        return "Tx radar pulse"
    if isinstance(act, RxRadarEcho):
        return f"Rx radar pulse off {s.task(act.task).target}"
    if isinstance(act, TxJam):
        return f"Jam Tx to {act.victim}"
    if isinstance(act, RxIntercept):
        return f"{s.task(act.task).label} Rx from {act.source}"
    return ""


def render_schedule_table(s: Scenario, sched: Schedule) -> str:
    """Fixed-width table: one row per active platform, one column per epoch."""
    header = ["Platform"] + [f"Epoch {e}" for e in range(s.num_epochs)]
    active = {e.platform for e in sched.entries}
    rows = []
    for pid in s.platform_ids:
        if pid not in active:
            continue
        row = [pid]
        for e in range(s.num_epochs):
            row.append(" / ".join(activity_label(s, a) for a in sched.at(pid, e)))
        rows.append(row)
    widths = [max(len(r[k]) for r in [header] + rows) for k in range(len(header))]
    fmt = lambda r: " | ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip()  # noqa: E731
    lines = [fmt(header), "-+-".join("-" * w for w in widths)]
    lines += [fmt(r) for r in rows]
    return "\n".join(lines) + "\n"


CSV_COLUMNS = ("platform_id", "epoch", "activity", "task_id", "peer_or_target", "tx_epoch")


def _peer_field(act: Activity) -> str:
    for name in ("peer", "illuminator", "victim", "source"):
        if hasattr(act, name):
            return getattr(act, name)
    return ""


def schedule_to_csv(sched: Schedule) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for p, e, act in sched.entries:
        tx = act.tx_epoch if isinstance(act, RxRadarEcho) else ""
        w.writerow([p, e, type(act).__name__, act.task, _peer_field(act), tx])
    return buf.getvalue()


def schedule_from_csv(text: str) -> Schedule:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise ValueError(f"schedule CSV must have columns {','.join(CSV_COLUMNS)}")
    entries = []
    for lineno, row in enumerate(reader, start=2):
        kind = _ACTIVITY_TYPES.get(row["activity"])
        if kind is None:
            raise ValueError(f"line {lineno}: unknown activity {row['activity']!r}")
        task, peer = row["task_id"], row["peer_or_target"]
        if kind is TxRadar:
            act = TxRadar(task)
        elif kind is RxRadarEcho:
            act = RxRadarEcho(task, peer, int(row["tx_epoch"]))
        else:
            act = kind(task, peer)
        entries.append(Entry(row["platform_id"], int(row["epoch"]), act))
    return Schedule(tuple(entries))


def is_transmit(act: Activity) -> bool:
    return isinstance(act, TRANSMIT)


def utility_gap(built: float, optimal: float) -> float:
    """Relative shortfall of ``built`` versus ``optimal`` (0 when optimal is 0)."""
    if optimal <= EPS:
        return 0.0
    return max(0.0, (optimal - built) / optimal)

