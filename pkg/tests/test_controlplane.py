import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from helpers import fig4_analogue, random_scenario
from oracles import dist, epochs_of, fixed_point_informed
from vemo.cli import resolve_scenario
from vemo.controlplane import check_dissemination, comm_pairs, inject_control_traffic, simulate_outage
from vemo.scenario import CommLink, PhyDefaults, Platform, Scenario
from vemo.scheduler import RxComm, Schedule, TxComm, TxRadar, build_schedule, utility, validate_schedule

km = lambda x: (x * 1e3, 0.0, 0.0)  # noqa: E731


def line(n, tasks=(), E=4):
    plats = tuple(Platform(f"P{i}", "ground", km(10 * i)) for i in range(n))
    return Scenario(1e-3, E, plats, (), tuple(tasks), PhyDefaults())


def pair(task, a, b, e):
    return {(a, e): TxComm(task, b), (b, e): RxComm(task, a)}


def test_inject_single_platform_unchanged():
    s = line(1)
    assert inject_control_traffic(s, "P0") == s


def test_inject_priorities():
    s = line(3, [CommLink("c", "P1", "P2", 1, 4.0)])
    out = inject_control_traffic(s, "P0")
    new = [t for t in out.tasks if t.control]
    assert len(new) == 2
    assert {t.dst for t in new} == {"P1", "P2"}
    assert all(t.priority > 4.0 and t.payload_epochs == 1 and t.src == "P0" for t in new)
    with pytest.raises(ValueError):
        inject_control_traffic(out, "P0")


def test_inject_fig4():
    s = resolve_scenario("fig4.scn")
    out = inject_control_traffic(s, "A1")
    assert len(out.tasks) - len(s.tasks) == 6
    assert min(t.priority for t in out.tasks if getattr(t, "control", False)) > max(t.priority for t in s.tasks)


def test_inject_unknown_orchestrator():
    with pytest.raises(KeyError):
        inject_control_traffic(line(2), "ZZ")


def test_direct_and_relay():
    s = line(3, [CommLink("a", "P0", "P1", 1, 1.0), CommLink("b", "P1", "P2", 1, 1.0)])
    sched = Schedule.from_cells({**pair("a", "P0", "P1", 0), **pair("b", "P1", "P2", 1)})
    rep = check_dissemination(s, sched, "P0")
    assert rep.informed_epoch == {"P0": -1, "P1": 0, "P2": 1}
    assert rep.relay_paths["P2"] == ["P0", "P1", "P2"]
    assert rep.feasible and not rep.preloaded


def test_late_platform_is_infeasible():
    s = line(3, [CommLink("a", "P0", "P1", 1, 1.0), CommLink("c", "P2", "P1", 1, 1.0)])
    sched = Schedule.from_cells({**pair("c", "P2", "P1", 0), **pair("a", "P0", "P1", 2)})
    rep = check_dissemination(s, sched, "P0")
    assert rep.informed_epoch["P1"] == 2
    assert rep.informed_epoch["P2"] is None
    assert not rep.feasible
    assert rep.late == ["P1", "P2"] and rep.preloaded


def test_never_informed_reported():
    s = line(2)
    rep = check_dissemination(s, Schedule(), "P0")
    assert rep.informed_epoch["P1"] is None
    assert rep.feasible
    assert rep.to_dict()["informed_epoch"]["P1"] == "NEVER"


def _random_built(seed, **kw):
    rng = random.Random(seed)
    s = random_scenario(rng, **kw)
    return rng, s, build_schedule(s, budget=30, seed=seed)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32))
def test_matches_fixed_point_oracle(seed):
    rng, s, sched = _random_built(seed)
    orch = rng.choice(s.platform_ids)
    assert check_dissemination(s, sched, orch).informed_epoch == fixed_point_informed(s, sched, orch)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32))
def test_monotone_in_pairs(seed):
    rng, s, full = _random_built(seed)
    pairs = comm_pairs(s, full)
    drop = set()
    for q in pairs:
        if rng.random() < 0.5:
            drop |= {(q.src, q.tx_epoch, TxComm(q.task, q.dst)), (q.dst, q.rx_epoch, RxComm(q.task, q.src))}
    part = full.without(drop)
    orch = s.platform_ids[0]
    a = check_dissemination(s, part, orch).informed_epoch
    b = check_dissemination(s, full, orch).informed_epoch
    inf = lambda v: math.inf if v is None else v  # noqa: E731
    assert all(inf(b[p]) <= inf(a[p]) for p in s.platform_ids)


# ---------------------------------------------------------------- outage


@pytest.fixture(scope="module")
def fig4():
    return resolve_scenario("fig4.scn")


def test_empty_outage(fig4):
    rep = simulate_outage(fig4, fig4_analogue(), set())
    assert rep.utility_drop == 0 and rep.failed_pairs == []


def test_total_comm_outage(fig4):
    sched = fig4_analogue()
    links = {(q.tx_epoch, frozenset((q.src, q.dst))) for q in comm_pairs(fig4, sched)}
    rep = simulate_outage(fig4, sched, {(e, tuple(sorted(p))) for e, p in links})
    for t in fig4.tasks:
        if isinstance(t, CommLink):
            assert rep.degraded.per_task[t.id] == 0
        else:
            assert rep.degraded.per_task[t.id] == rep.baseline.per_task[t.id]


@pytest.mark.parametrize("epoch", range(8))
def test_single_epoch_outage_fig4(fig4, epoch):
    sched = fig4_analogue()
    hit = []
    for p, e, a in sched.entries:
        if isinstance(a, TxComm):
            t = fig4.task(a.task)
            rx_e = e + epochs_of(dist(fig4.position(t.src), fig4.position(t.dst)), fig4.epoch_duration)
            if epoch in (e, rx_e):
                hit.append((e, t))
    outage = {(epoch, (t.src, t.dst)) for _, t in hit}
    expected = sum(t.priority / t.payload_epochs for _, t in hit)
    rep = simulate_outage(fig4, sched, outage)
    assert rep.utility_drop == pytest.approx(expected)


def test_outage_accepts_flat_items(fig4):
    a = simulate_outage(fig4, fig4_analogue(), {(1, "A2", "A3")})
    b = simulate_outage(fig4, fig4_analogue(), {(1, ("A3", "A2"))})
    assert a.degraded == b.degraded and len(a.failed_pairs) == 1


def test_outage_keeps_schedule_valid(fig4):
    rep = simulate_outage(fig4, fig4_analogue(), {(3, "A1", "A2")})
    assert rep.degraded.per_task["c-A1-A2"] == 0
    assert rep.degraded.total < rep.baseline.total


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32))
def test_outage_never_helps(seed):
    rng, s, sched = _random_built(seed)
    pids = s.platform_ids
    outage = {(rng.randrange(s.num_epochs), tuple(rng.sample(pids, 2))) for _ in range(rng.randint(0, 4))}
    rep = simulate_outage(s, sched, outage)
    assert rep.degraded.total <= rep.baseline.total + 1e-12
    assert (rep.utility_drop > 1e-12) == bool(rep.failed_pairs)


def test_non_comm_untouched_by_outage(fig4):
    sched = fig4_analogue()
    rep = simulate_outage(fig4, sched, {(1, "A1", "A2"), (2, "T3", "T4")})
    assert rep.degraded.per_task["trk-EA1"] == 1.0
    assert any(isinstance(a, TxRadar) for _, _, a in sched.entries)
    assert validate_schedule(fig4, sched) == []
    assert utility(fig4, sched).total == rep.baseline.total
