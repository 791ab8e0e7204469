"""Random scenario and schedule generators shared by the test modules."""

from __future__ import annotations

import random

from vemo.scenario import (
    CommLink,
    EnemyEmitter,
    JamTask,
    PassiveIntercept,
    PhyDefaults,
    Platform,
    RadarTrack,
    Scenario,
)

KINDS = ("aircraft", "ground", "ship", "uav")


def random_scenario(rng: random.Random, max_platforms=8, max_epochs=12, max_tasks=10,
                    min_platforms=2, spread=450e3) -> Scenario:
    """Random scenario with 1 ms epochs; ``spread`` meters keeps delays in 0..3 epochs."""
    n_p = rng.randint(min_platforms, max_platforms)
    n_e = rng.randint(1, 3)
    E = rng.randint(1, max_epochs)
    pos = lambda: (rng.uniform(-spread, spread), rng.uniform(-spread, spread), rng.uniform(0, 10e3))  # noqa: E731
    platforms = [Platform(f"P{i}", rng.choice(KINDS), pos()) for i in range(n_p)]
    emitters = [
        EnemyEmitter(f"E{i}", pos(), tuple(sorted(rng.sample(range(E), rng.randint(0, E)))),
                     rng.uniform(0.1, 2.0))
        for i in range(n_e)
    ]
    pids = [p.id for p in platforms]
    eids = [e.id for e in emitters]
    tasks = []
    for k in range(rng.randint(0, max_tasks)):
        prio = float(rng.choice([1, 2, 3, 5, 8, 10])) if rng.random() < 0.7 else round(rng.uniform(0.5, 10), 3)
        kind = rng.random()
        tid = f"T{k:02d}"
        if kind < 0.45:
            src, dst = rng.sample(pids, 2)
            tasks.append(CommLink(tid, src, dst, rng.randint(1, 3), prio))
        elif kind < 0.65:
            recv = tuple(rng.sample(pids, rng.randint(1, min(3, n_p))))
            tasks.append(RadarTrack(tid, rng.choice(pids), rng.choice(eids), recv, rng.randint(1, 2), prio))
        elif kind < 0.85:
            cands = tuple(rng.sample(pids, rng.randint(1, min(3, n_p))))
            cover = tuple(sorted(rng.sample(range(E), rng.randint(1, min(3, E)))))
            tasks.append(JamTask(tid, cands, rng.choice(eids), cover, rng.randint(1, len(cands)), prio))
        else:
            tasks.append(PassiveIntercept(tid, rng.choice(pids), rng.choice(eids), rng.randint(1, 2), prio))
    return Scenario(1e-3, E, platforms, emitters, tasks, PhyDefaults(seed=rng.randrange(2**31)))


def tiny_scenario(rng: random.Random) -> Scenario:
    """Instances inside the exhaustive-oracle comfort zone: <=3 platforms, <=4 epochs, <=3 tasks."""
    return random_scenario(rng, max_platforms=3, max_epochs=4, max_tasks=3)


def fig4_analogue():
    """Hand-built valid schedule on the bundled fig4 geometry; every task fully satisfied."""
    from vemo.scheduler import RxComm, RxIntercept, RxRadarEcho, Schedule, TxComm, TxJam, TxRadar

    echo = RxRadarEcho("trk-EA1", "A1", 1)
    cells = {
        ("A1", 1): TxRadar("trk-EA1"), ("A1", 3): TxComm("c-A1-A2", "A2"), ("A1", 4): RxComm("c-A2-A1", "A2"),
        ("A2", 1): TxComm("c-A2-A3", "A3"), ("A2", 2): echo, ("A2", 3): RxComm("c-A1-A2", "A1"),
        ("A2", 4): TxComm("c-A2-A1", "A1"), ("A2", 5): TxComm("c-A2-A3", "A3"),
        ("A3", 1): RxComm("c-A2-A3", "A2"), ("A3", 2): echo, ("A3", 3): TxComm("c-A3-T3", "T3"),
        ("A3", 5): RxComm("c-A2-A3", "A2"), ("A3", 7): RxComm("c-T3-A3", "T3"),
        ("T1", 1): TxComm("c-T1-T2", "T2"), ("T1", 2): RxComm("c-T2-T1", "T2"),
        ("T1", 4): TxComm("c-T1-T4", "T4"), ("T1", 5): RxComm("c-T4-T1", "T4"),
        ("T2", 1): RxComm("c-T1-T2", "T1"), ("T2", 2): TxComm("c-T2-T1", "T1"), ("T2", 5): TxComm("c-T2-T3", "T3"),
        ("T3", 1): RxIntercept("elint-EA2", "EA2"), ("T3", 2): TxJam("jam-ET1", "ET1"), ("T3", 3): echo,
        ("T3", 4): RxComm("c-A3-T3", "A3"), ("T3", 5): RxComm("c-T2-T3", "T2"), ("T3", 6): TxComm("c-T3-A3", "A3"),
        ("T4", 2): RxIntercept("sigint-ET3", "ET3"), ("T4", 3): TxJam("jam-ET1", "ET1"),
        ("T4", 4): RxComm("c-T1-T4", "T1"), ("T4", 5): TxComm("c-T4-T1", "T1"),
    }
    return Schedule.from_cells(cells)
