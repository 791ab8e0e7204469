"""Schedule dissemination and outage analysis.

A single orchestrator owns the schedule. Its distribution rides the comm
pairs already in the schedule: a platform counts as informed once it hears
from an informed platform. Platforms that cannot be reached in time are
assumed to have been loaded with the schedule before the mission starts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .scenario import CommLink, Scenario
from .scheduler import RxComm, Schedule, TxComm, UtilityReport, comm_delay, utility

ORCHESTRATOR_EPOCH = -1


@dataclass(frozen=True)
class CommPair:
    task: str
    src: str
    dst: str
    tx_epoch: int
    rx_epoch: int


def comm_pairs(s: Scenario, sched: Schedule) -> list[CommPair]:
    """Matched Tx/Rx comm pairs, ordered by (rx_epoch, tx_epoch, task)."""
    rx = {(a.task, p, e) for p, e, a in sched.entries if isinstance(a, RxComm)}
    pairs = []
    for p, e, a in sched.entries:
        if not isinstance(a, TxComm):
            continue
        t = s.task(a.task)
        e_rx = e + comm_delay(s, t)
        if (t.id, t.dst, e_rx) in rx:
            pairs.append(CommPair(t.id, p, t.dst, e, e_rx))
    pairs.sort(key=lambda q: (q.rx_epoch, q.tx_epoch, q.task))
    return pairs


def inject_control_traffic(s: Scenario, orchestrator: str) -> Scenario:
    """Add an orchestrator-to-platform control link per other platform, above every existing priority."""
    s.platform(orchestrator)
    if any(isinstance(t, CommLink) and t.control for t in s.tasks):
        raise ValueError("control traffic has already been injected into this scenario")
    top = max((t.priority for t in s.tasks), default=0.0) + 1.0
    used = {t.id for t in s.tasks} | set(s.platform_ids) | {e.id for e in s.emitters}
    extra = []
    for p in s.platform_ids:
        if p == orchestrator:
            continue
        tid = f"CTL-{p}"
        while tid in used:
            tid += "_"
        used.add(tid)
        extra.append(CommLink(tid, orchestrator, p, 1, top, control=True))
    if not extra:
        return s
    return s.with_tasks(tuple(s.tasks) + tuple(extra))


@dataclass
class DisseminationReport:
    orchestrator: str
    informed_epoch: dict  # platform id -> epoch, or None when never informed
    feasible: bool
    relay_paths: dict  # platform id -> [orchestrator, ..., platform]
    late: list = field(default_factory=list)
    preloaded: bool = False  # schedule assumed loaded before the mission when infeasible

    def to_dict(self) -> dict:
        return {
            "orchestrator": self.orchestrator,
            "informed_epoch": {p: ("NEVER" if e is None else e) for p, e in sorted(self.informed_epoch.items())},
            "feasible": self.feasible,
            "relay_paths": {p: list(v) for p, v in sorted(self.relay_paths.items())},
            "late": list(self.late),
            "preloaded": self.preloaded,
        }


def check_dissemination(s: Scenario, sched: Schedule, orchestrator: str) -> DisseminationReport:
    s.platform(orchestrator)
    informed: dict = {p: None for p in s.platform_ids}
    informed[orchestrator] = ORCHESTRATOR_EPOCH
    parent: dict = {}
    via_rx: dict = {}
    for q in comm_pairs(s, sched):
        src_at = informed[q.src]
        if src_at is None or src_at >= q.tx_epoch or informed[q.dst] is not None:
            continue
        informed[q.dst] = q.rx_epoch
        parent[q.dst] = q.src
        via_rx[q.dst] = (q.task, q.rx_epoch)

    paths = {}
    for p in s.platform_ids:
        if informed[p] is None:
            continue
        chain = [p]
        while chain[-1] != orchestrator:
            chain.append(parent[chain[-1]])
        paths[p] = chain[::-1]

    first: dict = {}
    for p, e, a in sched.entries:
        # the reception that delivers the schedule does not need the schedule
        if isinstance(a, RxComm) and via_rx.get(p) == (a.task, e):
            continue
        first[p] = min(first.get(p, e), e)
    late = sorted(
        p for p, e in first.items()
        if p != orchestrator and (informed[p] is None or informed[p] > e)
    )
    feasible = not late
    return DisseminationReport(orchestrator, informed, feasible, paths, late, preloaded=not feasible)


@dataclass
class OutageReport:
    baseline: UtilityReport
    degraded: UtilityReport
    failed_pairs: list

    @property
    def utility_drop(self) -> float:
        return self.baseline.total - self.degraded.total

    def to_dict(self) -> dict:
        return {
            "baseline_utility": self.baseline.total,
            "outage_utility": self.degraded.total,
            "failed_pairs": [[q.task, q.src, q.dst, q.tx_epoch, q.rx_epoch] for q in self.failed_pairs],
            "per_task": dict(sorted(self.degraded.per_task.items())),
        }


def _outage_items(outage):
    for item in outage:
        if len(item) == 2:
            e, pair = item
            a, b = pair
        else:
            e, a, b = item
        yield int(e), frozenset((a, b))


def simulate_outage(s: Scenario, sched: Schedule, outage) -> OutageReport:
    """Drop comm pairs touching an outaged (epoch, link); everything else runs as pre-scheduled.

    ``outage`` holds ``(epoch, (a, b))`` or ``(epoch, a, b)`` items; the link
    is undirected and a pair fails when either its Tx or Rx epoch is hit.
    """
    down = set(_outage_items(outage))
    baseline = utility(s, sched)
    failed = [
        q for q in comm_pairs(s, sched)
        if (q.tx_epoch, frozenset((q.src, q.dst))) in down or (q.rx_epoch, frozenset((q.src, q.dst))) in down
    ]
    drop = set()
    for q in failed:
        drop.add((q.src, q.tx_epoch, TxComm(q.task, q.dst)))
        drop.add((q.dst, q.rx_epoch, RxComm(q.task, q.src)))
    degraded = utility(s, sched.without(drop))
    return OutageReport(baseline, degraded, failed)
