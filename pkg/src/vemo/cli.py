"""Command-line entry point: ``vemo schedule|simulate|waveform-demo|oracle``."""

from __future__ import annotations

import argparse
import csv
import io
import sys
from importlib import resources
from pathlib import Path

from .demos import CURVES
from .scenario import ScenarioError, load_scenario, parse_scenario
from .scheduler import (
    CapExceededError,
    InvalidScheduleError,
    build_schedule,
    exhaustive_optimal,
    render_schedule_table,
    schedule_from_csv,
    schedule_to_csv,
    utility,
    validate_schedule,
)
from .sim import run_simulation

EXIT_OK, EXIT_INVALID, EXIT_INFEASIBLE = 0, 2, 3


def resolve_scenario(name: str):
    """Load a scenario file, falling back to the bundled ``vemo/data`` copies by name."""
    path = Path(name)
    if path.exists():
        return load_scenario(path)
    bundled = resources.files("vemo") / "data" / path.name
    if bundled.is_file():
        return parse_scenario(bundled.read_text(encoding="utf-8"))
    raise FileNotFoundError(f"scenario not found: {name}")


def _write(text: str, dest: str | None) -> None:
    if dest:
        Path(dest).write_text(text)
    else:
        sys.stdout.write(text)


def _infeasible(sched) -> list[str]:
    return sorted(t for t, why in sched.notes.items() if why.startswith("infeasible"))


def cmd_schedule(args) -> int:
    s = resolve_scenario(args.scenario)
    sched = build_schedule(s, budget=args.budget, seed=args.seed)
    text = schedule_to_csv(sched) if args.out == "csv" else render_schedule_table(s, sched) + "\n"
    _write(text, args.output)
    for tid, why in sorted(sched.notes.items()):
        print(f"note: {tid}: {why}", file=sys.stderr)
    print(f"utility: {utility(s, sched).total:.6g}", file=sys.stderr)
    return EXIT_INFEASIBLE if _infeasible(sched) else EXIT_OK


def cmd_simulate(args) -> int:
    s = resolve_scenario(args.scenario)
    seed = s.phy.seed if args.seed is None else args.seed
    if args.schedule:
        sched = schedule_from_csv(Path(args.schedule).read_text())
        violations = validate_schedule(s, sched)
        if violations:
            raise InvalidScheduleError(violations)
    else:
        sched = build_schedule(s, budget=args.budget, seed=seed)
    report = run_simulation(s, sched, seed=seed, orchestrator=args.orchestrator)
    _write(report.to_json(), args.report)
    return EXIT_OK


def cmd_demo(args) -> int:
    kwargs = {"seed": args.seed}
    if args.trials is not None and args.demo != "papr":
        kwargs["trials"] = args.trials
    rows = CURVES[args.demo](**kwargs)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    _write(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_oracle(args) -> int:
    s = resolve_scenario(args.scenario)
    try:
        sched = exhaustive_optimal(s, combo_cap=args.cap)
    except CapExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    print(render_schedule_table(s, sched))
    print(f"utility: {utility(s, sched).total:.6g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="vemo", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("schedule", help="build a schedule and print it")
    p.add_argument("scenario")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=400, help="local-search iterations per horizon stage")
    p.add_argument("--out", choices=("table", "csv"), default="table")
    p.add_argument("-o", "--output", help="write to a file instead of stdout")
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("simulate", help="run the PHY simulation and emit a JSON report")
    p.add_argument("scenario")
    p.add_argument("--schedule", help="schedule CSV; built from the scenario when omitted")
    p.add_argument("--seed", type=int, help="defaults to the scenario's phy.seed")
    p.add_argument("--budget", type=int, default=400)
    p.add_argument("--orchestrator", help="control-plane orchestrator (default: first platform)")
    p.add_argument("--report", help="report file (default: stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("waveform-demo", help="Monte Carlo curves as CSV")
    p.add_argument("demo", choices=sorted(CURVES))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int)
    p.add_argument("--out", help="CSV file (default: stdout)")
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("oracle", help="exhaustive optimum for small scenarios")
    p.add_argument("scenario")
    p.add_argument("--cap", type=int, default=10**6)
    p.set_defaults(func=cmd_oracle)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, InvalidScheduleError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
