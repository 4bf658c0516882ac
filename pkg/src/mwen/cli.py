"""Command-line entry point: ``mwen solve | compare | export | validate``.

Exit codes:

====  =====================================================================
0     success (every solve proved optimal within the requested gap)
1     internal error
2     bad input: unreadable or invalid scenario, bad arguments
3     a model is infeasible (or unbounded)
4     a solver limit (time, node, gap) stopped a solve before proof
====  =====================================================================

A scenario argument is either a path to a YAML document or the name of a
bundled scenario (``paper_4mwen``, ``paper_2mwen_6h``). Outputs go to
``--out``, else ``$MWEN_OUT_DIR``, else ``./mwen-out``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
import time
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

from .audit import (
    costs_csv,
    fmt,
    network_vs_separate_report,
    pea_delta_report,
    schedule_costs,
)
from .milp import Solution, SolverConfig, Status, export_mps, solve_milp
from .milp.mps import sanitize_names
from .model import NETWORKED, QUANTITIES, SEPARATE, build_networked, build_separate, extract_schedule
from .model.schedule import MwenSchedule, Schedule
from .pea import POWER, WATER, ExchangeLedger, apply_pea
from .scenario import (
    Scenario,
    ScenarioError,
    load_scenario,
    parse_scenario,
    reduced_case_study,
    validate_scenario,
)

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_BAD_INPUT = 2
EXIT_INFEASIBLE = 3
EXIT_LIMIT = 4

OUT_ENV = "MWEN_OUT_DIR"
DEFAULT_OUT = "mwen-out"
BUNDLED = ("paper_4mwen", "paper_2mwen_6h")


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


@dataclass
class RunManifest:
    command: str
    scenario: str
    mode: str
    pea: bool
    solver: dict
    output_dir: str
    artifacts: list[str] = field(default_factory=list)
    wall_time: float = 0.0
    solves: list[dict] = field(default_factory=list)

    def write(self, out: Path) -> Path:
        path = out / "manifest.json"
        self.artifacts.append(path.name)
        path.write_text(json.dumps(asdict(self), indent=2) + "\n")
        return path


# -- scenario resolution ------------------------------------------------------


def bundled_scenario(name: str) -> Scenario:
    if name == "paper_4mwen":
        text = resources.files("mwen").joinpath("scenarios/paper_4mwen.yaml").read_text()
        return parse_scenario(text)
    if name == "paper_2mwen_6h":
        return reduced_case_study()
    raise KeyError(name)


def resolve_scenario(arg: str | None, seed_profile: str | None) -> tuple[Scenario, str]:
    if arg is None:
        if seed_profile is None:
            raise CliError("no scenario given (pass a path or --seed-profile)", EXIT_BAD_INPUT)
        arg = seed_profile
    path = Path(arg)
    try:
        if path.exists() or arg not in BUNDLED:
            s = load_scenario(path)
        else:
            s = bundled_scenario(arg)
    except ScenarioError as exc:
        raise CliError(str(exc), EXIT_BAD_INPUT) from None
    report = validate_scenario(s)
    if not report.ok:
        raise CliError(f"scenario {arg} is invalid:\n{report}", EXIT_BAD_INPUT)
    return s, arg


def solver_config(args) -> SolverConfig:
    kwargs = {"backend": args.backend}
    if args.gap is not None:
        kwargs["relative_mip_gap"] = args.gap
    if args.time_limit is not None:
        kwargs["time_limit_seconds"] = args.time_limit
    try:
        return SolverConfig(**kwargs)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_BAD_INPUT) from None


def output_dir(args) -> Path:
    out = Path(args.out or os.environ.get(OUT_ENV) or DEFAULT_OUT)
    out.mkdir(parents=True, exist_ok=True)
    return out


def slug(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "_", name).strip("_").lower() or "mwen"


# -- CSV writers ----------------------------------------------------------------


def schedule_columns(ms: MwenSchedule) -> list[tuple[str, object]]:
    cols = []
    for qty, (kind, _) in QUANTITIES.items():
        arr = ms[qty]
        if kind is None:
            cols.append((qty, arr))
        else:
            for unit in range(arr.shape[0]):
                cols.append((f"{qty}[{unit}]", arr[unit]))
    return cols


def schedule_csv(ms: MwenSchedule, horizon: int) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cols = schedule_columns(ms)
    w.writerow(["period", *(name for name, _ in cols)])
    for t in range(horizon):
        w.writerow([t, *(fmt(float(arr[t])) for _, arr in cols)])
    return buf.getvalue()


def ledger_csv(ledger: ExchangeLedger) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["period", "mwen", "net_exchange", "network_exchange", "external_import", "external_export"])
    M, T = ledger.net_exchange.shape
    for t in range(T):
        for m in range(M):
            w.writerow([t, ledger.names[m], fmt(ledger.net_exchange[m, t]), fmt(ledger.network_exchange[m, t]),
                        fmt(ledger.external_import[m, t]), fmt(ledger.external_export[m, t])])
    return buf.getvalue()


def write(out: Path, name: str, text: str, manifest: RunManifest):
    (out / name).write_text(text)
    manifest.artifacts.append(name)


# -- solving ---------------------------------------------------------------------


def stats_dict(label: str, sol: Solution) -> dict:
    st = sol.stats
    clean = lambda v: None if v is None or (isinstance(v, float) and not math.isfinite(v)) else v  # noqa: E731
    return {
        "model": label,
        "status": sol.status.value,
        "objective": clean(sol.objective_value),
        "nodes": st.nodes,
        "simplex_iterations": st.simplex_iterations,
        "wall_time": st.wall_time,
        "gap": clean(st.gap),
        "best_bound": clean(st.best_bound),
    }


def run_model(problem, idx, s, cfg, label, manifest) -> tuple[Schedule | None, int]:
    sol = solve_milp(problem, cfg)
    manifest.solves.append(stats_dict(label, sol))
    if sol.status in (Status.INFEASIBLE, Status.UNBOUNDED):
        return None, EXIT_INFEASIBLE
    if not sol.has_incumbent:
        return None, EXIT_LIMIT
    code = EXIT_OK if sol.status == Status.OPTIMAL else EXIT_LIMIT
    return extract_schedule(sol, idx, s, cfg), code


def solve_networked(s, cfg, manifest, pea: bool):
    problem, idx = build_networked(s)
    sch, code = run_model(problem, idx, s, cfg, "networked", manifest)
    if sch is None:
        return None, None, code, None
    if not pea:
        return sch, None, code, None
    settled, power = apply_pea(sch, s, POWER)
    settled, water = apply_pea(settled, s, WATER)
    return settled, sch, code, (power, water)


def solve_separate(s, cfg, manifest):
    schedules, worst = [], EXIT_OK
    for m, mw in enumerate(s.mwens):
        problem, idx = build_separate(s, m)
        sch, code = run_model(problem, idx, s, cfg, f"separate:{mw.name}", manifest)
        if sch is None:
            return None, code
        worst = max(worst, code)
        schedules.append(sch)
    return schedules, worst


def cmd_solve(args) -> int:
    start = time.perf_counter()
    s, label = resolve_scenario(args.scenario, args.seed_profile)
    cfg = solver_config(args)
    pea = args.pea == "on"
    if pea and args.mode != NETWORKED:
        raise CliError("--pea on requires --mode networked", EXIT_BAD_INPUT)
    if args.mode == NETWORKED and len(s.mwens) < 2:
        raise CliError("networked mode needs at least 2 MWENs", EXIT_BAD_INPUT)
    out = output_dir(args)
    manifest = RunManifest("solve", label, args.mode, pea, _overrides(args), str(out))
    if args.mode == NETWORKED:
        sch, before, code, pea_result = solve_networked(s, cfg, manifest, pea)
        if sch is None:
            return _finish(manifest, out, start, code)
        for ms in sch.mwens:
            write(out, f"schedule_{slug(ms.name)}.csv", schedule_csv(ms, sch.horizon), manifest)
        costs = schedule_costs(s, sch)
        write(out, "costs.csv", costs_csv(costs), manifest)
        if pea:
            before_costs = schedule_costs(s, before)
            write(out, "costs_before_pea.csv", costs_csv(before_costs), manifest)
            for result in pea_result:
                res = result.before.resource
                write(out, f"ledger_{res}_before_pea.csv", ledger_csv(result.before), manifest)
                write(out, f"ledger_{res}_after_pea.csv", ledger_csv(result.after), manifest)
            write(out, "pea_delta.csv", pea_delta_report(before_costs, costs).to_csv(), manifest)
    else:
        schedules, code = solve_separate(s, cfg, manifest)
        if schedules is None:
            return _finish(manifest, out, start, code)
        costs = []
        for sch in schedules:
            (ms,) = sch.mwens
            write(out, f"schedule_{slug(ms.name)}.csv", schedule_csv(ms, sch.horizon), manifest)
            costs.extend(schedule_costs(s, sch))
        write(out, "costs.csv", costs_csv(costs), manifest)
    return _finish(manifest, out, start, code)


def cmd_compare(args) -> int:
    start = time.perf_counter()
    s, label = resolve_scenario(args.scenario, args.seed_profile)
    if len(s.mwens) < 2:
        raise CliError("compare needs at least 2 MWENs (networked mode)", EXIT_BAD_INPUT)
    cfg = solver_config(args)
    out = output_dir(args)
    manifest = RunManifest("compare", label, "networked+separate", True, _overrides(args), str(out))
    networked, _, code, _ = solve_networked(s, cfg, manifest, pea=True)
    if networked is None:
        return _finish(manifest, out, start, code)
    separate, sep_code = solve_separate(s, cfg, manifest)
    if separate is None:
        return _finish(manifest, out, start, sep_code)
    net_costs = schedule_costs(s, networked)
    sep_costs = [c for sch in separate for c in schedule_costs(s, sch)]
    table = network_vs_separate_report(sep_costs, net_costs)
    write(out, "comparison.csv", table.to_csv(), manifest)
    write(out, "comparison.svg", comparison_svg(table), manifest)
    return _finish(manifest, out, start, max(code, sep_code))


def comparison_svg(table) -> str:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "mwen", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6.4, 3.6))
        names = [r.name for r in table.rows]
        xs = range(len(names))
        width = 0.38
        ax.bar([x - width / 2 for x in xs], [r.baseline for r in table.rows], width, label=table.baseline_label)
        ax.bar([x + width / 2 for x in xs], [r.candidate for r in table.rows], width, label=table.candidate_label)
        ax.set_xticks(list(xs), names)
        ax.set_ylabel("operating cost [$]")
        ax.legend()
        fig.tight_layout()
        buf = io.StringIO()
        fig.savefig(buf, format="svg", metadata={"Date": None})
        plt.close(fig)
    return buf.getvalue()


def cmd_export(args) -> int:
    s, label = resolve_scenario(args.scenario, args.seed_profile)
    out = output_dir(args)
    if args.mode == NETWORKED:
        if len(s.mwens) < 2:
            raise CliError("networked mode needs at least 2 MWENs", EXIT_BAD_INPUT)
        problem, _ = build_networked(s)
        stem = f"{slug(s.name)}_networked"
    else:
        if args.mwen is None:
            raise CliError("--mode separate export needs --mwen", EXIT_BAD_INPUT)
        sel = int(args.mwen) if args.mwen.isdigit() else args.mwen
        try:
            pos = s.mwen_index(sel)
        except KeyError as exc:
            raise CliError(str(exc.args[0]), EXIT_BAD_INPUT) from None
        problem, _ = build_separate(s, pos)
        stem = f"{slug(s.name)}_separate_{slug(s.mwens[pos].name)}"
    mps_path = out / f"{stem}.mps"
    mps_path.write_text(export_mps(problem))
    _, _, names = sanitize_names(problem)
    (out / f"{stem}.names.json").write_text(json.dumps(names.to_dict(), indent=1, sort_keys=True) + "\n")
    print(mps_path)
    return EXIT_OK


def cmd_validate(args) -> int:
    s, label = resolve_scenario(args.scenario, args.seed_profile)
    print(f"{label}: valid ({len(s.mwens)} MWENs, {s.horizon_periods} periods)")
    return EXIT_OK


def _overrides(args) -> dict:
    return {"backend": args.backend, "relative_mip_gap": args.gap, "time_limit_seconds": args.time_limit}


def _finish(manifest: RunManifest, out: Path, start: float, code: int) -> int:
    manifest.wall_time = time.perf_counter() - start
    manifest.write(out)
    for sol in manifest.solves:
        print(f"{sol['model']}: {sol['status']} objective={sol['objective']}")
    print(f"artifacts in {out}")
    return code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mwen", description="Networked water-energy nexus scheduling")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, solver=True):
        p.add_argument("scenario", nargs="?", help="scenario YAML path or bundled scenario name")
        p.add_argument("--seed-profile", help="bundled scenario to use when no path is given")
        p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./{DEFAULT_OUT})")
        if solver:
            p.add_argument("--gap", type=float, help="relative MIP gap (default 1e-4)")
            p.add_argument("--time-limit", type=float, help="per-solve time limit in seconds")
            p.add_argument("--backend", choices=("native", "highs"), default="highs",
                           help="MILP solver (default highs)")

    p = sub.add_parser("solve", help="solve one scenario and write schedules and costs")
    common(p)
    p.add_argument("--mode", choices=(NETWORKED, SEPARATE), default=NETWORKED)
    p.add_argument("--pea", choices=("on", "off"), default="off")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("compare", help="networked (with PEA) vs separate operation")
    common(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("export", help="write the model as free-format MPS")
    common(p, solver=False)
    p.add_argument("--mode", choices=(NETWORKED, SEPARATE), default=NETWORKED)
    p.add_argument("--mwen", help="MWEN position or name (separate mode)")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("validate", help="check a scenario document")
    common(p, solver=False)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except Exception as exc:  # pragma: no cover - last-resort diagnostics
        print(f"internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
