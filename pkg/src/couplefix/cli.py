"""Command line front end: check, solve, and demo problem documents.

Exit codes: 0 = checks pass / iteration converged (or stopped at an early
coincidence), 1 = at least one check reported violations, 2 = the iteration
hit its step limit or tripped a diagnostic, 3 = the document or arguments
could not be used, 4 = a self-map preimage could not be found.

Human-readable output goes to stdout.  ``--json`` writes the machine report
to a file, or to stderr when the path is ``-``, so stdout never mixes the
two.  The JSON is byte-identical across runs except for ``timing_ms``.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from pathlib import Path
from typing import Optional

from . import __version__
from .checks import (
    check_coupling,
    check_phi_psi_contraction,
    check_phi_T_contraction,
    check_range_compatibility,
    check_scc_map,
)
from .controls import check_altering, check_phi_class
from .documents import (
    CheckSettings,
    ProblemDocument,
    build_problem,
    builtin_registry,
    parse_problem_file,
    registry_names,
)
from .errors import CoupleFixError, DocumentError
from .metric import (
    Point,
    SamplePlan,
    check_metric_axioms,
    sampled_diameter,
    subset_intersection,
    subset_values,
)
from .report import CheckReport
from .solve import (
    IterationTrace,
    SolveOptions,
    SolveReport,
    SolveStatus,
    iterate_coincidence,
    iterate_strong_coupled,
    multi_start_unique,
)

TRACE_HEADER = "n,x_n,y_n,Tx_n,Ty_n,D_n,R_n,residual"

#: Violations kept per check in the JSON report; counts stay exact.
MAX_JSON_VIOLATIONS = 5

_STATUS_EXIT = {
    SolveStatus.CONVERGED: 0,
    SolveStatus.EARLY_COINCIDENCE: 0,
    SolveStatus.MAX_ITER_EXCEEDED: 2,
    SolveStatus.DIAGNOSTIC_VIOLATION: 2,
    SolveStatus.PREIMAGE_FAILURE: 4,
}


def load_document(source: str) -> ProblemDocument:
    """A source is a document path if it exists on disk, else a builtin name."""
    path = Path(source)
    if path.exists():
        return parse_problem_file(path)
    if source in registry_names():
        return builtin_registry(source)
    raise DocumentError(
        f"no such file or builtin problem: {source!r}; "
        f"builtins: {', '.join(registry_names())}"
    )


def _apply_overrides(doc: ProblemDocument, args) -> tuple[CheckSettings, SolveOptions]:
    plan, plan_b = doc.check.plan, doc.check.plan_b
    samples = getattr(args, "samples", None)
    if samples is not None:
        plan = SamplePlan(samples, plan.jitter_count, plan.seed)
        plan_b = None
    jitter = getattr(args, "jitter", None)
    if jitter is not None:
        plan = dataclasses.replace(plan, jitter_count=jitter)
        if plan_b is not None:
            plan_b = dataclasses.replace(plan_b, jitter_count=jitter)
    seed = getattr(args, "seed", None)
    if seed is not None:
        plan = dataclasses.replace(plan, seed=seed)
        if plan_b is not None:
            plan_b = dataclasses.replace(plan_b, seed=seed)
    tol = getattr(args, "tol", None)
    settings = dataclasses.replace(
        doc.check,
        plan=plan,
        plan_b=plan_b,
        tol=tol if tol is not None else doc.check.tol,
    )
    solve_kwargs = {}
    if tol is not None:
        solve_kwargs["tol"] = tol
    max_iter = getattr(args, "max_iter", None)
    if max_iter is not None:
        solve_kwargs["max_iter"] = max_iter
    if seed is not None:
        solve_kwargs["seed"] = seed
    opts = dataclasses.replace(doc.solve, **solve_kwargs) if solve_kwargs else doc.solve
    return settings, opts


def run_checks(problem, settings: CheckSettings) -> list[tuple[str, CheckReport]]:
    """The full check pipeline, in a fixed order, as (slot, report) pairs."""
    plan, plan_b, tol = settings.plan, settings.plan_b, settings.tol
    space, a, b = problem.space, problem.subset_a, problem.subset_b
    reports = [("space", check_metric_axioms(space, plan, tol))]

    t_max = 2.0 * sampled_diameter(space, [a, b], plan)
    if t_max <= 0.0:
        t_max = 1.0
    coincidence = hasattr(problem, "self_map")
    if coincidence:
        reports.append(("phi", check_phi_class(problem.phi, t_max, plan, tol)))
    else:
        reports.append(("phi", check_altering(problem.phi, t_max, plan, tol)))
        reports.append(("psi", check_altering(problem.psi, t_max, plan, tol)))

    reports.append(("coupling", check_coupling(problem.coupling, a, b, plan, plan_b)))
    if coincidence:
        t = problem.self_map
        reports.append(("self_map", check_scc_map(t, a, b, plan, tol, plan_b)))
        reports.append(
            (
                "range",
                check_range_compatibility(
                    problem.coupling, t, a, b, plan, tol, plan_b,
                    targets_b=settings.range_b,
                ),
            )
        )
        reports.append(
            (
                "contraction",
                check_phi_T_contraction(problem, plan, tol, plan_b, settings.budget),
            )
        )
    else:
        reports.append(
            (
                "contraction",
                check_phi_psi_contraction(problem, plan, tol, plan_b, settings.budget),
            )
        )
    return reports


def render_trace_csv(trace: IterationTrace) -> str:
    """One row per completed transition, floats at 17 significant digits."""

    def fmt(v) -> str:
        if v is None:
            return ""
        return "%.17g" % v if isinstance(v, float) else str(v)

    lines = [TRACE_HEADER]
    for s in trace.steps:
        lines.append(
            f"{s.n},{fmt(s.x)},{fmt(s.y)},{fmt(s.tx)},{fmt(s.ty)},"
            f"{fmt(s.d)},{fmt(s.r)},{fmt(s.residual)}"
        )
    return "\n".join(lines) + "\n"


def _fmt_num(v) -> str:
    return "%g" % v if isinstance(v, float) else str(v)


def _fmt_set(values) -> str:
    return "{" + ", ".join(_fmt_num(v) for v in values) + "}"


def _check_to_json(slot: str, report: CheckReport) -> dict:
    entry = report.to_dict()
    worst = sorted(report.violations, key=lambda v: v.residual, reverse=True)
    entry["violations"] = [v.to_dict() for v in worst[:MAX_JSON_VIOLATIONS]]
    entry["slot"] = slot
    return entry


def _print_checks(reports: list[tuple[str, CheckReport]]) -> None:
    for slot, r in reports:
        label = f"{r.property_name} ({slot})" if slot in ("phi", "psi") else r.property_name
        mark = "PASS" if r.passed else "FAIL"
        count = len(r.violations) + int(r.details.get("violations_dropped", 0))
        print(f"[{mark}] {label}: samples={r.samples_tested} violations={count}")
        if not r.passed and r.violations:
            worst = max(r.violations, key=lambda v: v.residual)
            print(f"       worst: lhs={_fmt_num(worst.lhs)} rhs={_fmt_num(worst.rhs)} "
                  f"witness={worst.witness}")
    failed = sum(1 for _, r in reports if not r.passed)
    if failed:
        print(f"{failed} of {len(reports)} checks failed")
    else:
        print(f"all {len(reports)} checks passed")


def _print_solve(start: tuple[Point, Point], report: SolveReport) -> None:
    sx, sy = start
    print(f"solve from ({_fmt_num(sx.value)}, {_fmt_num(sy.value)}):")
    print(f"  status: {report.status.value}")
    print(f"  iterations: {report.iterations_used}")
    if report.candidate is not None:
        cx, cy = report.candidate
        print(f"  candidate: x = {_fmt_num(cx.value)}, y = {_fmt_num(cy.value)}")
    if report.residuals:
        parts = ", ".join(
            f"{k} = {_fmt_num(report.residuals[k])}" for k in sorted(report.residuals)
        )
        print(f"  residuals: {parts}")
    if report.failure:
        parts = ", ".join(f"{k}={_fmt_num(v)}" for k, v in report.failure.items())
        print(f"  failure: {parts}")


def _run_solves(problem, starts, opts, want_trace: bool):
    """All starts, a multi-start verdict for strong problems, and one trace.

    The trace (when requested) is always the first start's run.
    """
    strong = not hasattr(problem, "self_map")
    iterate = iterate_strong_coupled if strong else iterate_coincidence
    trace = None
    if strong and len(starts) > 1:
        verdict, reports = multi_start_unique(problem, list(starts), opts)
        if want_trace:
            _, trace = iterate(problem, starts[0][0], starts[0][1], opts)
    else:
        verdict = None
        reports = []
        for sx, sy in starts:
            report, run_trace = iterate(problem, sx, sy, opts)
            reports.append(report)
            if trace is None:
                trace = run_trace
    return reports, verdict, trace


def _emit_json(payload: dict, dest: str) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if dest == "-":
        sys.stderr.write(text)
    else:
        Path(dest).write_text(text, encoding="utf-8")


def _report_payload(doc, checks, solve, exit_code, t0) -> dict:
    return {
        "tool_version": __version__,
        "problem_name": doc.name,
        "checks": checks,
        "solve": solve,
        "timing_ms": (time.perf_counter() - t0) * 1000.0,
        "exit_code": exit_code,
    }


def _resolve_starts(doc: ProblemDocument, args) -> tuple[tuple[Point, Point], ...]:
    raw = getattr(args, "start", None)
    if raw:
        return tuple((Point.real(x), Point.real(y)) for x, y in raw)
    if doc.starts:
        return doc.starts
    raise DocumentError(
        "no start points: pass --start x0 y0 or add solve.starts to the document"
    )


def cmd_check(doc: ProblemDocument, args, t0: float) -> int:
    problem = build_problem(doc)
    settings, _ = _apply_overrides(doc, args)
    print(f"problem: {doc.name} ({doc.problem_kind})")
    reports = run_checks(problem, settings)
    _print_checks(reports)
    exit_code = 0 if all(r.passed for _, r in reports) else 1
    if args.json_path:
        checks = [_check_to_json(slot, r) for slot, r in reports]
        _emit_json(_report_payload(doc, checks, None, exit_code, t0), args.json_path)
    return exit_code


def _solve_section(reports, verdict) -> dict:
    return {"runs": [r.to_dict() for r in reports], "verdict": verdict}


def cmd_solve(doc: ProblemDocument, args, t0: float) -> int:
    problem = build_problem(doc)
    _, opts = _apply_overrides(doc, args)
    starts = _resolve_starts(doc, args)
    print(f"problem: {doc.name} ({doc.problem_kind})")
    reports, verdict, trace = _run_solves(problem, starts, opts, bool(args.trace))
    for start, report in zip(starts, reports):
        _print_solve(start, report)
    if verdict is not None:
        print(f"multi-start verdict: {verdict}")
    if args.trace and trace is not None:
        Path(args.trace).write_text(render_trace_csv(trace), encoding="utf-8")
    exit_code = max(_STATUS_EXIT[r.status] for r in reports)
    if args.json_path:
        payload = _report_payload(
            doc, None, _solve_section(reports, verdict), exit_code, t0
        )
        _emit_json(payload, args.json_path)
    return exit_code


def _print_demo_facts(doc: ProblemDocument, reports) -> None:
    if doc.problem_kind == "coincidence":
        scc = next(r for slot, r in reports if slot == "self_map")
        det = scc.details
        if det.get("image_A_values") is not None:
            print(f"self-map image of A: {_fmt_set(det['image_A_values'])}")
        if det.get("image_B_values") is not None:
            print(f"self-map image of B: {_fmt_set(det['image_B_values'])}")
        if det.get("image_intersection_values") is not None:
            print(f"image intersection: {_fmt_set(det['image_intersection_values'])}")
    else:
        inter = subset_intersection(doc.subset_a, doc.subset_b)
        shown = _fmt_set(subset_values(inter)) if inter is not None else "{}"
        print(f"intersection of A and B: {shown}")


def cmd_demo(doc: ProblemDocument, args, t0: float) -> int:
    problem = build_problem(doc)
    settings, opts = _apply_overrides(doc, args)
    print(f"problem: {doc.name} ({doc.problem_kind})")
    reports = run_checks(problem, settings)
    _print_checks(reports)
    checks_json = [_check_to_json(slot, r) for slot, r in reports]
    _print_demo_facts(doc, reports)
    if not all(r.passed for _, r in reports):
        if args.json_path:
            _emit_json(_report_payload(doc, checks_json, None, 1, t0), args.json_path)
        return 1
    starts = _resolve_starts(doc, args)
    runs, verdict, trace = _run_solves(problem, starts, opts, bool(args.trace))
    for start, report in zip(starts, runs):
        _print_solve(start, report)
    if verdict is not None:
        print(f"multi-start verdict: {verdict}")
    if args.trace and trace is not None:
        Path(args.trace).write_text(render_trace_csv(trace), encoding="utf-8")
    exit_code = max(_STATUS_EXIT[r.status] for r in runs)
    if args.json_path:
        payload = _report_payload(
            doc, checks_json, _solve_section(runs, verdict), exit_code, t0
        )
        _emit_json(payload, args.json_path)
    return exit_code


def _add_source_and_flags(sp, solver: bool) -> None:
    sp.add_argument("source", help="builtin problem name or path to a document")
    sp.add_argument("--tol", type=float, default=None, help="tolerance override")
    sp.add_argument("--samples", type=int, default=None, help="grid count override")
    sp.add_argument("--jitter", type=int, default=None, help="extra jittered samples")
    sp.add_argument("--seed", type=int, default=None, help="sampling seed override")
    sp.add_argument(
        "--json",
        dest="json_path",
        metavar="PATH",
        default=None,
        help="write the JSON report to PATH, or to stderr when '-'",
    )
    if solver:
        sp.add_argument("--max-iter", type=int, default=None, help="step limit override")
        sp.add_argument(
            "--trace",
            metavar="PATH",
            default=None,
            help="write the first run's iteration trace as CSV",
        )
        sp.add_argument(
            "--start",
            nargs=2,
            type=float,
            action="append",
            metavar=("X0", "Y0"),
            help="start pair; repeat for multiple starts",
        )
    else:
        sp.set_defaults(trace=None, start=None, max_iter=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="couplefix",
        description="Check and solve coupled fixed point problems.",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    _add_source_and_flags(
        sub.add_parser("check", help="run the sampled hypothesis checks"), solver=False
    )
    _add_source_and_flags(
        sub.add_parser("solve", help="run the iteration engine"), solver=True
    )
    _add_source_and_flags(
        sub.add_parser("demo", help="run checks, then solve from document starts"),
        solver=True,
    )
    sub.add_parser("list", help="list builtin problems")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        for name in registry_names():
            print(name)
        return 0
    t0 = time.perf_counter()
    try:
        doc = load_document(args.source)
        if args.command == "check":
            return cmd_check(doc, args, t0)
        if args.command == "solve":
            return cmd_solve(doc, args, t0)
        return cmd_demo(doc, args, t0)
    except CoupleFixError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
