"""Iteration engines, per-run diagnostics, and the brute-force oracle.

Both engines drive the same alternating scheme: the next pair is built from
the coupling applied to the swapped current pair, and the run stops as soon
as the committed step distance

    D_n = max(d(first_n, y_n), d(second_n, x_n))

falls within tolerance, where ``first_n``/``second_n`` are the incoming
iterates (self-map preimages for coincidence runs, coupling values for
strong runs).  The pair distance R_n rides along as a second diagnostic.
Theory says both sequences shrink monotonically for admissible problems, so
an increase while the predecessor is still above tolerance is treated as a
hard error rather than noise: the run aborts with a diagnostic status
instead of pretending the orbit still converges.

Stopping with D_n <= tol certifies the *pair*; the report only claims full
convergence after re-evaluating the defining residuals at the candidate,
and downgrades to an early-coincidence status when any of them is loose.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional, Union

from .errors import BudgetError, DomainError, ParameterError
from .metric import (
    Point,
    SamplePlan,
    SubsetSpec,
    Value,
    contains,
    sample_points,
    subset_intersection,
)
from .problems import CoincidenceProblem, SelfMap, StrongCoupledProblem
from .report import CheckReport, ReportBuilder

#: Grid resolution for the fallback preimage search.
PREIMAGE_GRID_COUNT = 1001


class SolveStatus(Enum):
    CONVERGED = "Converged"
    EARLY_COINCIDENCE = "EarlyCoincidence"
    MAX_ITER_EXCEEDED = "MaxIterExceeded"
    PREIMAGE_FAILURE = "PreimageFailure"
    DIAGNOSTIC_VIOLATION = "DiagnosticViolation"


@dataclass(frozen=True)
class SolveOptions:
    tol: float = 1e-9
    max_iter: int = 10_000
    preimage_tol: float = 1e-9
    seed: int = 0

    def __post_init__(self):
        if not (self.tol > 0 and math.isfinite(self.tol)):
            raise ParameterError(f"tol must be a positive finite float, got {self.tol}")
        if self.max_iter < 1:
            raise ParameterError(f"max_iter must be at least 1, got {self.max_iter}")
        if not (self.preimage_tol > 0 and math.isfinite(self.preimage_tol)):
            raise ParameterError(
                f"preimage_tol must be a positive finite float, got {self.preimage_tol}"
            )


@dataclass(frozen=True)
class TraceStep:
    """One completed transition: the pair it started from and its step sizes."""

    n: int
    x: Value
    y: Value
    tx: Optional[Value]
    ty: Optional[Value]
    d: float
    r: float

    @property
    def residual(self) -> float:
        return self.d if self.d >= self.r else self.r


@dataclass
class IterationTrace:
    kind: str  # "coincidence" or "strong_coupled"
    steps: list[TraceStep] = field(default_factory=list)


@dataclass
class SolveReport:
    status: SolveStatus
    candidate: Optional[tuple[Point, Point]]
    residuals: dict[str, float]
    iterations_used: int
    failure: Optional[dict[str, Any]] = None

    def to_dict(self) -> dict[str, Any]:
        cand = None
        if self.candidate is not None:
            cand = {"x": self.candidate[0].value, "y": self.candidate[1].value}
        return {
            "status": self.status.value,
            "candidate": cand,
            "residuals": self.residuals,
            "iterations_used": self.iterations_used,
            "failure": self.failure,
        }


def grid_preimage(
    space,
    t: SelfMap,
    subset: SubsetSpec,
    target: Point,
    tol: float,
    grid_count: int = PREIMAGE_GRID_COUNT,
    seed: int = 0,
) -> tuple[Optional[Point], float]:
    """Nearest sampled preimage of ``target`` under ``t`` within a subset.

    Returns ``(point, distance)`` when the best sampled point maps within
    ``tol`` of the target, else ``(None, best_distance)``.  Ties keep the
    earliest sampled point, so results are reproducible for a fixed plan.
    """
    pts = sample_points(subset, SamplePlan(grid_count=grid_count, seed=seed))
    d = space.metric
    best: Optional[Point] = None
    best_dist = math.inf
    for p in pts:
        dist = d(t.evaluate(p).value, target.value)
        if dist < best_dist:
            best, best_dist = p, dist
    if best is not None and best_dist <= tol:
        return best, best_dist
    return None, best_dist


def _find_preimage(
    problem: CoincidenceProblem, target: Point, subset: SubsetSpec, opts: SolveOptions
) -> tuple[Optional[Point], float]:
    t = problem.self_map
    if t.has_preimage_oracle:
        got = t.preimage(target, subset, opts.preimage_tol)
        if got is not None:
            return got, problem.space.metric(t.evaluate(got).value, target.value)
    # No oracle, or the oracle declined: fall back to the grid so failures
    # still report how close the nearest sampled point came.
    return grid_preimage(
        problem.space, t, subset, target, opts.preimage_tol, seed=opts.seed
    )


def _require_member(subset: SubsetSpec, p: Point, label: str) -> None:
    if not contains(subset, p):
        raise DomainError(f"start {label}={p.value!r} is not in subset {label[-1].upper()}")


def _monotone_breach(
    prev_d: Optional[float], d_n: float, prev_r: Optional[float], r_n: float, tol: float
) -> Optional[str]:
    if prev_d is not None and prev_d > tol and d_n > prev_d + tol:
        return "D_increase"
    if prev_r is not None and prev_r > tol and r_n > prev_r + tol:
        return "R_increase"
    return None


def _coincidence_residuals(problem: CoincidenceProblem, a: Point, b: Point) -> dict[str, float]:
    d = problem.space.metric
    fab = problem.coupling.evaluate(a, b).value
    fba = problem.coupling.evaluate(b, a).value
    ta = problem.self_map.evaluate(a).value
    tb = problem.self_map.evaluate(b).value
    return {
        "f_ab_ta": d(fab, ta),
        "f_ba_tb": d(fba, tb),
        "ta_tb": d(ta, tb),
        "f_ab_f_ba": d(fab, fba),
    }


def _strong_residuals(problem: StrongCoupledProblem, a: Point, b: Point) -> dict[str, float]:
    d = problem.space.metric
    fxx = problem.coupling.evaluate(a, a).value
    return {"f_xx_x": d(fxx, a.value), "x_y": d(a.value, b.value)}


def iterate_coincidence(
    problem: CoincidenceProblem,
    x0: Point,
    y0: Point,
    opts: SolveOptions = SolveOptions(),
) -> tuple[SolveReport, IterationTrace]:
    """Alternating coincidence iteration driven by self-map preimages.

    Each step solves T(next_x) = F(y, x) and T(next_y) = F(x, y) inside the
    respective subsets.  A step whose targets admit no preimage ends the run
    with a failure payload naming the step, subset, target, and how close
    the nearest candidate came.
    """
    _require_member(problem.subset_a, x0, "x0")
    _require_member(problem.subset_b, y0, "y0")
    d = problem.space.metric
    f, t = problem.coupling, problem.self_map
    trace = IterationTrace("coincidence")
    x, y = x0, y0
    tx, ty = t.evaluate(x), t.evaluate(y)
    prev_d: Optional[float] = None
    prev_r: Optional[float] = None
    for n in range(opts.max_iter):
        tgt_x = f.evaluate(y, x)
        tgt_y = f.evaluate(x, y)
        for subset, label, tgt in (
            (problem.subset_a, "A", tgt_x),
            (problem.subset_b, "B", tgt_y),
        ):
            found, dist = _find_preimage(problem, tgt, subset, opts)
            if found is None:
                report = SolveReport(
                    SolveStatus.PREIMAGE_FAILURE,
                    (x, y),
                    _coincidence_residuals(problem, x, y),
                    len(trace.steps),
                    failure={
                        "reason": "preimage",
                        "step": n + 1,
                        "subset": label,
                        "target": tgt.value,
                        "min_distance": dist,
                    },
                )
                return report, trace
            if label == "A":
                x1 = found
            else:
                y1 = found
        tx1, ty1 = t.evaluate(x1), t.evaluate(y1)
        d_n = max(d(tx.value, ty1.value), d(ty.value, tx1.value))
        r_n = d(tx.value, ty.value)
        trace.steps.append(TraceStep(n, x.value, y.value, tx.value, ty.value, d_n, r_n))
        breach = _monotone_breach(prev_d, d_n, prev_r, r_n, opts.tol)
        if breach is not None:
            report = SolveReport(
                SolveStatus.DIAGNOSTIC_VIOLATION,
                (x, y),
                _coincidence_residuals(problem, x, y),
                len(trace.steps),
                failure={"reason": breach, "index": n},
            )
            return report, trace
        if d_n <= opts.tol:
            residuals = _coincidence_residuals(problem, x, y)
            status = (
                SolveStatus.CONVERGED
                if all(v <= opts.tol for v in residuals.values())
                else SolveStatus.EARLY_COINCIDENCE
            )
            return SolveReport(status, (x, y), residuals, len(trace.steps)), trace
        prev_d, prev_r = d_n, r_n
        x, y, tx, ty = x1, y1, tx1, ty1
    report = SolveReport(
        SolveStatus.MAX_ITER_EXCEEDED,
        (x, y),
        _coincidence_residuals(problem, x, y),
        opts.max_iter,
        failure={"reason": "max_iter"},
    )
    return report, trace


def iterate_strong_coupled(
    problem: StrongCoupledProblem,
    x0: Point,
    y0: Point,
    opts: SolveOptions = SolveOptions(),
) -> tuple[SolveReport, IterationTrace]:
    """Alternating coupling iteration: next_x = F(y, x), next_y = F(x, y).

    The orbit must stay inside its subsets; a step that escapes is reported
    as a diagnostic violation naming the subset and the escaped value.
    """
    _require_member(problem.subset_a, x0, "x0")
    _require_member(problem.subset_b, y0, "y0")
    d = problem.space.metric
    f = problem.coupling
    trace = IterationTrace("strong_coupled")
    x, y = x0, y0
    prev_d: Optional[float] = None
    prev_r: Optional[float] = None
    for n in range(opts.max_iter):
        x1 = f.evaluate(y, x)
        y1 = f.evaluate(x, y)
        d_n = max(d(x1.value, y.value), d(y1.value, x.value))
        r_n = d(x.value, y.value)
        trace.steps.append(TraceStep(n, x.value, y.value, None, None, d_n, r_n))
        escaped = None
        if not contains(problem.subset_a, x1):
            escaped = ("A", x1.value)
        elif not contains(problem.subset_b, y1):
            escaped = ("B", y1.value)
        if escaped is not None:
            report = SolveReport(
                SolveStatus.DIAGNOSTIC_VIOLATION,
                (x, y),
                _strong_residuals(problem, x, y),
                len(trace.steps),
                failure={
                    "reason": "orbit_left_subset",
                    "subset": escaped[0],
                    "step": n + 1,
                    "value": escaped[1],
                },
            )
            return report, trace
        breach = _monotone_breach(prev_d, d_n, prev_r, r_n, opts.tol)
        if breach is not None:
            report = SolveReport(
                SolveStatus.DIAGNOSTIC_VIOLATION,
                (x, y),
                _strong_residuals(problem, x, y),
                len(trace.steps),
                failure={"reason": breach, "index": n},
            )
            return report, trace
        if d_n <= opts.tol:
            residuals = _strong_residuals(problem, x, y)
            status = (
                SolveStatus.CONVERGED
                if all(v <= opts.tol for v in residuals.values())
                else SolveStatus.EARLY_COINCIDENCE
            )
            return SolveReport(status, (x, y), residuals, len(trace.steps)), trace
        prev_d, prev_r = d_n, r_n
        x, y = x1, y1
    report = SolveReport(
        SolveStatus.MAX_ITER_EXCEEDED,
        (x, y),
        _strong_residuals(problem, x, y),
        opts.max_iter,
        failure={"reason": "max_iter"},
    )
    return report, trace


def multi_start_unique(
    problem: StrongCoupledProblem,
    starts: list[tuple[Point, Point]],
    opts: SolveOptions = SolveOptions(),
) -> tuple[str, list[SolveReport]]:
    """Run every start and compare the converged candidates pairwise.

    The verdict is "consistent" when all converged candidates sit within
    10x tolerance of each other (vacuously so when nothing converged);
    failures keep their own reports without aborting the other starts.
    """
    reports = []
    for sx, sy in starts:
        report, _ = iterate_strong_coupled(problem, sx, sy, opts)
        reports.append(report)
    candidates = [
        r.candidate[0].value for r in reports if r.status is SolveStatus.CONVERGED
    ]
    d = problem.space.metric
    consistent = all(
        d(a, b) <= 10 * opts.tol
        for i, a in enumerate(candidates)
        for b in candidates[i + 1 :]
    )
    return ("consistent" if consistent else "inconsistent", reports)


def trace_diagnostics(trace: IterationTrace, tol: float = 1e-9) -> CheckReport:
    """Monotonicity audit of a recorded run.

    Each step's D and R may not exceed their predecessors by more than
    ``tol`` while the predecessor is still above tolerance; tiny wobble at
    the numerical floor is expected and ignored.  Details carry the first
    violating step index and the final (empirical-limit) values.
    """
    if not trace.steps:
        raise ParameterError("trace has no steps to diagnose")
    rb = ReportBuilder("trace_monotonicity", tol)
    first: Optional[int] = None
    prev = trace.steps[0]
    for step in trace.steps[1:]:
        if prev.d > tol:
            if rb.observe(step.d, prev.d, ("D", step.n)) and first is None:
                first = step.n
        else:
            rb.count_sample()
        if prev.r > tol:
            if rb.observe(step.r, prev.r, ("R", step.n)) and first is None:
                first = step.n
        else:
            rb.count_sample()
        prev = step
    last = trace.steps[-1]
    return rb.build(
        {"first_violation_index": first, "final_D": last.d, "final_R": last.r}
    )


SearchResult = Union[list[tuple[Point, Point]], list[Point]]


def brute_force_search(
    problem: Union[CoincidenceProblem, StrongCoupledProblem],
    plan: SamplePlan,
    tol: float = 1e-9,
    plan_b: Optional[SamplePlan] = None,
    budget: int = 1_000_000,
) -> SearchResult:
    """Independent scan for solutions, used as an oracle against the engines.

    Coincidence problems get every sampled (a, b) pair whose two defining
    residuals sit within ``tol``; strong problems scan the sampled
    intersection of the subsets for points with d(F(p, p), p) <= tol.
    Exceeding ``budget`` raises rather than silently truncating.
    """
    d = problem.space.metric
    f = problem.coupling
    if isinstance(problem, CoincidenceProblem):
        a_pts = sample_points(problem.subset_a, plan)
        b_pts = sample_points(problem.subset_b, plan_b or plan)
        if len(a_pts) * len(b_pts) > budget:
            raise BudgetError(
                f"{len(a_pts) * len(b_pts)} candidate pairs exceed budget {budget}"
            )
        t = problem.self_map
        ta = [t.evaluate(p).value for p in a_pts]
        tb = [t.evaluate(q).value for q in b_pts]
        out: list[tuple[Point, Point]] = []
        for i, a in enumerate(a_pts):
            for j, b in enumerate(b_pts):
                if (
                    d(f.evaluate(a, b).value, ta[i]) <= tol
                    and d(f.evaluate(b, a).value, tb[j]) <= tol
                ):
                    out.append((a, b))
        return out
    inter = subset_intersection(problem.subset_a, problem.subset_b)
    if inter is None:
        return []
    pts = sample_points(inter, plan)
    if len(pts) > budget:
        raise BudgetError(f"{len(pts)} candidate points exceed budget {budget}")
    return [p for p in pts if d(f.evaluate(p, p).value, p.value) <= tol]
