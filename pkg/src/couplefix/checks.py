"""Sampled verification of the structural and contraction hypotheses.

Every checker here follows the same bargain: it scans a deterministic
finite sample, records each broken inequality as a reproducible witness,
and reports evidence rather than proof.  Verdicts are monotone in the
sample — enlarging a grid can only surface more violations, never erase
one — and each report carries enough detail (image values, stride, margin)
to re-derive its numbers independently.

The two contraction checkers walk quadruples (x, y, u, v) with x, v drawn
from the first subset and y, u from the second.  The quadruple count grows
with the fourth power of the grid, so a budget caps the work: when the full
product would exceed it, every axis is thinned by the same stride, which
keeps the subsample a deterministic subset of the full grid.
"""

from __future__ import annotations

import math
from typing import Any, Optional

from .controls import eval_control
from .metric import (
    REAL_EQ_TOL,
    Point,
    SamplePlan,
    SubsetSpec,
    Value,
    contains,
    sample_points,
)
from .problems import CoincidenceProblem, CouplingMap, SelfMap, StrongCoupledProblem
from .report import CheckReport, ReportBuilder

#: Default cap on contraction quadruples per check.
DEFAULT_QUADRUPLE_BUDGET = 1_000_000


def _separation(a: Value, b: Value) -> float:
    if isinstance(a, str) or isinstance(b, str):
        return 0.0 if a == b else 1.0
    return abs(a - b)


def _quadruple_stride(na: int, nb: int, budget: int) -> int:
    stride = 1
    while (
        math.ceil(na / stride) * math.ceil(nb / stride) ** 2 * math.ceil(na / stride)
        > budget
    ):
        stride += 1
    return stride


def check_coupling(
    f: CouplingMap,
    a: SubsetSpec,
    b: SubsetSpec,
    plan: SamplePlan,
    plan_b: Optional[SamplePlan] = None,
) -> CheckReport:
    """Sampled check that f maps A x B into B and B x A into A.

    One sample per (x, y) pair; a pair can contribute up to two membership
    violations, each carrying the offending arguments and the image value.
    """
    xs = sample_points(a, plan)
    ys = sample_points(b, plan_b or plan)
    rb = ReportBuilder("coupling", 0.0)
    for x in xs:
        for y in ys:
            clean = True
            img_b = f.evaluate(x, y)
            if not contains(b, img_b):
                rb.add_violation(("image_in_B", x.value, y.value, img_b.value), 1.0, 0.0)
                clean = False
            img_a = f.evaluate(y, x)
            if not contains(a, img_a):
                rb.add_violation(("image_in_A", y.value, x.value, img_a.value), 1.0, 0.0)
                clean = False
            if clean:
                rb.count_sample()
    rb.samples = len(xs) * len(ys)
    return rb.build({"pairs": len(xs) * len(ys)})


def _unique_sorted(values: list[Value], cap: int = 24) -> Optional[list[Value]]:
    if not values:
        return []
    if any(isinstance(v, str) for v in values):
        out: list[Value] = sorted({str(v) for v in values})
    else:
        out = []
        for v in sorted(values):
            if not out or v - out[-1] > 1e-9:
                out.append(v)
    return out if len(out) <= cap else None


def _closedness(
    t: SelfMap, subset: SubsetSpec, plan: SamplePlan, images: list[Value], tol: float
) -> str:
    """Closedness evidence for the image of a subset under t.

    Finite sets are closed outright.  For intervals, the image extrema are
    compared against a doubled grid: if refining the sample does not move
    the attained min and max, the extrema are treated as attained and the
    image as closed.  A moving extremum is reported as "inconclusive" —
    never as a failure, since no finite sample can refute closedness.
    """
    if subset.is_finite:
        return "closed"
    if any(isinstance(v, str) for v in images):
        return "inconclusive"
    refined = SamplePlan(2 * plan.grid_count - 1, plan.jitter_count, plan.seed)
    rimages = [t.evaluate(p).value for p in sample_points(subset, refined)]
    stable = (
        abs(min(rimages) - min(images)) <= tol
        and abs(max(rimages) - max(images)) <= tol
    )
    return "closed" if stable else "inconclusive"


def check_scc_map(
    t: SelfMap,
    a: SubsetSpec,
    b: SubsetSpec,
    plan: SamplePlan,
    tol: float = 1e-9,
    plan_b: Optional[SamplePlan] = None,
) -> CheckReport:
    """Sampled check that t maps each subset into itself, with image evidence.

    Details carry the (deduplicated, sorted) image values per subset when
    small enough to list, their pairwise intersection, and a closedness
    verdict per image that may be "inconclusive" without failing the check.
    """
    rb = ReportBuilder("scc_map", 0.0)
    details: dict[str, Any] = {}
    lists: dict[str, Optional[list[Value]]] = {}
    examined = 0
    for name, subset, pl in (("A", a, plan), ("B", b, plan_b or plan)):
        pts = sample_points(subset, pl)
        images: list[Value] = []
        for p in pts:
            ip = t.evaluate(p)
            images.append(ip.value)
            if contains(subset, ip):
                rb.count_sample()
            else:
                rb.add_violation((f"invariance_{name}", p.value, ip.value), 1.0, 0.0)
        examined += len(pts)
        lists[name] = _unique_sorted(images)
        details[f"image_{name}_values"] = lists[name]
        details[f"closedness_{name}"] = _closedness(t, subset, pl, images, tol)
    va, vb = lists["A"], lists["B"]
    if va is not None and vb is not None:
        eq_tol = max(tol, REAL_EQ_TOL)
        inter = [v for v in va if any(_separation(v, w) <= eq_tol for w in vb)]
        details["image_intersection_values"] = inter
        details["intersection_nonempty"] = bool(inter)
    else:
        details["image_intersection_values"] = None
        details["intersection_nonempty"] = None
    rb.samples = examined
    return rb.build(details)


def _contraction_tables(problem, plan, plan_b, budget):
    xs = sample_points(problem.subset_a, plan)
    ys = sample_points(problem.subset_b, plan_b or plan)
    total = len(xs) * len(ys) * len(ys) * len(xs)
    stride = _quadruple_stride(len(xs), len(ys), budget)
    if stride > 1:
        xs = xs[::stride]
        ys = ys[::stride]
    f = problem.coupling
    f_ab = [[f.evaluate(p, q).value for q in ys] for p in xs]
    f_ba = [[f.evaluate(q, p).value for p in xs] for q in ys]
    xv = [p.value for p in xs]
    yv = [q.value for q in ys]
    return xv, yv, f_ab, f_ba, total, stride


def check_phi_T_contraction(
    problem: CoincidenceProblem,
    plan: SamplePlan,
    tol: float = 1e-9,
    plan_b: Optional[SamplePlan] = None,
    budget: int = DEFAULT_QUADRUPLE_BUDGET,
) -> CheckReport:
    """Sampled d(F(x,y), F(u,v)) <= phi(max(d(Tx,Tu), d(Ty,Tv))) over quadruples."""
    xv, yv, f_ab, f_ba, total, stride = _contraction_tables(problem, plan, plan_b, budget)
    d = problem.space.metric
    t = problem.self_map
    ta = [t.evaluate(Point(v)).value for v in xv]
    tb = [t.evaluate(Point(v)).value for v in yv]
    na, nb = len(xv), len(yv)
    dt = [[d(ta[i], tb[j]) for j in range(nb)] for i in range(na)]
    phi = problem.phi
    phi_at: dict[float, float] = {}
    rb = ReportBuilder("phi_T_contraction", tol)
    min_margin: Optional[float] = None
    evaluated = 0
    for i in range(na):
        fab_i = f_ab[i]
        dt_i = dt[i]
        for j in range(nb):
            fab = fab_i[j]
            dcol_j = [dt[i2][j] for i2 in range(na)]
            for j2 in range(nb):
                fba_row = f_ba[j2]
                d1 = dt_i[j2]
                for i2 in range(na):
                    lhs = d(fab, fba_row[i2])
                    d2 = dcol_j[i2]
                    m_val = d1 if d1 >= d2 else d2
                    rhs = phi_at.get(m_val)
                    if rhs is None:
                        rhs = eval_control(phi, m_val)
                        phi_at[m_val] = rhs
                    margin = rhs - lhs
                    if min_margin is None or margin < min_margin:
                        min_margin = margin
                    if lhs > rhs + tol:
                        rb.add_violation(
                            ("contraction", xv[i], yv[j], yv[j2], xv[i2]), lhs, rhs
                        )
                    evaluated += 1
    rb.samples = evaluated
    rb.min_margin = min_margin
    return rb.build({"total_quadruples": total, "stride": stride, "budget": budget})


def check_phi_psi_contraction(
    problem: StrongCoupledProblem,
    plan: SamplePlan,
    tol: float = 1e-9,
    plan_b: Optional[SamplePlan] = None,
    budget: int = DEFAULT_QUADRUPLE_BUDGET,
) -> CheckReport:
    """Sampled psi(d(F(x,y), F(u,v))) <= psi(M) - phi(M), M = max(d(x,u), d(y,v))."""
    xv, yv, f_ab, f_ba, total, stride = _contraction_tables(problem, plan, plan_b, budget)
    d = problem.space.metric
    na, nb = len(xv), len(yv)
    # dp[i][j] = d(x_i, u_j); by symmetry it also serves d(y_j, v_i).
    dp = [[d(xv[i], yv[j]) for j in range(nb)] for i in range(na)]
    phi, psi = problem.phi, problem.psi
    psi_at: dict[float, float] = {}
    rhs_at: dict[float, float] = {}
    rb = ReportBuilder("phi_psi_contraction", tol)
    min_margin: Optional[float] = None
    evaluated = 0
    for i in range(na):
        fab_i = f_ab[i]
        dp_i = dp[i]
        for j in range(nb):
            fab = fab_i[j]
            dcol_j = [dp[i2][j] for i2 in range(na)]
            for j2 in range(nb):
                fba_row = f_ba[j2]
                d1 = dp_i[j2]
                for i2 in range(na):
                    dist = d(fab, fba_row[i2])
                    lhs = psi_at.get(dist)
                    if lhs is None:
                        lhs = eval_control(psi, dist)
                        psi_at[dist] = lhs
                    d2 = dcol_j[i2]
                    m_val = d1 if d1 >= d2 else d2
                    rhs = rhs_at.get(m_val)
                    if rhs is None:
                        rhs = eval_control(psi, m_val) - eval_control(phi, m_val)
                        rhs_at[m_val] = rhs
                    margin = rhs - lhs
                    if min_margin is None or margin < min_margin:
                        min_margin = margin
                    if lhs > rhs + tol:
                        rb.add_violation(
                            ("contraction", xv[i], yv[j], yv[j2], xv[i2]), lhs, rhs
                        )
                    evaluated += 1
    rb.samples = evaluated
    rb.min_margin = min_margin
    return rb.build({"total_quadruples": total, "stride": stride, "budget": budget})


def check_range_compatibility(
    f: CouplingMap,
    t: SelfMap,
    a: SubsetSpec,
    b: SubsetSpec,
    plan: SamplePlan,
    tol: float = 1e-9,
    plan_b: Optional[SamplePlan] = None,
    targets_b: Optional[SubsetSpec] = None,
) -> CheckReport:
    """Sampled check that swapped coupling images land inside both t-ranges.

    For each sampled (y, x) the value F(y, x) must sit within ``tol`` of
    t(a) for some sampled a in A, and F(x, y) within ``tol`` of t(b) for
    some sampled b in B.  When a target itself belongs to the subset it is
    admitted as its own candidate, so the identity map passes whenever f is
    a genuine coupling.  ``targets_b`` restricts where the y argument is
    drawn from without shrinking the candidate pools.
    """
    a_pts = sample_points(a, plan)
    b_plan = plan_b or plan
    b_pts = sample_points(b, b_plan)
    tgt_pts = sample_points(targets_b, b_plan) if targets_b is not None else b_pts
    ta_vals = [t.evaluate(p).value for p in a_pts]
    tb_vals = [t.evaluate(q).value for q in b_pts]
    rb = ReportBuilder("range_compatibility", tol)

    def nearest(target_pt, pool_vals, subset) -> float:
        tv = target_pt.value
        best = min(_separation(v, tv) for v in pool_vals)
        if best > tol and contains(subset, target_pt):
            best = min(best, _separation(t.evaluate(target_pt).value, tv))
        return best

    for yq in tgt_pts:
        for xp in a_pts:
            tgt_a = f.evaluate(yq, xp)
            rb.observe(
                nearest(tgt_a, ta_vals, a), 0.0,
                ("target_in_T_A", yq.value, xp.value, tgt_a.value),
            )
            tgt_b = f.evaluate(xp, yq)
            rb.observe(
                nearest(tgt_b, tb_vals, b), 0.0,
                ("target_in_T_B", xp.value, yq.value, tgt_b.value),
            )
    return rb.build({"pairs": len(tgt_pts) * len(a_pts)})
