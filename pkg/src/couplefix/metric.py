"""Metric spaces over a bounded real line or a finite label set.

Everything downstream (hypothesis checks, iteration engines, brute-force
search) works on finite samples drawn from subsets of a carrier, so this
module owns the three load-bearing pieces: membership semantics for subset
descriptions, deterministic sampling, and the metric-axiom spot check.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .errors import DomainError, ParameterError
from .report import CheckReport, ReportBuilder

#: Tolerance for treating two real values as the same point.
REAL_EQ_TOL = 1e-12

Value = float | str


@dataclass(frozen=True)
class Point:
    """A carrier element: a finite real number or a label."""

    value: Value

    @staticmethod
    def real(x: float) -> "Point":
        x = float(x)
        if not math.isfinite(x):
            raise DomainError(f"real point must be finite, got {x!r}")
        return Point(x)

    @staticmethod
    def label(name: str) -> "Point":
        return Point(str(name))

    @property
    def is_real(self) -> bool:
        return not isinstance(self.value, str)


@dataclass(frozen=True)
class RealLine:
    """A bounded segment of the real line with open or closed ends."""

    lo: float
    hi: float
    lo_closed: bool = True
    hi_closed: bool = True

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ParameterError("carrier bounds must be finite")
        if self.lo > self.hi or (self.lo == self.hi and not (self.lo_closed and self.hi_closed)):
            raise ParameterError(f"empty carrier: ({self.lo}, {self.hi})")


@dataclass(frozen=True)
class LabelSet:
    """A finite carrier of distinct labels."""

    labels: tuple[str, ...]

    def __post_init__(self):
        if not self.labels:
            raise ParameterError("label carrier must be nonempty")
        if len(set(self.labels)) != len(self.labels):
            raise ParameterError("labels must be distinct")


def _usual_real(a: float, b: float) -> float:
    return abs(a - b)


def _discrete(a: Value, b: Value) -> float:
    return 0.0 if a == b else 1.0


@dataclass(frozen=True)
class MetricSpace:
    """A carrier plus a distance function on raw carrier values."""

    carrier: RealLine | LabelSet
    metric: Callable[[Value, Value], float]

    @staticmethod
    def real_line(
        lo: float,
        hi: float,
        lo_closed: bool = True,
        hi_closed: bool = True,
        metric: Callable[[float, float], float] | None = None,
    ) -> "MetricSpace":
        return MetricSpace(RealLine(float(lo), float(hi), lo_closed, hi_closed), metric or _usual_real)

    @staticmethod
    def finite(
        labels: Sequence[str],
        table: dict[tuple[str, str], float] | None = None,
    ) -> "MetricSpace":
        carrier = LabelSet(tuple(labels))
        if table is None:
            return MetricSpace(carrier, _discrete)

        def from_table(a: Value, b: Value) -> float:
            if a == b:
                return 0.0
            try:
                return table[(a, b)]  # type: ignore[index]
            except KeyError:
                raise DomainError(f"distance table has no entry for ({a!r}, {b!r})") from None

        return MetricSpace(carrier, from_table)

    @property
    def is_real(self) -> bool:
        return isinstance(self.carrier, RealLine)


def carrier_contains(space: MetricSpace, p: Point) -> bool:
    c = space.carrier
    if isinstance(c, RealLine):
        if not p.is_real:
            return False
        v = p.value
        above = v > c.lo or (c.lo_closed and v == c.lo)
        below = v < c.hi or (c.hi_closed and v == c.hi)
        return above and below
    return (not p.is_real) and p.value in c.labels


def distance(space: MetricSpace, p: Point, q: Point) -> float:
    """Distance between two carrier points; domain error if either is outside."""
    for pt in (p, q):
        if not carrier_contains(space, pt):
            raise DomainError(f"point {pt.value!r} is outside the carrier")
    return float(space.metric(p.value, q.value))


# ---------------------------------------------------------------------------
# subsets


@dataclass(frozen=True)
class Interval:
    """One real interval with independently open or closed ends."""

    lo: float
    hi: float
    lo_closed: bool = True
    hi_closed: bool = True

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ParameterError("interval bounds must be finite")
        if self.lo > self.hi:
            raise ParameterError(f"interval has lo > hi: [{self.lo}, {self.hi}]")
        if self.lo == self.hi and not (self.lo_closed and self.hi_closed):
            raise ParameterError("degenerate interval must be closed on both ends")

    def contains_value(self, v: float) -> bool:
        above = v > self.lo or (self.lo_closed and v == self.lo)
        below = v < self.hi or (self.hi_closed and v == self.hi)
        return above and below


@dataclass(frozen=True)
class SubsetSpec:
    """A representable subset: finite point list or sorted disjoint intervals."""

    points: tuple[Point, ...] = ()
    intervals: tuple[Interval, ...] = ()

    def __post_init__(self):
        if bool(self.points) == bool(self.intervals):
            raise ParameterError("subset must have either points or intervals, and be nonempty")
        for left, right in zip(self.intervals, self.intervals[1:]):
            touching_ok = left.hi == right.lo and not (left.hi_closed and right.lo_closed)
            if not (left.hi < right.lo or touching_ok):
                raise ParameterError(
                    f"intervals must be sorted and pairwise disjoint: "
                    f"{(left.lo, left.hi)} then {(right.lo, right.hi)}"
                )

    @staticmethod
    def from_values(values: Iterable[Value]) -> "SubsetSpec":
        pts = tuple(Point.real(v) if not isinstance(v, str) else Point.label(v) for v in values)
        return SubsetSpec(points=pts)

    @staticmethod
    def from_intervals(intervals: Iterable[Interval]) -> "SubsetSpec":
        return SubsetSpec(intervals=tuple(intervals))

    @property
    def is_finite(self) -> bool:
        return bool(self.points)


def contains(subset: SubsetSpec, p: Point) -> bool:
    """Subset membership; finite real members match within ``REAL_EQ_TOL``."""
    if subset.is_finite:
        for member in subset.points:
            if member.is_real and p.is_real:
                if abs(member.value - p.value) <= REAL_EQ_TOL:
                    return True
            elif member.value == p.value:
                return True
        return False
    if not p.is_real:
        return False
    return any(iv.contains_value(p.value) for iv in subset.intervals)


def subset_within_carrier(space: MetricSpace, subset: SubsetSpec) -> bool:
    """Whether every subset point (or interval, end to end) lies in the carrier."""
    if subset.is_finite:
        return all(carrier_contains(space, p) for p in subset.points)
    c = space.carrier
    if not isinstance(c, RealLine):
        return False
    for iv in subset.intervals:
        lo_ok = iv.lo > c.lo or (iv.lo == c.lo and (c.lo_closed or not iv.lo_closed))
        hi_ok = iv.hi < c.hi or (iv.hi == c.hi and (c.hi_closed or not iv.hi_closed))
        if not (lo_ok and hi_ok):
            return False
    return True


def _overlap(a: Interval, b: Interval) -> Interval | None:
    if a.lo > b.lo or (a.lo == b.lo and b.lo_closed):
        lo, lo_closed = a.lo, a.lo_closed and b.contains_value(a.lo)
    else:
        lo, lo_closed = b.lo, b.lo_closed and a.contains_value(b.lo)
    if a.hi < b.hi or (a.hi == b.hi and b.hi_closed):
        hi, hi_closed = a.hi, a.hi_closed and b.contains_value(a.hi)
    else:
        hi, hi_closed = b.hi, b.hi_closed and a.contains_value(b.hi)
    if lo > hi or (lo == hi and not (lo_closed and hi_closed)):
        return None
    return Interval(lo, hi, lo_closed, hi_closed)


def subset_intersection(a: SubsetSpec, b: SubsetSpec) -> SubsetSpec | None:
    """Intersection of two subsets, or ``None`` when it is empty.

    A finite side wins: the result lists its members that ``b`` (resp. ``a``)
    contains, in declared order.  Two interval subsets intersect pairwise.
    """
    if a.is_finite:
        pts = [p for p in a.points if contains(b, p)]
        return SubsetSpec(points=tuple(pts)) if pts else None
    if b.is_finite:
        pts = [p for p in b.points if contains(a, p)]
        return SubsetSpec(points=tuple(pts)) if pts else None
    ivs = []
    for left in a.intervals:
        for right in b.intervals:
            got = _overlap(left, right)
            if got is not None:
                ivs.append(got)
    return SubsetSpec(intervals=tuple(ivs)) if ivs else None


def subset_values(subset: SubsetSpec) -> list[Value]:
    """Member values of a finite subset, or interval endpoints for display."""
    if subset.is_finite:
        return [p.value for p in subset.points]
    return [v for iv in subset.intervals for v in (iv.lo, iv.hi)]


# ---------------------------------------------------------------------------
# sampling


@dataclass(frozen=True)
class SamplePlan:
    """Deterministic sampling recipe: an even grid per interval plus
    optional seeded interior jitter points."""

    grid_count: int = 21
    jitter_count: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.grid_count < 1:
            raise ParameterError("grid_count must be positive")
        if self.jitter_count < 0:
            raise ParameterError("jitter_count must be nonnegative")


def _interval_grid(iv: Interval, grid_count: int) -> list[float]:
    if grid_count < 2:
        raise ParameterError("grid_count must be at least 2 for interval sampling")
    if iv.lo == iv.hi:
        return [iv.lo]
    step = (iv.hi - iv.lo) / (grid_count - 1)
    pts = [iv.lo + i * step for i in range(grid_count)]
    pts[-1] = iv.hi  # avoid accumulated round-off at the far end
    # open endpoints are shifted inward by half a grid step
    if not iv.lo_closed:
        pts[0] = iv.lo + step / 2.0
    if not iv.hi_closed:
        pts[-1] = iv.hi - step / 2.0
    out: list[float] = []
    for v in pts:
        if not out or v != out[-1]:
            out.append(v)
    return out


def _interval_jitter(iv: Interval, count: int, rng: random.Random) -> list[float]:
    if iv.lo == iv.hi:
        return []
    out = []
    for _ in range(count):
        v = iv.lo + rng.random() * (iv.hi - iv.lo)
        tries = 0
        while not (iv.lo < v < iv.hi) and tries < 64:
            v = iv.lo + rng.random() * (iv.hi - iv.lo)
            tries += 1
        if not (iv.lo < v < iv.hi):
            v = (iv.lo + iv.hi) / 2.0
        out.append(v)
    return out


def sample_points(subset: SubsetSpec, plan: SamplePlan) -> list[Point]:
    """Deterministic sample of a subset.

    Finite subsets return their members in declared order and ignore the
    plan.  Interval subsets get ``grid_count`` evenly spaced points per
    interval (closed endpoints included, open endpoints shifted inward by
    half a step) followed by ``jitter_count`` seeded interior points.
    """
    if subset.is_finite:
        return list(subset.points)
    rng = random.Random(plan.seed)
    values: list[float] = []
    for iv in subset.intervals:
        values.extend(_interval_grid(iv, plan.grid_count))
        values.extend(_interval_jitter(iv, plan.jitter_count, rng))
    return [Point(v) for v in values]


def _carrier_sample(space: MetricSpace, plan: SamplePlan) -> list[Value]:
    c = space.carrier
    if isinstance(c, LabelSet):
        return list(c.labels)
    iv = Interval(c.lo, c.hi, c.lo_closed, c.hi_closed)
    spec = SubsetSpec.from_intervals([iv])
    return [p.value for p in sample_points(spec, plan)]


def sampled_diameter(space: MetricSpace, subsets: Sequence[SubsetSpec], plan: SamplePlan) -> float:
    """Largest pairwise distance among sampled points of the given subsets."""
    vals: list[Value] = []
    for s in subsets:
        vals.extend(p.value for p in sample_points(s, plan))
    d = space.metric
    best = 0.0
    for i, a in enumerate(vals):
        for b in vals[i + 1:]:
            dist = d(a, b)
            if dist > best:
                best = dist
    return best


# ---------------------------------------------------------------------------
# axiom checking


def _separation(a: Value, b: Value) -> float:
    if isinstance(a, str) or isinstance(b, str):
        return 0.0 if a == b else 1.0
    return abs(a - b)


def check_metric_axioms(space: MetricSpace, plan: SamplePlan, tol: float = 1e-9) -> CheckReport:
    """Spot-check the metric axioms on a carrier sample.

    Violations are data, not errors; each one records the axiom name first
    in its witness tuple so it can be re-evaluated independently.  The
    worst margin over every comparison lands in ``max_margin``.
    """
    vals = _carrier_sample(space, plan)
    d = space.metric
    n = len(vals)
    dm = [[float(d(vals[i], vals[j])) for j in range(n)] for i in range(n)]
    rb = ReportBuilder("metric_axioms", tol)

    for i in range(n):
        if dm[i][i] > tol:
            rb.add_violation(("identity_self", vals[i]), dm[i][i], 0.0)
        else:
            rb.count_sample(-dm[i][i])
        for j in range(i + 1, n):
            rb.observe(-dm[i][j], 0.0, ("nonnegativity", vals[i], vals[j]))
            rb.observe(abs(dm[i][j] - dm[j][i]), 0.0, ("symmetry", vals[i], vals[j]))
            sep = _separation(vals[i], vals[j])
            if dm[i][j] <= tol and sep > max(REAL_EQ_TOL, dm[i][j] + tol):
                rb.add_violation(("identity_of_indiscernibles", vals[i], vals[j]), sep, dm[i][j])

    for i in range(n):
        row_i = dm[i]
        for j in range(n):
            lhs = row_i[j]
            for k in range(n):
                rb.observe(lhs, row_i[k] + dm[k][j], ("triangle", vals[i], vals[j], vals[k]))

    return rb.build()
