"""Problem bundles: coupling maps, self maps, and the two solvable shapes.

A coupling map takes one point from each subset; a self map sends each
subset into itself.  The two problem dataclasses validate, at construction
time, the structural facts every checker and solver relies on: subsets live
inside the carrier, and the control functions carry the declared class the
problem shape calls for.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from .controls import ControlClass, ControlFunction
from .errors import DomainError, ParameterError
from .expr import Expr, eval_expression, format_expression, free_variables
from .metric import (
    MetricSpace,
    Point,
    SubsetSpec,
    Value,
    contains,
    distance,
    subset_within_carrier,
)


def _as_point(value: Value) -> Point:
    return Point.label(value) if isinstance(value, str) else Point.real(float(value))


def _require_vars(ast: Expr, allowed: set[str], what: str) -> None:
    extra = free_variables(ast) - allowed
    if extra:
        names = ", ".join(sorted(extra))
        raise ParameterError(f"{what} may only use {sorted(allowed)}; found: {names}")


@dataclass(frozen=True)
class CouplingMap:
    """A two-argument map evaluated on (first-subset, second-subset) points."""

    fn: Callable[[Point, Point], Point]
    source: Optional[str] = None

    def evaluate(self, p: Point, q: Point) -> Point:
        return self.fn(p, q)

    @staticmethod
    def from_expression(ast: Expr) -> "CouplingMap":
        _require_vars(ast, {"x", "y"}, "coupling expressions")

        def fn(p: Point, q: Point) -> Point:
            return Point.real(eval_expression(ast, {"x": p.value, "y": q.value}))

        return CouplingMap(fn, source=format_expression(ast))

    @staticmethod
    def from_function(f: Callable[[Value, Value], Value]) -> "CouplingMap":
        return CouplingMap(lambda p, q: _as_point(f(p.value, q.value)))


PreimageFn = Callable[[Point, SubsetSpec, float], Optional[Point]]


@dataclass(frozen=True)
class SelfMap:
    """A one-argument map, optionally with its own preimage oracle.

    ``preimage_fn(target, subset, tol)`` returns a subset point ``p`` with
    ``d(T(p), target) <= tol`` or ``None``.  Maps without an oracle fall back
    to the solver's grid search.
    """

    fn: Callable[[Point], Point]
    preimage_fn: Optional[PreimageFn] = None
    source: Optional[str] = None

    def evaluate(self, p: Point) -> Point:
        return self.fn(p)

    @property
    def has_preimage_oracle(self) -> bool:
        return self.preimage_fn is not None

    def preimage(self, target: Point, subset: SubsetSpec, tol: float) -> Optional[Point]:
        if self.preimage_fn is None:
            raise ParameterError("this self map has no preimage oracle")
        return self.preimage_fn(target, subset, tol)

    @staticmethod
    def identity() -> "SelfMap":
        def pre(target: Point, subset: SubsetSpec, tol: float) -> Optional[Point]:
            return target if contains(subset, target) else None

        return SelfMap(lambda p: p, preimage_fn=pre, source="identity")

    @staticmethod
    def from_expression(ast: Expr) -> "SelfMap":
        _require_vars(ast, {"x"}, "self-map expressions")

        def fn(p: Point) -> Point:
            return Point.real(eval_expression(ast, {"x": p.value}))

        return SelfMap(fn, source=format_expression(ast))

    @staticmethod
    def from_function(f: Callable[[Value], Value]) -> "SelfMap":
        return SelfMap(lambda p: _as_point(f(p.value)))

    def with_inverse(self, inverse_ast: Expr, space: MetricSpace) -> "SelfMap":
        """Attach an inverse expression as the preimage oracle.

        The candidate ``inverse(target)`` is trusted only after checking it
        lands in the subset and actually maps back within tolerance.
        """
        _require_vars(inverse_ast, {"x"}, "inverse expressions")

        def pre(target: Point, subset: SubsetSpec, tol: float) -> Optional[Point]:
            candidate = Point.real(eval_expression(inverse_ast, {"x": target.value}))
            if not contains(subset, candidate):
                return None
            if distance(space, self.evaluate(candidate), target) > tol:
                return None
            return candidate

        return SelfMap(self.fn, preimage_fn=pre, source=self.source)


def _require_inside(space: MetricSpace, subset: SubsetSpec, label: str) -> None:
    if not subset_within_carrier(space, subset):
        raise DomainError(f"subset {label} is not contained in the carrier")


def _require_class(f: ControlFunction, wanted: ControlClass, slot: str) -> None:
    if f.declared_class is not wanted:
        raise ParameterError(
            f"{slot} must be declared {wanted.value}; got {f.declared_class.value}"
        )


@dataclass(frozen=True)
class CoincidenceProblem:
    """Coupling plus self map, tied together by one comparison control."""

    space: MetricSpace
    subset_a: SubsetSpec
    subset_b: SubsetSpec
    coupling: CouplingMap
    self_map: SelfMap
    phi: ControlFunction

    def __post_init__(self):
        _require_inside(self.space, self.subset_a, "A")
        _require_inside(self.space, self.subset_b, "B")
        _require_class(self.phi, ControlClass.PHI, "phi")


@dataclass(frozen=True)
class StrongCoupledProblem:
    """Coupling alone, controlled by an altering pair (phi, psi)."""

    space: MetricSpace
    subset_a: SubsetSpec
    subset_b: SubsetSpec
    coupling: CouplingMap
    phi: ControlFunction
    psi: ControlFunction

    def __post_init__(self):
        _require_inside(self.space, self.subset_a, "A")
        _require_inside(self.space, self.subset_b, "B")
        _require_class(self.phi, ControlClass.ALTERING, "phi")
        _require_class(self.psi, ControlClass.ALTERING, "psi")
