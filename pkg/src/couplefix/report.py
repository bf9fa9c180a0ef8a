"""Check reports: the common result type for every sampled verification.

A checker samples a finite set of witnesses, evaluates one inequality per
witness, and reports every violation it saw.  ``verdict`` is ``"fail"``
exactly when the violation list is nonempty; everything else about the run
(worst margin, sample count, auxiliary observations) rides along as data so
callers can render or serialize it without re-running the check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

#: Hard cap on recorded violations; the totals stay exact even when the
#: list is truncated, and the worst offender is always retained.
MAX_RECORDED_VIOLATIONS = 100_000


@dataclass(frozen=True)
class Violation:
    """One failed inequality: ``lhs <= rhs + tol`` did not hold.

    ``witness`` is a tuple of plain values (floats, labels, tags) that lets
    the reader re-evaluate both sides independently.  ``residual`` is
    ``lhs - rhs``.
    """

    witness: tuple
    lhs: float
    rhs: float
    residual: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "witness": list(self.witness),
            "lhs": self.lhs,
            "rhs": self.rhs,
            "residual": self.residual,
        }


@dataclass
class CheckReport:
    """Outcome of one sampled hypothesis check."""

    property_name: str
    samples_tested: int
    violations: list[Violation]
    max_margin: float | None
    verdict: str
    details: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict != "fail"

    def to_dict(self) -> dict[str, Any]:
        return {
            "property_name": self.property_name,
            "samples_tested": self.samples_tested,
            "violations": [v.to_dict() for v in self.violations],
            "violation_count": len(self.violations) + int(self.details.get("violations_dropped", 0)),
            "max_margin": self.max_margin,
            "verdict": self.verdict,
            "details": self.details,
        }


class ReportBuilder:
    """Accumulates violations and margins while a checker scans its samples.

    Keeps the running minimum of ``rhs - lhs`` over every sample (violating
    or not), truncates the stored violation list at
    ``MAX_RECORDED_VIOLATIONS`` without losing the count, and guarantees the
    worst violation survives truncation.
    """

    def __init__(self, property_name: str, tol: float):
        self.property_name = property_name
        self.tol = tol
        self.samples = 0
        self.min_margin: float | None = None
        self._violations: list[Violation] = []
        self._dropped = 0
        self._worst: Violation | None = None

    def observe(self, lhs: float, rhs: float, witness: tuple) -> bool:
        """Record one inequality evaluation; return True if it violated."""
        self.samples += 1
        margin = rhs - lhs
        if self.min_margin is None or margin < self.min_margin:
            self.min_margin = margin
        if lhs > rhs + self.tol:
            self._record(Violation(witness, lhs, rhs, lhs - rhs))
            return True
        return False

    def add_violation(self, witness: tuple, lhs: float, rhs: float) -> None:
        """Record a violation found by a non-inequality test (e.g. membership)."""
        self.samples += 1
        self._record(Violation(witness, lhs, rhs, lhs - rhs))

    def count_sample(self, margin: float | None = None) -> None:
        """Record a passing sample that has no natural lhs/rhs pair."""
        self.samples += 1
        if margin is not None and (self.min_margin is None or margin < self.min_margin):
            self.min_margin = margin

    def _record(self, violation: Violation) -> None:
        if self._worst is None or violation.residual > self._worst.residual:
            self._worst = violation
        if len(self._violations) < MAX_RECORDED_VIOLATIONS:
            self._violations.append(violation)
        else:
            self._dropped += 1

    def build(self, details: dict[str, Any] | None = None) -> CheckReport:
        details = dict(details or {})
        if self._dropped:
            details["violations_dropped"] = self._dropped
            if self._worst is not None and self._worst not in self._violations:
                self._violations[-1] = self._worst
        verdict = "fail" if self._violations else "pass"
        return CheckReport(
            property_name=self.property_name,
            samples_tested=self.samples,
            violations=self._violations,
            max_margin=self.min_margin,
            verdict=verdict,
            details=details,
        )
