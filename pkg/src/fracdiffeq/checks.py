"""Named numeric checks shared by the examples, the CLI and the self-test."""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Check:
    """A measured ``value`` compared against ``threshold`` with ``relation``.

    ``relation`` is one of ``"<="``, ``"<"``, ``"finite"`` or ``"true"``.
    """

    name: str
    value: float
    threshold: float | None = None
    relation: str = "<="

    @property
    def passed(self) -> bool:
        v = self.value
        if self.relation == "finite":
            return math.isfinite(v)
        if self.relation == "true":
            return bool(v)
        if not math.isfinite(v):
            return False
        if self.relation == "<=":
            return v <= self.threshold
        if self.relation == "<":
            return v < self.threshold
        raise ValueError(f"unknown relation {self.relation!r}")

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "value": float(self.value),
            "threshold": None if self.threshold is None else float(self.threshold),
            "relation": self.relation,
            "passed": self.passed,
        }

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        if self.relation in ("finite", "true"):
            return f"[{mark}] {self.name}: {self.value:.6g} ({self.relation})"
        return f"[{mark}] {self.name}: {self.value:.3e} {self.relation} {self.threshold:.1e}"


def all_passed(checks) -> bool:
    return all(c.passed for c in checks)
