"""Verification reports: named checks with residuals and a pass/warn/fail status."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Iterable

SCHEMA_VERSION = 1

# Residuals above the requested tolerance but below this floor are attributed
# to floating-point rounding and reported as "warn" rather than "fail".
ROUNDING_FLOOR = 1e-13


@dataclass(frozen=True)
class Check:
    name: str
    residual: float
    tolerance: float
    status: str
    params: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "params": _jsonable(self.params),
            "residual": _float(self.residual),
            "tolerance": _float(self.tolerance),
            "status": self.status,
        }


def classify(residual: float, tolerance: float) -> str:
    if residual <= tolerance:
        return "pass"
    if residual <= max(tolerance, ROUNDING_FLOOR):
        return "warn"
    return "fail"


class VerificationReport:
    """Ordered collection of checks.

    Checks keep insertion order; :meth:`merged` sorts by name so reports built
    from independent pieces serialize identically regardless of evaluation order.
    """

    def __init__(self, checks: Iterable[Check] = ()) -> None:
        self.checks: list[Check] = list(checks)

    def add(
        self,
        name: str,
        residual: float,
        tolerance: float = 0.0,
        status: str | None = None,
        **params: Any,
    ) -> Check:
        residual = float(residual)
        if status is None:
            status = classify(residual, tolerance)
        check = Check(name, residual, float(tolerance), status, dict(params))
        self.checks.append(check)
        return check

    def flag(self, name: str, ok: bool, **params: Any) -> Check:
        """Record a structural (exact, zero-tolerance) check."""
        return self.add(name, 0.0 if ok else 1.0, 0.0, "pass" if ok else "fail", **params)

    def extend(self, other: "VerificationReport") -> "VerificationReport":
        self.checks.extend(other.checks)
        return self

    @property
    def ok(self) -> bool:
        return all(c.status != "fail" for c in self.checks)

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if c.status == "fail"]

    @property
    def warnings(self) -> list[Check]:
        return [c for c in self.checks if c.status == "warn"]

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def __contains__(self, name: str) -> bool:
        return any(c.name == name for c in self.checks)

    def __iter__(self):
        return iter(self.checks)

    def __len__(self) -> int:
        return len(self.checks)

    def max_residual(self, prefix: str = "") -> float:
        values = [c.residual for c in self.checks if c.name.startswith(prefix)]
        return max(values) if values else 0.0

    def merged(self) -> "VerificationReport":
        return VerificationReport(sorted(self.checks, key=lambda c: c.name))

    def to_json(self, **meta: Any) -> str:
        payload = {"schema": SCHEMA_VERSION, **_jsonable(meta), "ok": self.ok, "checks": [c.to_dict() for c in self.checks]}
        return json.dumps(payload, indent=2, sort_keys=False) + "\n"

    def summary(self) -> str:
        lines = [f"{c.status.upper():4s}  {c.name}  residual={c.residual:.3e}  tol={c.tolerance:.1e}" for c in self.checks]
        return "\n".join(lines)

    def __repr__(self) -> str:
        return f"VerificationReport({len(self.checks)} checks, {len(self.failures)} failed)"


def _float(x: float) -> float | str:
    if math.isnan(x) or math.isinf(x):
        return str(x)
    return float(x)


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "tolist"):
        return obj.tolist()
    if isinstance(obj, float):
        return _float(obj)
    if isinstance(obj, (int, str, bool)) or obj is None:
        return obj
    return str(obj)
