"""Residual reports: deterministic JSON-lines output and a plain-text summary."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

REPORT_KEYS = ("check", "point", "residual", "tolerance", "pass")


def format_number(v) -> str:
    """Shortest round-trip decimal; integral values print without a fraction."""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    v = float(v)
    if not math.isfinite(v):
        return "null"
    if v == 0.0:
        return "0"
    if v.is_integer() and abs(v) < 1e16:
        return str(int(v))
    text = repr(v)
    if "e" in text:
        mant, exp = text.split("e")
        text = f"{mant}e{int(exp)}"
    return text


def to_json(obj) -> str:
    """Compact JSON with :func:`format_number` for every number; dict order is kept."""
    if obj is None:
        return "null"
    if isinstance(obj, (bool, int, float)):
        return format_number(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        return "{" + ",".join(f"{json.dumps(str(k))}:{to_json(v)}" for k, v in obj.items()) + "}"
    if hasattr(obj, "tolist"):
        return to_json(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(to_json(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


@dataclass(frozen=True)
class ResidualReport:
    check: str
    point: tuple[float, float, float]
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        # NaN never passes
        return bool(self.residual <= self.tolerance)

    def as_dict(self) -> dict:
        return {
            "check": self.check,
            "point": list(self.point),
            "residual": self.residual,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }

    def to_jsonl(self) -> str:
        return to_json(self.as_dict())


@dataclass
class Summary:
    checks: dict[str, dict] = field(default_factory=dict)
    notes: dict[str, str] = field(default_factory=dict)
    kappa_hat: float | None = None
    skipped: dict[str, int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(c["count"] for c in self.checks.values())

    @property
    def failures(self) -> int:
        return sum(c["failed"] for c in self.checks.values())

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def as_dict(self) -> dict:
        return {
            "checks": self.checks,
            "kappa_hat": self.kappa_hat,
            "skipped": self.skipped,
            "notes": self.notes,
            "total": self.total,
            "failed": self.failures,
            "pass": self.passed,
        }


def summarize(reports: Iterable[ResidualReport], **extra) -> Summary:
    s = Summary(**extra)
    for r in reports:
        c = s.checks.setdefault(r.check, {"count": 0, "failed": 0, "max_residual": 0.0, "tolerance": r.tolerance})
        c["count"] += 1
        c["failed"] += 0 if r.passed else 1
        if not r.residual <= c["max_residual"]:
            c["max_residual"] = r.residual
    return s


def emit_jsonl(reports: Iterable[ResidualReport]) -> str:
    return "".join(r.to_jsonl() + "\n" for r in reports)


def emit_summary(summary: Summary) -> str:
    if not summary.checks:
        return "0 checks\n"
    rows = [("check", "points", "failed", "max residual", "tolerance")]
    for name, c in summary.checks.items():
        rows.append((name, str(c["count"]), str(c["failed"]), f"{c['max_residual']:.3e}", f"{c['tolerance']:.1e}"))
    widths = [max(len(r[i]) for r in rows) for i in range(5)]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows]
    for name, n in summary.skipped.items():
        lines.append(f"{name}: {n} point(s) skipped")
    if summary.kappa_hat is not None:
        lines.append(f"kappa_hat = {format_number(summary.kappa_hat)}")
    for name, note in summary.notes.items():
        lines.append(f"{name}: {note}")
    verdict = "PASS" if summary.passed else "FAIL"
    lines.append(f"{summary.total} checks, {summary.failures} failed: {verdict}")
    return "\n".join(lines) + "\n"


def emit_report(reports: Sequence[ResidualReport], fmt: str = "jsonl") -> str:
    if fmt == "jsonl":
        return emit_jsonl(reports)
    if fmt == "summary":
        return emit_summary(summarize(reports))
    raise ValueError(f"unknown report format {fmt!r}")
