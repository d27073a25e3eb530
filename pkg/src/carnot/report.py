"""Check reports and their text/JSON serializations."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional


@dataclass(frozen=True)
class CheckEntry:
    name: str
    passed: bool
    witness: Optional[str] = None


@dataclass
class CheckReport:
    entries: List[CheckEntry] = field(default_factory=list)
    note: Optional[str] = None

    def add(self, name: str, passed: bool, witness: Optional[str] = None) -> None:
        if not passed and witness is None:
            witness = "(no detail)"
        self.entries.append(CheckEntry(name, bool(passed), witness))

    def extend(self, other: "CheckReport", prefix: str = "") -> None:
        for e in other.entries:
            self.entries.append(CheckEntry(prefix + e.name, e.passed, e.witness))

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def __getitem__(self, name: str) -> CheckEntry:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    def names(self) -> List[str]:
        return [e.name for e in self.entries]

    def failures(self) -> List[CheckEntry]:
        return [e for e in self.entries if not e.passed]


def rational_text(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def _jsonable(value: Any) -> Any:
    if isinstance(value, Fraction):
        return rational_text(value)
    if isinstance(value, float):
        raise TypeError("floating point value in report")
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def emit_report(report: CheckReport, fmt: str = "text", meta: Optional[Dict[str, Any]] = None) -> bytes:
    """Serialize a report. Checks are ordered by name for stable output."""
    entries = sorted(report.entries, key=lambda e: e.name)
    meta = dict(meta or {})
    if fmt == "json":
        doc = _jsonable(meta)
        doc["checks"] = [{"name": e.name, "pass": e.passed, "witness": e.witness} for e in entries]
        return (json.dumps(doc, sort_keys=True, indent=None) + "\n").encode()
    if fmt != "text":
        raise ValueError(f"unknown output format {fmt!r}")
    lines = []
    data = meta.pop("data", None)
    for key in sorted(meta):
        lines.append(f"# {key}: {_jsonable(meta[key])}")
    if data:
        lines.extend(str(d) for d in (data if isinstance(data, list) else [data]))
    for e in entries:
        line = f"{'PASS' if e.passed else 'FAIL'} {e.name}"
        if e.witness is not None:
            line += f"  [{e.witness}]"
        lines.append(line)
    if report.note:
        lines.append(f"# note: {report.note}")
    return ("\n".join(lines) + "\n").encode()
