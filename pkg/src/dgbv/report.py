"""Deterministic run reports in a text form and a json-lines form.

Both forms carry the same data: :func:`parse_text` and :func:`parse_jsonl`
recover identical record lists.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .algebra import format_rational
from .series import SuperSeries


def plain(x):
    """Reduce a value to JSON types with canonical rationals and series."""
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return format_rational(x)
    if isinstance(x, SuperSeries):
        return x.format()
    if isinstance(x, dict):
        return {str(k): plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [plain(v) for v in x]
    if hasattr(x, "as_dict"):
        return plain(x.as_dict())
    return str(x)


def _dump(x) -> str:
    return json.dumps(x, sort_keys=True, ensure_ascii=False, separators=(", ", ": "))


@dataclass
class Section:
    name: str
    passed: Optional[bool]
    data: dict = field(default_factory=dict)

    def record(self) -> dict:
        return {"type": "section", "name": self.name, "pass": self.passed, "data": plain(self.data)}


@dataclass
class RunReport:
    command: str
    header: dict = field(default_factory=dict)
    sections: list = field(default_factory=list)

    def add(self, name: str, passed: Optional[bool], /, **data) -> Section:
        s = Section(name, passed, data)
        self.sections.append(s)
        return s

    @property
    def passed(self) -> bool:
        return all(s.passed is not False for s in self.sections)

    def failed(self) -> list:
        return [s.name for s in self.sections if s.passed is False]

    def records(self) -> list:
        head = {"type": "header", "command": self.command}
        head.update(plain(self.header))
        out = [head]
        out += [s.record() for s in self.sections]
        out.append({"type": "summary", "pass": self.passed, "sections": len(self.sections),
                    "failed": self.failed()})
        return out

    def exit_code(self) -> int:
        return 0 if self.passed else 1


def _verdict(p) -> str:
    return "PASS" if p is True else "FAIL" if p is False else "INFO"


def to_jsonl(report: RunReport) -> str:
    return "".join(_dump(r) + "\n" for r in report.records())


def to_text(report: RunReport) -> str:
    recs = report.records()
    head = recs[0]
    lines = ["dgbv report", f"command: {head['command']}"]
    for k in sorted(k for k in head if k not in ("type", "command")):
        lines.append(f"{k}: {_dump(head[k])}")
    for r in recs[1:-1]:
        lines.append(f"== {r['name']}: {_verdict(r['pass'])}")
        for k in sorted(r["data"]):
            lines.append(f"  {k}: {_dump(r['data'][k])}")
    s = recs[-1]
    lines.append(f"== summary: {_verdict(s['pass'])} ({s['sections']} sections, "
                 f"{len(s['failed'])} failed)")
    if s["failed"]:
        lines.append(f"  failed: {_dump(s['failed'])}")
    return "\n".join(lines) + "\n"


def emit_report(report: RunReport, fmt: str = "text") -> bytes:
    if fmt == "text":
        return to_text(report).encode("utf-8")
    if fmt in ("jsonl", "json"):
        return to_jsonl(report).encode("utf-8")
    raise ValueError(f"unknown report format {fmt!r}")


def parse_jsonl(text: str) -> list:
    return [json.loads(l) for l in text.splitlines() if l.strip()]


def parse_text(text: str) -> list:
    """Records from the text form (inverse of :func:`to_text`)."""
    lines = text.splitlines()
    if not lines or lines[0] != "dgbv report":
        raise ValueError("not a dgbv text report")
    head = {"type": "header", "command": lines[1].split(": ", 1)[1]}
    out = [head]
    cur = None
    verdict = {"PASS": True, "FAIL": False, "INFO": None}
    for l in lines[2:]:
        if l.startswith("== summary: "):
            rest = l[len("== summary: "):]
            v, _, counts = rest.partition(" (")
            n = int(counts.split(" ")[0])
            cur = {"type": "summary", "pass": verdict[v], "sections": n, "failed": []}
            out.append(cur)
        elif l.startswith("== "):
            name, _, v = l[3:].rpartition(": ")
            cur = {"type": "section", "name": name, "pass": verdict[v], "data": {}}
            out.append(cur)
        elif l.startswith("  "):
            k, _, v = l[2:].partition(": ")
            if cur["type"] == "summary":
                cur[k] = json.loads(v)
            else:
                cur["data"][k] = json.loads(v)
        else:
            k, _, v = l.partition(": ")
            head[k] = json.loads(v)
    return out
