"""Composite reports: per-goal engine verdicts, combined verdicts, rendering."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

from ..verdict import ERROR, FALSIFIED, TIMEOUT, UNKNOWN, VALID, Verdict

SCHEMA_VERSION = 1

EXIT_VALID = 0
EXIT_FALSIFIED = 10
EXIT_UNKNOWN = 20
EXIT_USAGE = 2
EXIT_ERROR = 3


@dataclass(frozen=True)
class EngineEntry:
    engine: str
    verdict: Optional[Verdict] = None
    skipped: str = ""

    def to_dict(self, timing=True) -> dict:
        if self.verdict is None:
            return {"engine": self.engine, "skipped": self.skipped}
        return {"engine": self.engine, "verdict": self.verdict.to_dict(timing)}

    @classmethod
    def from_dict(cls, d) -> "EngineEntry":
        if "verdict" in d:
            return cls(d["engine"], Verdict.from_dict(d["verdict"]))
        return cls(d["engine"], None, d.get("skipped", ""))


@dataclass(frozen=True)
class GoalReport:
    name: str
    goal: str
    sample: Optional[int]
    entries: Tuple[EngineEntry, ...]
    combined: Verdict

    def to_dict(self, timing=True) -> dict:
        return {"name": self.name, "goal": self.goal, "sample": self.sample,
                "engines": [e.to_dict(timing) for e in self.entries],
                "combined": self.combined.to_dict(timing)}

    @classmethod
    def from_dict(cls, d) -> "GoalReport":
        return cls(d["name"], d["goal"], d.get("sample"),
                   tuple(EngineEntry.from_dict(e) for e in d["engines"]),
                   Verdict.from_dict(d["combined"]))


def exit_code(goals: Sequence[GoalReport]) -> int:
    tags = {g.combined.tag for g in goals}
    if ERROR in tags:
        return EXIT_ERROR
    if FALSIFIED in tags:
        return EXIT_FALSIFIED
    if UNKNOWN in tags or TIMEOUT in tags:
        return EXIT_UNKNOWN
    return EXIT_VALID


@dataclass(frozen=True)
class CompositeReport:
    goals: Tuple[GoalReport, ...]
    metadata: dict = field(default_factory=dict, compare=False)

    @property
    def exit_status(self) -> int:
        return exit_code(self.goals)

    def to_dict(self, timing=True) -> dict:
        return {"schema_version": SCHEMA_VERSION, "metadata": dict(self.metadata),
                "goals": [g.to_dict(timing) for g in self.goals], "exit_status": self.exit_status}

    @classmethod
    def from_dict(cls, d) -> "CompositeReport":
        if d.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported report schema {d.get('schema_version')!r}")
        return cls(tuple(GoalReport.from_dict(g) for g in d["goals"]), d.get("metadata", {}))

    def content(self) -> dict:
        """Everything except timing fields; equal across runs of the same configuration."""
        return self.to_dict(timing=False)


def _fmt_witness(w) -> str:
    return "(" + ", ".join(f"{v:.6g}" for v in w) + ")"


def _detail(v: Verdict) -> str:
    if v.tag == FALSIFIED:
        return "witness " + _fmt_witness(v.witness)
    return v.message


def render_text(r: CompositeReport) -> str:
    rows = [("goal", "engine", "verdict", "time", "detail")]
    for g in r.goals:
        for e in g.entries:
            if e.verdict is None:
                rows.append((g.name, e.engine, "skipped", "-", e.skipped))
            else:
                rows.append((g.name, e.engine, e.verdict.tag, f"{e.verdict.elapsed:.3f}s",
                             _detail(e.verdict)))
        rows.append((g.name, "combined", g.combined.tag, "", _detail(g.combined)))
    widths = [max(len(row[i]) for row in rows) for i in range(4)]
    lines = []
    meta = r.metadata
    if meta:
        lines.append(f"config {meta.get('config_hash', '-')}  seed {meta.get('seed', '-')}  "
                     f"engines {','.join(meta.get('engines', []))}")
    for row in rows:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row[:4], widths)) + "  " + row[4])
    counts = {}
    for g in r.goals:
        counts[g.combined.tag] = counts.get(g.combined.tag, 0) + 1
    summary = ", ".join(f"{counts[t]} {t}" for t in (VALID, FALSIFIED, UNKNOWN, TIMEOUT, ERROR)
                        if t in counts) or "no goals"
    lines.append(f"{len(r.goals)} goal(s): {summary}; exit {r.exit_status}")
    return "\n".join(line.rstrip() for line in lines) + "\n"


def render_report(r: CompositeReport, fmt: str = "text") -> str:
    if fmt == "json":
        return json.dumps(r.to_dict(), sort_keys=True, indent=2) + "\n"
    if fmt == "text":
        return render_text(r)
    raise ValueError(f"unknown report format {fmt!r}")


def render_agreement(table, fmt: str = "text") -> str:
    """Agreement table as aligned text, JSON, or CSV."""
    if fmt == "json":
        return json.dumps(table.to_dict(), sort_keys=True, indent=2) + "\n"
    pct = lambda p: "-" if p is None else f"{p:.1f}"
    rows = [(r.name, str(r.count), str(r.agree), pct(r.percentage)) for r in table.rows]
    rows.append(("overall", str(table.total), str(table.agree), pct(table.percentage)))
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("class", "count", "agree", "percentage"))
        w.writerows(rows)
        return buf.getvalue()
    if fmt != "text":
        raise ValueError(f"unknown table format {fmt!r}")
    rows.insert(0, ("class", "count", "agree", "same %"))
    widths = [max(len(r[i]) for r in rows) for i in range(4)]
    lines = [str(table.relation)]
    lines += ["  ".join(c.rjust(w) if i else c.ljust(w) for i, (c, w) in enumerate(zip(r, widths)))
              for r in rows]
    return "\n".join(lines) + "\n"
