"""Report rendering (JSON / text) and witness export.

JSON schema (``schema_version`` 1)::

    {
      "schema_version": 1,
      "tool": {"name": str, "version": str},
      "config": {...},
      "rules": [{"rule_id", "properties", "functions", "verdict", "violation_count"}],
      "violations": [{"rule_id", "property", "missing": [str],
                      "sensitivity", "entry",
                      "witness": [{"event", "file", "function", "block", "index",
                                   "chain": [{"file", "function", "block", "index"}]}]}],
      "stats": {"phase_times": {phase: float | null}, "constraint_count",
                "pts_fact_count", "callgraph_edge_count",
                "grammar_production_count", "propagation_steps", "contexts"},
      "diagnostics": [str]
    }

``phase_times`` values are null unless timings were requested, which keeps
reports byte-identical across runs. The witness file holds one JSON object
per line, one line per violation, in report order.
"""

from __future__ import annotations

import json
from pathlib import Path

from .grammar import WitnessTrace
from .ir.model import SourceLoc
from .pipeline import Report

SCHEMA_VERSION = 1


def _loc(loc: SourceLoc, sources: dict) -> dict:
    return {"file": sources.get(loc.function), "function": loc.function,
            "block": loc.block, "index": loc.index}


def _witness(w: WitnessTrace, sources: dict) -> list[dict]:
    out = []
    for e in w.events:
        entry = {"event": e.event}
        entry.update(_loc(e.loc, sources) if e.loc else
                     {"file": None, "function": None, "block": None, "index": None})
        entry["chain"] = [_loc(c, sources) for c in e.chain]
        out.append(entry)
    return out


def report_dict(r: Report) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": r.tool, "version": r.version},
        "config": r.config.echo(),
        "rules": [{
            "rule_id": v.rule.id,
            "properties": list(v.rule.properties),
            "functions": list(v.rule.functions),
            "verdict": "pass" if v.passed else "violations",
            "violation_count": len(v.violations),
        } for v in r.verdicts],
        "violations": [{
            "rule_id": v.rule_id,
            "property": v.property,
            "missing": list(v.missing),
            "sensitivity": v.sensitivity,
            "entry": v.entry,
            "witness": _witness(v.witness, r.sources),
        } for v in r.violations],
        "stats": r.stats,
        "diagnostics": list(r.diagnostics),
    }


def render_text(r: Report) -> str:
    lines = []
    for v in r.verdicts:
        if v.passed:
            lines.append(f"PASS {v.rule.id} [{', '.join(v.rule.properties)}] "
                         f"f[]={', '.join(v.rule.functions)}")
        for x in v.violations:
            extra = f" missing={{{', '.join(x.missing)}}}" if x.missing else ""
            where = ", ".join(str(e.loc) for e in x.witness.events)
            lines.append(f"FAIL {x.rule_id} {x.property}{extra} witness={x.witness}"
                         + (f" at {where}" if where else ""))
    s = r.stats
    lines.append(f"stats: constraints={s['constraint_count']} pts_facts={s['pts_fact_count']} "
                 f"callgraph_edges={s['callgraph_edge_count']} "
                 f"grammar_productions={s['grammar_production_count']} "
                 f"propagation_steps={s['propagation_steps']}")
    times = s["phase_times"]
    if any(t is not None for t in times.values()):
        lines.append("times: " + " ".join(f"{p}={t:.4f}s" for p, t in times.items()))
    return "\n".join(lines) + "\n"


def render_report(r: Report, fmt: str = "json") -> bytes:
    if fmt == "json":
        return (json.dumps(report_dict(r), indent=2, sort_keys=False) + "\n").encode()
    if fmt == "text":
        return render_text(r).encode()
    raise ValueError(f"unknown format {fmt!r}")


def export_witnesses(r: Report, path: str | Path) -> None:
    """Write one JSON record per violation; an empty file when none."""
    lines = []
    for v in r.violations:
        lines.append(json.dumps({
            "rule_id": v.rule_id,
            "property": v.property,
            "missing": list(v.missing),
            "events": [e.event for e in v.witness.events],
            "provenance": [[_loc(c, r.sources) for c in e.chain] for e in v.witness.events],
        }, sort_keys=True))
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")
