"""End-to-end analysis: parse → constraints → solve → graphs → grammar → rules."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .errors import AnalysisError, BudgetExceeded, ParseError
from .grammar import DEFAULT_TERMINATING, EventGrammar, ExitPolicy, extract_grammar
from .graphs import CallGraph, ICFG, build_callgraph, build_icfg, callgraph_to_dot, icfg_to_dot
from .ir import link_modules, normalize_module, parse_module
from .pts import DEFAULT_BUDGET, generate_constraints, solve
from .rules import Rule, Violation, check_rule, parse_rules

log = logging.getLogger(__name__)

EXIT_PASS, EXIT_VIOLATION, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3
PHASES = ("parse", "constraints", "solve", "graphs", "grammar", "rules")


@dataclass(frozen=True)
class AnalysisConfig:
    ir_paths: tuple[str, ...]
    rules_path: str
    sensitivity: int = 0
    entry: str = "main"
    format: str = "json"
    witness_export: str | None = None
    dot_export: str | None = None
    grammar_export: str | None = None
    include_dead: bool = False
    terminating_externals: tuple[str, ...] = DEFAULT_TERMINATING
    exit_policy: str = "erase"
    context_expansion: bool = False
    budget: int = DEFAULT_BUDGET
    timings: bool = False

    def __post_init__(self):
        if not self.ir_paths:
            raise ValueError("at least one IR path is required")
        if self.sensitivity not in (0, 1, 2):
            raise ValueError(f"sensitivity must be 0, 1 or 2, got {self.sensitivity}")
        if self.format not in ("json", "text"):
            raise ValueError(f"unknown format {self.format!r}")

    def echo(self) -> dict:
        return {
            "ir_paths": list(self.ir_paths),
            "rules_path": self.rules_path,
            "sensitivity": self.sensitivity,
            "entry": self.entry,
            "include_dead": self.include_dead,
            "terminating_externals": list(self.terminating_externals),
            "exit_policy": self.exit_policy,
            "context_expansion": self.context_expansion,
            "budget": self.budget,
        }


@dataclass(frozen=True)
class RuleVerdict:
    rule: Rule
    violations: tuple[Violation, ...]

    @property
    def passed(self) -> bool:
        return not self.violations


@dataclass(frozen=True)
class Report:
    config: AnalysisConfig
    verdicts: tuple[RuleVerdict, ...]
    stats: dict
    diagnostics: tuple[str, ...] = ()
    sources: dict = field(default_factory=dict, compare=False)
    tool: str = "callcheck"
    version: str = __version__

    @property
    def violations(self) -> list[Violation]:
        return [v for verdict in self.verdicts for v in verdict.violations]

    @property
    def exit_code(self) -> int:
        return EXIT_VIOLATION if self.violations else EXIT_PASS


@dataclass
class RunResult:
    exit_code: int
    report: Report | None
    error: str | None = None


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def analyze(config: AnalysisConfig) -> tuple[Report, CallGraph, ICFG, dict[frozenset, EventGrammar]]:
    """Run every phase; raises on input errors or an exhausted budget."""
    times: dict[str, float] = {}

    def phase(name: str, t0: float) -> float:
        now = time.perf_counter()
        times[name] = now - t0
        return now

    t = time.perf_counter()
    modules = [parse_module(_read(p), source=p) for p in config.ir_paths]
    rules = parse_rules(_read(config.rules_path), source=config.rules_path)
    m = normalize_module(link_modules(modules))
    t = phase("parse", t)

    cs = generate_constraints(m)
    t = phase("constraints", t)

    state = solve(cs, m, k=config.sensitivity, entry=config.entry, budget=config.budget)
    t = phase("solve", t)

    cg = build_callgraph(state)
    icfg = build_icfg(m, state, include_dead=config.include_dead)
    t = phase("graphs", t)

    policy = ExitPolicy(frozenset(config.terminating_externals), mode=config.exit_policy)
    grammars: dict[frozenset, EventGrammar] = {}
    for r in rules:
        key = frozenset(r.functions)
        if key not in grammars:
            grammars[key] = extract_grammar(icfg, key, config.entry, policy=policy,
                                            context_sensitive=config.context_expansion)
    t = phase("grammar", t)

    verdicts = []
    for r in rules:
        found = check_rule(r, grammars[frozenset(r.functions)],
                           sensitivity=config.sensitivity, entry=config.entry)
        verdicts.append(RuleVerdict(r, tuple(found)))
    phase("rules", t)

    stats = {
        "phase_times": {p: (times[p] if config.timings else None) for p in PHASES},
        "constraint_count": len(cs),
        "pts_fact_count": state.stats.pts_fact_count,
        "callgraph_edge_count": len(cg.erased()),
        "grammar_production_count": sum(len(g.productions) for g in grammars.values()),
        "propagation_steps": state.stats.propagation_steps,
        "contexts": state.stats.contexts,
    }
    diags = tuple(m.diagnostics) + tuple(str(d) for d in state.diagnostics)
    sources = {f.name: f.source for f in m.functions}
    report = Report(config, tuple(verdicts), stats, diags, sources)
    return report, cg, icfg, grammars


def _write_exports(config: AnalysisConfig, report: Report, cg: CallGraph, icfg: ICFG,
                   grammars: dict[frozenset, EventGrammar]) -> None:
    from .report import export_witnesses

    if config.witness_export:
        export_witnesses(report, config.witness_export)
    if config.dot_export:
        out = Path(config.dot_export)
        out.mkdir(parents=True, exist_ok=True)
        (out / "callgraph.dot").write_text(callgraph_to_dot(cg), encoding="utf-8")
        (out / "icfg.dot").write_text(icfg_to_dot(icfg), encoding="utf-8")
    if config.grammar_export:
        out = Path(config.grammar_export)
        out.mkdir(parents=True, exist_ok=True)
        for i, key in enumerate(sorted(grammars, key=sorted), start=1):
            (out / f"grammar_{i}.txt").write_text(
                "# alphabet: " + " ".join(sorted(key)) + "\n" + grammars[key].dump(),
                encoding="utf-8")


def run(config: AnalysisConfig) -> RunResult:
    """Full pipeline with the exit-code contract applied."""
    try:
        report, cg, icfg, grammars = analyze(config)
        _write_exports(config, report, cg, icfg, grammars)
    except BudgetExceeded as e:
        log.debug("%s", e)
        return RunResult(EXIT_BUDGET, None, str(e))
    except (OSError, ParseError, AnalysisError, ValueError) as e:
        log.debug("%s", e)
        return RunResult(EXIT_INPUT, None, str(e))
    return RunResult(report.exit_code, report)
