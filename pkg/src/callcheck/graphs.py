"""Control-flow graphs, the may-call graph and the inter-procedural CFG."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

from .errors import RootNotFound
from .ir.model import Function, Module, SourceLoc
from .pts.constraints import CallSite
from .pts.solver import CallEdge, Context, PointsToState, resolve_call_targets


@dataclass(frozen=True)
class CFG:
    function: str
    nodes: tuple[str, ...]
    edges: frozenset[tuple[str, str]]
    entry: str
    exits: frozenset[str]

    def successors(self, label: str) -> list[str]:
        return [b for a, b in sorted(self.edges) if a == label]


def build_cfg(f: Function) -> CFG:
    edges = set()
    for b in f.blocks:
        for t in b.successors:
            edges.add((b.label, t))
    exits = frozenset(b.label for b in f.blocks if b.returns)
    return CFG(f.name, tuple(b.label for b in f.blocks), frozenset(edges), f.entry, exits)


@dataclass(frozen=True)
class CallGraph:
    """May-call graph; ``edges`` keep their contexts, :meth:`erased` drops them."""

    nodes: frozenset[str]
    edges: frozenset[CallEdge]
    defined: frozenset[str] = frozenset()

    def erased(self) -> frozenset[tuple[str, str]]:
        return frozenset((e.caller, e.callee) for e in self.edges)

    def callees(self, caller: str) -> frozenset[str]:
        return frozenset(e.callee for e in self.edges if e.caller == caller)

    def site_targets(self) -> dict[CallSite, frozenset[str]]:
        out: dict[CallSite, set[str]] = defaultdict(set)
        for e in self.edges:
            out[e.site].add(e.callee)
        return {s: frozenset(t) for s, t in out.items()}

    def is_external(self, name: str) -> bool:
        return name not in self.defined


def build_callgraph(s: PointsToState) -> CallGraph:
    m = s.module
    nodes = m.defined_names | m.declared_names
    return CallGraph(frozenset(nodes), s.edges, m.defined_names)


def reachable_functions(g: CallGraph, root: str) -> frozenset[str]:
    if root not in g.nodes:
        raise RootNotFound(root)
    succ: dict[str, set[str]] = defaultdict(set)
    for a, b in g.erased():
        succ[a].add(b)
    seen = {root}
    stack = [root]
    while stack:
        for n in succ[stack.pop()]:
            if n not in seen:
                seen.add(n)
                stack.append(n)
    return frozenset(seen)


@dataclass(frozen=True)
class ICFG:
    """Per-function CFGs linked at call sites.

    ``call_bindings`` maps a site to ``(callee, entry label)`` pairs; external
    callees bind to the synthetic label ``EXTERNAL``. ``return_bindings``
    maps a site to the callee exit blocks that resume at the program point
    after the call. ``context_bindings`` keeps the context-qualified view.
    """

    module: Module
    cfgs: dict[str, CFG]
    call_bindings: dict[CallSite, frozenset[tuple[str, str]]]
    return_bindings: dict[CallSite, tuple[SourceLoc, frozenset[tuple[str, str]]]]
    context_bindings: dict[tuple[CallSite, Context], frozenset[tuple[str, Context | None]]]
    sites_by_loc: dict[SourceLoc, CallSite] = field(default_factory=dict)
    k: int = 0
    entry: str = "main"

    EXTERNAL = "<external>"

    def targets(self, site: CallSite) -> frozenset[str]:
        return frozenset(c for c, _ in self.call_bindings.get(site, ()))

    def is_defined(self, name: str) -> bool:
        return name in self.cfgs

    def contexts_of(self, function: str) -> list[Context]:
        ctxs = {cc for (s, _), tgts in self.context_bindings.items()
                for callee, cc in tgts if callee == function and cc is not None}
        if function == self.entry:
            ctxs.add(())
        return sorted(ctxs)


def build_icfg(m: Module, s: PointsToState, include_dead: bool = False) -> ICFG:
    """Link CFGs of live functions (all defined ones with ``include_dead``)."""
    live = {f for _, f in s.reached} | {s.entry}
    functions = [f for f in m.functions if include_dead or f.name in live]
    cfgs = {f.name: build_cfg(f) for f in functions}
    defined = m.defined_names
    sites_by_loc = {site.loc: site for site in s.constraints.call_sites}

    call_bindings: dict[CallSite, frozenset[tuple[str, str]]] = {}
    return_bindings = {}
    for site in sorted(s.constraints.call_sites, key=lambda x: x.loc):
        if site.caller not in cfgs:
            continue
        if site.indirect:
            targets = resolve_call_targets(s, site, None)
        else:
            targets = resolve_call_targets(s, site)
        pairs = frozenset((t, m.function(t).entry if t in defined else ICFG.EXTERNAL)
                          for t in targets)
        call_bindings[site] = pairs
        after = SourceLoc(site.loc.function, site.loc.block, site.loc.index + 1)
        exits = frozenset((t, x) for t in targets if t in defined
                          for x in sorted(build_cfg(m.function(t)).exits))
        return_bindings[site] = (after, exits)

    context_bindings: dict[tuple[CallSite, Context], set] = defaultdict(set)
    for e in s.edges:
        context_bindings[(e.site, e.context)].add((e.callee, e.callee_context))
    return ICFG(m, cfgs, call_bindings, return_bindings,
                {key: frozenset(v) for key, v in context_bindings.items()},
                sites_by_loc, s.k, s.entry)


# -- DOT export ------------------------------------------------------------------

def _q(s: str) -> str:
    return '"' + s.replace('"', r'\"') + '"'


def callgraph_to_dot(g: CallGraph) -> str:
    lines = ["digraph callgraph {"]
    for n in sorted(g.nodes):
        shape = "box" if n in g.defined else "ellipse"
        lines.append(f"  {_q(n)} [shape={shape}];")
    for a, b in sorted(g.erased()):
        lines.append(f"  {_q(a)} -> {_q(b)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def icfg_to_dot(icfg: ICFG) -> str:
    lines = ["digraph icfg {", "  compound=true;"]
    for name in sorted(icfg.cfgs):
        cfg = icfg.cfgs[name]
        lines.append(f"  subgraph {_q('cluster_' + name)} {{")
        lines.append(f"    label={_q(name)};")
        for b in cfg.nodes:
            lines.append(f"    {_q(name + ':' + b)} [label={_q(b)}];")
        for a, b in sorted(cfg.edges):
            lines.append(f"    {_q(name + ':' + a)} -> {_q(name + ':' + b)};")
        lines.append("  }")
    for site in sorted(icfg.call_bindings, key=lambda x: x.loc):
        src = f"{site.loc.function}:{site.loc.block}"
        for callee, label in sorted(icfg.call_bindings[site]):
            dst = f"{callee}:{label}" if label != ICFG.EXTERNAL else callee
            if label == ICFG.EXTERNAL:
                lines.append(f"  {_q(dst)} [shape=ellipse];")
            lines.append(f"  {_q(src)} -> {_q(dst)} [style=dashed, label={_q(site.id)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
