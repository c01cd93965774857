"""Worklist solver for inclusion constraints with on-the-fly call-graph construction.

Functions are instantiated lazily: a function's constraints enter the system
the first time a call edge reaches it in some context. Indirect call sites
watch their callee variable, so every new function object that flows into it
adds an edge and, in turn, new constraints.
"""

from __future__ import annotations

import random
import time
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable

from ..errors import BudgetExceeded, EntryNotFound, UnknownVariable
from ..ir.model import Module
from .constraints import (
    AbstractObject,
    AllocSite,
    CallSite,
    ConstraintSet,
    FunctionObj,
    GlobalObj,
    LocalVar,
    MemVar,
    RetVar,
    SymbolVar,
    Var,
)

DEFAULT_BUDGET = 10_000_000

Context = tuple[str, ...]
Node = tuple[Context, Var]


def push_context(ctx: Context, site_id: str, k: int) -> Context:
    """Extend a call string and keep only its last ``k`` entries."""
    if k <= 0:
        return ()
    return (ctx + (site_id,))[-k:]


@dataclass(frozen=True)
class CallEdge:
    caller: str
    site: CallSite
    callee: str
    context: Context
    callee_context: Context | None

    @property
    def sort_key(self):
        return (self.site.loc, self.context, self.callee, self.callee_context or ())


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


@dataclass
class SolverStats:
    constraint_count: int = 0
    pts_fact_count: int = 0
    propagation_steps: int = 0
    contexts: int = 0
    wall_time: float = 0.0


@dataclass(frozen=True)
class PointsToState:
    """Solved points-to facts, call edges and per-site resolutions.

    Treat as read-only; the maps are not copied for callers.
    """

    module: Module
    constraints: ConstraintSet
    k: int
    entry: str
    pts: dict[Node, frozenset[AbstractObject]]
    edges: frozenset[CallEdge]
    resolved: dict[tuple[CallSite, Context], frozenset[str]]
    reached: frozenset[tuple[Context, str]]
    escaped: frozenset[str]
    diagnostics: tuple[Diagnostic, ...]
    stats: SolverStats

    def contexts_of(self, function: str) -> list[Context]:
        return sorted(c for c, f in self.reached if f == function)

    def erased(self, var: Var) -> frozenset[AbstractObject]:
        """Union of ``var``'s points-to sets over every context."""
        _check_var(self, var)
        out: set[AbstractObject] = set()
        for ctx in _contexts_for(self, var):
            out |= self.pts.get((ctx, var), frozenset())
        return frozenset(out)

    def sites(self) -> list[CallSite]:
        return sorted(self.constraints.call_sites, key=lambda s: s.loc)


def _owner(var: Var) -> str | None:
    if isinstance(var, LocalVar):
        return var.function
    if isinstance(var, RetVar):
        return var.function
    return None


def _contexts_for(state: PointsToState, var: Var) -> list[Context]:
    fn = _owner(var)
    if fn is None:
        return [()]
    return state.contexts_of(fn)


def _check_var(state: PointsToState, var: Var) -> None:
    if var in state.constraints.variables:
        return
    if isinstance(var, MemVar):
        return
    raise UnknownVariable(var)


class _Solver:
    def __init__(self, cs: ConstraintSet, m: Module, k: int, entry: str, budget: int,
                 order):
        self.cs = cs
        self.m = m
        self.k = k
        self.entry = entry
        self.budget = budget
        if order in (None, "fifo", "lifo"):
            self.rng = None
            self.lifo = order == "lifo"
        else:
            self.rng = random.Random(order)
            self.lifo = False
        self.steps = 0

        self.pts: dict[Node, set[AbstractObject]] = defaultdict(set)
        self.pending: dict[Node, set[AbstractObject]] = {}
        self.queue: list[Node] = []
        self.qhead = 0
        self.succ: dict[Node, set[Node]] = defaultdict(set)
        self.load_dsts: dict[Node, set[Node]] = defaultdict(set)
        self.store_srcs: dict[Node, set[Node]] = defaultdict(set)
        self.call_watch: dict[Node, list[tuple[Context, CallSite]]] = defaultdict(list)
        self.escape_nodes: set[Node] = set()
        self.escaped: set[str] = set()

        self.reached: set[tuple[Context, str]] = set()
        self.edges: set[CallEdge] = set()
        self.resolved: dict[tuple[CallSite, Context], set[str]] = defaultdict(set)
        self.indirect_reached: set[tuple[Context, CallSite]] = set()
        self.diagnostics: dict[tuple[str, str], Diagnostic] = {}

        self.defined = {f.name: f for f in m.functions}
        self.by_function: dict[str | None, dict[str, list]] = defaultdict(
            lambda: defaultdict(list))
        self._index()

    # -- indexing ---------------------------------------------------------

    def _index(self) -> None:
        def owner2(a: Var, b: Var) -> str | None:
            return _owner(a) or _owner(b)

        for v, o in sorted(self.cs.address_of, key=_pair_key):
            self.by_function[_owner(v)]["addr"].append((v, o))
        for name in ("copy", "load", "store"):
            for d, s in sorted(getattr(self.cs, name), key=_pair_key):
                self.by_function[owner2(d, s)][name].append((d, s))
        for site in sorted(self.cs.call_sites, key=lambda s: s.loc):
            self.by_function[site.caller]["call"].append(site)

    def node(self, ctx: Context, var: Var) -> Node:
        return (ctx, var) if _owner(var) is not None else ((), var)

    def diag(self, code: str, key: str, message: str) -> None:
        self.diagnostics.setdefault((code, key), Diagnostic(code, message))

    # -- propagation primitives ---------------------------------------------

    def add_pts(self, n: Node, objs: Iterable[AbstractObject]) -> None:
        cur = self.pts[n]
        new = [o for o in objs if o not in cur]
        if not new:
            return
        cur.update(new)
        if n in self.pending:
            self.pending[n].update(new)
        else:
            self.pending[n] = set(new)
            self.queue.append(n)

    def add_edge(self, a: Node, b: Node) -> None:
        if a == b or b in self.succ[a]:
            return
        self.succ[a].add(b)
        src = self.pts.get(a)
        if src:
            self.count(len(src))
            self.add_pts(b, src)

    def count(self, n: int) -> None:
        self.steps += n
        if self.steps > self.budget:
            raise BudgetExceeded(self.budget)

    def pop(self) -> Node:
        if self.rng is not None:
            live = self.queue[self.qhead:]
            j = self.rng.randrange(len(live))
            live[0], live[j] = live[j], live[0]
            self.queue[self.qhead:] = live
        if self.lifo:
            return self.queue.pop()
        n = self.queue[self.qhead]
        self.qhead += 1
        if self.qhead > 4096 and self.qhead * 2 > len(self.queue):
            del self.queue[:self.qhead]
            self.qhead = 0
        return n

    def has_work(self) -> bool:
        return len(self.queue) > self.qhead

    def run(self) -> None:
        while self.has_work():
            n = self.pop()
            delta = self.pending.pop(n)
            self.count(len(delta))
            for s in list(self.succ.get(n, ())):
                self.add_pts(s, delta)
            loads = self.load_dsts.get(n)
            stores = self.store_srcs.get(n)
            for o in sorted(delta, key=_obj_key):
                mem = ((), MemVar(o))
                if loads:
                    for d in list(loads):
                        self.add_edge(mem, d)
                if stores:
                    for s in list(stores):
                        self.add_edge(s, mem)
            for ctx, site in list(self.call_watch.get(n, ())):
                for o in sorted(delta, key=_obj_key):
                    self.indirect_target(ctx, site, o)
            if n in self.escape_nodes:
                for o in delta:
                    self.escape_object(o)

    # -- escapes ----------------------------------------------------------------

    def add_escape(self, n: Node) -> None:
        if n in self.escape_nodes:
            return
        self.escape_nodes.add(n)
        for o in list(self.pts.get(n, ())):
            self.escape_object(o)

    def escape_object(self, o: AbstractObject) -> None:
        if isinstance(o, FunctionObj):
            self.escaped.add(o.name)
        self.add_escape(((), MemVar(o)))

    # -- reachability and calls -------------------------------------------------

    def reach(self, ctx: Context, fn: str) -> None:
        if (ctx, fn) in self.reached:
            return
        self.reached.add((ctx, fn))
        cons = self.by_function.get(fn)
        if not cons:
            return
        self.instantiate(cons, ctx)

    def instantiate(self, cons, ctx: Context) -> None:
        for v, o in cons.get("addr", ()):
            self.add_pts(self.node(ctx, v), (o,))
        for d, s in cons.get("copy", ()):
            self.add_edge(self.node(ctx, s), self.node(ctx, d))
        for d, s in cons.get("load", ()):
            sn, dn = self.node(ctx, s), self.node(ctx, d)
            self.load_dsts[sn].add(dn)
            for o in sorted(self.pts.get(sn, ()), key=_obj_key):
                self.add_edge(((), MemVar(o)), dn)
        for d, s in cons.get("store", ()):
            dn, sn = self.node(ctx, d), self.node(ctx, s)
            self.store_srcs[dn].add(sn)
            for o in sorted(self.pts.get(dn, ()), key=_obj_key):
                self.add_edge(sn, ((), MemVar(o)))
        for site in cons.get("call", ()):
            if site.indirect:
                n = self.node(ctx, site.callee)
                self.indirect_reached.add((ctx, site))
                self.call_watch[n].append((ctx, site))
                for o in sorted(self.pts.get(n, ()), key=_obj_key):
                    self.indirect_target(ctx, site, o)
            else:
                self.bind(ctx, site, site.callee)

    def indirect_target(self, ctx: Context, site: CallSite, o: AbstractObject) -> None:
        if not isinstance(o, FunctionObj):
            self.diag("NonFunctionTarget", f"{site.id}|{o}",
                      f"indirect call at {site.id} may target non-function object {o}")
            return
        sig = self.m.signature_of(o.name)
        if sig is None or not sig.accepts(len(site.args)):
            self.diag("IncompatibleTarget", f"{site.id}|{o.name}",
                      f"indirect call at {site.id} with {len(site.args)} argument(s) "
                      f"cannot target @{o.name}")
            return
        self.bind(ctx, site, o.name)

    def bind(self, ctx: Context, site: CallSite, target: str) -> None:
        if target in self.defined:
            callee_ctx: Context | None = push_context(ctx, site.id, self.k)
        else:
            callee_ctx = None
        edge = CallEdge(site.caller, site, target, ctx, callee_ctx)
        if edge in self.edges:
            return
        self.edges.add(edge)
        self.resolved[(site, ctx)].add(target)
        if callee_ctx is None:
            # external body: pointer arguments escape
            for a in site.args:
                if a is not None:
                    self.add_escape(self.node(ctx, a))
            return
        f = self.defined[target]
        self.reach(callee_ctx, target)
        for param, a in zip(f.params, site.args):
            if a is not None:
                self.add_edge(self.node(ctx, a), self.node(callee_ctx,
                                                           LocalVar(target, param.name)))
        if site.result is not None:
            self.add_edge(self.node(callee_ctx, RetVar(target)), self.node(ctx, site.result))

    def escape_fallback(self) -> bool:
        """Bind escaped functions to indirect sites that resolved to nothing."""
        changed = False
        for ctx, site in sorted(self.indirect_reached, key=lambda p: (p[1].loc, p[0])):
            if self.resolved.get((site, ctx)):
                continue
            for name in sorted(self.escaped):
                sig = self.m.signature_of(name)
                if sig is not None and sig.accepts(len(site.args)):
                    self.diag("EscapeFallback", f"{site.id}|{name}",
                              f"unresolved indirect call at {site.id} bound to escaped "
                              f"function @{name}")
                    self.bind(ctx, site, name)
                    changed = True
        return changed

    def solve(self) -> None:
        if self.by_function.get(None):
            self.instantiate(self.by_function[None], ())
        self.reach((), self.entry)
        self.run()
        while self.escape_fallback():
            self.run()
        for ctx, site in sorted(self.indirect_reached, key=lambda p: (p[1].loc, p[0])):
            if not self.resolved.get((site, ctx)):
                self.diag("UnresolvedCall", f"{site.id}|{ctx}",
                          f"indirect call at {site.id} has no resolved target")


def _obj_key(o: AbstractObject):
    return (type(o).__name__, str(o))


def _pair_key(p):
    return tuple((type(x).__name__, str(x)) for x in p)


def solve(cs: ConstraintSet, m: Module, k: int = 0, entry: str = "main",
          budget: int = DEFAULT_BUDGET, order=None) -> PointsToState:
    """Least fixpoint of ``cs`` reachable from ``entry`` under ``k``-call-site contexts.

    ``order`` selects the worklist discipline ("fifo", "lifo" or an integer
    seed for a random order); the result does not depend on it.
    """
    if k not in (0, 1, 2):
        raise ValueError(f"sensitivity must be 0, 1 or 2, got {k}")
    if entry not in m.defined_names:
        raise EntryNotFound(entry)
    start = time.perf_counter()
    s = _Solver(cs, m, k, entry, budget, order)
    s.solve()
    pts = {n: frozenset(v) for n, v in s.pts.items() if v}
    stats = SolverStats(
        constraint_count=len(cs),
        pts_fact_count=sum(len(v) for v in pts.values()),
        propagation_steps=s.steps,
        contexts=len(s.reached),
        wall_time=time.perf_counter() - start,
    )
    diags = tuple(d for _, d in sorted(s.diagnostics.items()))
    return PointsToState(
        module=m, constraints=cs, k=k, entry=entry, pts=pts,
        edges=frozenset(s.edges),
        resolved={key: frozenset(v) for key, v in s.resolved.items()},
        reached=frozenset(s.reached), escaped=frozenset(s.escaped),
        diagnostics=diags, stats=stats,
    )


def points_to(state: PointsToState, var: Var, ctx: Context = ()) -> frozenset[AbstractObject]:
    """Objects ``var`` may point to in context ``ctx`` (empty if never assigned)."""
    _check_var(state, var)
    key = (ctx, var) if _owner(var) is not None else ((), var)
    return state.pts.get(key, frozenset())


def resolve_call_targets(state: PointsToState, site: CallSite,
                         ctx: Context | None = ()) -> frozenset[str]:
    """Functions ``site`` may call in ``ctx``; ``ctx=None`` unions all contexts.

    Direct sites return their named callee. Indirect sites return the
    arity-compatible function objects of the callee variable (plus escaped
    functions when the escape fallback fired for the site).
    """
    if not site.indirect:
        return frozenset({site.callee})
    if ctx is None:
        out: set[str] = set()
        for (s, _c), targets in state.resolved.items():
            if s == site:
                out |= targets
        return frozenset(out)
    return state.resolved.get((site, ctx), frozenset())


__all__ = [
    "AllocSite", "CallEdge", "Context", "Diagnostic", "FunctionObj", "GlobalObj",
    "PointsToState", "SolverStats", "SymbolVar", "points_to", "push_context",
    "resolve_call_targets", "solve",
]
