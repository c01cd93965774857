"""ICFG → event grammar.

Each function and block gets up to four nonterminals, one per way a path
through it can end:

``ret``   the path returns normally; events are kept,
``exit``  the path ends the process through a normal terminating call,
``eret``  like ``ret`` but with every event erased,
``fail``  the path ends the process through a failure exit; events erased.

A block derives its call-site symbols in order followed by a successor block
of the same variant (``ret``/``eret`` blocks ending in ``ret`` stop there).
The ``exit``/``fail`` variants may also stop at any call site that
terminates, with the sites before it in their returning form. Blocks are
chained per call site (``label#j`` is the rest of the block after j sites)
so the grammar stays linear in the number of calls. Calls after a
call that never returns have no returning form, so those productions are
unproductive and vanish during simplification.

Failure exits are ``abort``-like calls and terminating calls whose first
argument is a non-zero integer constant. Under the default ``"erase"``
policy a failed run contributes the empty projection; under ``"strict"``
failure exits are treated like any other terminating call.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from ..errors import EntryNotFound
from ..graphs import ICFG
from ..ir.model import ConstInt, Instruction, Ret
from ..pts.constraints import CallSite
from ..pts.solver import Context
from .cfg import NT, EventGrammar, Production, simplify_grammar

DEFAULT_TERMINATING = ("exit", "abort")
DEFAULT_FAILURE = ("abort",)
VARIANTS = ("ret", "exit", "eret", "fail")
START = NT("S")


@dataclass(frozen=True)
class ExitPolicy:
    """How process-terminating calls shape the path language."""

    terminating: frozenset[str] = frozenset(DEFAULT_TERMINATING)
    failure: frozenset[str] = frozenset(DEFAULT_FAILURE)
    mode: str = "erase"

    def __post_init__(self):
        if self.mode not in ("erase", "strict"):
            raise ValueError(f"unknown exit policy {self.mode!r}")

    def is_failure(self, name: str, inst: Instruction | None) -> bool:
        if self.mode == "strict" or name not in self.terminating:
            return False
        if name in self.failure:
            return True
        args = inst.args if inst is not None else ()
        return bool(args) and isinstance(args[0], ConstInt) and args[0].value != 0


class _Builder:
    def __init__(self, icfg: ICFG, alphabet: frozenset[str], policy: ExitPolicy,
                 context_sensitive: bool):
        self.icfg = icfg
        self.alphabet = alphabet
        self.policy = policy
        self.cs = context_sensitive
        self.prods: list[Production] = []
        self.sites: dict = {}
        for site in icfg.call_bindings:
            self.sites[site.loc] = site

    # naming ---------------------------------------------------------------

    @staticmethod
    def _ctx(ctx: Context | None) -> str:
        return "" if ctx is None else "@[" + ",".join(ctx) + "]"

    def fn_nt(self, v: str, fn: str, ctx) -> NT:
        return NT(f"{v}:{fn}{self._ctx(ctx)}")

    def block_nt(self, v: str, fn: str, label: str, ctx) -> NT:
        return NT(f"{v}:{fn}:{label}{self._ctx(ctx)}")

    def site_nt(self, v: str, site: CallSite, ctx) -> NT:
        return NT(f"{v}:call:{site.id}{self._ctx(ctx)}")

    # construction ---------------------------------------------------------

    def targets(self, site: CallSite, ctx) -> list[tuple[str, Context | None]]:
        if not self.cs:
            return [(t, None) for t in sorted(self.icfg.targets(site))]
        pairs = self.icfg.context_bindings.get((site, ctx), frozenset())
        return sorted(pairs, key=lambda p: (p[0], p[1] or ()))

    def site_bodies(self, v: str, site: CallSite, inst: Instruction | None, ctx
                    ) -> list[tuple]:
        bodies = []
        targets = self.targets(site, ctx)
        if not targets and v in ("ret", "eret"):
            return [()]       # unresolved indirect call: skipped
        for t, tctx in targets:
            ev = (t,) if t in self.alphabet and v in ("ret", "exit") else ()
            if self.icfg.is_defined(t):
                bodies.append(ev + (self.fn_nt(v, t, tctx if self.cs else None),))
                continue
            terminating = t in self.policy.terminating
            failure = self.policy.is_failure(t, inst)
            if v in ("ret", "eret"):
                if not terminating:
                    bodies.append(ev)
            elif v == "exit":
                if terminating and not failure:
                    bodies.append(ev)
            elif failure:
                bodies.append(())
        return bodies

    def relevant(self, site: CallSite, ctx) -> bool:
        """False for sites that only ever derive ε and always return."""
        for t, _ in self.targets(site, ctx):
            if (t in self.alphabet or self.icfg.is_defined(t)
                    or t in self.policy.terminating):
                return True
        return False

    def function(self, fn: str, ctx) -> list[tuple[str, Context]]:
        """Emit productions for ``fn`` in ``ctx``; return callee instances."""
        cfg = self.icfg.cfgs[fn]
        f = self.icfg.module.function(fn)
        callees = []
        for v in VARIANTS:
            self.prods.append(Production(self.fn_nt(v, fn, ctx),
                                         (self.block_nt(v, fn, cfg.entry, ctx),)))
        for b in f.blocks:
            sites = []
            for inst in b.instructions:
                if not inst.is_call:
                    continue
                site = self.sites.get(inst.loc)
                if site is None or not self.relevant(site, ctx):
                    continue
                sites.append((site, inst))
                for t, tctx in self.targets(site, ctx):
                    if self.icfg.is_defined(t):
                        callees.append((t, tctx))
                for v in VARIANTS:
                    head = self.site_nt(v, site, ctx)
                    for body in self.site_bodies(v, site, inst, ctx):
                        self.prods.append(Production(head, body, (inst.loc,)))
            succs = list(dict.fromkeys(b.terminator.targets))
            ends = isinstance(b.terminator, Ret)
            for v in VARIANTS:
                keep = "ret" if v in ("ret", "exit") else "eret"
                # pos[j] derives the rest of the block from its j-th call site on;
                # pos[-1] is the block end (successor or return)
                pos = [self.block_nt(v, fn, b.label, ctx)]
                pos += [self.block_nt(v, fn, f"{b.label}#{j}", ctx)
                        for j in range(1, len(sites) + 1)]
                for j, (site, _) in enumerate(sites):
                    self.prods.append(Production(pos[j], (self.site_nt(keep, site, ctx),
                                                          pos[j + 1])))
                    if v in ("exit", "fail"):
                        self.prods.append(Production(pos[j], (self.site_nt(v, site, ctx),)))
                if v in ("ret", "eret") and ends:
                    self.prods.append(Production(pos[-1], ()))
                for t in succs:
                    self.prods.append(Production(pos[-1], (self.block_nt(v, fn, t, ctx),)))
        return callees

    def build(self, entry: str) -> EventGrammar:
        root_ctx: Context | None = () if self.cs else None
        todo = [(entry, root_ctx)]
        done = set()
        while todo:
            fn, ctx = todo.pop()
            if (fn, ctx) in done:
                continue
            done.add((fn, ctx))
            for callee, cctx in self.function(fn, ctx):
                if callee in self.icfg.cfgs:
                    todo.append((callee, cctx if self.cs else None))
        for v in ("ret", "exit", "fail"):
            self.prods.append(Production(START, (self.fn_nt(v, entry, root_ctx),)))
        return EventGrammar.build(self.alphabet, self.prods, START)


def extract_grammar(icfg: ICFG, alphabet: Iterable[str], entry: str | None = None, *,
                    policy: ExitPolicy | None = None, context_sensitive: bool = False,
                    simplify: bool = True) -> EventGrammar:
    """Grammar whose language is the projection onto ``alphabet`` of every
    terminating, call/return-matched ICFG path from ``entry``.

    With ``context_sensitive`` (meaningful for k ≥ 1) each function is
    expanded once per solver context and indirect calls use the
    context-qualified target sets.
    """
    alphabet = frozenset(alphabet)
    if not alphabet:
        raise ValueError("alphabet must not be empty")
    entry = entry or icfg.entry
    if entry not in icfg.cfgs:
        raise EntryNotFound(entry)
    g = _Builder(icfg, alphabet, policy or ExitPolicy(), context_sensitive).build(entry)
    return simplify_grammar(g) if simplify else g
