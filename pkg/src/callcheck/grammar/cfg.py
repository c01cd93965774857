"""Event grammars: representation, simplification and bounded enumeration.

Terminals are plain strings (event names); nonterminals are :class:`NT`.
Every production carries a provenance chain: a tuple of call locations that
prefixes the provenance of each event derived through it.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Union

from ..ir.model import SourceLoc


@dataclass(frozen=True, order=True)
class NT:
    name: str

    def __str__(self) -> str:
        return f"<{self.name}>"


Symbol = Union[str, NT]
Provenance = tuple[SourceLoc, ...]


def sym_key(s: Symbol) -> tuple[int, str]:
    return (1, s.name) if isinstance(s, NT) else (0, s)


@dataclass(frozen=True)
class Production:
    head: NT
    body: tuple[Symbol, ...]
    prov: Provenance = ()

    def key(self):
        return (self.head.name, tuple(sym_key(s) for s in self.body), self.prov)

    def __str__(self) -> str:
        rhs = " ".join(s if isinstance(s, str) else str(s) for s in self.body) or "ε"
        tag = f"  @ {' > '.join(map(str, self.prov))}" if self.prov else ""
        return f"{self.head} -> {rhs}{tag}"


@dataclass(frozen=True)
class EventGrammar:
    terminals: frozenset[str]
    nonterminals: frozenset[NT]
    productions: tuple[Production, ...]
    start: NT

    @classmethod
    def build(cls, terminals: Iterable[str], productions: Iterable[Production],
              start: NT) -> "EventGrammar":
        """Canonical constructor: dedupes, sorts and collects nonterminals."""
        best: dict[tuple, Production] = {}
        for p in productions:
            k = (p.head, p.body)
            if k not in best or p.prov < best[k].prov:
                best[k] = p
        prods = tuple(sorted(best.values(), key=Production.key))
        nts = {start}
        for p in prods:
            nts.add(p.head)
            nts.update(s for s in p.body if isinstance(s, NT))
        terms = frozenset(terminals) | {s for p in prods for s in p.body if isinstance(s, str)}
        return cls(frozenset(terms), frozenset(nts), prods, start)

    def by_head(self) -> dict[NT, list[Production]]:
        out: dict[NT, list[Production]] = defaultdict(list)
        for p in self.productions:
            out[p.head].append(p)
        return out

    @property
    def is_binarized(self) -> bool:
        return all(len(p.body) <= 2 for p in self.productions)

    def dump(self) -> str:
        """Plain-text production listing, start symbol first."""
        lines = [f"start {self.start}",
                 "terminals " + " ".join(sorted(self.terminals))]
        lines += [str(p) for p in self.productions]
        return "\n".join(lines) + "\n"


# -- useless symbols ---------------------------------------------------------------

def productive_nonterminals(g: EventGrammar) -> set[NT]:
    productive: set[NT] = set()
    users: dict[NT, list[Production]] = defaultdict(list)
    missing: dict[int, int] = {}
    queue: list[NT] = []
    for idx, p in enumerate(g.productions):
        nts = {s for s in p.body if isinstance(s, NT)}
        missing[idx] = len(nts)
        for s in nts:
            users[s].append((idx, p))
        if not nts and p.head not in productive:
            productive.add(p.head)
            queue.append(p.head)
    while queue:
        n = queue.pop()
        for idx, p in users[n]:
            missing[idx] -= 1
            if missing[idx] == 0 and p.head not in productive:
                productive.add(p.head)
                queue.append(p.head)
    return productive


def reachable_nonterminals(g: EventGrammar) -> set[NT]:
    heads = g.by_head()
    seen = {g.start}
    stack = [g.start]
    while stack:
        for p in heads.get(stack.pop(), ()):
            for s in p.body:
                if isinstance(s, NT) and s not in seen:
                    seen.add(s)
                    stack.append(s)
    return seen


def remove_useless(g: EventGrammar) -> EventGrammar:
    prod = productive_nonterminals(g)
    keep = [p for p in g.productions
            if p.head in prod and all(not isinstance(s, NT) or s in prod for s in p.body)]
    if len(keep) != len(g.productions):
        g = EventGrammar.build(g.terminals, keep, g.start)
    reach = reachable_nonterminals(g)
    live = [p for p in g.productions if p.head in reach]
    if len(live) == len(g.productions) and g.nonterminals <= reach:
        return g
    return EventGrammar.build(g.terminals, live, g.start)


def is_empty(g: EventGrammar) -> bool:
    return g.start not in productive_nonterminals(g)


# -- simplification ------------------------------------------------------------------

def _inline_epsilon_only(g: EventGrammar) -> tuple[EventGrammar, bool]:
    heads = g.by_head()
    eps_only = {h for h, ps in heads.items()
                if h != g.start and all(not p.body for p in ps)}
    if not eps_only:
        return g, False
    prods = [Production(p.head, tuple(s for s in p.body if s not in eps_only), p.prov)
             for p in g.productions if p.head not in eps_only]
    return EventGrammar.build(g.terminals, prods, g.start), True


def _collapse_units(g: EventGrammar) -> tuple[EventGrammar, bool]:
    heads = g.by_head()

    def is_unit(p: Production) -> bool:
        return len(p.body) == 1 and isinstance(p.body[0], NT)

    if not any(is_unit(p) for p in g.productions):
        return g, False
    out: list[Production] = []
    for a in sorted(heads):
        # shortest unit chain from a to each nonterminal, deterministic BFS
        chains: dict[NT, Provenance] = {a: ()}
        frontier = [a]
        while frontier:
            nxt = []
            for b in frontier:
                for p in heads.get(b, ()):
                    if is_unit(p):
                        c = p.body[0]
                        if c not in chains:
                            chains[c] = chains[b] + p.prov
                            nxt.append(c)
            frontier = nxt
        for b, chain in chains.items():
            for p in heads.get(b, ()):
                if not is_unit(p):
                    out.append(Production(a, p.body, chain + p.prov))
    return EventGrammar.build(g.terminals, out, g.start), True


def binarize(g: EventGrammar) -> EventGrammar:
    """Split bodies longer than two symbols into right-nested chains."""
    if g.is_binarized:
        return g
    taken = {n.name for n in g.nonterminals}
    counters: dict[str, int] = defaultdict(int)
    out: list[Production] = []
    for p in g.productions:
        if len(p.body) <= 2:
            out.append(p)
            continue
        head, body, prov = p.head, p.body, p.prov
        while len(body) > 2:
            while True:
                counters[p.head.name] += 1
                name = f"{p.head.name}/{counters[p.head.name]}"
                if name not in taken:
                    break
            taken.add(name)
            fresh = NT(name)
            out.append(Production(head, (body[0], fresh), prov))
            head, body, prov = fresh, body[1:], ()
        out.append(Production(head, body, prov))
    return EventGrammar.build(g.terminals, out, g.start)


def simplify_grammar(g: EventGrammar) -> EventGrammar:
    """Remove useless symbols, inline ε-only nonterminals, collapse unit
    chains and binarize. The language is unchanged."""
    g = remove_useless(g)
    changed = True
    while changed:
        g, c1 = _inline_epsilon_only(g)
        g, c2 = _collapse_units(g)
        changed = c1 or c2
        if changed:
            g = remove_useless(g)
    return remove_useless(binarize(g))


# -- bounded enumeration ----------------------------------------------------------------

def bounded_language(g: EventGrammar, max_len: int) -> set[tuple[str, ...]]:
    """All derivable terminal strings of length ≤ ``max_len``."""
    lang: dict[NT, set[tuple[str, ...]]] = defaultdict(set)
    heads = g.by_head()
    changed = True
    while changed:
        changed = False
        for h, ps in heads.items():
            cur = lang[h]
            before = len(cur)
            for p in ps:
                parts = [[(s,)] if isinstance(s, str) else lang[s] for s in p.body]
                if any(not part for part in parts):
                    continue
                for combo in _bounded_concat(parts, max_len):
                    cur.add(combo)
            if len(cur) != before:
                changed = True
    return set(lang[g.start])


def _bounded_concat(parts, max_len: int):
    if not parts:
        yield ()
        return
    results = [()]
    for part in parts:
        nxt = []
        for prefix in results:
            for s in part:
                if len(prefix) + len(s) <= max_len:
                    nxt.append(prefix + s)
        results = list(set(nxt))
        if not results:
            return
    yield from results


__all__ = [
    "EventGrammar", "NT", "Production", "Symbol", "binarize", "bounded_language",
    "is_empty", "productive_nonterminals", "reachable_nonterminals",
    "remove_useless", "simplify_grammar", "sym_key",
]
