"""Violation automata, grammar × DFA products and shortest witnesses."""

from __future__ import annotations

import heapq
from collections import defaultdict
from dataclasses import dataclass
from typing import Hashable, Iterable, Mapping, Sequence

from ..ir.model import SourceLoc
from .cfg import NT, EventGrammar, Production, Provenance, binarize, simplify_grammar

State = Hashable


@dataclass(frozen=True)
class ViolationDFA:
    """Total DFA; events outside ``alphabet`` leave the state unchanged."""

    states: tuple[State, ...]
    alphabet: tuple[str, ...]
    transitions: Mapping[tuple[State, str], State]
    start: State
    accepting: frozenset

    def __post_init__(self):
        for q in self.states:
            for a in self.alphabet:
                if (q, a) not in self.transitions:
                    raise ValueError(f"transition missing for ({q!r}, {a!r})")

    def step(self, q: State, a: str) -> State:
        return self.transitions.get((q, a), q)

    def run(self, word: Iterable[str]) -> State:
        q = self.start
        for a in word:
            q = self.step(q, a)
        return q

    def accepts(self, word: Iterable[str]) -> bool:
        return self.run(word) in self.accepting

    @classmethod
    def from_function(cls, states: Sequence[State], alphabet: Sequence[str], delta,
                      start: State, accepting: Iterable[State]) -> "ViolationDFA":
        trans = {(q, a): delta(q, a) for q in states for a in alphabet}
        return cls(tuple(states), tuple(alphabet), trans, start, frozenset(accepting))

    def complement(self) -> "ViolationDFA":
        return ViolationDFA(self.states, self.alphabet, self.transitions, self.start,
                            frozenset(q for q in self.states if q not in self.accepting))

    def product(self, other: "ViolationDFA") -> "ViolationDFA":
        """Intersection automaton (the alphabets must agree)."""
        if set(self.alphabet) != set(other.alphabet):
            raise ValueError("alphabets differ")
        states = [(p, q) for p in self.states for q in other.states]
        return ViolationDFA.from_function(
            states, self.alphabet,
            lambda s, a: (self.step(s[0], a), other.step(s[1], a)),
            (self.start, other.start),
            [(p, q) for p, q in states if p in self.accepting and q in other.accepting])


def _state_label(q: State) -> str:
    return repr(q)


def intersect(g: EventGrammar, a: ViolationDFA, simplify: bool = True) -> EventGrammar:
    """Product grammar with L = L(g) ∩ L(a); provenance is carried over.

    The raw product (``simplify=False``) is already free of useless symbols
    and is what witness search uses; simplification only tidies it.
    """
    g = binarize(g)
    heads = g.by_head()
    states = list(a.states)
    delta = {(q, t): a.step(q, t) for q in states for t in g.terminals | set(a.alphabet)}

    # reach[N] = {(p, q)}: some string of N drives the DFA from p to q
    reach: dict[NT, set[tuple]] = defaultdict(set)

    def pairs(sym) -> Iterable[tuple]:
        if isinstance(sym, NT):
            return reach[sym]
        return [(p, delta[(p, sym)]) for p in states]

    users: dict[NT, list[Production]] = defaultdict(list)
    for p in g.productions:
        for s in p.body:
            if isinstance(s, NT):
                users[s].append(p)

    def derive(p: Production) -> set[tuple]:
        if not p.body:
            return {(q, q) for q in states}
        if len(p.body) == 1:
            return set(pairs(p.body[0]))
        left = pairs(p.body[0])
        right_by_src: dict = defaultdict(list)
        for x, y in pairs(p.body[1]):
            right_by_src[x].append(y)
        return {(x, z) for x, y in left for z in right_by_src.get(y, ())}

    work = list(g.productions)
    while work:
        p = work.pop()
        new = derive(p) - reach[p.head]
        if new:
            reach[p.head] |= new
            work.extend(users[p.head])

    reach_from: dict[NT, dict[State, list[State]]] = {}
    for n, prs in reach.items():
        idx: dict[State, list[State]] = defaultdict(list)
        for x, y in sorted(prs, key=repr):
            idx[x].append(y)
        reach_from[n] = idx

    def pnt(p: State, n: NT, q: State) -> NT:
        return NT(f"[{_state_label(p)} {n.name} {_state_label(q)}]")

    # emit only product nonterminals reachable from the start; every emitted
    # (p, N, q) has (p, q) in reach[N], so the result has no useless symbols
    out: list[Production] = []
    start = NT(f"[{_state_label(a.start)} {g.start.name} *]")
    todo: list[tuple[State, NT, State]] = []
    for f in sorted(a.accepting, key=repr):
        if (a.start, f) in reach[g.start]:
            out.append(Production(start, (pnt(a.start, g.start, f),)))
            todo.append((a.start, g.start, f))
    done = set(todo)

    def use(x: State, s: NT, y: State) -> NT:
        if (x, s, y) not in done:
            done.add((x, s, y))
            todo.append((x, s, y))
        return pnt(x, s, y)

    while todo:
        p_, n, q_ = todo.pop()
        head = pnt(p_, n, q_)
        for prod in heads.get(n, ()):
            body = prod.body
            if not body:
                if p_ == q_:
                    out.append(Production(head, (), prod.prov))
            elif len(body) == 1:
                s = body[0]
                if isinstance(s, NT):
                    if (p_, q_) in reach[s]:
                        out.append(Production(head, (use(p_, s, q_),), prod.prov))
                elif delta[(p_, s)] == q_:
                    out.append(Production(head, (s,), prod.prov))
            else:
                s1, s2 = body
                mids = ([delta[(p_, s1)]] if not isinstance(s1, NT) else
                        reach_from[s1].get(p_, ()))
                for y in mids:
                    if isinstance(s2, NT):
                        if (y, q_) not in reach[s2]:
                            continue
                    elif delta[(y, s2)] != q_:
                        continue
                    b1 = use(p_, s1, y) if isinstance(s1, NT) else s1
                    b2 = use(y, s2, q_) if isinstance(s2, NT) else s2
                    out.append(Production(head, (b1, b2), prod.prov))
    product = EventGrammar.build(g.terminals, out, start)
    return simplify_grammar(product) if simplify else product


# -- witnesses ---------------------------------------------------------------------

@dataclass(frozen=True)
class WitnessEvent:
    event: str
    chain: tuple[SourceLoc, ...]

    @property
    def loc(self) -> SourceLoc | None:
        return self.chain[-1] if self.chain else None


@dataclass(frozen=True)
class WitnessTrace:
    events: tuple[WitnessEvent, ...]

    @property
    def word(self) -> tuple[str, ...]:
        return tuple(e.event for e in self.events)

    def __str__(self) -> str:
        return "·".join(self.word) or "ε"

    def __len__(self) -> int:
        return len(self.events)


_Best = tuple[int, tuple[str, ...], tuple[Provenance, ...]]


def _concat(parts: Sequence[_Best], prov: Provenance) -> _Best:
    words: tuple[str, ...] = ()
    chains: tuple[Provenance, ...] = ()
    for _, w, c in parts:
        words += w
        chains += c
    return (len(words), words, tuple(prov + c for c in chains))


def shortest_witness(g: EventGrammar) -> WitnessTrace | None:
    """Shortest derivable string (ties: event names, then provenance), or
    None when the language is empty.

    Knuth's generalization of Dijkstra's algorithm: the (length, word) part
    of the key never decreases under concatenation, so a nonterminal's key
    is final when it is popped.
    """
    users: dict[NT, list[int]] = defaultdict(list)
    pending: list[int] = []
    heap: list = []
    for i, p in enumerate(g.productions):
        nts = {s for s in p.body if isinstance(s, NT)}
        pending.append(len(nts))
        for n in nts:
            users[n].append(i)
    best: dict[NT, _Best] = {}

    def offer(i: int) -> None:
        p = g.productions[i]
        parts = [best[s] if isinstance(s, NT) else (1, (s,), ((),)) for s in p.body]
        heapq.heappush(heap, (_concat(parts, p.prov), p.head.name, p.head))

    for i, n in enumerate(pending):
        if n == 0:
            offer(i)
    while heap:
        key, _, head = heapq.heappop(heap)
        if head in best:
            continue
        best[head] = key
        if head == g.start:
            break
        for i in users[head]:
            pending[i] -= 1
            if pending[i] == 0:
                offer(i)
    if g.start not in best:
        return None
    _, words, chains = best[g.start]
    return WitnessTrace(tuple(WitnessEvent(w, c) for w, c in zip(words, chains)))
