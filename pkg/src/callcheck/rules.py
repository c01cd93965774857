"""Rule DSL, violation automata and rule checking.

A rule file holds any number of blocks of the form::

    rule { properties[] = ["converge", "order"],
           f[] = ["connect", "write_to_server", "close"]; }

Whitespace and newlines are insignificant and ``#`` starts a comment that
runs to the end of the line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable

from .errors import EmptyFunctionList, OrderArityError, RuleParseError, UnknownProperty
from .grammar import EventGrammar, ViolationDFA, WitnessTrace, intersect, shortest_witness

PROPERTIES = ("converge", "order")
MAX_PREFERENCE_ALPHABET = 10


@dataclass(frozen=True)
class Rule:
    id: str
    properties: tuple[str, ...]
    functions: tuple[str, ...]


@dataclass(frozen=True)
class Violation:
    rule_id: str
    property: str
    missing: tuple[str, ...]
    witness: WitnessTrace
    sensitivity: int = 0
    entry: str = "main"

    def sort_key(self):
        return (self.rule_id, self.property, self.missing, self.witness.word)


# -- parsing ---------------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\f\v]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<props>properties\s*\[\s*\])
  | (?P<funcs>f\s*\[\s*\])
  | (?P<word>[A-Za-z_][A-Za-z0-9_.$]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<punct>[{}\[\]=,;])
""", re.VERBOSE)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str, source: str | None) -> list[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise RuleParseError(f"unexpected character {text[pos]!r}", line,
                                 pos - line_start + 1, source=source)
        kind = m.lastgroup
        col = pos - line_start + 1
        if kind == "props":
            toks.append(_Tok("keyword", "properties[]", line, col))
        elif kind == "funcs":
            toks.append(_Tok("keyword", "f[]", line, col))
        elif kind == "string":
            toks.append(_Tok("string", m.group()[1:-1].encode().decode("unicode_escape"),
                             line, col))
        elif kind in ("word", "punct"):
            toks.append(_Tok(kind, m.group(), line, col))
        # newlines may also appear inside the keyword patterns
        nls = m.group().count("\n")
        if nls:
            line += nls
            line_start = m.start() + m.group().rindex("\n") + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _RuleParser:
    def __init__(self, text: str, source: str | None):
        self.source = source
        self.toks = _tokenize(text, source)
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def expect(self, text: str) -> _Tok:
        t = self.peek()
        if t.text != text or t.kind == "string":
            shown = "end of input" if t.kind == "eof" else repr(t.text)
            raise RuleParseError(f"unexpected {shown}", t.line, t.col,
                                 expected=repr(text), source=self.source)
        self.i += 1
        return t

    def string_list(self) -> list[_Tok]:
        self.expect("[")
        items = []
        if self.peek().text == "]" and self.peek().kind == "punct":
            self.i += 1
            return items
        while True:
            t = self.peek()
            if t.kind != "string":
                raise RuleParseError("unexpected " + (repr(t.text) or "end of input"),
                                     t.line, t.col, expected="string", source=self.source)
            self.i += 1
            items.append(t)
            if self.peek().text == ",":
                self.i += 1
                continue
            self.expect("]")
            return items

    def rule(self, index: int) -> Rule:
        start = self.expect("rule")
        self.expect("{")
        self.expect("properties[]")
        self.expect("=")
        prop_toks = self.string_list()
        self.expect(",")
        self.expect("f[]")
        self.expect("=")
        fn_open = self.peek()
        fn_toks = self.string_list()
        self.expect(";")
        self.expect("}")

        if not prop_toks:
            raise RuleParseError("rule has an empty properties[] list", start.line, start.col,
                                 source=self.source)
        props: list[str] = []
        for t in prop_toks:
            if t.text not in PROPERTIES:
                raise UnknownProperty(t.text, t.line, t.col, source=self.source)
            if t.text in props:
                raise RuleParseError(f"duplicate property {t.text!r}", t.line, t.col,
                                     source=self.source)
            props.append(t.text)
        if not fn_toks:
            raise EmptyFunctionList(fn_open.line, fn_open.col, source=self.source)
        funcs: list[str] = []
        for t in fn_toks:
            if not t.text:
                raise RuleParseError("empty function name", t.line, t.col, source=self.source)
            if t.text in funcs:
                raise RuleParseError(f"duplicate function {t.text!r}", t.line, t.col,
                                     source=self.source)
            funcs.append(t.text)
        if "order" in props and len(funcs) < 2:
            raise OrderArityError(len(funcs), fn_open.line, fn_open.col, source=self.source)
        return Rule(f"{self.source or '<rules>'}:{index}", tuple(props), tuple(funcs))

    def parse(self) -> list[Rule]:
        rules = []
        while self.peek().kind != "eof":
            rules.append(self.rule(len(rules) + 1))
        return rules


def parse_rules(text: str, source: str | None = None) -> list[Rule]:
    """Parse every ``rule { ... }`` block; ids are ``source:index`` (1-based)."""
    return _RuleParser(text, source).parse()


# -- automata --------------------------------------------------------------------

def converge_violation_dfa(functions: Iterable[str], missing: str) -> ViolationDFA:
    """Accepts projections that touch the rule but never ``missing``."""
    fs = tuple(functions)

    def delta(q, a):
        if q == "seen-missing" or a == missing:
            return "seen-missing"
        return "touched"

    return ViolationDFA.from_function(("untouched", "touched", "seen-missing"), fs, delta,
                                      "untouched", ["touched"])


def order_compliance_dfa(functions: Iterable[str]) -> ViolationDFA:
    """Accepts (f1·…·fn)*: zero or more complete, in-order rounds."""
    fs = tuple(functions)
    n = len(fs)

    def delta(q, a):
        if q == "dead" or a != fs[q]:
            return "dead"
        return (q + 1) % n

    return ViolationDFA.from_function(tuple(range(n)) + ("dead",), fs, delta, 0, [0])


def contains_all_dfa(functions: Iterable[str]) -> ViolationDFA:
    """Accepts strings containing every listed event at least once."""
    fs = tuple(functions)
    full = (1 << len(fs)) - 1
    index = {f: i for i, f in enumerate(fs)}
    return ViolationDFA.from_function(tuple(range(full + 1)), fs,
                                      lambda q, a: q | (1 << index[a]), 0, [full])


def compile_violation_automata(r: Rule) -> list[tuple[str, tuple[str, ...], ViolationDFA]]:
    """(property, missing events, violation DFA) triples in checking order."""
    out = []
    for prop in sorted(r.properties):
        if prop == "converge":
            for m in sorted(r.functions):
                out.append(("converge", (m,), converge_violation_dfa(r.functions, m)))
        else:
            out.append(("order", (), order_compliance_dfa(r.functions).complement()))
    return out


# -- checking ----------------------------------------------------------------------

def _witness(base: EventGrammar, prop: str, dfa: ViolationDFA,
             functions: tuple[str, ...]) -> WitnessTrace | None:
    if prop == "order" and len(functions) <= MAX_PREFERENCE_ALPHABET:
        # prefer a witness that exercises every rule function, so the
        # reported trace shows the misordering rather than a partial run
        preferred = shortest_witness(intersect(base, dfa.product(contains_all_dfa(functions)),
                                                 simplify=False))
        if preferred is not None:
            return preferred
    return shortest_witness(intersect(base, dfa, simplify=False))


def check_rule(r: Rule, base: EventGrammar, *, sensitivity: int = 0,
               entry: str = "main") -> list[Violation]:
    """Violations of ``r`` in ``base`` (extracted over exactly ``r.functions``),
    ordered by property and then by missing event."""
    out = []
    for prop, missing, dfa in compile_violation_automata(r):
        w = _witness(base, prop, dfa, r.functions)
        if w is not None:
            out.append(Violation(r.id, prop, missing, w, sensitivity, entry))
    return out
