"""Tokenizer for textual IR."""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import ParseError

_IDENT = r'[-a-zA-Z$._][-a-zA-Z$._0-9]*'
_QUOTED = r'"(?:[^"\\]|\\.)*"'

_TOKEN_RE = re.compile(
    rf"""
    (?P<ws>[ \t\r]+)
  | (?P<newline>\n)
  | (?P<comment>;[^\n]*)
  | (?P<label>(?:{_IDENT}|\d+|{_QUOTED}):)
  | (?P<local>%(?:{_IDENT}|\d+|{_QUOTED}))
  | (?P<global>@(?:{_IDENT}|\d+|{_QUOTED}))
  | (?P<attrref>\#\d+)
  | (?P<meta>!(?:{_IDENT}|\d+|{_QUOTED})?)
  | (?P<string>c?{_QUOTED})
  | (?P<float>-?\d+\.\d+(?:[eE][-+]?\d+)?|0x[KLMHR]?[0-9A-Fa-f]+)
  | (?P<int>-?\d+)
  | (?P<dots>\.\.\.)
  | (?P<word>[a-zA-Z_$.][-a-zA-Z$._0-9]*)
  | (?P<punct>[()\[\]{{}}<>,=*:|])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int
    start: int
    end: int

    @property
    def value(self) -> str:
        """Identifier without its sigil or trailing colon, unquoted."""
        t = self.text
        if self.kind in ("local", "global"):
            t = t[1:]
        elif self.kind == "label":
            t = t[:-1]
        if t.startswith('"') and t.endswith('"'):
            t = t[1:-1]
        return t


def tokenize(text: str, source: str | None = None) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    line = 1
    line_start = 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1,
                             source=source)
        kind = m.lastgroup
        if kind == "newline":
            tokens.append(Token("newline", "\n", line, pos - line_start + 1, pos, m.end()))
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), line, pos - line_start + 1, pos, m.end()))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1, pos, pos))
    return tokens
