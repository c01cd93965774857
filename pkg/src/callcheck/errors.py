"""Exception hierarchy shared by every analysis phase."""

from __future__ import annotations


class AnalysisError(Exception):
    """Base class for all errors raised by callcheck."""


class ParseError(AnalysisError):
    """Malformed input text.

    ``line`` and ``column`` are 1-based; ``expected`` describes the token the
    parser was looking for when it gave up.
    """

    def __init__(self, message: str, line: int = 0, column: int = 0,
                 expected: str | None = None, source: str | None = None):
        self.line = line
        self.column = column
        self.expected = expected
        self.source = source
        where = f"{source or '<input>'}:{line}:{column}"
        detail = f" (expected {expected})" if expected else ""
        super().__init__(f"{where}: {message}{detail}")
        self.message = message


class DuplicateSymbol(ParseError):
    def __init__(self, name: str, line: int = 0, column: int = 0, source: str | None = None):
        super().__init__(f"duplicate symbol {name!r}", line, column, source=source)
        self.name = name


class EntryNotFound(AnalysisError):
    def __init__(self, name: str):
        super().__init__(f"entry function {name!r} is not defined")
        self.name = name


class BudgetExceeded(AnalysisError):
    def __init__(self, budget: int):
        super().__init__(f"propagation budget of {budget} steps exhausted")
        self.budget = budget


class UnknownVariable(AnalysisError, KeyError):
    def __init__(self, var):
        super().__init__(f"unknown variable {var}")
        self.var = var

    def __str__(self) -> str:
        return self.args[0]


class RootNotFound(AnalysisError, KeyError):
    def __init__(self, name: str):
        super().__init__(f"root {name!r} is not a call-graph node")
        self.name = name

    def __str__(self) -> str:
        return self.args[0]


class RuleParseError(ParseError):
    """Malformed rule file."""


class UnknownProperty(RuleParseError):
    def __init__(self, name: str, line: int = 0, column: int = 0, source: str | None = None):
        super().__init__(f"unknown property {name!r}", line, column, source=source)
        self.name = name


class EmptyFunctionList(RuleParseError):
    def __init__(self, line: int = 0, column: int = 0, source: str | None = None):
        super().__init__("rule has an empty f[] list", line, column, source=source)


class OrderArityError(RuleParseError):
    def __init__(self, count: int, line: int = 0, column: int = 0, source: str | None = None):
        super().__init__(f"'order' needs at least 2 functions, got {count}", line, column,
                         source=source)
        self.count = count
