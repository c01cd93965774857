"""Whole-program linking of several parsed modules by symbol name."""

from __future__ import annotations

from typing import Iterable

from ..errors import DuplicateSymbol
from .model import Module


def link_modules(modules: Iterable[Module]) -> Module:
    """Merge modules; a definition satisfies declarations made elsewhere.

    Two definitions of the same function or global raise DuplicateSymbol.
    """
    modules = list(modules)
    if len(modules) == 1:
        return modules[0]
    functions = {}
    globals_ = {}
    externs = {}
    decls = {}
    diagnostics: list[str] = []
    for m in modules:
        diagnostics.extend(m.diagnostics)
        for f in m.functions:
            if f.name in functions or f.name in globals_:
                raise DuplicateSymbol(f.name, source=f.source)
            functions[f.name] = f
        for g in m.globals:
            if g.external:
                externs.setdefault(g.name, g)
                continue
            if g.name in globals_ or g.name in functions:
                raise DuplicateSymbol(g.name)
            globals_[g.name] = g
        for d in m.declarations:
            decls.setdefault(d.name, d)
    for name, g in externs.items():
        globals_.setdefault(name, g)
    if set(globals_) & set(functions):
        raise DuplicateSymbol(sorted(set(globals_) & set(functions))[0])
    declarations = tuple(d for n, d in decls.items() if n not in functions)
    return Module(tuple(functions.values()), tuple(globals_.values()), declarations,
                  normalized=all(m.normalized for m in modules),
                  diagnostics=tuple(diagnostics))
