"""Pointer variables, abstract objects and inclusion-constraint generation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from ..ir.model import (
    FunctionRef,
    Global,
    Local,
    Module,
    Ret,
    SourceLoc,
    ValueRef,
)
from ..ir.normalize import normalize_module


# -- pointer variables ----------------------------------------------------------

@dataclass(frozen=True, order=True)
class LocalVar:
    """A register or parameter of one function."""

    function: str
    name: str

    def __str__(self) -> str:
        return f"{self.function}:%{self.name}"


@dataclass(frozen=True, order=True)
class SymbolVar:
    """The address value ``@name`` of a global or function."""

    name: str

    def __str__(self) -> str:
        return f"@{self.name}"


@dataclass(frozen=True, order=True)
class RetVar:
    """The value returned by a function."""

    function: str

    def __str__(self) -> str:
        return f"{self.function}:<ret>"


@dataclass(frozen=True, order=True)
class MemVar:
    """The (field-collapsed) contents of an abstract object."""

    obj: "AbstractObject"

    def __str__(self) -> str:
        return f"*{self.obj}"


Var = Union[LocalVar, SymbolVar, RetVar, MemVar]


# -- abstract objects -----------------------------------------------------------

@dataclass(frozen=True, order=True)
class FunctionObj:
    name: str

    def __str__(self) -> str:
        return f"fn:{self.name}"


@dataclass(frozen=True, order=True)
class AllocSite:
    function: str
    block: str
    index: int

    def __str__(self) -> str:
        return f"alloca:{self.function}:{self.block}:{self.index}"


@dataclass(frozen=True, order=True)
class GlobalObj:
    name: str

    def __str__(self) -> str:
        return f"global:{self.name}"


AbstractObject = Union[FunctionObj, AllocSite, GlobalObj]


def sort_key(x) -> tuple[str, str]:
    return (type(x).__name__, str(x))


# -- call sites and constraint set --------------------------------------------

@dataclass(frozen=True)
class CallSite:
    caller: str
    loc: SourceLoc
    callee: str | LocalVar
    args: tuple[Var | None, ...]
    result: LocalVar | None = None

    @property
    def id(self) -> str:
        return str(self.loc)

    @property
    def indirect(self) -> bool:
        return not isinstance(self.callee, str)

    def __lt__(self, other: "CallSite") -> bool:
        return self.loc < other.loc


@dataclass(frozen=True)
class ConstraintSet:
    """Inclusion constraints of a normalized module.

    ``address_of`` pairs are (variable, object); ``copy``/``load``/``store``
    pairs are (dst, src) with ``load`` meaning dst ⊇ *src and ``store``
    meaning *dst ⊇ src.
    """

    address_of: frozenset[tuple[Var, AbstractObject]] = frozenset()
    copy: frozenset[tuple[Var, Var]] = frozenset()
    load: frozenset[tuple[Var, Var]] = frozenset()
    store: frozenset[tuple[Var, Var]] = frozenset()
    call_sites: frozenset[CallSite] = frozenset()
    variables: frozenset[Var] = field(default=frozenset(), compare=False)

    def __len__(self) -> int:
        return (len(self.address_of) + len(self.copy) + len(self.load) + len(self.store)
                + len(self.call_sites))

    def with_constraints(self, *, address_of=(), copy=(), load=(), store=()) -> "ConstraintSet":
        """Return a copy with extra constraints added."""
        new_vars = set(self.variables)
        for pairs in (copy, load, store):
            for d, s in pairs:
                new_vars.update((d, s))
        new_vars.update(v for v, _ in address_of)
        return ConstraintSet(self.address_of | frozenset(address_of), self.copy | frozenset(copy),
                             self.load | frozenset(load), self.store | frozenset(store),
                             self.call_sites, frozenset(new_vars))


def var_of(function: str, v: ValueRef) -> Var | None:
    """Pointer variable denoted by an operand, or None for constants."""
    if isinstance(v, Local):
        return LocalVar(function, v.name)
    if isinstance(v, (Global, FunctionRef)):
        return SymbolVar(v.name)
    return None


def _symbol_object(v: ValueRef) -> AbstractObject:
    return FunctionObj(v.name) if isinstance(v, FunctionRef) else GlobalObj(v.name)


def generate_constraints(m: Module) -> ConstraintSet:
    """Build the constraint set of ``m`` (normalizing it first if needed)."""
    m = normalize_module(m)
    address_of: set = set()
    copy: set = set()
    load: set = set()
    store: set = set()
    sites: set[CallSite] = set()
    variables: set[Var] = set()

    def use(fn: str, v: ValueRef) -> Var | None:
        var = var_of(fn, v)
        if isinstance(v, (Global, FunctionRef)):
            address_of.add((var, _symbol_object(v)))
        return var

    for g in m.globals:
        variables.add(SymbolVar(g.name))
        address_of.add((SymbolVar(g.name), GlobalObj(g.name)))
        for ref in g.init_refs:
            store.add((SymbolVar(g.name), use("", ref)))
    for name in sorted(m.defined_names | m.declared_names):
        variables.add(SymbolVar(name))

    for f in m.functions:
        fn = f.name
        variables.update(LocalVar(fn, r) for r in f.registers())
        variables.add(RetVar(fn))
        for b in f.blocks:
            for inst in b.instructions:
                dst = LocalVar(fn, inst.result) if inst.result is not None else None
                k = inst.kind
                if k == "alloca":
                    address_of.add((dst, AllocSite(fn, b.label, inst.loc.index)))
                elif k == "load":
                    src = use(fn, inst.operands[0])
                    if src is not None:
                        load.add((dst, src))
                elif k == "store":
                    val = use(fn, inst.operands[0])
                    ptr = use(fn, inst.operands[1])
                    if val is not None and ptr is not None:
                        store.add((ptr, val))
                elif k in ("copy", "phi"):
                    for op in inst.operands:
                        src = use(fn, op)
                        if src is not None:
                            copy.add((dst, src))
                elif inst.is_call:
                    args = tuple(use(fn, a) for a in inst.args)
                    if k == "call_direct":
                        callee: str | LocalVar = inst.callee.name
                    else:
                        callee = LocalVar(fn, inst.callee.name)
                    sites.add(CallSite(fn, inst.loc, callee, args, dst))
            term = b.terminator
            if isinstance(term, Ret) and term.value is not None:
                src = use(fn, term.value)
                if src is not None:
                    copy.add((RetVar(fn), src))
    return ConstraintSet(frozenset(address_of), frozenset(copy), frozenset(load),
                         frozenset(store), frozenset(sites), frozenset(variables))
