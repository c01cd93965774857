"""In-memory program model for the supported IR subset.

All types are frozen dataclasses; a parsed Module is never mutated, and the
normalizer builds a new one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Union


# -- values -------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class Local:
    name: str

    def __str__(self) -> str:
        return f"%{self.name}"


@dataclass(frozen=True, order=True)
class Global:
    name: str

    def __str__(self) -> str:
        return f"@{self.name}"


@dataclass(frozen=True, order=True)
class FunctionRef:
    name: str

    def __str__(self) -> str:
        return f"@{self.name}"


@dataclass(frozen=True, order=True)
class ConstInt:
    value: int

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True, order=True)
class Null:
    def __str__(self) -> str:
        return "null"


@dataclass(frozen=True, order=True)
class Undef:
    def __str__(self) -> str:
        return "undef"


ValueRef = Union[Local, Global, FunctionRef, ConstInt, Null, Undef]


# -- instructions ---------------------------------------------------------------

INSTRUCTION_KINDS = frozenset({
    "alloca", "load", "store", "call_direct", "call_indirect", "bitcast",
    "phi", "select", "gep", "icmp", "other",
    # produced by normalize_module only
    "copy",
})


@dataclass(frozen=True, order=True)
class SourceLoc:
    function: str
    block: str
    index: int

    def __str__(self) -> str:
        return f"{self.function}:{self.block}:{self.index}"


@dataclass(frozen=True)
class Instruction:
    """One non-terminator instruction.

    Operand layout per kind:

    ``alloca``        ()                        ty = allocated type
    ``load``          (pointer,)                ty = loaded type
    ``store``         (value, pointer)
    ``call_*``        (callee, *args)           ty = return type
    ``bitcast``       (source,)                 ty = destination type
    ``gep``           (base, *indices)          ty = source element type
    ``phi``           (v1, v2, ...)             extra = incoming labels
    ``select``        (cond, a, b)
    ``icmp``          (a, b)                    extra = (predicate,)
    ``copy``          (src, ...)                one pointer copy per operand
    ``other``         ()                        extra = (opcode,), text = raw

    ``types`` runs parallel to ``operands`` and keeps the textual type of each.
    """

    kind: str
    operands: tuple[ValueRef, ...]
    result: str | None
    loc: SourceLoc
    ty: str = ""
    types: tuple[str, ...] = ()
    extra: tuple[str, ...] = ()
    text: str = ""

    @property
    def is_call(self) -> bool:
        return self.kind in ("call_direct", "call_indirect")

    @property
    def callee(self) -> ValueRef:
        return self.operands[0]

    @property
    def args(self) -> tuple[ValueRef, ...]:
        return self.operands[1:]


@dataclass(frozen=True)
class Br:
    target: str

    @property
    def targets(self) -> tuple[str, ...]:
        return (self.target,)


@dataclass(frozen=True)
class CondBr:
    cond: ValueRef
    if_true: str
    if_false: str

    @property
    def targets(self) -> tuple[str, ...]:
        return (self.if_true, self.if_false)


@dataclass(frozen=True)
class Ret:
    value: ValueRef | None = None
    ty: str = "void"

    @property
    def targets(self) -> tuple[str, ...]:
        return ()


@dataclass(frozen=True)
class Unreachable:
    @property
    def targets(self) -> tuple[str, ...]:
        return ()


Terminator = Union[Br, CondBr, Ret, Unreachable]


@dataclass(frozen=True)
class BasicBlock:
    label: str
    instructions: tuple[Instruction, ...]
    terminator: Terminator

    @property
    def successors(self) -> tuple[str, ...]:
        # a conditional branch to the same label twice is still one edge
        return tuple(dict.fromkeys(self.terminator.targets))

    @property
    def returns(self) -> bool:
        return isinstance(self.terminator, Ret)


# -- functions and module -----------------------------------------------------

@dataclass(frozen=True)
class FunctionType:
    ret: str
    param_count: int
    vararg: bool = False

    def accepts(self, nargs: int) -> bool:
        return self.vararg or nargs == self.param_count


@dataclass(frozen=True)
class Param:
    ty: str
    name: str


@dataclass(frozen=True)
class Function:
    name: str
    params: tuple[Param, ...]
    blocks: tuple[BasicBlock, ...]
    signature: FunctionType
    source: str | None = field(default=None, compare=False)

    @property
    def entry(self) -> str:
        return self.blocks[0].label

    def block(self, label: str) -> BasicBlock:
        for b in self.blocks:
            if b.label == label:
                return b
        raise KeyError(label)

    def instructions(self) -> Iterator[Instruction]:
        for b in self.blocks:
            yield from b.instructions

    def registers(self) -> set[str]:
        regs = {p.name for p in self.params}
        regs.update(i.result for i in self.instructions() if i.result is not None)
        return regs


@dataclass(frozen=True)
class FunctionDecl:
    name: str
    arity: int
    vararg: bool = False
    ret: str = "void"
    param_types: tuple[str, ...] = ()

    @property
    def signature(self) -> FunctionType:
        return FunctionType(self.ret, self.arity, self.vararg)


@dataclass(frozen=True)
class GlobalVar:
    name: str
    ty: str = ""
    initializer: ValueRef | None = None
    constant: bool = False
    # every symbol referenced from an aggregate initializer (fields collapsed)
    aggregate_refs: tuple[ValueRef, ...] = ()
    external: bool = False

    @property
    def init_refs(self) -> tuple[ValueRef, ...]:
        return ((self.initializer,) if self.initializer is not None else ()) + self.aggregate_refs


@dataclass(frozen=True)
class Module:
    functions: tuple[Function, ...]
    globals: tuple[GlobalVar, ...] = ()
    declarations: tuple[FunctionDecl, ...] = ()
    normalized: bool = False
    diagnostics: tuple[str, ...] = field(default=(), compare=False)

    def function(self, name: str) -> Function:
        for f in self.functions:
            if f.name == name:
                return f
        raise KeyError(name)

    def declaration(self, name: str) -> FunctionDecl:
        for d in self.declarations:
            if d.name == name:
                return d
        raise KeyError(name)

    @property
    def defined_names(self) -> frozenset[str]:
        return frozenset(f.name for f in self.functions)

    @property
    def declared_names(self) -> frozenset[str]:
        return frozenset(d.name for d in self.declarations)

    def signature_of(self, name: str) -> FunctionType | None:
        for f in self.functions:
            if f.name == name:
                return f.signature
        for d in self.declarations:
            if d.name == name:
                return d.signature
        return None

    def source_of(self, name: str) -> str | None:
        for f in self.functions:
            if f.name == name:
                return f.source
        return None
