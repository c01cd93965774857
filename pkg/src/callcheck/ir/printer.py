"""Pretty-printer producing text that :func:`parse_module` reads back."""

from __future__ import annotations

import re

from .model import (
    BasicBlock,
    Br,
    CondBr,
    Function,
    Global,
    FunctionRef,
    Instruction,
    Local,
    Module,
    Ret,
    ValueRef,
)

_PLAIN = re.compile(r"^(?:[-a-zA-Z$._][-a-zA-Z$._0-9]*|\d+)$")


def _name(name: str) -> str:
    return name if _PLAIN.match(name) else '"' + name + '"'


def format_value(v: ValueRef) -> str:
    if isinstance(v, Local):
        return "%" + _name(v.name)
    if isinstance(v, (Global, FunctionRef)):
        return "@" + _name(v.name)
    return str(v)


def _result(inst: Instruction) -> str:
    return f"%{_name(inst.result)} = " if inst.result is not None else ""


def format_instruction(inst: Instruction) -> str:
    k = inst.kind
    ops = [format_value(v) for v in inst.operands]
    t = inst.types
    r = _result(inst)
    if k == "alloca":
        return f"{r}alloca {inst.ty}"
    if k == "load":
        return f"{r}load {inst.ty}, {t[0]} {ops[0]}"
    if k == "store":
        return f"store {t[0]} {ops[0]}, {t[1]} {ops[1]}"
    if k in ("call_direct", "call_indirect"):
        fnty = f" {t[0]}" if t and t[0] else ""
        args = ", ".join(f"{ty} {a}" for ty, a in zip(t[1:], ops[1:]))
        return f"{r}call {inst.ty}{fnty} {ops[0]}({args})"
    if k == "bitcast":
        return f"{r}bitcast {t[0]} {ops[0]} to {inst.ty}"
    if k == "gep":
        rest = "".join(f", {ty} {v}" for ty, v in zip(t[1:], ops[1:]))
        return f"{r}getelementptr {inst.ty}, {t[0]} {ops[0]}{rest}"
    if k == "phi":
        arms = ", ".join(f"[ {v}, %{_name(lbl)} ]" for v, lbl in zip(ops, inst.extra))
        return f"{r}phi {inst.ty} {arms}"
    if k == "select":
        return f"{r}select {t[0]} {ops[0]}, {t[1]} {ops[1]}, {t[2]} {ops[2]}"
    if k == "icmp":
        return f"{r}icmp {inst.extra[0]} {inst.ty} {ops[0]}, {ops[1]}"
    if k == "copy":
        # copies have no surface syntax; print the equivalent cast or select
        if len(ops) == 1:
            return f"{r}bitcast {t[0]} {ops[0]} to {inst.ty or t[0]}"
        return f"{r}select i1 undef, {t[0]} {ops[0]}, {t[1]} {ops[1]}"
    if k == "other":
        return f"{r}{inst.text}"
    raise ValueError(f"unknown instruction kind {k!r}")


def _format_terminator(term) -> str:
    if isinstance(term, Br):
        return f"br label %{_name(term.target)}"
    if isinstance(term, CondBr):
        return (f"br i1 {format_value(term.cond)}, label %{_name(term.if_true)}, "
                f"label %{_name(term.if_false)}")
    if isinstance(term, Ret):
        return "ret void" if term.value is None else f"ret {term.ty} {format_value(term.value)}"
    return "unreachable"


def _format_block(b: BasicBlock) -> list[str]:
    lines = [f"{_name(b.label)}:"]
    lines += ["  " + format_instruction(i) for i in b.instructions]
    lines.append("  " + _format_terminator(b.terminator))
    return lines


def format_function(f: Function) -> str:
    params = [f"{p.ty} %{_name(p.name)}" for p in f.params]
    if f.signature.vararg:
        params.append("...")
    lines = [f"define {f.signature.ret} @{_name(f.name)}({', '.join(params)}) {{"]
    for b in f.blocks:
        lines += _format_block(b)
    lines.append("}")
    return "\n".join(lines)


def format_module(m: Module) -> str:
    out: list[str] = []
    for g in m.globals:
        kw = "constant" if g.constant else "global"
        ext = "external " if g.external else ""
        if g.aggregate_refs:
            init = " [" + ", ".join(f"ptr {format_value(v)}" for v in g.aggregate_refs) + "]"
        elif g.initializer is not None:
            init = " " + format_value(g.initializer)
        else:
            init = "" if g.external else " zeroinitializer"
        out.append(f"@{_name(g.name)} = {ext}{kw} {g.ty}{init}")
    for d in m.declarations:
        types = list(d.param_types) if len(d.param_types) == d.arity else ["ptr"] * d.arity
        if d.vararg:
            types.append("...")
        out.append(f"declare {d.ret} @{_name(d.name)}({', '.join(types)})")
    for f in m.functions:
        out.append(format_function(f))
    return "\n\n".join(out) + "\n"
