"""Rewrite pointer-irrelevant structure into plain pointer copies."""

from __future__ import annotations

from dataclasses import replace

from .model import BasicBlock, Function, Instruction, Module


def is_pointer_type(ty: str) -> bool:
    return ty.endswith("*") or ty.startswith("ptr")


def _normalize_inst(inst: Instruction) -> Instruction:
    if inst.kind in ("gep", "bitcast"):
        # field-insensitive: the result aliases the base pointer
        return Instruction("copy", inst.operands[:1], inst.result, inst.loc,
                           ty=inst.ty if inst.kind == "bitcast" else inst.types[0],
                           types=inst.types[:1])
    if inst.kind == "select" and is_pointer_type(inst.ty):
        return Instruction("copy", inst.operands[1:], inst.result, inst.loc,
                           ty=inst.ty, types=inst.types[1:])
    return inst


def normalize_module(m: Module) -> Module:
    """Return the normalized form of ``m``; idempotent."""
    if m.normalized:
        return m
    functions = []
    for f in m.functions:
        blocks = tuple(BasicBlock(b.label, tuple(_normalize_inst(i) for i in b.instructions),
                                  b.terminator) for b in f.blocks)
        functions.append(Function(f.name, f.params, blocks, f.signature, source=f.source))
    return replace(m, functions=tuple(functions), normalized=True)
