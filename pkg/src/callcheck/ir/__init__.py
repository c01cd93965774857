"""Program model, parser, printer and normalizer for the supported IR subset."""

from .link import link_modules
from .model import (
    BasicBlock,
    Br,
    CondBr,
    ConstInt,
    Function,
    FunctionDecl,
    FunctionRef,
    FunctionType,
    Global,
    GlobalVar,
    Instruction,
    Local,
    Module,
    Null,
    Param,
    Ret,
    SourceLoc,
    Undef,
    Unreachable,
    ValueRef,
)
from .normalize import normalize_module
from .parser import parse_module
from .printer import format_module

__all__ = [
    "BasicBlock", "Br", "CondBr", "ConstInt", "Function", "FunctionDecl", "FunctionRef",
    "FunctionType", "Global", "GlobalVar", "Instruction", "Local", "Module", "Null", "Param",
    "Ret", "SourceLoc", "Undef", "Unreachable", "ValueRef",
    "format_module", "link_modules", "normalize_module", "parse_module",
]
