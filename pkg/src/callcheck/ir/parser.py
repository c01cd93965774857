"""Recursive-descent parser for the supported textual IR subset.

The accepted top level is ``define``, ``declare`` and ``@name = global|constant``.
Named type definitions, ``target``/``source_filename`` lines, ``attributes``
groups and metadata lines are recognized and skipped. Type syntax is parsed
loosely into strings.
"""

from __future__ import annotations

import re

from ..errors import DuplicateSymbol, ParseError
from .lexer import Token, tokenize
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

DEFAULT_MAX_BYTES = 64 * 1024 * 1024

_PRIMITIVE_RE = re.compile(
    r"^(void|i\d+|half|bfloat|float|double|fp128|x86_fp80|ppc_fp128|x86_mmx|ptr|label|metadata|token|opaque)$"
)

# recognized opcodes that have no pointer semantics for this analysis
OTHER_OPCODES = frozenset("""
    add fadd sub fsub mul fmul udiv sdiv fdiv urem srem frem shl lshr ashr and or xor
    fneg extractelement insertelement shufflevector extractvalue insertvalue trunc zext
    sext fptrunc fpext fptoui fptosi uitofp sitofp ptrtoint inttoptr addrspacecast fcmp
    va_arg freeze fence cmpxchg atomicrmw
""".split())

UNSUPPORTED_TERMINATORS = frozenset(
    {"switch", "indirectbr", "invoke", "resume", "callbr", "catchswitch", "catchret",
     "cleanupret", "landingpad"})

_CONST_WORDS = {"true": ConstInt(1), "false": ConstInt(0), "null": Null(), "none": Null(),
                "zeroinitializer": Null(), "undef": Undef(), "poison": Undef()}

_CAST_EXPRS = frozenset({"bitcast", "addrspacecast"})
_OPAQUE_EXPRS = frozenset({"inttoptr", "ptrtoint", "trunc", "zext", "sext", "add", "sub",
                           "mul", "and", "or", "xor", "shl", "icmp", "select",
                           "extractvalue", "blockaddress", "dso_local_equivalent",
                           "no_cfi"})

_CALL_PREFIX = frozenset({"tail", "musttail", "notail"})


class _Parser:
    def __init__(self, text: str, source: str | None):
        self.text = text
        self.source = source
        self.toks = tokenize(text, source)
        self.i = 0
        self.diagnostics: list[str] = []
        self.function_names: set[str] = set()
        self.global_names: set[str] = set()

    # -- token helpers ----------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def error(self, message: str, expected: str | None = None, tok: Token | None = None):
        t = tok or self.tok
        return ParseError(message, t.line, t.col, expected, self.source)

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind in ("punct", "word", "dots")

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            got = self.tok.text if self.tok.kind != "newline" else "end of line"
            raise self.error(f"unexpected {got!r}", repr(text))
        return self.next()

    def expect_kind(self, kind: str, what: str) -> Token:
        if self.tok.kind != kind:
            got = self.tok.text if self.tok.kind != "newline" else "end of line"
            raise self.error(f"unexpected {got!r}", what)
        return self.next()

    def skip_newlines(self) -> None:
        while self.tok.kind == "newline":
            self.i += 1

    def skip_line(self) -> None:
        while self.tok.kind not in ("newline", "eof"):
            self.i += 1

    def skip_balanced(self) -> None:
        """Skip a bracketed group starting at the current opening token."""
        pairs = {"(": ")", "[": "]", "{": "}", "<": ">"}
        stack = [pairs[self.next().text]]
        while stack:
            t = self.next()
            if t.kind == "eof":
                raise self.error("unterminated bracket", repr(stack[-1]), t)
            if t.kind == "punct":
                if t.text in pairs:
                    stack.append(pairs[t.text])
                elif t.text == stack[-1]:
                    stack.pop()

    # -- types ------------------------------------------------------------

    def at_type(self) -> bool:
        t = self.tok
        if t.kind == "word":
            return bool(_PRIMITIVE_RE.match(t.text))
        if t.kind == "local":
            return True
        return t.kind == "punct" and t.text in ("[", "{", "<")

    def parse_type(self, allow_fn: bool = True) -> str:
        t = self.tok
        if t.kind == "word" and _PRIMITIVE_RE.match(t.text):
            self.next()
            text = t.text
            if text == "ptr" and self.at("addrspace"):
                start = self.tok.start
                self.next()
                self.skip_balanced()
                text += " " + self.text[start:self.toks[self.i - 1].end]
        elif t.kind == "local":
            self.next()
            text = t.text
        elif self.at("["):
            self.next()
            n = self.expect_kind("int", "array length").text
            self.expect("x")
            inner = self.parse_type()
            self.expect("]")
            text = f"[{n} x {inner}]"
        elif self.at("<"):
            self.next()
            if self.at("{"):
                text = "<" + self.parse_struct_type() + ">"
                self.expect(">")
            else:
                n = self.expect_kind("int", "vector length").text
                self.expect("x")
                inner = self.parse_type()
                self.expect(">")
                text = f"<{n} x {inner}>"
        elif self.at("{"):
            text = self.parse_struct_type()
        else:
            raise self.error(f"unexpected {t.text!r}", "type")
        while True:
            if self.at("*"):
                self.next()
                text += "*"
            elif self.at("addrspace"):
                start = self.tok.start
                self.next()
                self.skip_balanced()
                text += " " + self.text[start:self.toks[self.i - 1].end]
            elif allow_fn and self.at("("):
                text += " " + self.parse_fn_params()[0]
            else:
                return text

    def parse_struct_type(self) -> str:
        self.expect("{")
        parts = []
        if not self.at("}"):
            parts.append(self.parse_type())
            while self.accept(","):
                parts.append(self.parse_type())
        self.expect("}")
        return "{ " + ", ".join(parts) + " }" if parts else "{}"

    def parse_fn_params(self) -> tuple[str, int, bool]:
        """Parse ``(T, T, ...)`` of a function type; returns (text, count, vararg)."""
        self.expect("(")
        parts: list[str] = []
        vararg = False
        while not self.at(")"):
            if self.accept("..."):
                vararg = True
                parts.append("...")
            else:
                parts.append(self.parse_type())
                self.skip_attributes()
            if not self.accept(","):
                break
        self.expect(")")
        count = len(parts) - (1 if vararg else 0)
        return "(" + ", ".join(parts) + ")", count, vararg

    def skip_attributes(self) -> None:
        """Skip parameter/return attributes up to the next value or delimiter."""
        while True:
            t = self.tok
            if t.kind == "attrref":
                self.next()
                continue
            if t.kind != "word" or t.text in _CONST_WORDS or t.text in _CAST_EXPRS \
                    or t.text in _OPAQUE_EXPRS or t.text == "getelementptr":
                return
            self.next()
            if t.text == "align" and self.tok.kind == "int":
                self.next()
            elif self.at("("):
                self.skip_balanced()

    # -- values -----------------------------------------------------------

    def parse_value(self) -> ValueRef:
        t = self.tok
        if t.kind == "local":
            self.next()
            return Local(t.value)
        if t.kind == "global":
            self.next()
            return self.resolve_symbol(t)
        if t.kind == "int":
            self.next()
            return ConstInt(int(t.text))
        if t.kind in ("float", "string"):
            self.next()
            return Undef()
        if t.kind == "word":
            if t.text in _CONST_WORDS:
                self.next()
                return _CONST_WORDS[t.text]
            if t.text in _CAST_EXPRS:
                self.next()
                self.expect("(")
                self.parse_type()
                v = self.parse_value()
                self.expect("to")
                self.parse_type()
                self.expect(")")
                return v
            if t.text == "getelementptr":
                # field-insensitive: a constant GEP denotes its base
                self.next()
                while self.tok.kind == "word" and self.tok.text in ("inbounds", "nuw", "nusw",
                                                                     "inrange"):
                    word = self.next().text
                    if word == "inrange" and self.at("("):
                        self.skip_balanced()
                self.expect("(")
                self.parse_type()
                self.expect(",")
                self.parse_type()
                base = self.parse_value()
                while self.accept(","):
                    if self.at("inrange"):
                        self.next()
                        if self.at("("):
                            self.skip_balanced()
                    self.parse_type()
                    self.parse_value()
                self.expect(")")
                return base
            if t.text in _OPAQUE_EXPRS:
                self.next()
                while self.tok.kind == "word":
                    self.next()
                if self.at("("):
                    self.skip_balanced()
                self.diagnostics.append(
                    f"{self.source or '<input>'}:{t.line}: constant expression {t.text!r} "
                    "treated as opaque")
                return Undef()
        if t.kind == "punct" and t.text in ("[", "{", "<"):
            self.skip_balanced()
            return Undef()
        raise self.error(f"unexpected {t.text!r}", "value")

    def resolve_symbol(self, t: Token) -> ValueRef:
        name = t.value
        if name in self.function_names:
            return FunctionRef(name)
        if name in self.global_names:
            return Global(name)
        raise self.error(f"reference to undefined symbol @{name}", tok=t)

    def parse_typed_value(self) -> tuple[str, ValueRef]:
        ty = self.parse_type()
        self.skip_attributes()
        return ty, self.parse_value()

    # -- top level --------------------------------------------------------

    def prescan(self) -> None:
        """Collect global and function names so references resolve in one pass."""
        line_first = True
        toks = self.toks
        for idx, t in enumerate(toks):
            if t.kind == "newline":
                line_first = True
                continue
            if line_first:
                if t.kind == "global" and toks[idx + 1].text == "=":
                    self.add_symbol(t, self.global_names)
                elif t.kind == "word" and t.text in ("define", "declare"):
                    j = idx + 1
                    while toks[j].kind not in ("global", "newline", "eof"):
                        j += 1
                    if toks[j].kind == "global":
                        self.add_symbol(toks[j], self.function_names)
            line_first = False

    def add_symbol(self, t: Token, bucket: set[str]) -> None:
        name = t.value
        if name in self.function_names or name in self.global_names:
            raise DuplicateSymbol(name, t.line, t.col, self.source)
        bucket.add(name)

    def parse_module(self) -> Module:
        self.prescan()
        functions: list[Function] = []
        globals_: list[GlobalVar] = []
        decls: list[FunctionDecl] = []
        while True:
            self.skip_newlines()
            t = self.tok
            if t.kind == "eof":
                break
            if t.kind == "word" and t.text == "define":
                functions.append(self.parse_define())
            elif t.kind == "word" and t.text == "declare":
                decls.append(self.parse_declare())
            elif t.kind == "global" and self.peek().text == "=":
                g = self.parse_global()
                if g is not None:
                    globals_.append(g)
            elif t.kind == "local" and self.peek().text == "=" and self.peek(2).text == "type":
                self.skip_statement()
            elif t.kind == "word" and t.text in ("target", "source_filename"):
                self.skip_line()
            elif t.kind == "word" and t.text == "attributes":
                self.skip_statement()
            elif t.kind == "meta":
                self.skip_statement()
            else:
                raise self.error(f"unrecognized top-level construct {t.text!r}",
                                 "'define', 'declare' or a global definition")
        return Module(tuple(functions), tuple(globals_), tuple(decls),
                      diagnostics=tuple(self.diagnostics))

    def skip_statement(self) -> None:
        """Skip to end of line, following brackets that span lines."""
        while self.tok.kind not in ("newline", "eof"):
            if self.tok.kind == "punct" and self.tok.text in ("(", "[", "{", "<"):
                self.skip_balanced()
            else:
                self.next()

    def parse_global(self) -> GlobalVar | None:
        name_tok = self.next()
        self.expect("=")
        external = False
        while self.tok.kind == "word" and self.tok.text not in ("global", "constant", "alias",
                                                                 "ifunc"):
            external = external or self.tok.text in ("external", "extern_weak")
            self.next()
            if self.at("("):
                self.skip_balanced()
        kw = self.tok.text
        if kw in ("alias", "ifunc"):
            self.diagnostics.append(f"{self.source or '<input>'}:{name_tok.line}: "
                                    f"{kw} @{name_tok.value} ignored")
            self.skip_statement()
            return None
        self.expect_kind("word", "'global' or 'constant'")
        ty = self.parse_type()
        init: ValueRef | None = None
        aggregate: tuple[ValueRef, ...] = ()
        if self.tok.kind not in ("newline", "eof") and not self.at(","):
            if self.tok.kind == "punct" and self.tok.text in ("[", "{", "<"):
                aggregate = self.collect_refs()
            else:
                v = self.parse_value()
                if isinstance(v, (FunctionRef, Global)):
                    init = v
        self.skip_statement()
        return GlobalVar(name_tok.value, ty, init, kw == "constant", aggregate, external)

    def collect_refs(self) -> tuple[ValueRef, ...]:
        """Symbol references inside an aggregate initializer (field-collapsed)."""
        refs: list[ValueRef] = []
        start = self.i
        self.skip_balanced()
        for t in self.toks[start:self.i]:
            if t.kind == "global":
                v = self.resolve_symbol(t)
                if v not in refs:
                    refs.append(v)
        return tuple(refs)

    def skip_header_words(self) -> None:
        while not self.at_type():
            t = self.tok
            if t.kind in ("newline", "eof", "global"):
                raise self.error(f"unexpected {t.text!r}", "return type")
            self.next()
            if self.at("("):
                self.skip_balanced()

    def parse_declare(self) -> FunctionDecl:
        self.expect("declare")
        self.skip_header_words()
        ret = self.parse_type()
        name = self.expect_kind("global", "function name").value
        text, count, vararg = self.parse_fn_params()
        self.skip_statement()
        params = tuple(p for p in text[1:-1].split(", ") if p and p != "...")
        return FunctionDecl(name, count, vararg, ret, params)

    def parse_define(self) -> Function:
        self.expect("define")
        self.skip_header_words()
        ret = self.parse_type()
        name = self.expect_kind("global", "function name").value
        params, vararg, counter = self.parse_params()
        while not self.at("{"):
            if self.tok.kind == "eof":
                raise self.error("unexpected end of input", "'{'")
            if self.tok.kind == "punct" and self.tok.text in ("(", "["):
                self.skip_balanced()
            else:
                self.next()
        self.expect("{")
        blocks = self.parse_body(name, counter)
        sig = FunctionType(ret, len(params), vararg)
        return Function(name, params, blocks, sig, source=self.source)

    def parse_params(self) -> tuple[tuple[Param, ...], bool, int]:
        self.expect("(")
        params: list[Param] = []
        vararg = False
        counter = 0
        while not self.at(")"):
            if self.accept("..."):
                vararg = True
            else:
                ty = self.parse_type()
                self.skip_attributes()
                if self.tok.kind == "local":
                    pname = self.next().value
                else:
                    pname = str(counter)
                if pname.isdigit():
                    counter = int(pname) + 1
                params.append(Param(ty, pname))
            if not self.accept(","):
                break
        self.expect(")")
        return tuple(params), vararg, counter

    # -- function bodies --------------------------------------------------

    def parse_body(self, fname: str, counter: int) -> tuple[BasicBlock, ...]:
        blocks: list[BasicBlock] = []
        label: str | None = None
        insts: list[Instruction] = []
        term = None
        labels_seen: dict[str, Token] = {}
        branch_refs: list[tuple[str, Token]] = []
        results: set[str] = set()
        self.branch_refs = branch_refs

        def close_block(tok: Token) -> None:
            nonlocal insts, term
            if label is None:
                return
            if term is None:
                raise self.error(f"block {label!r} has no terminator", "'br', 'ret' or "
                                 "'unreachable'", tok)
            blocks.append(BasicBlock(label, tuple(insts), term))
            insts = []
            term = None

        while True:
            self.skip_newlines()
            t = self.tok
            if t.kind == "eof":
                raise self.error("unexpected end of input", "'}'")
            if self.at("}"):
                close_block(t)
                self.next()
                break
            if t.kind == "label":
                close_block(t)
                label = t.value
                if label in labels_seen:
                    raise DuplicateSymbol(f"{fname}:{label}", t.line, t.col, self.source)
                labels_seen[label] = t
                self.next()
                continue
            if label is None:
                # unlabeled entry block takes the next implicit number
                label = str(counter)
                labels_seen[label] = t
            if term is not None:
                raise self.error("instruction after terminator", "a block label")
            item = self.parse_instruction(SourceLoc(fname, label, len(insts)))
            if isinstance(item, Instruction):
                if item.result is not None:
                    if item.result in results:
                        raise DuplicateSymbol(f"{fname}:%{item.result}", t.line, t.col, self.source)
                    results.add(item.result)
                insts.append(item)
            else:
                term = item
                if self.at(",") and self.peek().kind == "meta":
                    self.skip_trailer()
            if self.tok.kind not in ("newline", "eof") and not self.at("}"):
                raise self.error(f"unexpected {self.tok.text!r}", "end of line")

        if not blocks:
            raise self.error(f"function @{fname} has no blocks")
        for target, tok in branch_refs:
            if target not in labels_seen:
                raise self.error(f"branch to undefined label %{target}", tok=tok)
        return tuple(blocks)

    def label_ref(self) -> str:
        self.expect("label")
        t = self.expect_kind("local", "label")
        self.branch_refs.append((t.value, t))
        return t.value

    def parse_instruction(self, loc: SourceLoc):
        result = None
        if self.tok.kind == "local" and self.peek().text == "=":
            result = self.next().value
            self.next()
        first = self.tok
        op = first.text
        if first.kind != "word":
            raise self.error(f"unexpected {op!r}", "instruction")
        if op in _CALL_PREFIX:
            self.next()
            op = self.tok.text
        if op == "call":
            return self.parse_call(result, loc)
        if result is None:
            if op == "br":
                return self.parse_br()
            if op == "ret":
                self.next()
                nxt = self.peek()
                if self.at("void") and (nxt.kind in ("newline", "eof") or nxt.text == "}"
                                        or (nxt.text == "," and self.peek(2).kind == "meta")):
                    self.next()
                    return Ret(None, "void")
                ty, v = self.parse_typed_value()
                return Ret(v, ty)
            if op == "unreachable":
                self.next()
                return Unreachable()
            if op in UNSUPPORTED_TERMINATORS:
                raise self.error(f"unsupported terminator {op!r}", "'br', 'ret' or "
                                 "'unreachable'")
        handler = getattr(self, f"parse_{op}", None) if op in (
            "alloca", "load", "store", "bitcast", "getelementptr", "phi", "select",
            "icmp") else None
        if handler is not None:
            if op != "store" and result is None:
                raise self.error(f"{op!r} must define a register", "'%name ='")
            if op == "store" and result is not None:
                raise self.error("'store' does not produce a value")
            return handler(result, loc)
        if op in OTHER_OPCODES:
            start = first.start
            self.next()
            last = first
            while self.tok.kind not in ("newline", "eof"):
                if self.tok.kind != "meta":
                    last = self.tok
                    self.next()
                else:
                    self.skip_line()
            text = self.text[start:last.end]
            self.diagnostics.append(f"{self.source or '<input>'}:{first.line}: "
                                    f"'{op}' has no pointer semantics; ignored by analysis")
            return Instruction("other", (), result, loc, extra=(op,), text=text)
        raise self.error(f"unknown instruction {op!r}", "instruction")

    def skip_trailer(self) -> None:
        """Skip ``, align N``, ``, !dbg !N`` and similar trailing annotations."""
        while self.tok.kind not in ("newline", "eof") and not self.at("}"):
            self.next()

    def parse_br(self) -> Br | CondBr:
        self.expect("br")
        if self.at("label"):
            target = self.label_ref()
            self.skip_trailer()
            return Br(target)
        self.parse_type()
        cond = self.parse_value()
        self.expect(",")
        t = self.label_ref()
        self.expect(",")
        f = self.label_ref()
        self.skip_trailer()
        return CondBr(cond, t, f)

    def parse_alloca(self, result, loc):
        self.expect("alloca")
        self.accept("inalloca")
        ty = self.parse_type()
        self.skip_trailer()
        return Instruction("alloca", (), result, loc, ty=ty)

    def parse_load(self, result, loc):
        self.expect("load")
        self.accept("atomic")
        self.accept("volatile")
        t1 = self.parse_type()
        if self.accept(","):
            t2 = self.parse_type()
            ptr = self.parse_value()
            ty = t1
        else:
            t2 = t1
            ptr = self.parse_value()
            ty = t1[:-1] if t1.endswith("*") else t1
        self.skip_trailer()
        return Instruction("load", (ptr,), result, loc, ty=ty, types=(t2,))

    def parse_store(self, result, loc):
        self.expect("store")
        self.accept("atomic")
        self.accept("volatile")
        vt, v = self.parse_typed_value()
        self.expect(",")
        pt, p = self.parse_typed_value()
        self.skip_trailer()
        return Instruction("store", (v, p), None, loc, types=(vt, pt))

    def parse_bitcast(self, result, loc):
        self.expect("bitcast")
        st, v = self.parse_typed_value()
        self.expect("to")
        dt = self.parse_type()
        self.skip_trailer()
        return Instruction("bitcast", (v,), result, loc, ty=dt, types=(st,))

    def parse_getelementptr(self, result, loc):
        self.expect("getelementptr")
        while self.tok.kind == "word" and self.tok.text in ("inbounds", "nuw", "nusw"):
            self.next()
        ty = self.parse_type()
        self.expect(",")
        bt, base = self.parse_typed_value()
        operands = [base]
        types = [bt]
        while self.accept(","):
            if self.at("inrange"):
                self.next()
                if self.at("("):
                    self.skip_balanced()
            if self.at("align") or self.tok.kind == "meta":
                self.skip_trailer()
                break
            it, iv = self.parse_typed_value()
            operands.append(iv)
            types.append(it)
        self.skip_trailer()
        return Instruction("gep", tuple(operands), result, loc, ty=ty, types=tuple(types))

    def parse_phi(self, result, loc):
        self.expect("phi")
        while self.tok.kind == "word" and not _PRIMITIVE_RE.match(self.tok.text):
            self.next()
        ty = self.parse_type()
        values = []
        labels = []
        while True:
            self.expect("[")
            v = self.parse_value()
            self.expect(",")
            lt = self.expect_kind("local", "incoming label")
            self.branch_refs.append((lt.value, lt))
            self.expect("]")
            values.append(v)
            labels.append(lt.value)
            if not (self.at(",") and self.peek().text == "["):
                break
            self.next()
        self.skip_trailer()
        return Instruction("phi", tuple(values), result, loc, ty=ty,
                           types=(ty,) * len(values), extra=tuple(labels))

    def parse_select(self, result, loc):
        self.expect("select")
        while self.tok.kind == "word" and not _PRIMITIVE_RE.match(self.tok.text):
            self.next()
        ct, c = self.parse_typed_value()
        self.expect(",")
        at_, a = self.parse_typed_value()
        self.expect(",")
        bt, b = self.parse_typed_value()
        self.skip_trailer()
        return Instruction("select", (c, a, b), result, loc, ty=at_, types=(ct, at_, bt))

    def parse_icmp(self, result, loc):
        self.expect("icmp")
        self.accept("samesign")
        pred = self.expect_kind("word", "comparison predicate").text
        ty, a = self.parse_typed_value()
        self.expect(",")
        b = self.parse_value()
        self.skip_trailer()
        return Instruction("icmp", (a, b), result, loc, ty=ty, types=(ty, ty), extra=(pred,))

    def parse_call(self, result, loc):
        self.expect("call")
        while self.tok.kind == "word" and not _PRIMITIVE_RE.match(self.tok.text):
            self.next()
            if self.at("("):
                self.skip_balanced()
            elif self.tok.kind == "int":
                self.next()
        ret = self.parse_type(allow_fn=False)
        fnty = ""
        while self.at("("):
            text, _, _ = self.parse_fn_params()
            if self.at("*"):
                while self.accept("*"):
                    text += "*"
                ret = f"{ret} {text}"
                continue
            fnty = text
            break
        callee_tok = self.tok
        callee = self.parse_value()
        self.expect("(")
        args: list[ValueRef] = []
        types: list[str] = []
        while not self.at(")"):
            at_, av = self.parse_typed_value()
            args.append(av)
            types.append(at_)
            if not self.accept(","):
                break
        self.expect(")")
        self.skip_trailer()
        if isinstance(callee, FunctionRef):
            kind = "call_direct"
        elif isinstance(callee, Local):
            kind = "call_indirect"
        else:
            raise self.error(f"call target {callee_tok.text!r} is not a function or register",
                             "callee", callee_tok)
        return Instruction(kind, (callee, *args), result, loc, ty=ret,
                           types=(fnty, *types))


def _check_locals(p: _Parser, fn: Function) -> None:
    regs = fn.registers()
    for inst in fn.instructions():
        for v in inst.operands:
            if isinstance(v, Local) and v.name not in regs:
                raise ParseError(f"use of undefined register %{v.name} in @{fn.name}",
                                 source=p.source)
    for b in fn.blocks:
        term = b.terminator
        vs = [term.cond] if isinstance(term, CondBr) else \
            [term.value] if isinstance(term, Ret) and term.value is not None else []
        for v in vs:
            if isinstance(v, Local) and v.name not in regs:
                raise ParseError(f"use of undefined register %{v.name} in @{fn.name}",
                                 source=p.source)


def parse_module(text: str, source: str | None = None,
                 max_bytes: int = DEFAULT_MAX_BYTES) -> Module:
    """Parse IR text into a validated :class:`Module`.

    Raises :class:`ParseError` (with line/column) on malformed input and
    :class:`DuplicateSymbol` on redefinitions.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    if len(text.encode("utf-8")) > max_bytes:
        raise ParseError(f"input exceeds {max_bytes} bytes", source=source)
    p = _Parser(text, source)
    module = p.parse_module()
    for fn in module.functions:
        _check_locals(p, fn)
    return module
