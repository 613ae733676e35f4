"""Recursive-descent parser for the supported Verilog subset.

Synthesizable subset: modules with parameters, ANSI or list-style ports,
wire/reg declarations (vectors and one unpacked dimension), continuous
assigns, clocked and combinational always blocks, if/else, case, function
definitions, and module instances with parameter overrides.  Testbench
subset: initial blocks, ``#n`` delays, ``@(...)`` waits, forever/repeat,
``$finish`` and ``$display``.  Anything else fails with a located error.
"""
from __future__ import annotations

from ..errors import UnsupportedConstruct, VerilogSyntaxError
from . import ast as A
from .lexer import Token, tokenize

# binary operator precedence, loosest first
_BINARY_LEVELS = [
    ["||"],
    ["&&"],
    ["|"],
    ["^", "~^", "^~"],
    ["&"],
    ["==", "!=", "===", "!=="],
    ["<", "<=", ">", ">="],
    ["<<", ">>", "<<<", ">>>"],
    ["+", "-"],
    ["*", "/", "%"],
]
_UNARY = {"~", "!", "-", "+", "&", "|", "^", "~&", "~|", "~^", "^~"}
_NORMALIZE = {"===": "==", "!==": "!=", "<<<": "<<", ">>>": ">>", "^~": "~^"}

_UNSUPPORTED_KW = {
    "generate": "generate block", "endgenerate": "generate block", "genvar": "genvar",
    "for": "for loop", "while": "while loop", "task": "task", "inout": "inout port",
    "tri": "tri-state net", "casez": "casez", "casex": "casex", "integer": "integer variable",
    "signed": "signed arithmetic", "fork": "fork/join", "wait": "wait statement",
}


class Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.i = 0

    # -- token helpers ---------------------------------------------------------
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k=1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("op", "keyword") and t.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"expected {text!r}, found {self.tok.text or 'end of input'!r}")
        t = self.tok
        self.i += 1
        return t

    def ident(self) -> str:
        t = self.tok
        if t.kind != "ident":
            if t.kind == "keyword" and t.text in _UNSUPPORTED_KW:
                raise UnsupportedConstruct(_UNSUPPORTED_KW[t.text], t.loc)
            self.error(f"expected identifier, found {t.text or 'end of input'!r}")
        self.i += 1
        return t.text

    def error(self, msg: str):
        raise VerilogSyntaxError(msg, self.tok.loc)

    def check_unsupported(self):
        t = self.tok
        if t.kind == "keyword" and t.text in _UNSUPPORTED_KW:
            raise UnsupportedConstruct(_UNSUPPORTED_KW[t.text], t.loc)

    # -- modules ---------------------------------------------------------------
    def source(self) -> list[A.Module]:
        mods = []
        while self.tok.kind != "eof":
            self.check_unsupported()
            if not self.at("module"):
                self.error(f"expected 'module', found {self.tok.text!r}")
            mods.append(self.module())
        return mods

    def module(self) -> A.Module:
        loc = self.expect("module").loc
        name = self.ident()
        params = []
        if self.accept("#"):
            self.expect("(")
            while True:
                if self.at("parameter") or self.at("localparam"):
                    local = self.tok.text == "localparam"
                    self.i += 1
                    rng = self.opt_range()
                    ploc = self.tok.loc
                    pname = self.ident()
                    self.expect("=")
                    params.append(A.ParamDecl(pname, self.expr(), local, rng, loc=ploc))
                else:
                    ploc = self.tok.loc
                    pname = self.ident()
                    self.expect("=")
                    params.append(A.ParamDecl(pname, self.expr(), False, None, loc=ploc))
                if not self.accept(","):
                    break
            self.expect(")")
        ports: list = []
        ansi = True
        if self.accept("("):
            if not self.at(")"):
                if self.at("input") or self.at("output") or self.at("inout"):
                    ports = self.ansi_ports()
                else:
                    ansi = False
                    ports.append(self.ident())
                    while self.accept(","):
                        ports.append(self.ident())
            self.expect(")")
        self.expect(";")
        items = []
        while not self.at("endmodule"):
            if self.tok.kind == "eof":
                self.error("missing 'endmodule'")
            items.extend(self.module_item())
        self.expect("endmodule")
        return A.Module(name, params, ports, items, ansi, loc=loc)

    def ansi_ports(self) -> list[A.PortDecl]:
        ports: list[A.PortDecl] = []
        while True:
            self.check_unsupported()
            if self.at("input") or self.at("output"):
                loc = self.tok.loc
                direction = self.tok.text
                self.i += 1
                net = None
                if self.at("wire") or self.at("reg"):
                    net = self.tok.text
                    self.i += 1
                self.check_unsupported()
                rng = self.opt_range()
                ports.append(A.PortDecl(direction, net, rng, [self.ident()], loc=loc))
            else:
                if not ports:
                    self.error("expected port direction")
                ports[-1].names.append(self.ident())
            if not self.accept(","):
                break
        return ports

    def opt_range(self) -> A.Range | None:
        if not self.at("["):
            return None
        loc = self.expect("[").loc
        msb = self.expr()
        self.expect(":")
        lsb = self.expr()
        self.expect("]")
        return A.Range(msb, lsb, loc=loc)

    def module_item(self) -> list:
        t = self.tok
        self.check_unsupported()
        if t.kind == "keyword":
            kw = t.text
            if kw in ("input", "output"):
                self.i += 1
                net = None
                if self.at("wire") or self.at("reg"):
                    net = self.tok.text
                    self.i += 1
                self.check_unsupported()
                rng = self.opt_range()
                names = [self.ident()]
                while self.accept(","):
                    names.append(self.ident())
                self.expect(";")
                return [A.PortDecl(kw, net, rng, names, loc=t.loc)]
            if kw in ("wire", "reg"):
                return [self.net_decl()]
            if kw in ("parameter", "localparam"):
                self.i += 1
                rng = self.opt_range()
                out = []
                while True:
                    ploc = self.tok.loc
                    name = self.ident()
                    self.expect("=")
                    out.append(A.ParamDecl(name, self.expr(), kw == "localparam", rng, loc=ploc))
                    if not self.accept(","):
                        break
                self.expect(";")
                return out
            if kw == "assign":
                self.i += 1
                if self.at("#"):
                    raise UnsupportedConstruct("delay on continuous assignment", self.tok.loc)
                out = []
                while True:
                    aloc = self.tok.loc
                    lhs = self.lvalue()
                    self.expect("=")
                    out.append(A.ContAssign(lhs, self.expr(), loc=aloc))
                    if not self.accept(","):
                        break
                self.expect(";")
                return out
            if kw == "always":
                self.i += 1
                if self.at("@"):
                    self.i += 1
                    if self.accept("*"):
                        sens = "comb"
                    else:
                        self.expect("(")
                        if self.accept("*"):
                            sens = "comb"
                        else:
                            sens = self.event_list()
                        self.expect(")")
                    return [A.Always(sens, self.stmt(), loc=t.loc)]
                return [A.Always(None, self.stmt(), loc=t.loc)]
            if kw == "initial":
                self.i += 1
                return [A.Initial(self.stmt(), loc=t.loc)]
            if kw == "function":
                return [self.function()]
            self.error(f"unexpected keyword {kw!r}")
        if t.kind == "ident":
            return [self.instance()]
        self.error(f"unexpected {t.text!r} in module body")

    def net_decl(self) -> A.NetDecl:
        t = self.tok
        kind = t.text
        self.i += 1
        self.check_unsupported()
        rng = self.opt_range()
        decls = []
        while True:
            dloc = self.tok.loc
            name = self.ident()
            arr = self.opt_range()
            if self.at("["):
                raise UnsupportedConstruct("array with more than one unpacked dimension", self.tok.loc)
            init = None
            if self.accept("="):
                init = self.expr()
            decls.append(A.VarDecl(name, arr, init, loc=dloc))
            if not self.accept(","):
                break
        self.expect(";")
        return A.NetDecl(kind, rng, decls, loc=t.loc)

    def function(self) -> A.Function:
        loc = self.expect("function").loc
        self.check_unsupported()
        rng = self.opt_range()
        name = self.ident()
        inputs: list[A.PortDecl] = []
        decls: list[A.NetDecl] = []
        if self.accept("("):
            while True:
                ploc = self.tok.loc
                if inputs and self.tok.kind == "ident":
                    inputs[-1].names.append(self.ident())
                else:
                    self.expect("input")
                    if self.at("wire") or self.at("reg"):
                        self.i += 1
                    prng = self.opt_range()
                    inputs.append(A.PortDecl("input", None, prng, [self.ident()], loc=ploc))
                if not self.accept(","):
                    break
            self.expect(")")
        self.expect(";")
        while self.at("input") or self.at("reg"):
            if self.at("input"):
                ploc = self.tok.loc
                self.i += 1
                if self.at("wire") or self.at("reg"):
                    self.i += 1
                prng = self.opt_range()
                names = [self.ident()]
                while self.accept(","):
                    names.append(self.ident())
                self.expect(";")
                inputs.append(A.PortDecl("input", None, prng, names, loc=ploc))
            else:
                decls.append(self.net_decl())
        body = self.stmt()
        self.expect("endfunction")
        return A.Function(name, rng, inputs, decls, body, loc=loc)

    def instance(self) -> A.Instance:
        loc = self.tok.loc
        mod = self.ident()
        params = []
        if self.accept("#"):
            self.expect("(")
            params = self.connections(allow_empty=False)
            self.expect(")")
        name = self.ident()
        self.expect("(")
        ports = self.connections(allow_empty=True)
        self.expect(")")
        self.expect(";")
        return A.Instance(mod, name, params, ports, loc=loc)

    def connections(self, allow_empty: bool) -> list:
        out = []
        if self.at(")"):
            return out
        while True:
            if self.accept("."):
                name = self.ident()
                self.expect("(")
                expr = None if self.at(")") else self.expr()
                if expr is None and not allow_empty:
                    self.error("empty parameter override")
                self.expect(")")
                out.append((name, expr))
            else:
                out.append((None, self.expr()))
            if not self.accept(","):
                break
        return out

    def event_list(self) -> list[A.Event]:
        events = []
        while True:
            loc = self.tok.loc
            edge = None
            if self.at("posedge") or self.at("negedge"):
                edge = self.tok.text
                self.i += 1
            events.append(A.Event(edge, self.expr(), loc=loc))
            if not (self.accept("or") or self.accept(",")):
                break
        return events

    # -- statements ------------------------------------------------------------
    def stmt(self):
        t = self.tok
        self.check_unsupported()
        if self.accept(";"):
            return None
        if t.kind == "keyword":
            kw = t.text
            if kw == "begin":
                self.i += 1
                name = None
                if self.accept(":"):
                    name = self.ident()
                stmts = []
                while not self.at("end"):
                    if self.tok.kind == "eof":
                        self.error("missing 'end'")
                    s = self.stmt()
                    if s is not None:
                        stmts.append(s)
                self.expect("end")
                return A.Block(stmts, name, loc=t.loc)
            if kw == "if":
                self.i += 1
                self.expect("(")
                cond = self.expr()
                self.expect(")")
                then = self.stmt()
                other = None
                if self.accept("else"):
                    other = self.stmt()
                return A.If(cond, then, other, loc=t.loc)
            if kw == "case":
                self.i += 1
                self.expect("(")
                sel = self.expr()
                self.expect(")")
                items = []
                while not self.accept("endcase"):
                    iloc = self.tok.loc
                    if self.accept("default"):
                        self.accept(":")
                        items.append(A.CaseItem(None, self.stmt(), loc=iloc))
                        continue
                    labels = [self.expr()]
                    while self.accept(","):
                        labels.append(self.expr())
                    self.expect(":")
                    items.append(A.CaseItem(labels, self.stmt(), loc=iloc))
                return A.Case(sel, items, loc=t.loc)
            if kw == "forever":
                self.i += 1
                return A.Forever(self.stmt(), loc=t.loc)
            if kw == "repeat":
                self.i += 1
                self.expect("(")
                count = self.expr()
                self.expect(")")
                return A.RepeatStmt(count, self.stmt(), loc=t.loc)
            self.error(f"unexpected keyword {kw!r} in statement")
        if self.accept("#"):
            amount = self.delay_value()
            return A.Delay(amount, self.stmt(), loc=t.loc)
        if self.accept("@"):
            if self.accept("*"):
                raise UnsupportedConstruct("@* inside a statement", t.loc)
            self.expect("(")
            events = self.event_list()
            self.expect(")")
            return A.EventWait(events, self.stmt(), loc=t.loc)
        if t.kind == "sysid":
            self.i += 1
            args = []
            if self.accept("("):
                if not self.at(")"):
                    args.append(self.sys_arg())
                    while self.accept(","):
                        args.append(self.sys_arg())
                self.expect(")")
            self.expect(";")
            return A.SysCall(t.text, args, loc=t.loc)
        lhs = self.lvalue()
        if self.accept("="):
            blocking = True
        elif self.accept("<="):
            blocking = False
        else:
            self.error(f"expected assignment, found {self.tok.text!r}")
        if self.at("#"):
            raise UnsupportedConstruct("intra-assignment delay", self.tok.loc)
        rhs = self.expr()
        self.expect(";")
        return A.Assign(lhs, rhs, blocking, loc=t.loc)

    def sys_arg(self):
        if self.tok.kind == "string":
            t = self.tok
            self.i += 1
            return A.String(t.text, loc=t.loc)
        return self.expr()

    def delay_value(self):
        t = self.tok
        if t.kind == "number":
            self.i += 1
            return A.Number(t.value, t.width, loc=t.loc)
        if t.kind == "ident":
            self.i += 1
            return A.Ident(t.text, loc=t.loc)
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        self.error("expected delay value")

    def lvalue(self):
        t = self.tok
        if self.at("{"):
            self.i += 1
            parts = [self.lvalue()]
            while self.accept(","):
                parts.append(self.lvalue())
            self.expect("}")
            return A.Concat(parts, loc=t.loc)
        base = A.Ident(self.ident(), loc=t.loc)
        return self.selects(base)

    # -- expressions -----------------------------------------------------------
    def expr(self):
        cond = self.binary(0)
        if self.at("?"):
            loc = self.tok.loc
            self.i += 1
            then = self.expr()
            self.expect(":")
            other = self.expr()
            return A.Ternary(cond, then, other, loc=loc)
        return cond

    def binary(self, level: int):
        if level == len(_BINARY_LEVELS):
            return self.unary()
        left = self.binary(level + 1)
        ops = _BINARY_LEVELS[level]
        while self.tok.kind == "op" and self.tok.text in ops:
            t = self.tok
            self.i += 1
            if t.text == "**":
                raise UnsupportedConstruct("power operator", t.loc)
            right = self.binary(level + 1)
            left = A.Binary(_NORMALIZE.get(t.text, t.text), left, right, loc=t.loc)
        if self.at("**"):
            raise UnsupportedConstruct("power operator", self.tok.loc)
        return left

    def unary(self):
        t = self.tok
        if t.kind == "op" and t.text in _UNARY:
            self.i += 1
            operand = self.unary()
            op = _NORMALIZE.get(t.text, t.text)
            if op == "+":
                return operand
            return A.Unary(op, operand, loc=t.loc)
        return self.primary()

    def primary(self):
        t = self.tok
        if t.kind == "number":
            self.i += 1
            return A.Number(t.value, t.width, loc=t.loc)
        if t.kind == "ident":
            self.i += 1
            if self.at("("):
                self.i += 1
                args = []
                if not self.at(")"):
                    args.append(self.expr())
                    while self.accept(","):
                        args.append(self.expr())
                self.expect(")")
                return A.Call(t.text, args, loc=t.loc)
            return self.selects(A.Ident(t.text, loc=t.loc))
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        if self.accept("{"):
            first = self.expr()
            if self.at("{"):
                self.i += 1
                parts = [self.expr()]
                while self.accept(","):
                    parts.append(self.expr())
                self.expect("}")
                self.expect("}")
                return A.Replicate(first, parts, loc=t.loc)
            parts = [first]
            while self.accept(","):
                parts.append(self.expr())
            self.expect("}")
            return A.Concat(parts, loc=t.loc)
        if t.kind == "sysid":
            if t.text in ("$time", "$stime"):
                self.i += 1
                return A.SysCall("$time", [], loc=t.loc)
            raise UnsupportedConstruct(f"system function {t.text}", t.loc)
        if t.kind == "string":
            raise UnsupportedConstruct("string literal in expression", t.loc)
        self.error(f"unexpected {t.text or 'end of input'!r} in expression")

    def selects(self, base):
        while self.at("["):
            loc = self.tok.loc
            self.i += 1
            first = self.expr()
            if self.accept(":"):
                lsb = self.expr()
                self.expect("]")
                base = A.PartSelect(base, first, lsb, loc=loc)
            elif self.accept("+:"):
                width = self.expr()
                self.expect("]")
                base = A.IndexedPart(base, first, width, loc=loc)
            elif self.at("-:"):
                raise UnsupportedConstruct("-: part select", self.tok.loc)
            else:
                self.expect("]")
                base = A.Index(base, first, loc=loc)
        return base


def parse_text(text: str, filename: str = "<input>") -> list[A.Module]:
    return Parser(tokenize(text, filename)).source()


def parse(source_unit: A.SourceUnit | list | str) -> list[A.Module]:
    """Parse every file of a source unit; also accepts a list of (path, text) or raw text."""
    if isinstance(source_unit, str):
        files = [("<input>", source_unit)]
    elif isinstance(source_unit, A.SourceUnit):
        files = source_unit.files
    else:
        files = list(source_unit)
    modules = []
    seen: dict[str, A.Module] = {}
    for path, text in files:
        for m in parse_text(text, path):
            if m.name in seen:
                raise VerilogSyntaxError(f"module {m.name!r} defined twice (first at {seen[m.name].loc})", m.loc)
            seen[m.name] = m
            modules.append(m)
    if isinstance(source_unit, A.SourceUnit):
        source_unit.modules = modules
    return modules


def load_source(paths) -> A.SourceUnit:
    files = []
    for p in paths:
        with open(p) as f:
            files.append((str(p), f.read()))
    unit = A.SourceUnit(files, [])
    parse(unit)
    return unit
