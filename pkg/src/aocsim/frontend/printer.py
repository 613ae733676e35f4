"""Render a syntax tree back to Verilog source.

Binary and ternary expressions are fully parenthesized so that reparsing
the output reproduces the same tree.
"""
from __future__ import annotations

from . import ast as A


def expr(e) -> str:
    if isinstance(e, A.Number):
        return f"{e.width}'h{e.value:x}" if e.width is not None else str(e.value)
    if isinstance(e, A.Ident):
        return e.name
    if isinstance(e, A.String):
        return '"' + e.value + '"'
    if isinstance(e, A.Index):
        return f"{expr(e.base)}[{expr(e.index)}]"
    if isinstance(e, A.PartSelect):
        return f"{expr(e.base)}[{expr(e.msb)}:{expr(e.lsb)}]"
    if isinstance(e, A.IndexedPart):
        return f"{expr(e.base)}[{expr(e.start)} +: {expr(e.width)}]"
    if isinstance(e, A.Unary):
        return f"{e.op}({expr(e.operand)})"
    if isinstance(e, A.Binary):
        return f"({expr(e.left)} {e.op} {expr(e.right)})"
    if isinstance(e, A.Ternary):
        return f"({expr(e.cond)} ? {expr(e.then)} : {expr(e.other)})"
    if isinstance(e, A.Concat):
        return "{" + ", ".join(expr(p) for p in e.parts) + "}"
    if isinstance(e, A.Replicate):
        return "{" + expr(e.count) + "{" + ", ".join(expr(p) for p in e.parts) + "}}"
    if isinstance(e, A.Call):
        return f"{e.name}(" + ", ".join(expr(a) for a in e.args) + ")"
    if isinstance(e, A.SysCall) and not e.args:
        return e.name
    raise TypeError(f"not an expression: {e!r}")


def _rng(r) -> str:
    return f"[{expr(r.msb)}:{expr(r.lsb)}] " if r is not None else ""


def _events(events) -> str:
    return " or ".join((f"{ev.edge} " if ev.edge else "") + expr(ev.expr) for ev in events)


def stmt(s, ind: str) -> list[str]:
    if s is None:
        return [ind + ";"]
    if isinstance(s, A.Block):
        head = ind + "begin" + (f" : {s.name}" if s.name else "")
        return [head] + [l for x in s.stmts for l in stmt(x, ind + "  ")] + [ind + "end"]
    if isinstance(s, A.Assign):
        return [f"{ind}{expr(s.lhs)} {'=' if s.blocking else '<='} {expr(s.rhs)};"]
    if isinstance(s, A.If):
        out = [f"{ind}if ({expr(s.cond)})"] + stmt(s.then, ind + "  ")
        if s.other is not None:
            out += [ind + "else"] + stmt(s.other, ind + "  ")
        return out
    if isinstance(s, A.Case):
        out = [f"{ind}case ({expr(s.expr)})"]
        for item in s.items:
            label = "default" if item.labels is None else ", ".join(expr(x) for x in item.labels)
            out += [f"{ind}  {label}:"] + stmt(item.body, ind + "    ")
        return out + [ind + "endcase"]
    if isinstance(s, A.Delay):
        return [f"{ind}#({expr(s.amount)})"] + stmt(s.stmt, ind + "  ")
    if isinstance(s, A.EventWait):
        return [f"{ind}@({_events(s.events)})"] + stmt(s.stmt, ind + "  ")
    if isinstance(s, A.Forever):
        return [ind + "forever"] + stmt(s.body, ind + "  ")
    if isinstance(s, A.RepeatStmt):
        return [f"{ind}repeat ({expr(s.count)})"] + stmt(s.body, ind + "  ")
    if isinstance(s, A.SysCall):
        args = "(" + ", ".join(expr(a) for a in s.args) + ")" if s.args else ""
        return [f"{ind}{s.name}{args};"]
    raise TypeError(f"not a statement: {s!r}")


def item(it, ind="  ") -> list[str]:
    if isinstance(it, A.PortDecl):
        net = f"{it.net} " if it.net else ""
        return [f"{ind}{it.direction} {net}{_rng(it.range)}{', '.join(it.names)};"]
    if isinstance(it, A.NetDecl):
        parts = []
        for d in it.decls:
            p = d.name + (" " + _rng(d.array).strip() if d.array is not None else "")
            if d.init is not None:
                p += f" = {expr(d.init)}"
            parts.append(p)
        return [f"{ind}{it.kind} {_rng(it.range)}{', '.join(parts)};"]
    if isinstance(it, A.ParamDecl):
        kw = "localparam" if it.local else "parameter"
        return [f"{ind}{kw} {_rng(it.range)}{it.name} = {expr(it.value)};"]
    if isinstance(it, A.ContAssign):
        return [f"{ind}assign {expr(it.lhs)} = {expr(it.rhs)};"]
    if isinstance(it, A.Always):
        if it.sens == "comb":
            head = f"{ind}always @*"
        elif it.sens is None:
            head = f"{ind}always"
        else:
            head = f"{ind}always @({_events(it.sens)})"
        return [head] + stmt(it.body, ind + "  ")
    if isinstance(it, A.Initial):
        return [ind + "initial"] + stmt(it.body, ind + "  ")
    if isinstance(it, A.Instance):
        head = f"{ind}{it.module} "
        if it.params:
            head += "#(" + ", ".join(_conn(c) for c in it.params) + ") "
        return [head + f"{it.name} (" + ", ".join(_conn(c) for c in it.ports) + ");"]
    if isinstance(it, A.Function):
        args = ", ".join(f"input {_rng(p.range)}{', '.join(p.names)}" for p in it.inputs)
        out = [f"{ind}function {_rng(it.range)}{it.name}({args});"]
        for d in it.decls:
            out += item(d, ind + "  ")
        return out + stmt(it.body, ind + "  ") + [ind + "endfunction"]
    raise TypeError(f"not a module item: {it!r}")


def _conn(c) -> str:
    name, e = c
    val = "" if e is None else expr(e)
    return f".{name}({val})" if name is not None else val


def module(m: A.Module) -> str:
    head = f"module {m.name}"
    if m.params:
        head += " #(" + ", ".join(
            f"{'localparam' if p.local else 'parameter'} {_rng(p.range)}{p.name} = {expr(p.value)}"
            for p in m.params) + ")"
    if m.ansi:
        ports = []
        for p in m.ports:
            net = f"{p.net} " if p.net else ""
            ports.append(f"{p.direction} {net}{_rng(p.range)}{', '.join(p.names)}")
        head += " (" + ", ".join(ports) + ")"
    else:
        head += " (" + ", ".join(m.ports) + ")"
    lines = [head + ";"]
    for it in m.items:
        lines += item(it)
    lines.append("endmodule")
    return "\n".join(lines) + "\n"


def source(modules) -> str:
    return "\n".join(module(m) for m in modules)
