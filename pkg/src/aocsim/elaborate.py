"""Elaboration: syntax tree -> flat design graph.

Expands the instance hierarchy with parameter passing, inlines functions,
resolves blocking-assign chains of combinational blocks into versioned
wires, and turns clocked blocks into registers whose data input is a
``<name>_next`` pseudo-wire.  Widths follow Verilog's unsigned sizing
rules: context-determined operands take the widest of operands and target.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from . import ops
from .errors import (
    DanglingReference, ElaborationError, MultiDriver, RecursiveInstantiation,
    UnresolvedParameter, UnsupportedConstruct,
)
from .frontend import ast as A
from .ir import Const, Element, FlatDesign, RegisterInfo, Signal

_ARITH = {"+": "add", "-": "sub", "*": "mul", "/": "div", "%": "mod",
          "&": "and", "|": "or", "^": "xor", "~^": "xnor"}
_COMPARE = {"==": "eq", "!=": "ne", "<": "lt", "<=": "le", ">": "gt", ">=": "ge"}
_LOGICAL = {"&&": "land", "||": "lor"}
_SHIFT = {"<<": "shl", ">>": "shr"}
_REDUCE = {"&": "rand", "|": "ror", "^": "rxor", "~&": "rnand", "~|": "rnor", "~^": "rxnor"}


@dataclass
class Net:
    name: str
    sid: int
    width: int
    lsb: int = 0
    mem_lo: int | None = None  # lowest address for memories
    depth: int = 1
    direction: str | None = None

    @property
    def is_mem(self):
        return self.mem_lo is not None

    @property
    def word(self):
        return self.width // self.depth


@dataclass
class Scope:
    module: A.Module
    path: tuple
    params: dict = field(default_factory=dict)
    nets: dict = field(default_factory=dict)
    functions: dict = field(default_factory=dict)


class _Frame:
    """Variable bindings of one symbolic-execution context."""

    def __init__(self, scope: Scope, env: dict | None = None, locals_: dict | None = None,
                 clocked: bool = False):
        self.scope = scope
        self.env = env if env is not None else {}
        self.locals = locals_ or {}  # function-local name -> width
        self.clocked = clocked

    def fork(self):
        return _Frame(self.scope, dict(self.env), self.locals, self.clocked)


def const_eval(e, params: dict) -> int:
    if isinstance(e, A.Number):
        return e.value
    if isinstance(e, A.Ident):
        if e.name in params:
            return params[e.name]
        raise UnresolvedParameter(e.name, e.loc)
    if isinstance(e, A.Unary):
        v = const_eval(e.operand, params)
        if e.op == "-":
            return -v
        if e.op == "~":
            return ~v
        if e.op == "!":
            return int(v == 0)
        raise UnresolvedParameter(f"reduction {e.op}", e.loc)
    if isinstance(e, A.Binary):
        a, b = const_eval(e.left, params), const_eval(e.right, params)
        op = e.op
        if op in ("/", "%") and b == 0:
            raise ElaborationError("division by constant zero", e.loc)
        table = {
            "+": lambda: a + b, "-": lambda: a - b, "*": lambda: a * b,
            "/": lambda: a // b, "%": lambda: a % b, "&": lambda: a & b,
            "|": lambda: a | b, "^": lambda: a ^ b, "<<": lambda: a << b,
            ">>": lambda: a >> b, "==": lambda: int(a == b), "!=": lambda: int(a != b),
            "<": lambda: int(a < b), "<=": lambda: int(a <= b), ">": lambda: int(a > b),
            ">=": lambda: int(a >= b), "&&": lambda: int(bool(a) and bool(b)),
            "||": lambda: int(bool(a) or bool(b)),
        }
        if op not in table:
            raise UnresolvedParameter(f"operator {op}", e.loc)
        return table[op]()
    if isinstance(e, A.Ternary):
        return const_eval(e.then if const_eval(e.cond, params) else e.other, params)
    raise UnresolvedParameter(type(e).__name__, getattr(e, "loc", None))


def _lvalue_names(s, out: set):
    if s is None:
        return
    if isinstance(s, A.Block):
        for x in s.stmts:
            _lvalue_names(x, out)
    elif isinstance(s, A.Assign):
        _target_names(s.lhs, out)
    elif isinstance(s, A.If):
        _lvalue_names(s.then, out)
        _lvalue_names(s.other, out)
    elif isinstance(s, A.Case):
        for it in s.items:
            _lvalue_names(it.body, out)


def _target_names(lhs, out: set):
    if isinstance(lhs, A.Concat):
        for p in lhs.parts:
            _target_names(p, out)
    elif isinstance(lhs, A.Ident):
        out.add(lhs.name)
    elif isinstance(lhs, (A.Index, A.PartSelect, A.IndexedPart)):
        _target_names(lhs.base, out)


def clock_event(always: A.Always):
    """Return (edge, clock Ident) for a clocked always block, else None."""
    if not isinstance(always.sens, list):
        return None
    edges = [ev for ev in always.sens if ev.edge is not None]
    if not edges:
        return None
    if len(always.sens) != 1:
        raise UnsupportedConstruct("multiple events in a clocked block", always.loc,
                                   "asynchronous set/reset is outside the subset")
    ev = always.sens[0]
    if not isinstance(ev.expr, A.Ident):
        raise UnsupportedConstruct("clock expression", ev.loc, "clock must be a plain identifier")
    return ev.edge, ev.expr


class Elaborator:
    def __init__(self, modules: list[A.Module], top: str):
        self.modules = {m.name: m for m in modules}
        if top not in self.modules:
            raise ElaborationError(f"top module {top!r} not found")
        self.top = top
        self.design = FlatDesign(top)
        self.names: set[str] = set()
        self.readers: dict[int, int] = {}
        self.driver_loc: dict[int, object] = {}
        self.temps: set[int] = set()
        self.versions: set[int] = set()
        self.call_stack: list[str] = []
        self._sid = 0
        self._tmp = 0
        self.driver_el: dict[int, Element] = {}
        self._vcount: dict = {}
        self._eid = 0

    # -- graph construction --------------------------------------------------
    def new_signal(self, scope_path: tuple, base: str, kind: str, width: int, **kw) -> int:
        name = "_".join((self.top,) + scope_path + (base,))
        if name in self.names:
            k = 1
            while f"{name}__{k}" in self.names:
                k += 1
            name = f"{name}__{k}"
        self.names.add(name)
        sid = self._sid
        self._sid += 1
        self.design.signals[sid] = Signal(sid, name, kind, width, scope=scope_path, **kw)
        self.readers[sid] = 0
        return sid

    def add_element(self, op, inputs, out, params=None):
        eid = self._eid
        self._eid += 1
        el = Element(eid, op, list(inputs), out, dict(params or {}))
        self.design.elements[eid] = el
        self.driver_el[out] = el
        for x in inputs:
            if not isinstance(x, Const):
                self.readers[x] += 1
        return eid

    def emit(self, scope: Scope, op, inputs, width, params=None):
        self._tmp += 1
        sid = self.new_signal(scope.path, f"n{self._tmp}", "wire", width)
        self.temps.add(sid)
        self.add_element(op, inputs, sid, params)
        return sid

    def _retarget(self, src, target):
        el = self.driver_el.pop(src)
        el.output = target
        self.driver_el[target] = el
        del self.design.signals[src]

    def drive(self, target: int, value, loc=None, check=True):
        """Make ``target`` carry ``value``; reuses an unread temp's element."""
        if check:
            if target in self.driver_loc:
                raise MultiDriver(self.design.signals[target].name, loc)
            self.driver_loc[target] = loc
        tw = self.design.signals[target].width
        if (not isinstance(value, Const) and value in self.temps and self.readers[value] == 0
                and self.design.signals[value].width == tw):
            self._retarget(value, target)
            self.temps.discard(value)
            return
        self.add_element("buf", [value], target)

    # -- modules ----------------------------------------------------------------
    def run(self, overrides: dict | None = None) -> FlatDesign:
        self.instantiate(self.modules[self.top], (), overrides or {}, {}, None, [self.top])
        self._fixups()
        self.design.validate()
        return self.design

    def instantiate(self, mod: A.Module, path: tuple, overrides: dict, bindings: dict,
                    bind_scope, stack: list) -> Scope:
        scope = Scope(mod, path)
        is_top = not path
        # parameters
        header_names = [p.name for p in mod.params if not p.local]
        body_params = [it for it in mod.items if isinstance(it, A.ParamDecl)]
        positional = overrides.pop("__positional__", [])
        targets = header_names or [p.name for p in body_params if not p.local]
        for name, val in zip(targets, positional):
            overrides[name] = val
        for p in list(mod.params) + body_params:
            if p.name in overrides and not p.local:
                v = overrides.pop(p.name)
            else:
                v = const_eval(p.value, scope.params)
            if p.range is not None:
                w = const_eval(p.range.msb, scope.params) - const_eval(p.range.lsb, scope.params) + 1
                v &= ops.mask(w)
            scope.params[p.name] = v
        if overrides:
            raise ElaborationError(f"module {mod.name!r} has no parameter(s) {sorted(overrides)}", mod.loc)
        for it in mod.items:
            if isinstance(it, A.Function):
                scope.functions[it.name] = it
        # ports and declarations
        port_decl: dict[str, tuple] = {}
        port_order: list[str] = []
        if mod.ansi:
            for pd in mod.ports:
                for n in pd.names:
                    port_decl[n] = (pd.direction, pd.range, pd.loc)
                    port_order.append(n)
        else:
            port_order = list(mod.ports)
            for it in mod.items:
                if isinstance(it, A.PortDecl):
                    for n in it.names:
                        if n not in port_order:
                            raise ElaborationError(f"{n!r} is not in the port list", it.loc)
                        port_decl[n] = (it.direction, it.range, it.loc)
            for n in port_order:
                if n not in port_decl:
                    raise ElaborationError(f"port {n!r} has no direction", mod.loc)
        decls: dict[str, tuple] = {}
        for it in mod.items:
            if isinstance(it, A.NetDecl):
                for d in it.decls:
                    if d.name in decls:
                        raise ElaborationError(f"{d.name!r} declared twice", d.loc)
                    decls[d.name] = (it.range, d, it.loc)
        clocked_names: set[str] = set()
        for it in mod.items:
            if isinstance(it, A.Always) and clock_event(it) is not None:
                _lvalue_names(it.body, clocked_names)
        for n in port_order:
            direction, rng, loc = port_decl[n]
            if rng is None and n in decls:
                rng = decls[n][0]
            width, lsb, dims = self.range_width(rng, scope)
            if direction == "input":
                kind = "input" if is_top else "wire"
                if n in clocked_names:
                    raise ElaborationError(f"input {n!r} assigned in a clocked block", loc)
            elif n in clocked_names:
                kind = "register"
            else:
                kind = "output" if is_top else "wire"
            init = 0
            if n in decls and decls[n][1].init is not None:
                init = const_eval(decls[n][1].init, scope.params) & ops.mask(width)
            sid = self.new_signal(path, n, kind, width, dims=dims, init=init,
                                  output=is_top and kind == "register")
            scope.nets[n] = Net(n, sid, width, lsb, direction=direction)
        for n, (rng, d, loc) in decls.items():
            if n in scope.nets:
                continue
            width, lsb, dims = self.range_width(rng, scope)
            depth, mem_lo = 1, None
            if d.array is not None:
                a, b = const_eval(d.array.msb, scope.params), const_eval(d.array.lsb, scope.params)
                depth, mem_lo = abs(a - b) + 1, min(a, b)
                dims = 2
            kind = "register" if n in clocked_names else "wire"
            init = 0
            if d.init is not None and kind == "register":
                init = const_eval(d.init, scope.params) & ops.mask(width)
            sid = self.new_signal(path, n, kind, width * depth, dims=dims, depth=depth, init=init)
            scope.nets[n] = Net(n, sid, width * depth, lsb, mem_lo, depth)
        for n in clocked_names:
            if n not in scope.nets:
                raise DanglingReference(n, f"undeclared register in module {mod.name}")
        # input port bindings from the parent
        if not is_top:
            for n in port_order:
                net = scope.nets[n]
                if net.direction == "input":
                    expr = bindings.get(n)
                    if expr is None:
                        raise ElaborationError(f"input port {'.'.join(path)}.{n} is unconnected", mod.loc)
                    val = self.lower(expr, net.width, _Frame(bind_scope))
                    self.drive(net.sid, val, expr.loc)
        # items
        for it in mod.items:
            if isinstance(it, A.ContAssign):
                frame = _Frame(scope)
                val = self.lower(it.rhs, self.lvalue_width(it.lhs, scope), frame)
                self.assign_lvalue(it.lhs, val, frame, it.loc)
            elif isinstance(it, A.NetDecl):
                for d in it.decls:
                    if d.init is not None and self.design.signals[scope.nets[d.name].sid].kind == "wire":
                        net = scope.nets[d.name]
                        self.drive(net.sid, self.lower(d.init, net.width, _Frame(scope)), d.loc)
            elif isinstance(it, A.Always):
                self.always(it, scope)
            elif isinstance(it, A.Initial):
                raise UnsupportedConstruct("initial block in synthesizable module", it.loc)
            elif isinstance(it, A.Instance):
                self.instance(it, scope, stack)
        return scope

    def range_width(self, rng, scope):
        if rng is None:
            return 1, 0, 0
        msb, lsb = const_eval(rng.msb, scope.params), const_eval(rng.lsb, scope.params)
        if msb < lsb:
            raise UnsupportedConstruct("ascending bit range", rng.loc)
        return msb - lsb + 1, lsb, 1

    def instance(self, inst: A.Instance, scope: Scope, stack: list):
        if inst.module not in self.modules:
            raise ElaborationError(f"unknown module {inst.module!r}", inst.loc)
        if inst.module in stack:
            raise RecursiveInstantiation(stack[stack.index(inst.module):] + [inst.module], inst.loc)
        child = self.modules[inst.module]
        overrides: dict = {}
        positional = []
        for name, e in inst.params:
            v = const_eval(e, scope.params)
            if name is None:
                positional.append(v)
            else:
                overrides[name] = v
        if positional:
            overrides["__positional__"] = positional
        if child.ansi:
            order = [n for pd in child.ports for n in pd.names]
        else:
            order = list(child.ports)
        bindings: dict = {}
        for k, (name, e) in enumerate(inst.ports):
            if name is None:
                if k >= len(order):
                    raise ElaborationError(f"too many port connections for {inst.module}", inst.loc)
                name = order[k]
            elif name not in order:
                raise ElaborationError(f"module {inst.module!r} has no port {name!r}", inst.loc)
            bindings[name] = e
        cscope = self.instantiate(child, scope.path + (inst.name,), overrides, bindings, scope,
                                  stack + [inst.module])
        for name, e in bindings.items():
            net = cscope.nets[name]
            if net.direction == "output" and e is not None:
                self.assign_lvalue(e, net.sid, _Frame(scope), e.loc)

    # -- always blocks ----------------------------------------------------------
    def always(self, it: A.Always, scope: Scope):
        ce = clock_event(it)
        if it.sens is None:
            raise UnsupportedConstruct("always block without sensitivity", it.loc,
                                       "timing controls belong in testbench processes")
        if ce is None:
            frame = _Frame(scope)
            self.exec_stmt(it.body, frame)
            for name, val in frame.env.items():
                net = scope.nets[name]
                self.finish_version(net.sid, val, it.loc)
            return
        edge, clk = ce
        if clk.name not in scope.nets:
            raise DanglingReference(clk.name, "clock")
        clock_sid = scope.nets[clk.name].sid
        frame = _Frame(scope, clocked=True)
        self.exec_stmt(it.body, frame)
        for name, val in frame.env.items():
            net = scope.nets[name]
            if net.sid in self.design.registers:
                raise MultiDriver(self.design.signals[net.sid].name, it.loc)
            if net.sid in self.driver_loc:
                raise MultiDriver(self.design.signals[net.sid].name, it.loc)
            d = self.new_signal(scope.path, name + "_next", "wire", net.width)
            self.drive(d, val, it.loc)
            self.design.registers[net.sid] = RegisterInfo(net.sid, clock_sid, edge, d)

    def finish_version(self, target, val, loc):
        if target in self.driver_loc:
            raise MultiDriver(self.design.signals[target].name, loc)
        self.driver_loc[target] = loc
        tw = self.design.signals[target].width
        if (not isinstance(val, Const) and val in self.versions and self.readers[val] == 0
                and self.design.signals[val].width == tw):
            self._retarget(val, target)
            self.versions.discard(val)
            return
        self.add_element("buf", [val], target)

    def exec_stmt(self, s, frame: _Frame):
        if s is None:
            return
        if isinstance(s, A.Block):
            for x in s.stmts:
                self.exec_stmt(x, frame)
        elif isinstance(s, A.Assign):
            if frame.clocked and s.blocking:
                raise UnsupportedConstruct("blocking assignment in clocked block", s.loc)
            if not frame.clocked and not s.blocking:
                raise UnsupportedConstruct("nonblocking assignment in combinational block", s.loc)
            width = self.lvalue_width(s.lhs, frame.scope, frame)
            val = self.lower(s.rhs, width, frame)
            self.assign_var(s.lhs, val, frame, s.loc)
        elif isinstance(s, A.If):
            cond = self.lower(s.cond, 0, frame)
            ft, ff = frame.fork(), frame.fork()
            self.exec_stmt(s.then, ft)
            self.exec_stmt(s.other, ff)
            self.merge(frame, [ft, ff], lambda vals, w: self.emit(frame.scope, "mux", [cond] + vals, w), s.loc)
        elif isinstance(s, A.Case):
            self.exec_case(s, frame)
        elif isinstance(s, (A.Delay, A.EventWait)):
            raise UnsupportedConstruct("timing control in synthesizable block", s.loc)
        elif isinstance(s, A.SysCall):
            raise UnsupportedConstruct(f"system task {s.name} in synthesizable block", s.loc)
        else:
            raise UnsupportedConstruct(type(s).__name__, s.loc)

    def exec_case(self, s: A.Case, frame: _Frame):
        scope = frame.scope
        label_exprs = [x for it in s.items if it.labels for x in it.labels]
        w = max([self.self_width(s.expr, frame)] + [self.self_width(x, frame) for x in label_exprs])
        sel = self.lower(s.expr, w, frame)
        arms, labels, default = [], [], None
        for it in s.items:
            f = frame.fork()
            self.exec_stmt(it.body, f)
            if it.labels is None:
                if default is not None:
                    raise ElaborationError("case with two default items", it.loc)
                default = f
            else:
                labels.append(frozenset(const_eval(x, scope.params) & ops.mask(w) for x in it.labels))
                arms.append(f)
        if default is None:
            covered = set().union(*labels) if labels else set()
            if w <= 16 and len(covered) == 1 << w and arms:
                default = arms[-1]
            else:
                default = frame.fork()
        if not arms:
            frame.env = default.env
            return
        self.merge(frame, arms + [default],
                   lambda vals, width: self.emit(scope, "case", [sel] + vals, width, {"labels": labels}), s.loc)

    def merge(self, frame: _Frame, branches: list, build, loc):
        names = []
        for b in branches:
            for n in b.env:
                if n not in names:
                    names.append(n)
        for n in names:
            vals = []
            for b in branches:
                v = b.env.get(n, frame.env.get(n))
                if v is None:
                    if frame.clocked:
                        v = frame.scope.nets[n].sid
                    else:
                        raise ElaborationError(f"latch inferred for {n!r}: not assigned on every path", loc)
                vals.append(v)
            if all(v == vals[0] for v in vals):
                frame.env[n] = vals[0]
                continue
            width = self.var_width(n, frame)
            frame.env[n] = build(vals, width)

    def var_width(self, name, frame):
        if name in frame.locals:
            return frame.locals[name]
        return frame.scope.nets[name].width

    # -- assignments -------------------------------------------------------------
    def lvalue_width(self, lhs, scope, frame=None):
        frame = frame or _Frame(scope)
        if isinstance(lhs, A.Concat):
            return sum(self.lvalue_width(p, scope, frame) for p in lhs.parts)
        return self.self_width(lhs, frame)

    def assign_lvalue(self, lhs, val, frame: _Frame, loc):
        """Continuous assignment of ``val`` to a whole-net lvalue."""
        if isinstance(lhs, A.Concat):
            widths = [self.lvalue_width(p, frame.scope, frame) for p in lhs.parts]
            lo = sum(widths)
            for p, w in zip(lhs.parts, widths):
                lo -= w
                part = self.emit(frame.scope, "slice", [val], w, {"lo": lo})
                self.assign_lvalue(p, part, frame, loc)
            return
        if not isinstance(lhs, A.Ident):
            raise UnsupportedConstruct("partial continuous assignment", loc, "assign whole nets only")
        net = frame.scope.nets.get(lhs.name)
        if net is None:
            raise DanglingReference(lhs.name, f"at {loc}")
        kind = self.design.signals[net.sid].kind
        if kind in ("input", "register"):
            raise MultiDriver(self.design.signals[net.sid].name, loc)
        self.drive(net.sid, val, loc)

    def current(self, name, frame: _Frame):
        """Value a procedural read of ``name`` sees."""
        if not frame.clocked and name in frame.env:
            return frame.env[name]
        if name in frame.locals:
            if name in frame.env:
                return frame.env[name]
            raise ElaborationError(f"function variable {name!r} read before assignment")
        net = frame.scope.nets.get(name)
        if net is None:
            if name in frame.scope.params:
                return None
            raise DanglingReference(name, f"in module {frame.scope.module.name}")
        return net.sid

    def assign_var(self, lhs, val, frame: _Frame, loc):
        scope = frame.scope
        if isinstance(lhs, A.Concat):
            widths = [self.lvalue_width(p, scope, frame) for p in lhs.parts]
            lo = sum(widths)
            for p, w in zip(lhs.parts, widths):
                lo -= w
                self.assign_var(p, self.emit(scope, "slice", [val], w, {"lo": lo}), frame, loc)
            return
        base = lhs
        while not isinstance(base, A.Ident):
            base = base.base
        name = base.name
        if name not in frame.locals:
            net = scope.nets.get(name)
            if net is None:
                raise DanglingReference(name, f"at {loc}")
            kind = self.design.signals[net.sid].kind
            if frame.clocked and kind != "register" or kind == "input":
                raise ElaborationError(f"cannot assign {name!r} here", loc)
        width = self.var_width(name, frame)
        if isinstance(lhs, A.Ident):
            new = val
        else:
            if frame.clocked:
                old = frame.env.get(name, scope.nets[name].sid)
            else:
                old = frame.env.get(name)
                if old is None:
                    raise ElaborationError(f"latch inferred for {name!r}: partial assignment without a full prior assignment", loc)
            new = self.insert(lhs, old, val, width, frame, loc)
        if frame.clocked:
            frame.env[name] = new
        else:
            vid = self.new_signal(scope.path, f"{name}_v{self._version(name, scope)}", "wire", width)
            self.versions.add(vid)
            self.drive(vid, new, loc, check=False)
            frame.env[name] = vid

    def _version(self, name, scope):
        key = (scope.path, name)
        self._vcount[key] = self._vcount.get(key, 0) + 1
        return self._vcount[key]

    def insert(self, lhs, old, val, width, frame, loc):
        scope = frame.scope
        base_name = lhs.base.name if isinstance(lhs.base, A.Ident) else None
        if base_name is None:
            raise UnsupportedConstruct("nested select on the left-hand side", loc)
        net = scope.nets.get(base_name)
        lsb = net.lsb if net and not net.is_mem else 0
        if isinstance(lhs, A.Index):
            if net is not None and net.is_mem:
                elem, offset = net.word, net.mem_lo
            else:
                elem, offset = 1, lsb
            idx = self.lower(lhs.index, 0, frame)
            if isinstance(idx, Const):
                pos = idx.value - offset
                if not 0 <= pos < width // elem:
                    return old
                return self._splice(scope, old, val, pos * elem, elem, width)
            if offset:
                idx = self.emit(scope, "sub", [idx, Const(offset, 32)], max(32, self.operand_width(idx)))
            return self.emit(scope, "demux", [old, idx, val], width, {"elem": elem})
        if isinstance(lhs, A.PartSelect):
            msb, lo = const_eval(lhs.msb, scope.params), const_eval(lhs.lsb, scope.params)
            return self._splice(scope, old, val, lo - lsb, msb - lo + 1, width)
        raise UnsupportedConstruct("indexed part-select on the left-hand side", loc)

    def _splice(self, scope, old, val, lo, w, width):
        parts = []
        if lo + w < width:
            parts.append(self.emit(scope, "slice", [old], width - lo - w, {"lo": lo + w}))
        parts.append(val if self.operand_width(val) == w else self.emit(scope, "buf", [val], w))
        if lo > 0:
            parts.append(self.emit(scope, "slice", [old], lo, {"lo": 0}))
        if len(parts) == 1:
            return parts[0]
        return self.emit(scope, "concat", parts, width)

    # -- expressions -------------------------------------------------------------
    def operand_width(self, x):
        return x.width if isinstance(x, Const) else self.design.signals[x].width

    def self_width(self, e, frame: _Frame) -> int:
        scope = frame.scope
        if isinstance(e, A.Number):
            return e.width or 32
        if isinstance(e, A.Ident):
            if e.name in frame.locals:
                return frame.locals[e.name]
            if e.name in scope.nets:
                return scope.nets[e.name].width
            if e.name in scope.params:
                return max(32, scope.params[e.name].bit_length())
            raise DanglingReference(e.name, f"at {e.loc}")
        if isinstance(e, A.Index):
            if isinstance(e.base, A.Ident) and e.base.name in scope.nets and scope.nets[e.base.name].is_mem:
                return scope.nets[e.base.name].word
            return 1
        if isinstance(e, A.PartSelect):
            return const_eval(e.msb, scope.params) - const_eval(e.lsb, scope.params) + 1
        if isinstance(e, A.IndexedPart):
            return const_eval(e.width, scope.params)
        if isinstance(e, A.Unary):
            return self.self_width(e.operand, frame) if e.op in ("~", "-") else 1
        if isinstance(e, A.Binary):
            if e.op in _ARITH:
                return max(self.self_width(e.left, frame), self.self_width(e.right, frame))
            if e.op in _SHIFT:
                return self.self_width(e.left, frame)
            return 1
        if isinstance(e, A.Ternary):
            return max(self.self_width(e.then, frame), self.self_width(e.other, frame))
        if isinstance(e, A.Concat):
            return sum(self.self_width(p, frame) for p in e.parts)
        if isinstance(e, A.Replicate):
            return const_eval(e.count, scope.params) * sum(self.self_width(p, frame) for p in e.parts)
        if isinstance(e, A.Call):
            f = scope.functions.get(e.name)
            if f is None:
                raise DanglingReference(e.name, f"unknown function at {e.loc}")
            return self.range_width(f.range, scope)[0]
        raise UnsupportedConstruct(type(e).__name__, getattr(e, "loc", None))

    def lower(self, e, ctx: int, frame: _Frame):
        scope = frame.scope
        W = max(self.self_width(e, frame), ctx)
        if isinstance(e, A.Number):
            return Const(e.value, W)
        if isinstance(e, A.Ident):
            v = self.current(e.name, frame)
            if v is None:
                return Const(scope.params[e.name], W)
            return v
        if isinstance(e, A.Unary):
            if e.op == "~":
                return self.emit(scope, "not", [self.lower(e.operand, W, frame)], W)
            if e.op == "-":
                return self.emit(scope, "neg", [self.lower(e.operand, W, frame)], W)
            if e.op == "!":
                return self.emit(scope, "lnot", [self.lower(e.operand, 0, frame)], 1)
            return self.emit(scope, _REDUCE[e.op], [self.lower(e.operand, 0, frame)], 1)
        if isinstance(e, A.Binary):
            if e.op in _ARITH:
                a, b = self.lower(e.left, W, frame), self.lower(e.right, W, frame)
                if e.op in ("/", "%") and isinstance(b, Const) and b.value == 0:
                    raise ElaborationError("division by constant zero", e.loc)
                return self.emit(scope, _ARITH[e.op], [a, b], W)
            if e.op in _COMPARE:
                w2 = max(self.self_width(e.left, frame), self.self_width(e.right, frame))
                a, b = self.lower(e.left, w2, frame), self.lower(e.right, w2, frame)
                return self.emit(scope, _COMPARE[e.op], [a, b], 1)
            if e.op in _LOGICAL:
                a, b = self.lower(e.left, 0, frame), self.lower(e.right, 0, frame)
                return self.emit(scope, _LOGICAL[e.op], [a, b], 1)
            if e.op in _SHIFT:
                a, b = self.lower(e.left, W, frame), self.lower(e.right, 0, frame)
                return self.emit(scope, _SHIFT[e.op], [a, b], W)
            raise UnsupportedConstruct(f"operator {e.op}", e.loc)
        if isinstance(e, A.Ternary):
            c = self.lower(e.cond, 0, frame)
            return self.emit(scope, "mux", [c, self.lower(e.then, W, frame), self.lower(e.other, W, frame)], W)
        if isinstance(e, A.Concat):
            parts = [self.lower(p, 0, frame) for p in e.parts]
            return self.emit(scope, "concat", parts, sum(self.operand_width(p) for p in parts))
        if isinstance(e, A.Replicate):
            n = const_eval(e.count, scope.params)
            if n < 1:
                raise ElaborationError("replication count must be positive", e.loc)
            parts = [self.lower(p, 0, frame) for p in e.parts] * n
            return self.emit(scope, "concat", parts, sum(self.operand_width(p) for p in parts))
        if isinstance(e, A.Index):
            return self.lower_index(e, frame)
        if isinstance(e, A.PartSelect):
            msb, lo = const_eval(e.msb, scope.params), const_eval(e.lsb, scope.params)
            if msb < lo:
                raise UnsupportedConstruct("reversed part-select", e.loc)
            base, lsb = self.select_base(e.base, frame)
            return self.emit(scope, "slice", [base], msb - lo + 1, {"lo": lo - lsb})
        if isinstance(e, A.IndexedPart):
            w = const_eval(e.width, scope.params)
            base, lsb = self.select_base(e.base, frame)
            start = self.lower(e.start, 0, frame)
            if isinstance(start, Const):
                return self.emit(scope, "slice", [base], w, {"lo": start.value - lsb})
            if lsb:
                start = self.emit(scope, "sub", [start, Const(lsb, 32)], max(32, self.operand_width(start)))
            shifted = self.emit(scope, "shr", [base, start], self.operand_width(base))
            return self.emit(scope, "slice", [shifted], w, {"lo": 0})
        if isinstance(e, A.Call):
            return self.call(e, frame)
        raise UnsupportedConstruct(type(e).__name__, getattr(e, "loc", None))

    def select_base(self, b, frame):
        if isinstance(b, A.Ident):
            net = frame.scope.nets.get(b.name)
            if net is not None and net.is_mem:
                raise UnsupportedConstruct("part-select of a whole memory", b.loc)
            lsb = net.lsb if net is not None and b.name not in frame.locals else 0
            return self.lower(b, 0, frame), lsb
        return self.lower(b, 0, frame), 0

    def lower_index(self, e: A.Index, frame):
        scope = frame.scope
        if isinstance(e.base, A.Ident) and e.base.name in scope.nets and scope.nets[e.base.name].is_mem \
                and e.base.name not in frame.locals:
            net = scope.nets[e.base.name]
            base, elem, offset = self.lower(e.base, 0, frame), net.word, net.mem_lo
        else:
            base, offset = self.select_base(e.base, frame)
            elem = 1
        idx = self.lower(e.index, 0, frame)
        bw = self.operand_width(base)
        if isinstance(idx, Const):
            pos = idx.value - offset
            if not 0 <= pos < bw // elem:
                return Const(0, elem)
            return self.emit(scope, "slice", [base], elem, {"lo": pos * elem})
        if offset:
            idx = self.emit(scope, "sub", [idx, Const(offset, 32)], max(32, self.operand_width(idx)))
        return self.emit(scope, "index", [base, idx], elem, {"elem": elem})

    def call(self, e: A.Call, frame: _Frame):
        scope = frame.scope
        f = scope.functions.get(e.name)
        if f is None:
            raise DanglingReference(e.name, f"unknown function at {e.loc}")
        if e.name in self.call_stack:
            raise ElaborationError(f"recursive function {e.name!r}", e.loc)
        names = [n for p in f.inputs for n in p.names]
        widths = [self.range_width(p.range, scope)[0] for p in f.inputs for _ in p.names]
        if len(names) != len(e.args):
            raise ElaborationError(f"function {e.name!r} expects {len(names)} arguments", e.loc)
        locals_ = {n: w for n, w in zip(names, widths)}
        rw = self.range_width(f.range, scope)[0]
        locals_[f.name] = rw
        for d in f.decls:
            w = self.range_width(d.range, scope)[0]
            for v in d.decls:
                locals_[v.name] = w
        env = {}
        for n, w, a in zip(names, widths, e.args):
            v = self.lower(a, w, frame)
            if self.operand_width(v) > w:
                v = self.emit(scope, "buf", [v], w)
            env[n] = v
        inner = _Frame(scope, env, locals_)
        self.call_stack.append(e.name)
        try:
            self._exec_function(f.body, inner)
        finally:
            self.call_stack.pop()
        if f.name not in inner.env:
            raise ElaborationError(f"function {f.name!r} does not assign its result", f.loc)
        return inner.env[f.name]

    def _exec_function(self, s, frame: _Frame):
        # function bodies are combinational; locals are not nets so no versioned wires
        if s is None:
            return
        if isinstance(s, A.Block):
            for x in s.stmts:
                self._exec_function(x, frame)
        elif isinstance(s, A.Assign):
            if not s.blocking:
                raise UnsupportedConstruct("nonblocking assignment in function", s.loc)
            base = s.lhs
            while not isinstance(base, A.Ident):
                if isinstance(base, A.Concat):
                    raise UnsupportedConstruct("concatenation target in function", s.loc)
                base = base.base
            if base.name not in frame.locals:
                raise ElaborationError(f"function assigns non-local {base.name!r}", s.loc)
            width = frame.locals[base.name]
            val = self.lower(s.rhs, self.self_width(s.lhs, frame), frame)
            if isinstance(s.lhs, A.Ident):
                new = val
            else:
                old = frame.env.get(base.name)
                if old is None:
                    raise ElaborationError(f"partial assignment to unassigned {base.name!r}", s.loc)
                new = self.insert(s.lhs, old, val, width, frame, s.loc)
            frame.env[base.name] = new
        elif isinstance(s, A.If):
            cond = self.lower(s.cond, 0, frame)
            ft, ff = frame.fork(), frame.fork()
            self._exec_function(s.then, ft)
            self._exec_function(s.other, ff)
            self.merge(frame, [ft, ff], lambda vals, w: self.emit(frame.scope, "mux", [cond] + vals, w), s.loc)
        elif isinstance(s, A.Case):
            saved = self.exec_stmt
            self.exec_stmt = self._exec_function
            try:
                self.exec_case(s, frame)
            finally:
                self.exec_stmt = saved
        else:
            raise UnsupportedConstruct(type(s).__name__ + " in function", s.loc)

    # -- final cleanup ------------------------------------------------------------
    def _fixups(self):
        d = self.design
        self._propagate_geometry()
        drivers = d.drivers()
        # elements and pins never read outputs: route such reads through a wire
        read_outputs = set()
        for e in d.elements.values():
            read_outputs |= {x for x in e.signal_inputs() if d.signals[x].kind == "output"}
        for r in d.registers.values():
            for ref in (r.clock, r.d):
                if d.signals[ref].kind == "output":
                    read_outputs.add(ref)
        for o in sorted(read_outputs):
            sig = d.signals[o]
            w = self.new_signal(sig.scope, sig.name[len(self.top) + 1 + sum(len(p) + 1 for p in sig.scope):],
                                "wire", sig.width)
            drv = drivers[o]
            drv.output = w
            for e in d.elements.values():
                e.inputs = [w if x == o else x for x in e.inputs]
            for r in d.registers.values():
                if r.clock == o:
                    r.clock = w
                if r.d == o:
                    r.d = w
            self.add_element("buf", [w], o)
        drivers = d.drivers()
        readers = d.readers()
        pinned = {r.clock for r in d.registers.values()} | {r.d for r in d.registers.values()}
        for s in list(d.signals.values()):
            if s.kind in ("wire", "output") and s.id not in drivers:
                if s.kind == "wire" and not readers[s.id] and s.id not in pinned:
                    del d.signals[s.id]
                    continue
                raise ElaborationError(f"net {s.name!r} is read but never driven")


    def _propagate_geometry(self):
        """Wires carrying whole memory values take the memory's word layout."""
        d = self.design
        changed = True
        while changed:
            changed = False
            for e in d.elements.values():
                out = d.signals[e.output]
                if out.kind != "wire" or out.depth > 1:
                    continue
                if e.op == "demux":
                    srcs = [e.inputs[0]]
                elif e.op in ("buf", "mux", "case"):
                    srcs = e.inputs[1:] if e.op in ("mux", "case") else e.inputs
                else:
                    continue
                geo = {(d.signals[x].width, d.signals[x].depth) if not isinstance(x, Const) else None
                       for x in srcs}
                if len(geo) == 1 and None not in geo:
                    width, depth = geo.pop()
                    if depth > 1 and width == out.width and (e.op != "demux" or e.params["elem"] == width // depth):
                        out.dims, out.depth = 2, depth
                        changed = True


def elaborate(asts, top: str, overrides: dict | None = None) -> FlatDesign:
    """Flatten the hierarchy below ``top`` into a design graph."""
    modules = asts.modules if isinstance(asts, A.SourceUnit) else list(asts)
    return Elaborator(modules, top).run(dict(overrides or {}))
