"""Timing-accurate testbench execution around the cycle-based DUT model.

Testbench processes containing waits are compiled into small programs and
run by an event scheduler.  ``#n`` suspends a process on the time-ordered
event queue; ``@(...)`` suspends it on the condition list, which is
inspected after every executed segment.  Whenever a segment changes a DUT
input the DUT model is stepped, so clock toggles written by the testbench
drive the DUT's clock domains.
"""
from __future__ import annotations

import heapq
import sys
from dataclasses import dataclass, field

from . import ops
from .config import ExecConfig
from .elaborate import _ARITH, _COMPARE, _LOGICAL, _REDUCE, _SHIFT, const_eval, elaborate
from .errors import DeadlockError, UnsupportedTbConstruct, WaitInsideDut
from .frontend import ast as A
from .ir import FlatDesign
from .optimize import check_loops, optimize
from .runtime.trace import Trace, TraceRecorder

DELTA_CAP = 1000
SEGMENT_BUDGET = 1_000_000  # instructions one segment may execute before it counts as a hang


@dataclass
class Instr:
    op: str  # assign | delay | wait | jump | jfalse | jcase | rep_init | rep_next | display | finish
    args: tuple
    loc: object = None


@dataclass
class TimeConsumingProcess:
    id: int
    name: str
    program: list[Instr]
    pc: int = 0
    status: str = "runnable"  # runnable | waiting_time | waiting_signal | finished
    wake_time: int | None = None
    watch: list = field(default_factory=list)  # A.Event list while waiting on signals
    last: dict = field(default_factory=dict)
    counters: list = field(default_factory=list)

    @property
    def segments(self) -> list[list[Instr]]:
        """Non-empty instruction runs between waits, in program order."""
        out, cur = [], []
        for ins in self.program:
            if ins.op in ("delay", "wait"):
                if cur:
                    out.append(cur)
                cur = []
            elif ins.op != "jump":
                cur.append(ins)
        if cur:
            out.append(cur)
        return out


@dataclass
class TbNet:
    name: str
    width: int
    lsb: int = 0
    value: int = 0
    dut_input: int | None = None  # DUT signal driven by this reg
    dut_output: int | None = None  # DUT signal read through this wire
    expr: object = None  # continuous assignment inside the testbench


def _tb_error(loc, message):
    return UnsupportedTbConstruct(message, loc)


def _has_wait(node) -> bool:
    if isinstance(node, (A.Delay, A.EventWait)):
        return True
    if isinstance(node, A.Block):
        return any(_has_wait(s) for s in node.stmts)
    if isinstance(node, A.If):
        return _has_wait(node.then) or _has_wait(node.other)
    if isinstance(node, A.Case):
        return any(_has_wait(it.body) for it in node.items)
    if isinstance(node, (A.Forever, A.RepeatStmt)):
        return _has_wait(node.body)
    return False


def _first_wait(node):
    if isinstance(node, (A.Delay, A.EventWait)):
        return node
    for child in _children(node):
        w = _first_wait(child)
        if w is not None:
            return w
    return None


def _children(node):
    if isinstance(node, A.Block):
        return node.stmts
    if isinstance(node, A.If):
        return [x for x in (node.then, node.other) if x is not None]
    if isinstance(node, A.Case):
        return [it.body for it in node.items if it.body is not None]
    if isinstance(node, (A.Forever, A.RepeatStmt)):
        return [node.body]
    if isinstance(node, (A.Delay, A.EventWait)):
        return [node.stmt] if node.stmt is not None else []
    if isinstance(node, (A.Always, A.Initial)):
        return [node.body]
    return []


class _Compiler:
    def __init__(self):
        self.code: list[Instr] = []
        self.n_counters = 0

    def emit(self, op, *args, loc=None) -> int:
        self.code.append(Instr(op, args, loc))
        return len(self.code) - 1

    def stmt(self, s):
        if s is None:
            return
        if isinstance(s, A.Block):
            for x in s.stmts:
                self.stmt(x)
        elif isinstance(s, A.Assign):
            self.emit("assign", s.lhs, s.rhs, s.blocking, loc=s.loc)
        elif isinstance(s, A.Delay):
            self.emit("delay", s.amount, loc=s.loc)
            self.stmt(s.stmt)
        elif isinstance(s, A.EventWait):
            self.emit("wait", tuple(s.events), loc=s.loc)
            self.stmt(s.stmt)
        elif isinstance(s, A.If):
            j = self.emit("jfalse", s.cond, None, loc=s.loc)
            self.stmt(s.then)
            if s.other is not None:
                k = self.emit("jump", None)
                self.code[j].args = (s.cond, len(self.code))
                self.stmt(s.other)
                self.code[k].args = (len(self.code),)
            else:
                self.code[j].args = (s.cond, len(self.code))
        elif isinstance(s, A.Case):
            ends = []
            default = None
            for it in s.items:
                if it.labels is None:
                    default = it
                    continue
                j = self.emit("jcase", s.expr, tuple(it.labels), None, loc=it.loc)
                self.stmt(it.body)
                ends.append(self.emit("jump", None))
                self.code[j].args = (s.expr, tuple(it.labels), len(self.code))
            if default is not None:
                self.stmt(default.body)
            for k in ends:
                self.code[k].args = (len(self.code),)
        elif isinstance(s, A.Forever):
            if not _has_wait(s.body):
                raise _tb_error(s.loc, "forever loop without a wait never yields")
            top = len(self.code)
            self.stmt(s.body)
            self.emit("jump", top)
        elif isinstance(s, A.RepeatStmt):
            c = self.n_counters
            self.n_counters += 1
            self.emit("rep_init", c, s.count, loc=s.loc)
            j = self.emit("rep_next", c, None)
            self.stmt(s.body)
            self.emit("jump", j)
            self.code[j].args = (c, len(self.code))
        elif isinstance(s, A.SysCall):
            if s.name in ("$display", "$write", "$strobe", "$monitor"):
                self.emit("display", s.name, tuple(s.args), loc=s.loc)
            elif s.name in ("$finish", "$stop"):
                self.emit("finish", loc=s.loc)
            else:
                raise _tb_error(s.loc, f"system task {s.name}")
        else:
            raise _tb_error(getattr(s, "loc", None), type(s).__name__)


def compile_process(node, pid: int, name: str) -> TimeConsumingProcess:
    c = _Compiler()
    if isinstance(node, A.Always):
        if node.sens == "comb":
            raise _tb_error(node.loc, "combinational always block in a testbench")
        if node.sens is None:
            if not _has_wait(node.body):
                raise _tb_error(node.loc, "always block without timing control")
            c.stmt(node.body)
            c.emit("jump", 0)
        else:
            c.emit("wait", tuple(node.sens), loc=node.loc)
            c.stmt(node.body)
            c.emit("jump", 0)
    else:
        c.stmt(node.body)
    return TimeConsumingProcess(pid, name, c.code, counters=[0] * c.n_counters)


def _instances(m: A.Module):
    return [it for it in m.items if isinstance(it, A.Instance)]


def _reachable(modules: dict, top: str) -> set[str]:
    seen, todo = set(), [top]
    while todo:
        n = todo.pop()
        if n in seen or n not in modules:
            continue
        seen.add(n)
        todo.extend(i.module for i in _instances(modules[n]))
    return seen


@dataclass
class TestbenchPlan:
    module: A.Module
    dut_top: str
    instance: A.Instance
    processes: list[TimeConsumingProcess]
    initializers: list  # wait-free initial blocks, run once at time 0


def partition_tcp(modules: list[A.Module], dut_top: str) -> TestbenchPlan:
    """Split the testbench into time-consuming processes around the DUT instance."""
    by_name = {m.name: m for m in modules}
    if dut_top not in by_name:
        raise _tb_error(None, f"DUT module {dut_top!r} not found")
    dut = _reachable(by_name, dut_top)
    for name in sorted(dut):
        for it in by_name[name].items:
            if isinstance(it, (A.Always, A.Initial)):
                w = _first_wait(it)
                if w is not None:
                    raise WaitInsideDut(f"timing control inside the DUT hierarchy ({name})", w.loc)
    benches = [m for m in modules if m.name not in dut and any(i.module == dut_top for i in _instances(m))]
    if len(benches) != 1:
        raise _tb_error(None, f"expected exactly one testbench module instantiating {dut_top!r}, "
                                           f"found {len(benches)}")
    tb = benches[0]
    insts = [i for i in _instances(tb) if i.module == dut_top]
    others = [i for i in _instances(tb) if i.module != dut_top]
    if len(insts) != 1 or others:
        raise _tb_error(tb.loc, "the testbench must instantiate the DUT exactly once and nothing else")
    procs, inits = [], []
    for it in tb.items:
        if isinstance(it, A.Initial):
            if _has_wait(it.body):
                procs.append(compile_process(it, len(procs), f"initial@{it.loc}"))
            else:
                inits.append(compile_process(it, -1, f"init@{it.loc}"))
        elif isinstance(it, A.Always):
            procs.append(compile_process(it, len(procs), f"always@{it.loc}"))
    return TestbenchPlan(tb, dut_top, insts[0], procs, inits)


@dataclass
class TbResult:
    status: str  # finished ($finish) | done (no further activity) | time_limit
    time: int
    trace: Trace
    log: list[str]


class TestbenchSim:
    """Event/condition scheduler co-simulating testbench processes with a DUT backend.

    ``backend``: "aoc", "aoc-full" or "oracle".
    """

    def __init__(self, modules: list[A.Module], dut_top: str, backend: str = "aoc",
                 config: ExecConfig | None = None, max_time: int | None = None, out=None):
        from .oracle import Oracle
        from .runtime.engine import Engine

        self._all_modules = modules
        self.plan = partition_tcp(modules, dut_top)
        self.config = config or ExecConfig(tdmax=1)
        tb = self.plan.module
        self.params = {}
        for it in tb.params + tb.items:
            if isinstance(it, A.ParamDecl):
                self.params[it.name] = const_eval(it.value, self.params)
        overrides = {}
        for k, (pname, expr) in enumerate(self.plan.instance.params):
            if pname is None:
                raise _tb_error(self.plan.instance.loc, "positional parameter override of the DUT")
            overrides[pname] = const_eval(expr, self.params)
        self.design: FlatDesign = elaborate(modules, dut_top, overrides)
        check_loops(self.design)
        if backend == "oracle":
            self.dut = Oracle(self.design)
        else:
            self.dut = Engine(optimize(self.design), self.config, gated=backend != "aoc-full")
        self.nets: dict[str, TbNet] = {}
        self._declare(tb)
        self._bind(self.plan.instance)
        self.max_time = max_time
        self.out = out if out is not None else sys.stdout
        self.log: list[str] = []
        self.time = 0
        self.events: list = []  # (time, seq, pid)
        self._seq = 0
        self.conditions: list[int] = []  # pids waiting on signals, in wait order
        self.runnable: list[TimeConsumingProcess] = []
        self.nba: list = []
        self.finished = False
        self._dirty_inputs = False
        self.recorder = TraceRecorder(self.design)
        self.times: list[int] = []
        self.wakeups: list[tuple[int, int]] = []  # (time, pid) each time a process resumes

    # -- elaboration of the testbench module -----------------------------------------------
    def _declare(self, tb: A.Module):
        for it in tb.items:
            if isinstance(it, A.NetDecl):
                width, lsb = 1, 0
                if it.range is not None:
                    msb = const_eval(it.range.msb, self.params)
                    lsb = const_eval(it.range.lsb, self.params)
                    if msb < lsb:
                        raise _tb_error(it.loc, "ascending bit ranges")
                    width = msb - lsb + 1
                for d in it.decls:
                    if d.array is not None:
                        raise _tb_error(d.loc, "memories in the testbench")
                    net = TbNet(d.name, width, lsb)
                    if d.init is not None:
                        net.value = const_eval(d.init, self.params) & ops.mask(width)
                    self.nets[d.name] = net
            elif isinstance(it, A.ContAssign):
                if not isinstance(it.lhs, A.Ident) or it.lhs.name not in self.nets:
                    raise _tb_error(it.loc, "testbench assign target must be a declared wire")
                self.nets[it.lhs.name].expr = it.rhs
            elif isinstance(it, (A.PortDecl, A.Function)):
                raise _tb_error(it.loc, f"{type(it).__name__} in the testbench module")

    def _bind(self, inst: A.Instance):
        d = self.design
        top = self.plan.dut_top
        dut_mod = next(m for m in self._all_modules if m.name == top)
        order = [p if isinstance(p, str) else n for p in dut_mod.ports
                 for n in ([p] if isinstance(p, str) else p.names)]
        for k, (pname, expr) in enumerate(inst.ports):
            port = pname if pname is not None else (order[k] if k < len(order) else None)
            if port is None:
                raise _tb_error(inst.loc, "too many positional ports")
            if expr is None:
                continue
            sid = d.lookup(f"{top}_{port}")
            sig = d.signals[sid]
            if sig.kind == "input":
                if isinstance(expr, A.Ident) and expr.name in self.nets:
                    self.nets[expr.name].dut_input = sid
                else:
                    self.dut.set_input(sid, self._eval(expr, sig.width))
            else:
                if not isinstance(expr, A.Ident) or expr.name not in self.nets:
                    raise _tb_error(getattr(expr, "loc", inst.loc),
                                                 "DUT outputs must connect to testbench wires")
                self.nets[expr.name].dut_output = sid
        self._inputs = [n for n in self.nets.values() if n.dut_input is not None]

    # -- expressions ------------------------------------------------------------------------
    def _net(self, name, loc):
        n = self.nets.get(name)
        if n is None:
            raise _tb_error(loc, f"unknown testbench signal {name!r}")
        return n

    def read(self, name, loc=None) -> int:
        n = self._net(name, loc)
        if n.dut_output is not None:
            return self.dut.values[n.dut_output] & ops.mask(n.width)
        if n.expr is not None:
            return self._eval(n.expr, n.width)
        return n.value

    def _width(self, e) -> int:
        if isinstance(e, A.Number):
            return e.width or 32
        if isinstance(e, A.Ident):
            if e.name in self.params:
                return 32
            return self._net(e.name, e.loc).width
        if isinstance(e, A.Index):
            return 1
        if isinstance(e, A.PartSelect):
            return abs(const_eval(e.msb, self.params) - const_eval(e.lsb, self.params)) + 1
        if isinstance(e, A.IndexedPart):
            return const_eval(e.width, self.params)
        if isinstance(e, A.Unary):
            return 1 if e.op in _REDUCE or e.op == "!" else self._width(e.operand)
        if isinstance(e, A.Binary):
            if e.op in _COMPARE or e.op in _LOGICAL:
                return 1
            if e.op in _SHIFT:
                return self._width(e.left)
            return max(self._width(e.left), self._width(e.right))
        if isinstance(e, A.Ternary):
            return max(self._width(e.then), self._width(e.other))
        if isinstance(e, A.Concat):
            return sum(self._width(p) for p in e.parts)
        if isinstance(e, A.Replicate):
            return const_eval(e.count, self.params) * sum(self._width(p) for p in e.parts)
        if isinstance(e, A.SysCall) and e.name == "$time":
            return 64
        raise _tb_error(getattr(e, "loc", None), f"{type(e).__name__} in a testbench expression")

    def _eval(self, e, ctx: int = 0) -> int:
        W = max(self._width(e), ctx)
        m = ops.mask(W)
        if isinstance(e, A.Number):
            return e.value & m
        if isinstance(e, A.Ident):
            if e.name in self.params:
                return self.params[e.name] & m
            return self.read(e.name, e.loc)
        if isinstance(e, A.Index):
            base = self._sel_base(e.base)
            i = self._eval(e.index) - base.lsb
            return (self.read(base.name) >> i) & 1 if 0 <= i < base.width else 0
        if isinstance(e, A.PartSelect):
            base = self._sel_base(e.base)
            lo = const_eval(e.lsb, self.params) - base.lsb
            w = const_eval(e.msb, self.params) - const_eval(e.lsb, self.params) + 1
            return (self.read(base.name) >> lo) & ops.mask(w) if lo >= 0 else 0
        if isinstance(e, A.IndexedPart):
            base = self._sel_base(e.base)
            lo = self._eval(e.start) - base.lsb
            w = const_eval(e.width, self.params)
            return (self.read(base.name) >> lo) & ops.mask(w) if lo >= 0 else 0
        if isinstance(e, A.Unary):
            if e.op in _REDUCE:
                wa = self._width(e.operand)
                return ops.evaluate(_REDUCE[e.op], [self._eval(e.operand)], [wa], {}, 1)
            if e.op == "!":
                return int(self._eval(e.operand) == 0)
            a = self._eval(e.operand, W)
            if e.op == "~":
                return ~a & m
            if e.op == "-":
                return -a & m
            return a
        if isinstance(e, A.Binary):
            if e.op in _COMPARE:
                w = max(self._width(e.left), self._width(e.right))
                return ops.evaluate(_COMPARE[e.op], [self._eval(e.left, w), self._eval(e.right, w)], [w, w], {}, 1)
            if e.op in _LOGICAL:
                return ops.evaluate(_LOGICAL[e.op], [self._eval(e.left), self._eval(e.right)], [1, 1], {}, 1)
            if e.op in _SHIFT:
                a, b = self._eval(e.left, W), self._eval(e.right)
                return ops.evaluate(_SHIFT[e.op], [a, b], [W, self._width(e.right)], {}, W)
            if e.op in _ARITH:
                return ops.evaluate(_ARITH[e.op], [self._eval(e.left, W), self._eval(e.right, W)], [W, W], {}, W)
            raise _tb_error(e.loc, f"operator {e.op}")
        if isinstance(e, A.Ternary):
            return self._eval(e.then, W) if self._eval(e.cond) else self._eval(e.other, W)
        if isinstance(e, (A.Concat, A.Replicate)):
            parts = e.parts if isinstance(e, A.Concat) else e.parts * const_eval(e.count, self.params)
            r = 0
            for p in parts:
                w = self._width(p)
                r = (r << w) | self._eval(p, w) & ops.mask(w)
            return r & m
        if isinstance(e, A.SysCall) and e.name == "$time":
            return self.time & m
        raise _tb_error(getattr(e, "loc", None), f"{type(e).__name__} in a testbench expression")

    def _sel_base(self, e) -> TbNet:
        if not isinstance(e, A.Ident):
            raise _tb_error(getattr(e, "loc", None), "nested selects in the testbench")
        return self._net(e.name, e.loc)

    # -- assignments --------------------------------------------------------------------------
    def _target(self, lhs):
        """(net, lo, width) for an assignable testbench reg."""
        if isinstance(lhs, A.Ident):
            n = self._net(lhs.name, lhs.loc)
            lo, w = 0, n.width
        elif isinstance(lhs, A.Index):
            n = self._sel_base(lhs.base)
            lo, w = self._eval(lhs.index) - n.lsb, 1
        elif isinstance(lhs, A.PartSelect):
            n = self._sel_base(lhs.base)
            lo = const_eval(lhs.lsb, self.params) - n.lsb
            w = const_eval(lhs.msb, self.params) - const_eval(lhs.lsb, self.params) + 1
        else:
            raise _tb_error(getattr(lhs, "loc", None), "testbench assignment target")
        if n.dut_output is not None or n.expr is not None:
            raise _tb_error(lhs.loc, f"{n.name} is driven by the DUT or an assign")
        return n, lo, w

    def _write(self, n: TbNet, lo: int, w: int, value: int):
        if lo < 0 or lo >= n.width:
            return
        fm = ops.mask(w) << lo
        new = ((n.value & ~fm) | ((value & ops.mask(w)) << lo)) & ops.mask(n.width)
        if new != n.value:
            n.value = new
            if n.dut_input is not None:
                self.dut.set_input(n.dut_input, new)
                self._dirty_inputs = True

    # -- process execution -----------------------------------------------------------------------
    def _run_segment(self, p: TimeConsumingProcess):
        prog = p.program
        budget = SEGMENT_BUDGET
        while p.pc < len(prog):
            budget -= 1
            if budget < 0:
                raise DeadlockError(f"process {p.name} runs without waiting at t={self.time}")
            ins = prog[p.pc]
            op, a = ins.op, ins.args
            p.pc += 1
            if op == "assign":
                n, lo, w = self._target(a[0])
                v = self._eval(a[1], w)
                if a[2]:
                    self._write(n, lo, w, v)
                else:
                    self.nba.append((n, lo, w, v))
            elif op == "delay":
                dt = self._eval(a[0])
                p.status = "waiting_time"
                p.wake_time = self.time + dt
                self._schedule(p)
                return
            elif op == "wait":
                p.status = "waiting_signal"
                p.watch = list(a[0])
                p.last = {k: self._eval(ev.expr) for k, ev in enumerate(p.watch)}
                self.conditions.append(p.id)
                return
            elif op == "jump":
                p.pc = a[0]
            elif op == "jfalse":
                if not self._eval(a[0]):
                    p.pc = a[1]
            elif op == "jcase":
                w = max([self._width(a[0])] + [self._width(x) for x in a[1]])
                sel = self._eval(a[0], w)
                if not any(self._eval(x, w) == sel for x in a[1]):
                    p.pc = a[2]
            elif op == "rep_init":
                p.counters[a[0]] = self._eval(a[1])
            elif op == "rep_next":
                if p.counters[a[0]] <= 0:
                    p.pc = a[1]
                else:
                    p.counters[a[0]] -= 1
            elif op == "display":
                self._display(a[0], a[1])
            elif op == "finish":
                self.finished = True
                p.status = "finished"
                return
        p.status = "finished"

    def _schedule(self, p):
        heapq.heappush(self.events, (p.wake_time, self._seq, p.id))
        self._seq += 1

    def _display(self, task, args):
        text = _format(self, list(args))
        self.log.append(text)
        if self.out is not None:
            self.out.write(text + ("" if task == "$write" else "\n"))

    def _sync_dut(self):
        if self._dirty_inputs:
            self._dirty_inputs = False
            self.dut.step()

    def _check_conditions(self) -> list[TimeConsumingProcess]:
        woken = []
        keep = []
        for pid in self.conditions:
            p = self.procs[pid]
            fire = False
            for k, ev in enumerate(p.watch):
                cur = self._eval(ev.expr)
                old = p.last[k]
                if cur != old:
                    if ev.edge is None:
                        fire = True
                    elif ev.edge == "posedge" and (old & 1) == 0 and (cur & 1) == 1:
                        fire = True
                    elif ev.edge == "negedge" and (old & 1) == 1 and (cur & 1) == 0:
                        fire = True
                    p.last[k] = cur
            if fire:
                p.status = "runnable"
                woken.append(p)
            else:
                keep.append(pid)
        self.conditions = keep
        return woken

    def _settle(self):
        """Run everything runnable at the current time, including zero-delay wakeups."""
        deltas = 0
        while self.runnable and not self.finished:
            deltas += 1
            if deltas > DELTA_CAP:
                raise DeadlockError(f"more than {DELTA_CAP} zero-delay wakeups at t={self.time}")
            batch, self.runnable = self.runnable, []
            for p in batch:
                self.wakeups.append((self.time, p.id))
                self._run_segment(p)
                self._sync_dut()
                self.runnable.extend(self._check_conditions())
                if self.finished:
                    return
            if self.nba:
                for n, lo, w, v in self.nba:
                    self._write(n, lo, w, v)
                self.nba = []
                self._sync_dut()
                self.runnable.extend(self._check_conditions())

    def _sample(self):
        vals = self.dut.values
        if self.times and self.times[-1] == self.time:
            # re-sample the same instant
            self.recorder.sample(self.time, vals)
            return
        self.times.append(self.time)
        self.recorder.sample(self.time, vals)

    def run(self) -> TbResult:
        self.procs = {p.id: p for p in self.plan.processes}
        for init in self.plan.initializers:
            self._run_segment(init)
        for n in self._inputs:
            self.dut.set_input(n.dut_input, n.value)
        self.dut.step()
        self.recorder.start(self.dut.values)
        self.runnable = list(self.plan.processes)
        status = "done"
        while True:
            self._settle()
            self._sample()
            if self.finished:
                status = "finished"
                break
            if not self.events:
                if self.conditions:
                    waiting = ", ".join(self.procs[p].name for p in self.conditions)
                    raise DeadlockError(f"no pending events at t={self.time}; waiting forever: {waiting}")
                break
            t_next = self.events[0][0]
            if self.max_time is not None and t_next > self.max_time:
                status = "time_limit"
                break
            self.time = t_next
            while self.events and self.events[0][0] == t_next:
                _, _, pid = heapq.heappop(self.events)
                p = self.procs[pid]
                p.status = "runnable"
                self.runnable.append(p)
        trace = self.recorder.trace
        trace.times = list(self.times)
        trace.cycles = (self.times[-1] + 1) if self.times else 0
        close = getattr(self.dut, "close", None)
        if close:
            close()
        return TbResult(status, self.time, trace, self.log)


def _format(sim: TestbenchSim, args: list) -> str:
    if not args:
        return ""
    if isinstance(args[0], A.String):
        fmt, rest = args[0].value, args[1:]
    else:
        fmt, rest = " ".join("%d" for _ in args), args
    out = []
    i = 0
    k = 0
    while i < len(fmt):
        c = fmt[i]
        if c == "\\" and i + 1 < len(fmt):
            out.append({"n": "\n", "t": "\t", "\\": "\\", '"': '"'}.get(fmt[i + 1], fmt[i + 1]))
            i += 2
            continue
        if c != "%":
            out.append(c)
            i += 1
            continue
        j = i + 1
        while j < len(fmt) and fmt[j].isdigit():
            j += 1
        conv = fmt[j].lower() if j < len(fmt) else "%"
        if conv == "%":
            out.append("%")
        elif conv == "m":
            out.append(sim.plan.module.name)
        else:
            arg = rest[k] if k < len(rest) else None
            k += 1
            if isinstance(arg, A.String):
                out.append(arg.value)
            elif arg is not None:
                v = sim._eval(arg)
                if conv in ("d", "t"):
                    out.append(str(v))
                elif conv in ("h", "x"):
                    out.append(f"{v:x}")
                elif conv == "b":
                    out.append(f"{v:b}")
                elif conv == "o":
                    out.append(f"{v:o}")
                elif conv == "c":
                    out.append(chr(v & 0xFF))
                else:
                    out.append(str(v))
        i = j + 1
    return "".join(out)


def run_testbench(modules: list[A.Module], dut_top: str, backend: str = "aoc",
                  config: ExecConfig | None = None, max_time: int | None = None, out=None) -> TbResult:
    return TestbenchSim(modules, dut_top, backend, config, max_time, out).run()
