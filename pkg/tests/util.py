"""Shared helpers for the test suite."""
from __future__ import annotations

from aocsim.elaborate import elaborate
from aocsim.frontend import parse_text
from aocsim.optimize import check_loops, optimize
from aocsim.oracle import Oracle
from aocsim.runtime import ClockGen, Stimulus, run
from aocsim.runtime.engine import Engine
from aocsim.clocks import PodPlan
from aocsim.schedule import Schedule, build_osl


def build(src: str, top: str, params=None):
    """(raw, optimized) designs for Verilog text."""
    d = elaborate(parse_text(src), top, params)
    check_loops(d)
    return d, optimize(d)


def clocked(name: str, events=(), period: int = 1) -> Stimulus:
    return Stimulus(list(events), [ClockGen(name, period, 0)])


def oracle_trace(design, stim, cycles, **kw):
    return run(Oracle(design, **kw), stim, cycles)


def engine_trace(design, stim, cycles, **kw):
    e = Engine(design, **kw)
    try:
        return run(e, stim, cycles), e
    finally:
        e.close()


def rebuild(o, sched, fn):
    """Copy of ``sched`` with each domain pass rebuilt from ``fn(pass) -> RegisterOrder``."""
    passes = []
    for p in sched.passes:
        regs = [t.register for t in p.terminals]
        q = build_osl(o, PodPlan(p.owner, p.po, [], set(), set()), fn(p), regs, p.name, p.polarity, p.root)
        q.cross_read = set(p.cross_read)
        passes.append(q)
    return Schedule(sched.output_pass, passes, sched.analysis)


def column(trace, name):
    """Per-sample values of one signal."""
    return [vals[name] for _, vals in trace.samples()]


def read_vcd(path):
    """Parse a VCD with pyvcd: (times, {flat name: [(time, value)]})."""
    from vcd.reader import TokenKind, tokenize

    scope, ids, changes, times = [], {}, {}, []
    now = 0
    with open(path, "rb") as fh:
        for tok in tokenize(fh):
            k = tok.kind
            if k is TokenKind.SCOPE:
                scope.append(tok.data.ident)
            elif k is TokenKind.UPSCOPE:
                scope.pop()
            elif k is TokenKind.VAR:
                name = "_".join(scope + [tok.data.reference])
                ids[tok.data.id_code] = name
                changes[name] = []
            elif k is TokenKind.CHANGE_TIME:
                now = tok.data
                times.append(now)
            elif k is TokenKind.CHANGE_SCALAR:
                changes[ids[tok.data.id_code]].append((now, int(tok.data.value)))
            elif k is TokenKind.CHANGE_VECTOR:
                changes[ids[tok.data.id_code]].append((now, tok.data.value))
    return times, changes


def vcd_matches_trace(path, trace):
    """True when the reparsed VCD reproduces every sample of ``trace``."""
    times, changes = read_vcd(path)
    if sorted(changes) != sorted(trace.names):
        return False
    for stamp, vals in trace.samples():
        for name, seq in changes.items():
            cur = None
            for t, v in seq:
                if t > stamp:
                    break
                cur = v
            if cur != vals[name]:
                return False
    return True


# acceptance outcomes, printed in the terminal summary
ACCEPTANCE: list[str] = []


class criterion:
    """Record a PASS/FAIL line for acceptance criterion ``n``; exceptions propagate."""

    def __init__(self, n: int, title: str):
        self.n, self.title = n, title
        self.detail = ""

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        status = "PASS" if exc_type is None else "FAIL"
        note = self.detail if exc is None else f"{self.detail} {type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''}"
        ACCEPTANCE.append(f"criterion {self.n:2d} {status}  {self.title}  {note.strip()}")
        return False
