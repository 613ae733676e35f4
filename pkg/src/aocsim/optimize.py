"""Netlist simplification and combinational loop detection."""
from __future__ import annotations

from collections import deque

from . import ops
from .errors import LoopError
from .ir import Const, FlatDesign


def check_loops(flat: FlatDesign) -> None:
    """Raise LoopError naming the shortest combinational cycle, if any."""
    succ: dict[int, set[int]] = {}
    indeg: dict[int, int] = {}
    for e in flat.elements.values():
        indeg.setdefault(e.output, 0)
        for x in e.signal_inputs():
            if flat.signals[x].kind == "wire":
                if e.output not in succ.setdefault(x, set()):
                    succ[x].add(e.output)
                    indeg[e.output] = indeg.get(e.output, 0) + 1
                indeg.setdefault(x, 0)
    queue = deque(n for n, d in indeg.items() if d == 0)
    left = dict(indeg)
    while queue:
        n = queue.popleft()
        del left[n]
        for m in succ.get(n, ()):
            indeg[m] -= 1
            if indeg[m] == 0:
                queue.append(m)
    if not left:
        return
    best = None
    for start in sorted(left):
        parent = {start: None}
        queue = deque([start])
        found = False
        while queue and not found:
            n = queue.popleft()
            for m in sorted(succ.get(n, ())):
                if m not in left:
                    continue
                if m == start:
                    cycle = [n]
                    while parent[cycle[-1]] is not None:
                        cycle.append(parent[cycle[-1]])
                    cycle.reverse()
                    if best is None or len(cycle) < len(best):
                        best = cycle
                    found = True
                    break
                if m not in parent:
                    parent[m] = n
                    queue.append(m)
        if best is not None and len(best) == 1:
            break
    raise LoopError([flat.signals[s].name for s in best])


def _simplify(e, flat: FlatDesign):
    """Return a replacement (op, inputs, params) or None when nothing applies."""
    ins = e.inputs
    width = flat.signals[e.output].width
    m = ops.mask(width)
    if e.op != "const" and all(isinstance(x, Const) for x in ins):
        v = ops.evaluate(e.op, [x.value for x in ins], [x.width for x in ins], e.params, width)
        return "const", [], {"value": v}
    if e.op in ops.BINARY:
        a, b = ins
        ca = a.value if isinstance(a, Const) else None
        cb = b.value if isinstance(b, Const) else None
        if e.op in ("and", "or", "xor", "add", "mul"):
            # commutative: look at whichever side is constant
            for c, other in ((ca, b), (cb, a)):
                if c is None:
                    continue
                if e.op == "and" and c & m == 0 or e.op == "mul" and c & m == 0:
                    return "const", [], {"value": 0}
                if e.op == "or" and c & m == m:
                    return "const", [], {"value": m}
                if (e.op == "and" and c & m == m or e.op in ("or", "xor", "add") and c & m == 0
                        or e.op == "mul" and c & m == 1):
                    return "buf", [other], {}
        if e.op in ("sub", "shl", "shr") and cb == 0:
            return "buf", [a], {}
        if e.op == "shl" and cb is not None and cb >= width:
            return "const", [], {"value": 0}
        if e.op == "shr" and cb is not None and cb >= flat.operand_width(a):
            return "const", [], {"value": 0}
        if e.op in ("shl", "shr") and ca == 0:
            return "const", [], {"value": 0}
        if e.op == "land" and (ca == 0 or cb == 0):
            return "const", [], {"value": 0}
        if e.op == "lor" and (ca or cb):
            return "const", [], {"value": 1}
        return None
    if e.op == "mux":
        c, t, f = ins
        if isinstance(c, Const):
            return "buf", [t if c.value else f], {}
        if t == f:
            return "buf", [t], {}
        return None
    if e.op == "case":
        sel = ins[0]
        if isinstance(sel, Const):
            for labels, v in zip(e.params["labels"], ins[1:-1]):
                if sel.value in labels:
                    return "buf", [v], {}
            return "buf", [ins[-1]], {}
        if all(v == ins[1] for v in ins[2:]):
            return "buf", [ins[1]], {}
        return None
    if e.op == "index" and isinstance(ins[1], Const):
        ew = e.params["elem"]
        i = ins[1].value
        if i >= flat.operand_width(ins[0]) // ew:
            return "const", [], {"value": 0}
        if width <= ew:
            return "slice", [ins[0]], {"lo": i * ew}
    return None


def optimize(flat: FlatDesign) -> FlatDesign:
    """Return a simplified copy with identical observable behavior."""
    d = flat.copy()
    changed = True
    while changed:
        changed = False
        pinned = {r.d for r in d.registers.values()} | {r.clock for r in d.registers.values()}
        drivers = d.drivers()
        # constant propagation and local rewrites
        for e in d.elements.values():
            new_inputs = []
            for x in e.inputs:
                if not isinstance(x, Const):
                    drv = drivers.get(x)
                    if drv is not None and drv.op == "const":
                        x = Const(drv.params["value"], d.signals[x].width)
                    elif (drv is not None and drv.op == "buf" and d.signals[x].kind == "wire"
                          and d.operand_width(drv.inputs[0]) == d.signals[x].width):
                        x = drv.inputs[0]
                new_inputs.append(x)
            if new_inputs != e.inputs:
                e.inputs = new_inputs
                changed = True
            rep = _simplify(e, d)
            if rep is not None:
                e.op, e.inputs, e.params = rep
                changed = True
        # register pins look through same-width buffers of signals
        drivers = d.drivers()
        for r in d.registers.values():
            for attr in ("d", "clock"):
                ref = getattr(r, attr)
                drv = drivers.get(ref)
                if (drv is not None and drv.op == "buf" and not isinstance(drv.inputs[0], Const)
                        and d.signals[drv.inputs[0]].width == d.signals[ref].width
                        and d.signals[drv.inputs[0]].kind != "output"):
                    setattr(r, attr, drv.inputs[0])
                    changed = True
        # absorption: a wire read only by one same-width buffer takes that buffer's target
        pinned = {r.d for r in d.registers.values()} | {r.clock for r in d.registers.values()}
        readers = d.readers()
        drivers = d.drivers()
        for eid in sorted(d.elements):
            b = d.elements.get(eid)
            if b is None or b.op != "buf" or isinstance(b.inputs[0], Const):
                continue
            w = b.inputs[0]
            ws = d.signals[w]
            if (ws.kind != "wire" or w in pinned or len(readers[w]) != 1
                    or ws.width != d.signals[b.output].width or w not in drivers):
                continue
            drivers[w].output = b.output
            drivers[b.output] = drivers.pop(w)
            del d.elements[eid]
            del d.signals[w]
            readers.pop(w)
            changed = True
        # dead wires
        readers = d.readers()
        drivers = d.drivers()
        dead = [s.id for s in d.signals.values()
                if s.kind == "wire" and not readers[s.id] and s.id not in pinned]
        for w in dead:
            if w in drivers:
                del d.elements[drivers[w].id]
            del d.signals[w]
            changed = True
    d.validate()
    return d
