"""Event-driven reference simulator.

Evaluates every element by worklist until nothing changes, then applies
clock edges with simultaneous register update.  It keeps no schedule and
no activity state, so it cannot share a bug with the compiled backends.
"""
from __future__ import annotations

import random
from collections import deque

from . import ops
from .errors import OscillationError
from .ir import Const, FlatDesign

EDGE_CAP = 16


class Oracle:
    def __init__(self, design: FlatDesign, seed: int | None = None):
        self.design = design
        self.rng = random.Random(seed) if seed is not None else None
        self.values: dict[int, int] = {}
        for s in design.signals.values():
            self.values[s.id] = s.init if s.kind == "register" else 0
        self.readers = {sid: [e.id for e in es] for sid, es in design.readers().items()}
        self.widths = {e.id: [design.operand_width(x) for x in e.inputs] for e in design.elements.values()}
        self._dirty: list[int] = []
        self._settle(list(design.elements))
        self.prev_clock = {r.clock: self.values[r.clock] & 1 for r in design.registers.values()}
        self.evaluations = 0

    def _eval(self, e) -> int:
        args = [x.value if isinstance(x, Const) else self.values[x] for x in e.inputs]
        return ops.evaluate(e.op, args, self.widths[e.id], e.params, self.design.signals[e.output].width)

    def _settle(self, dirty):
        # FIFO keeps reconvergent fan-out polynomial; LIFO can go exponential
        work = deque(dict.fromkeys(dirty))
        pending = set(work)
        elements = self.design.elements
        while work:
            if self.rng is not None:
                work.rotate(-self.rng.randrange(len(work)))
            eid = work.popleft()
            pending.discard(eid)
            e = elements[eid]
            v = self._eval(e)
            if v != self.values[e.output]:
                self.values[e.output] = v
                for r in self.readers[e.output]:
                    if r not in pending:
                        pending.add(r)
                        work.append(r)

    def set_input(self, sid: int, value: int):
        value &= ops.mask(self.design.signals[sid].width)
        if self.values[sid] != value:
            self.values[sid] = value
            self._dirty.extend(self.readers[sid])

    def step(self):
        """Settle, then apply clock edges until no further edge occurs."""
        dirty, self._dirty = self._dirty, []
        self._settle(dirty)
        for _ in range(EDGE_CAP):
            cur = {c: self.values[c] & 1 for c in self.prev_clock}
            fired = []
            for r in self.design.registers.values():
                p, c = self.prev_clock[r.clock], cur[r.clock]
                if (r.polarity == "posedge" and (p, c) == (0, 1)) or (r.polarity == "negedge" and (p, c) == (1, 0)):
                    fired.append(r)
            self.prev_clock = cur
            if not fired:
                return
            sig = self.design.signals
            nxt = {r.register: self.values[r.d] & ops.mask(sig[r.register].width) for r in fired}
            dirty = []
            for reg, v in nxt.items():
                if self.values[reg] != v:
                    self.values[reg] = v
                    dirty.extend(self.readers[reg])
            self._settle(dirty)
        raise OscillationError(f"clock edges still occurring after {EDGE_CAP} iterations")
