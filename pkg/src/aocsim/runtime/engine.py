"""Cycle engine executing compiled plans."""
from __future__ import annotations

import threading
from dataclasses import dataclass, field

from .. import ops
from ..clocks import analyze
from ..config import ExecConfig
from ..errors import OscillationError
from ..ir import FlatDesign
from ..partition import PassPartitions, build_cdo, partition_pass
from ..schedule import Schedule, build_schedule
from .codegen import BlockCode, gen_block

EDGE_CAP = 16


@dataclass
class Stats:
    elements: int = 0
    groups_run: int = 0
    groups_total: int = 0
    passes: int = 0
    per_cycle: list[int] = field(default_factory=list)
    wire_once_violations: list = field(default_factory=list)
    max_wire_evals: int = 0

    @property
    def groups_skipped(self):
        return self.groups_total - self.groups_run

    def as_dict(self):
        return {
            "elements_evaluated": self.elements, "groups_run": self.groups_run,
            "groups_skipped": self.groups_skipped, "passes": self.passes,
            "per_cycle_elements": self.per_cycle, "max_wire_evals_per_pass": self.max_wire_evals,
        }


class _Block:
    __slots__ = ("code", "fn", "w", "pend", "ch", "groups", "st", "cnt")

    def __init__(self, code: BlockCode, nwires: int, groups: int):
        self.code = code
        self.fn = code.compile()
        self.w = [0] * nwires
        self.pend: list = []
        self.ch: list = []
        self.groups = groups
        self.st = [0, 0]
        self.cnt: dict[int, int] = {}


class _Pass:
    __slots__ = ("name", "root", "polarity", "blocks", "groups")

    def __init__(self, name, root, polarity, blocks):
        self.name = name
        self.root = root
        self.polarity = polarity
        self.blocks = blocks
        self.groups = sum(b.groups for b in blocks)


class _Pool:
    """Persistent workers; block k of a pass runs on worker k (k >= 1)."""

    def __init__(self, n: int, engine: "Engine"):
        self.n = n
        self.engine = engine
        self.task = None
        self.stop = False
        self.errors: list = []
        self.start = threading.Barrier(n + 1)
        self.done = threading.Barrier(n + 1)
        self.threads = [threading.Thread(target=self._work, args=(k + 1,), daemon=True) for k in range(n)]
        for t in self.threads:
            t.start()

    def _work(self, k):
        while True:
            self.start.wait()
            if self.stop:
                return
            blocks = self.task
            if k < len(blocks):
                try:
                    self.engine._run_block(blocks[k])
                except BaseException as exc:  # surfaced on the main thread
                    self.errors.append(exc)
            self.done.wait()

    def run(self, blocks):
        self.task = blocks
        self.start.wait()
        self.engine._run_block(blocks[0])
        self.done.wait()
        if self.errors:
            raise self.errors.pop()

    def close(self):
        self.stop = True
        try:
            self.start.wait(timeout=1)
        except threading.BrokenBarrierError:
            pass


class Engine:
    """Activity-gated (or full) execution of a scheduled design.

    ``design`` must be optimized and loop-free.  ``threads`` bounds the
    partitions per pass; with more than one thread every register commit is
    deferred to the end of its pass.
    """

    def __init__(self, design: FlatDesign, config: ExecConfig | None = None, gated: bool = True,
                 threads: int | None = None, instrument: bool = False, schedule: Schedule | None = None):
        self.design = design
        self.config = config or ExecConfig(tdmax=1)
        if threads is not None:
            self.config = ExecConfig(tdmax=threads, phmax=self.config.phmax, cw=self.config.cw,
                                     timescale=self.config.timescale)
        self.threads = self.config.tdmax
        self.gated = gated
        self.instrument = instrument
        self.schedule = schedule or build_schedule(design, analyze(design))
        self.cdo = build_cdo(design, self.schedule.analysis)
        self.stats = Stats()
        size = max(design.signals, default=-1) + 1
        self.values = [0] * size
        for s in design.signals.values():
            if s.kind == "register":
                self.values[s.id] = s.init
        self._compile()
        self.watchers: dict[int, list[int]] = {}
        for p in self.plans:
            for part, blk in zip(p.partitions, self._blocks_of[id(p)]):
                for g in part.groups:
                    for s in g.watch:
                        if design.signals[s].kind != "wire":
                            ws = self.watchers.setdefault(s, [])
                            ws.append(blk.code.group_flags[g.id])
                            cf = blk.code.cluster_flags.get(g.id)
                            if cf is not None and cf not in ws:
                                ws.append(cf)
        self.act = [1] * self.n_flags
        self.pool = None
        if self.threads > 1:
            width = max((len(p.blocks) for p in self.passes), default=1)
            if self.od.blocks:
                width = max(width, len(self.od.blocks))
            if width > 1:
                self.pool = _Pool(width - 1, self)
        # every flag starts raised so each pass computes all of its wires the first time
        self._late = []
        self._run_pass(self.od)
        self.prev = [self.values[r] & 1 for r in self.roots]
        self._edges = [(p, self.roots.index(p.root), 1 if p.polarity == "posedge" else 0) for p in self.passes]
        self._masks = {s.id: ops.mask(s.width) for s in design.signals.values() if s.kind == "input"}
        self.stats = Stats()

    # -- construction -------------------------------------------------------------
    def _compile(self):
        d = self.design
        sch = self.schedule
        multi = self.threads > 1
        self.plans: list[PassPartitions] = []
        self._blocks_of: dict[int, list[_Block]] = {}
        flag = 0
        root_wires = {p.root for p in sch.passes if d.signals[p.root].kind == "wire"}
        built = []
        for k, osl in enumerate(sch.all_passes()):
            pp = partition_pass(d, osl, self.config, placeholders=not self.gated)
            self.plans.append(pp)
            blocks = []
            deferred = set(osl.order.split_set) if osl.order else set()
            if multi:
                deferred = {t.register for t in osl.terminals}
            for j, part in enumerate(pp.partitions):
                published = root_wires if osl.owner == "OD" else set()
                code = gen_block(d, part, f"pass{k}_blk{j}", flag, self.gated, published,
                                 deferred, osl.cross_read, self.instrument)
                flag += code.n_flags
                blocks.append(_Block(code, len(code.bulk_index), len(part.groups)))
            self._blocks_of[id(pp)] = blocks
            built.append(_Pass(osl.name, osl.root, osl.polarity, blocks))
        self.n_flags = flag
        self.od = built[0]
        self.passes = built[1:]
        self.roots = sorted({p.root for p in self.passes})

    def sources(self) -> str:
        return "\n".join(b.code.source for p in [self.od] + self.passes for b in p.blocks)

    # -- execution ------------------------------------------------------------------
    def _run_block(self, b: _Block):
        b.fn(self.values, b.w, self.act, b.st, b.ch, b.pend, self._late, b.cnt)

    def _run_pass(self, p: _Pass):
        blocks = p.blocks
        if not blocks:
            return
        if len(blocks) == 1 and not self.instrument:
            b = blocks[0]
            st = b.st
            b.fn(self.values, b.w, self.act, st, b.ch, b.pend, self._late, b.cnt)
            s = self.stats
            s.elements += st[0]
            s.groups_run += st[1]
            st[0] = st[1] = 0
            s.groups_total += p.groups
            s.passes += 1
            if b.ch or b.pend:
                v = self.values
                changed = b.ch
                for r, x in b.pend:
                    if v[r] != x:
                        v[r] = x
                        changed.append(r)
                b.pend.clear()
                self._mark(changed)
                changed.clear()
            return
        if self.instrument:
            for b in blocks:
                b.cnt.clear()
        if self.pool is not None and len(blocks) > 1:
            self.pool.run(blocks)
        else:
            for b in blocks:
                b.fn(self.values, b.w, self.act, b.st, b.ch, b.pend, self._late, b.cnt)
        v = self.values
        changed = []
        n_el = n_gr = 0
        for b in blocks:
            n_el += b.st[0]
            n_gr += b.st[1]
            b.st[0] = b.st[1] = 0
            if b.ch:
                changed.extend(b.ch)
                b.ch.clear()
            if b.pend:
                for r, x in b.pend:
                    if v[r] != x:
                        v[r] = x
                        changed.append(r)
                b.pend.clear()
        self._mark(changed)
        s = self.stats
        s.elements += n_el
        s.groups_run += n_gr
        s.groups_total += p.groups
        s.passes += 1
        if self.instrument:
            for b in blocks:
                if b.cnt:
                    m = max(b.cnt.values())
                    s.max_wire_evals = max(s.max_wire_evals, m)
                    if m > 1:
                        s.wire_once_violations.append((p.name, b.code.name,
                                                       {k: c for k, c in b.cnt.items() if c > 1}))

    def _mark(self, sids):
        act = self.act
        W = self.watchers
        for s in sids:
            for i in W.get(s, ()):
                act[i] = 1

    def set_input(self, sid: int, value: int):
        value &= self._masks[sid]
        if self.values[sid] != value:
            self.values[sid] = value
            act = self.act
            for i in self.watchers.get(sid, ()):
                act[i] = 1

    def step(self):
        self._late = []
        if self.od.blocks:
            self._run_pass(self.od)
        v = self.values
        roots = self.roots
        prev = self.prev
        for _ in range(EDGE_CAP):
            cur = [v[r] & 1 for r in roots]
            if cur == prev:
                return
            fired = [p for p, i, want in self._edges if prev[i] != cur[i] and cur[i] == want]
            self.prev = prev = cur
            if not fired:
                return
            late = self._late = []
            for p in fired:
                self._run_pass(p)
            changed = []
            for r, x in late:
                if v[r] != x:
                    v[r] = x
                    changed.append(r)
            self._mark(changed)
            if self.od.blocks:
                self._run_pass(self.od)
        raise OscillationError(f"clock edges still occurring after {EDGE_CAP} iterations")

    def cycle_boundary(self):
        s = self.stats
        total = s.elements
        s.per_cycle.append(total - getattr(self, "_last_total", 0))
        self._last_total = total

    def close(self):
        if self.pool is not None:
            self.pool.close()
            self.pool = None

    def __del__(self):
        try:
            self.close()
        except Exception:
            pass
