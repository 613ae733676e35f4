"""Executable evaluation plans.

One ordered signal list (OSL) is built for the output pass and one per
(clock domain, edge polarity).  Elements are levelized, grouped by shared
input wires, and each register gets a terminal group that computes and
commits its next value.  Registers are committed in an order where every
reader of an old value goes before the register it reads; registers in
dependency cycles are split and committed only after the pass.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field

from .clocks import OUTPUT_DOMAIN, ClockAnalysis, PodPlan, cone
from .ir import FlatDesign


@dataclass
class SignalGroup:
    id: int
    level: int
    members: list[int]
    watch: list[int]
    terminal: int | None = None  # register committed by this group


@dataclass
class Terminal:
    register: int
    element: int | None  # element absorbed as the commit computation, or None for a copy of ``source``
    source: int
    deferred: bool = False


@dataclass
class RegisterOrder:
    commit_sequence: list[int]
    split_set: set[int]


@dataclass
class OrderedSignalList:
    name: str
    owner: object
    polarity: str | None
    root: int | None
    po: list[int]
    groups: list[SignalGroup]
    terminals: list[Terminal] = field(default_factory=list)
    order: RegisterOrder | None = None
    cross_read: set[int] = field(default_factory=set)
    levels: dict[int, int] = field(default_factory=dict)

    def elements(self) -> list[int]:
        return [m for g in self.groups for m in g.members]

    def wire_groups(self) -> list[SignalGroup]:
        return [g for g in self.groups if g.terminal is None]


@dataclass
class Schedule:
    output_pass: OrderedSignalList
    passes: list[OrderedSignalList]  # domain passes in dependency order
    analysis: ClockAnalysis

    def all_passes(self):
        return [self.output_pass] + self.passes

    def report(self, flat: FlatDesign) -> dict:
        name = lambda s: flat.signals[s].name
        out = []
        for p in self.all_passes():
            out.append({
                "name": p.name,
                "root": None if p.root is None else name(p.root),
                "polarity": p.polarity,
                "groups": [
                    {"id": g.id, "level": g.level,
                     "members": [name(flat.elements[m].output) if g.terminal is None
                                 else name(g.terminal) for m in g.members],
                     "watch": [name(s) for s in g.watch]}
                    for g in p.groups
                ],
                "commit_sequence": [] if p.order is None else [name(r) for r in p.order.commit_sequence],
                "split_set": [] if p.order is None else sorted(name(r) for r in p.order.split_set),
                "cross_read": sorted(name(r) for r in p.cross_read),
            })
        return {"passes": out}


def _tarjan(nodes: list[int], succ: dict[int, list[int]]) -> list[list[int]]:
    index, low, on, stack, comps = {}, {}, set(), [], []
    counter = [0]

    def strong(v):
        # iterative to avoid recursion limits on long chains
        work = [(v, iter(succ.get(v, ())))]
        index[v] = low[v] = counter[0]
        counter[0] += 1
        stack.append(v)
        on.add(v)
        while work:
            node, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter[0]
                    counter[0] += 1
                    stack.append(w)
                    on.add(w)
                    work.append((w, iter(succ.get(w, ()))))
                    advanced = True
                    break
                if w in on:
                    low[node] = min(low[node], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                low[work[-1][0]] = min(low[work[-1][0]], low[node])
            if low[node] == index[node]:
                comp = []
                while True:
                    w = stack.pop()
                    on.discard(w)
                    comp.append(w)
                    if w == node:
                        break
                comps.append(sorted(comp))

    for v in nodes:
        if v not in index:
            strong(v)
    return comps


def order_registers(registers: list[int], rcils: dict[int, frozenset]) -> RegisterOrder:
    """Order commits so readers of a register's old value commit before it."""
    regs = sorted(registers)
    rs = set(regs)
    succ = {a: sorted(b for b in rcils[a] if b in rs and b != a) for a in regs}
    comps = _tarjan(regs, succ)
    comp_of = {r: k for k, c in enumerate(comps) for r in c}
    split = {r for c in comps if len(c) >= 2 for r in c}
    csucc: dict[int, set[int]] = {k: set() for k in range(len(comps))}
    indeg = {k: 0 for k in range(len(comps))}
    for a in regs:
        for b in succ[a]:
            ka, kb = comp_of[a], comp_of[b]
            if ka != kb and kb not in csucc[ka]:
                csucc[ka].add(kb)
                indeg[kb] += 1
    heap = [(comps[k][0], k) for k in indeg if indeg[k] == 0]
    heapq.heapify(heap)
    seq = []
    while heap:
        _, k = heapq.heappop(heap)
        seq.extend(comps[k])
        for kb in csucc[k]:
            indeg[kb] -= 1
            if indeg[kb] == 0:
                heapq.heappush(heap, (comps[kb][0], kb))
    return RegisterOrder(seq, split)


def levelize(flat: FlatDesign, elements) -> dict[int, int]:
    """Level 0 for elements without wire inputs, else one above the highest driver."""
    elements = set(elements)
    drivers = {flat.elements[e].output: e for e in elements}
    level: dict[int, int] = {}
    for e in sorted(elements):
        if e in level:
            continue
        stack = [e]
        while stack:
            x = stack[-1]
            if x in level:
                stack.pop()
                continue
            deps = [drivers[s] for s in flat.elements[x].signal_inputs()
                    if flat.signals[s].kind == "wire" and s in drivers]
            pending = [d for d in deps if d not in level]
            if pending:
                stack.extend(pending)
                continue
            stack.pop()
            level[x] = 1 + max((level[d] for d in deps), default=-1)
    return level


def group(flat: FlatDesign, leveled: dict[int, int]) -> list[SignalGroup]:
    """Group each level's elements by transitive sharing of an input wire."""
    by_level: dict[int, list[int]] = {}
    for e, lv in leveled.items():
        by_level.setdefault(lv, []).append(e)
    groups = []
    for lv in sorted(by_level):
        members = sorted(by_level[lv])
        parent = {e: e for e in members}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        first_reader: dict[int, int] = {}
        for e in members:
            for s in flat.elements[e].signal_inputs():
                if flat.signals[s].kind != "wire":
                    continue
                if s in first_reader:
                    a, b = find(first_reader[s]), find(e)
                    if a != b:
                        parent[max(a, b)] = min(a, b)
                else:
                    first_reader[s] = e
        comps: dict[int, list[int]] = {}
        for e in members:
            comps.setdefault(find(e), []).append(e)
        for root in sorted(comps):
            ms = comps[root]
            watch = sorted({s for m in ms for s in flat.elements[m].signal_inputs()})
            groups.append(SignalGroup(len(groups), lv, ms, watch))
    return groups


def build_osl(flat: FlatDesign, pod: PodPlan, register_order: RegisterOrder | None,
              registers=(), name="", polarity=None, root=None, drivers=None) -> OrderedSignalList:
    drivers = drivers if drivers is not None else flat.drivers()
    registers = list(registers)
    if register_order is None:
        elements = set(pod.cone)
        terminals: list[Terminal] = []
    else:
        elements, _, _ = cone(flat, [flat.registers[r].d for r in registers], drivers)
        readers: dict[int, int] = {}
        for e in elements:
            for s in flat.elements[e].signal_inputs():
                readers[s] = readers.get(s, 0) + 1
        pin_count: dict[int, int] = {}
        for r in registers:
            pin_count[flat.registers[r].d] = pin_count.get(flat.registers[r].d, 0) + 1
        terminals = []
        for r in register_order.commit_sequence:
            d = flat.registers[r].d
            el = None
            if flat.signals[d].kind == "wire" and not readers.get(d) and pin_count[d] == 1:
                el = drivers[d].id
                elements.discard(el)
            terminals.append(Terminal(r, el, d, r in register_order.split_set))
    levels = levelize(flat, elements)
    groups = group(flat, levels)
    top = max(levels.values(), default=-1) + 1
    for t in terminals:
        if t.element is not None:
            watch = sorted(set(flat.elements[t.element].signal_inputs()))
            members = [t.element]
        else:
            watch, members = [t.source], []
        groups.append(SignalGroup(len(groups), top, members, watch, terminal=t.register))
    return OrderedSignalList(name, pod.owner, polarity, root, list(pod.po), groups, terminals,
                             register_order, set(), levels)


def build_schedule(flat: FlatDesign, analysis: ClockAnalysis) -> Schedule:
    drivers = flat.drivers()
    od = build_osl(flat, analysis.output_pod, None, name="OD", drivers=drivers)
    passes = []
    for d in analysis.domains:
        for pol in d.polarities():
            regs = d.with_polarity(pol)
            ro = order_registers(regs, analysis.rcil)
            pod = analysis.pods[d.id]
            sub = PodPlan(d.id, [flat.registers[r].d for r in regs], pod.pi, pod.cone, pod.wires)
            name = f"{flat.signals[d.root].name}:{pol}"
            passes.append(build_osl(flat, sub, ro, regs, name, pol, d.root, drivers))
    # registers read by another domain pass commit at the end of the iteration
    for p in passes:
        own = {t.register for t in p.terminals}
        for q in passes:
            if q is p:
                continue
            reads = {s for e in q.elements() for s in flat.elements[e].signal_inputs()}
            reads |= {t.source for t in q.terminals}
            p.cross_read |= own & reads
    return Schedule(od, passes, analysis)


__all__ = ["OUTPUT_DOMAIN", "OrderedSignalList", "RegisterOrder", "Schedule", "SignalGroup",
           "Terminal", "build_osl", "build_schedule", "group", "levelize", "order_registers"]
