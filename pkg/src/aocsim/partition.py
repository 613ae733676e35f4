"""Splitting evaluation plans into per-thread partitions."""
from __future__ import annotations

from dataclasses import dataclass, field

from .clocks import ClockAnalysis, cone
from .config import ExecConfig
from .ir import FlatDesign
from .schedule import OrderedSignalList, SignalGroup, Terminal, group, levelize


@dataclass
class CdoPlan:
    domain: int
    elements: set[int]
    attached: set[int]  # output-domain elements among ``elements``


@dataclass
class PoOSL:
    """Elements needed to compute one primary output of a pass."""
    id: int
    po: list
    elements: frozenset
    peak: int = 0


@dataclass
class ThreadPartition:
    id: int
    po: list
    elements: set[int]
    terminals: list[Terminal]
    groups: list[SignalGroup]
    duplicated: set[int] = field(default_factory=set)
    wpl: dict[int, list[tuple[int, int]]] = field(default_factory=dict)
    placeholders: dict[int, int] = field(default_factory=dict)
    bulk: list[int] = field(default_factory=list)
    peak_live: int = 0

    def order(self) -> list[int]:
        return [m for g in self.groups for m in g.members]

    def steps(self) -> list[tuple]:
        """Execution order as (element or None, extra reads); copy terminals read their source."""
        out = []
        for g in self.groups:
            if g.terminal is not None and not g.members:
                out.append((None, g.watch))
            out.extend((m, ()) for m in g.members)
        return out

    def wires(self, flat: FlatDesign) -> list[int]:
        return [flat.elements[e].output for g in self.groups if g.terminal is None
                for e in g.members if flat.signals[flat.elements[e].output].kind == "wire"]


@dataclass
class PassPartitions:
    osl: OrderedSignalList
    partitions: list[ThreadPartition]
    merge_log: list[dict]


def build_cdo(flat: FlatDesign, analysis: ClockAnalysis) -> list[CdoPlan]:
    """Each domain's cone plus the output-domain logic its registers drive."""
    readers = flat.readers()
    od = analysis.output_pod.cone
    out = []
    for d in analysis.domains:
        reached: set[int] = set()
        stack = [r for r, _ in d.registers]
        seen = set(stack)
        while stack:
            s = stack.pop()
            for e in readers[s]:
                if e.id in od and e.id not in reached:
                    reached.add(e.id)
                    if e.output not in seen:
                        seen.add(e.output)
                        stack.append(e.output)
        out.append(CdoPlan(d.id, set(analysis.pods[d.id].cone) | reached, reached))
    return out


def per_po_osls(flat: FlatDesign, osl: OrderedSignalList) -> list[PoOSL]:
    """One uniquified element set per primary output of ``osl``."""
    drivers = flat.drivers()
    allowed = set(osl.elements())
    units = []
    if osl.terminals:
        for t in osl.terminals:
            if t.element is not None:
                src = flat.elements[t.element].signal_inputs()
                els = cone(flat, src, drivers)[0] | {t.element}
            else:
                els = cone(flat, [t.source], drivers)[0]
            units.append(PoOSL(len(units), [t.register], frozenset(els & allowed)))
    else:
        for s in osl.po:
            units.append(PoOSL(len(units), [s], frozenset(cone(flat, [s], drivers)[0] & allowed)))
    return units


def merge_osls(units: list[PoOSL], tdmax: int, phmax: int = 32, peak=None) -> tuple[list[PoOSL], list[dict]]:
    """Greedily merge the pair sharing the most elements until at most ``tdmax`` remain.

    Ties go to the lowest ids; among equal-share pairs those whose estimated
    peak liveness fits ``phmax`` are taken first.  ``peak`` maps an element
    set to its peak live-wire count (defaults to the element count).
    """
    peak = peak or (lambda els: len(els))
    parts = [PoOSL(u.id, list(u.po), u.elements, peak(u.elements)) for u in units]
    log: list[dict] = []
    next_id = max((u.id for u in parts), default=-1) + 1
    shared: dict[tuple[int, int], int] = {}
    for i, a in enumerate(parts):
        for b in parts[i + 1:]:
            shared[(a.id, b.id)] = len(a.elements & b.elements)
    while len(parts) > tdmax:
        best = max(shared.values())
        cands = sorted(k for k, v in shared.items() if v == best)
        by_id = {p.id: p for p in parts}
        fitting = [k for k in cands if by_id[k[0]].peak + by_id[k[1]].peak <= phmax]
        pick = (fitting or cands)[0]
        a, b = by_id[pick[0]], by_id[pick[1]]
        others = [v for k, v in shared.items() if k != pick]
        merged = PoOSL(next_id, a.po + b.po, a.elements | b.elements)
        merged.peak = peak(merged.elements)
        next_id += 1
        log.append({"step": len(log), "merged": list(pick), "into": merged.id, "shared": best,
                    "max_other": max(others, default=None), "candidates": len(cands),
                    "fits_phmax": bool(fitting)})
        parts = [p for p in parts if p.id not in pick]
        shared = {k: v for k, v in shared.items() if pick[0] not in k and pick[1] not in k}
        for p in parts:
            shared[(p.id, merged.id)] = len(p.elements & merged.elements)
        parts.append(merged)
    return parts, log


def order_wire_pairs(flat: FlatDesign, groups: list[SignalGroup]) -> tuple[list[SignalGroup], dict]:
    """Place first wires of cross-level pairs last in their level and second wires first in the next."""
    wire_groups = [g for g in groups if g.terminal is None]
    terms = [g for g in groups if g.terminal is not None]
    owner = {}
    for g in wire_groups:
        for m in g.members:
            owner[flat.elements[m].output] = g
    readers: dict[int, list[int]] = {}
    for g in groups:
        for m in g.members:
            for s in flat.elements[m].signal_inputs():
                readers.setdefault(s, []).append(m)
    wpl: dict[int, list[tuple[int, int]]] = {}
    key: dict[int, tuple] = {}
    for g in wire_groups:
        for m in g.members:
            fw = flat.elements[m].output
            for r in readers.get(fw, ()):
                sw = flat.elements[r].output
                sg = owner.get(sw)
                if sg is not None and sg.level == g.level + 1:
                    wpl.setdefault(g.level, []).append((fw, sw))
    for lv in wpl:
        # pairs whose first wire has a single reader go last
        wpl[lv].sort(key=lambda p: (len(readers[p[0]]) == 1, p))
    first_rank: dict[int, int] = {}
    last_rank: dict[int, int] = {}
    for lv, pairs in wpl.items():
        for k, (fw, sw) in enumerate(pairs):
            last_rank[owner[fw].id] = max(last_rank.get(owner[fw].id, -1), k)
            first_rank[owner[sw].id] = min(first_rank.get(owner[sw].id, 1 << 30), len(pairs) - 1 - k)
    for g in wire_groups:
        if g.id in first_rank:
            key[g.id] = (g.level, 0, first_rank[g.id], g.id)
        elif g.id in last_rank:
            key[g.id] = (g.level, 2, last_rank[g.id], g.id)
        else:
            key[g.id] = (g.level, 1, 0, g.id)
    ordered = sorted(wire_groups, key=lambda g: key[g.id])
    return ordered + terms, wpl


def _steps(order):
    return [x if isinstance(x, tuple) else (x, ()) for x in order]


def live_intervals(flat: FlatDesign, order) -> dict[int, tuple[int, int]]:
    """Wire -> (definition position, last use position) over an execution order.

    ``order`` holds element ids or (element or None, extra reads) pairs.
    """
    iv = {}
    for pos, (e, extra) in enumerate(_steps(order)):
        reads = list(extra)
        if e is not None:
            reads += flat.elements[e].signal_inputs()
        for s in reads:
            if s in iv:
                iv[s] = (iv[s][0], pos)
        if e is not None and flat.signals[flat.elements[e].output].kind == "wire":
            iv[flat.elements[e].output] = (pos, pos)
    return iv


def peak_liveness(flat: FlatDesign, order) -> int:
    iv = live_intervals(flat, order)
    events = []
    for a, b in iv.values():
        events.append((a, 0, 1))
        events.append((b, 1, -1))
    cur = best = 0
    for _, _, d in sorted(events):
        cur += d
        best = max(best, cur)
    return best


def assign_placeholders(flat: FlatDesign, order, phmax: int, cw: int = 64):
    """Linear-scan slot assignment; returns (wire -> slot, spilled wires)."""
    iv = live_intervals(flat, order)
    ends: dict[int, list[int]] = {}
    for w, (_, b) in iv.items():
        ends.setdefault(b, []).append(w)
    free: list[int] = []
    used = 0
    slots: dict[int, int] = {}
    bulk: list[int] = []
    for pos, (e, _) in enumerate(_steps(order)):
        if e is None:
            for w in ends.get(pos, ()):
                if w in slots:
                    free.append(slots[w])
            continue
        out = flat.elements[e].output
        sig = flat.signals[out]
        if out in iv:
            if sig.width <= cw and sig.dims < 2:
                if free:
                    free.sort()
                    slots[out] = free.pop(0)
                elif used < phmax:
                    slots[out] = used
                    used += 1
                else:
                    bulk.append(out)
            else:
                bulk.append(out)
        for w in ends.get(pos, ()):
            if w in slots:
                free.append(slots[w])
    return slots, bulk


def _finish(flat: FlatDesign, osl: OrderedSignalList, unit: PoOSL, pid: int, cfg: ExecConfig,
            placeholders: bool) -> ThreadPartition:
    term_of = {t.register: t for t in osl.terminals}
    terms = [t for t in osl.terminals if t.register in set(unit.po)] if osl.terminals else []
    tel = {t.element for t in terms if t.element is not None}
    wire_els = set(unit.elements) - tel - {t.element for t in term_of.values() if t.element is not None}
    levels = levelize(flat, wire_els)
    groups = group(flat, levels)
    top = max(levels.values(), default=-1) + 1
    for t in terms:
        if t.element is not None:
            groups.append(SignalGroup(len(groups), top, [t.element],
                                      sorted(set(flat.elements[t.element].signal_inputs())), t.register))
        else:
            groups.append(SignalGroup(len(groups), top, [], [t.source], t.register))
    groups, wpl = order_wire_pairs(flat, groups)
    for k, g in enumerate(groups):
        g.id = k
    part = ThreadPartition(pid, list(unit.po), wire_els, terms, groups, wpl=wpl)
    order = part.steps()
    part.peak_live = peak_liveness(flat, order)
    if placeholders:
        part.placeholders, part.bulk = assign_placeholders(flat, order, cfg.phmax, cfg.cw)
    else:
        part.bulk = [w for w in part.wires(flat)]
    return part


def partition_pass(flat: FlatDesign, osl: OrderedSignalList, cfg: ExecConfig,
                   placeholders: bool = True) -> PassPartitions:
    units = per_po_osls(flat, osl)
    if not units:
        return PassPartitions(osl, [], [])
    if cfg.tdmax == 1:
        merged = [PoOSL(0, [p for u in units for p in u.po], frozenset().union(*(u.elements for u in units)))]
        log: list[dict] = []
    else:
        merged, log = merge_osls(units, cfg.tdmax, cfg.phmax,
                                 peak=lambda els: peak_liveness(flat, sorted(els)))
    merged.sort(key=lambda u: min(u.po))
    parts = [_finish(flat, osl, u, k, cfg, placeholders) for k, u in enumerate(merged)]
    count: dict[int, int] = {}
    for p in parts:
        for e in p.order():
            count[e] = count.get(e, 0) + 1
    for p in parts:
        p.duplicated = {e for e in p.order() if count[e] > 1}
    return PassPartitions(osl, parts, log)


def partition_report(flat: FlatDesign, plans: list[PassPartitions], cdos: list[CdoPlan]) -> dict:
    name = lambda s: flat.signals[s].name
    return {
        "cdo": [{"domain": c.domain, "elements": len(c.elements), "attached": len(c.attached)} for c in cdos],
        "passes": [
            {
                "name": pp.osl.name,
                "merge_log": pp.merge_log,
                "partitions": [
                    {"id": p.id, "po": [name(s) for s in p.po], "elements": len(p.order()),
                     "duplicated": len(p.duplicated), "peak_live": p.peak_live,
                     "placeholders": len(set(p.placeholders.values())), "bulk": len(p.bulk),
                     "wpl": {str(k): [[name(a), name(b)] for a, b in v] for k, v in sorted(p.wpl.items())}}
                    for p in pp.partitions
                ],
            }
            for pp in plans
        ],
    }
