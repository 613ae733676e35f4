"""Clock roots, clock domains, output domain and register cone inputs."""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ClockDependencyCycle, ConstantClock
from .ir import FlatDesign

OUTPUT_DOMAIN = "OD"


@dataclass
class ClockDomain:
    id: int
    root: int
    registers: list[tuple[int, str]]
    depends_on: list[int] = field(default_factory=list)

    def polarities(self) -> list[str]:
        return sorted({p for _, p in self.registers}, key=("posedge", "negedge").index)

    def with_polarity(self, pol: str) -> list[int]:
        return [r for r, p in self.registers if p == pol]


@dataclass
class PodPlan:
    owner: object  # domain id or OUTPUT_DOMAIN
    po: list[int]
    pi: list[int]
    cone: set[int]  # element ids
    wires: set[int]


@dataclass
class ClockAnalysis:
    roots: dict[int, int]
    domains: list[ClockDomain]  # in dependency order
    output_pod: PodPlan
    pods: dict[int, PodPlan]
    rcil: dict[int, frozenset]

    def domain_of(self) -> dict[int, int]:
        return {r: d.id for d in self.domains for r, _ in d.registers}

    def report(self, flat: FlatDesign) -> dict:
        name = lambda s: flat.signals[s].name
        return {
            "domains": [
                {
                    "id": d.id, "root": name(d.root), "root_kind": flat.signals[d.root].kind,
                    "registers": [{"name": name(r), "polarity": p} for r, p in d.registers],
                    "depends_on": d.depends_on,
                    "pod_size": len(self.pods[d.id].cone),
                }
                for d in self.domains
            ],
            "output_domain": {
                "po": [name(s) for s in self.output_pod.po],
                "pod_size": len(self.output_pod.cone),
            },
        }


def trace_clock_roots(flat: FlatDesign) -> dict[int, int]:
    drivers = flat.drivers()
    roots = {}
    for r in flat.registers.values():
        drv = drivers.get(r.clock)
        if drv is not None and drv.op == "const":
            raise ConstantClock(flat.signals[r.register].name)
        roots[r.register] = r.clock
    return roots


def cone(flat: FlatDesign, po, drivers=None) -> tuple[set[int], set[int], set[int]]:
    """Backward trace from signals ``po`` through wires.

    Returns (elements, wires, primary inputs), where primary inputs are the
    inputs and registers reached.
    """
    drivers = drivers if drivers is not None else flat.drivers()
    elements, wires, pis = set(), set(), set()
    stack = list(po)
    seen = set()
    while stack:
        s = stack.pop()
        if s in seen:
            continue
        seen.add(s)
        kind = flat.signals[s].kind
        if kind in ("input", "register"):
            pis.add(s)
            continue
        if kind == "wire":
            wires.add(s)
        e = drivers[s]
        elements.add(e.id)
        stack.extend(e.signal_inputs())
    return elements, wires, pis


def compute_rcil(flat: FlatDesign, register: int, drivers=None) -> frozenset:
    return frozenset(cone(flat, [flat.registers[register].d], drivers)[2])


def group_domains(flat: FlatDesign, roots: dict[int, int]) -> ClockAnalysis:
    drivers = flat.drivers()
    by_root: dict[int, list] = {}
    for reg in sorted(roots):
        by_root.setdefault(roots[reg], []).append((reg, flat.registers[reg].polarity))
    domains = [ClockDomain(i, root, regs) for i, (root, regs) in enumerate(sorted(by_root.items()))]
    owner = {r: d.id for d in domains for r, _ in d.registers}
    for d in domains:
        kind = flat.signals[d.root].kind
        if kind == "register":
            deps = {owner[d.root]}
        elif kind == "wire":
            deps = {owner[s] for s in cone(flat, [d.root], drivers)[2] if s in owner}
        else:
            deps = set()
        d.depends_on = sorted(deps)
    order = _topo(domains, flat)
    root_wires = sorted({d.root for d in domains if flat.signals[d.root].kind == "wire"})
    od_po = sorted(flat.outputs) + root_wires
    el, wi, pi = cone(flat, od_po, drivers)
    output_pod = PodPlan(OUTPUT_DOMAIN, od_po, sorted(pi), el, wi)
    pods = {}
    rcil = {}
    for d in domains:
        po = [flat.registers[r].d for r, _ in d.registers]
        el, wi, pi = cone(flat, po, drivers)
        pods[d.id] = PodPlan(d.id, po, sorted(pi), el, wi)
        for r, _ in d.registers:
            rcil[r] = compute_rcil(flat, r, drivers)
    return ClockAnalysis(dict(roots), order, output_pod, pods, rcil)


def _topo(domains: list[ClockDomain], flat: FlatDesign) -> list[ClockDomain]:
    by_id = {d.id: d for d in domains}
    state: dict[int, int] = {}
    out: list[ClockDomain] = []

    def visit(d, path):
        st = state.get(d.id)
        if st == 2:
            return
        if st == 1:
            cyc = path[path.index(d.id):] + [d.id]
            raise ClockDependencyCycle([flat.signals[by_id[i].root].name for i in cyc])
        state[d.id] = 1
        for dep in d.depends_on:
            visit(by_id[dep], path + [d.id])
        state[d.id] = 2
        out.append(d)

    for d in domains:
        visit(d, [])
    return out


def analyze(flat: FlatDesign) -> ClockAnalysis:
    return group_domains(flat, trace_clock_roots(flat))
