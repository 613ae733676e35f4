"""Compile partitions into Python functions.

Gated blocks test a per-group activity flag, recompute the group only if
set, and raise the flags of groups reading any wire whose value changed.
Full blocks are straight-line code; their scalar wires live in local
placeholders and the rest in the block's bulk list.
"""
from __future__ import annotations

from .. import ops
from ..ir import Const, FlatDesign


def _m(width: int) -> str:
    return hex(ops.mask(width))


def py_expr(flat: FlatDesign, el, ref, consts: dict) -> str:
    """Python expression computing element ``el``; ``ref`` renders operands."""
    out_w = flat.signals[el.output].width
    M = _m(out_w)
    ws = [flat.operand_width(x) for x in el.inputs]
    a = [ref(x) for x in el.inputs]
    op = el.op
    wide = any(w > out_w for w in ws)

    def masked(expr, need=True):
        return f"({expr}) & {M}" if need else f"({expr})"

    if op == "const":
        return hex(el.params["value"] & ops.mask(out_w))
    if op == "buf":
        return masked(a[0], ws[0] > out_w)
    if op == "not":
        return f"~{a[0]} & {M}"
    if op == "neg":
        return f"-{a[0]} & {M}"
    if op == "lnot":
        return f"(0 if {a[0]} else 1)"
    if op in ("rand", "rnand"):
        t, f = (1, 0) if op == "rand" else (0, 1)
        return f"({t} if {a[0]} == {_m(ws[0])} else {f})"
    if op in ("ror", "rnor"):
        t, f = (1, 0) if op == "ror" else (0, 1)
        return f"({t} if {a[0]} else {f})"
    if op in ("rxor", "rxnor"):
        return f"(({a[0]}).bit_count() & 1)" if op == "rxor" else f"(~({a[0]}).bit_count() & 1)"
    if op in ("and", "or", "xor"):
        sym = {"and": "&", "or": "|", "xor": "^"}[op]
        need = wide if op != "and" else all(w > out_w for w in ws)
        return masked(f"{a[0]} {sym} {a[1]}", need)
    if op == "xnor":
        return f"~({a[0]} ^ {a[1]}) & {M}"
    if op == "land":
        return f"(1 if {a[0]} and {a[1]} else 0)"
    if op == "lor":
        return f"(1 if {a[0]} or {a[1]} else 0)"
    if op in ("add", "sub", "mul"):
        sym = {"add": "+", "sub": "-", "mul": "*"}[op]
        return f"({a[0]} {sym} {a[1]}) & {M}"
    const_b = el.inputs[1].value if len(el.inputs) > 1 and isinstance(el.inputs[1], Const) else None
    if op in ("div", "mod"):
        sym = "//" if op == "div" else "%"
        if const_b:
            return f"({a[0]} {sym} {a[1]}) & {M}"
        return f"(({a[0]} {sym} {a[1]}) & {M} if {a[1]} else 0)"
    if op == "shl":
        if const_b is not None:
            return f"({a[0]} << {const_b}) & {M}" if const_b < out_w else "0"
        return f"(({a[0]} << {a[1]}) & {M} if {a[1]} < {out_w} else 0)"
    if op == "shr":
        return masked(f"{a[0]} >> {a[1]}", ws[0] > out_w)
    if op in ops.COMPARE:
        sym = {"eq": "==", "ne": "!=", "lt": "<", "le": "<=", "gt": ">", "ge": ">="}[op]
        return f"(1 if {a[0]} {sym} {a[1]} else 0)"
    if op == "mux":
        return masked(f"{a[1]} if {a[0]} else {a[2]}", ws[1] > out_w or ws[2] > out_w)
    if op == "case":
        parts = []
        for labels, v in zip(el.params["labels"], a[1:-1]):
            if len(labels) == 1:
                cond = f"{a[0]} == {next(iter(labels))}"
            else:
                key = f"_L{len(consts)}"
                consts[key] = frozenset(labels)
                cond = f"{a[0]} in {key}"
            parts.append(f"{v} if {cond} else ")
        return masked("".join(parts) + a[-1], wide)
    if op == "index":
        ew = el.params["elem"]
        count = ws[0] // ew
        em = ops.mask(min(ew, out_w))
        if ew == 1:
            return f"(({a[0]} >> {a[1]}) & 1 if {a[1]} < {count} else 0)"
        return f"(({a[0]} >> ({a[1]} * {ew})) & {hex(em)} if {a[1]} < {count} else 0)"
    if op == "slice":
        return masked(f"{a[0]} >> {el.params['lo']}", ws[0] - el.params["lo"] > out_w)
    if op == "demux":
        ew = el.params["elem"]
        count = ws[0] // ew
        em = _m(ew)
        sh = f"({a[1]} * {ew})" if ew != 1 else a[1]
        body = f"({a[0]} & ~({em} << {sh})) | (({a[2]} & {em}) << {sh})"
        return f"(({body}) & {M} if {a[1]} < {count} else {a[0]} & {M})"
    if op == "concat":
        shift = sum(ws)
        terms = []
        for x, w in zip(a, ws):
            shift -= w
            terms.append(f"({x} << {shift})" if shift else x)
        return masked(" | ".join(terms), sum(ws) > out_w)
    raise ValueError(op)


class BlockCode:
    """Source and metadata of one compiled partition."""

    def __init__(self, name, source, bulk_index, group_flags, n_elements, consts, cluster_flags, n_flags):
        self.name = name
        self.source = source
        self.bulk_index = bulk_index  # wire id -> index in the block's list
        self.group_flags = group_flags  # group -> global flag index
        self.cluster_flags = cluster_flags  # group -> summary flag of its cluster (gated mode)
        self.n_flags = n_flags  # flags used by this block, summary flags included
        self.n_elements = n_elements
        self.consts = consts
        self.fn = None

    def compile(self):
        ns = dict(self.consts)
        exec(compile(self.source, f"<aoc:{self.name}>", "exec"), ns)
        self.fn = ns[self.name]
        return self.fn


def wire_clusters(flat: FlatDesign, groups) -> list[list]:
    """Connected clusters of non-terminal groups linked through block wires, in schedule order.

    Groups of different clusters never read each other's wires, so running
    the clusters one after another is a valid topological order.
    """
    wire_groups = [g for g in groups if g.terminal is None]
    parent = list(range(len(wire_groups)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    producer = {}
    for k, g in enumerate(wire_groups):
        for m in g.members:
            producer[flat.elements[m].output] = k
    for k, g in enumerate(wire_groups):
        for s in g.watch:
            j = producer.get(s)
            if j is not None:
                a, b = find(j), find(k)
                if a != b:
                    parent[max(a, b)] = min(a, b)
    out: dict[int, list] = {}
    for k, g in enumerate(wire_groups):
        out.setdefault(find(k), []).append(g)
    return [out[r] for r in sorted(out)]


CLUSTER_MIN = 2  # clusters with fewer groups are not wrapped in a summary flag


def gen_block(flat: FlatDesign, part, name: str, flag_base: int, gated: bool,
              published: set[int], deferred: set[int], late: set[int], instrument: bool) -> BlockCode:
    """Generate the function for one partition.

    Signature: fn(v, w, act, st, ch, pend, late, cnt).  ``v`` is the shared
    store, ``w`` the block's wire list, ``st`` the counters [elements,
    groups run], ``ch`` collects in-place register changes, ``pend`` and
    ``late`` collect deferred commits, ``cnt`` counts wire evaluations.

    In gated mode independent wire-group clusters are additionally guarded
    by a summary flag raised together with any of their group flags, so an
    idle cluster costs one test.
    """
    wires = part.wires(flat)
    use_ph = not gated
    bulk = [x for x in wires if not (use_ph and x in part.placeholders)]
    bulk_index = {x: k for k, x in enumerate(bulk)}
    consts: dict = {}

    def ref(x):
        if isinstance(x, Const):
            return hex(x.value)
        if flat.signals[x].kind == "wire":
            if use_ph and x in part.placeholders:
                return f"p{part.placeholders[x]}"
            return f"w[{bulk_index[x]}]"
        return f"v[{x}]"

    flags = {g.id: flag_base + k for k, g in enumerate(part.groups)}
    n_flags = len(part.groups)
    cluster_flags: dict[int, int] = {}
    if gated:
        clusters = wire_clusters(flat, part.groups)
        for c in clusters:
            if len(c) >= CLUSTER_MIN:
                for g in c:
                    cluster_flags[g.id] = flag_base + n_flags
                n_flags += 1
        order = [g for c in clusters for g in c] + [g for g in part.groups if g.terminal is not None]
    else:
        order = list(part.groups)
    watchers: dict[int, list[int]] = {}
    for g in part.groups:
        for s in g.watch:
            if flat.signals[s].kind == "wire":
                watchers.setdefault(s, []).append(flags[g.id])
    lines = [f"def {name}(v, w, act, st, ch, pend, late, cnt):", "    ng = 0; ne = 0"]
    n_el = 0
    open_cluster = None
    for g in order:
        ind = "    "
        if gated:
            cf = cluster_flags.get(g.id)
            if cf != open_cluster:
                if cf is not None:
                    lines.append(f"    if act[{cf}]:")
                    lines.append(f"        act[{cf}] = 0")
                open_cluster = cf
            if cf is not None:
                ind = "        "
            f = flags[g.id]
            lines.append(f"{ind}if act[{f}]:")
            ind += "    "
            lines.append(f"{ind}act[{f}] = 0")
            lines.append(f"{ind}ng += 1" + (f"; ne += {len(g.members) - 1}" if len(g.members) > 1 else ""))
        n_el += len(g.members)
        if g.terminal is not None:
            r = g.terminal
            t = next(t for t in part.terminals if t.register == r)
            expr = py_expr(flat, flat.elements[t.element], ref, consts) if t.element is not None else ref(t.source)
            if t.element is None and flat.signals[t.source].width > flat.signals[r].width:
                expr = f"{expr} & {_m(flat.signals[r].width)}"
            lines.append(f"{ind}x = {expr}")
            if r in late:
                lines.append(f"{ind}late.append(({r}, x))")
            elif r in deferred:
                lines.append(f"{ind}pend.append(({r}, x))")
            else:
                lines.append(f"{ind}if x != v[{r}]:")
                lines.append(f"{ind}    v[{r}] = x")
                lines.append(f"{ind}    ch.append({r})")
            continue
        for m in g.members:
            el = flat.elements[m]
            o = el.output
            expr = py_expr(flat, el, ref, consts)
            if flat.signals[o].kind == "output":
                lines.append(f"{ind}v[{o}] = {expr}")
                continue
            if instrument:
                lines.append(f"{ind}cnt[{o}] = cnt.get({o}, 0) + 1")
            dst = ref(o)
            if gated:
                lines.append(f"{ind}x = {expr}")
                marks = watchers.get(o, [])
                lines.append(f"{ind}if x != {dst}:")
                lines.append(f"{ind}    {dst} = x")
                for k in marks:
                    lines.append(f"{ind}    act[{k}] = 1")
                if o in published:
                    lines.append(f"{ind}    v[{o}] = x")
            else:
                lines.append(f"{ind}{dst} = {expr}")
                if o in published:
                    lines.append(f"{ind}v[{o}] = {dst}")
    if gated:
        lines.append("    st[0] += ng + ne; st[1] += ng")
    else:
        lines.append(f"    st[0] += {n_el}; st[1] += {len(part.groups)}")
    lines.append("    return None")
    return BlockCode(name, "\n".join(lines) + "\n", bulk_index, flags, n_el, consts, cluster_flags, n_flags)
