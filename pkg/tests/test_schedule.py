import itertools

from hypothesis import given, settings, strategies as st

from aocsim import corpus as C
from aocsim.clocks import analyze
from aocsim.corpus import random_design
from aocsim.ir import FlatDesign
from aocsim.optimize import optimize
from aocsim.schedule import RegisterOrder, build_schedule, group, levelize, order_registers

from util import build, clocked, column, engine_trace, oracle_trace, rebuild


def names(d, ids):
    return [d.signals[s].name for s in ids]


def test_shift_register_order():
    _, o = build(C.SHIFT_V, "shift")
    a = analyze(o)
    ro = order_registers(list(o.registers), a.rcil)
    assert names(o, ro.commit_sequence) == ["shift_q2", "shift_q1"]
    assert ro.split_set == set()


def test_swap_split():
    _, o = build(C.SWAP_V, "swap")
    a = analyze(o)
    ro = order_registers(list(o.registers), a.rcil)
    assert ro.split_set == set(o.registers)
    tr, _ = engine_trace(o, clocked("swap_clk"), 4)
    assert column(tr, "swap_a") == [1, 0, 1, 0]
    assert column(tr, "swap_b") == [0, 1, 0, 1]


def test_self_recirculation_not_split():
    _, o = build(C.COUNTER_V, "counter")
    ro = order_registers(list(o.registers), analyze(o).rcil)
    assert ro.split_set == set()


def test_split_removal_breaks_swap():
    _, o = build(C.SWAP_V, "swap")
    sched = build_schedule(o, analyze(o))
    stim = clocked("swap_clk")
    ref = oracle_trace(o, stim, 20)
    good, _ = engine_trace(o, stim, 20, threads=1, schedule=rebuild(o, sched, lambda p: p.order))
    assert ref.first_mismatch(good) is None
    # no split at all
    bad, _ = engine_trace(o, stim, 20, threads=1,
                          schedule=rebuild(o, sched, lambda p: RegisterOrder(p.order.commit_sequence, set())))
    assert ref.first_mismatch(bad) is not None
    # one register unsplit and committed ahead of the other
    for victim in sorted(o.registers):
        def mutate(p):
            seq = [victim] + [r for r in p.order.commit_sequence if r != victim]
            return RegisterOrder(seq, p.order.split_set - {victim})
        bad, _ = engine_trace(o, stim, 20, threads=1, schedule=rebuild(o, sched, mutate))
        assert ref.first_mismatch(bad) is not None


COUNTERS_V = """module top(input clk, output reg [3:0] a, output reg [3:0] b, output reg [3:0] c);
  always @(posedge clk) a <= a + 4'd1;
  always @(posedge clk) b <= b + 4'd3;
  always @(posedge clk) c <= c ^ 4'd5;
endmodule"""


def test_independent_counters_any_order():
    _, o = build(COUNTERS_V, "top")
    sched = build_schedule(o, analyze(o))
    stim = clocked("top_clk")
    ref = oracle_trace(o, stim, 20)
    for perm in itertools.permutations(sorted(o.registers)):
        s = rebuild(o, sched, lambda p: RegisterOrder(list(perm), set()))
        tr, _ = engine_trace(o, stim, 20, threads=1, schedule=s)
        assert ref.first_mismatch(tr) is None


def _levels_by_name(o, lv):
    return {o.signals[o.elements[e].output].name: l for e, l in lv.items()}


def test_levelize_chain():
    _, o = build("module top(input a, input b, input c, output y); wire w1 = a & b; wire w2 = w1 | c;"
                 " assign y = ~w2; endmodule", "top")
    lv = _levels_by_name(o, levelize(o, o.elements))
    assert (lv["top_w1"], lv["top_w2"]) == (0, 1)


def test_levelize_diamond():
    _, o = build("module top(input [3:0] a, output [3:0] y); wire [3:0] w1 = a + 4'd1; wire [3:0] w2 = a ^ 4'd6;"
                 " wire [3:0] w3 = w1 & w2; assign y = ~w3; endmodule", "top")
    lv = _levels_by_name(o, levelize(o, o.elements))
    assert (lv["top_w1"], lv["top_w2"], lv["top_w3"]) == (0, 0, 1)


def longest_path(o, els):
    drivers = {o.elements[e].output: e for e in els}
    memo = {}

    def lp(e):
        if e not in memo:
            ins = [drivers[s] for s in o.elements[e].signal_inputs()
                   if o.signals[s].kind == "wire" and s in drivers]
            memo[e] = 0 if not ins else 1 + max(lp(x) for x in ins)
        return memo[e]

    return {e: lp(e) for e in els}


@settings(max_examples=30)
@given(st.integers(0, 100_000))
def test_levelize_matches_longest_path(seed):
    o = optimize(random_design(seed).design)
    assert levelize(o, o.elements) == longest_path(o, o.elements)


def _group_fixture():
    d = FlatDesign("top")
    i = d.add_signal("top_i", "input", 4).id
    w = {n: d.add_signal(f"top_{n}", "wire", 4).id for n in ("x", "y", "z", "q")}
    for n in w:
        d.add_element("buf", [i], w[n])
    outs = [d.add_signal(f"top_o{k}", "output", 4).id for k in range(3)]
    e1 = d.add_element("and", [w["x"], w["y"]], outs[0]).id
    e2 = d.add_element("or", [w["y"], w["z"]], outs[1]).id
    e3 = d.add_element("not", [w["q"]], outs[2]).id
    return d, (e1, e2, e3)


def test_group_shared_wire():
    d, (e1, e2, e3) = _group_fixture()
    lv = levelize(d, d.elements)
    groups = [sorted(g.members) for g in group(d, lv) if g.level == 1]
    assert sorted(groups) == [sorted([e1, e2]), [e3]]


def test_group_no_sharing_singletons():
    _, o = build("module top(input [3:0] a, input [3:0] b, output [3:0] y, output [3:0] z);"
                 " assign y = a + 4'd1; assign z = b - 4'd1; endmodule", "top")
    assert all(len(g.members) == 1 for g in group(o, levelize(o, o.elements)))


def test_group_bus_single_group():
    _, o = build("module top(input [7:0] a, output [3:0] y, output [3:0] z, output x);"
                 " wire [7:0] bus = a + 8'd1; assign y = bus[3:0]; assign z = bus[7:4]; assign x = ^bus;"
                 " endmodule", "top")
    lv = levelize(o, o.elements)
    top_level = [g for g in group(o, lv) if g.level == 1]
    assert len(top_level) == 1 and len(top_level[0].members) == 3


def brute_components(o, members):
    members = list(members)
    adj = {e: set() for e in members}
    for a, b in itertools.combinations(members, 2):
        wa = {s for s in o.elements[a].signal_inputs() if o.signals[s].kind == "wire"}
        wb = {s for s in o.elements[b].signal_inputs() if o.signals[s].kind == "wire"}
        if wa & wb:
            adj[a].add(b)
            adj[b].add(a)
    comps, seen = [], set()
    for e in members:
        if e in seen:
            continue
        stack, comp = [e], set()
        while stack:
            x = stack.pop()
            if x not in comp:
                comp.add(x)
                stack.extend(adj[x])
        seen |= comp
        comps.append(frozenset(comp))
    return set(comps)


@settings(max_examples=30)
@given(st.integers(0, 100_000))
def test_group_matches_connected_components(seed):
    o = optimize(random_design(seed).design)
    lv = levelize(o, o.elements)
    groups = group(o, lv)
    for level in set(lv.values()):
        got = {frozenset(g.members) for g in groups if g.level == level}
        assert got == brute_components(o, [e for e, l in lv.items() if l == level])


def test_empty_cone_single_buffer_group():
    _, o = build("module top(input [3:0] a, output [3:0] y); assign y = a; endmodule", "top")
    od = build_schedule(o, analyze(o)).output_pass
    assert len(od.groups) == 1
    (m,) = od.groups[0].members
    assert o.elements[m].op == "buf"


@settings(max_examples=30)
@given(st.integers(0, 100_000))
def test_osl_structure(seed):
    o = optimize(random_design(seed).design)
    sched = build_schedule(o, analyze(o))
    for p in sched.all_passes():
        els = p.elements()
        assert len(els) == len(set(els))
        level_of = {}
        for g in p.groups:
            for m in g.members:
                level_of[o.elements[m].output] = g.level
        assert [g.level for g in p.groups] == sorted(g.level for g in p.groups)
        for g in p.groups:
            for m in g.members:
                for s in o.elements[m].signal_inputs():
                    if o.signals[s].kind == "wire" and s in level_of:
                        assert level_of[s] < g.level


def test_schedule_deterministic():
    cd = random_design(11)
    o = optimize(cd.design)
    r1 = build_schedule(o, analyze(o)).report(o)
    r2 = build_schedule(optimize(random_design(11).design), analyze(o)).report(o)
    assert r1 == r2
