import pytest
from hypothesis import given, settings, strategies as st

from aocsim import corpus as C
from aocsim.clocks import OUTPUT_DOMAIN, analyze, compute_rcil, group_domains, trace_clock_roots
from aocsim.corpus import random_design
from aocsim.errors import ClockDependencyCycle, ConstantClock
from aocsim.ir import FlatDesign, RegisterInfo
from aocsim.optimize import optimize

from util import build


def names(d, ids):
    return sorted(d.signals[s].name for s in ids)


def test_input_clock_root():
    _, o = build(C.COUNTER_V, "counter")
    roots = trace_clock_roots(o)
    assert list(roots.values()) == [o.lookup("counter_clk")]


def test_gated_clock_root_is_wire():
    _, o = build(C.GATED_V, "gated")
    roots = trace_clock_roots(o)
    q = o.lookup("gated_q")
    assert o.signals[roots[q]].kind == "wire"
    assert o.signals[roots[q]].name == "gated_gclk"
    assert roots[o.lookup("gated_free")] == o.lookup("gated_clk")


def test_divider_domains():
    _, o = build(C.DIVIDER_V, "divider")
    a = analyze(o)
    t, q = o.lookup("divider_t"), o.lookup("divider_q")
    assert a.roots[q] == t
    by_root = {d.root: d for d in a.domains}
    clk_dom = by_root[o.lookup("divider_clk")]
    t_dom = by_root[t]
    assert t_dom.depends_on == [clk_dom.id]
    assert clk_dom.depends_on == []
    assert [d.id for d in a.domains].index(clk_dom.id) < [d.id for d in a.domains].index(t_dom.id)


def test_single_clock_one_domain():
    _, o = build(C.COUNTER_V, "counter")
    a = analyze(o)
    assert len(a.domains) == 1 and a.domains[0].depends_on == []


def test_outputs_only_design():
    _, o = build("module top(input [3:0] a, output [3:0] y); assign y = a + 4'd1; endmodule", "top")
    a = analyze(o)
    assert a.domains == []
    assert a.output_pod.owner == OUTPUT_DOMAIN
    assert a.output_pod.po == [o.lookup("top_y")]


def test_mixed_polarity_shares_domain():
    _, o = build("""module top(input clk, input d, output reg p, output reg n);
  always @(posedge clk) p <= d;
  always @(negedge clk) n <= d;
endmodule""", "top")
    (dom,) = analyze(o).domains
    assert dom.polarities() == ["posedge", "negedge"]


def test_constant_clock_rejected():
    _, o = build("""module top(input d, output reg q); wire c = 1'b0; always @(posedge c) q <= d; endmodule""",
                 "top")
    with pytest.raises(ConstantClock):
        trace_clock_roots(o)


def test_clock_dependency_cycle():
    d = FlatDesign("top")
    a = d.add_signal("top_a", "register", 1).id
    b = d.add_signal("top_b", "register", 1).id
    na = d.add_signal("top_na", "wire", 1).id
    nb = d.add_signal("top_nb", "wire", 1).id
    d.add_element("not", [a], na)
    d.add_element("not", [b], nb)
    d.registers[a] = RegisterInfo(a, b, "posedge", na)
    d.registers[b] = RegisterInfo(b, a, "posedge", nb)
    with pytest.raises(ClockDependencyCycle):
        analyze(d)


def test_rcil_examples():
    _, o = build("""module top(input clk, input d, input a, output reg q, output reg r2, output reg q2);
  always @(posedge clk) q <= d;
  always @(posedge clk) r2 <= ~r2;
  always @(posedge clk) q2 <= a ^ r2;
endmodule""", "top")
    assert names(o, compute_rcil(o, o.lookup("top_q"))) == ["top_d"]
    assert names(o, compute_rcil(o, o.lookup("top_q2"))) == ["top_a", "top_r2"]


def brute_rcil(d, reg):
    drivers = {e.output: e for e in d.elements.values()}
    found, seen = set(), set()

    def dfs(s):
        if s in seen:
            return
        seen.add(s)
        if d.signals[s].kind in ("input", "register"):
            found.add(s)
            return
        for x in drivers[s].signal_inputs():
            dfs(x)

    dfs(d.registers[reg].d)
    return found


@settings(max_examples=30)
@given(st.integers(0, 100_000))
def test_rcil_matches_dfs(seed):
    o = optimize(random_design(seed).design)
    a = analyze(o)
    for r in o.registers:
        assert set(a.rcil[r]) == brute_rcil(o, r)
        assert all(o.signals[s].kind != "wire" for s in a.rcil[r])


@settings(max_examples=30)
@given(st.integers(0, 100_000))
def test_domain_properties(seed):
    o = optimize(random_design(seed).design)
    a = analyze(o)
    regs = [r for dom in a.domains for r, _ in dom.registers]
    assert len(regs) == len(set(regs)) == len(o.registers)
    pos = {dom.id: k for k, dom in enumerate(a.domains)}
    for dom in a.domains:
        assert all(pos[x] < pos[dom.id] for x in dom.depends_on)
    # every element on a path to an output or clock pin is in some pod cone
    covered = set(a.output_pod.cone).union(*(p.cone for p in a.pods.values()))
    drivers = o.drivers()
    targets = list(o.outputs) + [r.clock for r in o.registers.values()] + [r.d for r in o.registers.values()]
    stack, seen = list(targets), set()
    while stack:
        s = stack.pop()
        if s in seen or s not in drivers:
            continue
        seen.add(s)
        assert drivers[s].id in covered
        stack.extend(drivers[s].signal_inputs())


def test_output_pod_includes_derived_clock_cone():
    _, o = build(C.GATED_V, "gated")
    a = analyze(o)
    assert o.lookup("gated_gclk") in a.output_pod.po
    report = a.report(o)
    assert {d["root"] for d in report["domains"]} == {"gated_clk", "gated_gclk"}


def test_group_domains_accepts_roots():
    _, o = build(C.DIVIDER_V, "divider")
    roots = trace_clock_roots(o)
    assert [d.root for d in group_domains(o, roots).domains] == [d.root for d in analyze(o).domains]
