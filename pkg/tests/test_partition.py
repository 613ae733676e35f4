import itertools

import pytest
from hypothesis import given, settings, strategies as st

from aocsim.clocks import analyze
from aocsim.config import ExecConfig
from aocsim.corpus import random_design
from aocsim.errors import AocError
from aocsim.optimize import optimize
from aocsim.partition import (PoOSL, assign_placeholders, build_cdo, live_intervals, merge_osls,
                              order_wire_pairs, partition_pass, partition_report, peak_liveness)
from aocsim.schedule import build_schedule

from util import build


def out_names(o, part):
    return [[o.signals[o.elements[m].output].name for m in g.members] for g in part.groups]


# -- cdo -----------------------------------------------------------------------------

def test_cdo_single_domain_covers_everything():
    _, o = build("module top(input clk, input [3:0] d, output reg [3:0] q, output [3:0] y);"
                 " always @(posedge clk) q <= q + d; assign y = ~q; endmodule", "top")
    (cdo,) = build_cdo(o, analyze(o))
    assert cdo.elements == set(o.elements)


def test_cdo_input_only_output_unattached():
    _, o = build("module top(input clk, input [3:0] d, output reg [3:0] q, output [3:0] y);"
                 " always @(posedge clk) q <= d; assign y = d ^ 4'd5; endmodule", "top")
    (cdo,) = build_cdo(o, analyze(o))
    y_el = o.drivers()[o.lookup("top_y")].id
    assert y_el not in cdo.elements and y_el in analyze(o).output_pod.cone


def test_cdo_shared_output_cone():
    _, o = build("""module top(input clk, input clk2, output reg [3:0] a, output reg [3:0] b, output [3:0] y);
  always @(posedge clk) a <= a + 4'd1;
  always @(posedge clk2) b <= b + 4'd2;
  assign y = a ^ b;
endmodule""", "top")
    cdos = build_cdo(o, analyze(o))
    y_el = o.drivers()[o.lookup("top_y")].id
    assert len(cdos) == 2 and all(y_el in c.elements for c in cdos)


def reachable_od(o, a, regs):
    readers = o.readers()
    out, stack = set(), list(regs)
    while stack:
        s = stack.pop()
        for e in readers[s]:
            if e.id in a.output_pod.cone and e.id not in out:
                out.add(e.id)
                stack.append(e.output)
    return out


@settings(max_examples=30)
@given(st.integers(0, 100_000))
def test_cdo_matches_reachability(seed):
    o = optimize(random_design(seed).design)
    a = analyze(o)
    cdos = build_cdo(o, a)
    for dom, cdo in zip(a.domains, cdos):
        regs = [r for r, _ in dom.registers]
        assert cdo.attached == reachable_od(o, a, regs)
        assert cdo.elements == set(a.pods[dom.id].cone) | cdo.attached
    covered = set().union(*(c.elements for c in cdos)) if cdos else set()
    all_regs = list(o.registers)
    assert reachable_od(o, a, all_regs) <= covered


# -- merging -----------------------------------------------------------------------

def units(*sets):
    return [PoOSL(k, [k], frozenset(s)) for k, s in enumerate(sets)]


def test_merge_fixture_shared_two_first():
    parts, log = merge_osls(units("ABC", "BCD", "E"), tdmax=2)
    assert log[0]["merged"] == [0, 1] and log[0]["shared"] == 2
    brute = max(itertools.combinations(range(3), 2),
                key=lambda p: len(set("ABC BCD E".split()[p[0]]) & set("ABC BCD E".split()[p[1]])))
    assert tuple(log[0]["merged"]) == brute
    assert sorted(sorted(p.elements) for p in parts) == [list("ABCD"), ["E"]]


def test_merge_tdmax_one_single_partition():
    parts, log = merge_osls(units("ABC", "BCD", "E"), tdmax=1)
    assert len(parts) == 1 and parts[0].elements == frozenset("ABCDE")
    assert len(log) == 2


def test_merge_no_merge_when_enough_threads():
    parts, log = merge_osls(units("ABC", "BCD", "E"), tdmax=3)
    assert log == [] and len(parts) == 3


def test_merge_ties_lowest_ids():
    _, log = merge_osls(units("AB", "AC", "AD"), tdmax=2)
    assert log[0]["merged"] == [0, 1]


def test_merge_phmax_prefers_fitting_pair():
    # both pairs share one element; only (1, 2) fits a capacity of 4
    _, log = merge_osls(units("ABCX", "XY", "YZ"), tdmax=2, phmax=4)
    assert log[0]["merged"] == [1, 2] and log[0]["fits_phmax"]


@settings(max_examples=60)
@given(st.lists(st.frozensets(st.integers(0, 12), min_size=1, max_size=6), min_size=2, max_size=7),
       st.integers(1, 4))
def test_merge_picks_maximal_share(sets, tdmax):
    parts, log = merge_osls([PoOSL(k, [k], s) for k, s in enumerate(sets)], tdmax=tdmax, phmax=1000)
    assert len(parts) == min(tdmax, len(sets))
    for step in log:
        assert step["max_other"] is None or step["shared"] >= step["max_other"]
    assert frozenset().union(*(p.elements for p in parts)) == frozenset().union(*sets)


# -- wire pairs ---------------------------------------------------------------------

PAIR_V = """module top(input [7:0] a, input [7:0] b, output [7:0] y);
  wire [7:0] w1 = a + 8'd1;
  wire [7:0] p = b + 8'd1;
  wire [7:0] w2 = w1 ^ 8'd3;
  assign y = w2 - p;
endmodule"""


def test_wire_pair_first_wire_last_in_level():
    _, o = build(PAIR_V, "top")
    od = build_schedule(o, analyze(o)).output_pass
    (part,) = partition_pass(o, od, ExecConfig(tdmax=1)).partitions
    assert out_names(o, part) == [["top_p"], ["top_w1"], ["top_w2"], ["top_y"]]
    w1, w2 = o.lookup("top_w1"), o.lookup("top_w2")
    assert (w1, w2) in part.wpl[0]


def test_wire_pair_second_wire_first_in_level():
    _, o = build("""module top(input [7:0] a, input [7:0] b, output [7:0] y, output [7:0] z);
  wire [7:0] u = b + 8'd2;
  wire [7:0] w1 = a + 8'd1;
  wire [7:0] v = u ^ 8'd7;
  wire [7:0] w2 = w1 ^ 8'd3;
  wire [7:0] x = u & 8'd9;
  assign y = w2 - v;
  assign z = x | v;
endmodule""", "top")
    od = build_schedule(o, analyze(o)).output_pass
    (part,) = partition_pass(o, od, ExecConfig(tdmax=1)).partitions
    level1 = [g for g in part.groups if g.level == 1]
    first = o.signals[o.elements[level1[0].members[0]].output].name
    # the single-reader pair (w1, w2) is listed last in WPL(0), so w2 opens level 1
    assert first == "top_w2"
    level0 = [g for g in part.groups if g.level == 0]
    assert o.signals[o.elements[level0[-1].members[-1]].output].name == "top_w1"


def test_wire_pairs_without_pairs_unchanged():
    _, o = build("module top(input [3:0] a, input [3:0] b, output [3:0] y, output [3:0] z);"
                 " assign y = a + 4'd1; assign z = b - 4'd1; endmodule", "top")
    od = build_schedule(o, analyze(o)).output_pass
    ordered, wpl = order_wire_pairs(o, od.groups)
    assert wpl == {} and [g.id for g in ordered] == [g.id for g in od.groups]


# -- placeholders -------------------------------------------------------------------

CHAIN_V = "module top(input [7:0] a, output [7:0] y);\n" + "".join(
    f"  wire [7:0] w{k} = w{k - 1} + 8'd{k};\n" if k else "  wire [7:0] w0 = a + 8'd1;\n" for k in range(8)
) + "  assign y = ~w7;\nendmodule"


def test_chain_peak_two_slots():
    _, o = build(CHAIN_V, "top")
    od = build_schedule(o, analyze(o)).output_pass
    order = od.elements()
    slots, bulk = assign_placeholders(o, order, phmax=32)
    assert len(set(slots.values())) == 2 and bulk == []
    assert peak_liveness(o, order) == 2


def test_phmax_zero_all_bulk():
    _, o = build(CHAIN_V, "top")
    od = build_schedule(o, analyze(o)).output_pass
    slots, bulk = assign_placeholders(o, od.elements(), phmax=0)
    assert slots == {} and len(bulk) == 8


def brute_peak(o, order):
    iv = live_intervals(o, order)
    return max((sum(a <= t <= b for a, b in iv.values()) for t in range(len(order))), default=0)


@settings(max_examples=30)
@given(st.integers(0, 100_000), st.integers(0, 40))
def test_placeholder_slots_bounded(seed, phmax):
    o = optimize(random_design(seed).design)
    sched = build_schedule(o, analyze(o))
    for p in sched.all_passes():
        for part in partition_pass(o, p, ExecConfig(tdmax=1, phmax=phmax, cw=64)).partitions:
            order = part.steps()
            peak = peak_liveness(o, order)
            assert peak == brute_peak(o, order)
            used = set(part.placeholders.values())
            assert len(used) <= phmax
            # no two wires share a slot while both are live
            iv = live_intervals(o, order)
            for x, y in itertools.combinations(part.placeholders, 2):
                if part.placeholders[x] == part.placeholders[y]:
                    (a0, a1), (b0, b1) = iv[x], iv[y]
                    assert a1 <= b0 or b1 <= a0
            narrow = [w for w in iv if o.signals[w].width <= 64 and o.signals[w].dims < 2]
            if phmax >= peak:
                assert len(used) <= peak and set(part.placeholders) == set(narrow)


# -- whole-pass properties --------------------------------------------------------------

@settings(max_examples=20)
@given(st.integers(0, 100_000), st.integers(1, 5))
def test_partitions_cover_po_and_respect_tdmax(seed, tdmax):
    o = optimize(random_design(seed).design)
    sched = build_schedule(o, analyze(o))
    for p in sched.all_passes():
        pp = partition_pass(o, p, ExecConfig(tdmax=tdmax))
        assert len(pp.partitions) <= tdmax
        got = sorted(x for part in pp.partitions for x in part.po)
        want = sorted(t.register for t in p.terminals) if p.terminals else sorted(p.po)
        assert got == want
        dup = [e for part in pp.partitions for e in part.order()]
        for part in pp.partitions:
            assert part.duplicated == {e for e in part.order() if dup.count(e) > 1}


def test_partition_report_deterministic():
    def report():
        o = optimize(random_design(5).design)
        a = analyze(o)
        plans = [partition_pass(o, p, ExecConfig(tdmax=3)) for p in build_schedule(o, a).all_passes()]
        return partition_report(o, plans, build_cdo(o, a))
    assert report() == report()


@pytest.mark.parametrize("kw", [dict(tdmax=0), dict(phmax=-1), dict(cw=16)])
def test_exec_config_validation(kw):
    with pytest.raises(AocError):
        ExecConfig(**kw)


def test_exec_config_file(tmp_path):
    p = tmp_path / "aoc.cfg"
    p.write_text("# comment\ntdmax = 3\nphmax=8\ncw=32\ntimescale = 10ps\n")
    cfg = ExecConfig.from_file(str(p), phmax=4)
    assert (cfg.tdmax, cfg.phmax, cfg.cw, cfg.timescale) == (3, 4, 32, "10ps")
    p.write_text("threads=2\n")
    with pytest.raises(AocError):
        ExecConfig.from_file(str(p))
