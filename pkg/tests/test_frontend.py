import json

import pytest
from hypothesis import given, strategies as st

from aocsim.errors import DanglingReference, MultiDriver, SchemaError, UnsupportedConstruct, VerilogSyntaxError
from aocsim.corpus import random_design
from aocsim.frontend import ast as A, load_source, parse, parse_text, prettyprint
from aocsim.ir import export_ir, load_ir


def items(src, kind):
    return [it for it in parse_text(src)[0].items if isinstance(it, kind)]


def test_cont_assign_and():
    (ca,) = items("module m(input a, input b, output y); assign y = a & b; endmodule", A.ContAssign)
    assert ca.lhs == A.Ident("y")
    assert ca.rhs == A.Binary("&", A.Ident("a"), A.Ident("b"))


def test_clocked_block():
    (al,) = items("module m(input clk, input d, output reg q); always @(posedge clk) q <= d; endmodule",
                  A.Always)
    assert al.sens == [A.Event("posedge", A.Ident("clk"))]
    assert al.body == A.Assign(A.Ident("q"), A.Ident("d"), blocking=False)


def test_comb_block_star():
    (al,) = items("module m(input a, output reg y); always @* y = ~a; endmodule", A.Always)
    assert al.sens == "comb"


@pytest.mark.parametrize("lit", ["1'bx", "4'b10z1", "8'hxx", "1'bz"])
def test_xz_literal_rejected(lit):
    with pytest.raises(UnsupportedConstruct) as ei:
        parse_text(f"module m(output y); assign y = {lit}; endmodule", "x.v")
    assert ei.value.loc is not None and ei.value.loc.file == "x.v" and ei.value.loc.line == 1


def test_delay_in_synth_module_rejected():
    with pytest.raises(UnsupportedConstruct):
        parse_text("module m(input a, output y); assign #1 y = a; endmodule")


def test_generate_rejected():
    with pytest.raises(UnsupportedConstruct):
        parse_text("module m; genvar i; generate endgenerate endmodule")


def test_syntax_error_located():
    with pytest.raises(VerilogSyntaxError) as ei:
        parse_text("module m(input a);\n  assign = a;\nendmodule", "bad.v")
    assert ei.value.loc.line == 2
    assert "bad.v:2" in str(ei.value)


def test_locations_on_nodes():
    (ca,) = items("module m(input a, output y);\n\n  assign y = a;\nendmodule", A.ContAssign)
    assert ca.loc.line == 3


def test_parameters_and_instances():
    mods = parse_text("""
module child #(parameter W = 4) (input [W-1:0] a, output [W-1:0] y); assign y = a; endmodule
module top(input [7:0] x, output [7:0] y); child #(.W(8)) u0(.a(x), .y(y)); endmodule
""")
    assert [m.name for m in mods] == ["child", "top"]
    (inst,) = [it for it in mods[1].items if isinstance(it, A.Instance)]
    assert inst.module == "child" and inst.name == "u0"
    assert inst.params[0][0] == "W"


def test_parse_multiple_files(tmp_path):
    a = tmp_path / "a.v"
    b = tmp_path / "b.v"
    a.write_text("module a(input x, output y); assign y = x; endmodule\n")
    b.write_text("module b(input x, output y); a u(.x(x), .y(y)); endmodule\n")
    unit = load_source([str(a), str(b)])
    assert [m.name for m in unit.modules] == ["a", "b"]
    assert unit.module("b").name == "b"
    assert [m.name for m in parse([(str(a), a.read_text())])] == ["a"]


FIXPOINT_SOURCES = [
    """module t(input clk, input [1:0] sel, input [7:0] a, input [7:0] b, output [7:0] y, output reg [7:0] z);
  wire [7:0] w = a ^ {4'h3, b[3:0]};
  assign y = sel[0] ? w : (a + b) >> 1;
  always @(posedge clk) case (sel) 0: z <= a; 1, 2: z <= b - a; default: z <= {2{w[3:0]}}; endcase
endmodule""",
    """module f(input [3:0] a, output [3:0] y, output p);
  function [3:0] inc; input [3:0] v; begin inc = v + 4'd1; end endfunction
  reg [3:0] m [0:3];
  assign y = inc(a);
  assign p = ^a;
endmodule""",
    """module tb;
  reg clk = 0;
  initial forever #5 clk = ~clk;
  initial begin #10; @(posedge clk); $display("t=%0d", $time); $finish; end
endmodule""",
]


@pytest.mark.parametrize("src", FIXPOINT_SOURCES)
def test_print_reparse_fixpoint(src):
    first = parse_text(src)
    printed = prettyprint(first)
    second = parse_text(printed)
    assert second == first
    assert prettyprint(second) == printed


@st.composite
def exprs(draw, depth=3):
    leaf = st.one_of(st.sampled_from(["a", "b", "c"]).map(A.Ident),
                     st.integers(0, 255).map(lambda v: A.Number(v, 8)))
    if depth == 0:
        return draw(leaf)
    kind = draw(st.integers(0, 4))
    if kind == 0:
        return draw(leaf)
    sub = exprs(depth=depth - 1)
    if kind == 1:
        return A.Binary(draw(st.sampled_from(["+", "-", "&", "|", "^", "==", "<", "<<", ">>", "&&"])),
                        draw(sub), draw(sub))
    if kind == 2:
        return A.Unary(draw(st.sampled_from(["~", "!", "&", "|", "^", "-"])), draw(sub))
    if kind == 3:
        return A.Ternary(draw(sub), draw(sub), draw(sub))
    return A.Concat([draw(sub), draw(sub)])


@given(exprs())
def test_expression_reparse_idempotent(e):
    m = A.Module("m", [], [A.PortDecl("input", None, A.Range(A.Number(7), A.Number(0)), ["a", "b", "c"]),
                           A.PortDecl("output", None, A.Range(A.Number(7), A.Number(0)), ["y"])],
                 [A.ContAssign(A.Ident("y"), e)])
    once = parse_text(prettyprint([m]))
    assert parse_text(prettyprint(once)) == once
    assert once[0].items[0].rhs == e


# -- netlist IR --------------------------------------------------------------------

MINIMAL = {
    "aoc_ir": 1, "top": "m",
    "signals": [
        {"id": 0, "name": "m_a", "kind": "input", "width": 4},
        {"id": 1, "name": "m_y", "kind": "output", "width": 4},
    ],
    "elements": [{"id": 0, "op": "buf", "inputs": [0], "output": 1}],
    "clocks": [],
}


def test_load_ir_minimal():
    d = load_ir(json.dumps(MINIMAL))
    assert len(d.signals) == 2 and len(d.elements) == 1
    assert d.inputs == [0] and d.outputs == [1]


def test_load_ir_three_signals_with_wire():
    doc = json.loads(json.dumps(MINIMAL))
    doc["signals"].append({"id": 2, "name": "m_w", "kind": "wire", "width": 4})
    doc["elements"] = [{"id": 0, "op": "buf", "inputs": [0], "output": 2},
                       {"id": 1, "op": "buf", "inputs": [2], "output": 1}]
    d = load_ir(json.dumps(doc))
    assert len(d.signals) == 3


def test_load_ir_multi_driver():
    doc = json.loads(json.dumps(MINIMAL))
    doc["elements"].append({"id": 1, "op": "not", "inputs": [0], "output": 1})
    with pytest.raises(MultiDriver):
        load_ir(json.dumps(doc))


def test_load_ir_dangling():
    doc = json.loads(json.dumps(MINIMAL))
    doc["elements"][0]["inputs"] = [7]
    with pytest.raises(DanglingReference):
        load_ir(json.dumps(doc))


@pytest.mark.parametrize("mutate, path", [
    (lambda d: d.pop("signals"), "$.signals"),
    (lambda d: d.update(aoc_ir=2), "$.aoc_ir"),
    (lambda d: d["signals"][0].update(width=0), "$.signals[0].width"),
    (lambda d: d["signals"][0].update(kind="latch"), "$.signals[0].kind"),
])
def test_load_ir_schema_errors(mutate, path):
    doc = json.loads(json.dumps(MINIMAL))
    mutate(doc)
    with pytest.raises(SchemaError) as ei:
        load_ir(json.dumps(doc))
    assert ei.value.path == path


@given(st.integers(0, 10_000))
def test_ir_round_trip(seed):
    d = random_design(seed).design
    text = export_ir(d)
    assert export_ir(load_ir(text)) == text
