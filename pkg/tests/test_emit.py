import os
import random
import re
import shutil
import subprocess

import pytest

from aocsim import corpus as C
from aocsim.config import ExecConfig
from aocsim.emit import (CEmitter, category, emit_files, emit_model, find_toolchain,
                         verify_emitted)
from aocsim.errors import ToolchainMissing, TraceMismatch
from aocsim.runtime import Stimulus

from util import build, clocked, engine_trace

GOLDEN = os.path.join(os.path.dirname(__file__), "golden")
FIXTURES = C.NAMED


def toolchain():
    try:
        return find_toolchain()
    except ToolchainMissing:
        return None


needs_cc = pytest.mark.skipif(toolchain() is None, reason="no C compiler available")


def body(src: str, fn: str) -> str:
    start = src.index(f"static void {fn}(")
    return src[start:src.index("\n}\n", start)]


def test_and_is_direct_assignment():
    _, o = build("module t(input [7:0] a, input [7:0] b, output [7:0] y); assign y = a & b; endmodule", "t")
    assert "t_y = t_a & t_b;" in emit_model(o, gated=False)
    assert "t_y = t_a & t_b;" in emit_model(o, gated=True)


def test_two_bit_case_four_arm_chain():
    _, o = build("""module t(input [1:0] sel, input [7:0] a, input [7:0] b, input [7:0] c, input [7:0] d,
  output reg [7:0] y);
  always @* case (sel) 2'd0: y = a; 2'd1: y = b; 2'd2: y = c; 2'd3: y = d; endcase
endmodule""", "t")
    text = body(emit_model(o, gated=False), "blk_0_0")
    arms = re.findall(r"^\s*(if \(|else if \(|else x)", text, re.M)
    assert arms == ["if (", "else if (", "else if (", "else x"]


def test_wide_signal_storage():
    assert category(70, 1, 1, 32) == "wide"
    assert category(32, 1, 1, 32) == "scalar"
    assert category(64, 2, 8, 64) == "scalar"  # whole memory fits one word
    assert category(8 * 20, 2, 8, 64) == "mem"
    assert category(8 * 70, 2, 8, 64) == "wide"
    _, o = build("module w(input [69:0] a, input [69:0] b, output [69:0] y); assign y = a + b; endmodule", "w")
    em = CEmitter(o, ExecConfig(tdmax=1, cw=32), gated=False)
    src = em.source()
    assert re.search(r'\{"w_y", 1, 70, 1, 1, \d+, 3\}', src)
    assert "aw_add(" in src
    assert "typedef uint32_t word;" in src


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_emission_deterministic(name):
    src, top = FIXTURES[name]
    a = emit_model(build(src, top)[1])
    b = emit_model(build(src, top)[1])
    assert a == b


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_golden_snapshot(name):
    src, top = FIXTURES[name]
    with open(os.path.join(GOLDEN, f"{name}.c")) as fh:
        assert emit_model(build(src, top)[1]) == fh.read()


def test_signal_class_stub_documented():
    _, o = build(C.COUNTER_V, "counter")
    assert "AND(" in emit_model(o)


def test_emit_files(tmp_path):
    _, o = build(C.COUNTER_V, "counter")
    out = tmp_path / "gen" / "model.c"
    emit_files(o, str(out))
    assert (tmp_path / "gen" / "model.h").exists()
    assert '#include "model.h"' in out.read_text()
    single = tmp_path / "single.c"
    emit_files(o, str(single), single_file=True)
    assert not (tmp_path / "single.h").exists()


# -- compiled models ----------------------------------------------------------------

def check(o, stim, cycles, **kw):
    ref, _ = engine_trace(o, stim, cycles)
    verify_emitted(o, stim, cycles, ref, **kw)


@needs_cc
@pytest.mark.parametrize("name", sorted(FIXTURES))
@pytest.mark.parametrize("gated", [True, False])
def test_fixture_models_match(name, gated):
    src, top = FIXTURES[name]
    raw, o = build(src, top)
    events = [(c, raw.signals[s].name, random.Random(c).getrandbits(raw.signals[s].width))
              for c in range(200) for s in raw.inputs if not raw.signals[s].name.endswith("clk")]
    clocks = [g for g in clocked(f"{top}_clk").clocks if f"{top}_clk" in {raw.signals[s].name for s in raw.inputs}]
    check(o, Stimulus(events, clocks), 200, gated=gated)


@needs_cc
def test_counter_thousand_cycles():
    _, o = build(C.COUNTER_V, "counter")
    check(o, clocked("counter_clk"), 1000)


@needs_cc
def test_corrupted_emission_detected():
    _, o = build(C.COUNTER_V, "counter")
    stim = clocked("counter_clk")
    ref, _ = engine_trace(o, stim, 50)
    with pytest.raises(TraceMismatch) as ei:
        verify_emitted(o, stim, 50, ref, mutate=lambda s: s.replace("if (x != ", "x ^= 1; if (x != ", 1))
    assert (ei.value.cycle, ei.value.signal) == (1, "counter_q")
    assert (ei.value.expected, ei.value.got) == (1, 0)


@needs_cc
def test_threaded_model_matches():
    cd = C.random_design(3)
    from aocsim.optimize import optimize
    o = optimize(cd.design)
    check(o, cd.stimulus(200), 200, config=ExecConfig(tdmax=3), threads=True)


OPS = ["a + b", "a - b", "a * b", "a / b", "a % b", "a & b", "a | b", "a ^ b", "~a", "-a",
       "a << s", "a >> s", "{a[0], b} ^ {b, a[0]}", "a == b", "a < b", "a >= b", "&a", "|b", "^a",
       "s[0] ? a : b", "a[s % W]"]


def wide_src(width):
    outs = "".join(f"  output [{width}:0] y{k},\n" for k in range(len(OPS)))
    body_ = "".join(f"  assign y{k} = {e};\n" for k, e in enumerate(OPS))
    return (f"module w #(parameter W = {width}) (\n  input [W-1:0] a, input [W-1:0] b, input [7:0] s,\n"
            f"{outs.rstrip().rstrip(',')}\n);\n{body_}endmodule\n")


@needs_cc
@pytest.mark.parametrize("width", [1, 31, 33, 64, 65, 70, 100, 130])
@pytest.mark.parametrize("cw", [32, 64])
def test_width_safety_random_operands(width, cw):
    _, o = build(wide_src(width), "w")
    rng = random.Random(width * 100 + cw)
    events = []
    for c in range(60):
        for n, w in (("w_a", width), ("w_b", width), ("w_s", 8)):
            v = rng.getrandbits(w)
            if rng.random() < 0.2:
                v = (1 << w) - 1 if rng.random() < 0.5 else 0
            events.append((c, n, v))
    check(o, Stimulus(events), 60, config=ExecConfig(tdmax=1, cw=cw), gated=False)


@needs_cc
def test_memory_design_matches():
    _, o = build("""module m(input clk, input [1:0] wa, input [1:0] ra, input [6:0] d, input we, output [6:0] q,
  output [27:0] all);
  reg [6:0] mem [0:3];
  always @(posedge clk) if (we) mem[wa] <= d;
  assign q = mem[ra];
  assign all = {mem[3], mem[2], mem[1], mem[0]};
endmodule""", "m")
    rng = random.Random(1)
    ev = [(c, n, rng.getrandbits(w)) for c in range(100) for n, w in
          (("m_wa", 2), ("m_ra", 2), ("m_d", 7), ("m_we", 1))]
    check(o, Stimulus(ev, clocked("m_clk").clocks), 100)


@needs_cc
def test_header_compiles_with_external_main(tmp_path):
    _, o = build(C.COUNTER_V, "counter")
    emit_files(o, str(tmp_path / "model.c"))
    (tmp_path / "main.c").write_text("""#include <stdio.h>
#include "model.h"
int main(void) {
    word one = 1, zero = 0, q = 0;
    model_init();
    for (int i = 0; i < 5; i++) {
        model_set_input(0, &one); model_step();
        model_set_input(0, &zero); model_step();
        model_get(1, &q, 1);
        printf("%llu\\n", (unsigned long long)q);
    }
    return 0;
}
""")
    cc = toolchain()
    exe = tmp_path / "m"
    subprocess.run([cc, "-std=gnu99", "-o", str(exe), str(tmp_path / "main.c"), str(tmp_path / "model.c")],
                   check=True, capture_output=True)
    out = subprocess.run([str(exe)], capture_output=True, text=True, check=True).stdout.split()
    assert out == ["1", "2", "3", "4", "5"]


def test_toolchain_missing(monkeypatch):
    monkeypatch.setenv("CC", "/nonexistent/cc")
    monkeypatch.setattr(shutil, "which", lambda name: None)
    with pytest.raises(ToolchainMissing):
        find_toolchain()
