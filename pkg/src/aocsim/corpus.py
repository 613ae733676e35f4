"""Random design generator and small named fixture designs."""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from . import ops
from .ir import Const, FlatDesign, RegisterInfo
from .runtime.stimulus import ClockGen, Stimulus


@dataclass
class GenConfig:
    max_registers: int = 64
    max_elements: int = 512
    min_domains: int = 1
    max_domains: int = 3
    wide: bool = True  # allow signals wider than 64 bits
    memories: bool = True
    input_widths: tuple = (1, 1, 3, 4, 8, 13, 16, 32)
    wide_widths: tuple = (65, 70, 96)


@dataclass
class CorpusDesign:
    name: str
    design: FlatDesign
    clocks: list[ClockGen] = field(default_factory=list)
    seed: int = 0

    def stimulus(self, cycles: int, seed: int | None = None, density: float = 0.3) -> Stimulus:
        rng = random.Random(self.seed * 7919 + 1 if seed is None else seed)
        d = self.design
        clock_ids = {d.lookup(g.signal) for g in self.clocks}
        data = [s for s in sorted(d.inputs) if s not in clock_ids]
        events = []
        for c in range(cycles):
            for s in data:
                if c == 0 or rng.random() < density:
                    events.append((c, d.signals[s].name, rng.getrandbits(d.signals[s].width)))
        return Stimulus(events, list(self.clocks))


_BIN = ["and", "or", "xor", "xnor", "add", "sub", "mul", "div", "mod", "shl", "shr",
        "eq", "ne", "lt", "le", "gt", "ge", "land", "lor"]
_UN = ["not", "neg", "lnot", "rand", "ror", "rxor", "rnand", "rnor", "rxnor", "buf"]


class _Gen:
    def __init__(self, rng: random.Random, cfg: GenConfig, top: str):
        self.rng = rng
        self.cfg = cfg
        self.d = FlatDesign(top)
        self.pool: list[int] = []
        self.n = 0

    def sig(self, base, kind, width, **kw):
        s = self.d.add_signal(f"{self.d.top}_{base}", kind, width, **kw)
        return s.id

    def wire(self, op, inputs, width, params=None, base=None):
        self.n += 1
        w = self.sig(base or f"w{self.n}", "wire", width)
        self.d.add_element(op, inputs, w, params)
        return w

    def width(self):
        rng = self.rng
        if self.cfg.wide and rng.random() < 0.06:
            return rng.choice(self.cfg.wide_widths)
        return rng.choice(self.cfg.input_widths)

    def operand(self, prefer_recent=True):
        rng = self.rng
        if rng.random() < 0.12:
            w = rng.choice((1, 2, 4, 8))
            return Const(rng.getrandbits(w), w)
        if prefer_recent and len(self.pool) > 8 and rng.random() < 0.5:
            return rng.choice(self.pool[-8:])
        return rng.choice(self.pool)

    def width_of(self, x):
        return self.d.operand_width(x)

    def random_element(self):
        rng = self.rng
        kind = rng.random()
        if kind < 0.45:
            op = rng.choice(_BIN)
            a, b = self.operand(), self.operand()
            if op in ops.ONE_BIT:
                w = 1
            elif op in ("shl", "shr"):
                if rng.random() < 0.7:
                    b = Const(rng.randrange(0, 9), 4)
                w = max(1, self.width_of(a) + rng.choice((0, 0, 2, -1)))
            else:
                w = max(self.width_of(a), self.width_of(b))
            return self.wire(op, [a, b], w)
        if kind < 0.6:
            op = rng.choice(_UN)
            a = self.operand()
            w = 1 if op in ops.ONE_BIT else self.width_of(a)
            return self.wire(op, [a], w)
        if kind < 0.72:
            c = self.pick_narrow(1)
            a, b = self.operand(), self.operand()
            return self.wire("mux", [c, a, b], max(self.width_of(a), self.width_of(b)))
        if kind < 0.8:
            a = self.operand(False)
            wa = self.width_of(a)
            lo = rng.randrange(wa)
            return self.wire("slice", [a], rng.randint(1, wa - lo), {"lo": lo})
        if kind < 0.86:
            parts = [self.operand() for _ in range(rng.randint(2, 3))]
            w = sum(self.width_of(p) for p in parts)
            if w > 128:
                parts = parts[:1]
                w = self.width_of(parts[0])
            return self.wire("concat", parts, w)
        if kind < 0.92:
            sel = self.pick_narrow(3)
            sw = self.width_of(sel)
            arms = rng.randint(1, 3)
            labels, used = [], set()
            for _ in range(arms):
                lab = frozenset(rng.randrange(1 << sw) for _ in range(rng.randint(1, 2)))
                labels.append(lab)
                used |= lab
            vals = [self.operand() for _ in range(arms + 1)]
            return self.wire("case", [sel] + vals, max(self.width_of(v) for v in vals), {"labels": labels})
        if kind < 0.97:
            base = self.operand(False)
            mems = [s for s in self.pool if self.d.signals[s].dims == 2]
            if mems and rng.random() < 0.6:
                base = rng.choice(mems)
                ew = self.d.signals[base].word_width
            else:
                ew = 1
            idx = self.pick_narrow(4)
            return self.wire("index", [base, idx], ew, {"elem": ew})
        if rng.random() < 0.3:
            return self.wire("const", [], rng.choice((1, 4, 8)), {"value": rng.getrandbits(8)})
        a = self.operand()
        return self.wire("buf", [a], self.width_of(a))

    def pick_narrow(self, maxw):
        cands = [s for s in self.pool if self.d.signals[s].width <= maxw]
        if cands and self.rng.random() < 0.9:
            return self.rng.choice(cands)
        a = self.operand()
        return self.wire("slice", [a], min(maxw, self.width_of(a)), {"lo": 0})

    def fit(self, x, width):
        if self.width_of(x) == width and not isinstance(x, Const):
            return self.wire("buf", [x], width)
        return self.wire("buf", [x], width)


def random_design(seed: int, cfg: GenConfig | None = None) -> CorpusDesign:
    """Random acyclic design with 1-3 clock domains, possibly derived or gated."""
    cfg = cfg or GenConfig()
    rng = random.Random(seed)
    g = _Gen(rng, cfg, "top")
    d = g.d
    clk = g.sig("clk", "input", 1, dims=0)
    clocks = [ClockGen("top_clk", 1, 0)]
    for k in range(rng.randint(2, 5)):
        g.pool.append(g.sig(f"in{k}", "input", g.width()))
    n_regs = rng.randint(2, min(cfg.max_registers, 40))
    regs = []
    for k in range(n_regs):
        if cfg.memories and rng.random() < 0.08:
            depth, word = rng.choice(((4, 4), (8, 8), (4, 20)) if cfg.wide else ((4, 4), (8, 8)))
            r = g.sig(f"mem{k}", "register", depth * word, dims=2, depth=depth)
        else:
            w = g.width()
            r = g.sig(f"r{k}", "register", w, init=rng.getrandbits(w) if rng.random() < 0.3 else 0)
        regs.append(r)
        g.pool.append(r)
    # clock domains: the input clock plus derived ones
    n_dom = rng.randint(cfg.min_domains, cfg.max_domains)
    domains = [(clk, "input")]
    kinds = rng.sample(["divider", "gated", "second"], k=min(2, n_dom - 1))
    for kind in kinds:
        if kind == "divider":
            t = g.sig(f"div{len(domains)}", "register", 1, dims=0)
            d.registers[t] = None  # filled below
            domains.append((t, "divider"))
        elif kind == "gated":
            en = g.sig(f"gate_en{len(domains)}", "register", 1, dims=0)
            d.registers[en] = None
            gclk = g.wire("and", [clk, en], 1, base=f"gclk{len(domains)}")
            domains.append((gclk, ("gated", en)))
        else:
            c2 = g.sig("clk2", "input", 1, dims=0)
            clocks.append(ClockGen("top_clk2", 2, 1))
            domains.append((c2, "input"))
    budget = cfg.max_elements - 3 * n_regs - 8
    n_wires = rng.randint(max(4, n_regs), max(5, min(budget, 6 * n_regs + 20)))
    for _ in range(n_wires):
        g.pool.append(g.random_element())
    for r in regs:
        root = domains[0][0] if rng.random() < 0.5 else rng.choice(domains)[0]
        pol = "negedge" if rng.random() < 0.15 else "posedge"
        sig = d.signals[r]
        if sig.dims == 2 and rng.random() < 0.8:
            idx = g.pick_narrow(3)
            val = g.operand()
            nxt = g.wire("demux", [r, idx, val], sig.width, {"elem": sig.word_width})
        else:
            nxt = g.operand()
        if rng.random() < 0.5:
            en = g.pick_narrow(1)
            nxt = g.wire("mux", [en, nxt, r], sig.width)
        dw = g.wire("buf", [nxt], sig.width, base=f"{sig.name[4:]}_next")
        d.registers[r] = RegisterInfo(r, root, pol, dw)
    for root, kind in domains[1:]:
        if kind == "divider":
            dw = g.wire("not", [root], 1, base=f"{d.signals[root].name[4:]}_next")
            d.registers[root] = RegisterInfo(root, clk, "posedge", dw)
        elif isinstance(kind, tuple):
            en = kind[1]
            src = g.pick_narrow(1)
            dw = g.wire("buf", [src], 1, base=f"{d.signals[en].name[4:]}_next")
            d.registers[en] = RegisterInfo(en, clk, "posedge", dw)
    for k in range(rng.randint(1, 6)):
        src = g.operand()
        o = g.sig(f"out{k}", "output", g.width_of(src))
        d.add_element(rng.choice(("buf", "not")), [src], o)
    if not d.outputs:
        pass
    _prune_gated_enable_loops(d)
    d.validate()
    return CorpusDesign(f"rand{seed}", d, clocks, seed)


def _prune_gated_enable_loops(d: FlatDesign):
    """Gate enables must not depend on registers clocked by their own gated clock."""
    from .clocks import cone
    drivers = d.drivers()
    for r in list(d.registers.values()):
        root = r.clock
        if d.signals[root].kind != "wire":
            continue
        en_regs = [s for s in cone(d, [root], drivers)[2] if s in d.registers]
        for en in en_regs:
            info = d.registers[en]
            if info.clock != root:
                continue
            # an enable clocked by its own gate: reclock it on the base clock
            base = [s for s in cone(d, [root], drivers)[2] if d.signals[s].kind == "input"]
            info.clock = base[0]


def corpus(n: int, start: int = 0, cfg: GenConfig | None = None) -> list[CorpusDesign]:
    return [random_design(start + k, cfg) for k in range(n)]


# -- fixtures ------------------------------------------------------------------------

COUNTER_V = """\
module counter(input clk, output reg [7:0] q);
  always @(posedge clk) q <= q + 8'd1;
endmodule
"""

SWAP_V = """\
module swap(clk, a, b);
  input clk;
  output a, b;
  reg a = 1'b1;
  reg b = 1'b0;
  always @(posedge clk) begin
    a <= b;
    b <= a;
  end
endmodule
"""

SHIFT_V = """\
module shift(input clk, input d, output reg q1, output reg q2);
  always @(posedge clk) begin
    q1 <= d;
    q2 <= q1;
  end
endmodule
"""

GATED_V = """\
module gated(input clk, input en, output reg [7:0] q, output reg [7:0] free);
  wire gclk = clk & en;
  always @(posedge gclk) q <= q + 8'd1;
  always @(posedge clk) free <= free + 8'd3;
endmodule
"""

DIVIDER_V = """\
module divider(input clk, output reg t, output reg [3:0] q);
  always @(posedge clk) t <= ~t;
  always @(posedge t) q <= q + 4'd1;
endmodule
"""

LOOP_V = """\
module loopy(input c, input d, output y);
  wire a, b;
  assign a = b & c;
  assign b = a | d;
  assign y = a;
endmodule
"""

HIER_V = """\
module adder #(parameter WIDTH = 4) (input [WIDTH-1:0] a, input [WIDTH-1:0] b, output [WIDTH-1:0] sum);
  assign sum = a + b;
endmodule

module top(input [7:0] x, input [7:0] y, output [7:0] s);
  adder #(.WIDTH(8)) u0 (.a(x), .b(y), .sum(s));
endmodule
"""


def slices_v(n: int = 16, width: int = 32, depth: int = 16) -> str:
    """``n`` independent subsystems, each with its own enable and a ``depth``-stage datapath."""
    ports = [f"en{k}" for k in range(n)] + [f"q{k}" for k in range(n)]
    lines = [f"module slices(clk, {', '.join(ports)});", "  input clk;"]
    for k in range(n):
        lines.append(f"  input en{k};")
        lines.append(f"  output [{width - 1}:0] q{k};")
        lines.append(f"  reg [{width - 1}:0] q{k} = {width}'d{k + 1};")
    for k in range(n):
        lines.append(f"  reg [{width - 1}:0] s{k};")
        lines.append("  always @* begin")
        lines.append(f"    s{k} = q{k};")
        for j in range(depth):
            lines.append(f"    s{k} = (s{k} ^ (s{k} << {j % 5 + 1})) + {width}'d{2 * j + 1};")
        lines.append("  end")
        lines.append(f"  always @(posedge clk) if (en{k}) q{k} <= s{k};")
    lines.append("endmodule")
    return "\n".join(lines) + "\n"


def slices_stimulus(n: int, cycles: int, clock: str = "clk") -> Stimulus:
    """Rotating enables: subsystem ``c % n`` is the only one enabled in cycle ``c``."""
    events = []
    for c in range(cycles):
        events.append((c, f"en{c % n}", 1))
        if c > 0:
            events.append((c, f"en{(c - 1) % n}", 0))
    return Stimulus(events, [ClockGen(clock, 1, 0)])


# fixture name -> (source, top module)
NAMED = {
    "counter": (COUNTER_V, "counter"),
    "swap": (SWAP_V, "swap"),
    "shift": (SHIFT_V, "shift"),
    "gated": (GATED_V, "gated"),
    "divider": (DIVIDER_V, "divider"),
    "hier": (HIER_V, "top"),
}
