"""C model generation.

The emitted model mirrors the Python engine: a shared word store for
inputs, outputs, registers and published clock roots; private wire storage
per partition; one function per partition; activity flags guarding signal
groups; and ``model_step`` running the output pass, edge detection, the
triggered domain passes and the commits.

Signals no wider than the machine word ``cw`` are single words.  Memories
whose words fit a machine word are word arrays with one entry per address.
Anything else is a little-endian multi-word array handled by the ``aw_*``
helpers in the preamble.
"""
from __future__ import annotations

import os
import shutil
import subprocess
import tempfile
from dataclasses import dataclass

from . import ops
from .clocks import analyze
from .config import ExecConfig
from .errors import ToolchainMissing, TraceMismatch, UnsupportedForEmit
from .ir import Const, Element, FlatDesign
from .partition import partition_pass
from .runtime.stimulus import Stimulus
from .runtime.trace import Trace
from .schedule import build_schedule

PREAMBLE = r"""
#include <stdint.h>
#include <string.h>

typedef @WORD@ word;
#define CW @CW@

static void aw_zero(word *r, int n) { for (int i = 0; i < n; i++) r[i] = 0; }
static void aw_set1(word *r, int n, word x) { aw_zero(r, n); r[0] = x; }
static void aw_copy(word *r, int n, const word *a, int an) {
    for (int i = 0; i < n; i++) r[i] = i < an ? a[i] : 0;
}
static void aw_mask(word *r, int n, long width) {
    for (int i = 0; i < n; i++) {
        long lo = (long)i * CW;
        if (lo >= width) r[i] = 0;
        else if (width - lo < CW) r[i] &= (((word)1) << (width - lo)) - 1;
    }
}
static void aw_and(word *r, const word *a, const word *b, int n) { for (int i = 0; i < n; i++) r[i] = a[i] & b[i]; }
static void aw_or(word *r, const word *a, const word *b, int n) { for (int i = 0; i < n; i++) r[i] = a[i] | b[i]; }
static void aw_xor(word *r, const word *a, const word *b, int n) { for (int i = 0; i < n; i++) r[i] = a[i] ^ b[i]; }
static void aw_not(word *r, const word *a, int n) { for (int i = 0; i < n; i++) r[i] = ~a[i]; }
static void aw_add(word *r, const word *a, const word *b, int n) {
    word c = 0;
    for (int i = 0; i < n; i++) {
        word s = a[i] + c;
        word c1 = s < c;
        s += b[i];
        c1 |= s < b[i];
        r[i] = s;
        c = c1;
    }
}
static void aw_sub(word *r, const word *a, const word *b, int n) {
    word br = 0;
    for (int i = 0; i < n; i++) {
        word d = a[i] - b[i];
        word b1 = a[i] < b[i];
        word d2 = d - br;
        b1 |= d < br;
        r[i] = d2;
        br = b1;
    }
}
static void aw_neg(word *r, const word *a, int n) {
    word z[n];
    aw_zero(z, n);
    aw_sub(r, z, a, n);
}
static int aw_iszero(const word *a, int n) {
    for (int i = 0; i < n; i++) if (a[i]) return 0;
    return 1;
}
static int aw_cmp(const word *a, const word *b, int n) {
    for (int i = n - 1; i >= 0; i--)
        if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
    return 0;
}
static void aw_shl(word *r, const word *a, int n, unsigned long sh) {
    unsigned long ws = sh / CW, bs = sh % CW;
    for (int i = n - 1; i >= 0; i--) {
        word v = 0;
        long j = (long)i - (long)ws;
        if (j >= 0) {
            v = a[j] << bs;
            if (bs && j - 1 >= 0) v |= a[j - 1] >> (CW - bs);
        }
        r[i] = v;
    }
}
static void aw_shr(word *r, const word *a, int n, unsigned long sh) {
    unsigned long ws = sh / CW, bs = sh % CW;
    for (int i = 0; i < n; i++) {
        word v = 0;
        unsigned long j = (unsigned long)i + ws;
        if (j < (unsigned long)n) {
            v = a[j] >> bs;
            if (bs && j + 1 < (unsigned long)n) v |= a[j + 1] << (CW - bs);
        }
        r[i] = v;
    }
}
static unsigned long aw_to_index(const word *a, int n, unsigned long limit) {
    for (int i = 1; i < n; i++) if (a[i]) return limit;
    return a[0] < limit ? (unsigned long)a[0] : limit;
}
static void aw_mul(word *r, const word *a, const word *b, int n) {
    word acc[n], t[n];
    aw_zero(acc, n);
    for (long k = 0; k < (long)n * CW; k++) {
        if ((b[k / CW] >> (k % CW)) & 1) {
            aw_shl(t, a, n, (unsigned long)k);
            aw_add(acc, acc, t, n);
        }
    }
    aw_copy(r, n, acc, n);
}
static void aw_divmod(word *q, word *rem, const word *a, const word *b, int n) {
    word qq[n], rr[n];
    aw_zero(qq, n);
    aw_zero(rr, n);
    if (!aw_iszero(b, n)) {
        for (long k = (long)n * CW - 1; k >= 0; k--) {
            aw_shl(rr, rr, n, 1);
            rr[0] |= (a[k / CW] >> (k % CW)) & 1;
            if (aw_cmp(rr, b, n) >= 0) {
                aw_sub(rr, rr, b, n);
                qq[k / CW] |= ((word)1) << (k % CW);
            }
        }
    }
    if (q) aw_copy(q, n, qq, n);
    if (rem) aw_copy(rem, n, rr, n);
}
static int aw_parity(const word *a, int n) {
    int p = 0;
    for (int i = 0; i < n; i++) p ^= __builtin_parityll((unsigned long long)a[i]);
    return p;
}
static int aw_allones(const word *a, int n, long width) {
    word t[n];
    aw_copy(t, n, a, n);
    aw_not(t, t, n);
    aw_mask(t, n, width);
    return aw_iszero(t, n);
}
static word aw_extract(const word *a, int n, unsigned long lo, int width) {
    unsigned long ws = lo / CW, bs = lo % CW;
    if (ws >= (unsigned long)n) return 0;
    word v = a[ws] >> bs;
    if (bs && ws + 1 < (unsigned long)n) v |= a[ws + 1] << (CW - bs);
    if (width < CW) v &= (((word)1) << width) - 1;
    return v;
}
static void aw_insert(word *r, int n, unsigned long lo, const word *v, long width) {
    for (long k = 0; k < width; k++) {
        unsigned long pos = lo + (unsigned long)k;
        if (pos >= (unsigned long)n * CW) break;
        word bit = (v[k / CW] >> (k % CW)) & 1;
        r[pos / CW] = (r[pos / CW] & ~(((word)1) << (pos % CW))) | (bit << (pos % CW));
    }
}
static void aw_pack(word *r, int n, const word *m, int depth, int ew) {
    aw_zero(r, n);
    for (int i = 0; i < depth; i++) aw_insert(r, n, (unsigned long)i * ew, &m[i], ew);
}
static void aw_unpack(word *m, int depth, int ew, const word *a, int n) {
    for (int i = 0; i < depth; i++) m[i] = aw_extract(a, n, (unsigned long)i * ew, ew);
}
"""

_RESERVED = {"word", "prev_root", "lab_eq", "bar_start", "bar_done", "task_st", "n_task", "n_workers",
             "run_blocks", "commit_late", "int8_t", "int16_t", "int32_t", "int64_t", "uint8_t",
             "uint16_t", "uint32_t", "uint64_t", "size_t"}
_RESERVED_PREFIX = ("aw_", "blk_", "pass_", "commit_", "aoc_", "model_", "pthread_", "mem", "str", "W", "_")

SIGNAL_CLASS_NOTE = """\
/* Signal-class extension point (not generated): a multi-valued signal
 * class would replace direct computations by conversion functions such as
 *   void AND(sig *y, const sig *a, const sig *b);
 *   void OR(sig *y, const sig *a, const sig *b);
 *   void ADD(sig *y, const sig *a, const sig *b);
 *   void MUX(sig *y, const sig *sel, const sig *a, const sig *b);
 * with one function per operator row.  Only 2-value words are emitted. */
"""


@dataclass
class Slot:
    sid: int
    cat: str  # scalar | wide | mem
    words: int
    width: int
    depth: int
    ew: int
    area: str  # "S", "P" or a block array name; "ph" for placeholders
    off: int
    cname: str = ""  # mangled C name (a macro over the storage), empty for pre-register slots


def category(width: int, dims: int, depth: int, cw: int) -> str:
    if width <= cw:
        return "scalar"
    if dims == 2 and depth > 1 and width // depth <= cw:
        return "mem"
    return "wide"


def _words(width, cw):
    return (width + cw - 1) // cw


class CEmitter:
    def __init__(self, design: FlatDesign, config: ExecConfig | None = None, gated: bool = True):
        self.d = design
        self.cfg = config or ExecConfig(tdmax=1)
        self.cw = self.cfg.cw
        self.gated = gated
        self.schedule = build_schedule(design, analyze(design))
        self._mangle()
        self.plans = [partition_pass(design, osl, self.cfg, placeholders=not gated)
                      for osl in self.schedule.all_passes()]
        self._layout()

    # -- storage ----------------------------------------------------------------------
    def _slot(self, sid, area, off):
        s = self.d.signals[sid]
        cat = category(s.width, s.dims, s.depth, self.cw)
        words = s.depth if cat == "mem" else _words(s.width, self.cw)
        cname = self.names[sid] if area not in ("P", "?") else ""
        return Slot(sid, cat, words, s.width, s.depth, s.word_width, area, off, cname)

    def _mangle(self):
        """Signal id -> C identifier, avoiding names used by the generated code."""
        taken = set()
        self.names = {}
        for sid in sorted(self.d.signals):
            base = "".join(c if c.isalnum() or c == "_" else "_" for c in self.d.signals[sid].name)
            if not base or base[0].isdigit() or base in _RESERVED or base.startswith(_RESERVED_PREFIX) \
                    or "_" not in base:
                base = "sig_" + base
            name, k = base, 1
            while name in taken:
                name, k = f"{base}__c{k}", k + 1
            taken.add(name)
            self.names[sid] = name

    def _define(self, sl: Slot) -> str:
        if sl.area == "ph":
            return f"#define {sl.cname} ph{sl.off}"
        if sl.cat == "scalar":
            return f"#define {sl.cname} {sl.area}[{sl.off}]"
        return f"#define {sl.cname} (&{sl.area}[{sl.off}])"

    def _layout(self):
        d = self.d
        self.shared: dict[int, Slot] = {}
        off = 0
        for sid in d.observables():
            sl = self._slot(sid, "S", off)
            self.shared[sid] = sl
            off += sl.words
        self.root_wires = sorted({p.root for p in self.schedule.passes if d.signals[p.root].kind == "wire"})
        for sid in self.root_wires:
            sl = self._slot(sid, "S", off)
            sl.cname = ""  # the wire's own name belongs to its private copies
            self.shared[sid] = sl
            off += sl.words
        self.n_shared = max(off, 1)
        self.pre: dict[int, Slot] = {}
        off = 0
        for sid in sorted(d.registers):
            sl = self._slot(sid, "P", off)
            self.pre[sid] = sl
            off += sl.words
        self.n_pre = max(off, 1)
        self.blocks = []  # (pass index, block index, partition, wire slots, array size)
        flag = 0
        self.flag_of: dict[tuple, int] = {}
        for k, pp in enumerate(self.plans):
            for j, part in enumerate(pp.partitions):
                name = f"W{k}_{j}"
                slots = {}
                woff = 0
                for w in part.wires(d):
                    if not self.gated and w in part.placeholders:
                        sl = self._slot(w, "ph", part.placeholders[w])
                    else:
                        sl = self._slot(w, name, woff)
                        woff += sl.words
                    slots[w] = sl
                for g in part.groups:
                    self.flag_of[(k, j, g.id)] = flag
                    flag += 1
                self.blocks.append((k, j, part, slots, max(woff, 1)))
        self.n_flags = max(flag, 1)
        self.watchers: dict[int, list[int]] = {}
        for k, j, part, _, _ in self.blocks:
            for g in part.groups:
                for s in g.watch:
                    if d.signals[s].kind != "wire":
                        self.watchers.setdefault(s, []).append(self.flag_of[(k, j, g.id)])

    # -- operand access -------------------------------------------------------------------
    def _lit(self, v: int) -> str:
        return f"0x{v:x}ULL"

    def _ref(self, sl: Slot) -> str:
        """Scalar lvalue or pointer to the first word."""
        if sl.cname:
            return sl.cname
        if sl.cat == "scalar":
            return f"{sl.area}[{sl.off}]"
        return f"&{sl.area}[{sl.off}]"

    def _const_words(self, v: int, n: int) -> list[str]:
        m = ops.mask(self.cw)
        return [self._lit((v >> (i * self.cw)) & m) for i in range(n)]

    # -- element code ------------------------------------------------------------------
    def _scalar_expr(self, el, a, ws, out_w) -> list[str]:
        """Statements assigning ``x`` for an all-scalar element."""
        M = self._lit(ops.mask(out_w))
        op = el.op

        def m(expr, need=True):
            return f"x = ({expr}) & {M};" if need else f"x = {expr};"

        wide = any(w > out_w for w in ws)
        if op == "const":
            return [f"x = {self._lit(el.params['value'] & ops.mask(out_w))};"]
        if op == "buf":
            return [m(a[0], ws[0] > out_w)]
        if op == "not":
            return [m(f"~{a[0]}")]
        if op == "neg":
            return [m(f"(word)0 - {a[0]}")]
        if op == "lnot":
            return [f"x = !{a[0]};"]
        if op in ops.REDUCE:
            if op in ("rand", "rnand"):
                base = f"{a[0]} == {self._lit(ops.mask(ws[0]))}"
            elif op in ("ror", "rnor"):
                base = f"{a[0]} != 0"
            else:
                base = f"__builtin_parityll((unsigned long long){a[0]})"
            neg = op in ("rnand", "rnor", "rxnor")
            return [f"x = {'!' if neg else ''}({base});"]
        if op in ("and", "or", "xor"):
            sym = {"and": "&", "or": "|", "xor": "^"}[op]
            need = all(w > out_w for w in ws) if op == "and" else wide
            return [m(f"{a[0]} {sym} {a[1]}", need)]
        if op == "xnor":
            return [m(f"~({a[0]} ^ {a[1]})")]
        if op == "land":
            return [f"x = {a[0]} && {a[1]};"]
        if op == "lor":
            return [f"x = {a[0]} || {a[1]};"]
        if op in ("add", "sub", "mul"):
            sym = {"add": "+", "sub": "-", "mul": "*"}[op]
            return [m(f"{a[0]} {sym} {a[1]}")]
        if op in ("div", "mod"):
            sym = "/" if op == "div" else "%"
            return [f"x = {a[1]} ? ({a[0]} {sym} {a[1]}) & {M} : 0;"]
        if op == "shl":
            return [f"x = {a[1]} < {out_w} ? ({a[0]} << {a[1]}) & {M} : 0;"]
        if op == "shr":
            return [f"x = {a[1]} < {ws[0]} ? ({a[0]} >> {a[1]}) & {M} : 0;"]
        if op in ops.COMPARE:
            sym = {"eq": "==", "ne": "!=", "lt": "<", "le": "<=", "gt": ">", "ge": ">="}[op]
            return [f"x = {a[0]} {sym} {a[1]};"]
        if op == "mux":
            return [m(f"{a[0]} ? {a[1]} : {a[2]}", ws[1] > out_w or ws[2] > out_w)]
        if op == "case":
            lines = []
            sel_max = ops.mask(ws[0])
            first = True
            covered: set[int] = set()
            last = a[-1]
            for labels, v in zip(el.params["labels"], a[1:-1]):
                labs = sorted(x for x in labels if x <= sel_max and x not in covered)
                if not labs:
                    continue
                covered.update(labs)
                if len(covered) == sel_max + 1:
                    # labels cover every selector value: this arm is the final else
                    last = v
                    break
                cond = " || ".join(f"{a[0]} == {self._lit(x)}" for x in labs)
                lines.append(f"{'if' if first else 'else if'} ({cond}) x = {v};")
                first = False
            lines.append(f"{'' if first else 'else '}x = {last};")
            if wide:
                lines.append(f"x &= {M};")
            return lines
        if op == "index":
            ew = el.params["elem"]
            count = ws[0] // ew
            em = self._lit(ops.mask(min(ew, out_w)))
            return [f"x = {a[1]} < {count} ? ({a[0]} >> ({a[1]} * {ew})) & {em} : 0;"]
        if op == "slice":
            lo = el.params["lo"]
            if lo >= ws[0]:
                return ["x = 0;"]
            return [m(f"{a[0]} >> {lo}", ws[0] - lo > out_w)]
        if op == "demux":
            ew = el.params["elem"]
            count = ws[0] // ew
            em = self._lit(ops.mask(ew))
            sh = f"({a[1]} * {ew})"
            return [f"x = {a[1]} < {count} ? ((({a[0]} & ~({em} << {sh})) | (({a[2]} & {em}) << {sh})) & {M}) : ({a[0]} & {M});"]
        if op == "concat":
            shift = sum(ws)
            terms = []
            for x, w in zip(a, ws):
                shift -= w
                if shift >= out_w:
                    continue
                terms.append(f"((word){x} << {shift})" if shift else f"(word){x}")
            if not terms:
                return ["x = 0;"]
            return [m(" | ".join(terms), sum(ws) > out_w)]
        raise UnsupportedForEmit(f"element {el.id} ({op})")

    def _wide(self, el, opnds, ws, out_w) -> tuple[list[str], int]:
        """Statements filling ``r[N]`` for an element with a multi-word operand or result."""
        op = el.op
        n = _words(max([out_w] + ws), self.cw)
        L: list[str] = [f"word r[{n}];"]
        names = []
        for k, (x, w) in enumerate(zip(opnds, ws)):
            nm = f"a{k}"
            names.append(nm)
            if isinstance(x, Const):
                L.append(f"word {nm}[{n}] = {{{', '.join(self._const_words(x.value, n))}}};")
                continue
            sl = x
            L.append(f"word {nm}[{n}];")
            if sl.cat == "scalar":
                L.append(f"aw_set1({nm}, {n}, {self._ref(sl)});")
            elif sl.cat == "wide":
                L.append(f"aw_copy({nm}, {n}, {self._ref(sl)}, {sl.words});")
            else:
                L.append(f"aw_pack({nm}, {n}, {self._ref(sl)}, {sl.depth}, {sl.ew});")
        a = names
        if op == "const":
            L.append(f"{{ word c[{n}] = {{{', '.join(self._const_words(el.params['value'], n))}}}; aw_copy(r, {n}, c, {n}); }}")
        elif op == "buf":
            L.append(f"aw_copy(r, {n}, {a[0]}, {n});")
        elif op == "not":
            L.append(f"aw_not(r, {a[0]}, {n});")
        elif op == "neg":
            L.append(f"aw_neg(r, {a[0]}, {n});")
        elif op in ("lnot",):
            L.append(f"aw_set1(r, {n}, aw_iszero({a[0]}, {n}));")
        elif op in ops.REDUCE:
            base = {"rand": f"aw_allones({a[0]}, {n}, {ws[0]})", "rnand": f"aw_allones({a[0]}, {n}, {ws[0]})",
                    "ror": f"!aw_iszero({a[0]}, {n})", "rnor": f"!aw_iszero({a[0]}, {n})",
                    "rxor": f"aw_parity({a[0]}, {n})", "rxnor": f"aw_parity({a[0]}, {n})"}[op]
            neg = "!" if op in ("rnand", "rnor", "rxnor") else ""
            L.append(f"aw_set1(r, {n}, {neg}({base}));")
        elif op in ("and", "or", "xor"):
            L.append(f"aw_{op}(r, {a[0]}, {a[1]}, {n});")
        elif op == "xnor":
            L.append(f"aw_xor(r, {a[0]}, {a[1]}, {n}); aw_not(r, r, {n});")
        elif op == "land":
            L.append(f"aw_set1(r, {n}, !aw_iszero({a[0]}, {n}) && !aw_iszero({a[1]}, {n}));")
        elif op == "lor":
            L.append(f"aw_set1(r, {n}, !aw_iszero({a[0]}, {n}) || !aw_iszero({a[1]}, {n}));")
        elif op in ("add", "sub", "mul"):
            L.append(f"aw_{op}(r, {a[0]}, {a[1]}, {n});")
        elif op == "div":
            L.append(f"aw_divmod(r, 0, {a[0]}, {a[1]}, {n});")
        elif op == "mod":
            L.append(f"aw_divmod(0, r, {a[0]}, {a[1]}, {n});")
        elif op == "shl":
            L.append(f"{{ unsigned long s = aw_to_index({a[1]}, {n}, {out_w}UL);")
            L.append(f"  if (s < {out_w}UL) aw_shl(r, {a[0]}, {n}, s); else aw_zero(r, {n}); }}")
        elif op == "shr":
            L.append(f"{{ unsigned long s = aw_to_index({a[1]}, {n}, {ws[0]}UL);")
            L.append(f"  if (s < {ws[0]}UL) aw_shr(r, {a[0]}, {n}, s); else aw_zero(r, {n}); }}")
        elif op in ops.COMPARE:
            sym = {"eq": "==", "ne": "!=", "lt": "<", "le": "<=", "gt": ">", "ge": ">="}[op]
            L.append(f"aw_set1(r, {n}, aw_cmp({a[0]}, {a[1]}, {n}) {sym} 0);")
        elif op == "mux":
            L.append(f"aw_copy(r, {n}, aw_iszero({a[0]}, {n}) ? {a[2]} : {a[1]}, {n});")
        elif op == "case":
            first = True
            sel_max = ops.mask(ws[0])
            for k, labels in enumerate(el.params["labels"]):
                labs = sorted(x for x in labels if x <= sel_max)
                if not labs:
                    continue
                conds = []
                for x in labs:
                    conds.append(f"lab_eq({a[0]}, {n}, (const word[]){{{', '.join(self._const_words(x, n))}}})")
                L.append(f"{'if' if first else 'else if'} ({' || '.join(conds)}) aw_copy(r, {n}, {a[k + 1]}, {n});")
                first = False
            L.append(f"{'' if first else 'else '}aw_copy(r, {n}, {a[-1]}, {n});")
        elif op == "index":
            ew = el.params["elem"]
            count = ws[0] // ew
            L.append(f"{{ unsigned long i = aw_to_index({a[1]}, {n}, {count}UL);")
            L.append(f"  aw_zero(r, {n});")
            L.append(f"  if (i < {count}UL) {{ aw_shr(r, {a[0]}, {n}, i * {ew}UL); aw_mask(r, {n}, {ew}); }} }}")
        elif op == "slice":
            L.append(f"aw_shr(r, {a[0]}, {n}, {el.params['lo']}UL);")
        elif op == "demux":
            ew = el.params["elem"]
            count = ws[0] // ew
            L.append(f"aw_copy(r, {n}, {a[0]}, {n});")
            L.append(f"{{ unsigned long i = aw_to_index({a[1]}, {n}, {count}UL);")
            L.append(f"  if (i < {count}UL) aw_insert(r, {n}, i * {ew}UL, {a[2]}, {ew}); }}")
        elif op == "concat":
            L.append(f"aw_zero(r, {n});")
            shift = sum(ws)
            for x, w in zip(a, ws):
                shift -= w
                L.append(f"aw_insert(r, {n}, {shift}UL, {x}, {w});")
        else:
            raise UnsupportedForEmit(f"element {el.id} ({op})")
        L.append(f"aw_mask(r, {n}, {out_w});")
        return L, n

    def _mem_fast(self, el, sls, out: Slot):
        """Direct word-array code for memory reads and writes, or None."""
        op = el.op
        ins = el.inputs
        base = sls[0] if sls and not isinstance(sls[0], Const) else None
        if op == "index" and base is not None and base.cat == "mem" and el.params["elem"] == base.ew \
                and out.cat == "scalar":
            i = self._operand_scalar(sls[1], ins[1])
            if i is None:
                return None
            em = self._lit(ops.mask(min(base.ew, out.width)))
            return "scalar", [f"x = {i} < {base.depth} ? ({self._ref(base)})[{i}] & {em} : 0;"]
        if out.cat != "mem":
            return None
        if op == "demux" and base is not None and base.cat == "mem" and base.depth == out.depth \
                and el.params["elem"] == out.ew:
            i = self._operand_scalar(sls[1], ins[1])
            v = self._operand_scalar(sls[2], ins[2])
            if i is None or v is None:
                return None
            em = self._lit(ops.mask(out.ew))
            return "mem", [f"memcpy(m, {self._ref(base)}, sizeof(word) * {out.depth});",
                           f"if ({i} < {out.depth}) m[{i}] = {v} & {em};"]
        srcs = ins if op == "buf" else ins[1:] if op == "mux" else None
        if srcs is not None:
            ss = sls if op == "buf" else sls[1:]
            if all(not isinstance(x, Const) and x.cat == "mem" and x.depth == out.depth and x.ew == out.ew for x in ss):
                if op == "buf":
                    return "mem", [f"memcpy(m, {self._ref(ss[0])}, sizeof(word) * {out.depth});"]
                c = self._operand_scalar(sls[0], ins[0])
                if c is None:
                    return None
                return "mem", [f"memcpy(m, {c} ? {self._ref(ss[0])} : {self._ref(ss[1])}, sizeof(word) * {out.depth});"]
        return None

    def _operand_scalar(self, sl, x):
        if isinstance(x, Const):
            return self._lit(x.value) if x.width <= self.cw else None
        return self._ref(sl) if sl.cat == "scalar" else None

    def compute(self, el, slot_of, out_sid=None) -> tuple[str, list[str], int]:
        """(result kind, statements, words) computing element ``el``.

        Kinds: "scalar" leaves the value in ``x``; "wide" in ``r``; "mem" in
        ``m``.  ``out_sid`` overrides the storage layout of the result.
        """
        out = self._slot(el.output if out_sid is None else out_sid, "?", 0)
        sls = [x if isinstance(x, Const) else slot_of(x) for x in el.inputs]
        ws = [self.d.operand_width(x) for x in el.inputs]
        fast = self._mem_fast(el, sls, out)
        if fast is not None:
            return fast[0], fast[1], out.words
        if out.cat == "scalar" and all(w <= self.cw for w in ws):
            a = [self._lit(x.value) if isinstance(x, Const) else self._ref(s) for x, s in zip(el.inputs, sls)]
            return "scalar", self._scalar_expr(el, a, ws, out.width), 1
        stmts, n = self._wide(el, sls, ws, out.width)
        if out.cat == "scalar":
            return "scalar", stmts + ["x = r[0];"], 1
        if out.cat == "mem":
            return "mem", stmts + [f"aw_unpack(m, {out.depth}, {out.ew}, r, {n});"], out.words
        return "wide", stmts + ([] if n == out.words else [f"/* {n} words computed, {out.words} stored */"]), out.words

    def _decl(self, kind, words):
        if kind == "scalar":
            return "word x;"
        if kind == "mem":
            return f"word m[{words}];"
        return ""

    def _store(self, kind, words, dst: Slot, gated, marks, ind, also=None) -> list[str]:
        """Store the computed value into ``dst``; raise ``marks`` when it changed."""
        src = {"scalar": "x", "wide": "r", "mem": "m"}[kind]
        L = []
        flags = "".join(f" act[{f}] = 1;" for f in marks)
        extra = []
        if also is not None:
            extra = [also]
        if kind == "scalar":
            ref = self._ref(dst)
            if gated or marks:
                L.append(f"{ind}if (x != {ref}) {{ {ref} = x;{flags} }}")
            else:
                L.append(f"{ind}{ref} = x;")
            for o in extra:
                L.append(f"{ind}{self._ref(o)} = x;")
        else:
            ref = self._ref(dst)
            size = f"sizeof(word) * {dst.words}"
            if gated or marks:
                L.append(f"{ind}if (memcmp({ref}, {src}, {size})) {{ memcpy({ref}, {src}, {size});{flags} }}")
            else:
                L.append(f"{ind}memcpy({ref}, {src}, {size});")
            for o in extra:
                L.append(f"{ind}memcpy({self._ref(o)}, {src}, {size});")
        return L

    # -- blocks ------------------------------------------------------------------------------
    def _block(self, k, j, part, slots, nwords, osl, deferred, late) -> list[str]:
        d = self.d
        name = f"blk_{k}_{j}"
        arr = f"W{k}_{j}"

        def slot_of(x):
            if d.signals[x].kind == "wire":
                return slots[x]
            return self.shared[x]

        local_watch: dict[int, list[int]] = {}
        for g in part.groups:
            for s in g.watch:
                if d.signals[s].kind == "wire":
                    local_watch.setdefault(s, []).append(self.flag_of[(k, j, g.id)])
        defs = [self._define(slots[w]) for w in sorted(slots)]
        uses_arr = any(sl.area == arr for sl in slots.values())
        L = ([f"static word {arr}[{nwords}];"] if uses_arr else []) + defs + [f"static void {name}(word *st) {{"]
        if not self.gated and part.placeholders:
            n_ph = max(part.placeholders.values()) + 1
            L.append("    " + " ".join(f"word ph{i} = 0;" for i in range(n_ph)))
            L.append("    " + " ".join(f"(void)ph{i};" for i in range(n_ph)))
        n_el = 0
        for g in part.groups:
            flag = self.flag_of[(k, j, g.id)]
            ind = "    "
            if self.gated:
                L.append(f"    if (act[{flag}]) {{")
                L.append(f"        act[{flag}] = 0; st[0] += {len(g.members)}; st[1] += 1;")
                ind = "        "
            n_el += len(g.members)
            if g.terminal is not None:
                r = g.terminal
                t = next(t for t in part.terminals if t.register == r)
                rs = self.shared[r]
                if t.element is not None:
                    el = d.elements[t.element]
                    L.append(f"{ind}{{ /* {ops.ROW[el.op]}: {d.signals[r].name} */")
                else:
                    el = Element(-1, "buf", [t.source], r)
                    L.append(f"{ind}{{ /* copy: {d.signals[r].name} */")
                kind, stmts, words = self.compute(el, slot_of, r)
                L.append(f"{ind}    {self._decl(kind, words)}")
                L.extend(f"{ind}    {s}" for s in stmts)
                if r in late or r in deferred:
                    ps = self.pre[r]
                    src = {"scalar": "x", "wide": "r", "mem": "m"}[kind]
                    if kind == "scalar":
                        L.append(f"{ind}    {self._ref(ps)} = x;")
                    else:
                        L.append(f"{ind}    memcpy({self._ref(ps)}, {src}, sizeof(word) * {ps.words});")
                    L.append(f"{ind}    pend[{self.pend_index[r]}] = 1;")
                else:
                    L.extend(self._store(kind, words, rs, True, self.watchers.get(r, []), ind + "    "))
                L.append(f"{ind}}}")
            else:
                for m in g.members:
                    el = d.elements[m]
                    o = el.output
                    kind, stmts, words = self.compute(el, slot_of)
                    is_out = d.signals[o].kind == "output"
                    dst = self.shared[o] if is_out else slots[o]
                    also = self.shared[o] if not is_out and o in self.shared and osl.owner == "OD" else None
                    marks = local_watch.get(o, []) if self.gated and not is_out else []
                    L.append(f"{ind}/* {ops.ROW[el.op]} */")
                    if kind == "scalar" and len(stmts) == 1 and stmts[0].startswith("x = ") \
                            and (is_out or not self.gated):
                        # plain direct computation
                        L.append(f"{ind}{self._ref(dst)} = {stmts[0][4:]}")
                        if also is not None:
                            L.append(f"{ind}{self._ref(also)} = {self._ref(dst)};")
                        continue
                    L.append(f"{ind}{{ {self._decl(kind, words)}")
                    L.extend(f"{ind}    {s}" for s in stmts)
                    L.extend(self._store(kind, words, dst, self.gated and not is_out, marks, ind + "    ", also))
                    L.append(f"{ind}}}")
            if self.gated:
                L.append("    }")
        if not self.gated:
            L.append(f"    st[0] += {n_el}; st[1] += {len(part.groups)};")
        L.append("}")
        L.extend(f"#undef {slots[w].cname}" for w in sorted(slots))
        return L

    # -- whole model ---------------------------------------------------------------------------
    def source(self) -> str:
        d = self.d
        cw = self.cw
        multi = self.cfg.tdmax > 1
        self.pend_index = {r: k for k, r in enumerate(sorted(d.registers))}
        word_t = "uint64_t" if cw == 64 else "uint32_t"
        out = [f"/* AOC model of {d.top}: {len(d.signals)} signals, {len(d.elements)} elements */",
               f"/* word width {cw}; {'gated' if self.gated else 'full'} evaluation; "
               f"{self.cfg.tdmax} partition(s) per pass at most */",
               SIGNAL_CLASS_NOTE]
        out.append(PREAMBLE.replace("@WORD@", word_t).replace("@CW@", str(cw)))
        out.append("static int lab_eq(const word *a, int n, const word *b) { return aw_cmp(a, b, n) == 0; }")
        out.append("")
        out.append("/* state block */")
        out.append(f"word S[{self.n_shared}];")
        out.append(f"static word P[{self.n_pre}];")
        out.append(f"static unsigned char pend[{max(len(self.pend_index), 1)}];")
        out.append(f"static unsigned char act[{self.n_flags}];")
        out.append("unsigned long aoc_elements, aoc_groups;")
        out.append("int aoc_error;")
        out.append("")
        out.append("/* name mangling: shared signals */")
        out.extend(self._define(self.shared[sid]) for sid in sorted(self.shared) if self.shared[sid].cname)
        out.append("")
        # signal table
        table = sorted(self.shared.values(), key=lambda s: s.sid)
        self.table = [s.sid for s in table if d.signals[s.sid].kind != "wire"]
        cats = {"scalar": 0, "wide": 1, "mem": 2}
        out.append("typedef struct { const char *name; int kind; int width; int depth; int cat; int off; int words; } aoc_signal;")
        kinds = {"input": 0, "output": 1, "register": 2, "wire": 3}
        rows = []
        for sid in self.table:
            s, sl = d.signals[sid], self.shared[sid]
            rows.append(f'    {{"{s.name}", {kinds[s.kind]}, {s.width}, {sl.depth}, {cats[sl.cat]}, {sl.off}, {sl.words}}},')
        out.append(f"const aoc_signal aoc_signals[{max(len(rows), 1)}] = {{")
        out.extend(rows or ['    {"", 0, 1, 1, 0, 0, 1},'])
        out.append("};")
        out.append(f"const int aoc_n_signals = {len(rows)};")
        out.append("")
        # blocks
        pass_blocks: dict[int, list[str]] = {}
        for k, j, part, slots, nwords in self.blocks:
            osl = self.plans[k].osl
            deferred = set(osl.order.split_set) if osl.order else set()
            if multi:
                deferred = {t.register for t in osl.terminals}
            out.extend(self._block(k, j, part, slots, nwords, osl, deferred, osl.cross_read))
            out.append("")
            pass_blocks.setdefault(k, []).append(f"blk_{k}_{j}")
        out.extend(self._mark_fn())
        out.extend(self._commit_fns(multi))
        out.extend(self._pass_fns(pass_blocks))
        out.extend(self._step_fns())
        return "\n".join(out) + "\n"

    def _mark_fn(self) -> list[str]:
        L = ["static void mark(int sid) {", "    switch (sid) {"]
        for sid in sorted(self.watchers):
            flags = " ".join(f"act[{f}] = 1;" for f in self.watchers[sid])
            L.append(f"    case {sid}: {flags} break;")
        L += ["    default: break;", "    }", "}", ""]
        return L

    def _commit_fns(self, multi) -> list[str]:
        L = []
        for k, pp in enumerate(self.plans):
            osl = pp.osl
            if not osl.terminals:
                continue
            split = set(osl.order.split_set) if osl.order else set()
            regs = [t.register for t in osl.terminals if (multi or t.register in split) and t.register not in osl.cross_read]
            L.append(f"static void commit_{k}(void) {{")
            L.extend(self._commit_lines(regs))
            L.append("}")
            L.append("")
        late = sorted({r for pp in self.plans for r in pp.osl.cross_read})
        L.append("static void commit_late(void) {")
        L.extend(self._commit_lines(late))
        L.append("}")
        L.append("")
        return L

    def _commit_lines(self, regs):
        L = []
        for r in regs:
            rs, ps = self.shared[r], self.pre[r]
            i = self.pend_index[r]
            size = f"sizeof(word) * {rs.words}"
            L.append(f"    if (pend[{i}]) {{ pend[{i}] = 0;")
            if rs.cat == "scalar":
                L.append(f"        if ({self._ref(ps)} != {self._ref(rs)}) {{ {self._ref(rs)} = {self._ref(ps)}; mark({r}); }}")
            else:
                L.append(f"        if (memcmp({self._ref(rs)}, {self._ref(ps)}, {size})) {{ memcpy({self._ref(rs)}, {self._ref(ps)}, {size}); mark({r}); }}")
            L.append("    }")
        return L

    def _pass_fns(self, pass_blocks) -> list[str]:
        self.max_blocks = max((len(v) for v in pass_blocks.values()), default=1)
        nb = max(self.max_blocks, 1)
        L = ["#ifdef AOC_THREADS",
             "#include <pthread.h>",
             "static pthread_barrier_t bar_start, bar_done;",
             f"static void (*volatile task[{nb}])(word *);",
             "static int n_task;",
             f"static word task_st[{nb}][2];",
             "static int n_workers;",
             "static void *worker(void *arg) {",
             "    long k = (long)arg;",
             "    for (;;) {",
             "        pthread_barrier_wait(&bar_start);",
             "        if (k < n_task && task[k]) task[k](task_st[k]);",
             "        pthread_barrier_wait(&bar_done);",
             "    }",
             "    return 0;",
             "}",
             "static void run_blocks(void (**fns)(word *), int n) {",
             "    if (n < 2 || n_workers == 0) { for (int i = 0; i < n; i++) { word st[2] = {0, 0}; fns[i](st); aoc_elements += st[0]; aoc_groups += st[1]; } return; }",
             "    n_task = n;",
             "    for (int i = 0; i < n; i++) { task[i] = i ? fns[i] : 0; task_st[i][0] = task_st[i][1] = 0; }",
             "    pthread_barrier_wait(&bar_start);",
             "    fns[0](task_st[0]);",
             "    pthread_barrier_wait(&bar_done);",
             "    for (int i = 0; i < n; i++) { aoc_elements += task_st[i][0]; aoc_groups += task_st[i][1]; }",
             "}",
             "#else",
             "static void run_blocks(void (**fns)(word *), int n) {",
             "    for (int i = 0; i < n; i++) { word st[2] = {0, 0}; fns[i](st); aoc_elements += st[0]; aoc_groups += st[1]; }",
             "}",
             "#endif",
             ""]
        for k, pp in enumerate(self.plans):
            blocks = pass_blocks.get(k, [])
            L.append(f"static void pass_{k}(void) {{ /* {pp.osl.name} */")
            if blocks:
                L.append(f"    static void (*fns[{len(blocks)}])(word *) = {{{', '.join(blocks)}}};")
                L.append(f"    run_blocks(fns, {len(blocks)});")
            if pp.osl.terminals:
                L.append(f"    commit_{k}();")
            L.append("}")
            L.append("")
        return L

    def _step_fns(self) -> list[str]:
        d = self.d
        passes = self.schedule.passes
        roots = sorted({p.root for p in passes})
        L = [f"static word prev_root[{max(len(roots), 1)}];", ""]
        L.append("/* cycle function: output pass, then edge iterations */")
        L.append("int model_step(void) {")
        L.append("    pass_0();")
        L.append("    for (int it = 0; it < 16; it++) {")
        L.append("        int fired = 0;")
        for i, r in enumerate(roots):
            L.append(f"        word cur{i} = {self._root_bit(r)};")
        for n, p in enumerate(passes, 1):
            i = roots.index(p.root)
            want = "1" if p.polarity == "posedge" else "0"
            L.append(f"        int e{n} = prev_root[{i}] != cur{i} && cur{i} == {want};")
            L.append(f"        fired |= e{n};")
        for i in range(len(roots)):
            L.append(f"        prev_root[{i}] = cur{i};")
        L.append("        if (!fired) return 0;")
        for n, p in enumerate(passes, 1):
            L.append(f"        if (e{n}) pass_{n}();")
        L.append("        commit_late();")
        L.append("        pass_0();")
        L.append("    }")
        L.append("    aoc_error = 1;")
        L.append("    return -1;")
        L.append("}")
        L.append("")
        L.append("/* stimulus hook: set an input from little-endian words */")
        L.append("void model_set_input(int index, const word *value) {")
        L.append("    const aoc_signal *s = &aoc_signals[index];")
        L.append("    word t[s->words];")
        L.append("    if (s->cat == 2) aw_unpack(t, s->depth, s->width / s->depth, value, (s->width + CW - 1) / CW);")
        L.append("    else { aw_copy(t, s->words, value, s->words); aw_mask(t, s->words, s->width); }")
        L.append("    if (memcmp(&S[s->off], t, sizeof(word) * s->words)) {")
        L.append("        memcpy(&S[s->off], t, sizeof(word) * s->words);")
        L.append("        switch (index) {")
        for idx, sid in enumerate(self.table):
            if d.signals[sid].kind == "input":
                L.append(f"        case {idx}: mark({sid}); break;")
        L.append("        default: break;")
        L.append("        }")
        L.append("    }")
        L.append("}")
        L.append("")
        L.append("/* value of a table signal as little-endian words (memories are serialized) */")
        L.append("void model_get(int index, word *out, int n) {")
        L.append("    const aoc_signal *s = &aoc_signals[index];")
        L.append("    if (s->cat == 2) aw_pack(out, n, &S[s->off], s->depth, s->width / s->depth);")
        L.append("    else aw_copy(out, n, &S[s->off], s->words);")
        L.append("}")
        L.append("")
        L.append("void model_init(void) {")
        for sid in sorted(d.registers):
            s, sl = d.signals[sid], self.shared[sid]
            if s.init:
                if sl.cat == "scalar":
                    L.append(f"    S[{sl.off}] = {self._lit(s.init)};")
                else:
                    n = _words(s.width, self.cw)
                    words = ", ".join(self._const_words(s.init, n))
                    L.append(f"    {{ word t[{n}] = {{{words}}};")
                    if sl.cat == "mem":
                        L.append(f"      aw_unpack(&S[{sl.off}], {sl.depth}, {sl.ew}, t, {n}); }}")
                    else:
                        L.append(f"      memcpy(&S[{sl.off}], t, sizeof(t)); }}")
        L.append("    memset(act, 1, sizeof(act));")
        L.append("    (void)P; (void)pend;")
        L.append("#ifdef AOC_THREADS")
        L.append(f"    n_workers = {self.max_blocks - 1};")
        L.append("    if (n_workers > 0) {")
        L.append("        pthread_barrier_init(&bar_start, 0, n_workers + 1);")
        L.append("        pthread_barrier_init(&bar_done, 0, n_workers + 1);")
        L.append("        for (long k = 1; k <= n_workers; k++) { pthread_t t; pthread_create(&t, 0, worker, (void *)k); pthread_detach(t); }")
        L.append("    }")
        L.append("#endif")
        L.append("    pass_0();")
        for i, r in enumerate(roots):
            L.append(f"    prev_root[{i}] = {self._root_bit(r)};")
        L.append("    aoc_elements = aoc_groups = 0;")
        L.append("}")
        return L

    def _root_bit(self, r):
        sl = self.shared[r]
        if sl.cat == "scalar":
            return f"({self._ref(sl)} & 1)"
        return f"(S[{sl.off}] & 1)"

    def header(self) -> str:
        return "\n".join([
            f"/* interface of the AOC model of {self.d.top} */",
            "#ifndef AOC_MODEL_H",
            "#define AOC_MODEL_H",
            "#include <stdint.h>",
            f"typedef {'uint64_t' if self.cw == 64 else 'uint32_t'} word;",
            "typedef struct { const char *name; int kind; int width; int depth; int cat; int off; int words; } aoc_signal;",
            "extern const aoc_signal aoc_signals[];",
            "extern const int aoc_n_signals;",
            "extern unsigned long aoc_elements, aoc_groups;",
            "void model_init(void);",
            "int model_step(void);",
            "void model_set_input(int index, const word *value);",
            "void model_get(int index, word *out, int n);",
            "#endif",
            "",
        ])


def emit_model(design: FlatDesign, config: ExecConfig | None = None, gated: bool = True) -> str:
    """C source of the model (single translation unit)."""
    return CEmitter(design, config, gated).source()


def emit_files(design: FlatDesign, out_path: str, config: ExecConfig | None = None,
               gated: bool = True, single_file: bool = False) -> list[str]:
    em = CEmitter(design, config, gated)
    src = em.source()
    written = [out_path]
    os.makedirs(os.path.dirname(os.path.abspath(out_path)), exist_ok=True)
    if not single_file:
        hdr_path = os.path.splitext(out_path)[0] + ".h"
        with open(hdr_path, "w") as fh:
            fh.write(em.header())
        src = f'#include "{os.path.basename(hdr_path)}"\n' + _strip_shared_decls(src)
        written.append(hdr_path)
    with open(out_path, "w") as fh:
        fh.write(src)
    return written


def _strip_shared_decls(src: str) -> str:
    # the header already provides the word and table typedefs
    skip = ("typedef uint64_t word;", "typedef uint32_t word;",
            "typedef struct { const char *name; int kind;")
    return "\n".join(l for l in src.split("\n") if not l.startswith(skip)) + ""


TEST_MAIN = r"""
#include <stdio.h>
#include <stdlib.h>

static int hexval(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return c - 'A' + 10;
}

int main(void) {
    char line[8192];
    model_init();
    while (fgets(line, sizeof line, stdin)) {
        if (line[0] == 'S') {
            int idx;
            char hex[8000];
            if (sscanf(line + 1, "%d %7999s", &idx, hex) != 2) return 2;
            int n = aoc_signals[idx].words;
            if (aoc_signals[idx].cat == 2) n = (aoc_signals[idx].width + CW - 1) / CW;
            word v[n > 0 ? n : 1];
            for (int i = 0; i < n; i++) v[i] = 0;
            int len = (int)strlen(hex);
            for (int k = 0; k < len; k++) {
                int bit = 4 * (len - 1 - k);
                if (bit / CW < n) v[bit / CW] |= ((word)hexval(hex[k])) << (bit % CW);
            }
            model_set_input(idx, v);
        } else if (line[0] == 'T') {
            if (model_step() != 0) { printf("E oscillation\n"); return 3; }
        } else if (line[0] == 'P') {
            int c = atoi(line + 1);
            printf("P %d", c);
            for (int i = 0; i < aoc_n_signals; i++) {
                int n = (aoc_signals[i].width + CW - 1) / CW;
                word v[n];
                model_get(i, v, n);
                printf(" ");
                int started = 0;
                for (int w = n - 1; w >= 0; w--) {
                    for (int b = CW - 4; b >= 0; b -= 4) {
                        int d = (int)((v[w] >> b) & 15);
                        if (d || started || (w == 0 && b == 0)) { putchar("0123456789abcdef"[d]); started = 1; }
                    }
                }
            }
            printf("\n");
        }
    }
    return 0;
}
"""


def find_toolchain() -> str:
    for cc in (os.environ.get("CC"), "cc", "gcc", "clang"):
        if cc and shutil.which(cc):
            return shutil.which(cc)
    raise ToolchainMissing("no C compiler found (set CC)")


def compile_model(source: str, workdir: str, toolchain: str | None = None, threads: bool = False) -> str:
    cc = toolchain or find_toolchain()
    src = os.path.join(workdir, "model_main.c")
    exe = os.path.join(workdir, "model")
    with open(src, "w") as fh:
        fh.write(source)
        fh.write(TEST_MAIN)
    cmd = [cc, "-std=gnu99", "-O1", "-w", "-o", exe, src]
    if threads:
        cmd[1:1] = ["-DAOC_THREADS", "-pthread"]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        raise UnsupportedForEmit(f"C compilation failed: {proc.stderr[:2000]}")
    return exe


def verify_emitted(design: FlatDesign, stimulus: Stimulus, cycles: int, reference: Trace,
                   config: ExecConfig | None = None, gated: bool = True, toolchain: str | None = None,
                   mutate=None, threads: bool = False) -> None:
    """Compile the emitted model, replay the stimulus and diff against ``reference``.

    Raises TraceMismatch at the first divergent (cycle, signal) and
    ToolchainMissing when no compiler is available.
    """
    em = CEmitter(design, config, gated)
    source = em.source()
    if mutate is not None:
        source = mutate(source)
    index = {sid: k for k, sid in enumerate(em.table)}
    resolved = stimulus.resolve(design)
    cmds = []
    for act in resolved.actions(cycles):
        if act[0] == "set":
            cmds.append(f"S {index[act[1]]} {act[2]:x}")
        elif act[0] == "step":
            cmds.append("T")
        elif act[0] == "sample":
            cmds.append(f"P {act[1]}")
    with tempfile.TemporaryDirectory() as tmp:
        exe = compile_model(source, tmp, toolchain, threads)
        proc = subprocess.run([exe], input="\n".join(cmds) + "\n", capture_output=True, text=True)
    if proc.returncode != 0:
        raise TraceMismatch(-1, "<model exit>", 0, proc.returncode)
    names = [design.signals[s].name for s in em.table]
    ref_samples = dict(reference.samples())
    lines = [l for l in proc.stdout.splitlines() if l.startswith("P ")]
    if len(lines) != cycles:
        raise TraceMismatch(len(lines), "<samples>", cycles, len(lines))
    for line in lines:
        parts = line.split()
        c = int(parts[1])
        want = ref_samples[c]
        for n, h in zip(names, parts[2:]):
            v = int(h, 16)
            if n in want and want[n] != v:
                raise TraceMismatch(c, n, want[n], v)
