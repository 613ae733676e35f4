"""Combinational operator set and its reference semantics.

All values are unsigned Python ints masked to their declared width.  Each
element computes on unbounded ints and masks the result to its output
width, so narrower operands are zero-extended and wider ones truncated.
"""
from __future__ import annotations

UNARY = {"buf", "not", "lnot", "neg", "rand", "ror", "rxor", "rnand", "rnor", "rxnor"}
BINARY = {
    "and", "or", "xor", "xnor", "land", "lor",
    "add", "sub", "mul", "div", "mod", "shl", "shr",
    "eq", "ne", "lt", "le", "gt", "ge",
}
COMPARE = {"eq", "ne", "lt", "le", "gt", "ge"}
REDUCE = {"rand", "ror", "rxor", "rnand", "rnor", "rxnor"}
ONE_BIT = COMPARE | REDUCE | {"lnot", "land", "lor"}
ALL_OPS = UNARY | BINARY | {"const", "mux", "case", "index", "slice", "demux", "concat"}

# Table-1 row each op belongs to; used for reports and emitted comments.
ROW = {
    **{op: "comb" for op in ("and", "or", "xor", "xnor", "not", "lnot", "land", "lor")},
    **{op: "math" for op in ("add", "sub", "mul", "div", "mod", "neg")},
    **{op: "unary" for op in REDUCE},
    **{op: "compare" for op in COMPARE},
    "shl": "shift", "shr": "shift", "mux": "if", "case": "case", "index": "mux",
    "demux": "demux", "slice": "mux", "concat": "concat", "buf": "buffer", "const": "constant",
}


def mask(width: int) -> int:
    return (1 << width) - 1


def check_arity(op: str, n: int, params: dict) -> bool:
    if op == "const":
        return n == 0 and "value" in params
    if op in UNARY or op == "slice":
        return n == 1
    if op in BINARY or op == "index":
        return n == 2
    if op in ("mux", "demux"):
        return n == 3
    if op == "case":
        return n >= 2 and len(params.get("labels", ())) == n - 2
    if op == "concat":
        return n >= 1
    return False


def evaluate(op: str, args: list[int], widths: list[int], params: dict, width: int) -> int:
    """Reference evaluation of one element.

    ``args`` are operand values, ``widths`` their declared widths, ``width``
    the output width.
    """
    m = mask(width)
    if op == "const":
        return params["value"] & m
    if op == "buf":
        return args[0] & m
    if op == "not":
        return ~args[0] & m
    if op == "lnot":
        return int(args[0] == 0)
    if op == "neg":
        return -args[0] & m
    if op in REDUCE:
        a, full = args[0], mask(widths[0])
        if op in ("rand", "rnand"):
            r = int(a == full)
        elif op in ("ror", "rnor"):
            r = int(a != 0)
        else:
            r = bin(a).count("1") & 1
        return r ^ 1 if op in ("rnand", "rnor", "rxnor") else r
    if op in BINARY:
        a, b = args
        if op == "and":
            return a & b & m
        if op == "or":
            return (a | b) & m
        if op == "xor":
            return (a ^ b) & m
        if op == "xnor":
            return ~(a ^ b) & m
        if op == "land":
            return int(a != 0 and b != 0)
        if op == "lor":
            return int(a != 0 or b != 0)
        if op == "add":
            return (a + b) & m
        if op == "sub":
            return (a - b) & m
        if op == "mul":
            return (a * b) & m
        if op == "div":
            return (a // b) & m if b else 0
        if op == "mod":
            return (a % b) & m if b else 0
        if op == "shl":
            return (a << b) & m if b < width else 0
        if op == "shr":
            return (a >> b) & m if b < widths[0] else 0
        if op == "eq":
            return int(a == b)
        if op == "ne":
            return int(a != b)
        if op == "lt":
            return int(a < b)
        if op == "le":
            return int(a <= b)
        if op == "gt":
            return int(a > b)
        return int(a >= b)
    if op == "mux":
        return (args[1] if args[0] else args[2]) & m
    if op == "case":
        sel = args[0]
        for labels, value in zip(params["labels"], args[1:-1]):
            if sel in labels:
                return value & m
        return args[-1] & m
    if op == "index":
        ew = params["elem"]
        count = widths[0] // ew
        i = args[1]
        return (args[0] >> (i * ew)) & mask(ew) & m if i < count else 0
    if op == "slice":
        return (args[0] >> params["lo"]) & m
    if op == "demux":
        ew = params["elem"]
        count = widths[0] // ew
        base, i, val = args
        if i >= count:
            return base & m
        em = mask(ew) << (i * ew)
        return ((base & ~em) | ((val & mask(ew)) << (i * ew))) & m
    if op == "concat":
        r = 0
        for a, w in zip(args, widths):
            r = (r << w) | (a & mask(w))
        return r & m
    raise ValueError(f"unknown op {op!r}")
