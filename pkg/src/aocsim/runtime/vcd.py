"""Value change dump output."""
from __future__ import annotations

from ..errors import AocError
from .trace import Trace


def _ident(n: int) -> str:
    chars = []
    while True:
        chars.append(chr(33 + n % 94))
        n //= 94
        if n == 0:
            return "".join(chars)
        n -= 1


def _value(v: int, width: int, ident: str) -> str:
    if width == 1:
        return f"{v & 1}{ident}"
    return f"b{v:b} {ident}"


def vcd_text(trace: Trace, top: str, selection=None, timescale: str = "1ns") -> str:
    names = [n for n in trace.names if selection is None or n in set(selection)]
    ids = {n: _ident(k) for k, n in enumerate(names)}
    out = [f"$timescale {timescale} $end", f"$scope module {top} $end"]
    # build the scope tree from each signal's instance path
    tree: dict = {}
    for n in names:
        node = tree
        for part in trace.scopes.get(n, ()):
            node = node.setdefault(("s", part), {})
        node.setdefault(("v",), []).append(n)

    def emit(node, path):
        prefix = "_".join((top,) + path) + "_"
        for n in node.get(("v",), []):
            local = n[len(prefix):] if n.startswith(prefix) else n
            out.append(f"$var wire {trace.widths[n]} {ids[n]} {local} $end")
        for key in sorted(k for k in node if k[0] == "s"):
            out.append(f"$scope module {key[1]} $end")
            emit(node[key], path + (key[1],))
            out.append("$upscope $end")

    emit(tree, ())
    out.append("$upscope $end")
    out.append("$enddefinitions $end")
    samples = trace.samples()
    first = next(samples, None)
    start = first[1] if first is not None else trace.initial
    out.append("#0")
    out.append("$dumpvars")
    out.extend(_value(start[n], trace.widths[n], ids[n]) for n in names)
    out.append("$end")
    last = dict(start)
    for c, vals in samples:
        changed = [n for n in names if vals[n] != last[n]]
        if changed:
            out.append(f"#{c}")
            for n in changed:
                out.append(_value(vals[n], trace.widths[n], ids[n]))
                last[n] = vals[n]
    return "\n".join(out) + "\n"


def dump_vcd(trace: Trace, path: str, top: str = "top", selection=None, timescale: str = "1ns"):
    text = vcd_text(trace, top, selection, timescale)
    try:
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise AocError(f"cannot write {path}: {exc}") from None
