"""Flattened design graph and its JSON netlist form.

A :class:`FlatDesign` holds signals (inputs, outputs, registers, wires) and
combinational elements.  Every wire and output has exactly one driving
element; element inputs are inputs, registers, wires or immediate
constants.  Registers carry their clock pin, edge polarity and data input.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import ops
from .errors import DanglingReference, MultiDriver, SchemaError

KINDS = ("input", "output", "register", "wire")
IR_VERSION = 1


@dataclass(frozen=True)
class Const:
    value: int
    width: int

    def __post_init__(self):
        object.__setattr__(self, "value", self.value & ops.mask(self.width))


@dataclass
class Signal:
    id: int
    name: str
    kind: str
    width: int
    dims: int = 1
    depth: int = 1
    init: int = 0
    output: bool = False
    scope: tuple[str, ...] = ()

    @property
    def word_width(self) -> int:
        return self.width // self.depth


@dataclass
class Element:
    id: int
    op: str
    inputs: list
    output: int
    params: dict = field(default_factory=dict)

    def signal_inputs(self):
        return [x for x in self.inputs if not isinstance(x, Const)]


@dataclass
class RegisterInfo:
    register: int
    clock: int
    polarity: str
    d: int


@dataclass
class FlatDesign:
    top: str
    signals: dict[int, Signal] = field(default_factory=dict)
    elements: dict[int, Element] = field(default_factory=dict)
    registers: dict[int, RegisterInfo] = field(default_factory=dict)

    # construction helpers -------------------------------------------------
    def add_signal(self, name, kind, width, **kw) -> Signal:
        sid = max(self.signals, default=-1) + 1
        sig = Signal(sid, name, kind, width, **kw)
        self.signals[sid] = sig
        return sig

    def add_element(self, op, inputs, output, params=None) -> Element:
        eid = max(self.elements, default=-1) + 1
        el = Element(eid, op, list(inputs), output, dict(params or {}))
        self.elements[eid] = el
        return el

    # queries ----------------------------------------------------------------
    def by_kind(self, kind: str) -> list[int]:
        return [s.id for s in self.signals.values() if s.kind == kind]

    @property
    def inputs(self):
        return self.by_kind("input")

    @property
    def outputs(self):
        return self.by_kind("output")

    @property
    def wires(self):
        return self.by_kind("wire")

    def observables(self) -> list[int]:
        """Signals that live in the shared store and appear in traces."""
        return sorted(s.id for s in self.signals.values() if s.kind != "wire")

    def drivers(self) -> dict[int, Element]:
        return {e.output: e for e in self.elements.values()}

    def readers(self) -> dict[int, list[Element]]:
        out: dict[int, list[Element]] = {sid: [] for sid in self.signals}
        for e in self.elements.values():
            for x in e.signal_inputs():
                out[x].append(e)
        return out

    def operand_width(self, x) -> int:
        return x.width if isinstance(x, Const) else self.signals[x].width

    def lookup(self, name: str) -> int:
        """Resolve a flat name, a top-relative name, or a dotted path."""
        for s in self.signals.values():
            if s.name == name:
                return s.id
        alt = self.top + "_" + name.replace(".", "_")
        for s in self.signals.values():
            if s.name == alt:
                return s.id
        raise KeyError(name)

    def copy(self) -> "FlatDesign":
        return load_ir(export_ir(self))

    def stats(self) -> dict:
        return {
            "inputs": len(self.inputs),
            "outputs": len(self.outputs),
            "registers": len(self.registers),
            "wires": len(self.wires),
            "elements": len(self.elements),
        }

    def validate(self):
        """Check the structural invariants, raising on the first violation."""
        driven: dict[int, int] = {}
        for e in self.elements.values():
            if e.op not in ops.ALL_OPS or not ops.check_arity(e.op, len(e.inputs), e.params):
                raise SchemaError(f"elements[{e.id}]", f"bad op/arity {e.op}/{len(e.inputs)}")
            if e.output not in self.signals:
                raise DanglingReference(e.output, f"output of element {e.id}")
            out = self.signals[e.output]
            if out.kind not in ("wire", "output"):
                raise SchemaError(f"elements[{e.id}].output", f"drives a {out.kind}")
            if e.output in driven:
                raise MultiDriver(out.name)
            driven[e.output] = e.id
            for x in e.signal_inputs():
                if x not in self.signals:
                    raise DanglingReference(x, f"input of element {e.id}")
                if self.signals[x].kind == "output":
                    raise SchemaError(f"elements[{e.id}].inputs", "elements may not read outputs")
        for s in self.signals.values():
            if s.width < 1:
                raise SchemaError(f"signals[{s.id}].width", "width must be >= 1")
            if s.kind not in KINDS:
                raise SchemaError(f"signals[{s.id}].kind", s.kind)
            if s.kind in ("wire", "output") and s.id not in driven:
                raise DanglingReference(s.name, "undriven")
            if s.kind == "register" and s.id not in self.registers:
                raise SchemaError(f"signals[{s.id}]", "register without clock entry")
        for r in self.registers.values():
            for ref in (r.register, r.clock, r.d):
                if ref not in self.signals:
                    raise DanglingReference(ref, "clock entry")
            if self.signals[r.register].kind != "register":
                raise SchemaError("clocks", f"{r.register} is not a register")
            if r.polarity not in ("posedge", "negedge"):
                raise SchemaError("clocks", f"bad polarity {r.polarity}")
            for ref in (r.clock, r.d):
                if self.signals[ref].kind == "output":
                    raise SchemaError("clocks", "clock and data pins may not read outputs")
            if self.signals[r.d].width != self.signals[r.register].width:
                raise SchemaError("clocks", f"data pin width differs for {self.signals[r.register].name}")
        names = [s.name for s in self.signals.values()]
        if len(set(names)) != len(names):
            raise SchemaError("signals", "duplicate signal names")


# -- JSON netlist --------------------------------------------------------------

def _operand_to_json(x):
    if isinstance(x, Const):
        return {"const": x.value, "width": x.width}
    return x


def _params_to_json(params: dict) -> dict:
    out = {}
    for k, v in sorted(params.items()):
        if k == "labels":
            v = [sorted(lbl) for lbl in v]
        out[k] = v
    return out


def export_ir(design: FlatDesign) -> str:
    doc = {
        "aoc_ir": IR_VERSION,
        "top": design.top,
        "signals": [
            {
                "id": s.id, "name": s.name, "kind": s.kind, "width": s.width,
                "dims": s.dims, "depth": s.depth, "init": s.init, "output": s.output,
                "scope": list(s.scope),
            }
            for s in sorted(design.signals.values(), key=lambda s: s.id)
        ],
        "elements": [
            {
                "id": e.id, "op": e.op, "inputs": [_operand_to_json(x) for x in e.inputs],
                "output": e.output, "constants": _params_to_json(e.params),
            }
            for e in sorted(design.elements.values(), key=lambda e: e.id)
        ],
        "clocks": [
            {"register": r.register, "clock": r.clock, "polarity": r.polarity, "d": r.d}
            for r in sorted(design.registers.values(), key=lambda r: r.register)
        ],
    }
    return json.dumps(doc, indent=1)


def _need(obj, key, path, typ=None):
    if not isinstance(obj, dict) or key not in obj:
        raise SchemaError(f"{path}.{key}", "missing")
    v = obj[key]
    if typ is not None and not isinstance(v, typ) or isinstance(v, bool) and typ is int:
        raise SchemaError(f"{path}.{key}", f"expected {typ.__name__}")
    return v


def load_ir(json_text: str) -> FlatDesign:
    try:
        doc = json.loads(json_text)
    except json.JSONDecodeError as exc:
        raise SchemaError("$", str(exc)) from None
    if not isinstance(doc, dict) or doc.get("aoc_ir") != IR_VERSION:
        raise SchemaError("$.aoc_ir", f"expected version {IR_VERSION}")
    design = FlatDesign(str(doc.get("top", "top")))
    for i, s in enumerate(_need(doc, "signals", "$", list)):
        p = f"$.signals[{i}]"
        sid = _need(s, "id", p, int)
        kind = _need(s, "kind", p, str)
        if kind not in KINDS:
            raise SchemaError(f"{p}.kind", kind)
        if sid in design.signals:
            raise SchemaError(f"{p}.id", "duplicate id")
        width = _need(s, "width", p, int)
        if width < 1:
            raise SchemaError(f"{p}.width", "width must be >= 1")
        depth = s.get("depth", 1)
        design.signals[sid] = Signal(
            sid, _need(s, "name", p, str), kind, width,
            dims=s.get("dims", 1), depth=depth, init=s.get("init", 0) & ops.mask(width),
            output=bool(s.get("output", False)), scope=tuple(s.get("scope", ())),
        )
    for i, e in enumerate(_need(doc, "elements", "$", list)):
        p = f"$.elements[{i}]"
        eid = _need(e, "id", p, int)
        if eid in design.elements:
            raise SchemaError(f"{p}.id", "duplicate id")
        inputs = []
        for j, x in enumerate(_need(e, "inputs", p, list)):
            if isinstance(x, dict):
                inputs.append(Const(_need(x, "const", f"{p}.inputs[{j}]", int),
                                    _need(x, "width", f"{p}.inputs[{j}]", int)))
            elif isinstance(x, int) and not isinstance(x, bool):
                if x not in design.signals:
                    raise DanglingReference(x, f"{p}.inputs[{j}]")
                inputs.append(x)
            else:
                raise SchemaError(f"{p}.inputs[{j}]", "expected signal id or constant")
        params = dict(e.get("constants", {}))
        if "labels" in params:
            params["labels"] = [frozenset(lbl) for lbl in params["labels"]]
        out = _need(e, "output", p, int)
        if out not in design.signals:
            raise DanglingReference(out, f"{p}.output")
        design.elements[eid] = Element(eid, _need(e, "op", p, str), inputs, out, params)
    for i, c in enumerate(doc.get("clocks", [])):
        p = f"$.clocks[{i}]"
        reg = _need(c, "register", p, int)
        info = RegisterInfo(reg, _need(c, "clock", p, int), c.get("polarity", "posedge"), _need(c, "d", p, int))
        for ref in (info.register, info.clock, info.d):
            if ref not in design.signals:
                raise DanglingReference(ref, p)
        design.registers[reg] = info
    design.validate()
    return design
