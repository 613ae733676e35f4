"""Syntax tree for the Verilog subset.

Nodes compare structurally; source locations are carried but excluded from
equality so that a reparse of printed source compares equal.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import Loc

_NOLOC = Loc()


def _loc():
    return field(default=_NOLOC, compare=False, repr=False, kw_only=True)


@dataclass
class Node:
    loc: Loc = _loc()


# -- expressions ---------------------------------------------------------------

@dataclass
class Number(Node):
    value: int
    width: int | None = None  # None: unsized (32 bits)


@dataclass
class Ident(Node):
    name: str


@dataclass
class String(Node):
    value: str


@dataclass
class Index(Node):
    base: Node
    index: Node


@dataclass
class PartSelect(Node):
    base: Node
    msb: Node
    lsb: Node


@dataclass
class IndexedPart(Node):
    base: Node
    start: Node
    width: Node


@dataclass
class Unary(Node):
    op: str
    operand: Node


@dataclass
class Binary(Node):
    op: str
    left: Node
    right: Node


@dataclass
class Ternary(Node):
    cond: Node
    then: Node
    other: Node


@dataclass
class Concat(Node):
    parts: list


@dataclass
class Replicate(Node):
    count: Node
    parts: list


@dataclass
class Call(Node):
    name: str
    args: list


# -- statements ----------------------------------------------------------------

@dataclass
class Block(Node):
    stmts: list
    name: str | None = None


@dataclass
class Assign(Node):
    lhs: Node
    rhs: Node
    blocking: bool


@dataclass
class If(Node):
    cond: Node
    then: Node | None
    other: Node | None = None


@dataclass
class CaseItem(Node):
    labels: list | None  # None for default
    body: Node | None


@dataclass
class Case(Node):
    expr: Node
    items: list


@dataclass
class Delay(Node):
    amount: Node
    stmt: Node | None


@dataclass
class Event(Node):
    edge: str | None  # None, "posedge", "negedge"
    expr: Node


@dataclass
class EventWait(Node):
    events: list
    stmt: Node | None


@dataclass
class Forever(Node):
    body: Node


@dataclass
class RepeatStmt(Node):
    count: Node
    body: Node


@dataclass
class SysCall(Node):
    name: str
    args: list


# -- module items --------------------------------------------------------------

@dataclass
class Range(Node):
    msb: Node
    lsb: Node


@dataclass
class PortDecl(Node):
    direction: str
    net: str | None
    range: Range | None
    names: list


@dataclass
class VarDecl(Node):
    name: str
    array: Range | None = None
    init: Node | None = None


@dataclass
class NetDecl(Node):
    kind: str  # "wire" or "reg"
    range: Range | None
    decls: list


@dataclass
class ParamDecl(Node):
    name: str
    value: Node
    local: bool = False
    range: Range | None = None


@dataclass
class ContAssign(Node):
    lhs: Node
    rhs: Node


@dataclass
class Always(Node):
    # "comb" for @* / @(*), a list of Event for explicit lists, None when the
    # body starts with its own timing control (testbench style)
    sens: object
    body: Node


@dataclass
class Initial(Node):
    body: Node


@dataclass
class Instance(Node):
    module: str
    name: str
    params: list  # (name | None, expr)
    ports: list  # (name | None, expr | None)


@dataclass
class Function(Node):
    name: str
    range: Range | None
    inputs: list  # PortDecl with direction "input"
    decls: list  # NetDecl
    body: Node


@dataclass
class Module(Node):
    name: str
    params: list  # header ParamDecl
    ports: list  # PortDecl (ANSI) or str names
    items: list
    ansi: bool = True


@dataclass
class SourceUnit:
    files: list  # (path, text)
    modules: list

    def module(self, name: str) -> Module:
        for m in self.modules:
            if m.name == name:
                return m
        raise KeyError(name)
