"""Exception hierarchy.

Every error carries an optional source location; ``exit_code`` is the CLI
status the error maps to (2 for design problems, 3 for simulation problems).
"""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Loc:
    file: str = "<input>"
    line: int = 0
    col: int = 0

    def __str__(self):
        return f"{self.file}:{self.line}:{self.col}"


class AocError(Exception):
    exit_code = 2

    def __init__(self, message: str, loc: Loc | None = None):
        self.loc = loc
        self.message = message
        super().__init__(f"{loc}: {message}" if loc is not None else message)


class DesignError(AocError):
    exit_code = 2


class VerilogSyntaxError(DesignError):
    pass


class UnsupportedConstruct(DesignError):
    def __init__(self, construct: str, loc: Loc | None = None, detail: str = ""):
        self.construct = construct
        msg = f"unsupported construct: {construct}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg, loc)


class SchemaError(DesignError):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"schema error at {path}: {message}")


class DanglingReference(DesignError):
    def __init__(self, ref, message: str = ""):
        self.ref = ref
        super().__init__(f"dangling reference {ref!r}" + (f": {message}" if message else ""))


class MultiDriver(DesignError):
    def __init__(self, signal: str, loc: Loc | None = None):
        self.signal = signal
        super().__init__(f"signal {signal!r} has more than one driver", loc)


class RecursiveInstantiation(DesignError):
    def __init__(self, cycle: list[str], loc: Loc | None = None):
        self.cycle = cycle
        super().__init__("recursive instantiation: " + " -> ".join(cycle), loc)


class UnresolvedParameter(DesignError):
    def __init__(self, name: str, loc: Loc | None = None):
        self.name = name
        super().__init__(f"cannot resolve parameter or constant {name!r}", loc)


class ElaborationError(DesignError):
    pass


class LoopError(DesignError):
    def __init__(self, cycle: list[str]):
        self.cycle = cycle
        super().__init__("combinational loop: " + " -> ".join(cycle))


class ConstantClock(DesignError):
    def __init__(self, register: str):
        self.register = register
        super().__init__(f"clock of register {register!r} is a constant")


class ClockDependencyCycle(DesignError):
    def __init__(self, domains: list[str]):
        self.domains = domains
        super().__init__("clock domains depend on each other: " + " -> ".join(domains))


class UnsupportedForEmit(DesignError):
    pass


class WaitInsideDut(DesignError):
    pass


class UnsupportedTbConstruct(DesignError):
    pass


class SimulationError(AocError):
    exit_code = 3


class OscillationError(SimulationError):
    pass


class DeadlockError(SimulationError):
    pass


class TraceMismatch(SimulationError):
    def __init__(self, cycle: int, signal: str, expected: int, got: int):
        self.cycle = cycle
        self.signal = signal
        self.expected = expected
        self.got = got
        super().__init__(f"trace mismatch at cycle {cycle} on {signal}: expected {expected:#x}, got {got:#x}")


class ToolchainMissing(AocError):
    exit_code = 1
