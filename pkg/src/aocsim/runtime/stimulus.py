"""Cycle stimulus: input assignments plus periodic clock generators."""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from .. import ops
from ..errors import AocError, SchemaError
from ..ir import FlatDesign


@dataclass(frozen=True)
class ClockGen:
    signal: str
    period: int
    phase: int = 0

    def pulses(self, cycle: int) -> bool:
        return cycle >= self.phase and (cycle - self.phase) % self.period == 0


@dataclass
class Stimulus:
    events: list[tuple[int, str, int]] = field(default_factory=list)
    clocks: list[ClockGen] = field(default_factory=list)

    def __post_init__(self):
        self.events.sort(key=lambda ev: ev[0])

    def by_cycle(self) -> dict[int, list[tuple[str, int]]]:
        out: dict[int, list[tuple[str, int]]] = {}
        for c, name, v in self.events:
            out.setdefault(c, []).append((name, v))
        return out

    def resolve(self, design: FlatDesign) -> "ResolvedStimulus":
        """Bind names to input ids of ``design``."""
        cache: dict[str, int] = {}

        def sid(name):
            if name in cache:
                return cache[name]
            try:
                s = design.lookup(name)
            except KeyError:
                raise SchemaError(f"stimulus:{name}", "no such signal") from None
            if design.signals[s].kind != "input":
                raise SchemaError(f"stimulus:{name}", "not a design input")
            cache[name] = s
            return s
        per = {}
        for c, items in self.by_cycle().items():
            per[c] = [(sid(n), v & ops.mask(design.signals[sid(n)].width)) for n, v in items]
        return ResolvedStimulus(per, [(sid(g.signal), g) for g in self.clocks])

    def to_text(self) -> str:
        lines = [f"clock {g.signal} {g.period} {g.phase}" for g in self.clocks]
        lines += [f"{c} {n} {v:#x}" for c, n, v in self.events]
        return "\n".join(lines) + "\n"

    @classmethod
    def random(cls, design: FlatDesign, cycles: int, seed: int, clock_names=None,
               density: float = 0.3) -> "Stimulus":
        """Random data inputs each cycle; ``clock_names`` get period-1 generators."""
        rng = random.Random(seed)
        clock_names = list(clock_names or [])
        clock_ids = {design.lookup(n) for n in clock_names}
        data = [s for s in sorted(design.inputs) if s not in clock_ids]
        events = []
        for c in range(cycles):
            for s in data:
                if c == 0 or rng.random() < density:
                    events.append((c, design.signals[s].name, rng.getrandbits(design.signals[s].width)))
        return cls(events, [ClockGen(n, 1, 0) for n in clock_names])


@dataclass
class ResolvedStimulus:
    per_cycle: dict[int, list[tuple[int, int]]]
    clocks: list[tuple[int, ClockGen]]

    def actions(self, cycles: int):
        """Yield ('cycle', c) / ('set', sid, v) / ('step',) / ('sample', c) in harness order."""
        for c in range(cycles):
            yield ("cycle", c)
            for s, v in self.per_cycle.get(c, ()):
                yield ("set", s, v)
            yield ("step",)
            yield ("sample", c)
            for s, g in self.clocks:
                if g.pulses(c):
                    yield ("set", s, 1)
                    yield ("step",)
                    yield ("set", s, 0)
                    yield ("step",)


def parse_stimulus(text: str, source: str = "<stimulus>") -> Stimulus:
    events, clocks = [], []
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "clock":
                if len(parts) not in (3, 4):
                    raise ValueError("expected: clock <signal> <period> [phase]")
                period = int(parts[2], 0)
                phase = int(parts[3], 0) if len(parts) == 4 else 0
                if period < 1 or phase < 0:
                    raise ValueError("period must be >= 1 and phase >= 0")
                clocks.append(ClockGen(parts[1], period, phase))
            else:
                if len(parts) != 3:
                    raise ValueError("expected: <cycle> <signal> <value>")
                c, v = int(parts[0], 0), int(parts[2], 0)
                if c < 0 or v < 0:
                    raise ValueError("cycle and value must be non-negative")
                events.append((c, parts[1], v))
        except ValueError as exc:
            raise AocError(f"{source}:{n}: {exc}") from None
    return Stimulus(events, clocks)
