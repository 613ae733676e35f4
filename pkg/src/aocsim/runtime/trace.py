"""Per-cycle value traces of observable signals."""
from __future__ import annotations

from dataclasses import dataclass, field
from operator import itemgetter

from ..errors import TraceMismatch


@dataclass
class Trace:
    names: list[str]
    widths: dict[str, int]
    initial: dict[str, int]
    changes: list[tuple[int, str, int]] = field(default_factory=list)
    cycles: int = 0
    scopes: dict[str, tuple] = field(default_factory=dict)
    times: list[int] | None = None  # sparse sample stamps (testbench runs); default 0..cycles-1

    def stamps(self):
        return self.times if self.times is not None else range(self.cycles)

    def samples(self):
        """Yield (stamp, full value dict) for every sample."""
        cur = dict(self.initial)
        k = 0
        for c in self.stamps():
            while k < len(self.changes) and self.changes[k][0] <= c:
                _, n, v = self.changes[k]
                cur[n] = v
                k += 1
            yield c, dict(cur)

    def values_at(self, stamp: int) -> dict[str, int]:
        for c, vals in self.samples():
            if c == stamp:
                return vals
        raise IndexError(stamp)

    def first_mismatch(self, other: "Trace", names=None):
        """(cycle, signal, mine, theirs) of the first divergence, else None."""
        names = sorted(names if names is not None else set(self.names) & set(other.names))
        for n in names:
            if self.initial.get(n) != other.initial.get(n):
                return (-1, n, self.initial.get(n), other.initial.get(n))
        if list(self.stamps()) != list(other.stamps()):
            return (min(self.cycles, other.cycles), "<stamps>", self.cycles, other.cycles)
        for (c, a), (_, b) in zip(self.samples(), other.samples()):
            for n in names:
                if a[n] != b[n]:
                    return (c, n, a[n], b[n])
        return None

    def assert_equal(self, other: "Trace", names=None):
        mm = self.first_mismatch(other, names)
        if mm is not None:
            raise TraceMismatch(*mm)


class TraceRecorder:
    def __init__(self, design, ids=None):
        self.ids = list(ids if ids is not None else design.observables())
        self.names = [design.signals[s].name for s in self.ids]
        self.widths = {design.signals[s].name: design.signals[s].width for s in self.ids}
        self.scopes = {design.signals[s].name: design.signals[s].scope for s in self.ids}
        self.trace = None
        self.last: tuple = ()
        self._get = (lambda values: tuple(values[s] for s in self.ids)) if len(self.ids) < 2 \
            else itemgetter(*self.ids)

    def start(self, values):
        self.last = self._get(values)
        self.trace = Trace(self.names, self.widths, dict(zip(self.names, self.last)), scopes=self.scopes)

    def sample(self, stamp, values):
        t = self.trace
        cur = self._get(values)
        if cur != self.last:
            names = self.names
            for k, (a, b) in enumerate(zip(cur, self.last)):
                if a != b:
                    t.changes.append((stamp, names[k], a))
            self.last = cur
        t.cycles = stamp + 1
