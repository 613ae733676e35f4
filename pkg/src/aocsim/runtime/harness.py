"""Cycle loop shared by every backend."""
from __future__ import annotations

from .stimulus import Stimulus
from .trace import Trace, TraceRecorder


def run(backend, stimulus: Stimulus, n_cycles: int, observe=None) -> Trace:
    """Drive ``backend`` through ``n_cycles`` and record observable values.

    A backend exposes ``design``, ``values`` (indexable by signal id),
    ``set_input(sid, value)`` and ``step()``.
    """
    design = backend.design
    resolved = stimulus.resolve(design)
    ids = None if observe is None else [design.lookup(n) for n in observe]
    rec = TraceRecorder(design, ids)
    boundary = getattr(backend, "cycle_boundary", None)
    rec.start(backend.values)
    values = backend.values
    set_input, step, sample = backend.set_input, backend.step, rec.sample
    per_cycle, clocks = resolved.per_cycle, resolved.clocks
    # same order as ResolvedStimulus.actions, unrolled for speed
    for c in range(n_cycles):
        if boundary is not None and c > 0:
            boundary()
        for s, v in per_cycle.get(c, ()):
            set_input(s, v)
        step()
        sample(c, values)
        for s, g in clocks:
            if g.pulses(c):
                set_input(s, 1)
                step()
                set_input(s, 0)
                step()
    if boundary is not None and n_cycles > 0:
        boundary()
    return rec.trace
