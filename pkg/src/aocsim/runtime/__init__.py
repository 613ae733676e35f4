from .harness import run
from .stimulus import ClockGen, Stimulus, parse_stimulus
from .trace import Trace

__all__ = ["ClockGen", "Stimulus", "Trace", "parse_stimulus", "run"]
