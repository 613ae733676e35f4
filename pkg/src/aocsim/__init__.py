"""Activity-dependent, ordered, cycle-accurate simulation of a Verilog subset."""
from .config import ExecConfig
from .elaborate import elaborate
from .errors import AocError
from .frontend import load_source, parse, parse_text
from .ir import FlatDesign, export_ir, load_ir
from .optimize import check_loops, optimize

__all__ = ["AocError", "ExecConfig", "FlatDesign", "check_loops", "elaborate", "export_ir",
           "load_ir", "load_source", "optimize", "parse", "parse_text"]
__version__ = "0.1.0"
