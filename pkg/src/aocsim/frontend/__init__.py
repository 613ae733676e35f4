"""Verilog subset frontend: tokenizer, parser, syntax tree and printer."""
from . import ast
from .parser import load_source, parse, parse_text
from .printer import source as prettyprint

__all__ = ["ast", "load_source", "parse", "parse_text", "prettyprint"]
