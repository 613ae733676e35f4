"""Tokenizer for the supported Verilog subset."""
from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import Loc, UnsupportedConstruct, VerilogSyntaxError

KEYWORDS = {
    "module", "endmodule", "input", "output", "inout", "wire", "reg", "integer",
    "parameter", "localparam", "assign", "always", "initial", "begin", "end",
    "if", "else", "case", "casez", "casex", "endcase", "default", "posedge",
    "negedge", "or", "function", "endfunction", "forever", "repeat", "generate",
    "endgenerate", "genvar", "for", "while", "task", "endtask", "signed", "tri",
    "fork", "join", "wait",
}

# Longest operators first.
OPERATORS = [
    "<<<", ">>>", "===", "!==", "+:", "-:",
    "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "~&", "~|", "~^", "^~", "**",
    "+", "-", "*", "/", "%", "&", "|", "^", "~", "!", "<", ">", "=", "?", ":",
    ";", ",", ".", "(", ")", "[", "]", "{", "}", "#", "@",
]

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\f\v]+)
  | (?P<nl>\n)
  | (?P<lcomment>//[^\n]*)
  | (?P<bcomment>/\*.*?\*/)
  | (?P<directive>`[A-Za-z_]\w*[^\n]*)
  | (?P<based>(?:\d[\d_]*\s*)?'[sS]?[bBoOdDhH]\s*[0-9a-fA-FxXzZ?_]+)
  | (?P<number>\d[\d_]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<sysid>\$[A-Za-z_]\w*)
  | (?P<ident>[A-Za-z_][\w$]*)
  | (?P<escaped>\\\S+)
  | (?P<op>"""
    + "|".join(re.escape(o) for o in OPERATORS)
    + r""")
    """,
    re.VERBOSE | re.DOTALL,
)


@dataclass
class Token:
    kind: str  # ident, keyword, number, string, sysid, op, eof
    text: str
    loc: Loc
    value: int | None = None
    width: int | None = None


def _parse_based(text: str, loc: Loc) -> tuple[int, int | None]:
    text = text.replace(" ", "").replace("\t", "")
    size, rest = text.split("'", 1)
    if rest[0] in "sS":
        rest = rest[1:]
    base = {"b": 2, "o": 8, "d": 10, "h": 16}[rest[0].lower()]
    digits = rest[1:].replace("_", "")
    if any(c in "xXzZ?" for c in digits):
        raise UnsupportedConstruct("x/z literal", loc, "only 2-value logic is simulated")
    try:
        value = int(digits, base)
    except ValueError:
        raise VerilogSyntaxError(f"malformed number {text!r}", loc) from None
    width = int(size.replace("_", "")) if size else None
    if width is not None:
        if width < 1:
            raise VerilogSyntaxError(f"zero-width literal {text!r}", loc)
        value &= (1 << width) - 1
    return value, width


def tokenize(text: str, filename: str = "<input>") -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        loc = Loc(filename, line, pos - line_start + 1)
        if m is None:
            raise VerilogSyntaxError(f"unexpected character {text[pos]!r}", loc)
        kind = m.lastgroup
        tok = m.group()
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "bcomment":
            nls = tok.count("\n")
            if nls:
                line += nls
                line_start = pos + tok.rfind("\n") + 1
        elif kind == "directive":
            if not tok.startswith("`timescale"):
                raise UnsupportedConstruct("compiler directive", loc, tok.split()[0])
        elif kind == "based":
            value, width = _parse_based(tok, loc)
            tokens.append(Token("number", tok, loc, value, width))
        elif kind == "number":
            tokens.append(Token("number", tok, loc, int(tok.replace("_", "")), None))
        elif kind == "string":
            tokens.append(Token("string", tok[1:-1], loc))
        elif kind == "sysid":
            tokens.append(Token("sysid", tok, loc))
        elif kind == "ident":
            tokens.append(Token("keyword" if tok in KEYWORDS else "ident", tok, loc))
        elif kind == "escaped":
            raise UnsupportedConstruct("escaped identifier", loc)
        elif kind == "op":
            tokens.append(Token("op", tok, loc))
        pos = m.end()
    tokens.append(Token("eof", "", Loc(filename, line, pos - line_start + 1)))
    return tokens
