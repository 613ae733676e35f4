"""Execution parameters."""
from __future__ import annotations

import os
from dataclasses import dataclass, fields

from .errors import AocError


@dataclass
class ExecConfig:
    tdmax: int = os.cpu_count() or 1
    phmax: int = 32
    cw: int = 64
    timescale: str = "1ns"

    def __post_init__(self):
        if self.tdmax < 1:
            raise AocError("tdmax must be >= 1")
        if self.phmax < 0:
            raise AocError("phmax must be >= 0")
        if self.cw not in (32, 64):
            raise AocError("cw must be 32 or 64")

    @classmethod
    def from_file(cls, path: str, **overrides) -> "ExecConfig":
        """Read ``key=value`` lines; ``overrides`` that are not None win."""
        known = {f.name: f.type for f in fields(cls)}
        values = {}
        with open(path) as fh:
            for n, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                key, sep, val = (x.strip() for x in line.partition("="))
                if not sep or key not in known:
                    raise AocError(f"{path}:{n}: expected one of {sorted(known)} as key=value")
                try:
                    values[key] = val if key == "timescale" else int(val, 0)
                except ValueError:
                    raise AocError(f"{path}:{n}: {key} expects an integer, got {val!r}") from None
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)
