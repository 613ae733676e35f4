"""Regenerate the emitted-C golden snapshots in tests/golden/.

Run after an intentional change to the emitter, then review the diff.
"""
import os
import sys

from aocsim.corpus import NAMED
from aocsim.elaborate import elaborate
from aocsim.emit import emit_model
from aocsim.frontend import parse_text
from aocsim.optimize import optimize

out_dir = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "tests", "golden")


def main():
    os.makedirs(out_dir, exist_ok=True)
    for name, (src, top) in sorted(NAMED.items()):
        text = emit_model(optimize(elaborate(parse_text(src), top)))
        path = os.path.join(out_dir, f"{name}.c")
        with open(path, "w") as fh:
            fh.write(text)
        print(f"wrote {os.path.relpath(path)} ({len(text)} bytes)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
