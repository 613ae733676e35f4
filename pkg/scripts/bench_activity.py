"""Gated vs full evaluation on independent enabled subsystems, one active per cycle.

    python scripts/bench_activity.py --cycles 1000000 --slices 16 --depth 16 --width 32
"""
import argparse
import gc
import sys
import time

from aocsim import corpus as C
from aocsim.elaborate import elaborate
from aocsim.frontend import parse_text
from aocsim.optimize import optimize
from aocsim.runtime import run
from aocsim.runtime.engine import Engine


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cycles", type=int, default=100_000)
    ap.add_argument("--slices", type=int, default=16)
    ap.add_argument("--depth", type=int, default=16)
    ap.add_argument("--width", type=int, default=32)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args(argv)
    design = optimize(elaborate(parse_text(C.slices_v(args.slices, args.width, args.depth)), "slices"))
    stim = C.slices_stimulus(args.slices, args.cycles)
    print(f"{len(design.elements)} elements, {len(design.registers)} registers, {args.cycles} cycles")
    result = {}
    for gated in (True, False):
        e = Engine(design, gated=gated, threads=args.threads)
        gc.collect()
        gc.disable()
        try:
            t = time.perf_counter()
            run(e, stim, args.cycles)
            dt = time.perf_counter() - t
        finally:
            gc.enable()
            e.close()
        result[gated] = (e.stats.elements, dt)
        print(f"{'gated' if gated else 'full ':5s} elements={e.stats.elements:12d} time={dt:8.2f}s")
    print(f"element ratio {result[True][0] / result[False][0]:.3f}, "
          f"wall-clock ratio {result[True][1] / result[False][1]:.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
