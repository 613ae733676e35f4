"""Differential run over the random corpus: oracle vs gated vs full engine.

    python scripts/run_corpus.py --designs 200 --cycles 1000 [--threads 1 2 4] [--emit]
"""
import argparse
import sys
import time

from aocsim import corpus as C
from aocsim.emit import verify_emitted
from aocsim.errors import AocError
from aocsim.optimize import optimize
from aocsim.oracle import Oracle
from aocsim.runtime import run
from aocsim.runtime.engine import Engine


def engine_run(design, stim, cycles, **kw):
    e = Engine(design, **kw)
    try:
        return run(e, stim, cycles), e
    finally:
        e.close()


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--designs", type=int, default=200)
    ap.add_argument("--start", type=int, default=0, help="first generator seed")
    ap.add_argument("--cycles", type=int, default=1000)
    ap.add_argument("--threads", type=int, nargs="+", default=[1])
    ap.add_argument("--emit", action="store_true", help="also compile and check the emitted C model")
    args = ap.parse_args(argv)
    failures = 0
    start = time.perf_counter()
    for cd in C.corpus(args.designs, args.start):
        opt = optimize(cd.design)
        stim = cd.stimulus(args.cycles)
        problems = []
        try:
            ref = run(Oracle(cd.design), stim, args.cycles)
            full, fe = engine_run(opt, stim, args.cycles, gated=False, threads=1)
            if ref.first_mismatch(full):
                problems.append(f"full: {ref.first_mismatch(full)}")
            for t in args.threads:
                tr, ge = engine_run(opt, stim, args.cycles, threads=t, instrument=True)
                if ref.first_mismatch(tr):
                    problems.append(f"gated/{t}: {ref.first_mismatch(tr)}")
                if any(g > f for g, f in zip(ge.stats.per_cycle, fe.stats.per_cycle)):
                    problems.append(f"gated/{t}: more work than full mode")
                if ge.stats.max_wire_evals > 1:
                    problems.append(f"gated/{t}: wire evaluated {ge.stats.max_wire_evals} times in a pass")
            if args.emit:
                verify_emitted(opt, stim, args.cycles, ref)
        except AocError as exc:
            problems.append(f"{type(exc).__name__}: {exc}")
        status = "ok" if not problems else "FAIL"
        print(f"{cd.name:10s} {status:4s} regs={len(opt.registers):3d} elements={len(opt.elements):4d}"
              + "".join(f"\n    {p}" for p in problems))
        failures += bool(problems)
    print(f"{args.designs - failures}/{args.designs} designs agree ({time.perf_counter() - start:.1f}s)")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
