"""Command-line entry point: ``aoc check|sim|emit|dump``.

Exit status: 0 success, 1 usage error, 2 design error, 3 simulation error.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field

from .clocks import analyze
from .config import ExecConfig
from .elaborate import elaborate
from .errors import AocError, LoopError
from .frontend import parse
from .ir import FlatDesign, export_ir, load_ir
from .optimize import check_loops, optimize
from .partition import build_cdo, partition_pass, partition_report
from .runtime import ClockGen, Stimulus, parse_stimulus, run
from .runtime.vcd import dump_vcd
from .schedule import build_schedule

BACKENDS = ("aoc", "aoc-full", "oracle")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass
class CliConfig:
    command: str
    inputs: list[str]
    top: str | None
    cycles: int = 100
    exec: ExecConfig = field(default_factory=ExecConfig)
    vcd: str | None = None
    stimulus: str | None = None
    stats: bool = False
    backend: str = "aoc"
    tb: list[str] = field(default_factory=list)
    max_time: int | None = None
    out: str | None = None
    single_file: bool = False
    full: bool = False
    optimized: bool = False
    params: dict = field(default_factory=dict)
    dumps: dict = field(default_factory=dict)  # report kind -> path ("-" for stdout)


def _common(p):
    p.add_argument("inputs", nargs="+", help="Verilog sources or one IR JSON netlist")
    p.add_argument("-t", "--top", help="top module (the DUT top with --tb)")
    p.add_argument("-P", "--param", action="append", default=[], metavar="NAME=VALUE",
                   help="override a top-level parameter")
    p.add_argument("--threads", type=int, help="maximum partitions per pass (tdmax)")
    p.add_argument("--phmax", type=int, help="placeholder capacity per partition")
    p.add_argument("--cw", type=int, choices=(32, 64), help="machine word width")
    p.add_argument("--config", help="key=value file (tdmax, phmax, cw, timescale)")
    for kind in ("domains", "schedule", "partitions"):
        p.add_argument(f"--dump-{kind}", nargs="?", const="-", metavar="FILE",
                       help=f"write the {kind} report as JSON")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="aoc", description="Activity-dependent, ordered, cycle-accurate simulation of Verilog designs")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True
    p = sub.add_parser("check", help="elaborate, optimize and analyze a design")
    _common(p)
    p = sub.add_parser("sim", help="simulate a design")
    _common(p)
    p.add_argument("--cycles", type=int, default=100)
    p.add_argument("--stimulus", help="stimulus file: '<cycle> <signal> <value>' and 'clock <signal> <period>' lines")
    p.add_argument("--vcd", help="write a value change dump")
    p.add_argument("--stats", action="store_true", help="print activity statistics as JSON")
    p.add_argument("--backend", choices=BACKENDS, default="aoc")
    p.add_argument("--tb", action="append", default=[], help="testbench source (timing-accurate run)")
    p.add_argument("--max-time", type=int, help="stop a testbench run after this simulation time")
    p = sub.add_parser("emit", help="write the C model")
    _common(p)
    p.add_argument("--out", required=True, help="output .c path")
    p.add_argument("--single-file", action="store_true", help="no separate header")
    p.add_argument("--full", action="store_true", help="emit without activity gating")
    p = sub.add_parser("dump", help="write the flattened netlist as JSON")
    _common(p)
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--optimized", action="store_true", help="dump after optimization")
    return ap


def parse_args(argv) -> CliConfig:
    ns = build_parser().parse_args(argv)
    overrides = dict(tdmax=ns.threads, phmax=ns.phmax, cw=ns.cw)
    try:
        if ns.config:
            exec_cfg = ExecConfig.from_file(ns.config, **overrides)
        else:
            exec_cfg = ExecConfig(**{k: v for k, v in overrides.items() if v is not None})
    except OSError as exc:
        raise UsageError(str(exc)) from None
    except AocError as exc:
        raise UsageError(str(exc)) from None
    params = {}
    for item in ns.param:
        name, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"--param expects NAME=VALUE, got {item!r}")
        try:
            params[name] = int(value, 0)
        except ValueError:
            raise UsageError(f"--param {name}: {value!r} is not an integer") from None
    cfg = CliConfig(ns.command, ns.inputs, ns.top, exec=exec_cfg, params=params)
    cfg.dumps = {k: getattr(ns, f"dump_{k}") for k in ("domains", "schedule", "partitions")
                 if getattr(ns, f"dump_{k}") is not None}
    if ns.command == "sim":
        cfg.cycles, cfg.vcd, cfg.stimulus, cfg.stats = ns.cycles, ns.vcd, ns.stimulus, ns.stats
        cfg.backend, cfg.tb, cfg.max_time = ns.backend, ns.tb, ns.max_time
        if cfg.cycles < 0:
            raise UsageError("--cycles must be >= 0")
        if cfg.tb and cfg.stimulus:
            raise UsageError("--tb and --stimulus are mutually exclusive")
    if ns.command in ("emit", "dump"):
        cfg.out = ns.out
    if ns.command == "emit":
        cfg.single_file, cfg.full = ns.single_file, ns.full
    if ns.command == "dump":
        cfg.optimized = ns.optimized
    is_ir = len(cfg.inputs) == 1 and cfg.inputs[0].endswith(".json")
    if cfg.top is None and not is_ir:
        raise UsageError("--top is required for Verilog input")
    if is_ir and (cfg.params or cfg.tb):
        raise UsageError("--param and --tb need Verilog input")
    return cfg


def _read(path):
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def load_design(cfg: CliConfig, extra: list[str] = ()) -> tuple[FlatDesign, list]:
    if len(cfg.inputs) == 1 and cfg.inputs[0].endswith(".json"):
        return load_ir(_read(cfg.inputs[0])), []
    files = [(p, _read(p)) for p in list(cfg.inputs) + list(extra)]
    modules = parse(files)
    return elaborate(modules, cfg.top, cfg.params), modules


def _write(path: str, text: str):
    if path == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _reports(cfg: CliConfig, opt: FlatDesign):
    if not cfg.dumps:
        return
    analysis = analyze(opt)
    if "domains" in cfg.dumps:
        _write(cfg.dumps["domains"], json.dumps(analysis.report(opt), indent=2, sort_keys=True))
    sched = build_schedule(opt, analysis)
    if "schedule" in cfg.dumps:
        _write(cfg.dumps["schedule"], json.dumps(sched.report(opt), indent=2, sort_keys=True))
    if "partitions" in cfg.dumps:
        plans = [partition_pass(opt, osl, cfg.exec) for osl in sched.all_passes()]
        rep = partition_report(opt, plans, build_cdo(opt, analysis))
        _write(cfg.dumps["partitions"], json.dumps(rep, indent=2, sort_keys=True))


def _default_stimulus(design: FlatDesign) -> Stimulus:
    # an input named clk or clock toggles once per cycle when no stimulus is given
    clocks = []
    for sid in design.inputs:
        s = design.signals[sid]
        local = s.name[len(design.top) + 1:]
        if local in ("clk", "clock"):
            clocks.append(ClockGen(local, 1, 0))
    return Stimulus([], clocks)


def cmd_check(cfg: CliConfig) -> int:
    design, _ = load_design(cfg)
    check_loops(design)
    opt = optimize(design)
    analysis = analyze(opt)
    st, so = design.stats(), opt.stats()
    print(f"{design.top}: {len(design.signals)} signals, {st['elements']} elements, {st['registers']} registers; "
          f"optimized to {so['elements']} elements")
    for dom in analysis.domains:
        print(f"  domain {dom.id}: root {opt.signals[dom.root].name}, {len(dom.registers)} registers")
    _reports(cfg, opt)
    return 0


def cmd_sim(cfg: CliConfig) -> int:
    if cfg.tb:
        return _sim_tb(cfg)
    design, _ = load_design(cfg)
    check_loops(design)
    if cfg.stimulus:
        stim = parse_stimulus(_read(cfg.stimulus), cfg.stimulus)
    else:
        stim = _default_stimulus(design)
    opt = optimize(design)
    _reports(cfg, opt)
    backend = _backend(cfg, design, opt)
    try:
        trace = run(backend, stim, cfg.cycles)
    finally:
        close = getattr(backend, "close", None)
        if close:
            close()
    if cfg.vcd:
        dump_vcd(trace, cfg.vcd, top=design.top, timescale=cfg.exec.timescale)
    if cfg.stats:
        stats = getattr(backend, "stats", None)
        doc = {"backend": cfg.backend, "cycles": cfg.cycles}
        if stats is not None:
            doc.update(stats.as_dict())
        print(json.dumps(doc, sort_keys=True))
    return 0


def _backend(cfg: CliConfig, design: FlatDesign, opt: FlatDesign):
    from .oracle import Oracle
    from .runtime.engine import Engine

    if cfg.backend == "oracle":
        return Oracle(design)
    return Engine(opt, cfg.exec, gated=cfg.backend == "aoc")


def _sim_tb(cfg: CliConfig) -> int:
    from .testbench import run_testbench

    files = [(p, _read(p)) for p in list(cfg.inputs) + list(cfg.tb)]
    modules = parse(files)
    res = run_testbench(modules, cfg.top, cfg.backend, cfg.exec, cfg.max_time)
    if cfg.vcd:
        dump_vcd(res.trace, cfg.vcd, top=cfg.top, timescale=cfg.exec.timescale)
    if cfg.stats:
        print(json.dumps({"backend": cfg.backend, "status": res.status, "time": res.time}, sort_keys=True))
    return 0


def cmd_emit(cfg: CliConfig) -> int:
    from .emit import emit_files

    design, _ = load_design(cfg)
    check_loops(design)
    opt = optimize(design)
    _reports(cfg, opt)
    emit_files(opt, cfg.out, cfg.exec, gated=not cfg.full, single_file=cfg.single_file)
    return 0


def cmd_dump(cfg: CliConfig) -> int:
    design, _ = load_design(cfg)
    if cfg.optimized:
        check_loops(design)
        design = optimize(design)
    if cfg.dumps:
        _reports(cfg, design if cfg.optimized else optimize(design))
    _write(cfg.out or "-", export_ir(design))
    return 0


def main(argv=None) -> int:
    try:
        cfg = parse_args(sys.argv[1:] if argv is None else argv)
        if cfg.command == "check":
            return cmd_check(cfg)
        if cfg.command == "sim":
            return cmd_sim(cfg)
        if cfg.command == "emit":
            return cmd_emit(cfg)
        return cmd_dump(cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except LoopError as exc:
        print(f"error: {exc}", file=sys.stderr)
        for name in exc.cycle:
            print(f"  {name}", file=sys.stderr)
        return exc.exit_code
    except AocError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
