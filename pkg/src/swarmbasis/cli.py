"""Command-line entry point.

Exit codes: 0 success, 1 usage or validation error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import design as design_mod
from .basis import BaType, approximate, cell_index
from .errors import ConfigError, SwarmError
from .scenario import (
    emit_concentrations_csv,
    emit_summary_json,
    emit_trace_csv,
    load_config,
    run_paper_example,
    run_scenario,
)

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="swarmbasis", description="Swarm computing with basis agents.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="simulate a scenario file")
    p.add_argument("config")
    p.add_argument("--out", help="output directory (default: <config stem>-out)")

    p = sub.add_parser("design", help="size a near-minimal swarm for accuracy epsilon")
    p.add_argument("config")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--segment", type=int, default=1, help="program segment whose target is sized (from 1)")
    p.add_argument("--samples", type=int, default=None, help="sample points per dimension")

    p = sub.add_parser("approx", help="evaluate the programmed expansion at a point")
    p.add_argument("config")
    p.add_argument("--at", required=True, help="comma-separated input vector u1,...,un")
    p.add_argument("--segment", type=int, default=1)

    p = sub.add_parser("paper-example", help="run the canned three-function experiment")
    p.add_argument("--input", choices=["ramp", "step"], default="step")
    p.add_argument("--dt", type=float, default=0.01)
    p.add_argument("--out", help="output directory (default: paper-example-<input>)")
    return parser


def _read_config(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config {path!r}: {exc.strerror}") from None
    return load_config(text)


def _segment(cfg, seg: int) -> int:
    if not 1 <= seg <= len(cfg.program_spec):
        raise UsageError(f"--segment must be in 1..{len(cfg.program_spec)}")
    return seg - 1


def _write_run(result, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "trace.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(emit_trace_csv(result.trace))
    with open(out / "concentrations.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(emit_concentrations_csv(result.maps))
    with open(out / "summary.json", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(emit_summary_json(result))


def _print_summary(result, out: Path) -> None:
    s = result.summary()
    print(f"rows: {s['rows']}")
    print(f"mae: {s['mae']!r} ({s['mae_percent_of_unit_scale']:.4g}% of unit scale)")
    print(f"max_abs_error: {s['max_abs_error']!r}")
    print(f"negative_v: {s['negative_v']}")
    print(f"wrote: {out}")


def cmd_simulate(args) -> int:
    cfg = _read_config(args.config)
    result = run_scenario(cfg)
    out = Path(args.out) if args.out else Path(f"{Path(args.config).stem}-out")
    _write_run(result, out)
    _print_summary(result, out)
    return EXIT_OK


def cmd_paper_example(args) -> int:
    if not args.dt > 0:
        raise UsageError("--dt must be positive")
    result = run_paper_example(args.input, args.dt)
    out = Path(args.out) if args.out else Path(f"paper-example-{args.input}")
    _write_run(result, out)
    _print_summary(result, out)
    return EXIT_OK


def cmd_approx(args) -> int:
    cfg = _read_config(args.config)
    j = _segment(cfg, args.segment)
    try:
        u = [float(x) for x in args.at.split(",")]
    except ValueError:
        raise UsageError(f"--at expects comma-separated numbers, got {args.at!r}") from None
    bcfg = cfg.basis_config()
    if len(u) != bcfg.partition.dims:
        raise UsageError(f"--at needs {bcfg.partition.dims} component(s), got {len(u)}")
    cmap = cfg.concentration_maps()[j]
    value = approximate(cmap, bcfg, u)
    cell = cell_index(bcfg.partition, u)
    active = [BaType(s, cell) for s in (1, -1) if cmap.get(BaType(s, cell)) > 0]
    print(f"value: {value!r}")
    print(f"active_type: {active[0].label() if active else 'none'}")
    return EXIT_OK


def cmd_design(args) -> int:
    cfg = _read_config(args.config)
    j = _segment(cfg, args.segment)
    if not args.epsilon > 0:
        raise UsageError("--epsilon must be positive")
    f = cfg.targets()[j]
    bounds = cfg.partition.bounds
    opts = cfg.design or {}
    samples = args.samples or opts.get("samples_per_dim")
    if "grad_norms" in opts:
        L = tuple(opts["grad_norms"])
        print(f"grad_norms (supplied): {list(L)}")
    else:
        L = design_mod.estimate_grad_norms(f, bounds, samples)
        print(f"grad_norms (sampled lower estimate): {list(L)}")
    problem = design_mod.DesignProblem(bounds, args.epsilon, L, opts.get("q_max"))
    solution = design_mod.near_minimal_types(problem)
    report = design_mod.verify_design(
        f, solution, bounds, samples, cfg.alpha, cfg.clearance, search_coarser=True
    )
    print(report.describe())
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "design": cmd_design,
    "approx": cmd_approx,
    "paper-example": cmd_paper_example,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_INVALID
    except ConfigError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (SwarmError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
