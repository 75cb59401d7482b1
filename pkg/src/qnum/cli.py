"""Command-line front end: ``qnum sweep | solve | check | export``.

Exit codes: 0 success, 1 validation or domain error (including an
infeasible start), 2 I/O error, 3 self-checks failed.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import warnings

from .checks import run_checks
from .errors import InfeasibleStartError, QnumError
from .model import TOPOLOGIES, build_topology, dump_spec, load_spec, normalize_topology, warn_if_unphysical
from .solver import SolveReport, SolverConfig, solve
from .sweep import DEFAULT_PARAMS, SweepSpec, parse_params, run_sweep
from .utility import UtilityKind

EXIT_OK, EXIT_INVALID, EXIT_IO, EXIT_CHECKS = 0, 1, 2, 3

_TOPOLOGY_CHOICES = list(dict.fromkeys([t.replace("_", "-") for t in TOPOLOGIES] + list(TOPOLOGIES)))


class _Parser(argparse.ArgumentParser):
    # usage errors are validation errors; exit code 2 is reserved for I/O
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INVALID)


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("solver")
    for f in dataclasses.fields(SolverConfig):
        flag = "--" + f.name.replace("_", "-")
        typ = int if f.type in ("int", int) else float
        g.add_argument(flag, dest=f.name, type=typ, default=None, metavar=typ.__name__.upper(),
                       help=f"default {f.default}")


def _solver_config(args) -> SolverConfig:
    overrides = {f.name: getattr(args, f.name) for f in dataclasses.fields(SolverConfig)
                 if getattr(args, f.name, None) is not None}
    return SolverConfig(**overrides)


def report_to_dict(report: SolveReport) -> dict:
    return {
        "converged": report.converged,
        "objective": report.objective,
        "aggregate_utility": -report.objective,
        "max_residual": report.max_residual,
        "projected_gradient": report.projected_gradient,
        "outer_iters": report.outer_iters,
        "inner_iters": report.inner_iters,
        "solution": {"rates_hz": report.solution.rates, "werner": report.solution.werner},
        "per_route_utility": report.per_route_utility,
        "e2e_fidelity": report.e2e_fidelity,
        "penalty": report.penalty,
        "multipliers": report.multipliers,
        "threshold_multipliers": report.threshold_multipliers,
    }


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qnum", description="Utility-maximizing rate and fidelity allocation "
                                              "for entanglement distribution networks.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sw = sub.add_parser("sweep", help="solve a benchmark network over a parameter range, write CSV")
    sw.add_argument("--topology", required=True, choices=_TOPOLOGY_CHOICES)
    sw.add_argument("--utility", default="all", type=str.lower, choices=["de", "skf", "ngtv", "all"])
    sw.add_argument("--params", default=None,
                    help="start:stop:step (stop included) or a comma list; defaults: "
                         + "; ".join(f"{k} {v}" for k, v in DEFAULT_PARAMS.items()))
    sw.add_argument("--out", required=True, help="CSV output path")
    sw.add_argument("--workers", type=int, default=1, help="parallel worker processes (default 1)")
    _add_solver_flags(sw)

    so = sub.add_parser("solve", help="solve a network described in JSON; print the report as JSON")
    so.add_argument("--config", required=True, help="network JSON file")
    so.add_argument("--utility", required=True, type=str.lower, choices=["de", "skf", "ngtv"])
    _add_solver_flags(so)

    sub.add_parser("check", help="run the numerical self-checks")

    ex = sub.add_parser("export", help="write a benchmark network as JSON")
    ex.add_argument("--topology", required=True, choices=_TOPOLOGY_CHOICES)
    ex.add_argument("--param", required=True, help="link length (km) or user count")
    ex.add_argument("--out", required=True)
    return parser


def _cmd_sweep(args) -> int:
    topology = normalize_topology(args.topology)
    values = parse_params(args.params or DEFAULT_PARAMS[topology], topology)
    kinds = list(UtilityKind) if args.utility == "all" else [UtilityKind.parse(args.utility)]
    spec = SweepSpec(topology, values, tuple(kinds), _solver_config(args), args.out, args.workers)
    rows = run_sweep(spec)
    failed = sum(not r.converged for r in rows)
    print(f"wrote {len(rows)} rows to {args.out}" + (f" ({failed} not converged)" if failed else ""),
          file=sys.stderr)
    return EXIT_OK


def _cmd_solve(args) -> int:
    spec = load_spec(args.config)
    report = solve(spec, args.utility, _solver_config(args))
    warn_if_unphysical(spec, report.solution)
    json.dump(report_to_dict(report), sys.stdout, indent=2)
    sys.stdout.write("\n")
    return EXIT_OK


def _cmd_check(args) -> int:
    ok, _ = run_checks(sys.stdout)
    return EXIT_OK if ok else EXIT_CHECKS


def _cmd_export(args) -> int:
    topology = normalize_topology(args.topology)
    value = parse_params(args.param, topology)
    if len(value) != 1:
        raise QnumError("--param takes a single value")
    dump_spec(build_topology(topology, value[0]), args.out)
    return EXIT_OK


_COMMANDS = {"sweep": _cmd_sweep, "solve": _cmd_solve, "check": _cmd_check, "export": _cmd_export}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    warnings.simplefilter("default")
    try:
        return _COMMANDS[args.command](args)
    except InfeasibleStartError as exc:
        print(f"qnum: infeasible start: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except QnumError as exc:
        print(f"qnum: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"qnum: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
