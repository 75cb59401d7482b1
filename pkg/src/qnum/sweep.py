"""Parameter sweeps over the benchmark networks, persisted as CSV."""

from __future__ import annotations

import csv
import io
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .errors import DomainError, ValidationError
from .model import build_topology, normalize_topology, symmetry_classes, werner_to_fidelity
from .solver import SolveReport, SolverConfig, solve
from .utility import UtilityKind

#: Sweep ranges used when none are given on the command line.
DEFAULT_PARAMS = {
    "three_link": "2,10:180:10",
    "clients_server": "1:12:1",
    "line": "5,25:300:25",
    "dumbbell": "2:48:2",
}

_INTEGER_TOPOLOGIES = ("clients_server", "dumbbell")


def parse_params(text: str, topology: str | None = None) -> list[float | int]:
    """Parse ``start:stop:step`` (stop included) or a comma list of values and ranges.

    Values are returned as ints for the user-count topologies.
    """
    values: list[float] = []
    for item in str(text).split(","):
        item = item.strip()
        if not item:
            raise ValidationError(f"empty entry in {text!r}", where="--params")
        parts = item.split(":")
        try:
            nums = [float(p) for p in parts]
        except ValueError:
            raise ValidationError(f"not a number in {item!r}", where="--params") from None
        if not all(math.isfinite(v) for v in nums):
            raise ValidationError(f"non-finite value in {item!r}", where="--params")
        if len(nums) == 1:
            values.append(nums[0])
        elif len(nums) == 3:
            start, stop, step = nums
            if not step > 0 or stop < start:
                raise ValidationError(f"range {item!r} needs step > 0 and stop >= start", where="--params")
            count = math.floor((stop - start) / step + 1e-9)
            values.extend(start + i * step for i in range(count + 1))
        else:
            raise ValidationError(f"expected start:stop:step, got {item!r}", where="--params")
    if topology is not None and normalize_topology(topology) in _INTEGER_TOPOLOGIES:
        out = []
        for v in values:
            if v != int(v):
                raise ValidationError(f"user count must be an integer, got {v!r}", where="--params")
            out.append(int(v))
        return out
    return values


@dataclass(frozen=True)
class SweepSpec:
    topology: str
    parameter_values: tuple
    utilities: tuple[UtilityKind, ...] = (UtilityKind.DE, UtilityKind.SKF, UtilityKind.NGTV)
    solver_config: SolverConfig = field(default_factory=SolverConfig)
    output_path: str | Path | None = None
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "topology", normalize_topology(self.topology))
        object.__setattr__(self, "parameter_values", tuple(self.parameter_values))
        kinds = tuple(UtilityKind.parse(u) for u in self.utilities)
        if not self.parameter_values:
            raise ValidationError("parameter list is empty", where="SweepSpec.parameter_values")
        if not kinds or len(set(kinds)) != len(kinds):
            raise ValidationError("need a nonempty set of distinct utilities", where="SweepSpec.utilities")
        object.__setattr__(self, "utilities", kinds)
        if int(self.workers) < 1:
            raise ValidationError(f"workers must be >= 1, got {self.workers!r}", where="SweepSpec.workers")
        for p in self.parameter_values:
            try:
                build_topology(self.topology, p)
            except DomainError as exc:
                raise ValidationError(str(exc), where="SweepSpec.parameter_values") from None


@dataclass
class SweepRow:
    """One solved instance. ``fidelity`` maps each link class to its link fidelity."""

    topology: str
    parameter: float
    utility_kind: str
    aggregate_utility: float
    fidelity: dict[str, float]
    rate_hz: float
    e2e_fidelity: float
    max_residual: float
    converged: bool
    report: SolveReport | None = field(default=None, repr=False, compare=False)


def _mean(values) -> float:
    values = list(values)
    return math.fsum(values) / len(values)


def solve_instance(topology: str, parameter, kind, config: SolverConfig) -> SweepRow:
    spec = build_topology(topology, parameter)
    kind = UtilityKind.parse(kind)
    report = solve(spec, kind, config)
    x = report.solution
    # routes and links within a class are interchangeable, so their values collapse to a mean
    fid = {name: _mean(werner_to_fidelity(x.werner[l]) for l in ids)
           for name, ids in symmetry_classes(topology, spec).items()}
    return SweepRow(
        topology=normalize_topology(topology),
        parameter=parameter,
        utility_kind=kind.value,
        aggregate_utility=-report.objective,
        fidelity=fid,
        rate_hz=_mean(x.rates.values()),
        e2e_fidelity=_mean(report.e2e_fidelity.values()),
        max_residual=report.max_residual,
        converged=report.converged,
        report=report,
    )


def _solve_job(args):
    return solve_instance(*args)


def run_sweep(spec: SweepSpec) -> list[SweepRow]:
    """Solve every (utility, parameter) pair; write the CSV if ``output_path`` is set.

    Rows come back ordered by utility (in the order given) and then by
    parameter, whatever order the workers finish in.
    """
    jobs = [(spec.topology, p, k, spec.solver_config) for k in spec.utilities for p in spec.parameter_values]
    if spec.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=int(spec.workers)) as pool:
            rows = list(pool.map(_solve_job, jobs))
    else:
        rows = [_solve_job(j) for j in jobs]
    if spec.output_path is not None:
        write_csv(rows, spec.output_path)
    return rows


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        return value
    return f"{value:.12g}"


def csv_header(rows: Sequence[SweepRow]) -> list[str]:
    classes = list(rows[0].fidelity) if rows else []
    return (["topology", "parameter", "utility_kind", "aggregate_utility"]
            + [f"fidelity_{c}" for c in classes]
            + ["rate_hz", "e2e_fidelity", "max_residual", "converged"])


def rows_to_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(csv_header(rows))
    for r in rows:
        writer.writerow([_fmt(v) for v in (r.topology, r.parameter, r.utility_kind, r.aggregate_utility,
                                           *r.fidelity.values(), r.rate_hz, r.e2e_fidelity,
                                           r.max_residual, r.converged)])
    return buf.getvalue()


def write_csv(rows: Sequence[SweepRow], path: str | Path) -> None:
    """Write atomically: a temp file in the target directory, then a rename."""
    path = Path(path)
    data = rows_to_csv(rows).encode("utf-8")
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise
