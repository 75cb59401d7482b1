"""Acceptance criteria, one test (or parametrized family) per criterion.

Each criterion records a PASS/FAIL line; ``conftest.py`` prints them at the
end of the run, and ``python tests/test_acceptance.py`` prints them directly.
"""

from __future__ import annotations

import time
from functools import lru_cache

import numpy as np
import pytest

from qnum.checks import check_anchors, check_gradients, check_ngtv_concavity
from qnum.model import build_topology, symmetry_classes
from qnum.solver import grid_search_oracle, solve
from qnum.sweep import DEFAULT_PARAMS, SweepSpec, parse_params, run_sweep
from qnum.utility import UtilityKind

KINDS = list(UtilityKind)
ORACLE_CASES = [("three_link", 2), ("three_link", 50), ("three_link", 120),
                ("clients_server", 1), ("clients_server", 4), ("clients_server", 8)]
SWEEP_PARAMS = {
    "three_link": DEFAULT_PARAMS["three_link"],   # 2..180 km
    "clients_server": "1:12:1",
    "dumbbell": DEFAULT_PARAMS["dumbbell"],       # 2..48 users
}

RESULTS: dict[int, list[tuple[str, bool, str]]] = {}


def record(criterion: int, label: str, ok: bool, detail: str) -> None:
    RESULTS.setdefault(criterion, []).append((label, bool(ok), detail))


def summary_lines() -> list[str]:
    out = []
    for c in sorted(RESULTS):
        parts = RESULTS[c]
        status = "PASS" if all(ok for _, ok, _ in parts) else "FAIL"
        detail = "; ".join(f"{label}: {'ok' if ok else 'FAIL'} ({d})" for label, ok, d in parts)
        out.append(f"criterion {c}: {status} -- {detail}")
    return out


@lru_cache(maxsize=None)
def sweep(topology: str):
    rows = run_sweep(SweepSpec(topology, parse_params(SWEEP_PARAMS[topology], topology)))
    return {k.value: [r for r in rows if r.utility_kind == k.value] for k in KINDS}


@lru_cache(maxsize=None)
def oracle_runs():
    t0 = time.perf_counter()
    out = []
    for topo, param in ORACLE_CASES:
        spec = build_topology(topo, param)
        rep = solve(spec, UtilityKind.NGTV)
        orc = grid_search_oracle(spec, UtilityKind.NGTV, symmetry_classes(topo, spec), 2000)
        out.append((topo, param, rep, orc))
    return out, time.perf_counter() - t0


# -- 1 ------------------------------------------------------------------------------------

def test_criterion_1_second_partial_anchors():
    t0 = time.perf_counter()
    results = check_anchors()
    elapsed = time.perf_counter() - t0
    for r in results:
        record(1, r.name, r.passed, f"{r.value:.5f}")
    record(1, "runtime < 1 s", elapsed < 1.0, f"{elapsed:.3f} s")
    assert all(r.passed for r in results) and elapsed < 1.0


# -- 2 ------------------------------------------------------------------------------------

def test_criterion_2_gradient_oracle():
    t0 = time.perf_counter()
    results = check_gradients(n_points=100, tol=1e-6)
    elapsed = time.perf_counter() - t0
    for r in results:
        record(2, r.name, r.passed, f"max rel err {r.value:.2e}")
    record(2, "runtime < 10 s", elapsed < 10.0, f"{elapsed:.2f} s")
    assert all(r.passed for r in results) and elapsed < 10.0


# -- 3 ------------------------------------------------------------------------------------

def test_criterion_3_ngtv_concavity():
    t0 = time.perf_counter()
    results = check_ngtv_concavity(n_samples=1000, n_hessians=100)
    elapsed = time.perf_counter() - t0
    for r in results:
        record(3, r.name, r.passed, f"{r.value:.3g}")
    record(3, "runtime < 30 s", elapsed < 30.0, f"{elapsed:.2f} s")
    assert all(r.passed for r in results) and elapsed < 30.0


# -- 4 ------------------------------------------------------------------------------------

def test_criterion_4_oracle_equivalence():
    runs, elapsed = oracle_runs()
    ok_all = True
    for topo, param, rep, orc in runs:
        rel = abs(rep.objective - orc.objective) / abs(orc.objective)
        ok = rep.converged and rel <= 1e-3 and rep.max_residual <= 1e-6
        ok_all &= ok
        record(4, f"{topo}({param})", ok, f"rel {rel:.1e}, residual {rep.max_residual:.1e}")
    record(4, "runtime < 2 min", elapsed < 120.0, f"{elapsed:.1f} s")
    assert ok_all and elapsed < 120.0


# -- 5 ------------------------------------------------------------------------------------

FLOORS = {"DE": (0.81, "≥"), "SKF": (0.84 - 0.005, "≥"), "NGTV": (0.5, ">")}


@pytest.mark.parametrize("kind", [k.value for k in KINDS])
def test_criterion_5_domain_enforcement(kind):
    floor, op = FLOORS[kind]
    fids = []
    for topo in SWEEP_PARAMS:
        fids += [F for r in sweep(topo)[kind] if r.converged for F in r.report.e2e_fidelity.values()]
    worst = min(fids)
    ok = worst >= floor if op == "≥" else worst > floor
    record(5, kind, ok, f"min e2e fidelity {worst:.4f} over {len(fids)} routes, need {op} {floor:g}")
    assert ok


# -- 6 ------------------------------------------------------------------------------------

def test_criterion_6a_link3_fidelity_lowest():
    bad = [(k, r.parameter) for k, rows in sweep("three_link").items() for r in rows
           if r.converged and r.fidelity["long"] > r.fidelity["short"]]
    record(6, "(a) link-3 fidelity <= link-1/2", not bad, f"violations {bad}" if bad else "all points")
    assert not bad


@pytest.mark.parametrize("kind", [k.value for k in KINDS])
def test_criterion_6b_utility_decreasing(kind):
    rows = sweep("three_link")[kind]
    u = np.array([r.aggregate_utility for r in rows])
    ok = all(r.converged for r in rows) and bool(np.all(np.diff(u) < 0))
    record(6, f"(b) {kind} utility decreasing", ok, f"{u[0]:.3f} -> {u[-1]:.3f} over {len(u)} points")
    assert ok


def test_criterion_6c_ngtv_rates_and_fidelity():
    rows = sweep("three_link")
    bad = []
    for i, n in enumerate(rows["NGTV"]):
        for other in ("DE", "SKF"):
            o = rows[other][i]
            if not (n.rate_hz > o.rate_hz and n.e2e_fidelity < o.e2e_fidelity):
                bad.append((other, n.parameter))
    record(6, "(c) NGTV rate higher, e2e fidelity lower", not bad, f"violations {bad}" if bad else "all points")
    assert not bad


# -- 7 and 8 ------------------------------------------------------------------------------

def _crossover(rows):
    first, last = rows[0], rows[-1]
    ok = (first.fidelity["backbone"] > first.fidelity["metro"]
          and last.fidelity["backbone"] < last.fidelity["metro"])
    detail = (f"n={first.parameter}: Bb {first.fidelity['backbone']:.4f} vs M {first.fidelity['metro']:.4f}; "
              f"n={last.parameter}: Bb {last.fidelity['backbone']:.4f} vs M {last.fidelity['metro']:.4f}")
    return ok, detail


def _threshold(rows):
    u = np.array([r.aggregate_utility for r in rows])
    k = int(np.argmax(u))
    rising = bool(np.all(np.diff(u[: k + 1]) > 0))
    falling = bool(np.all(np.diff(u[k:]) < 0))
    ok = 0 < k < len(u) - 1 and rising and falling
    return ok, f"peak at n*={rows[k].parameter} (range {rows[0].parameter}..{rows[-1].parameter})"


@pytest.mark.parametrize("kind", [k.value for k in KINDS])
def test_criterion_7_crossover(kind):
    ok, detail = _crossover(sweep("clients_server")[kind])
    record(7, f"{kind} crossover", ok, detail)
    assert ok


@pytest.mark.parametrize("kind", [k.value for k in KINDS])
def test_criterion_7_utility_threshold(kind):
    ok, detail = _threshold(sweep("clients_server")[kind])
    record(7, f"{kind} utility rises then falls", ok, detail)
    assert ok


@pytest.mark.parametrize("kind", [k.value for k in KINDS])
def test_criterion_8_dumbbell_crossover(kind):
    ok, detail = _crossover(sweep("dumbbell")[kind])
    record(8, f"{kind} crossover", ok, detail)
    assert ok


@pytest.mark.parametrize("kind", [k.value for k in KINDS])
def test_criterion_8_dumbbell_threshold(kind):
    ok, detail = _threshold(sweep("dumbbell")[kind])
    record(8, f"{kind} utility rises then falls", ok, detail)
    assert ok


# -- 9 ------------------------------------------------------------------------------------

def test_criterion_9_determinism_and_box(tmp_path):
    blobs = []
    for attempt in range(2):
        parts = []
        for topo in ("three_link", "clients_server"):
            params = [p for t, p in ORACLE_CASES if t == topo]
            path = tmp_path / f"{topo}_{attempt}.csv"
            run_sweep(SweepSpec(topo, params, (UtilityKind.NGTV,), output_path=path))
            parts.append(path.read_bytes())
        blobs.append(b"".join(parts))
    identical = blobs[0] == blobs[1]
    record(9, "byte-identical CSV", identical, f"{len(blobs[0])} bytes")

    reports = [rep for _, _, rep, _ in oracle_runs()[0]]
    reports += [r.report for topo in SWEEP_PARAMS for rows in sweep(topo).values() for r in rows]
    inside = all(0.0 < w < 1.0 for rep in reports for w in rep.solution.werner.values()) and \
        all(R > 0.0 for rep in reports for R in rep.solution.rates.values())
    record(9, "box constraints strict", inside, f"{len(reports)} reports")
    assert identical and inside


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
