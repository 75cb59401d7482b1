"""Numerical self-checks: second-partial anchors, gradients, NGTV concavity."""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from typing import Callable, TextIO

import numpy as np

from .model import NetworkSpec, SolutionVector, build_topology
from .solver import finite_diff_gradient
from .utility import UtilityKind, aggregate_objective, objective_gradient, second_partial_w

#: Networks the gradient suite samples on; any parameter works, the objective
#: only sees rates and Werner values.
GRADIENT_CASES = (("three_link", 50.0), ("clients_server", 4), ("line", 50.0), ("dumbbell", 8))

ANCHORS = ((UtilityKind.DE, 0.97, -3.19), (UtilityKind.SKF, 0.97, -2.34))


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    tolerance: float
    passed: bool

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name}: value={self.value:.6g} tolerance={self.tolerance:g}"


def to_vector(spec: NetworkSpec, x: SolutionVector) -> np.ndarray:
    return np.array([x.rates[k] for k in spec.route_ids] + [x.werner[k] for k in spec.link_ids])


def from_vector(spec: NetworkSpec, v) -> SolutionVector:
    nr = len(spec.routes)
    return SolutionVector({k: float(v[i]) for i, k in enumerate(spec.route_ids)},
                          {k: float(v[nr + j]) for j, k in enumerate(spec.link_ids)})


def random_interior_point(spec: NetworkSpec, rng: np.random.Generator, *, min_e2e_werner: float,
                          rate_range=(0.5, 50.0), max_werner: float = 0.99) -> SolutionVector:
    """Random point whose every route has ``w_e2e >= min_e2e_werner``.

    Each link's Werner value is drawn from ``[t ** (1/h), max_werner]`` with
    ``h`` the longest route's hop count; rates are log-uniform.
    """
    h = max(r.hops for r in spec.routes)
    lo = min_e2e_werner ** (1.0 / h)
    w = rng.uniform(lo, max_werner, size=len(spec.links))
    R = np.exp(rng.uniform(math.log(rate_range[0]), math.log(rate_range[1]), size=len(spec.routes)))
    return from_vector(spec, np.concatenate([R, w]))


def relative_error(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300))


def check_anchors() -> list[CheckResult]:
    out = []
    for kind, w, expected in ANCHORS:
        value = second_partial_w(kind, w)
        out.append(CheckResult(f"second partial {kind.value} at w={w} (expect {expected})",
                               value, 0.01, abs(value - expected) <= 0.01))
    return out


def gradient_errors(topology: str, parameter, n_points: int = 100, seed: int = 0,
                    h: float = 1e-6) -> np.ndarray:
    """Relative error of :func:`objective_gradient` against central differences.

    Every sampled point is checked under all three utilities; returns the
    worst of the three per point.
    """
    spec = build_topology(topology, parameter)
    rng = np.random.default_rng(seed)
    errors = np.empty(n_points)
    for i in range(n_points):
        # w_e2e >= 0.82 (F ~ 0.865) keeps every margin comfortably positive
        x = random_interior_point(spec, rng, min_e2e_werner=0.82)
        worst = 0.0
        for kind in UtilityKind:
            analytic = to_vector(spec, objective_gradient(spec, kind, x))
            numeric = to_vector(spec, finite_diff_gradient(lambda y: aggregate_objective(spec, kind, y), x, h))
            worst = max(worst, relative_error(analytic, numeric))
        errors[i] = worst
    return errors


def check_gradients(n_points: int = 100, seed: int = 0, tol: float = 1e-6) -> list[CheckResult]:
    out = []
    for topology, parameter in GRADIENT_CASES:
        err = float(np.max(gradient_errors(topology, parameter, n_points, seed)))
        out.append(CheckResult(f"gradient vs finite differences, {topology} ({n_points} points)",
                               err, tol, err <= tol))
    return out


def _ngtv_sample(spec: NetworkSpec, rng: np.random.Generator, margin: float = 1e-3) -> np.ndarray:
    """Uniform draw from the NGTV domain (every route ``3 w_e2e - 1 > margin``), rates log-uniform."""
    nr = len(spec.routes)
    while True:
        w = rng.uniform(0.0, 1.0, size=len(spec.links))
        x = from_vector(spec, np.concatenate([np.ones(nr), w]))
        if all(3.0 * math.prod(x.werner[l] for l in r.links) - 1.0 > margin for r in spec.routes):
            R = np.exp(rng.uniform(math.log(1e-2), math.log(1e2), size=nr))
            return np.concatenate([R, w])


def midpoint_gaps(n_samples: int = 1000, seed: int = 1) -> np.ndarray:
    """``U(mid) - (U(x) + U(y)) / 2`` for random pairs on a three-link, one-route network.

    Concavity means every gap is >= 0.
    """
    spec = build_topology("line", 50.0)
    rng = np.random.default_rng(seed)

    def U(v):
        return -aggregate_objective(spec, UtilityKind.NGTV, from_vector(spec, v))

    gaps = np.empty(n_samples)
    for i in range(n_samples):
        a, b = _ngtv_sample(spec, rng), _ngtv_sample(spec, rng)
        gaps[i] = U(0.5 * (a + b)) - 0.5 * (U(a) + U(b))
    return gaps


def numeric_hessian(grad: Callable[[np.ndarray], np.ndarray], v: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """Symmetrized central-difference Jacobian of ``grad``, steps relative to ``|v_i|``."""
    n = v.size
    H = np.empty((n, n))
    for i in range(n):
        step = h * max(1.0, abs(v[i]))
        e = np.zeros(n)
        e[i] = step
        H[:, i] = (grad(v + e) - grad(v - e)) / (2.0 * step)
    return 0.5 * (H + H.T)


def hessian_min_eigenvalues(n_points: int = 100, seed: int = 2) -> np.ndarray:
    """Smallest Hessian eigenvalue of the negated NGTV objective at random interior points.

    Points are spread over the four benchmark networks and kept a little
    away from the domain boundary, where the curvature blows up.
    """
    rng = np.random.default_rng(seed)
    out = np.empty(n_points)
    for i in range(n_points):
        topology, parameter = GRADIENT_CASES[i % len(GRADIENT_CASES)]
        spec = build_topology(topology, parameter)
        v = _ngtv_sample(spec, rng, margin=0.05)

        def grad(u):
            return to_vector(spec, objective_gradient(spec, UtilityKind.NGTV, from_vector(spec, u)))

        out[i] = float(np.min(np.linalg.eigvalsh(numeric_hessian(grad, v))))
    return out


def check_ngtv_concavity(n_samples: int = 1000, n_hessians: int = 100) -> list[CheckResult]:
    gaps = midpoint_gaps(n_samples)
    worst = float(np.min(gaps))
    passed = int(np.sum(gaps >= -1e-9))
    eig = float(np.min(hessian_min_eigenvalues(n_hessians)))
    return [
        CheckResult(f"NGTV midpoint concavity ({passed}/{n_samples} pass), worst gap", worst, 1e-9,
                    passed == n_samples),
        CheckResult(f"NGTV negated-utility Hessian ({n_hessians} points), min eigenvalue", eig, 1e-6,
                    eig >= -1e-6),
    ]


def run_checks(stream: TextIO | None = None) -> tuple[bool, list[CheckResult]]:
    """Run every suite, print one line per check, and report whether all passed."""
    stream = sys.stdout if stream is None else stream
    results = []
    for suite in (check_anchors, check_gradients, check_ngtv_concavity):
        for res in suite():
            print(res.line(), file=stream, flush=True)
            results.append(res)
    ok = all(r.passed for r in results)
    print(f"{sum(r.passed for r in results)}/{len(results)} checks passed", file=stream)
    return ok, results
