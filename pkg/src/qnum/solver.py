"""Augmented-Lagrangian solver for the utility-maximization program.

Minimize ``-sum_r U_r(R_r, w)`` subject to the per-link rate balance
``sum_{r through l} R_r = d_l (1 - w_l)`` and ``0 < w_l < 1``.

The balance equalities (normalized by ``d_l``) enter through multipliers
and a quadratic penalty; optional end-to-end fidelity floors enter as
``log w_floor - sum_l log w_l <= 0`` through the same mechanism applied to
their positive part. Each bound-constrained subproblem is solved by
projected gradient descent with monotone Armijo backtracking, using
alternating Barzilai-Borwein trial steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import DomainError, InfeasibleStartError, ValidationError
from .model import (
    NetworkSpec,
    SolutionVector,
    check_solution,
    e2e_werner,
    fidelity_to_werner,
    rate_coefficient,
    werner_to_fidelity,
)
from .utility import UtilityKind, aggregate_objective, margin_with_slope, route_utilities, utility_margin

# Initial end-to-end fidelity targets; comfortably inside each utility's domain.
_START_FIDELITY = {UtilityKind.DE: 0.9, UtilityKind.SKF: 0.9, UtilityKind.NGTV: 0.75}
_SCALE_FLOOR = 1e-4


@dataclass(frozen=True)
class SolverConfig:
    initial_penalty: float = 10.0
    penalty_growth: float = 10.0
    max_outer_iters: int = 30
    max_inner_iters: int = 5000
    residual_tol: float = 1e-8
    grad_tol: float = 1e-8
    armijo_c: float = 1e-4
    backtrack_factor: float = 0.5
    initial_step: float = 1.0
    interior_eps: float = 1e-9

    def __post_init__(self):
        checks = [
            ("initial_penalty", self.initial_penalty > 0),
            ("penalty_growth", self.penalty_growth > 1),
            ("max_outer_iters", int(self.max_outer_iters) >= 1),
            ("max_inner_iters", int(self.max_inner_iters) >= 1),
            ("residual_tol", self.residual_tol > 0),
            ("grad_tol", self.grad_tol > 0),
            ("armijo_c", 0 < self.armijo_c < 1),
            ("backtrack_factor", 0 < self.backtrack_factor < 1),
            ("initial_step", self.initial_step > 0),
            ("interior_eps", 0 < self.interior_eps < 0.5),
        ]
        for name, ok in checks:
            if not ok:
                raise ValidationError(f"invalid value {getattr(self, name)!r}", where=f"SolverConfig.{name}")


@dataclass
class SolveReport:
    """Outcome of :func:`solve` or :func:`grid_search_oracle`.

    ``max_residual`` is the largest rate-balance violation divided by the
    link's ``d_l`` (threshold violations included when floors are set).
    ``projected_gradient`` is measured in the solver's rescaled variables.
    """

    solution: SolutionVector
    objective: float
    per_route_utility: dict[str, float]
    e2e_fidelity: dict[str, float]
    max_residual: float
    outer_iters: int
    converged: bool
    projected_gradient: float = 0.0
    inner_iters: int = 0
    penalty: float = 0.0
    multipliers: dict[str, float] = field(default_factory=dict)
    threshold_multipliers: dict[str, float] = field(default_factory=dict)


# -- residuals, projection, start ----------------------------------------------

def constraint_residuals(spec: NetworkSpec, x: SolutionVector) -> dict[str, float]:
    """Signed balance residual ``sum_{r through l} R_r - d_l (1 - w_l)`` per link (Hz)."""
    check_solution(spec, x)
    out = {}
    for link in spec.links:
        load = math.fsum(x.rates[r.id] for r in spec.routes_using(link.id))
        out[link.id] = load - rate_coefficient(link) * (1.0 - x.werner[link.id])
    return out


def normalized_residuals(spec: NetworkSpec, x: SolutionVector) -> dict[str, float]:
    res = constraint_residuals(spec, x)
    return {lk.id: res[lk.id] / rate_coefficient(lk) for lk in spec.links}


def threshold_violations(spec: NetworkSpec, x: SolutionVector) -> dict[str, float]:
    """Positive part of ``log w_floor - log w_e2e`` for routes with a fidelity floor."""
    out = {}
    for rid, F in (spec.fidelity_thresholds or {}).items():
        we = e2e_werner(spec.route(rid), x)
        floor = fidelity_to_werner(F)
        out[rid] = max(0.0, math.log(floor) - math.log(we)) if we > 0 else math.inf
    return out


def max_violation(spec: NetworkSpec, x: SolutionVector) -> float:
    vals = [abs(v) for v in normalized_residuals(spec, x).values()]
    vals += list(threshold_violations(spec, x).values())
    return max(vals)


def project_box(x: SolutionVector, spec: NetworkSpec, eps: float) -> SolutionVector:
    """Clamp Werner parameters into ``[eps, 1 - eps]`` and rates into ``[eps, inf)``."""
    check_solution(spec, x)
    return SolutionVector(
        {k: max(float(v), eps) for k, v in x.rates.items()},
        {k: min(max(float(v), eps), 1.0 - eps) for k, v in x.werner.items()},
    )


def initialize(spec: NetworkSpec, kind, eps: float = 1e-9) -> SolutionVector:
    """Strictly feasible start.

    Every link gets ``w = t ** (1 / h_max)`` so the longest route sees the
    end-to-end target ``t``; each link's generation rate is split evenly
    across its routes and a route takes the smallest share along its path.
    """
    kind = UtilityKind.parse(kind)
    h_max = max(r.hops for r in spec.routes)
    target = float(fidelity_to_werner(_START_FIDELITY[kind]))

    needed = target
    for rid, F in (spec.fidelity_thresholds or {}).items():
        hops = spec.route(rid).hops
        floor = float(fidelity_to_werner(F))
        # route e2e is target ** (hops / h_max); keep it strictly above the floor
        req = floor ** (h_max / hops)
        if req >= needed:
            needed = 0.5 * (req + 1.0)
    w = needed ** (1.0 / h_max)
    if not (needed < 1.0 and eps <= w <= 1.0 - eps):
        raise InfeasibleStartError(
            f"fidelity floors demand link Werner parameters of {w:.12g}, outside [{eps}, 1 - {eps}]")

    werner = {lid: w for lid in spec.link_ids}
    rates = {}
    for r in spec.routes:
        shares = [rate_coefficient(spec.link(l)) * (1.0 - w) / len(spec.routes_using(l)) for l in r.links]
        rates[r.id] = max(min(shares), eps)
    x = SolutionVector(rates, werner)

    for r in spec.routes:
        if not utility_margin(kind, e2e_werner(r, x)) > 0:
            raise InfeasibleStartError(f"route {r.id!r}: start lies outside the {kind.value} utility domain")
    for rid, v in threshold_violations(spec, x).items():
        if v > 0:
            raise InfeasibleStartError(f"route {rid!r}: cannot meet its fidelity floor")
    return x


# -- compiled program ------------------------------------------------------------

class _Program:
    """Array form of the program; variables are ``x = [R (routes), w (links)]``."""

    def __init__(self, spec: NetworkSpec, kind: UtilityKind):
        self.spec = spec
        self.kind = kind
        self.route_ids = spec.route_ids
        self.link_ids = spec.link_ids
        self.nr, self.nl = len(self.route_ids), len(self.link_ids)
        pos = {lid: j for j, lid in enumerate(self.link_ids)}
        M = np.zeros((self.nr, self.nl))
        for i, r in enumerate(spec.routes):
            for lid in r.links:
                M[i, pos[lid]] = 1.0
        self.M = M
        self.d = np.array([rate_coefficient(lk) for lk in spec.links])
        # d(c_l)/dR_r for the normalized residual c_l = sum R / d_l - (1 - w_l)
        self.JR = M.T / self.d[:, None]
        # largest rate a route could get: its tightest link's even share at w = 0
        load = M.sum(axis=0)
        self.rate_scale = np.array([np.min(self.d[row > 0] / load[row > 0]) for row in M])

        thr = spec.fidelity_thresholds or {}
        self.thr_rows = np.array([i for i, rid in enumerate(self.route_ids) if rid in thr], dtype=int)
        self.thr_log = np.array([math.log(fidelity_to_werner(thr[self.route_ids[i]])) for i in self.thr_rows])

    def to_vector(self, x: SolutionVector) -> np.ndarray:
        return np.concatenate([[x.rates[k] for k in self.route_ids], [x.werner[k] for k in self.link_ids]])

    def to_solution(self, v: np.ndarray) -> SolutionVector:
        R, w = v[: self.nr], v[self.nr:]
        return SolutionVector({k: float(R[i]) for i, k in enumerate(self.route_ids)},
                              {k: float(w[j]) for j, k in enumerate(self.link_ids)})

    def evaluate(self, v: np.ndarray) -> _Point | None:
        """Cache every quantity of the merit function at ``v``; None outside the domain."""
        R, w = v[: self.nr], v[self.nr:]
        if np.any(R <= 0) or np.any(w <= 0) or np.any(w >= 1):
            return None
        logw = np.log(w)
        s = self.M @ logw
        we = np.exp(s)
        m, slope = margin_with_slope(self.kind, we)
        if np.any(~(m > 0)):
            return None
        f = -(math.fsum(np.log(R)) + math.fsum(np.log(m)))
        c = self.JR @ R - (1.0 - w)
        g = self.thr_log - s[self.thr_rows]
        return _Point(v, R, w, s, we, m, slope, f, c, g)

    def objective_gradient(self, p: _Point) -> np.ndarray:
        gR = -1.0 / p.R
        coef = p.slope / p.m * p.we                 # per route: (m'/m) * w_e2e
        gw = -(self.M.T @ coef) / p.w
        return np.concatenate([gR, gw])


@dataclass
class _Point:
    v: np.ndarray
    R: np.ndarray
    w: np.ndarray
    s: np.ndarray       # M @ log w
    we: np.ndarray
    m: np.ndarray
    slope: np.ndarray
    f: float
    c: np.ndarray       # normalized balance residuals
    g: np.ndarray       # threshold constraint values (<= 0 when met)


class _Merit:
    """Augmented Lagrangian at fixed multipliers, in rescaled variables.

    ``R = a * y_R`` and ``w = 1 - b * y_w`` with ``a``, ``b`` taken from a
    recent iterate; both maps are diagonal, so the box stays a box and
    projection stays a clamp.
    """

    def __init__(self, prog: _Program, lam, nu, mu, eps):
        self.prog, self.lam, self.nu, self.mu, self.eps = prog, lam, nu, mu, eps

    def rescale(self, p: _Point) -> None:
        # scales follow the iterate but never collapse onto a bound
        nr, eps = self.prog.nr, self.eps
        self.a = np.maximum(p.R, _SCALE_FLOOR * self.prog.rate_scale)
        self.b = np.maximum(1.0 - p.w, _SCALE_FLOOR)
        self.lo = np.concatenate([eps / self.a, eps / self.b])
        self.hi = np.concatenate([np.full(nr, np.inf), (1.0 - eps) / self.b])

    def needs_rescale(self, p: _Point) -> bool:
        ra = np.maximum(p.R, _SCALE_FLOOR * self.prog.rate_scale) / self.a
        rb = np.maximum(1.0 - p.w, _SCALE_FLOOR) / self.b
        ratios = np.concatenate([ra, rb])
        return bool(np.any(ratios > 10.0) or np.any(ratios < 0.1))

    def x_of(self, y):
        nr = self.prog.nr
        return np.concatenate([self.a * y[:nr], 1.0 - self.b * y[nr:]])

    def y_of(self, x):
        nr = self.prog.nr
        return np.concatenate([x[:nr] / self.a, (1.0 - x[nr:]) / self.b])

    def project(self, y):
        return np.minimum(np.maximum(y, self.lo), self.hi)

    def _ineq_part(self, p: _Point):
        return np.maximum(0.0, self.nu + self.mu * p.g)

    def value(self, p: _Point) -> float:
        q = self._ineq_part(p)
        return (p.f + float(self.lam @ p.c) + 0.5 * self.mu * float(p.c @ p.c)
                + float(q @ q - self.nu @ self.nu) / (2.0 * self.mu))

    def gradient_y(self, p: _Point) -> np.ndarray:
        prog = self.prog
        gx = prog.objective_gradient(p)
        weight = self.lam + self.mu * p.c
        gx[: prog.nr] += prog.JR.T @ weight
        gx[prog.nr:] += weight
        if prog.thr_rows.size:
            q = self._ineq_part(p)
            gx[prog.nr:] -= (prog.M[prog.thr_rows].T @ q) / p.w
        return np.concatenate([self.a * gx[: prog.nr], -self.b * gx[prog.nr:]])

    def change(self, old: _Point, new: _Point) -> float:
        """``value(new) - value(old)`` without cancellation against the level."""
        prog = self.prog
        dR = new.R - old.R
        dw = new.w - old.w
        dlogw = np.log1p(dw / old.w)
        ds = prog.M @ dlogw
        dwe = old.we * np.expm1(ds)
        dm = _margin_change(prog.kind, old, new, dwe)
        df = -(math.fsum(np.log1p(dR / old.R)) + math.fsum(np.log1p(dm / old.m)))

        dc = prog.JR @ dR + dw
        out = df + float(self.lam @ dc) + 0.5 * self.mu * float(dc @ (old.c + new.c))
        if prog.thr_rows.size:
            q_old, q_new = self._ineq_part(old), self._ineq_part(new)
            both = (q_old > 0) & (q_new > 0)
            dq = np.where(both, -self.mu * ds[prog.thr_rows], q_new - q_old)
            out += float(dq @ (q_new + q_old)) / (2.0 * self.mu)
        return out


def _margin_change(kind: UtilityKind, old: _Point, new: _Point, dwe: np.ndarray) -> np.ndarray:
    if kind is UtilityKind.NGTV:
        return 3.0 * dwe
    direct = new.m - old.m
    small = np.abs(dwe) < 1e-3
    if not np.any(small):
        return direct
    # Simpson's rule on the slope is far more accurate than m(new) - m(old) here
    _, mid_slope = margin_with_slope(kind, old.we + 0.5 * dwe)
    simpson = dwe * (old.slope + 4.0 * mid_slope + new.slope) / 6.0
    return np.where(small, simpson, direct)


def _pg_norm(merit: _Merit, y, gy) -> float:
    return float(np.max(np.abs(merit.project(y - gy) - y)))


def _descend(merit: _Merit, p: _Point, cfg: SolverConfig, tol: float):
    """Projected gradient descent with Armijo backtracking on the projection arc.

    The diagonal scaling is refreshed whenever the iterate drifts an order of
    magnitude away from it. Returns ``(point, pg_norm, iterations)``.
    """
    prog = merit.prog
    merit.rescale(p)
    y = merit.y_of(p.v)
    gy = merit.gradient_y(p)
    step = cfg.initial_step
    pg = _pg_norm(merit, y, gy)
    it = 0
    while it < cfg.max_inner_iters and pg > tol:
        t = step
        while True:
            y_new = merit.project(y - t * gy)
            if np.array_equal(y_new, y):
                return p, pg, it
            p_new = prog.evaluate(merit.x_of(y_new))
            if p_new is not None:
                decrease = merit.change(p, p_new)
                if decrease <= cfg.armijo_c * float(gy @ (y_new - y)):
                    break
            t *= cfg.backtrack_factor
        it += 1
        if merit.needs_rescale(p_new):
            merit.rescale(p_new)
            y, p, gy = merit.y_of(p_new.v), p_new, merit.gradient_y(p_new)
            step = cfg.initial_step
        else:
            g_new = merit.gradient_y(p_new)
            s, yk = y_new - y, g_new - gy
            sy = float(s @ yk)
            if sy > 0:
                # alternate the long and short Barzilai-Borwein steps
                step = float(s @ s) / sy if it % 2 else sy / float(yk @ yk)
            else:
                step = cfg.initial_step
            step = min(max(step, 1e-12), 1e12)
            y, p, gy = y_new, p_new, g_new
        pg = _pg_norm(merit, y, gy)
    return p, pg, it


def _report(spec, kind, prog: _Program, v, *, outer, converged, pg=0.0, inner=0, mu=0.0,
            lam=None, nu=None) -> SolveReport:
    x = prog.to_solution(v)
    utilities = route_utilities(spec, kind, x)
    return SolveReport(
        solution=x,
        objective=-math.fsum(utilities.values()),
        per_route_utility=utilities,
        e2e_fidelity={r.id: float(werner_to_fidelity(e2e_werner(r, x))) for r in spec.routes},
        max_residual=max_violation(spec, x),
        outer_iters=outer,
        converged=converged,
        projected_gradient=pg,
        inner_iters=inner,
        penalty=mu,
        multipliers={} if lam is None else {k: float(lam[j]) for j, k in enumerate(prog.link_ids)},
        threshold_multipliers={} if nu is None else
        {prog.route_ids[i]: float(nu[n]) for n, i in enumerate(prog.thr_rows)},
    )


def solve(spec: NetworkSpec, kind, config: SolverConfig | None = None, *,
          start: SolveReport | SolutionVector | None = None) -> SolveReport:
    """Maximize aggregate utility over rates and Werner parameters.

    ``start`` may be a previous report (warm start including multipliers
    and penalty) or a bare solution. Running out of iterations yields a
    report with ``converged=False`` rather than an exception.
    """
    kind = UtilityKind.parse(kind)
    cfg = config or SolverConfig()
    eps = cfg.interior_eps
    prog = _Program(spec, kind)

    lam = np.zeros(prog.nl)
    nu = np.zeros(prog.thr_rows.size)
    mu = cfg.initial_penalty
    if isinstance(start, SolveReport):
        x0 = start.solution
        if start.multipliers:
            lam = np.array([start.multipliers[k] for k in prog.link_ids])
        if start.threshold_multipliers:
            nu = np.array([start.threshold_multipliers[prog.route_ids[i]] for i in prog.thr_rows])
        mu = start.penalty or mu
    elif isinstance(start, SolutionVector):
        x0 = start
    else:
        x0 = initialize(spec, kind, eps)
    v = prog.to_vector(project_box(x0, spec, eps))
    p = prog.evaluate(v)
    if p is None:
        raise InfeasibleStartError("starting point lies outside the utility domain")

    def violation(p: _Point) -> float:
        return max(float(np.max(np.abs(p.c))), float(np.max(np.maximum(p.g, 0.0), initial=0.0)))

    best = None
    prev_viol = violation(p)
    total_inner = 0
    pg = math.inf
    for k in range(1, cfg.max_outer_iters + 1):
        merit = _Merit(prog, lam, nu, mu, eps)
        inner_tol = max(cfg.grad_tol, 1e-3 * 0.1 ** (k - 1))
        p, pg, its = _descend(merit, p, cfg, inner_tol)
        total_inner += its
        viol = violation(p)
        converged = viol <= cfg.residual_tol and pg <= cfg.grad_tol
        if best is None or viol <= best[1]:
            best = (p.v.copy(), viol, pg, lam.copy(), nu.copy(), mu)
        if converged:
            report = _report(spec, kind, prog, p.v, outer=k, converged=True, pg=pg, inner=total_inner,
                             mu=mu, lam=lam, nu=nu)
            # the report recomputes residuals from scratch; trust only that figure
            if report.max_residual <= cfg.residual_tol:
                return report
        lam = lam + mu * p.c
        nu = np.maximum(0.0, nu + mu * p.g)
        if viol > 0.25 * prev_viol:
            mu *= cfg.penalty_growth
        prev_viol = viol

    v_best, _, pg_best, lam_b, nu_b, mu_b = best
    return _report(spec, kind, prog, v_best, outer=cfg.max_outer_iters, converged=False, pg=pg_best,
                   inner=total_inner, mu=mu_b, lam=lam_b, nu=nu_b)


# -- grid-search oracle ------------------------------------------------------------

def grid_search_oracle(spec: NetworkSpec, kind, symmetry: Mapping[str, Sequence[str]] | Sequence[Sequence[str]],
                       resolution: int = 2000) -> SolveReport:
    """Brute-force optimum of a symmetric network.

    ``symmetry`` partitions the links into classes of identical links that
    every route meets in the same numbers. With all routes sharing one rate
    ``R``, each balance equality gives ``w_c = 1 - k_c R / d_c`` (``k_c``
    routes per link of class ``c``), so a single Werner value pins down the
    rest. The first class's Werner value is swept over ``resolution`` equal
    subintervals of its feasible range and the other classes follow from
    the equalities; every evaluated point satisfies them exactly. Grids for
    ``N`` and ``2N`` are nested, so refining never worsens the result.
    """
    kind = UtilityKind.parse(kind)
    if int(resolution) < 2:
        raise DomainError(f"resolution must be >= 2, got {resolution!r}")
    classes = [list(c) for c in (symmetry.values() if isinstance(symmetry, Mapping) else symmetry)]
    d, k, m = _symmetric_structure(spec, classes)
    n_routes = len(spec.routes)
    floors = [float(fidelity_to_werner(F)) for F in (spec.fidelity_thresholds or {}).values()]
    floor = max(floors, default=0.0)

    def expand(w0):
        w0 = np.asarray(w0, dtype=float)
        R = d[0] * (1.0 - w0) / k[0]
        ws = [1.0 - kc * R / dc for dc, kc in zip(d, k)]
        ws[0] = w0
        return R, ws

    def evaluate(w0):
        R, ws = expand(w0)
        ok = R > 0
        we = np.ones_like(R)
        for wc, mc in zip(ws, m):
            ok &= (wc > 0) & (wc < 1)
            we = we * np.where(ok, wc, 1.0) ** mc
        ok &= we > floor
        margin = np.where(ok, utility_margin(kind, np.clip(we, 0.0, 1.0)), -1.0)
        ok &= margin > 0
        with np.errstate(divide="ignore", invalid="ignore"):
            U = n_routes * (np.log(np.where(ok, R, 1.0)) + np.log(np.where(ok, margin, 1.0)))
        return np.where(ok, U, -np.inf)

    hi = 1.0 - 1e-12
    if not np.isfinite(evaluate(hi)):
        raise InfeasibleStartError("no feasible symmetric point exists")
    lo = 0.0
    if not np.isfinite(evaluate(lo)):
        a, b = lo, hi
        for _ in range(200):
            mid = 0.5 * (a + b)
            if np.isfinite(evaluate(mid)):
                b = mid
            else:
                a = mid
        lo = a

    N = int(resolution)
    grid = lo + (1.0 - lo) * np.arange(1, N) / N
    U = evaluate(grid)
    i = int(np.argmax(U))
    if not np.isfinite(U[i]):
        raise InfeasibleStartError("grid has no feasible point; increase the resolution")
    R, ws = expand(grid[i])
    werner = {}
    for cls, wc in zip(classes, ws):
        for lid in cls:
            werner[lid] = float(wc)
    x = SolutionVector({r.id: float(R) for r in spec.routes}, werner)
    utilities = route_utilities(spec, kind, x)
    return SolveReport(
        solution=x,
        objective=aggregate_objective(spec, kind, x),
        per_route_utility=utilities,
        e2e_fidelity={r.id: float(werner_to_fidelity(e2e_werner(r, x))) for r in spec.routes},
        max_residual=max_violation(spec, x),
        outer_iters=0,
        converged=True,
    )


def _symmetric_structure(spec: NetworkSpec, classes: list[list[str]]):
    ids = [lid for c in classes for lid in c]
    if sorted(ids) != sorted(spec.link_ids) or len(set(ids)) != len(ids):
        raise ValidationError("symmetry classes must partition the network's links", where="symmetry")
    d, k = [], []
    for c in classes:
        if not c:
            raise ValidationError("empty symmetry class", where="symmetry")
        first = spec.link(c[0])
        key = (first.length_km, first.repetition_time_s, first.inefficiency_c)
        loads = set()
        for lid in c:
            lk = spec.link(lid)
            if (lk.length_km, lk.repetition_time_s, lk.inefficiency_c) != key:
                raise ValidationError(f"link {lid!r} differs from {c[0]!r} within its class", where="symmetry")
            loads.add(len(spec.routes_using(lid)))
        if len(loads) != 1 or 0 in loads:
            raise ValidationError(f"links of class {c} carry unequal route counts", where="symmetry")
        d.append(rate_coefficient(first))
        k.append(loads.pop())
    member = {lid: i for i, c in enumerate(classes) for lid in c}
    counts = {tuple(sum(member[l] == i for l in r.links) for i in range(len(classes))) for r in spec.routes}
    if len(counts) != 1:
        raise ValidationError("routes are not symmetric under the given classes", where="symmetry")
    return np.array(d), np.array(k, dtype=float), np.array(counts.pop(), dtype=float)


# -- finite differences --------------------------------------------------------------

def finite_diff_gradient(f: Callable[[SolutionVector], float], x: SolutionVector,
                         h: float = 1e-6) -> SolutionVector:
    """Central-difference gradient of ``f`` at ``x``, one coordinate at a time."""
    if not h > 0:
        raise DomainError(f"step must be > 0, got {h!r}")

    def partial(group: str, key: str) -> float:
        plus, minus = x.copy(), x.copy()
        getattr(plus, group)[key] += h
        getattr(minus, group)[key] -= h
        try:
            return (f(plus) - f(minus)) / (2.0 * h)
        except DomainError as exc:
            raise DomainError(f"finite difference in {group}[{key!r}] left the domain: {exc}") from None

    return SolutionVector({k: partial("rates", k) for k in x.rates},
                          {k: partial("werner", k) for k in x.werner})
