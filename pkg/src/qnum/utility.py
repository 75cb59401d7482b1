"""Route utilities built on three entanglement measures.

Every utility has the separable form ``ln R + ln m(w_e2e)`` where ``m`` is

* ``DE``   -- hashing yield ``D_H(F)`` of the end-to-end fidelity,
* ``SKF``  -- BB84 secret-key fraction ``1 - 2 h((1 - w) / 2)``,
* ``NGTV`` -- ``3 w - 1``, four times the Werner-state negativity.

The outer ``max(., 0)`` usually wrapped around D_H and the key fraction is
left out: the logarithm already restricts the domain to ``m > 0``, and the
signed values are useful for locating the thresholds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError, UtilityDomainError
from .model import NetworkSpec, SolutionVector, check_solution, e2e_werner, werner_to_fidelity

_LN2 = math.log(2.0)


class UtilityKind(str, Enum):
    DE = "DE"
    SKF = "SKF"
    NGTV = "NGTV"

    @classmethod
    def parse(cls, value) -> UtilityKind:
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().upper())
        except ValueError:
            raise DomainError(f"unknown utility {value!r}; expected one of de, skf, ngtv") from None


@dataclass(frozen=True)
class DomainMargin:
    """Why a utility is (or is not) finite at a point.

    ``margin`` is the quantity inside the logarithm besides the rate.
    """

    kind: UtilityKind
    margin: float
    rate_positive: bool

    @property
    def feasible(self) -> bool:
        return self.rate_positive and self.margin > 0


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def _xlog2x(x):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(x > 0, x * np.log2(np.where(x > 0, x, 1.0)), 0.0)


def binary_entropy(p):
    """Binary entropy in bits with ``0 log 0 = 0``."""
    arr = np.asarray(p, dtype=float)
    if np.any(~((arr >= 0) & (arr <= 1))):
        raise DomainError(f"probability must lie in [0, 1], got {p!r}")
    return _scalar(-_xlog2x(arr) - _xlog2x(1.0 - arr))


def hashing_yield(F):
    """Hashing-protocol yield ``1 + F log2 F + (1-F) log2((1-F)/3)``.

    Negative below F ~ 0.81; equals 1 at F = 1.
    """
    arr = np.asarray(F, dtype=float)
    if np.any(~((arr > 0) & (arr <= 1))):
        raise DomainError(f"fidelity must lie in (0, 1], got {F!r}")
    rest = 1.0 - arr
    return _scalar(1.0 + _xlog2x(arr) + _xlog2x(rest / 3.0) * 3.0)


def skf_bb84(w):
    """BB84 secret-key fraction ``1 - 2 h((1 - w) / 2)`` of a Werner state, sign kept."""
    arr = np.asarray(w, dtype=float)
    if np.any(~((arr >= 0) & (arr <= 1))):
        raise DomainError(f"Werner parameter must lie in [0, 1], got {w!r}")
    return _scalar(1.0 - 2.0 * np.asarray(binary_entropy((1.0 - arr) / 2.0)))


def negativity_werner(F):
    arr = np.asarray(F, dtype=float)
    if np.any(~((arr >= 0.5) & (arr <= 1))):
        raise DomainError(f"fidelity must lie in [1/2, 1], got {F!r}")
    return _scalar(arr - 0.5)


def utility_margin(kind, w_e2e):
    """The factor multiplying the rate inside a route's logarithm."""
    kind = UtilityKind.parse(kind)
    if kind is UtilityKind.DE:
        return hashing_yield(werner_to_fidelity(w_e2e))
    if kind is UtilityKind.SKF:
        return skf_bb84(w_e2e)
    arr = np.asarray(w_e2e, dtype=float)
    if np.any(~((arr >= 0) & (arr <= 1))):
        raise DomainError(f"Werner parameter must lie in [0, 1], got {w_e2e!r}")
    return _scalar(3.0 * arr - 1.0)


def margin_with_slope(kind: UtilityKind, w_e2e: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Margin and its derivative in ``w_e2e``, vectorized and unchecked.

    Meant for ``0 <= w_e2e < 1``; callers screen the domain themselves.
    """
    w = np.asarray(w_e2e, dtype=float)
    if kind is UtilityKind.NGTV:
        return 3.0 * w - 1.0, np.full_like(w, 3.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        if kind is UtilityKind.DE:
            F = (3.0 * w + 1.0) / 4.0
            m = 1.0 + _xlog2x(F) + 3.0 * _xlog2x((1.0 - F) / 3.0)
            # dD_H/dF = log2(3F / (1 - F)), dF/dw = 3/4
            slope = 0.75 * np.log2((3.0 * w + 1.0) / (1.0 - w))
        else:
            p = (1.0 - w) / 2.0
            m = 1.0 + 2.0 * (_xlog2x(p) + _xlog2x(1.0 - p))
            slope = np.log2((1.0 + w) / (1.0 - w))
    return m, slope


def domain_margin(kind, rate: float, w_e2e: float) -> DomainMargin:
    kind = UtilityKind.parse(kind)
    return DomainMargin(kind, float(utility_margin(kind, w_e2e)), bool(rate > 0))


def route_utility(kind, rate: float, w_e2e: float, *, route: str | None = None) -> float:
    """Natural-log utility ``ln(R * m(w_e2e))`` of one route.

    Raises :class:`UtilityDomainError` when ``R <= 0`` or ``m <= 0``.
    """
    dm = domain_margin(kind, rate, w_e2e)
    if not dm.feasible:
        what = "rate must be > 0" if not dm.rate_positive else f"{dm.kind.value} margin {dm.margin:.6g} <= 0"
        raise UtilityDomainError(f"utility undefined: {what}", margin=dm, route=route)
    return math.log(rate) + math.log(dm.margin)


def route_utilities(spec: NetworkSpec, kind, x: SolutionVector) -> dict[str, float]:
    check_solution(spec, x)
    return {r.id: route_utility(kind, x.rates[r.id], e2e_werner(r, x), route=r.id) for r in spec.routes}


def aggregate_objective(spec: NetworkSpec, kind, x: SolutionVector) -> float:
    """Negated aggregate utility ``-sum_r U_r``; the quantity the solver minimizes."""
    return -math.fsum(route_utilities(spec, kind, x).values())


def objective_gradient(spec: NetworkSpec, kind, x: SolutionVector) -> SolutionVector:
    """Analytic gradient of :func:`aggregate_objective`.

    ``d/dR_r = -1/R_r``; the Werner partial of link ``l`` collects
    ``-(m'/m) * w_e2e / w_l`` from every route through ``l``.
    """
    kind = UtilityKind.parse(kind)
    check_solution(spec, x)
    grad_w = {lid: 0.0 for lid in spec.link_ids}
    grad_r = {}
    for r in spec.routes:
        R = x.rates[r.id]
        we = e2e_werner(r, x)
        dm = domain_margin(kind, R, we)
        if not dm.feasible or we >= 1.0 or any(x.werner[l] <= 0 for l in r.links):
            raise UtilityDomainError("gradient needs a strictly interior point", margin=dm, route=r.id)
        m, slope = margin_with_slope(kind, np.array([we]))
        coef = float(slope[0] / m[0])
        grad_r[r.id] = -1.0 / R
        for lid in r.links:
            # product of the other factors; avoids dividing by w_l
            others = math.prod(x.werner[o] for o in r.links if o != lid)
            grad_w[lid] -= coef * others
    return SolutionVector(grad_r, grad_w)


def second_partial_w(kind, w: float) -> float:
    """Second derivative in ``w`` of the negated single-link DE or SKF utility.

    Independent of the rate. Negative values certify that the negated
    utility is not convex.
    """
    kind = UtilityKind.parse(kind)
    if kind is UtilityKind.NGTV:
        raise DomainError("closed-form second partial is only defined for DE and SKF")
    if not 0 <= w < 1:
        raise DomainError(f"w must lie in [0, 1), got {w!r}")
    if kind is UtilityKind.DE:
        D = hashing_yield(werner_to_fidelity(w))
        if D <= 0:
            raise UtilityDomainError(f"hashing yield {D:.6g} <= 0 at w={w}", margin=DomainMargin(kind, D, True))
        return ((3.0 / (4.0 * D)) * math.log2((3 * w + 1) / (1 - w))) ** 2 \
            - 3.0 / (D * _LN2 * (3 * w + 1) * (1 - w))
    S = skf_bb84(w)
    if S <= 0:
        raise UtilityDomainError(f"key fraction {S:.6g} <= 0 at w={w}", margin=DomainMargin(kind, S, True))
    return ((1.0 / S) * math.log2((1 + w) / (1 - w))) ** 2 - 2.0 / (S * _LN2 * (1 + w) * (1 - w))
