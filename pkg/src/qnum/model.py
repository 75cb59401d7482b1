"""Physical-layer model for single-photon entanglement generation.

Links generate Werner states; a route's end-to-end Werner parameter is the
product of its links' parameters after entanglement swapping. Rates are in
Hz (repetition times are in seconds), lengths in km.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import ConsistencyError, DomainError, ValidationError

#: Fiber attenuation in dB/km.
ATTENUATION_DB_PER_KM = 0.2

TOPOLOGIES = ("three_link", "clients_server", "line", "dumbbell")


def _as_float_or_array(x):
    arr = np.asarray(x, dtype=float)
    return arr if arr.ndim else float(arr)


def transmissivity(length_km):
    """Photon survival probability through ``length_km`` of fiber.

    >>> transmissivity(100.0)
    0.01
    """
    L = np.asarray(length_km, dtype=float)
    if np.any(L < 0) or np.any(np.isnan(L)):
        raise DomainError(f"fiber length must be >= 0, got {length_km!r}")
    return _as_float_or_array(10.0 ** (-0.1 * ATTENUATION_DB_PER_KM * L))


@dataclass(frozen=True)
class Link:
    """One elementary link.

    ``repetition_time_s`` is the time between generation attempts and
    ``inefficiency_c`` scales the success probability for non-fiber losses.
    """

    id: str
    length_km: float
    repetition_time_s: float
    inefficiency_c: float = 1.0

    def __post_init__(self):
        if not (self.length_km >= 0 and math.isfinite(self.length_km)):
            raise ValidationError(f"length_km must be a finite number >= 0, got {self.length_km!r}",
                                  where=f"link {self.id!r}")
        if not (self.repetition_time_s > 0 and math.isfinite(self.repetition_time_s)):
            raise ValidationError(f"T_s must be > 0, got {self.repetition_time_s!r}",
                                  where=f"link {self.id!r}")
        if not 0 < self.inefficiency_c <= 1:
            raise ValidationError(f"c must lie in (0, 1], got {self.inefficiency_c!r}",
                                  where=f"link {self.id!r}")

    @property
    def rate_coefficient(self) -> float:
        return rate_coefficient(self)


@dataclass(frozen=True)
class Route:
    """A communication session: the ordered links joining two users."""

    id: str
    links: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "links", tuple(self.links))
        if not self.links:
            raise ValidationError("a route needs at least one link", where=f"route {self.id!r}")
        if len(set(self.links)) != len(self.links):
            raise ValidationError(f"route visits a link twice: {list(self.links)}",
                                  where=f"route {self.id!r}")

    @property
    def hops(self) -> int:
        return len(self.links)


@dataclass(frozen=True)
class NetworkSpec:
    """Links, the routes served over them, and optional fidelity floors.

    Links and routes keep their insertion order; that order fixes the
    variable layout used by the solver and the JSON export.
    """

    links: tuple[Link, ...]
    routes: tuple[Route, ...]
    fidelity_thresholds: Mapping[str, float] | None = None
    _link_index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "links", tuple(self.links))
        object.__setattr__(self, "routes", tuple(self.routes))
        if not self.links:
            raise ValidationError("network has no links", where="links")
        if not self.routes:
            raise ValidationError("network has no routes", where="routes")

        index = {}
        for i, link in enumerate(self.links):
            if link.id in index:
                raise ValidationError(f"duplicate link id {link.id!r}", where=f"links[{i}]")
            index[link.id] = link
        object.__setattr__(self, "_link_index", index)

        seen = set()
        for i, route in enumerate(self.routes):
            if route.id in seen:
                raise ValidationError(f"duplicate route id {route.id!r}", where=f"routes[{i}]")
            seen.add(route.id)
            for lid in route.links:
                if lid not in index:
                    raise ValidationError(f"unknown link id {lid!r}", where=f"routes[{i}].links")

        if self.fidelity_thresholds is not None:
            thresholds = dict(self.fidelity_thresholds)
            for rid, F in thresholds.items():
                if rid not in seen:
                    raise ValidationError(f"threshold for unknown route id {rid!r}",
                                          where="fidelity_thresholds")
                if not 0.5 <= F <= 1:
                    raise ValidationError(f"threshold fidelity must lie in [1/2, 1], got {F!r}",
                                          where=f"fidelity_thresholds[{rid!r}]")
            object.__setattr__(self, "fidelity_thresholds", thresholds or None)

        used = {lid for r in self.routes for lid in r.links}
        unused = [lk.id for lk in self.links if lk.id not in used]
        if unused:
            warnings.warn(f"links not used by any route: {unused}", stacklevel=3)

    @property
    def link_ids(self) -> list[str]:
        return [lk.id for lk in self.links]

    @property
    def route_ids(self) -> list[str]:
        return [r.id for r in self.routes]

    def link(self, link_id: str) -> Link:
        return self._link_index[link_id]

    def route(self, route_id: str) -> Route:
        for r in self.routes:
            if r.id == route_id:
                return r
        raise KeyError(route_id)

    def routes_using(self, link_id: str) -> list[Route]:
        return [r for r in self.routes if link_id in r.links]


@dataclass
class SolutionVector:
    """Decision variables: a rate per route and a Werner parameter per link.

    Also used for gradients, so the bounds are not enforced here; see
    :func:`check_solution`.
    """

    rates: dict[str, float]
    werner: dict[str, float]

    def copy(self) -> SolutionVector:
        return SolutionVector(dict(self.rates), dict(self.werner))


def check_solution(spec: NetworkSpec, x: SolutionVector) -> None:
    """Raise :class:`ConsistencyError` unless ``x``'s keys match ``spec``."""
    if set(x.rates) != set(spec.route_ids):
        raise ConsistencyError(f"rate keys {sorted(x.rates)} do not match routes {sorted(spec.route_ids)}")
    if set(x.werner) != set(spec.link_ids):
        raise ConsistencyError(f"werner keys {sorted(x.werner)} do not match links {sorted(spec.link_ids)}")


def rate_coefficient(link: Link, *, midpoint: bool = True) -> float:
    """Return ``d = 3 c eta / (2 T)`` in Hz; generation rate is ``d (1 - w)``.

    ``eta`` is the transmissivity from a link end to the heralding station.
    With ``midpoint=True`` (default) that station sits halfway along the
    link, so the loss is taken over ``length_km / 2``; ``midpoint=False``
    charges the full link length instead.
    """
    span = link.length_km / 2 if midpoint else link.length_km
    return 3.0 * link.inefficiency_c * transmissivity(span) / (2.0 * link.repetition_time_s)


def _check_werner(w):
    arr = np.asarray(w, dtype=float)
    if np.any(~((arr >= 0) & (arr <= 1))):
        raise DomainError(f"Werner parameter must lie in [0, 1], got {w!r}")
    return arr


def link_generation_rate(link: Link, w, *, midpoint: bool = True):
    """Entanglement generation rate ``d (1 - w)`` of ``link`` in Hz."""
    arr = _check_werner(w)
    return _as_float_or_array(rate_coefficient(link, midpoint=midpoint) * (1.0 - arr))


def werner_to_fidelity(w):
    return _as_float_or_array((3.0 * _check_werner(w) + 1.0) / 4.0)


def fidelity_to_werner(F):
    arr = np.asarray(F, dtype=float)
    if np.any(~((arr >= 0.25) & (arr <= 1))):
        raise DomainError(f"fidelity must lie in [1/4, 1], got {F!r}")
    return _as_float_or_array((4.0 * arr - 1.0) / 3.0)


def bright_state_population(w):
    """Bright-state population ``alpha = 1 - F(w)`` that yields Werner parameter ``w``."""
    return _as_float_or_array(0.75 * (1.0 - _check_werner(w)))


def success_probability(link: Link, w, *, midpoint: bool = True):
    """Per-attempt heralding probability ``2 c eta alpha``."""
    span = link.length_km / 2 if midpoint else link.length_km
    alpha = bright_state_population(w)
    return _as_float_or_array(2.0 * link.inefficiency_c * transmissivity(span) * np.asarray(alpha))


def warn_if_unphysical(spec: NetworkSpec, x: SolutionVector, *, midpoint: bool = True) -> list[str]:
    """Warn about links whose implied success probability exceeds one.

    Returns the offending link ids.
    """
    bad = [lk.id for lk in spec.links if success_probability(lk, x.werner[lk.id], midpoint=midpoint) > 1]
    if bad:
        warnings.warn(f"success probability above 1 on links {bad}", stacklevel=2)
    return bad


def e2e_werner(route: Route, solution: SolutionVector | Mapping[str, float]) -> float:
    """Werner parameter delivered to ``route`` after swapping: the product over its links."""
    werner = solution.werner if isinstance(solution, SolutionVector) else solution
    prod = 1.0
    for lid in route.links:
        try:
            prod *= werner[lid]
        except KeyError:
            raise ConsistencyError(f"solution has no Werner parameter for link {lid!r} "
                                   f"of route {route.id!r}") from None
    return prod


# -- topologies ---------------------------------------------------------------

def normalize_topology(kind: str) -> str:
    key = kind.strip().lower().replace("-", "_")
    if key not in TOPOLOGIES:
        raise DomainError(f"unknown topology {kind!r}; expected one of {', '.join(TOPOLOGIES)}")
    return key


def _positive_int(parameter, what: str) -> int:
    if isinstance(parameter, bool) or float(parameter) != int(parameter) or int(parameter) < 1:
        raise DomainError(f"{what} must be a positive integer, got {parameter!r}")
    return int(parameter)


def build_topology(kind: str, parameter) -> NetworkSpec:
    """Build one of the four benchmark networks.

    =============== ======================= ==============================
    kind            parameter               routes
    =============== ======================= ==============================
    three_link      length of link l3 (km)  (l1, l3), (l2, l3)
    clients_server  number of users n       (m_i, bb) for i = 1..n
    line            middle length (km)      (l1, l2, l3)
    dumbbell        number of users n, even (a_i, bb, b_i) for i = 1..n/2
    =============== ======================= ==============================
    """
    kind = normalize_topology(kind)
    if kind == "three_link":
        L = float(parameter)
        if not L > 0:
            raise DomainError(f"link-3 length must be > 0, got {parameter!r}")
        links = [Link("l1", 2.0, 1e-3, 1.0), Link("l2", 2.0, 1e-3, 1.0), Link("l3", L, 1e-3, 1.0)]
        routes = [Route("r1", ("l1", "l3")), Route("r2", ("l2", "l3"))]
    elif kind == "clients_server":
        n = _positive_int(parameter, "user count")
        links = [Link(f"m{i}", 15.0, 1e-3, 0.1) for i in range(1, n + 1)]
        links.append(Link("bb", 100.0, 1e-4, 0.1))
        routes = [Route(f"r{i}", (f"m{i}", "bb")) for i in range(1, n + 1)]
    elif kind == "line":
        L = float(parameter)
        if not L > 0:
            raise DomainError(f"middle-link length must be > 0, got {parameter!r}")
        links = [Link("l1", 15.0, 1e-3, 0.1), Link("l2", L, 1e-4, 0.1), Link("l3", 15.0, 1e-3, 0.1)]
        routes = [Route("r1", ("l1", "l2", "l3"))]
    else:
        n = _positive_int(parameter, "user count")
        if n % 2:
            raise DomainError(f"dumbbell user count must be even, got {n}")
        half = n // 2
        links = [Link(f"a{i}", 15.0, 1e-3, 0.1) for i in range(1, half + 1)]
        links += [Link(f"b{i}", 15.0, 1e-3, 0.1) for i in range(1, half + 1)]
        links.append(Link("bb", 100.0, 1e-4, 0.1))
        routes = [Route(f"r{i}", (f"a{i}", "bb", f"b{i}")) for i in range(1, half + 1)]
    return NetworkSpec(tuple(links), tuple(routes))


def symmetry_classes(kind: str, spec: NetworkSpec) -> dict[str, list[str]]:
    """Group the links of a benchmark network into interchangeable classes.

    The first class is the one whose links each carry a single route.
    """
    kind = normalize_topology(kind)
    ids = spec.link_ids
    if kind == "three_link":
        return {"short": ["l1", "l2"], "long": ["l3"]}
    if kind == "line":
        return {"outer": ["l1", "l3"], "middle": ["l2"]}
    return {"metro": [i for i in ids if i != "bb"], "backbone": ["bb"]}


# -- JSON ---------------------------------------------------------------------

def spec_to_dict(spec: NetworkSpec) -> dict:
    doc = {
        "links": [{"id": lk.id, "length_km": lk.length_km, "T_s": lk.repetition_time_s,
                   "c": lk.inefficiency_c} for lk in spec.links],
        "routes": [{"id": r.id, "links": list(r.links)} for r in spec.routes],
    }
    if spec.fidelity_thresholds:
        doc["fidelity_thresholds"] = dict(spec.fidelity_thresholds)
    return doc


def _field(obj: dict, key: str, where: str, kind=(int, float)):
    if not isinstance(obj, dict):
        raise ValidationError("expected an object", where=where)
    if key not in obj:
        raise ValidationError(f"missing field {key!r}", where=where)
    value = obj[key]
    if kind is str:
        if not isinstance(value, (str, int)) or isinstance(value, bool):
            raise ValidationError("expected a string id", where=f"{where}.{key}")
        return str(value)
    if isinstance(value, bool) or not isinstance(value, kind):
        raise ValidationError(f"expected a number, got {value!r}", where=f"{where}.{key}")
    return float(value)


def spec_from_dict(doc: dict) -> NetworkSpec:
    """Parse the JSON document layout produced by :func:`spec_to_dict`."""
    if not isinstance(doc, dict):
        raise ValidationError("top level must be an object")
    for key in ("links", "routes"):
        if not isinstance(doc.get(key), list):
            raise ValidationError("expected a list", where=key)
    links = []
    for i, obj in enumerate(doc["links"]):
        where = f"links[{i}]"
        links.append(Link(_field(obj, "id", where, str), _field(obj, "length_km", where),
                          _field(obj, "T_s", where), _field(obj, "c", where)))
    routes = []
    for i, obj in enumerate(doc["routes"]):
        where = f"routes[{i}]"
        rid = _field(obj, "id", where, str)
        lids = obj.get("links")
        if not isinstance(lids, list):
            raise ValidationError("expected a list of link ids", where=f"{where}.links")
        routes.append(Route(rid, tuple(str(x) for x in lids)))
    thresholds = doc.get("fidelity_thresholds")
    if thresholds is not None:
        if not isinstance(thresholds, dict):
            raise ValidationError("expected an object", where="fidelity_thresholds")
        for k, v in thresholds.items():
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ValidationError(f"expected a number, got {v!r}", where=f"fidelity_thresholds[{k!r}]")
        thresholds = {str(k): float(v) for k, v in thresholds.items()}
    return NetworkSpec(tuple(links), tuple(routes), thresholds)


def load_spec(path: str | Path) -> NetworkSpec:
    """Read a network JSON file. Syntax errors become :class:`ValidationError`."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON: {exc.msg} (line {exc.lineno}, column {exc.colno})",
                              where=str(path)) from None
    return spec_from_dict(doc)


def dump_spec(spec: NetworkSpec, path: str | Path) -> None:
    Path(path).write_text(json.dumps(spec_to_dict(spec), indent=2) + "\n", encoding="utf-8")

