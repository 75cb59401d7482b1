from __future__ import annotations

import json
import warnings

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qnum.errors import ConsistencyError, DomainError, ValidationError
from qnum.model import (
    Link,
    NetworkSpec,
    Route,
    SolutionVector,
    TOPOLOGIES,
    bright_state_population,
    build_topology,
    dump_spec,
    e2e_werner,
    fidelity_to_werner,
    link_generation_rate,
    load_spec,
    rate_coefficient,
    spec_from_dict,
    spec_to_dict,
    success_probability,
    symmetry_classes,
    transmissivity,
    warn_if_unphysical,
    werner_to_fidelity,
)

unit = st.floats(0.0, 1.0)
length = st.floats(0.0, 500.0)


# -- transmissivity and rates ---------------------------------------------------

def test_transmissivity_values():
    assert transmissivity(0.0) == 1.0
    assert transmissivity(100.0) == pytest.approx(0.01, rel=1e-12)
    assert transmissivity(15.0) == pytest.approx(0.50119, abs=5e-6)


def test_transmissivity_rejects_negative_length():
    with pytest.raises(DomainError):
        transmissivity(-1.0)


@given(length, length)
def test_transmissivity_multiplicative(a, b):
    assert transmissivity(a + b) == pytest.approx(transmissivity(a) * transmissivity(b), rel=1e-12)


@given(st.floats(0.0, 300.0), st.floats(0.01, 100.0))
def test_transmissivity_strictly_decreasing(a, delta):
    assert 0 < transmissivity(a + delta) < transmissivity(a) <= 1


@pytest.mark.parametrize("L, T, c, expected", [
    (100.0, 1e-4, 0.1, 15.0),
    (15.0, 1e-3, 0.1, 3 * 0.1 * 10 ** (-0.3) / 2e-3),
    (0.0, 1.0, 1.0, 1.5),
])
def test_rate_coefficient_full_span(L, T, c, expected):
    assert rate_coefficient(Link("x", L, T, c), midpoint=False) == pytest.approx(expected, rel=1e-12)


def test_rate_coefficient_full_span_rounded_example():
    assert rate_coefficient(Link("m", 15.0, 1e-3, 0.1), midpoint=False) == pytest.approx(75.178, abs=5e-4)


def test_rate_coefficient_midpoint_default():
    # loss counted over half the link: eta(50 km) = 0.1
    link = Link("bb", 100.0, 1e-4, 0.1)
    assert rate_coefficient(link) == pytest.approx(3 * 0.1 * 0.1 / 2e-4, rel=1e-12)
    assert link.rate_coefficient == rate_coefficient(link)


def test_three_link_rate_coefficients():
    spec = build_topology("three_link", 50)
    d = {lk.id: rate_coefficient(lk, midpoint=False) for lk in spec.links}
    # 1500 * 10**-0.04 = 1368.016...
    assert d["l1"] == d["l2"] == pytest.approx(1500 * 10 ** (-0.04), rel=1e-12)
    assert d["l1"] == pytest.approx(1368.016, abs=5e-4)
    assert d["l3"] == pytest.approx(150.0, rel=1e-12)


def test_link_generation_rate_examples():
    link = Link("bb", 100.0, 1e-4, 0.1)
    assert link_generation_rate(link, 1.0, midpoint=False) == 0.0
    assert link_generation_rate(link, 0.8, midpoint=False) == pytest.approx(3.0, rel=1e-12)
    metro = Link("m", 15.0, 1e-3, 0.1)
    d = rate_coefficient(metro, midpoint=False)
    assert link_generation_rate(metro, 0.9, midpoint=False) == pytest.approx(0.1 * d, rel=1e-12)
    with pytest.raises(DomainError):
        link_generation_rate(link, 1.1)


@given(unit, unit, st.floats(0.0, 200.0))
def test_link_generation_rate_affine(w1, w2, L):
    link = Link("x", L, 1e-3, 0.5)
    d = rate_coefficient(link)
    diff = link_generation_rate(link, w2) - link_generation_rate(link, w1)
    assert diff == pytest.approx(-d * (w2 - w1), abs=1e-9 * d)


# -- state conversions -----------------------------------------------------------

def test_fidelity_werner_examples():
    assert werner_to_fidelity(1.0) == 1.0
    assert werner_to_fidelity(1 / 3) == pytest.approx(0.5, abs=1e-15)
    assert werner_to_fidelity(0.97) == pytest.approx(0.9775, abs=1e-15)
    assert fidelity_to_werner(1.0) == 1.0
    assert fidelity_to_werner(0.5) == pytest.approx(1 / 3, abs=1e-15)
    assert fidelity_to_werner(0.81) == pytest.approx(0.74667, abs=5e-6)
    with pytest.raises(DomainError):
        werner_to_fidelity(-0.1)
    with pytest.raises(DomainError):
        fidelity_to_werner(0.2)


@given(unit)
def test_fidelity_werner_roundtrip(w):
    assert abs(fidelity_to_werner(werner_to_fidelity(w)) - w) <= 1e-12


def test_bright_state_population():
    assert bright_state_population(1.0) == 0.0
    assert bright_state_population(0.0) == 0.75
    assert bright_state_population(0.9) == pytest.approx(0.075, abs=1e-15)
    assert success_probability(Link("x", 0.0, 1.0, 1.0), 0.9, midpoint=False) == pytest.approx(0.15)


def test_e2e_werner_examples():
    r = Route("r", ("a", "b", "c"))
    assert e2e_werner(r, {"a": 1.0, "b": 1.0, "c": 1.0}) == 1.0
    assert e2e_werner(Route("r", ("a", "b")), {"a": 0.9, "b": 0.8}) == pytest.approx(0.72, abs=1e-15)
    assert e2e_werner(r, {"a": 0.95, "b": 0.95, "c": 0.95}) == pytest.approx(0.857375, abs=1e-15)


def test_e2e_werner_missing_link():
    with pytest.raises(ConsistencyError, match="'b'"):
        e2e_werner(Route("r", ("a", "b")), {"a": 0.9})


@given(st.lists(unit, min_size=1, max_size=6))
def test_e2e_werner_bounded_by_min(ws):
    ids = [f"l{i}" for i in range(len(ws))]
    assert e2e_werner(Route("r", ids), dict(zip(ids, ws))) <= min(ws)


# -- validation -------------------------------------------------------------------

def test_link_invariants():
    with pytest.raises(ValidationError):
        Link("x", -1.0, 1e-3)
    with pytest.raises(ValidationError):
        Link("x", 1.0, 0.0)
    with pytest.raises(ValidationError):
        Link("x", 1.0, 1e-3, 1.5)


def test_route_invariants():
    with pytest.raises(ValidationError):
        Route("r", ())
    with pytest.raises(ValidationError):
        Route("r", ("a", "a"))


def test_missing_link_names_the_id():
    with pytest.raises(ValidationError, match="'ghost'") as info:
        NetworkSpec((Link("a", 1.0, 1e-3),), (Route("r", ("a", "ghost")),))
    assert info.value.where == "routes[0].links"


def test_unused_link_warns():
    with pytest.warns(UserWarning, match="spare"):
        NetworkSpec((Link("a", 1.0, 1e-3), Link("spare", 1.0, 1e-3)), (Route("r", ("a",)),))


def test_threshold_validation():
    links, routes = (Link("a", 1.0, 1e-3),), (Route("r", ("a",)),)
    with pytest.raises(ValidationError):
        NetworkSpec(links, routes, {"nope": 0.9})
    with pytest.raises(ValidationError):
        NetworkSpec(links, routes, {"r": 0.3})


def test_warn_if_unphysical():
    spec = NetworkSpec((Link("a", 0.0, 1e-3, 1.0),), (Route("r", ("a",)),))
    with pytest.warns(UserWarning):
        assert warn_if_unphysical(spec, SolutionVector({"r": 1.0}, {"a": 0.0})) == ["a"]
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert warn_if_unphysical(spec, SolutionVector({"r": 1.0}, {"a": 0.9})) == []


# -- topologies ------------------------------------------------------------------

@pytest.mark.parametrize("kind, param", [("three_link", 50), ("clients_server", 1), ("clients_server", 7),
                                         ("line", 120), ("dumbbell", 4), ("dumbbell", 10)])
def test_topology_integrity(kind, param):
    spec = build_topology(kind, param)
    used = {l for r in spec.routes for l in r.links}
    assert used == set(spec.link_ids)
    classes = symmetry_classes(kind, spec)
    assert sorted(l for c in classes.values() for l in c) == sorted(spec.link_ids)


def test_topology_shapes():
    s = build_topology("three_link", 50)
    assert (len(s.links), [r.links for r in s.routes]) == (3, [("l1", "l3"), ("l2", "l3")])
    s = build_topology("clients_server", 1)
    assert len(s.links) == 2 and len(s.routes) == 1 and s.routes[0].hops == 2
    s = build_topology("dumbbell", 4)
    assert len(s.links) == 5 and len(s.routes) == 2 and all(r.hops == 3 for r in s.routes)
    s = build_topology("line", 50)
    assert [lk.repetition_time_s for lk in s.links] == [1e-3, 1e-4, 1e-3]
    assert build_topology("clients-server", 3) == build_topology("clients_server", 3)


@pytest.mark.parametrize("kind, param", [("three_link", 0), ("three_link", -5), ("clients_server", 0),
                                         ("clients_server", 2.5), ("dumbbell", 3), ("line", -1),
                                         ("star", 3)])
def test_topology_bad_parameter(kind, param):
    with pytest.raises(DomainError):
        build_topology(kind, param)


# -- JSON -------------------------------------------------------------------------

@pytest.mark.parametrize("kind", TOPOLOGIES)
def test_json_roundtrip(kind, tmp_path):
    spec = build_topology(kind, 4)
    assert spec_from_dict(json.loads(json.dumps(spec_to_dict(spec)))) == spec
    dump_spec(spec, tmp_path / "net.json")
    assert load_spec(tmp_path / "net.json") == spec


def test_json_roundtrip_with_thresholds():
    doc = spec_to_dict(build_topology("clients_server", 2))
    doc["fidelity_thresholds"] = {"r1": 0.9}
    spec = spec_from_dict(doc)
    assert spec.fidelity_thresholds == {"r1": 0.9}
    assert spec_from_dict(spec_to_dict(spec)) == spec


def test_json_field_errors(tmp_path):
    doc = spec_to_dict(build_topology("three_link", 5))
    doc["links"][1]["T_s"] = "fast"
    with pytest.raises(ValidationError, match=r"links\[1\]\.T_s"):
        spec_from_dict(doc)
    doc = spec_to_dict(build_topology("three_link", 5))
    del doc["links"][0]["length_km"]
    with pytest.raises(ValidationError, match="length_km"):
        spec_from_dict(doc)
    bad = tmp_path / "bad.json"
    bad.write_text('{"links": [\n  {"id": "a",}\n]}', encoding="utf-8")
    with pytest.raises(ValidationError, match="line 2"):
        load_spec(bad)
