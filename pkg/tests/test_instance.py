import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crs import SchemaError
from crs.geometry import min_norm_point
from crs.instance import FAMILIES, dumps, fixture_names, load_fixture, parse_instance, random_instance
from crs.sets import BishopPhelps, ConeTruncated, GeneratorRays, RadialNeighborhood, Scaled

MINIMAL = {
    "version": "crs/1",
    "space": {"dim": 2, "norm": "l2", "tol": 1e-9},
    "sets": {"C": {"kind": "cone_truncated", "cone_generators": [[1, 0], [0, 1]], "level_functional": [1, 1], "level": 1.0}},
    "points": {"A": [[0, 0], [1, 0]]},
    "params": {"eps": 2.0},
}


def test_minimal_round_trip():
    text = dumps(MINIMAL) + "\n"
    inst = parse_instance(text)
    assert inst.text() == text
    assert parse_instance(inst.text()).digest == inst.digest


def test_reals_keep_17_digits():
    doc = dict(MINIMAL, params={"eps": 0.1})
    text = dumps(doc)
    assert "0.10000000000000001" in text
    assert parse_instance(text).param("eps") == 0.1


@pytest.mark.parametrize(
    "mutate, path",
    [
        (lambda d: d["points"]["A"].__setitem__(1, [1, 0, 0]), "$.points.A[1]"),
        (lambda d: d["sets"]["C"].__setitem__("kind", "blob"), "$.sets.C.kind"),
        (lambda d: d["sets"]["C"].pop("level"), "$.sets.C.level"),
        (lambda d: d.__setitem__("version", "crs/0"), "$.version"),
        (lambda d: d["space"].__setitem__("norm", "l3"), "$.space.norm"),
        (lambda d: d["params"].__setitem__("eps", "two"), "$.params.eps"),
        (lambda d: d.__setitem__("extra", {}), "$.extra"),
    ],
)
def test_schema_errors_name_the_path(mutate, path):
    doc = json.loads(json.dumps(MINIMAL))
    mutate(doc)
    with pytest.raises(SchemaError) as e:
        parse_instance(json.dumps(doc))
    assert e.value.path == path
    assert e.value.exit_code == 2


def test_invalid_json():
    with pytest.raises(SchemaError):
        parse_instance("{not json")


def test_unique_names():
    doc = json.loads(json.dumps(MINIMAL))
    doc["params"]["A"] = 1.0
    with pytest.raises(SchemaError):
        parse_instance(json.dumps(doc))


def test_named_bases_and_cycles():
    doc = json.loads(json.dumps(MINIMAL))
    doc["sets"]["S"] = {"kind": "scaled", "base": "C", "eps": 0.5}
    doc["sets"]["R"] = {"kind": "radial_neighborhood", "base": {"kind": "scaled", "base": "C", "eps": 2.0}, "delta": 0.1}
    inst = parse_instance(json.dumps(doc))
    assert isinstance(inst.set("S"), Scaled) and inst.set("S").base is inst.set("C")
    assert isinstance(inst.set("R"), RadialNeighborhood)
    doc["sets"]["X1"] = {"kind": "scaled", "base": "X2", "eps": 1.0}
    doc["sets"]["X2"] = {"kind": "scaled", "base": "X1", "eps": 1.0}
    with pytest.raises(SchemaError, match="cyclic"):
        parse_instance(json.dumps(doc))


def test_example3_fixture():
    inst = load_fixture("example3")
    C = inst.set("C")
    assert isinstance(C, ConeTruncated)
    assert np.array_equal(C.cone_generators, np.eye(3))
    assert np.array_equal(C.level_functional, np.ones(3)) and C.level == 1.0


def test_all_fixtures_round_trip():
    for name in fixture_names():
        inst = load_fixture(name)
        assert parse_instance(inst.text()).text() == inst.text()


@pytest.mark.parametrize("family", FAMILIES)
def test_random_instance_determinism(family):
    a = random_instance(7, 3, family, 10)
    b = random_instance(7, 3, family, 10)
    assert a.digest == b.digest
    assert random_instance(8, 3, family, 10).digest != a.digest


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(2, 4), st.sampled_from(FAMILIES), st.integers(1, 40))
def test_random_instance_invariants(seed, dim, family, size):
    inst = random_instance(seed, dim, family, size)
    C, A = inst.set("C"), inst.pts("A")
    assert A.shape == (size, dim) and np.all(np.abs(A) <= 10)
    if isinstance(C, BishopPhelps):
        assert 0.1 * inst.space.dual_norm(C.f) <= C.alpha <= 0.9 * inst.space.dual_norm(C.f)
        assert 0.5 <= C.lam <= 2
    else:
        G = C.cone_generators if isinstance(C, ConeTruncated) else C.generators
        U = G / np.linalg.norm(G, axis=1)[:, None]
        assert min_norm_point(U)[1] > 0
        if isinstance(C, ConeTruncated):
            assert 0.5 <= C.level <= 2
        else:
            assert isinstance(C, GeneratorRays)
            assert np.all((np.linalg.norm(G, axis=1) >= 0.5 - 1e-12) & (np.linalg.norm(G, axis=1) <= 2 + 1e-12))
    assert parse_instance(inst.text()).text() == inst.text()
