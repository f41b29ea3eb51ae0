"""Instance documents: parsing, canonical serialization and random generation.

Documents are JSON with a ``"version": "crs/1"`` field.  Reals are written
with 17 significant digits so a parse/serialize round trip is bit-stable.

Set descriptors carry a ``kind``; wrapper kinds take their ``base`` either
inline or as the name of another entry of ``sets``::

    {"version": "crs/1",
     "space": {"dim": 2, "norm": "l2", "tol": 1e-9},
     "sets": {"C": {"kind": "cone_truncated", "cone_generators": [[1, 0], [0, 1]],
                    "level_functional": [1, 1], "level": 1.0}},
     "points": {"A": [[0, 0], [1, 0], [0, 1], [2, 2]]},
     "params": {"eps": 2.0}}
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CrsError, SchemaError
from .geometry import min_norm_point
from .sets import (
    BishopPhelps,
    ConeOfSet,
    ConeTruncated,
    DilatedCone,
    GeneratedCone,
    GeneratorRays,
    HyperbolaFixture,
    KnSlice,
    RadialNeighborhood,
    Scaled,
    SliceGeq,
    TranslatedCone,
)
from .space import NormKind, Space

VERSION = "crs/1"
_SECTIONS = {"version", "space", "sets", "points", "params", "functionals", "options"}


# -----------------------------------------------------------------------------
# canonical JSON
# -----------------------------------------------------------------------------


def _num(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if not math.isfinite(x):
        return json.dumps(None) if math.isnan(x) else ('"inf"' if x > 0 else '"-inf"')
    return "%.17g" % x


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """Deterministic JSON: sorted keys, 17-digit reals, flat numeric lists."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in sorted(obj.items(), key=lambda kv: str(kv[0]))]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, bool, np.number, np.bool_)) for v in obj):
            return "[" + ", ".join(_num(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in obj) + "\n" + end + "]"
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (int, float, bool, np.number, np.bool_)):
        return _num(obj)
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):  # enums
        return json.dumps(obj.value)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


# -----------------------------------------------------------------------------
# validation helpers
# -----------------------------------------------------------------------------


def _req(d: dict, key: str, path: str):
    if not isinstance(d, dict):
        raise SchemaError(path, "expected an object")
    if key not in d:
        raise SchemaError(f"{path}.{key}", "missing required field")
    return d[key]


def _real(v, path: str, positive: bool = False) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SchemaError(path, f"expected a number, got {type(v).__name__}")
    if not math.isfinite(v):
        raise SchemaError(path, "expected a finite number")
    if positive and not v > 0:
        raise SchemaError(path, "expected a positive number")
    return float(v)


def _vec(v, dim: int, path: str) -> list:
    if not isinstance(v, list):
        raise SchemaError(path, "expected a list of numbers")
    if len(v) != dim:
        raise SchemaError(path, f"expected {dim} coordinates, got {len(v)}")
    return [_real(x, f"{path}[{i}]") for i, x in enumerate(v)]


def _vecs(v, dim: int, path: str, nonempty: bool = True) -> list:
    if not isinstance(v, list) or (nonempty and not v):
        raise SchemaError(path, "expected a nonempty list of points")
    return [_vec(x, dim, f"{path}[{i}]") for i, x in enumerate(v)]


# -----------------------------------------------------------------------------
# set descriptors
# -----------------------------------------------------------------------------

CONE_KINDS = {"generated_cone", "cone_of", "dilated_cone"}
SET_KINDS = {
    "cone_truncated",
    "bishop_phelps",
    "generator_rays",
    "translated_cone",
    "hyperbola",
    "scaled",
    "radial_neighborhood",
    "slice_geq",
    "kn_slice",
}


class _Builder:
    def __init__(self, space: Space, docs: dict):
        self.space = space
        self.docs = docs
        self.built: dict = {}
        self.active: set = set()

    def named(self, name: str, path: str):
        if name in self.built:
            return self.built[name]
        if name not in self.docs:
            raise SchemaError(path, f"unknown set name {name!r}")
        if name in self.active:
            raise SchemaError(path, f"cyclic reference through {name!r}")
        self.active.add(name)
        obj = self.build(self.docs[name], f"$.sets.{name}")
        self.active.discard(name)
        self.built[name] = obj
        return obj

    def base(self, d: dict, path: str):
        b = _req(d, "base", path)
        if isinstance(b, str):
            return self.named(b, f"{path}.base")
        return self.build(b, f"{path}.base")

    def build(self, d, path: str):
        if not isinstance(d, dict):
            raise SchemaError(path, "expected a set descriptor object")
        kind = _req(d, "kind", path)
        sp, dim = self.space, self.space.dim
        try:
            if kind == "cone_truncated":
                return ConeTruncated(
                    sp,
                    np.array(_vecs(_req(d, "cone_generators", path), dim, f"{path}.cone_generators")),
                    np.array(_vec(_req(d, "level_functional", path), dim, f"{path}.level_functional")),
                    _real(_req(d, "level", path), f"{path}.level", positive=True),
                )
            if kind == "bishop_phelps":
                strict = d.get("strict", True)
                if not isinstance(strict, bool):
                    raise SchemaError(f"{path}.strict", "expected a boolean")
                return BishopPhelps(
                    sp,
                    np.array(_vec(_req(d, "f", path), dim, f"{path}.f")),
                    _real(_req(d, "alpha", path), f"{path}.alpha", positive=True),
                    _real(_req(d, "lambda", path), f"{path}.lambda", positive=True),
                    strict,
                )
            if kind == "generator_rays":
                return GeneratorRays(sp, np.array(_vecs(_req(d, "generators", path), dim, f"{path}.generators")))
            if kind == "translated_cone":
                return TranslatedCone(
                    sp,
                    np.array(_vec(_req(d, "apex", path), dim, f"{path}.apex")),
                    np.array(_vecs(_req(d, "cone_generators", path), dim, f"{path}.cone_generators")),
                )
            if kind == "hyperbola":
                return HyperbolaFixture(sp)
            if kind == "scaled":
                return Scaled(self.base(d, path), _real(_req(d, "eps", path), f"{path}.eps", positive=True))
            if kind == "radial_neighborhood":
                return RadialNeighborhood(self.base(d, path), _real(_req(d, "delta", path), f"{path}.delta", positive=True))
            if kind == "slice_geq":
                return SliceGeq(self.base(d, path), _real(_req(d, "a", path), f"{path}.a", positive=True))
            if kind == "kn_slice":
                return KnSlice(self.base(d, path), _real(_req(d, "n", path), f"{path}.n", positive=True))
            if kind == "generated_cone":
                return GeneratedCone(sp, np.array(_vecs(_req(d, "generators", path), dim, f"{path}.generators")))
            if kind == "cone_of":
                return ConeOfSet(self.base(d, path))
            if kind == "dilated_cone":
                return DilatedCone(self.base(d, path), _real(_req(d, "delta", path), f"{path}.delta", positive=True))
        except SchemaError:
            raise
        except CrsError as e:
            raise SchemaError(path, str(e)) from e
        raise SchemaError(f"{path}.kind", f"unknown set kind {kind!r}")


# -----------------------------------------------------------------------------
# instances
# -----------------------------------------------------------------------------


@dataclass
class Instance:
    space: Space
    sets: dict
    points: dict
    params: dict
    functionals: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)
    doc: dict = field(default_factory=dict)

    def text(self) -> str:
        return serialize(self)

    @property
    def digest(self) -> str:
        return digest(self.text())

    def set(self, name: str = "C"):
        if name not in self.sets:
            raise SchemaError(f"$.sets.{name}", "required by this command but missing")
        return self.sets[name]

    def pts(self, name: str = "A") -> np.ndarray:
        if name not in self.points:
            raise SchemaError(f"$.points.{name}", "required by this command but missing")
        return self.points[name]

    def param(self, name: str, default=None) -> float:
        if name in self.params:
            return self.params[name]
        if default is None:
            raise SchemaError(f"$.params.{name}", "required by this command but missing")
        return default

    def functional(self, name: str = "f") -> np.ndarray:
        if name not in self.functionals:
            raise SchemaError(f"$.functionals.{name}", "required by this command but missing")
        return self.functionals[name]


def parse_instance(text: str) -> Instance:
    """Validate an instance document; errors carry the JSON path."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError("$", f"invalid JSON: {e.msg} at line {e.lineno} column {e.colno}") from e
    return instance_from_doc(doc)


def instance_from_doc(doc) -> Instance:
    if not isinstance(doc, dict):
        raise SchemaError("$", "expected an object")
    for k in doc:
        if k not in _SECTIONS:
            raise SchemaError(f"$.{k}", "unknown section")
    if doc.get("version") != VERSION:
        raise SchemaError("$.version", f"expected {VERSION!r}")
    sd = _req(doc, "space", "$")
    dim = _req(sd, "dim", "$.space")
    if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
        raise SchemaError("$.space.dim", "expected a positive integer")
    norm = sd.get("norm", "l2")
    if norm not in {k.value for k in NormKind}:
        raise SchemaError("$.space.norm", f"unknown norm {norm!r}")
    tol = _real(sd.get("tol", 1e-9), "$.space.tol", positive=True)
    if not tol < 1e-3:
        raise SchemaError("$.space.tol", "tol must be below 1e-3")
    space = Space(dim, NormKind(norm), tol)

    sets_doc = doc.get("sets", {})
    if not isinstance(sets_doc, dict):
        raise SchemaError("$.sets", "expected an object")
    b = _Builder(space, sets_doc)
    sets = {name: b.named(name, f"$.sets.{name}") for name in sets_doc}

    pts_doc = doc.get("points", {})
    if not isinstance(pts_doc, dict):
        raise SchemaError("$.points", "expected an object")
    points = {k: np.array(_vecs(v, dim, f"$.points.{k}")) for k, v in pts_doc.items()}

    par_doc = doc.get("params", {})
    if not isinstance(par_doc, dict):
        raise SchemaError("$.params", "expected an object")
    params = {k: _real(v, f"$.params.{k}") for k, v in par_doc.items()}

    fn_doc = doc.get("functionals", {})
    if not isinstance(fn_doc, dict):
        raise SchemaError("$.functionals", "expected an object")
    functionals = {k: np.array(_vec(v, dim, f"$.functionals.{k}")) for k, v in fn_doc.items()}

    opt_doc = doc.get("options", {})
    if not isinstance(opt_doc, dict) or not all(isinstance(v, str) for v in opt_doc.values()):
        raise SchemaError("$.options", "expected an object of strings")

    names = list(sets) + list(points) + list(params) + list(functionals)
    dup = {n for n in names if names.count(n) > 1}
    if dup:
        raise SchemaError("$", f"names must be unique across sections: {sorted(dup)}")
    return Instance(space, sets, points, params, functionals, dict(opt_doc), doc)


def serialize(inst: Instance) -> str:
    return dumps(inst.doc) + "\n"


# -----------------------------------------------------------------------------
# random instances
# -----------------------------------------------------------------------------

FAMILIES = ("orthant-truncated", "bishop-phelps", "generator-rays")


def random_pointed_cone(rng, dim: int, m: int | None = None, spread: float = 0.8, min_gap: float = 0.05):
    """Generators around a random axis whose normalized hull stays off 0."""
    m = m if m is not None else int(rng.integers(dim, dim + 3))
    for _ in range(1000):
        axis = rng.standard_normal(dim)
        axis /= np.linalg.norm(axis)
        G = axis + spread * rng.standard_normal((m, dim))
        if np.any(G @ axis <= 0.05):
            continue
        U = G / np.linalg.norm(G, axis=1)[:, None]
        if min_norm_point(U)[1] > min_gap:
            return G, axis
    raise RuntimeError("could not draw a pointed cone")


def random_instance(seed: int, dim: int = 2, family: str = "orthant-truncated", size: int = 20, norm: str = "l2") -> Instance:
    """Deterministic random instance for one of the shipped families."""
    if family not in FAMILIES:
        raise SchemaError("$.family", f"unknown family {family!r}; expected one of {FAMILIES}")
    rng = np.random.default_rng(seed)
    space = Space(dim, NormKind(norm))
    level = float(rng.uniform(0.5, 2.0))
    if family == "orthant-truncated":
        G, axis = random_pointed_cone(rng, dim)
        desc = {"kind": "cone_truncated", "cone_generators": G.tolist(), "level_functional": axis.tolist(), "level": level}
    elif family == "generator-rays":
        G, _ = random_pointed_cone(rng, dim)
        desc = {"kind": "generator_rays", "generators": (level * G / np.linalg.norm(G, axis=1)[:, None]).tolist()}
    else:
        f = rng.standard_normal(dim)
        u = float(rng.uniform(0.1, 0.9))
        desc = {"kind": "bishop_phelps", "f": f.tolist(), "alpha": u * space.dual_norm(f), "lambda": level, "strict": True}
    A = rng.uniform(-10, 10, size=(size, dim))
    doc = {
        "version": VERSION,
        "space": {"dim": dim, "norm": norm, "tol": 1e-9},
        "sets": {"C": desc},
        "points": {"A": A.tolist()},
        "params": {"eps": float(rng.uniform(0.2, 2.0))},
    }
    # normalize through the serializer so parse(serialize(x)) is a fixed point
    return parse_instance(dumps(doc))


def fixture_names() -> list[str]:
    from importlib import resources

    return sorted(p.name[:-5] for p in resources.files("crs.fixtures").iterdir() if p.name.endswith(".json"))


def load_fixture(name: str) -> Instance:
    """One of the instance files shipped in ``crs/fixtures``."""
    from importlib import resources

    path = resources.files("crs.fixtures") / f"{name}.json"
    if not path.is_file():
        raise SchemaError("$", f"no shipped fixture named {name!r}")
    return parse_instance(path.read_text(encoding="utf-8"))
