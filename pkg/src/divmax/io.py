"""Instance documents and canonical JSON serialization.

An InstanceDoc is the wire format for one problem instance: the distance
description (points, sets, or an explicit matrix, plus optional entrywise
transforms), the matroid, optional per-element scores, and the seed it was
generated from.  Element indices are 1-based in serialized documents and
reports; the in-memory API is 0-based throughout.

Canonical form: object keys sorted, floats rendered with %.12g.  A document
serialized, parsed, and serialized again is byte-identical.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .geometry import (
    DistanceMatrix,
    NORM_KINDS,
    SET_KINDS,
    build_distance,
    transform_distance,
)
from .matroids import (
    ExplicitRankMatroid,
    GraphicMatroid,
    Matroid,
    PartitionMatroid,
    UniformMatroid,
)

SCHEMA_VERSION = 1


@dataclass
class InstanceDoc:
    """One problem instance in document form (see module docstring)."""

    n: int
    distance: dict
    matroid: dict
    scores: list | None = None
    seed: int | None = None
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> dict:
        out = {
            "schema_version": self.schema_version,
            "n": self.n,
            "distance": self.distance,
            "matroid": self.matroid,
            "scores": self.scores,
            "seed": self.seed,
        }
        return out


def canonical_dumps(obj) -> str:
    """Serialize to canonical JSON: sorted keys, %.12g floats, no NaN/inf."""

    def render(v) -> str:
        if v is None:
            return "null"
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, (int, np.integer)):
            return str(int(v))
        if isinstance(v, (float, np.floating)):
            f = float(v)
            if not math.isfinite(f):
                raise InvalidInputError("cannot serialize non-finite float")
            if f == 0.0:
                f = 0.0  # collapse -0.0, which would not survive a round-trip
            return format(f, ".12g")
        if isinstance(v, str):
            return json.dumps(v)
        if isinstance(v, dict):
            items = []
            for key in sorted(v):
                if not isinstance(key, str):
                    raise InvalidInputError("JSON object keys must be strings")
                items.append(f"{json.dumps(key)}: {render(v[key])}")
            return "{" + ", ".join(items) + "}"
        if isinstance(v, (list, tuple, np.ndarray)):
            return "[" + ", ".join(render(e) for e in v) + "]"
        raise InvalidInputError(f"cannot serialize value of type {type(v).__name__}")

    return render(obj) + "\n"


def doc_to_json(doc: InstanceDoc) -> str:
    return canonical_dumps(doc.to_dict())


def _expect(cond, msg):
    if not cond:
        raise InvalidInputError(msg)


def doc_from_dict(data: dict) -> InstanceDoc:
    _expect(isinstance(data, dict), "instance document must be a JSON object")
    _expect("n" in data and "distance" in data and "matroid" in data,
            "instance document needs n, distance, and matroid")
    version = data.get("schema_version", SCHEMA_VERSION)
    _expect(version == SCHEMA_VERSION, f"unsupported schema_version {version}")
    n = data["n"]
    _expect(isinstance(n, int) and n >= 2, "n must be an integer >= 2")
    scores = data.get("scores")
    if scores is not None:
        _expect(isinstance(scores, list) and len(scores) == n, "scores must list n numbers")
        _expect(all(isinstance(s, (int, float)) and s >= 0 for s in scores),
                "scores must be nonnegative numbers")
        scores = [float(s) for s in scores]
    seed = data.get("seed")
    if seed is not None:
        _expect(isinstance(seed, int), "seed must be an integer")
    return InstanceDoc(
        n=n,
        distance=data["distance"],
        matroid=data["matroid"],
        scores=scores,
        seed=seed,
        schema_version=version,
    )


def doc_from_json(text: str) -> InstanceDoc:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"invalid JSON: {exc}") from exc
    return doc_from_dict(data)


def build_distance_from_doc(spec: dict, n: int) -> DistanceMatrix:
    _expect(isinstance(spec, dict) and "kind" in spec, "distance needs a 'kind'")
    kind = spec["kind"]
    if kind == "explicit":
        _expect("matrix" in spec, "explicit distance needs 'matrix'")
        dm = build_distance(spec["matrix"], "explicit")
    elif kind in NORM_KINDS:
        _expect("points" in spec, f"distance kind {kind!r} needs 'points'")
        dm = build_distance(spec["points"], kind, p=spec.get("p"))
    elif kind in SET_KINDS:
        _expect("sets" in spec and "universe" in spec,
                f"distance kind {kind!r} needs 'sets' and 'universe'")
        dm = build_distance(spec["sets"], kind, universe=spec["universe"])
    else:
        raise InvalidInputError(f"unknown distance kind {kind!r}")
    _expect(dm.n == n, f"distance describes {dm.n} elements, document says {n}")
    for tr in spec.get("transforms", []):
        _expect(isinstance(tr, dict) and "name" in tr, "each transform needs a 'name'")
        dm = transform_distance(dm, tr["name"], alpha=tr.get("alpha"), lam=tr.get("lam"))
    return dm


def build_matroid_from_doc(spec: dict, n: int) -> Matroid:
    _expect(isinstance(spec, dict) and "kind" in spec, "matroid needs a 'kind'")
    kind = spec["kind"]
    if kind == "uniform":
        _expect("k" in spec, "uniform matroid needs 'k'")
        m = UniformMatroid(n, spec["k"])
    elif kind == "partition":
        _expect("blocks" in spec and "capacities" in spec,
                "partition matroid needs 'blocks' and 'capacities'")
        blocks = [[int(e) - 1 for e in b] for b in spec["blocks"]]
        m = PartitionMatroid(blocks, spec["capacities"])
    elif kind == "graphic":
        _expect("num_vertices" in spec and "edges" in spec,
                "graphic matroid needs 'num_vertices' and 'edges'")
        edges = [(int(u) - 1, int(v) - 1) for u, v in spec["edges"]]
        m = GraphicMatroid(spec["num_vertices"], edges)
    elif kind == "explicit_rank":
        _expect("ranks" in spec, "explicit_rank matroid needs 'ranks'")
        m = ExplicitRankMatroid(spec["ranks"])
    else:
        raise InvalidInputError(f"unknown matroid kind {kind!r}")
    _expect(m.n == n, f"matroid describes {m.n} elements, document says {n}")
    return m


def materialize(doc: InstanceDoc):
    """Build (DistanceMatrix, Matroid, scores array or None) from a document."""
    dm = build_distance_from_doc(doc.distance, doc.n)
    m = build_matroid_from_doc(doc.matroid, doc.n)
    w = None if doc.scores is None else np.asarray(doc.scores, dtype=float)
    return dm, m, w
