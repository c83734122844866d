"""Value types shared across the package.

Every type is immutable after construction and knows how to turn itself
into the JSON documents described in ``docs/schemas``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from .errors import InvalidGraph, InvalidInput, NotPositiveDefinite


@dataclass(frozen=True, slots=True)
class Edge:
    id: str
    ends: Tuple[str, str]
    length: float

    @property
    def is_loop(self) -> bool:
        return self.ends[0] == self.ends[1]

    def other_end(self, vertex: str) -> str:
        a, b = self.ends
        return b if vertex == a else a

    def to_dict(self) -> Dict[str, object]:
        return {"id": self.id, "ends": list(self.ends), "length": self.length}


@dataclass(frozen=True)
class MetricGraph:
    """Finite connected multigraph with positive edge lengths.

    Loops and parallel edges are allowed; the one-point space is
    :data:`POINT`, never a graph without edges.
    """

    vertices: Tuple[str, ...]
    edges: Tuple[Edge, ...]

    def __post_init__(self) -> None:
        if not self.edges:
            raise InvalidGraph("a metric graph needs at least one edge")
        if len(set(self.vertices)) != len(self.vertices):
            raise InvalidGraph("duplicate vertex ids")
        ids = [edge.id for edge in self.edges]
        if len(set(ids)) != len(ids):
            raise InvalidGraph("duplicate edge ids")
        known = set(self.vertices)
        for edge in self.edges:
            if edge.ends[0] not in known or edge.ends[1] not in known:
                raise InvalidGraph(f"edge {edge.id} has an unknown endpoint")
            if not (edge.length > 0 and math.isfinite(edge.length)):
                raise InvalidGraph(f"edge {edge.id} has non-positive length {edge.length}")
        skeleton = nx.MultiGraph()
        skeleton.add_nodes_from(self.vertices)
        skeleton.add_edges_from(edge.ends for edge in self.edges)
        if not nx.is_connected(skeleton):
            raise InvalidGraph("metric graph is not connected")

    @classmethod
    def build(
        cls,
        edges: Iterable[Tuple[str, str, str, float]],
        vertices: Optional[Iterable[str]] = None,
    ) -> "MetricGraph":
        """Build from ``(id, a, b, length)`` tuples; vertices default to the endpoints."""
        edge_list = [Edge(str(i), (str(a), str(b)), float(length)) for i, a, b, length in edges]
        if vertices is None:
            seen: Dict[str, None] = {}
            for edge in edge_list:
                seen.setdefault(edge.ends[0])
                seen.setdefault(edge.ends[1])
            vertex_list: List[str] = list(seen)
        else:
            vertex_list = [str(v) for v in vertices]
        return cls(tuple(vertex_list), tuple(edge_list))

    @property
    def edge_ids(self) -> Tuple[str, ...]:
        return tuple(edge.id for edge in self.edges)

    def edge(self, edge_id: str) -> Edge:
        for edge in self.edges:
            if edge.id == edge_id:
                return edge
        raise KeyError(edge_id)

    def lengths(self) -> Dict[str, float]:
        return {edge.id: edge.length for edge in self.edges}

    def degree(self, vertex: str) -> int:
        return sum((edge.ends[0] == vertex) + (edge.ends[1] == vertex) for edge in self.edges)

    def degrees(self) -> Dict[str, int]:
        counts = {v: 0 for v in self.vertices}
        for edge in self.edges:
            counts[edge.ends[0]] += 1
            counts[edge.ends[1]] += 1
        return counts

    @property
    def total_length(self) -> float:
        return float(sum(edge.length for edge in self.edges))

    def scaled(self, factor: float) -> "MetricGraph":
        return MetricGraph(
            self.vertices,
            tuple(Edge(e.id, e.ends, e.length * factor) for e in self.edges),
        )

    def with_lengths(self, lengths: Mapping[str, float]) -> "MetricGraph":
        return MetricGraph(
            self.vertices,
            tuple(Edge(e.id, e.ends, float(lengths.get(e.id, e.length))) for e in self.edges),
        )

    def to_dict(self) -> Dict[str, object]:
        return {
            "vertices": list(self.vertices),
            "edges": [edge.to_dict() for edge in self.edges],
        }

    @classmethod
    def from_dict(cls, payload: Mapping[str, object]) -> "MetricGraph":
        try:
            raw_edges = payload["edges"]
            edges = [
                (item["id"], item["ends"][0], item["ends"][1], item["length"])  # type: ignore[index]
                for item in raw_edges  # type: ignore[union-attr]
            ]
            vertices = payload.get("vertices")
        except (KeyError, TypeError, IndexError) as exc:
            raise InvalidInput(f"malformed graph document: {exc}") from exc
        return cls.build(edges, vertices)  # type: ignore[arg-type]


@dataclass(frozen=True)
class PointSpace:
    """The one-point metric space."""

    def to_dict(self) -> Dict[str, object]:
        return {"point": True}


POINT = PointSpace()


@dataclass(frozen=True, slots=True)
class GraphStats:
    v1: int
    b1: int
    total_length: float
    diameter: float

    def to_dict(self) -> Dict[str, object]:
        return {
            "v1": self.v1,
            "b1": self.b1,
            "total_length": self.total_length,
            "diameter": self.diameter,
        }


def _symmetric(matrix: np.ndarray, what: str) -> np.ndarray:
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] == 0:
        raise InvalidInput(f"{what} must be a non-empty square matrix")
    if not np.all(np.isfinite(matrix)):
        raise InvalidInput(f"{what} has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(matrix))))
    if np.max(np.abs(matrix - matrix.T)) > 1e-12 * scale:
        raise InvalidInput(f"{what} is not symmetric")
    return (matrix + matrix.T) / 2.0


def check_positive_definite(matrix: np.ndarray, what: str = "matrix") -> np.ndarray:
    """Return the Cholesky factor; the pivots are positive iff the form is."""
    try:
        return np.linalg.cholesky(matrix)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(f"{what} is not positive definite") from exc


@dataclass(frozen=True)
class FlatTorus:
    """R^n / Z^n with the flat metric given by ``gram``."""

    gram: Tuple[Tuple[float, ...], ...]

    def __post_init__(self) -> None:
        matrix = _symmetric(np.asarray(self.gram, dtype=float), "Gram matrix")
        check_positive_definite(matrix, "Gram matrix")
        object.__setattr__(self, "gram", tuple(tuple(float(x) for x in row) for row in matrix))

    @classmethod
    def from_matrix(cls, matrix: Sequence[Sequence[float]] | np.ndarray) -> "FlatTorus":
        array = np.atleast_2d(np.asarray(matrix, dtype=float))
        return cls(tuple(tuple(float(x) for x in row) for row in array))

    @property
    def dim(self) -> int:
        return len(self.gram)

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.gram, dtype=float)

    def to_dict(self) -> Dict[str, object]:
        return {"dim": self.dim, "gram": [list(row) for row in self.gram]}

    @classmethod
    def from_dict(cls, payload: Mapping[str, object]) -> "FlatTorus":
        try:
            torus = cls.from_matrix(payload["gram"])  # type: ignore[arg-type]
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, InvalidInput):
                raise
            raise InvalidInput(f"malformed torus document: {exc}") from exc
        declared = payload.get("dim")
        if declared is not None and int(declared) != torus.dim:  # type: ignore[arg-type]
            raise InvalidInput(f"declared dim {declared} does not match Gram size {torus.dim}")
        return torus


@dataclass(frozen=True, slots=True)
class CertifiedValue:
    lo: float
    hi: float

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise ValueError(f"certificate lo={self.lo} exceeds hi={self.hi}")

    @property
    def mid(self) -> float:
        return (self.lo + self.hi) / 2.0

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, value: float, slack: float = 0.0) -> bool:
        return self.lo - slack <= value <= self.hi + slack

    def to_dict(self) -> Dict[str, object]:
        return {"lo": self.lo, "hi": self.hi}


@dataclass(frozen=True, slots=True)
class GHInterval:
    lb: float
    ub: float
    mesh_a: float = 0.0
    mesh_b: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.lb <= self.ub:
            raise ValueError(f"invalid GH interval [{self.lb}, {self.ub}]")

    @property
    def width(self) -> float:
        return self.ub - self.lb

    def contains(self, value: float) -> bool:
        return self.lb <= value <= self.ub

    def to_dict(self) -> Dict[str, object]:
        return {"lb": self.lb, "ub": self.ub, "mesh_a": self.mesh_a, "mesh_b": self.mesh_b}


@dataclass(frozen=True, eq=False)
class FiniteNet:
    """Finite sample of a compact space with its exact distance matrix."""

    points: Tuple[str, ...]
    dist: np.ndarray = field(repr=False)
    mesh: float = 0.0

    def __post_init__(self) -> None:
        if self.dist.shape != (len(self.points), len(self.points)):
            raise ValueError("distance matrix does not match the point list")
        if self.mesh < 0:
            raise ValueError("mesh must be non-negative")
        self.dist.setflags(write=False)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def diameter(self) -> float:
        return float(self.dist.max()) if len(self.points) else 0.0

    def to_dict(self) -> Dict[str, object]:
        return {
            "points": list(self.points),
            "dist": self.dist.tolist(),
            "mesh": self.mesh,
        }
