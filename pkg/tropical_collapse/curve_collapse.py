"""Deligne-Mumford and Gromov-Hausdorff limits of pinching curve families.

A degenerating family is modelled combinatorially: each edge of the
stable dual graph carries a geodesic length law l_j(i) = c_j * i**(-p_j),
and the rescaled GH limit gives edge j a length proportional to p_j.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, List, Mapping, Optional, Tuple, Union

import networkx as nx

from .config import Config, resolve
from .errors import (
    BadParameter,
    GenusMismatch,
    InvalidInput,
    NotAContraction,
    UncoveredEdge,
    UnstableVertex,
)
from .lattice_torus import rescale_torus
from .logging_utils import get_logger
from .metric_graph import (
    contract,
    edge_isomorphisms,
    require_diameter_one,
    rescale,
    suppress,
    suppress_with_chains,
)
from .models import Edge, FlatTorus, MetricGraph, PointSpace
from .siegel_av import PeriodPoint, SiegelFamily, torus_metric_matrix

logger = get_logger(__name__)


@dataclass(frozen=True)
class SmoothMarker:
    """The GH limit is a smooth curve of the given genus (nothing pinches)."""

    genus: int

    def to_dict(self) -> Dict[str, object]:
        return {"smooth": True, "genus": self.genus}


@dataclass(frozen=True)
class StableDualGraph:
    vertices: Tuple[str, ...]
    edges: Tuple[Edge, ...]
    weights: Mapping[str, int] = field(hash=False)
    genus: int = 0

    def __post_init__(self) -> None:
        known = set(self.vertices)
        if not known:
            raise InvalidInput("a dual graph needs at least one vertex")
        for edge in self.edges:
            if not set(edge.ends) <= known:
                raise InvalidInput(f"edge {edge.id} has an unknown endpoint")
        skeleton = nx.MultiGraph()
        skeleton.add_nodes_from(self.vertices)
        skeleton.add_edges_from(e.ends for e in self.edges)
        if not nx.is_connected(skeleton):
            raise InvalidInput("dual graph is not connected")
        if set(self.weights) - known:
            raise InvalidInput("weights name unknown vertices")
        object.__setattr__(
            self, "weights", {v: int(self.weights.get(v, 0)) for v in self.vertices}
        )

    @classmethod
    def from_graph(
        cls,
        graph: MetricGraph,
        weights: Optional[Mapping[str, int]] = None,
        genus: Optional[int] = None,
    ) -> "StableDualGraph":
        weights = dict(weights or {})
        b1 = len(graph.edges) - len(graph.vertices) + 1
        if genus is None:
            genus = b1 + sum(weights.values())
        return cls(graph.vertices, graph.edges, weights, genus)

    @classmethod
    def smooth(cls, genus: int) -> "StableDualGraph":
        return cls(("v0",), (), {"v0": genus}, genus)

    @property
    def b1(self) -> int:
        return len(self.edges) - len(self.vertices) + 1

    @property
    def edge_ids(self) -> Tuple[str, ...]:
        return tuple(e.id for e in self.edges)

    def degree(self, vertex: str) -> int:
        return sum((e.ends[0] == vertex) + (e.ends[1] == vertex) for e in self.edges)

    def metric_graph(self, lengths: Optional[Mapping[str, float]] = None) -> MetricGraph:
        lengths = lengths or {}
        return MetricGraph(
            self.vertices,
            tuple(Edge(e.id, e.ends, float(lengths.get(e.id, 1.0))) for e in self.edges),
        )

    def to_dict(self) -> Dict[str, object]:
        return {
            "graph": {
                "vertices": list(self.vertices),
                "edges": [{"id": e.id, "ends": list(e.ends), "length": e.length} for e in self.edges],
            },
            "weights": dict(self.weights),
            "genus": self.genus,
        }

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any]) -> "StableDualGraph":
        try:
            graph = payload["graph"]
            edges = tuple(
                Edge(str(item["id"]), (str(item["ends"][0]), str(item["ends"][1])), float(item.get("length", 1.0)))
                for item in graph.get("edges", [])
            )
            vertices = graph.get("vertices")
            if vertices is None:
                vertices = list(dict.fromkeys(v for e in edges for v in e.ends))
            weights = {str(k): int(v) for k, v in dict(payload.get("weights") or {}).items()}
            genus = payload.get("genus")
        except (KeyError, TypeError, IndexError, AttributeError) as exc:
            raise InvalidInput(f"malformed dual graph document: {exc}") from exc
        vertices = tuple(str(v) for v in vertices)
        if genus is None:
            genus = len(edges) - len(vertices) + 1 + sum(weights.values())
        return cls(vertices, edges, weights, int(genus))


@dataclass(frozen=True)
class StabilityReport:
    genus: int
    b1: int
    weight_sum: int
    smooth: bool

    def to_dict(self) -> Dict[str, object]:
        return {
            "genus": self.genus,
            "b1": self.b1,
            "weight_sum": self.weight_sum,
            "smooth": self.smooth,
        }


def validate_stable(dual: StableDualGraph) -> StabilityReport:
    """Check the genus formula and vertex stability, listing every violation."""
    weight_sum = sum(dual.weights.values())
    genus_ok = dual.genus == weight_sum + dual.b1
    violations: List[str] = []
    if not genus_ok:
        violations.append(f"genus {dual.genus} != sum of weights {weight_sum} + b1 {dual.b1}")
    for vertex in dual.vertices:
        degree = dual.degree(vertex)
        weight = dual.weights[vertex]
        if weight == 0 and degree < 3:
            violations.append(f"{vertex}: weight 0 with degree {degree}")
        elif degree == 1 and weight < 1:
            violations.append(f"{vertex}: leaf of weight {weight}")
    if not genus_ok:
        raise GenusMismatch(violations)
    if violations:
        raise UnstableVertex(violations)
    return StabilityReport(dual.genus, dual.b1, weight_sum, smooth=not dual.edges)


@dataclass(frozen=True)
class Rate:
    """Geodesic length law l(i) = c * i**(-p)."""

    c: float
    p: float

    def __post_init__(self) -> None:
        if not self.c > 0 or self.p < 0 or not math.isfinite(self.p):
            raise BadParameter(f"rate needs c > 0 and finite p >= 0, got ({self.c}, {self.p})")

    def length(self, i: float) -> float:
        return self.c * float(i) ** (-self.p)

    @property
    def limit(self) -> float:
        return 0.0 if self.p > 0 else self.c


@dataclass(frozen=True)
class PinchingSchedule:
    rates: Mapping[str, Rate] = field(hash=False)

    @classmethod
    def build(cls, rates: Mapping[str, Union[float, Tuple[float, float]]]) -> "PinchingSchedule":
        """Accept ``{edge: p}`` or ``{edge: (c, p)}``."""
        parsed = {}
        for eid, value in rates.items():
            c, p = (1.0, value) if isinstance(value, (int, float)) else value
            parsed[str(eid)] = Rate(float(c), float(p))
        return cls(parsed)

    def rate(self, edge_id: str) -> Rate:
        try:
            return self.rates[edge_id]
        except KeyError as exc:
            raise UncoveredEdge(f"no pinching rate for edge {edge_id}") from exc

    @property
    def pinched(self) -> FrozenSet[str]:
        return frozenset(eid for eid, r in self.rates.items() if r.p > 0)

    def to_dict(self) -> Dict[str, object]:
        return {eid: {"c": r.c, "p": r.p} for eid, r in sorted(self.rates.items())}

    @classmethod
    def from_dict(cls, payload: Mapping[str, object]) -> "PinchingSchedule":
        try:
            return cls(
                {str(k): Rate(float(v["c"]), float(v["p"])) for k, v in payload.items()}  # type: ignore[index]
            )
        except (KeyError, TypeError) as exc:
            raise InvalidInput(f"malformed rates document: {exc}") from exc


@dataclass(frozen=True)
class DMLimit:
    """Stable limit: the input dual graph with its pinched nodes."""

    graph: StableDualGraph
    pinched: FrozenSet[str]

    def dual_graph(self) -> StableDualGraph:
        """Contract the unpinched edges, moving their genus into the vertex weights."""
        parent = {v: v for v in self.graph.vertices}
        order = {v: i for i, v in enumerate(self.graph.vertices)}

        def find(v: str) -> str:
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        extra: Dict[str, int] = {}
        for edge in self.graph.edges:
            if edge.id in self.pinched:
                continue
            ra, rb = find(edge.ends[0]), find(edge.ends[1])
            if ra == rb:
                extra[ra] = extra.get(ra, 0) + 1
            else:
                keep, drop = (ra, rb) if order[ra] < order[rb] else (rb, ra)
                parent[drop] = keep
                extra[keep] = extra.get(keep, 0) + extra.pop(drop, 0)
        weights: Dict[str, int] = {}
        for v in self.graph.vertices:
            root = find(v)
            weights[root] = weights.get(root, 0) + self.graph.weights[v]
        for root, count in extra.items():
            weights[find(root)] += count
        edges = tuple(
            Edge(e.id, (find(e.ends[0]), find(e.ends[1])), e.length)
            for e in self.graph.edges
            if e.id in self.pinched
        )
        vertices = tuple(v for v in self.graph.vertices if find(v) == v)
        return StableDualGraph(vertices, edges, weights, self.graph.genus)

    def to_dict(self) -> Dict[str, object]:
        return {"graph": self.graph.to_dict(), "pinched": sorted(self.pinched)}


@dataclass(frozen=True)
class CurveCollapse:
    dm_limit: DMLimit
    gh_limit: Union[MetricGraph, SmoothMarker]

    def to_dict(self) -> Dict[str, object]:
        return {"dm_limit": self.dm_limit.to_dict(), "gh_limit": self.gh_limit.to_dict()}


def _check_coverage(dual: StableDualGraph, schedule: PinchingSchedule) -> None:
    missing = [eid for eid in dual.edge_ids if eid not in schedule.rates]
    if missing:
        raise UncoveredEdge(f"no pinching rate for edges {missing}")
    unknown = sorted(set(schedule.rates) - set(dual.edge_ids))
    if unknown:
        raise BadParameter(f"rates given for unknown edges {unknown}")


def collapse_curve(dual: StableDualGraph, schedule: PinchingSchedule) -> CurveCollapse:
    validate_stable(dual)
    _check_coverage(dual, schedule)
    pinched = schedule.pinched
    dm_limit = DMLimit(dual, pinched)
    if not pinched:
        return CurveCollapse(dm_limit, SmoothMarker(dual.genus))
    top = max(schedule.rate(eid).p for eid in pinched)
    lengths = {eid: schedule.rate(eid).p / top for eid in dual.edge_ids}
    graph = dual.metric_graph({eid: t if t > 0 else 1.0 for eid, t in lengths.items()})
    collapsed = contract(graph, [eid for eid, t in lengths.items() if t == 0])
    limit = rescale(suppress(collapsed), "diameter")  # type: ignore[arg-type]
    logger.debug("curve collapse: %s pinched of %s edges", len(pinched), len(dual.edges))
    return CurveCollapse(dm_limit, limit)


def collar_graph(
    dual: StableDualGraph, schedule: PinchingSchedule, i: float
) -> Union[MetricGraph, SmoothMarker]:
    """Diameter-1 graph of collar widths log(1/l_j(i)) at a finite index."""
    validate_stable(dual)
    _check_coverage(dual, schedule)
    if i <= 0:
        raise BadParameter("index must be positive")
    widths = {eid: -math.log(schedule.rate(eid).length(i)) for eid in dual.edge_ids}
    short = [eid for eid, w in widths.items() if w <= 0]
    if len(short) == len(dual.edges):
        return SmoothMarker(dual.genus)
    graph = dual.metric_graph({eid: w if w > 0 else 1.0 for eid, w in widths.items()})
    collapsed = contract(graph, short)
    return rescale(suppress(collapsed), "diameter")  # type: ignore[arg-type]


def schedule_for_target(
    dual: StableDualGraph, target: MetricGraph, config: Optional[Config] = None
) -> PinchingSchedule:
    """Rates whose collapse limit is ``target``: contracted edges get p = 0."""
    cfg = resolve(config)
    require_diameter_one(target, max(cfg.tolerance, 1e-9))
    if not dual.edges:
        raise NotAContraction("a smooth curve has no graph limits")
    reduced_target = suppress(target)
    graph = dual.metric_graph()
    ids = dual.edge_ids
    for size in range(len(ids)):
        for contracted in itertools.combinations(ids, size):
            image = contract(graph, contracted, allow_point=True)
            if isinstance(image, PointSpace):
                continue
            reduced, chains = suppress_with_chains(image)
            if len(reduced.edges) != len(reduced_target.edges):
                continue
            mapping = next(edge_isomorphisms(reduced, reduced_target, config=cfg), None)
            if mapping is None:
                continue
            rates = {eid: Rate(1.0, 0.0) for eid in contracted}
            for eid, chain in chains.items():
                share = reduced_target.edge(mapping[eid]).length / len(chain)
                for member in chain:
                    rates[member] = Rate(1.0, share)
            logger.debug("target reached by contracting %s", list(contracted))
            return PinchingSchedule(rates)
    raise NotAContraction("target is not a contraction of the dual graph")


def elliptic_collapse(a: float, k: int, config: Optional[Config] = None) -> FlatTorus:
    """Diameter-1 torus of the elliptic curve with tau = i * a * k."""
    if not a > 0 or k < 1:
        raise BadParameter("elliptic collapse needs a > 0 and k >= 1")
    point = PeriodPoint.from_tau(complex(0.0, a * k))
    return rescale_torus(torus_metric_matrix(point), "diameter", config=config)


def elliptic_family(a: float) -> SiegelFamily:
    return SiegelFamily.build([(a, 1.0)])
