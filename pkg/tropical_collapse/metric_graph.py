"""Exact metric computations on geometric realizations of metric graphs."""

from __future__ import annotations

import itertools
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np
from networkx.algorithms.isomorphism import GraphMatcher

from .config import Config, resolve
from .errors import BadParameter, ContractAll, TooLarge
from .logging_utils import get_logger
from .models import POINT, Edge, GraphStats, MetricGraph, PointSpace

logger = get_logger(__name__)

Affine = Tuple[float, float, float]
HalfPlane = Tuple[float, float, float]


# --------------------------------------------------------------------------
# named graphs
# --------------------------------------------------------------------------

def segment(length: float = 1.0) -> MetricGraph:
    return MetricGraph.build([("e1", "v0", "v1", length)])


def circle(length: float = 2.0) -> MetricGraph:
    return MetricGraph.build([("e1", "v0", "v0", length)])


def theta(l1: float = 1.0, l2: float = 1.0, l3: float = 1.0) -> MetricGraph:
    return MetricGraph.build(
        [("e1", "v0", "v1", l1), ("e2", "v0", "v1", l2), ("e3", "v0", "v1", l3)]
    )


def dumbbell(loop1: float = 1.0, bridge: float = 1.0, loop2: float = 1.0) -> MetricGraph:
    return MetricGraph.build(
        [("e1", "v0", "v0", loop1), ("e2", "v0", "v1", bridge), ("e3", "v1", "v1", loop2)]
    )


def figure_eight(l1: float = 1.0, l2: float = 1.0) -> MetricGraph:
    return MetricGraph.build([("e1", "v0", "v0", l1), ("e2", "v0", "v0", l2)])


def lollipop(loop: float = 1.0, stick: float = 1.0) -> MetricGraph:
    return MetricGraph.build([("e1", "v0", "v0", loop), ("e2", "v0", "v1", stick)])


def tripod(l1: float = 1.0, l2: float = 1.0, l3: float = 1.0) -> MetricGraph:
    return MetricGraph.build(
        [("e1", "c", "v1", l1), ("e2", "c", "v2", l2), ("e3", "c", "v3", l3)]
    )


def path_graph(lengths: Sequence[float]) -> MetricGraph:
    return MetricGraph.build(
        [(f"e{i + 1}", f"v{i}", f"v{i + 1}", length) for i, length in enumerate(lengths)]
    )


def cycle_graph(lengths: Sequence[float]) -> MetricGraph:
    n = len(lengths)
    return MetricGraph.build(
        [(f"e{i + 1}", f"v{i}", f"v{(i + 1) % n}", length) for i, length in enumerate(lengths)]
    )


# --------------------------------------------------------------------------
# distances
# --------------------------------------------------------------------------

def to_networkx(g: MetricGraph) -> nx.MultiGraph:
    graph = nx.MultiGraph()
    graph.add_nodes_from(g.vertices)
    for edge in g.edges:
        graph.add_edge(edge.ends[0], edge.ends[1], key=edge.id, length=edge.length)
    return graph


def vertex_distances(g: MetricGraph) -> Tuple[Dict[str, int], np.ndarray]:
    """Vertex index and the all-pairs shortest-path matrix."""
    index = {v: i for i, v in enumerate(g.vertices)}
    matrix = np.zeros((len(index), len(index)))
    lengths = dict(nx.all_pairs_dijkstra_path_length(to_networkx(g), weight="length"))
    for a, row in lengths.items():
        for b, value in row.items():
            matrix[index[a], index[b]] = value
    return index, matrix


def stats(g: MetricGraph) -> GraphStats:
    degrees = g.degrees()
    return GraphStats(
        v1=sum(1 for d in degrees.values() if d == 1),
        b1=len(g.edges) - len(g.vertices) + 1,
        total_length=g.total_length,
        diameter=diameter(g),
    )


def _endpoint_routes(edge: Edge, index: Dict[str, int]) -> List[Tuple[int, float, float]]:
    """(vertex, slope, offset): distance along the edge to each end is slope*s + offset."""
    a, b = edge.ends
    return [(index[a], 1.0, 0.0), (index[b], -1.0, edge.length)]


def _max_of_min(functions: Sequence[Affine], domain: Sequence[HalfPlane]) -> float:
    """Maximum over a polygon of the minimum of affine functions of (s, t).

    The optimum sits on a vertex of the hypograph, so it is enough to test
    every pairwise intersection of boundary lines and equal-value lines.
    """
    lines: List[Tuple[float, float, float]] = list(domain)
    for (p1, q1, c1), (p2, q2, c2) in itertools.combinations(functions, 2):
        if abs(p1 - p2) > 1e-15 or abs(q1 - q2) > 1e-15:
            lines.append((p1 - p2, q1 - q2, c2 - c1))
    scale = max(1.0, max(abs(b) for _, _, b in domain))
    best = -np.inf
    for (a1, a2, b1), (d1, d2, b2) in itertools.combinations(lines, 2):
        det = a1 * d2 - a2 * d1
        if abs(det) < 1e-14:
            continue
        s = (b1 * d2 - a2 * b2) / det
        t = (a1 * b2 - b1 * d1) / det
        if any(h1 * s + h2 * t > hb + 1e-12 * scale for h1, h2, hb in domain):
            continue
        value = min(p * s + q * t + c for p, q, c in functions)
        best = max(best, value)
    return float(best)


def diameter(g: MetricGraph) -> float:
    """Exact diameter of the geometric realization."""
    index, dist = vertex_distances(g)
    best = float(dist.max())
    edges = list(g.edges)
    for i, e in enumerate(edges):
        if e.is_loop:
            best = max(best, e.length / 2.0)
        else:
            # points s <= t on one edge: direct (t - s) or leave through the ends
            routes = [(-1.0, 1.0, 0.0)]
            for (u, ps, cs), (w, pt, ct) in itertools.product(
                _endpoint_routes(e, index), repeat=2
            ):
                routes.append((ps, pt, cs + ct + dist[u, w]))
            triangle = [(-1.0, 0.0, 0.0), (0.0, 1.0, e.length), (1.0, -1.0, 0.0)]
            best = max(best, _max_of_min(routes, triangle))
        for f in edges[i + 1:]:
            routes = [
                (ps, pt, cs + ct + dist[u, w])
                for (u, ps, cs), (w, pt, ct) in itertools.product(
                    _endpoint_routes(e, index), _endpoint_routes(f, index)
                )
            ]
            rectangle = [
                (-1.0, 0.0, 0.0),
                (1.0, 0.0, e.length),
                (0.0, -1.0, 0.0),
                (0.0, 1.0, f.length),
            ]
            best = max(best, _max_of_min(routes, rectangle))
    return best


# --------------------------------------------------------------------------
# combinatorial moves
# --------------------------------------------------------------------------

def contract(
    g: MetricGraph, edges: Iterable[str], *, allow_point: bool = False
) -> Union[MetricGraph, PointSpace]:
    """Contract non-loop edges of ``edges`` and delete its loops."""
    chosen = set(edges)
    unknown = chosen - set(g.edge_ids)
    if unknown:
        raise BadParameter(f"unknown edges {sorted(unknown)}")
    order = {v: i for i, v in enumerate(g.vertices)}
    parent = {v: v for v in g.vertices}

    def find(v: str) -> str:
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for edge in g.edges:
        if edge.id in chosen and not edge.is_loop:
            ra, rb = find(edge.ends[0]), find(edge.ends[1])
            if ra != rb:
                keep, drop = (ra, rb) if order[ra] < order[rb] else (rb, ra)
                parent[drop] = keep

    kept = tuple(
        Edge(edge.id, (find(edge.ends[0]), find(edge.ends[1])), edge.length)
        for edge in g.edges
        if edge.id not in chosen
    )
    if not kept:
        if allow_point:
            return POINT
        raise ContractAll("contracting every edge leaves a point")
    used = {v for edge in kept for v in edge.ends}
    return MetricGraph(tuple(v for v in g.vertices if v in used), kept)


def suppress_with_chains(g: MetricGraph) -> Tuple[MetricGraph, Dict[str, List[str]]]:
    """Suppress 2-valent vertices, reporting which input edges form each output edge."""
    edges: Dict[str, List] = {e.id: [e.ends[0], e.ends[1], e.length] for e in g.edges}
    chains: Dict[str, List[str]] = {e.id: [e.id] for e in g.edges}
    vertices = list(g.vertices)
    changed = True
    while changed:
        changed = False
        for v in vertices:
            incident = [eid for eid, (a, b, _) in edges.items() if v in (a, b)]
            degree = sum((edges[eid][0] == v) + (edges[eid][1] == v) for eid in incident)
            if degree != 2 or len(incident) != 2:
                continue
            first, second = sorted(incident)
            x = edges[first][1] if edges[first][0] == v else edges[first][0]
            y = edges[second][1] if edges[second][0] == v else edges[second][0]
            length = edges[first][2] + edges[second][2]
            del edges[second]
            edges[first] = [x, y, length]
            chains[first] = chains[first] + chains.pop(second)
            vertices.remove(v)
            changed = True
            break
    graph = MetricGraph(
        tuple(vertices),
        tuple(Edge(eid, (a, b), length) for eid, (a, b, length) in edges.items()),
    )
    return graph, chains


def suppress(g: MetricGraph) -> MetricGraph:
    return suppress_with_chains(g)[0]


def subdivide(g: MetricGraph, edge_id: str, fraction: float = 0.5) -> MetricGraph:
    if not 0.0 < fraction < 1.0:
        raise BadParameter("fraction must lie strictly between 0 and 1")
    edge = g.edge(edge_id)
    middle = f"{edge_id}~m"
    while middle in g.vertices:
        middle += "'"
    first = Edge(edge_id, (edge.ends[0], middle), edge.length * fraction)
    second = Edge(f"{edge_id}~b", (middle, edge.ends[1]), edge.length * (1.0 - fraction))
    edges = []
    for item in g.edges:
        edges.extend([first, second] if item.id == edge_id else [item])
    return MetricGraph(g.vertices + (middle,), tuple(edges))


def rescale(g: MetricGraph, mode: str = "diameter") -> MetricGraph:
    if mode == "diameter":
        return g.scaled(1.0 / diameter(g))
    if mode in {"total_length", "total"}:
        return g.scaled(1.0 / g.total_length)
    raise BadParameter(f"unknown rescale mode {mode!r}")


def require_diameter_one(g: MetricGraph, tol: float = 1e-9) -> None:
    value = diameter(g)
    if abs(value - 1.0) > tol:
        raise BadParameter(f"expected a diameter-1 graph, got diameter {value:.12g}")


# --------------------------------------------------------------------------
# isomorphism
# --------------------------------------------------------------------------

def incidence_graph(g: MetricGraph) -> nx.Graph:
    """Bipartite vertex/edge graph; loops and parallel edges become plain nodes."""
    graph = nx.Graph()
    for v in g.vertices:
        graph.add_node(("v", v), kind="vertex", loop=False, length=0.0)
    for edge in g.edges:
        node = ("e", edge.id)
        graph.add_node(node, kind="edge", loop=edge.is_loop, length=edge.length)
        graph.add_edge(node, ("v", edge.ends[0]))
        graph.add_edge(node, ("v", edge.ends[1]))
    return graph


def _node_match(respect_lengths: bool, tol: float):
    def match(a: dict, b: dict) -> bool:
        if a["kind"] != b["kind"] or a["loop"] != b["loop"]:
            return False
        if respect_lengths and a["kind"] == "edge":
            return abs(a["length"] - b["length"]) <= tol * max(1.0, abs(a["length"]))
        return True

    return match


def edge_isomorphisms(
    a: MetricGraph,
    b: MetricGraph,
    *,
    respect_lengths: bool = False,
    tol: Optional[float] = None,
    config: Optional[Config] = None,
) -> Iterator[Dict[str, str]]:
    """Yield edge maps a -> b of every graph isomorphism (loop flips are invisible)."""
    cfg = resolve(config)
    limit = cfg.max_iso_edges
    if len(a.edges) > limit or len(b.edges) > limit:
        raise TooLarge(f"isomorphism search is capped at {limit} edges")
    if len(a.edges) != len(b.edges) or len(a.vertices) != len(b.vertices):
        return
    matcher = GraphMatcher(
        incidence_graph(a),
        incidence_graph(b),
        node_match=_node_match(respect_lengths, cfg.tolerance if tol is None else tol),
    )
    for mapping in matcher.isomorphisms_iter():
        yield {src[1]: dst[1] for src, dst in mapping.items() if src[0] == "e"}


def isomorphic(
    a: MetricGraph,
    b: MetricGraph,
    respect_lengths: bool = False,
    tol: Optional[float] = None,
    *,
    config: Optional[Config] = None,
) -> bool:
    if sorted(a.degrees().values()) != sorted(b.degrees().values()):
        return False
    for _ in edge_isomorphisms(a, b, respect_lengths=respect_lengths, tol=tol, config=config):
        return True
    return False


def invariant_key(g: MetricGraph) -> Tuple:
    """Isomorphism invariant used to bucket candidates before VF2."""
    loops = sum(1 for e in g.edges if e.is_loop)
    wl = nx.weisfeiler_lehman_graph_hash(incidence_graph_labelled(g), node_attr="label")
    return (len(g.edges), len(g.vertices), loops, tuple(sorted(g.degrees().values())), wl)


def incidence_graph_labelled(g: MetricGraph) -> nx.Graph:
    graph = incidence_graph(g)
    for node, data in graph.nodes(data=True):
        data["label"] = f"{data['kind']}:{int(data['loop'])}"
    return graph


# --------------------------------------------------------------------------
# export
# --------------------------------------------------------------------------

def to_dot(g: MetricGraph, name: str = "G") -> str:
    lines = [f"graph {name} {{"]
    for v in g.vertices:
        lines.append(f'  "{v}";')
    for edge in g.edges:
        lines.append(
            f'  "{edge.ends[0]}" -- "{edge.ends[1]}" [key="{edge.id}", label="{edge.length:.6g}"];'
        )
    lines.append("}")
    return "\n".join(lines)
