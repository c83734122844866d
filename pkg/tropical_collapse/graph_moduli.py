"""Cell structure, rational homology and stratum embeddings of S_g.

A cell of S_g is a combinatorial type: a connected multigraph whose
vertices have degree 1 or at least 3 (or the one-vertex loop), with
v1 + b1 <= g.  Its open cell is the simplex of total-length-1 metrics.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

from .config import Config, resolve
from .errors import BadGenus, BadParameter, TooLarge
from .logging_utils import get_logger
from .metric_graph import (
    circle,
    contract,
    dumbbell,
    edge_isomorphisms,
    figure_eight,
    invariant_key,
    isomorphic,
    lollipop,
    rescale,
    segment,
    stats,
    suppress,
    theta,
    tripod,
)
from .models import Edge, MetricGraph, PointSpace

logger = get_logger(__name__)

EMPTY = -1


@dataclass(frozen=True)
class CombinatorialType:
    name: str
    graph: MetricGraph  # unit lengths, canonical vertex/edge order
    v1: int
    b1: int
    aut_order: int
    odd: bool  # some automorphism permutes the edges oddly

    @property
    def n_edges(self) -> int:
        return len(self.graph.edges)

    @property
    def n_vertices(self) -> int:
        return len(self.graph.vertices)

    @property
    def dimension(self) -> int:
        return self.n_edges - 1

    @property
    def minimal_genus(self) -> int:
        return self.v1 + self.b1

    @property
    def is_tree(self) -> bool:
        return self.b1 == 0

    def is_open(self, g: int) -> bool:
        return self.minimal_genus == g

    def to_dict(self) -> Dict[str, object]:
        return {
            "name": self.name,
            "dimension": self.dimension,
            "v1": self.v1,
            "b1": self.b1,
            "edges": self.n_edges,
            "vertices": self.n_vertices,
            "aut_order": self.aut_order,
            "orientable": not self.odd,
            "graph": self.graph.to_dict(),
        }


@dataclass(frozen=True)
class FaceMove:
    """Result of shrinking one edge of a cell to length zero."""

    edge: str
    position: int
    target: int  # index into the census, or EMPTY
    codim_one: bool
    sign: int  # boundary coefficient; 0 when the move collapses or the face is killed


@dataclass(frozen=True)
class CellComplex:
    genus: int
    types: Tuple[CombinatorialType, ...]
    moves: Tuple[Tuple[FaceMove, ...], ...] = field(repr=False)

    def index(self, name: str) -> int:
        for i, item in enumerate(self.types):
            if item.name == name:
                return i
        raise KeyError(name)

    def faces(self, cell: int) -> List[Tuple[int, str]]:
        """Codimension-one faces as (target, edge); targets may repeat."""
        return [(m.target, m.edge) for m in self.moves[cell] if m.codim_one]

    def face_names(self, cell: int) -> List[str]:
        return sorted(self._name(target) for target, _ in self.faces(cell))

    def _name(self, index: int) -> str:
        return "empty" if index == EMPTY else self.types[index].name

    def dimension(self, cell: int) -> int:
        return -1 if cell == EMPTY else self.types[cell].dimension

    @property
    def max_dimension(self) -> int:
        return max(t.dimension for t in self.types)

    def maximal_cells(self) -> List[int]:
        top = self.max_dimension
        return [i for i, t in enumerate(self.types) if t.dimension == top]

    def to_dict(self) -> Dict[str, object]:
        cells = []
        for i, item in enumerate(self.types):
            payload = item.to_dict()
            payload["faces"] = [
                {"face": self._name(m.target), "edge": m.edge, "sign": m.sign}
                for m in self.moves[i]
                if m.codim_one
            ]
            cells.append(payload)
        return {"genus": self.genus, "max_dimension": self.max_dimension, "cells": cells}


# --------------------------------------------------------------------------
# type registry and graph surgery on unit-length graphs
# --------------------------------------------------------------------------

def _canonical(graph: MetricGraph) -> MetricGraph:
    """Relabel to v0.. / e1.. with unit lengths, keeping the current order."""
    names = {v: f"v{i}" for i, v in enumerate(graph.vertices)}
    return MetricGraph(
        tuple(names[v] for v in graph.vertices),
        tuple(
            Edge(f"e{i + 1}", (names[e.ends[0]], names[e.ends[1]]), 1.0)
            for i, e in enumerate(graph.edges)
        ),
    )


class _Registry:
    """Isomorphism-class store, bucketed by a Weisfeiler-Lehman invariant."""

    def __init__(self, config: Config) -> None:
        self.config = config
        self.graphs: List[MetricGraph] = []
        self._buckets: Dict[Tuple, List[int]] = {}

    def add(self, graph: MetricGraph) -> Tuple[int, bool]:
        key = invariant_key(graph)
        bucket = self._buckets.setdefault(key, [])
        for index in bucket:
            if isomorphic(self.graphs[index], graph, config=self.config):
                return index, False
        self.graphs.append(_canonical(graph))
        bucket.append(len(self.graphs) - 1)
        return len(self.graphs) - 1, True


def _split(edges: List[Tuple[str, str]], position: int, middle: str) -> None:
    a, b = edges[position]
    edges[position] = (a, middle)
    edges.append((middle, b))


def _from_pairs(pairs: Sequence[Tuple[str, str]]) -> MetricGraph:
    return MetricGraph.build([(f"e{i + 1}", a, b, 1.0) for i, (a, b) in enumerate(pairs)])


def _insert_edge(graph: MetricGraph, i: int, j: int) -> MetricGraph:
    pairs = [e.ends for e in graph.edges]
    _split(pairs, i, "p")
    if i == j:
        _split(pairs, len(pairs) - 1, "q")
    else:
        _split(pairs, j, "q")
    pairs.append(("p", "q"))
    return _from_pairs(pairs)


def _insert_lollipop(graph: MetricGraph, i: int) -> MetricGraph:
    pairs = [e.ends for e in graph.edges]
    _split(pairs, i, "p")
    pairs.extend([("p", "w"), ("w", "w")])
    return _from_pairs(pairs)


def cubic_graphs(g: int, config: Optional[Config] = None) -> List[MetricGraph]:
    """Connected 3-regular genus-g multigraphs (loops allowed), one per class."""
    cfg = resolve(config)
    if g < 2:
        return []
    if g > cfg.max_genus:
        raise TooLarge(f"genus {g} exceeds the configured bound {cfg.max_genus}")
    return list(_cubic_graphs(g, cfg))


@lru_cache(maxsize=None)
def _cubic_graphs(g: int, cfg: Config) -> Tuple[MetricGraph, ...]:
    if g == 2:
        return (_canonical(theta()), _canonical(dumbbell()))
    registry = _Registry(cfg)
    for graph in _cubic_graphs(g - 1, cfg):
        n = len(graph.edges)
        for i in range(n):
            for j in range(i, n):
                registry.add(_insert_edge(graph, i, j))
            registry.add(_insert_lollipop(graph, i))
    logger.debug("genus %s: %s cubic graphs", g, len(registry.graphs))
    return tuple(registry.graphs)


def _degenerate(graph: MetricGraph, edge_id: str):
    result = contract(graph, [edge_id], allow_point=True)
    if isinstance(result, PointSpace):
        return result
    return suppress(result)


# --------------------------------------------------------------------------
# census and cell complex
# --------------------------------------------------------------------------

_KNOWN_NAMES = (
    ("circle", circle()),
    ("segment", segment()),
    ("lollipop", lollipop()),
    ("figure-eight", figure_eight()),
    ("theta", theta()),
    ("dumbbell", dumbbell()),
    ("tripod", tripod()),
)


def _automorphisms(graph: MetricGraph, cfg: Config) -> Tuple[int, bool]:
    count = 0
    odd = False
    order = graph.edge_ids
    for mapping in edge_isomorphisms(graph, graph, config=cfg):
        count += 1
        if not odd and _parity([order.index(mapping[e]) for e in order]) < 0:
            odd = True
    loops = sum(1 for e in graph.edges if e.is_loop)
    return count * 2 ** loops, odd


def _parity(permutation: Sequence[int]) -> int:
    seen = [False] * len(permutation)
    sign = 1
    for start in range(len(permutation)):
        if seen[start]:
            continue
        length = 0
        node = start
        while not seen[node]:
            seen[node] = True
            node = permutation[node]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def census(g: int, config: Optional[Config] = None) -> List[CombinatorialType]:
    return list(cell_complex(g, config).types)


def cell_complex(g: int, config: Optional[Config] = None) -> CellComplex:
    cfg = resolve(config)
    if g < 1:
        raise BadGenus("genus must be at least 1")
    if g > cfg.max_genus:
        raise TooLarge(f"genus {g} exceeds the configured bound {cfg.max_genus}")
    return _build_complex(g, cfg)


@lru_cache(maxsize=None)
def _build_complex(g: int, cfg: Config) -> CellComplex:
    registry = _Registry(cfg)
    seeds = [circle()] if g == 1 else cubic_graphs(g, cfg)
    queue = [registry.add(seed)[0] for seed in seeds]
    if g > 1:
        queue += [registry.add(t.graph)[0] for t in _build_complex(g - 1, cfg).types]
    raw_moves: Dict[int, List[Tuple[str, int]]] = {}
    while queue:
        current = queue.pop()
        if current in raw_moves:
            continue
        graph = registry.graphs[current]
        moves = []
        for edge in graph.edges:
            face = _degenerate(graph, edge.id)
            if isinstance(face, PointSpace):
                moves.append((edge.id, EMPTY))
                continue
            target, _ = registry.add(face)
            moves.append((edge.id, target))
            if target not in raw_moves:
                queue.append(target)
        raw_moves[current] = moves

    records = []
    for index, graph in enumerate(registry.graphs):
        graph_stats = stats(graph)
        aut_order, odd = _automorphisms(graph, cfg)
        records.append((index, graph, graph_stats.v1, graph_stats.b1, aut_order, odd))
    records.sort(
        key=lambda r: (
            len(r[1].edges),
            r[2] + r[3],
            len(r[1].vertices),
            tuple(sorted(r[1].degrees().values())),
            str(invariant_key(r[1])[-1]),
            r[0],
        )
    )
    position = {r[0]: new for new, r in enumerate(records)}

    types: List[CombinatorialType] = []
    counters: Dict[Tuple[int, int], int] = {}
    for _, graph, v1, b1, aut_order, odd in records:
        name = next(
            (label for label, ref in _KNOWN_NAMES if isomorphic(ref, graph, config=cfg)),
            None,
        )
        if name is None:
            slot = (v1 + b1, len(graph.edges))
            counters[slot] = counters.get(slot, 0) + 1
            name = f"g{slot[0]}.e{slot[1]}.{counters[slot]}"
        types.append(CombinatorialType(name, graph, v1, b1, aut_order, odd))

    all_moves: List[Tuple[FaceMove, ...]] = []
    for old_index, graph, *_ in records:
        cell_moves = []
        for pos, (edge_id, target) in enumerate(raw_moves[old_index]):
            new_target = EMPTY if target == EMPTY else position[target]
            face_edges = 0 if new_target == EMPTY else types[new_target].n_edges
            codim_one = face_edges == len(graph.edges) - 1
            sign = 0
            if codim_one and not types[position[old_index]].odd:
                sign = _face_sign(graph, pos, new_target, types, cfg)
            cell_moves.append(FaceMove(edge_id, pos, new_target, codim_one, sign))
        all_moves.append(tuple(cell_moves))

    logger.debug("S_%s: %s cells", g, len(types))
    return CellComplex(g, tuple(types), tuple(all_moves))


def _face_sign(
    graph: MetricGraph,
    position: int,
    target: int,
    types: Sequence[CombinatorialType],
    cfg: Config,
) -> int:
    """Orientation sign of a codimension-one face under the canonical edge orders."""
    if target == EMPTY:
        return 1
    face_type = types[target]
    if face_type.odd:
        return 0
    edge_id = graph.edges[position].id
    face = contract(graph, [edge_id])
    induced = [e.id for e in graph.edges if e.id != edge_id]
    mapping = next(edge_isomorphisms(face, face_type.graph, config=cfg))  # type: ignore[arg-type]
    canonical = face_type.graph.edge_ids
    permutation = [canonical.index(mapping[e]) for e in induced]
    return (-1) ** position * _parity(permutation)


# --------------------------------------------------------------------------
# chain complex and homology
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ChainComplex:
    """Oriented cellular chains; degree -1 is the augmentation by the empty cell."""

    genus: int
    generators: Dict[int, Tuple[int, ...]]  # degree -> cell indices
    boundaries: Dict[int, Tuple[Tuple[int, ...], ...]]  # degree k: rows C_{k-1}, cols C_k

    def rank(self, degree: int) -> int:
        return len(self.generators.get(degree, ()))


def chain_complex(g: int, config: Optional[Config] = None) -> ChainComplex:
    complex_ = cell_complex(g, config)
    top = complex_.max_dimension
    generators: Dict[int, Tuple[int, ...]] = {-1: (EMPTY,)}
    for degree in range(0, top + 1):
        generators[degree] = tuple(
            i for i, t in enumerate(complex_.types) if t.dimension == degree and not t.odd
        )
    boundaries: Dict[int, Tuple[Tuple[int, ...], ...]] = {}
    for degree in range(0, top + 1):
        rows = generators[degree - 1]
        row_index = {cell: r for r, cell in enumerate(rows)}
        matrix = [[0] * len(generators[degree]) for _ in rows]
        for col, cell in enumerate(generators[degree]):
            for move in complex_.moves[cell]:
                if move.codim_one and move.sign and move.target in row_index:
                    matrix[row_index[move.target]][col] += move.sign
        boundaries[degree] = tuple(tuple(row) for row in matrix)
    return ChainComplex(g, generators, boundaries)


def exact_rank(matrix: Sequence[Sequence[int]]) -> int:
    """Rank over Q by Gaussian elimination on fractions."""
    rows = [[Fraction(x) for x in row] for row in matrix]
    if not rows or not rows[0]:
        return 0
    n_cols = len(rows[0])
    rank = 0
    for col in range(n_cols):
        pivot = next((r for r in range(rank, len(rows)) if rows[r][col] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        lead = rows[rank][col]
        for r in range(len(rows)):
            if r != rank and rows[r][col] != 0:
                factor = rows[r][col] / lead
                rows[r] = [a - factor * b for a, b in zip(rows[r], rows[rank])]
        rank += 1
        if rank == len(rows):
            break
    return rank


def _compose(left: Sequence[Sequence[int]], right: Sequence[Sequence[int]]) -> List[List[int]]:
    if not left or not right:
        return []
    inner = len(right)
    cols = len(right[0]) if right else 0
    return [
        [sum(left[i][k] * right[k][j] for k in range(inner)) for j in range(cols)]
        for i in range(len(left))
    ]


def boundary_squares_vanish(g: int, config: Optional[Config] = None) -> bool:
    chains = chain_complex(g, config)
    for degree in range(1, max(chains.boundaries) + 1):
        product = _compose(chains.boundaries[degree - 1], chains.boundaries[degree])
        if any(value for row in product for value in row):
            return False
    return True


def rational_betti(
    g: int, max_degree: Optional[int] = None, config: Optional[Config] = None
) -> Tuple[int, ...]:
    """Cellular rational Betti numbers b_0..b_max_degree of S_g."""
    chains = chain_complex(g, config)
    top = max(chains.boundaries)
    if max_degree is None:
        max_degree = max(0, 3 * g - 4)
    ranks = {d: exact_rank(m) for d, m in chains.boundaries.items()}
    betti = []
    for degree in range(0, max_degree + 1):
        if degree > top:
            betti.append(0)
            continue
        reduced = chains.rank(degree) - ranks.get(degree, 0) - ranks.get(degree + 1, 0)
        betti.append(reduced + (1 if degree == 0 else 0))
    return tuple(betti)


def euler_characteristic(g: int, config: Optional[Config] = None) -> int:
    chains = chain_complex(g, config)
    return sum((-1) ** d * chains.rank(d) for d in chains.generators if d >= 0)


# --------------------------------------------------------------------------
# strata
# --------------------------------------------------------------------------

def minimal_stratum(graph: MetricGraph) -> int:
    reduced = stats(suppress(graph))
    return reduced.v1 + reduced.b1


def type_of(graph: MetricGraph, g: int, config: Optional[Config] = None) -> CombinatorialType:
    """Census type of a metric graph in S_g."""
    reduced = suppress(graph)
    for item in cell_complex(g, config).types:
        if isomorphic(item.graph, reduced, config=config):
            return item
    raise BadGenus(f"graph does not lie in S_{g}")


def perturb_into_open_stratum(graph: MetricGraph, genus: int, epsilon: float) -> MetricGraph:
    """Push a graph of S_genus into the open stratum v1 = 0, b1 = genus."""
    graph_stats = stats(graph)
    if genus < graph_stats.v1 + graph_stats.b1:
        raise BadGenus(
            f"genus {genus} is below v1 + b1 = {graph_stats.v1 + graph_stats.b1}"
        )
    if epsilon <= 0:
        raise BadParameter("epsilon must be positive")
    degrees = graph.degrees()
    edges = list(graph.edges)
    for vertex in graph.vertices:
        if degrees[vertex] != 1:
            continue
        leaf_edge = next(e for e in graph.edges if vertex in e.ends)
        edges.append(Edge(f"{vertex}~loop", (vertex, vertex), epsilon * leaf_edge.length))
    base = graph.vertices[0]
    bouquet = genus - graph_stats.v1 - graph_stats.b1
    for k in range(bouquet):
        edges.append(Edge(f"{base}~b{k + 1}", (base, base), epsilon))
    return rescale(MetricGraph(graph.vertices, tuple(edges)), "diameter")
