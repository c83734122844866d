"""Tropical Jacobians and the tropical Torelli map."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from .config import Config
from .errors import BadParameter, TreeInput
from .lattice_torus import rescale_torus
from .logging_utils import get_logger
from .metric_graph import dumbbell, require_diameter_one, stats
from .models import FlatTorus, MetricGraph

logger = get_logger(__name__)


@dataclass(frozen=True)
class CycleBasis:
    edge_ids: Tuple[str, ...]
    tree: Tuple[str, ...]
    cycles: Tuple[Tuple[int, ...], ...]  # signed coefficients, aligned with edge_ids

    @property
    def rank(self) -> int:
        return len(self.cycles)

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.cycles, dtype=float).reshape(self.rank, len(self.edge_ids))

    def to_dict(self) -> Dict[str, object]:
        return {
            "edges": list(self.edge_ids),
            "tree": list(self.tree),
            "cycles": [list(c) for c in self.cycles],
        }


def cycle_basis(g: MetricGraph, edge_order: Optional[Sequence[str]] = None) -> CycleBasis:
    """Fundamental cycles of the Kruskal spanning tree.

    Edges are ranked by id unless ``edge_order`` gives another ranking, so
    different orders yield different (equivalent) bases.
    """
    ranking = list(edge_order) if edge_order is not None else sorted(g.edge_ids)
    if sorted(ranking) != sorted(g.edge_ids):
        raise BadParameter("edge_order must list every edge exactly once")
    rank_of = {eid: i for i, eid in enumerate(ranking)}

    skeleton = nx.MultiGraph()
    skeleton.add_nodes_from(g.vertices)
    for edge in g.edges:
        skeleton.add_edge(*edge.ends, key=edge.id, rank=rank_of[edge.id])
    tree_edges = {
        key
        for _, _, key in nx.minimum_spanning_edges(
            skeleton, algorithm="kruskal", weight="rank", keys=True, data=False
        )
    }

    tree = nx.Graph()
    tree.add_nodes_from(g.vertices)
    for edge in g.edges:
        if edge.id in tree_edges:
            tree.add_edge(*edge.ends, id=edge.id)

    position = {eid: i for i, eid in enumerate(g.edge_ids)}
    cycles = []
    for edge in sorted(g.edges, key=lambda e: rank_of[e.id]):
        if edge.id in tree_edges:
            continue
        coeffs = [0] * len(g.edges)
        coeffs[position[edge.id]] = 1
        if not edge.is_loop:
            head, tail = edge.ends
            path = nx.shortest_path(tree, tail, head)
            for x, y in zip(path, path[1:]):
                tree_edge = g.edge(tree[x][y]["id"])
                coeffs[position[tree_edge.id]] = 1 if tree_edge.ends == (x, y) else -1
        cycles.append(tuple(coeffs))

    if not cycles:
        raise TreeInput("a tree has a trivial tropical Jacobian")
    ordered_tree = tuple(e for e in g.edge_ids if e in tree_edges)
    return CycleBasis(g.edge_ids, ordered_tree, tuple(cycles))


def jacobian(g: MetricGraph, edge_order: Optional[Sequence[str]] = None) -> FlatTorus:
    """Gram matrix of Q(sum a_e e) = sum a_e^2 l(e) on the fundamental cycles."""
    basis = cycle_basis(g, edge_order)
    lengths = np.array([g.edge(eid).length for eid in basis.edge_ids])
    c = basis.matrix
    return FlatTorus.from_matrix(c @ np.diag(lengths) @ c.T)


def torelli(
    g: MetricGraph, tol: Optional[float] = None, config: Optional[Config] = None
) -> FlatTorus:
    """Diameter-1 rescaling of the Jacobian of a diameter-1 graph."""
    if stats(g).b1 == 0:
        raise TreeInput("the Jacobian of a tree is a point and cannot be rescaled")
    require_diameter_one(g, 1e-9 if tol is None else tol)
    return rescale_torus(jacobian(g), "diameter", config=config)


def noninjectivity_witness(
    config: Optional[Config] = None,
) -> Tuple[MetricGraph, MetricGraph, FlatTorus]:
    """Two non-isometric diameter-1 dumbbells with the same Torelli image.

    The Jacobian ignores the bridge, so equal loops give the same torus
    after rescaling whatever the bridge length.
    """
    first = dumbbell(0.5, 0.5, 0.5)
    second = dumbbell(0.75, 0.25, 0.75)
    image = torelli(first, config=config)
    logger.debug("Torelli image of the witness pair: %s", image.gram)
    return first, second, image
