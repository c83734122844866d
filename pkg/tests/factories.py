"""Test helpers for building graphs, lattices and families."""

from __future__ import annotations

import itertools
import json
import tempfile
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Tuple

import networkx as nx
import numpy as np

from tropical_collapse.curve_collapse import PinchingSchedule, StableDualGraph
from tropical_collapse.metric_graph import (
    circle,
    dumbbell,
    figure_eight,
    lollipop,
    rescale,
    segment,
    theta,
)
from tropical_collapse.models import FlatTorus, MetricGraph
from tropical_collapse.siegel_av import SiegelFamily


def make_graph(edges: Iterable[Tuple[str, str, float]], **kwargs) -> MetricGraph:
    """``[(a, b, length), ...]`` with ids e1, e2, ..."""
    return MetricGraph.build(
        [(f"e{i}", a, b, length) for i, (a, b, length) in enumerate(edges, start=1)], **kwargs
    )


def genus_two_graphs() -> Dict[str, MetricGraph]:
    """Diameter-1 representatives of the six types of S_2."""
    return {
        name: rescale(graph, "diameter")
        for name, graph in {
            "theta": theta(),
            "dumbbell": dumbbell(),
            "figure_eight": figure_eight(),
            "lollipop": lollipop(),
            "circle": circle(),
            "segment": segment(),
        }.items()
    }


def random_gram(rng: np.random.Generator, n: int, spread: float = 1.0) -> np.ndarray:
    a = rng.normal(size=(n, n))
    return a @ a.T + spread * np.eye(n)


def random_unimodular(rng: np.random.Generator, n: int, steps: int = 6) -> np.ndarray:
    """Product of elementary integer matrices; determinant +-1."""
    u = np.eye(n, dtype=np.int64)
    for _ in range(steps):
        i, j = rng.choice(n, size=2, replace=False) if n > 1 else (0, 0)
        step = np.eye(n, dtype=np.int64)
        if i != j:
            step[i, j] = int(rng.integers(-2, 3))
        u = u @ step
    if n > 1 and rng.random() < 0.5:
        u[:, [0, 1]] = u[:, [1, 0]]
    return u


def random_symplectic(rng: np.random.Generator, g: int) -> np.ndarray:
    """Product of translations, basis changes and the standard involution."""
    zero = np.zeros((g, g), dtype=np.int64)
    identity = np.eye(g, dtype=np.int64)
    s = rng.integers(-2, 3, size=(g, g))
    s = np.triu(s) + np.triu(s, 1).T
    translation = np.block([[identity, s], [zero, identity]])
    u = random_unimodular(rng, g)
    basis = np.block([[u.T, zero], [zero, np.rint(np.linalg.inv(u)).astype(np.int64)]])
    involution = np.block([[zero, -identity], [identity, zero]])
    return translation @ basis @ involution @ translation.T


def hexagonal() -> FlatTorus:
    return FlatTorus.from_matrix([[1.0, 0.5], [0.5, 1.0]])


def family(laws: Sequence[Tuple[float, float]], x=None, b=None, u: float = 3.0) -> SiegelFamily:
    return SiegelFamily.build(laws, x, b, u)


def banana_dual(genus_weights: Sequence[int] = (1, 1)) -> StableDualGraph:
    """Two vertices joined by one edge, each carrying a weight."""
    graph = {
        "graph": {"vertices": ["a", "b"], "edges": [{"id": "n", "ends": ["a", "b"]}]},
        "weights": {"a": genus_weights[0], "b": genus_weights[1]},
    }
    return StableDualGraph.from_dict(graph)


def theta_dual() -> StableDualGraph:
    return StableDualGraph.from_dict(
        {
            "graph": {
                "vertices": ["a", "b"],
                "edges": [
                    {"id": "e1", "ends": ["a", "b"]},
                    {"id": "e2", "ends": ["a", "b"]},
                    {"id": "e3", "ends": ["a", "b"]},
                ],
            },
            "weights": {"a": 0, "b": 0},
        }
    )


def schedule(rates: Dict[str, object]) -> PinchingSchedule:
    return PinchingSchedule.build(rates)


def write_json(payload: object, directory: Path, name: str) -> Path:
    target = Path(directory) / name
    target.write_text(json.dumps(payload), encoding="utf-8")
    return target


def temporary_directory() -> tempfile.TemporaryDirectory:
    return tempfile.TemporaryDirectory(prefix="tropi-test-")


def brute_force_type_count(g: int) -> int:
    """Isomorphism classes of connected multigraphs with v1 + b1 <= g and no 2-valent vertex.

    Independent of the census: enumerates labelled edge multisets on at
    most 2g - 2 vertices (for g >= 2) and dedups by networkx isomorphism of
    the subdivided simple graph.
    """
    found: List[nx.Graph] = []
    max_vertices = max(2 * g - 2, 2)
    max_edges = 3 * g - 3 if g >= 2 else 1
    for n in range(1, max_vertices + 1):
        slots = [(i, j) for i in range(n) for j in range(i, n)]
        for m in range(1, max_edges + 1):
            for chosen in itertools.combinations_with_replacement(slots, m):
                degrees = [0] * n
                for i, j in chosen:
                    degrees[i] += 1
                    degrees[j] += 1
                if any(d == 0 or d == 2 for d in degrees):
                    continue
                skeleton = nx.MultiGraph()
                skeleton.add_nodes_from(range(n))
                skeleton.add_edges_from(chosen)
                if not nx.is_connected(skeleton):
                    continue
                v1 = sum(1 for d in degrees if d == 1)
                b1 = m - n + 1
                if v1 + b1 > g:
                    continue
                simple = _subdivided(chosen, n)
                if not any(nx.is_isomorphic(simple, other) for other in found):
                    found.append(simple)
    # the circle is a single loop at a 2-valent vertex
    return len(found) + 1


def _subdivided(chosen: Sequence[Tuple[int, int]], n: int) -> nx.Graph:
    graph = nx.Graph()
    graph.add_nodes_from(range(n))
    for k, (i, j) in enumerate(chosen):
        a, b = ("m", k, 0), ("m", k, 1)
        graph.add_edges_from([(i, a), (a, b), (b, j)])
    return graph
