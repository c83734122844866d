"""Contractions of the graph and torus compactifications, and join strata.

``phi`` deforms a diameter-1 metric graph to the unit segment in three
stages: grow leaves, shrink the old edges away, then straighten the
resulting star. ``psi`` shrinks a flat torus while a circle factor grows
until only the circle is left.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, NamedTuple, Optional, Tuple, Union

import numpy as np

from .config import Config, resolve
from .errors import BadParameter, InvalidInput
from .graph_moduli import minimal_stratum
from .lattice_torus import rescale_torus, torus_diameter
from .logging_utils import get_logger
from .metric_graph import rescale, require_diameter_one, segment
from .models import Edge, FlatTorus, MetricGraph

logger = get_logger(__name__)

CIRCLE_GRAM = ((4.0,),)

_GROW_END = 1.0 / 3.0
_SHRINK_END = 2.0 / 3.0


@dataclass(frozen=True)
class StarTree:
    """Tree with one centre and ``m >= 2`` legs, kept in increasing order."""

    legs: Tuple[float, ...]

    def __post_init__(self) -> None:
        legs = tuple(sorted(float(x) for x in self.legs))
        if len(legs) < 2:
            raise BadParameter("a star tree needs at least two legs")
        if legs[0] <= 0:
            raise BadParameter("star legs must be positive")
        object.__setattr__(self, "legs", legs)

    @property
    def m(self) -> int:
        return len(self.legs)

    def simplex_coordinates(self) -> Tuple[float, ...]:
        """Leg lengths normalised to total length 1."""
        total = sum(self.legs)
        return tuple(x / total for x in self.legs)

    def to_graph(self) -> MetricGraph:
        return MetricGraph.build(
            ((f"x{k}", "c", f"v{k}", length) for k, length in enumerate(self.legs, start=1)),
            vertices=["c"] + [f"v{k}" for k in range(1, self.m + 1)],
        )

    def to_dict(self) -> Dict[str, object]:
        return {"legs": list(self.legs), "simplex": list(self.simplex_coordinates())}


def _check_unit(value: float, what: str) -> None:
    if not 0.0 <= value <= 1.0:
        raise BadParameter(f"{what} must lie in [0, 1], got {value}")


def _with_leaves(g: MetricGraph, old_factor: float, leaf_factor: float) -> MetricGraph:
    """Scale old edges by ``old_factor`` and hang two leaves of ``leaf_factor * l(e)`` per edge."""
    vertices: List[str] = list(g.vertices)
    edges: List[Edge] = []
    for edge in g.edges:
        edges.append(Edge(edge.id, edge.ends, edge.length * old_factor))
        for side, anchor in zip("ab", edge.ends):
            tip = f"{edge.id}~{side}"
            vertices.append(tip)
            edges.append(Edge(f"{edge.id}~leaf{side}", (anchor, tip), edge.length * leaf_factor))
    return MetricGraph(tuple(vertices), tuple(edges))


def _star_of(g: MetricGraph) -> StarTree:
    # every edge contributes its length twice once the old edges are gone
    return StarTree(tuple(length for edge in g.edges for length in (edge.length, edge.length)))


def _straighten(star: StarTree, tau: float) -> MetricGraph:
    x = np.array(star.simplex_coordinates())
    target = np.zeros_like(x)
    target[-2:] = 0.5
    z = (1.0 - tau) * x + tau * target
    legs = tuple(float(v) for v in z if v > 0.0)
    return rescale(StarTree(legs).to_graph(), "diameter")


def phi(g: MetricGraph, t: float, config: Optional[Config] = None) -> MetricGraph:
    """Point ``t`` of the contraction of a diameter-1 graph onto the unit segment.

    On [0, 1/3] each edge grows a leaf of length 3t*l(e) at both of its
    ends; on [1/3, 2/3] the old edges shrink by the factor (2 - 3t) while
    the leaves keep length l(e); on [2/3, 1] the star left behind moves in
    a straight line of simplex coordinates to the two-leg equal star.
    Every stage is rescaled to diameter 1.
    """
    cfg = resolve(config)
    _check_unit(t, "t")
    require_diameter_one(g, max(cfg.tolerance, 1e-9))
    if t == 0.0:
        return g
    if t == 1.0:
        return segment(1.0)
    if t <= _GROW_END:
        stage = _with_leaves(g, 1.0, 3.0 * t)
    elif t < _SHRINK_END:
        stage = _with_leaves(g, 2.0 - 3.0 * t, 1.0)
    else:
        return _straighten(_star_of(g), 3.0 * t - 2.0)
    logger.debug("phi at t=%.4f: %d edges", t, len(stage.edges))
    return rescale(stage, "diameter")


def psi(t: FlatTorus, s: float, config: Optional[Config] = None) -> FlatTorus:
    """Diameter-1 rescaling of the torus with metric (1-s)*d times a circle of radius s.

    The circle is R/Z with Gram ``(2*pi*s)**2``; at ``s = 1`` only the
    circle of circumference 2 remains.
    """
    cfg = resolve(config)
    _check_unit(s, "s")
    size = torus_diameter(t, config=cfg)
    if not size.contains(1.0, slack=cfg.cover_tolerance):
        raise BadParameter(f"expected a diameter-1 torus, got diameter in [{size.lo}, {size.hi}]")
    if s == 0.0:
        return t
    if s == 1.0:
        return FlatTorus.from_matrix(CIRCLE_GRAM)
    n = t.dim
    gram = np.zeros((n + 1, n + 1))
    gram[:n, :n] = (1.0 - s) ** 2 * t.matrix
    gram[n, n] = (2.0 * np.pi * s) ** 2
    return rescale_torus(FlatTorus.from_matrix(gram), "diameter", config=cfg)


class JoinStratum(NamedTuple):
    family: str
    genus: int

    def to_dict(self) -> Dict[str, object]:
        return {"family": self.family, "genus": self.genus}


def join_stratum(point: Union[MetricGraph, FlatTorus]) -> JoinStratum:
    """Smallest finite piece of the join that contains ``point``."""
    if isinstance(point, MetricGraph):
        return JoinStratum("curves", minimal_stratum(point))
    if isinstance(point, FlatTorus):
        return JoinStratum("av", point.dim)
    raise InvalidInput(f"no join stratum for {type(point).__name__}")


def phi_path(
    g: MetricGraph, ts: Iterable[float], config: Optional[Config] = None
) -> List[Tuple[float, MetricGraph]]:
    return [(float(t), phi(g, float(t), config)) for t in ts]


def psi_path(
    t: FlatTorus, ss: Iterable[float], config: Optional[Config] = None
) -> List[Tuple[float, FlatTorus]]:
    return [(float(s), psi(t, float(s), config)) for s in ss]
