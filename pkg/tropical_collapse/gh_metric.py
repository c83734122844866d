"""Certified Gromov-Hausdorff intervals between compact metric spaces.

Spaces are replaced by finite nets with exact distance matrices.  The
lower bound combines the diameter gap with a packing argument; the upper
bound is the distortion of an explicit correspondence found by local
search.  Both are widened by the net meshes, so the interval always
brackets the distance between the ambient spaces.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .config import Config, resolve
from .errors import BadParameter, InvalidInput, TooLarge
from .lattice_torus import _box_radii, distance_to_lattice, lll_reduce_gram
from .logging_utils import get_logger
from .metric_graph import vertex_distances
from .models import FiniteNet, FlatTorus, GHInterval, MetricGraph, PointSpace

logger = get_logger(__name__)

Space = Union[MetricGraph, FlatTorus, PointSpace]


# --------------------------------------------------------------------------
# nets
# --------------------------------------------------------------------------

def net_of_graph(g: MetricGraph, spacing: float) -> FiniteNet:
    """Vertices plus evenly spaced interior points on every edge."""
    if not spacing > 0:
        raise BadParameter("spacing must be positive")
    index, vdist = vertex_distances(g)
    names: List[str] = list(g.vertices)
    starts = [index[v] for v in g.vertices]
    ends = list(starts)
    offsets = [0.0] * len(g.vertices)
    spans = [0.0] * len(g.vertices)
    owner = [-1] * len(g.vertices)
    mesh = 0.0
    for k, edge in enumerate(g.edges):
        pieces = max(1, math.ceil(edge.length / spacing - 1e-12))
        step = edge.length / pieces
        mesh = max(mesh, step / 2.0)
        for j in range(1, pieces):
            names.append(f"{edge.id}@{j * step:.6g}")
            starts.append(index[edge.ends[0]])
            ends.append(index[edge.ends[1]])
            offsets.append(j * step)
            spans.append(edge.length)
            owner.append(k)

    a = np.array(starts)
    b = np.array(ends)
    s = np.array(offsets)
    length = np.array(spans)
    to_vertex = np.minimum(s[:, None] + vdist[a, :], (length - s)[:, None] + vdist[b, :])
    dist = np.minimum(s[:, None] + to_vertex[:, a].T, (length - s)[:, None] + to_vertex[:, b].T)
    edge_of = np.array(owner)
    same = (edge_of[:, None] == edge_of[None, :]) & (edge_of[:, None] >= 0)
    dist = np.where(same, np.minimum(dist, np.abs(s[:, None] - s[None, :])), dist)
    dist = np.minimum(dist, dist.T)
    np.fill_diagonal(dist, 0.0)
    logger.debug("graph net: %s points, mesh %.4g", len(names), mesh)
    return FiniteNet(tuple(names), dist, mesh)


def net_of_torus(
    t: FlatTorus, spacing: float, config: Optional[Config] = None
) -> FiniteNet:
    """Grid in reduced coordinates; distances use the homogeneity of the torus."""
    cfg = resolve(config)
    if not spacing > 0:
        raise BadParameter("spacing must be positive")
    if t.dim > cfg.max_net_dim:
        raise TooLarge(f"torus nets are capped at dimension {cfg.max_net_dim}")
    reduced = lll_reduce_gram(t.matrix)
    lengths = np.sqrt(np.diag(reduced.gram))

    def grid_counts(h: float) -> np.ndarray:
        return np.maximum(1, np.ceil(lengths / h - 1e-12)).astype(int)

    counts = grid_counts(spacing)
    requested = spacing
    while int(np.prod(counts)) > cfg.max_net_points:
        spacing *= 1.1
        counts = grid_counts(spacing)
    if spacing != requested:
        logger.warning(
            "torus net spacing raised from %.4g to %.4g to stay within %s points",
            requested,
            spacing,
            cfg.max_net_points,
        )

    grid = np.array(np.unravel_index(np.arange(int(np.prod(counts))), counts)).T
    coords = grid / counts
    values = distance_to_lattice(t, coords @ reduced.basis_change.T, reduced)
    strides = np.cumprod(np.concatenate([counts[1:], [1]])[::-1])[::-1]
    flat = np.zeros((len(grid), len(grid)), dtype=np.int64)
    for axis in range(t.dim):
        column = grid[:, axis]
        flat += ((column[:, None] - column[None, :]) % counts[axis]) * strides[axis]
    dist = values[flat]
    dist = np.minimum(dist, dist.T)
    np.fill_diagonal(dist, 0.0)
    mesh = float(_box_radii(reduced.gram, (0.5 / counts)[None, :])[0])
    names = tuple("(" + ",".join(f"{k}/{n}" for k, n in zip(row, counts)) + ")" for row in grid)
    logger.debug("torus net: %s points, mesh %.4g", len(names), mesh)
    return FiniteNet(names, dist, mesh)


def point_net() -> FiniteNet:
    return FiniteNet(("pt",), np.zeros((1, 1)), 0.0)


def net_of_space(space: Space, spacing: float, config: Optional[Config] = None) -> FiniteNet:
    if isinstance(space, MetricGraph):
        return net_of_graph(space, spacing)
    if isinstance(space, FlatTorus):
        return net_of_torus(space, spacing, config)
    if isinstance(space, PointSpace):
        return point_net()
    raise InvalidInput(f"cannot build a net of {type(space).__name__}")


# --------------------------------------------------------------------------
# lower bound
# --------------------------------------------------------------------------

def _greedy_separated(dist: np.ndarray, delta: float, order: Iterable[int]) -> int:
    blocked = np.zeros(len(dist), dtype=bool)
    count = 0
    for p in order:
        if not blocked[p]:
            count += 1
            blocked |= dist[p] < delta
    return count


def _farthest_order(dist: np.ndarray, first: int) -> List[int]:
    nearest = dist[first].copy()
    nearest[first] = -1.0
    order = [first]
    for _ in range(len(dist) - 1):
        nxt = int(np.argmax(nearest))
        order.append(nxt)
        nearest = np.minimum(nearest, dist[nxt])
        nearest[order] = -1.0
    return order


def _greedy_orders(dist: np.ndarray, starts: int = 8) -> List[Sequence[int]]:
    """Index order plus farthest-first traversals from a few spread-out starts."""
    spread = _farthest_order(dist, int(np.argmax(dist.max(axis=1))))
    orders: List[Sequence[int]] = [range(len(dist)), spread]
    orders.extend(_farthest_order(dist, first) for first in spread[1:starts])
    return orders


def _packing_number(dist: np.ndarray, delta: float, orders: Sequence[Sequence[int]]) -> int:
    """Largest greedy delta-separated set over the given visiting orders."""
    return max(_greedy_separated(dist, delta, order) for order in orders)


def _cluster_cover(dist: np.ndarray, eta: float, limit: int) -> int:
    """Count clusters of diameter < eta covering the net; stops at ``limit``."""
    n = len(dist)
    uncovered = np.ones(n, dtype=bool)
    eccentricity = dist.max(axis=1)
    count = 0
    while uncovered.any():
        count += 1
        if count >= limit:
            return count
        centre = int(np.argmax(np.where(uncovered, eccentricity, -1.0)))
        reach = dist[centre].copy()
        uncovered[centre] = False
        nearby = np.nonzero(uncovered & (reach < eta))[0]
        for q in nearby[np.argsort(dist[centre, nearby], kind="stable")]:
            if reach[q] < eta:
                uncovered[q] = False
                reach = np.maximum(reach, dist[q])
    return count


def _packing_bound(a: FiniteNet, b: FiniteNet, scales: int) -> float:
    """Largest t with cover(b, delta - 2t) < packing(a, delta) for a tested delta.

    A correspondence of distortion < 2t sends a delta-separated k-set of
    ``a`` to k points of ``b`` pairwise more than delta - 2t apart, which
    fewer than k clusters of diameter < delta - 2t cannot hold.
    """
    if len(a) < 2:
        return 0.0
    distances = np.unique(a.dist[np.triu_indices(len(a), 1)])
    distances = distances[distances > 0]
    if not len(distances):
        return 0.0
    if len(distances) > 4 * scales:
        picks = np.unique(np.linspace(0, len(distances) - 1, 4 * scales).round().astype(int))
        distances = distances[picks]
    # deltas sit just below attained distances
    deltas = distances * (1.0 - 1e-12)
    orders = _greedy_orders(a.dist)
    best = 0.0
    for delta in deltas:
        k = _packing_number(a.dist, float(delta), orders)
        if k < 2 or best >= delta / 2.0:
            continue
        hi = float(delta) / 2.0
        if _cluster_cover(b.dist, float(delta) - 2.0 * best, k) >= k:
            continue
        lo = best
        for _ in range(20):
            mid = (lo + hi) / 2.0
            if _cluster_cover(b.dist, float(delta) - 2.0 * mid, k) < k:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-4 * delta:
                break
        best = max(best, lo)
    return best


def gh_lower(a: FiniteNet, b: FiniteNet, config: Optional[Config] = None) -> float:
    """Valid lower bound for the GH distance of the spaces the nets sample."""
    cfg = resolve(config)
    diameter_gap = abs(a.diameter - b.diameter) / 2.0
    packing = max(
        _packing_bound(a, b, cfg.packing_scales),
        _packing_bound(b, a, cfg.packing_scales),
    )
    value = max(diameter_gap, packing) - a.mesh - b.mesh
    return max(0.0, value)


# --------------------------------------------------------------------------
# upper bound
# --------------------------------------------------------------------------

def distortion(
    a: FiniteNet, b: FiniteNet, correspondence: Sequence[Tuple[int, int]]
) -> float:
    """Exact distortion of a correspondence given as (index in a, index in b) pairs."""
    pairs = np.asarray(list(correspondence), dtype=int).reshape(-1, 2)
    if set(pairs[:, 0]) != set(range(len(a))) or set(pairs[:, 1]) != set(range(len(b))):
        raise BadParameter("a correspondence must cover every point of both nets")
    return _distortion(a.dist, b.dist, pairs[:, 0], pairs[:, 1])


def _distortion(da: np.ndarray, db: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> float:
    worst = 0.0
    for start in range(0, len(xs), 512):
        rows_a = da[xs[start : start + 512]][:, xs]
        rows_b = db[ys[start : start + 512]][:, ys]
        worst = max(worst, float(np.abs(rows_a - rows_b).max()))
    return worst


def _seed(
    da: np.ndarray, db: np.ndarray, rng: np.random.Generator, anchored: bool
) -> Tuple[np.ndarray, np.ndarray]:
    """Profile-matching start: anchors in a, matched greedily in b."""
    first_a = int(np.argmax(da.max(axis=1))) if anchored else int(rng.integers(len(da)))
    anchors_a = _farthest_order(da, first_a)[: min(8, len(da))]
    first_b = int(np.argmax(db.max(axis=1))) if anchored else int(rng.integers(len(db)))
    anchors_b = [first_b]
    for anchor in anchors_a[1:]:
        profile = da[anchor, anchors_a[: len(anchors_b)]]
        mismatch = np.abs(db[:, anchors_b] - profile[None, :]).max(axis=1)
        anchors_b.append(int(np.argmin(mismatch)))
    pa = da[:, anchors_a]
    pb = db[:, anchors_b]
    to_b = np.empty(len(da), dtype=int)
    for start in range(0, len(da), 256):
        cost = np.abs(pa[start : start + 256, None, :] - pb[None, :, :]).max(axis=2)
        to_b[start : start + 256] = cost.argmin(axis=1)
    to_a = np.empty(len(db), dtype=int)
    for start in range(0, len(db), 256):
        cost = np.abs(pb[start : start + 256, None, :] - pa[None, :, :]).max(axis=2)
        to_a[start : start + 256] = cost.argmin(axis=1)
    return to_b, to_a


def _search(
    da: np.ndarray, db: np.ndarray, moves: int, seed: int, anchored: bool
) -> float:
    """Local search over single-point reassignments; returns the exact distortion."""
    rng = np.random.default_rng(seed)
    to_b, to_a = _seed(da, db, rng, anchored)
    n_a, n_b = len(da), len(db)
    xs = np.concatenate([np.arange(n_a), to_a])
    ys = np.concatenate([to_b, np.arange(n_b)])
    da32 = da.astype(np.float32)
    db32 = db.astype(np.float32)
    matrix = np.abs(da32[np.ix_(xs, xs)] - db32[np.ix_(ys, ys)])
    row_max = matrix.max(axis=1)
    size = len(xs)
    for _ in range(moves):
        if rng.random() < 0.5:
            i = int(np.argmax(row_max))
        else:
            i = int(rng.integers(size))
        if i < n_a:
            candidate_x, candidate_y = xs[i], int(rng.integers(n_b))
        else:
            candidate_x, candidate_y = int(rng.integers(n_a)), ys[i]
        row = np.abs(da32[candidate_x, xs] - db32[candidate_y, ys])
        row[i] = abs(float(da32[candidate_x, candidate_x]) - float(db32[candidate_y, candidate_y]))
        new_max = float(row.max())
        if new_max >= row_max[i]:
            continue
        old_column = matrix[:, i].copy()
        xs[i], ys[i] = candidate_x, candidate_y
        matrix[i, :] = row
        matrix[:, i] = row
        stale = np.nonzero(old_column >= row_max)[0]
        row_max = np.maximum(row_max, row)
        row_max[i] = new_max
        for j in stale:
            if j != i:
                row_max[j] = matrix[j].max()
    return _distortion(da, db, xs, ys)


def gh_upper(
    a: FiniteNet,
    b: FiniteNet,
    budget: Optional[int] = None,
    seed: Optional[int] = None,
    config: Optional[Config] = None,
) -> float:
    """Half the best correspondence distortion found, plus both meshes."""
    cfg = resolve(config)
    budget = cfg.budget if budget is None else budget
    seed = cfg.seed if seed is None else seed
    if budget < 1:
        raise BadParameter("budget must be at least 1")
    restarts = min(max(budget // 100, 1), cfg.max_restarts)
    moves = budget // restarts
    jobs = [(moves, seed + r, r == 0) for r in range(restarts)]

    def run(job: Tuple[int, int, bool]) -> float:
        return _search(a.dist, b.dist, *job)

    if cfg.workers > 1 and restarts > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(job) for job in jobs]
    best = min(results)
    logger.debug(
        "correspondence search: %s restarts, best distortion %.6g (restart %s)",
        restarts,
        best,
        results.index(best),
    )
    return best / 2.0 + a.mesh + b.mesh


def gh_interval(
    space_a: Space,
    space_b: Space,
    spacing: Optional[float] = None,
    budget: Optional[int] = None,
    seed: Optional[int] = None,
    config: Optional[Config] = None,
) -> GHInterval:
    cfg = resolve(config)
    spacing = cfg.spacing if spacing is None else spacing
    net_a = net_of_space(space_a, spacing, cfg)
    net_b = net_of_space(space_b, spacing, cfg)
    return interval_of_nets(net_a, net_b, budget, seed, cfg)


def interval_of_nets(
    net_a: FiniteNet,
    net_b: FiniteNet,
    budget: Optional[int] = None,
    seed: Optional[int] = None,
    config: Optional[Config] = None,
) -> GHInterval:
    upper = gh_upper(net_a, net_b, budget, seed, config)
    lower = min(gh_lower(net_a, net_b, config), upper)
    return GHInterval(lower, upper, net_a.mesh, net_b.mesh)
