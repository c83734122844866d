"""Flat tori R^n / Z^n with a Gram matrix.

All routines work in LLL-reduced coordinates and map results back through
the unimodular change of basis, so answers are stated in the coordinates
of the torus that was passed in.
"""

from __future__ import annotations

import itertools
import math
from typing import Iterator, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .config import Config, resolve
from .errors import BadParameter, NoConvergence, TooLarge
from .logging_utils import get_logger
from .models import CertifiedValue, FlatTorus

logger = get_logger(__name__)

IntVector = Tuple[int, ...]


# --------------------------------------------------------------------------
# reduction
# --------------------------------------------------------------------------

def _gram_schmidt(basis: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    n = basis.shape[0]
    star = np.zeros_like(basis)
    mu = np.zeros((n, n))
    for i in range(n):
        star[i] = basis[i]
        for j in range(i):
            norm = float(star[j] @ star[j])
            if norm > 1e-300:
                mu[i, j] = float(basis[i] @ star[j]) / norm
                star[i] = star[i] - mu[i, j] * star[j]
    return star, mu


def lll_reduce(basis: np.ndarray, delta: float = 0.99) -> Tuple[np.ndarray, np.ndarray]:
    """LLL-reduce the rows of ``basis``.

    Returns the reduced rows and the integer unimodular ``H`` with
    ``reduced = H @ basis``.
    """
    if not 0.25 < delta < 1.0:
        raise BadParameter("LLL parameter delta must lie in (1/4, 1)")
    rows = np.array(basis, dtype=float, copy=True)
    n = rows.shape[0]
    transform = np.eye(n, dtype=np.int64)
    k = 1
    while k < n:
        star, mu = _gram_schmidt(rows)
        for j in range(k - 1, -1, -1):
            if abs(mu[k, j]) > 0.5:
                q = int(round(mu[k, j]))
                rows[k] -= q * rows[j]
                transform[k] -= q * transform[j]
                star, mu = _gram_schmidt(rows)
        if star[k] @ star[k] >= (delta - mu[k, k - 1] ** 2) * (star[k - 1] @ star[k - 1]):
            k += 1
        else:
            rows[[k, k - 1]] = rows[[k - 1, k]]
            transform[[k, k - 1]] = transform[[k - 1, k]]
            k = max(k - 1, 1)
    return rows, transform


class ReducedLattice(NamedTuple):
    gram: np.ndarray  # U^T G U
    basis_change: np.ndarray  # U, integer, columns are the new basis in old coordinates
    inverse: np.ndarray  # U^{-1}, integer


def lll_reduce_gram(gram: np.ndarray, delta: float = 0.99) -> ReducedLattice:
    """Reduce the lattice Z^n carrying the form ``gram``."""
    matrix = np.asarray(gram, dtype=float)
    factor = np.linalg.cholesky(matrix)
    _, transform = lll_reduce(factor, delta)
    change = transform.T.astype(np.int64)
    inverse = np.rint(np.linalg.inv(change)).astype(np.int64)
    reduced = change.T @ matrix @ change
    return ReducedLattice((reduced + reduced.T) / 2.0, change, inverse)


# --------------------------------------------------------------------------
# enumeration
# --------------------------------------------------------------------------

def _pohst_coefficients(gram: np.ndarray) -> np.ndarray:
    upper = np.linalg.cholesky(gram).T
    q = upper / np.diag(upper)[:, None]
    np.fill_diagonal(q, np.diag(upper) ** 2)
    return q


def _enumerate(
    gram: np.ndarray, bound: float, centre: Optional[np.ndarray] = None
) -> Iterator[Tuple[float, IntVector]]:
    """Fincke-Pohst: every integer x with (x - centre)^T G (x - centre) <= bound."""
    q = _pohst_coefficients(gram)
    n = q.shape[0]
    target = np.zeros(n) if centre is None else np.asarray(centre, dtype=float)
    slack = 1e-12 * max(1.0, bound)
    x = [0] * n

    def recurse(i: int, remaining: float, used_total: float) -> Iterator[Tuple[float, IntVector]]:
        middle = target[i] - sum(q[i, j] * (x[j] - target[j]) for j in range(i + 1, n))
        radius = math.sqrt(max(remaining, 0.0) / q[i, i])
        for value in range(math.ceil(middle - radius - 1e-9), math.floor(middle + radius + 1e-9) + 1):
            used = q[i, i] * (value - middle) ** 2
            if used > remaining + slack:
                continue
            x[i] = value
            if i == 0:
                yield used_total + used, tuple(x)
            else:
                yield from recurse(i - 1, remaining - used, used_total + used)
        x[i] = 0

    yield from recurse(n - 1, bound, 0.0)


def _sign_normalized(vector: IntVector) -> IntVector:
    for value in vector:
        if value:
            return vector if value > 0 else tuple(-v for v in vector)
    return vector


def _check_dim(t: FlatTorus, cap: int, what: str) -> None:
    if t.dim > cap:
        raise TooLarge(f"{what} is capped at dimension {cap}, got {t.dim}")


def short_vectors(
    t: FlatTorus, bound: float, config: Optional[Config] = None
) -> List[Tuple[float, IntVector]]:
    """Nonzero lattice vectors of squared norm <= bound, one per +/- pair."""
    cfg = resolve(config)
    _check_dim(t, cfg.max_svp_dim, "short vector enumeration")
    reduced = lll_reduce_gram(t.matrix)
    found = set()
    for _, coords in _enumerate(reduced.gram, bound):
        if any(coords):
            original = tuple(int(v) for v in reduced.basis_change @ np.array(coords))
            found.add(_sign_normalized(original))
    gram = t.matrix
    result = [(float(np.array(v) @ gram @ np.array(v)), v) for v in found]
    result.sort(key=lambda item: (item[0], tuple(-c for c in item[1])))
    return result


def shortest_vector(t: FlatTorus, config: Optional[Config] = None) -> Tuple[float, IntVector]:
    """Exact lambda_1 and a shortest vector (first nonzero entry positive, largest tuple)."""
    cfg = resolve(config)
    _check_dim(t, cfg.max_svp_dim, "shortest vector")
    reduced = lll_reduce_gram(t.matrix)
    bound = float(np.min(np.diag(reduced.gram))) * (1.0 + 1e-9)
    candidates = short_vectors(t, bound, cfg)
    best = candidates[0][0]
    ties = [v for norm, v in candidates if norm <= best * (1.0 + 1e-9)]
    vector = max(ties)
    logger.debug("lambda_1^2 = %.12g, %s minimal pairs", best, len(ties))
    return math.sqrt(best), vector


def closest_vector(
    t: FlatTorus, point: Sequence[float], config: Optional[Config] = None
) -> Tuple[float, IntVector]:
    """Nearest lattice vector to ``point``; Babai rounding gives the search radius."""
    cfg = resolve(config)
    _check_dim(t, cfg.max_svp_dim, "closest vector")
    target = np.asarray(point, dtype=float)
    if target.shape != (t.dim,):
        raise BadParameter(f"point must have {t.dim} coordinates")
    reduced = lll_reduce_gram(t.matrix)
    local = reduced.inverse @ target
    babai = np.rint(local)
    offset = local - babai
    bound = float(offset @ reduced.gram @ offset) * (1.0 + 1e-9) + 1e-15
    best = min(_enumerate(reduced.gram, bound, local), key=lambda item: item[0])
    vector = tuple(int(v) for v in reduced.basis_change @ np.array(best[1]))
    return math.sqrt(max(best[0], 0.0)), vector


def _candidate_offsets(reduced: np.ndarray) -> np.ndarray:
    radius = 0.5 * float(np.sum(np.sqrt(np.diag(reduced))))
    inverse_diag = np.diag(np.linalg.inv(reduced))
    reach = [int(math.ceil(0.5 + radius * math.sqrt(d))) for d in inverse_diag]
    ranges = [range(-r, r + 1) for r in reach]
    return np.array(list(itertools.product(*ranges)), dtype=float)


def distance_to_lattice(
    t: FlatTorus, points: np.ndarray, reduced: Optional[ReducedLattice] = None
) -> np.ndarray:
    """Distance in the torus from each row of ``points`` to the origin."""
    reduced = reduced or lll_reduce_gram(t.matrix)
    coords = np.atleast_2d(np.asarray(points, dtype=float)) @ reduced.inverse.T
    coords = coords - np.floor(coords + 0.5)
    offsets = _candidate_offsets(reduced.gram)
    chunk = max(1, 2_000_000 // max(1, len(offsets) * t.dim))
    out = np.empty(len(coords))
    for start in range(0, len(coords), chunk):
        block = coords[start : start + chunk]
        diff = block[:, None, :] - offsets[None, :, :]
        norms = np.einsum("mki,ij,mkj->mk", diff, reduced.gram, diff)
        out[start : start + chunk] = np.sqrt(np.maximum(norms.min(axis=1), 0.0))
    return out


# --------------------------------------------------------------------------
# covering radius and derived quantities
# --------------------------------------------------------------------------

def _box_radii(gram: np.ndarray, half_widths: np.ndarray) -> np.ndarray:
    signs = np.array(list(itertools.product((-1.0, 1.0), repeat=gram.shape[0])))
    corners = half_widths[:, None, :] * signs[None, :, :]
    norms = np.einsum("bsi,ij,bsj->bs", corners, gram, corners)
    return np.sqrt(norms.max(axis=1))


def covering_radius(
    t: FlatTorus, tol: Optional[float] = None, config: Optional[Config] = None
) -> CertifiedValue:
    """Certified max over the torus of the distance to the origin.

    Boxes of the reduced fundamental cube are refined while their
    Lipschitz upper bound exceeds the best value found so far.
    """
    cfg = resolve(config)
    tol = cfg.cover_tolerance if tol is None else tol
    if tol <= 0:
        raise BadParameter("tolerance must be positive")
    _check_dim(t, cfg.max_cover_dim, "covering radius")
    reduced = lll_reduce_gram(t.matrix)
    n = t.dim
    scale = np.sqrt(np.diag(reduced.gram))
    centres = np.zeros((1, n))
    halves = np.full((1, n), 0.5)
    lo = 0.0
    rounds = 0
    while True:
        rounds += 1
        points = centres @ reduced.basis_change.T
        values = distance_to_lattice(t, points, reduced)
        upper = values + _box_radii(reduced.gram, halves)
        lo = max(lo, float(values.max()))
        hi = max(lo, float(upper.max()))
        if hi - lo <= tol:
            logger.debug("covering radius in [%.9g, %.9g] after %s rounds", lo, hi, rounds)
            return CertifiedValue(lo, hi)
        keep = upper > lo
        centres, halves = centres[keep], halves[keep]
        if 2 * len(centres) > cfg.cover_max_boxes:
            raise NoConvergence(
                f"covering radius refinement exceeded {cfg.cover_max_boxes} boxes",
                best=CertifiedValue(lo, hi),
            )
        axis = np.argmax(halves * scale, axis=1)
        rows = np.arange(len(centres))
        halves = halves.copy()
        halves[rows, axis] /= 2.0
        shift = np.zeros_like(centres)
        shift[rows, axis] = halves[rows, axis]
        centres = np.concatenate([centres - shift, centres + shift])
        halves = np.concatenate([halves, halves])


def torus_diameter(
    t: FlatTorus, tol: Optional[float] = None, config: Optional[Config] = None
) -> CertifiedValue:
    return covering_radius(t, tol, config)


def torus_volume(t: FlatTorus) -> float:
    return math.sqrt(float(np.linalg.det(t.matrix)))


def injectivity_radius(t: FlatTorus, config: Optional[Config] = None) -> float:
    return shortest_vector(t, config)[0] / 2.0


def rescale_torus(
    t: FlatTorus,
    mode: str = "diameter",
    tol: Optional[float] = None,
    config: Optional[Config] = None,
) -> FlatTorus:
    if mode == "diameter":
        factor = 1.0 / covering_radius(t, tol, config).mid
    elif mode == "volume":
        factor = torus_volume(t) ** (-1.0 / t.dim)
    else:
        raise BadParameter(f"unknown rescale mode {mode!r}")
    return FlatTorus.from_matrix(t.matrix * factor**2)


# --------------------------------------------------------------------------
# isometry
# --------------------------------------------------------------------------

def lattice_isometric(
    a: FlatTorus,
    b: FlatTorus,
    tol: Optional[float] = None,
    config: Optional[Config] = None,
) -> Tuple[bool, Optional[np.ndarray]]:
    """Search an integer unimodular U with U^T gram_a U = gram_b.

    Columns of the witness are matched one at a time against short
    vectors of ``a`` with the right norms and inner products.
    """
    cfg = resolve(config)
    tol = cfg.tolerance if tol is None else tol
    if a.dim != b.dim:
        return False, None
    _check_dim(a, cfg.max_iso_dim, "lattice isometry")
    ga, gb = a.matrix, b.matrix
    scale = max(1.0, float(np.max(np.abs(ga))), float(np.max(np.abs(gb))))
    atol = tol * scale
    det_a, det_b = float(np.linalg.det(ga)), float(np.linalg.det(gb))
    if not math.isclose(det_a, det_b, rel_tol=max(tol, 1e-9) * 10 * a.dim, abs_tol=atol):
        return False, None

    red_a = lll_reduce_gram(ga)
    red_b = lll_reduce_gram(gb)
    target = red_b.gram
    bound = float(np.max(np.diag(target))) + atol
    pool = []
    for _, coords in _enumerate(red_a.gram, bound):
        if any(coords):
            vector = np.array(coords, dtype=float)
            pool.append((float(vector @ red_a.gram @ vector), vector))

    n = a.dim
    options = [
        [v for norm, v in pool if abs(norm - target[k, k]) <= atol] for k in range(n)
    ]
    if any(not opts for opts in options):
        return False, None

    chosen: List[np.ndarray] = []

    def extend(k: int) -> Optional[np.ndarray]:
        if k == n:
            witness = np.column_stack(chosen)
            if abs(round(float(np.linalg.det(witness)))) != 1:
                return None
            return witness
        for vector in options[k]:
            image = red_a.gram @ vector
            if all(abs(float(image @ prev) - target[k, j]) <= atol for j, prev in enumerate(chosen)):
                chosen.append(vector)
                found = extend(k + 1)
                if found is not None:
                    return found
                chosen.pop()
        return None

    witness = extend(0)
    if witness is None:
        return False, None
    change = red_a.basis_change @ np.rint(witness).astype(np.int64) @ red_b.inverse
    return True, change
