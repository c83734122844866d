"""Period points, Siegel sets and the collapse limits of principally polarized tori."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .config import Config, resolve
from .errors import (
    BadParameter,
    InadmissibleOrdering,
    InvalidInput,
    MixedGrowth,
    NoConvergence,
    NotDegenerate,
    NotModelForm,
    NotUpperHalfPlane,
    TooLarge,
)
from .lattice_torus import lll_reduce_gram, rescale_torus
from .logging_utils import get_logger
from .models import FlatTorus, _symmetric, check_positive_definite

logger = get_logger(__name__)

Matrix = Tuple[Tuple[float, ...], ...]
ArrayLike = Union[Sequence[Sequence[float]], np.ndarray]


def _frozen(matrix: np.ndarray) -> Matrix:
    return tuple(tuple(float(x) for x in row) for row in matrix)


# --------------------------------------------------------------------------
# period points
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PeriodPoint:
    """Z = X + iY in the Siegel upper half space."""

    X: Matrix
    Y: Matrix

    def __post_init__(self) -> None:
        x = _symmetric(np.atleast_2d(np.asarray(self.X, dtype=float)), "X")
        y = _symmetric(np.atleast_2d(np.asarray(self.Y, dtype=float)), "Y")
        if x.shape != y.shape:
            raise InvalidInput("X and Y must have the same size")
        check_positive_definite(y, "Y")
        object.__setattr__(self, "X", _frozen(x))
        object.__setattr__(self, "Y", _frozen(y))

    @classmethod
    def from_matrices(cls, x: ArrayLike, y: ArrayLike) -> "PeriodPoint":
        return cls(
            _frozen(np.atleast_2d(np.asarray(x, dtype=float))),
            _frozen(np.atleast_2d(np.asarray(y, dtype=float))),
        )

    @classmethod
    def from_tau(cls, tau: complex) -> "PeriodPoint":
        if not tau.imag > 0:
            raise NotUpperHalfPlane(f"Im(tau) must be positive, got {tau}")
        return cls(((tau.real,),), ((tau.imag,),))

    @property
    def g(self) -> int:
        return len(self.X)

    @property
    def x(self) -> np.ndarray:
        return np.array(self.X, dtype=float)

    @property
    def y(self) -> np.ndarray:
        return np.array(self.Y, dtype=float)

    @property
    def z(self) -> np.ndarray:
        return self.x + 1j * self.y

    @property
    def tau(self) -> complex:
        if self.g != 1:
            raise BadParameter("tau is only defined in genus 1")
        return complex(self.X[0][0], self.Y[0][0])

    def to_dict(self) -> Dict[str, object]:
        return {"g": self.g, "X": [list(r) for r in self.X], "Y": [list(r) for r in self.Y]}

    @classmethod
    def from_dict(cls, payload: Mapping[str, object]) -> "PeriodPoint":
        if "tau" in payload:
            raw = payload["tau"]
            try:
                tau = complex(*raw) if isinstance(raw, (list, tuple)) else complex(str(raw).replace(" ", ""))
            except (TypeError, ValueError) as exc:
                raise InvalidInput(f"malformed tau: {raw!r}") from exc
            return cls.from_tau(tau)
        try:
            return cls.from_matrices(payload["X"], payload["Y"])  # type: ignore[arg-type]
        except KeyError as exc:
            raise InvalidInput(f"period point is missing {exc}") from exc


@dataclass(frozen=True)
class JacobiDecomposition:
    """Y = B^T diag(d) B with B unit upper triangular."""

    B: np.ndarray
    d: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return self.B.T @ np.diag(self.d) @ self.B


def jacobi_decompose(y: np.ndarray) -> JacobiDecomposition:
    matrix = np.atleast_2d(np.asarray(y, dtype=float))
    lower = check_positive_definite(matrix, "Y")
    pivots = np.diag(lower)
    unit = (lower / pivots[None, :]).T
    return JacobiDecomposition(unit, pivots**2)


def torus_metric_matrix(z: PeriodPoint) -> FlatTorus:
    x, y = z.x, z.y
    inv = np.linalg.inv(y)
    top = np.hstack([inv, inv @ x])
    bottom = np.hstack([x @ inv, x @ inv @ x + y])
    gram = np.vstack([top, bottom])
    return FlatTorus.from_matrix((gram + gram.T) / 2.0)


def in_siegel_set(z: PeriodPoint, u: Optional[float] = None, config: Optional[Config] = None) -> bool:
    u = resolve(config).u if u is None else u
    if u <= 1:
        raise BadParameter("u must exceed 1")
    jac = jacobi_decompose(z.y)
    g = z.g
    if np.any(np.abs(z.x) >= u):
        return False
    for i in range(g):
        for j in range(i + 1, g):
            if abs(1.0 - jac.B[i, j]) >= u:
                return False
    if not 1.0 < u * jac.d[0]:
        return False
    return all(jac.d[i] < u * jac.d[i + 1] for i in range(g - 1))


# --------------------------------------------------------------------------
# symplectic action and reduction
# --------------------------------------------------------------------------

def _blocks(gamma: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    g = gamma.shape[0] // 2
    return gamma[:g, :g], gamma[:g, g:], gamma[g:, :g], gamma[g:, g:]


def is_symplectic(gamma: np.ndarray) -> bool:
    matrix = np.asarray(gamma)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] % 2:
        return False
    if not np.array_equal(matrix, np.rint(matrix)):
        return False
    g = matrix.shape[0] // 2
    j = np.block([[np.zeros((g, g)), np.eye(g)], [-np.eye(g), np.zeros((g, g))]])
    return bool(np.array_equal(matrix.T @ j @ matrix, j))


def act(gamma: np.ndarray, z: PeriodPoint) -> PeriodPoint:
    """Z -> (AZ + B)(CZ + D)^{-1}."""
    a, b, c, d = _blocks(np.asarray(gamma, dtype=float))
    image = (a @ z.z + b) @ np.linalg.inv(c @ z.z + d)
    image = (image + image.T) / 2.0
    return PeriodPoint.from_matrices(image.real, image.imag)


def in_w(tau: complex, tol: float = 1e-12) -> bool:
    """Membership in W = {|Re| <= 1, |tau| >= 1}."""
    return abs(tau.real) <= 1.0 + tol and abs(tau) ** 2 >= 1.0 - tol


def reduce_g1(
    tau: complex, tol: float = 1e-12, config: Optional[Config] = None
) -> Tuple[complex, np.ndarray]:
    """Move tau into W by translations and inversions.

    Points of W are returned unchanged with the identity. Anything else is
    Gauss-reduced into |Re| <= 1/2, |tau| >= 1, which lies inside W.
    """
    if not tau.imag > 0:
        raise NotUpperHalfPlane(f"Im(tau) must be positive, got {tau}")
    cfg = resolve(config)
    gamma = np.eye(2, dtype=np.int64)
    if in_w(tau, tol):
        return complex(tau), gamma
    current = complex(tau)
    for _ in range(cfg.max_iter * 10):
        shift = round(current.real)
        if shift:
            current -= shift
            gamma = np.array([[1, -shift], [0, 1]], dtype=np.int64) @ gamma
        if abs(current) ** 2 < 1.0 - tol:
            current = -1.0 / current
            gamma = np.array([[0, -1], [1, 0]], dtype=np.int64) @ gamma
        else:
            break
    else:
        raise NoConvergence(
            f"genus 1 reduction of {tau} did not finish in {cfg.max_iter * 10} steps",
            best=(current, gamma),
        )
    a, b = gamma[0]
    c, d = gamma[1]
    return (a * tau + b) / (c * tau + d), gamma


@dataclass(frozen=True)
class SemiReduction:
    point: PeriodPoint
    gamma: np.ndarray
    certified: bool
    iterations: int

    def to_dict(self) -> Dict[str, object]:
        return {
            "point": self.point.to_dict(),
            "gamma": self.gamma.astype(int).tolist(),
            "certified": self.certified,
            "iterations": self.iterations,
        }


def _partial_inversion(g: int) -> np.ndarray:
    e11 = np.zeros((g, g), dtype=np.int64)
    e11[0, 0] = 1
    rest = np.eye(g, dtype=np.int64) - e11
    return np.block([[rest, -e11], [e11, rest]])


def semi_reduce(
    z: PeriodPoint,
    u: Optional[float] = None,
    max_iter: Optional[int] = None,
    config: Optional[Config] = None,
) -> SemiReduction:
    """Best-effort reduction towards a Siegel set.

    Rounds alternate an LLL change of Y-basis, the integer translation of
    X and the partial inversion on the first coordinate while |z_11| < 1.
    The returned gamma is always integral symplectic with gamma.z = point.
    """
    cfg = resolve(config)
    u = cfg.u if u is None else u
    max_iter = cfg.max_iter if max_iter is None else max_iter
    g = z.g
    if g > cfg.max_iso_dim:
        raise TooLarge(f"semi-reduction is capped at genus {cfg.max_iso_dim}")
    identity = np.eye(g, dtype=np.int64)
    total = np.eye(2 * g, dtype=np.int64)
    current = z
    iterations = 0
    for iterations in range(1, max_iter + 1):
        changed = False
        reduced = lll_reduce_gram(current.y)
        if not np.array_equal(reduced.basis_change, identity):
            step = np.block(
                [
                    [reduced.basis_change.T, np.zeros((g, g), dtype=np.int64)],
                    [np.zeros((g, g), dtype=np.int64), reduced.inverse],
                ]
            )
            current, total, changed = act(step, current), step @ total, True
        shift = np.rint(current.x).astype(np.int64)
        if np.any(shift):
            step = np.block([[identity, -shift], [np.zeros((g, g), dtype=np.int64), identity]])
            current, total, changed = act(step, current), step @ total, True
        if abs(complex(current.X[0][0], current.Y[0][0])) < 1.0 - 1e-12:
            step = _partial_inversion(g)
            current, total, changed = act(step, current), step @ total, True
        if not changed:
            break
    certified = in_siegel_set(current, u)
    logger.debug("semi-reduction: %s rounds, certified=%s", iterations, certified)
    return SemiReduction(current, total, certified, iterations)


# --------------------------------------------------------------------------
# degenerating families
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class DiagonalLaw:
    """d(i) = c * i**p."""

    c: float
    p: float

    def __post_init__(self) -> None:
        if not self.c > 0 or self.p < 0:
            raise BadParameter(f"diagonal law needs c > 0 and p >= 0, got ({self.c}, {self.p})")

    def at(self, i: float) -> float:
        return self.c * float(i) ** self.p


@dataclass(frozen=True)
class SiegelFamily:
    X: Matrix
    B: Matrix
    laws: Tuple[DiagonalLaw, ...]
    u: float = 3.0

    def __post_init__(self) -> None:
        x = _symmetric(np.atleast_2d(np.asarray(self.X, dtype=float)), "X")
        b = np.atleast_2d(np.asarray(self.B, dtype=float))
        g = len(self.laws)
        if x.shape != (g, g) or b.shape != (g, g):
            raise InvalidInput("X, B and laws must agree on g")
        if not np.allclose(np.diag(b), 1.0) or np.any(np.abs(np.tril(b, -1)) > 1e-12):
            raise InvalidInput("B must be unit upper triangular")
        if self.u <= 1:
            raise BadParameter("u must exceed 1")
        object.__setattr__(self, "X", _frozen(x))
        object.__setattr__(self, "B", _frozen(b))

    @classmethod
    def build(
        cls,
        laws: Sequence[Tuple[float, float]],
        x: Optional[np.ndarray] = None,
        b: Optional[np.ndarray] = None,
        u: float = 3.0,
    ) -> "SiegelFamily":
        g = len(laws)
        x = np.zeros((g, g)) if x is None else np.asarray(x, dtype=float)
        b = np.eye(g) if b is None else np.asarray(b, dtype=float)
        return cls(_frozen(x), _frozen(b), tuple(DiagonalLaw(float(c), float(p)) for c, p in laws), u)

    @property
    def g(self) -> int:
        return len(self.laws)

    @property
    def rates(self) -> Tuple[float, ...]:
        return tuple(law.p for law in self.laws)

    @property
    def constants(self) -> Tuple[float, ...]:
        return tuple(law.c for law in self.laws)

    def member(self, i: float) -> PeriodPoint:
        b = np.array(self.B)
        d = np.diag([law.at(i) for law in self.laws])
        return PeriodPoint.from_matrices(np.array(self.X), b.T @ d @ b)

    def member_torus(self, i: float, config: Optional[Config] = None) -> FlatTorus:
        return rescale_torus(torus_metric_matrix(self.member(i)), "diameter", config=config)

    def to_dict(self) -> Dict[str, object]:
        return {
            "g": self.g,
            "X": [list(r) for r in self.X],
            "B": [list(r) for r in self.B],
            "laws": [{"c": law.c, "p": law.p} for law in self.laws],
            "u": self.u,
        }

    @classmethod
    def from_dict(cls, payload: Mapping[str, object]) -> "SiegelFamily":
        try:
            laws = [(item["c"], item["p"]) for item in payload["laws"]]  # type: ignore[index,union-attr]
        except (KeyError, TypeError) as exc:
            raise InvalidInput(f"malformed family document: {exc}") from exc
        declared = payload.get("g")
        if declared is not None and int(declared) != len(laws):  # type: ignore[arg-type]
            raise InvalidInput(f"declared g={declared} but {len(laws)} laws given")
        return cls.build(
            laws,
            payload.get("X"),  # type: ignore[arg-type]
            payload.get("B"),  # type: ignore[arg-type]
            float(payload.get("u", 3.0)),  # type: ignore[arg-type]
        )


def detect_rank(family: SiegelFamily) -> Tuple[int, bool]:
    """Torus rank r of the degeneration and whether the family degenerates."""
    laws = family.laws
    for j in range(family.g - 1):
        low, high = laws[j], laws[j + 1]
        if low.p < high.p or (low.p == high.p and low.c < family.u * high.c):
            continue
        raise InadmissibleOrdering(
            f"d_{j + 1} eventually exceeds u * d_{j + 2}: laws {low} and {high}"
        )
    top = laws[-1].p
    r = max((j + 1 for j, law in enumerate(laws) if law.p < top), default=0)
    return r, top > 0


@dataclass(frozen=True)
class CollapseResult:
    r: int
    ratios: Tuple[float, ...]  # a_{r+1}, ..., a_g = 1
    gram0: FlatTorus
    limit: FlatTorus

    def to_dict(self) -> Dict[str, object]:
        payload: Dict[str, object] = {"mode": "diameter", "r": self.r, "ratios": list(self.ratios)}
        payload.update(self.limit.to_dict())
        return payload


@dataclass(frozen=True)
class VolumeLimit:
    r: int
    torus_factor: Optional[FlatTorus]
    flat_dim: int

    def to_dict(self) -> Dict[str, object]:
        return {
            "mode": "volume",
            "r": self.r,
            "torus_factor": None if self.torus_factor is None else self.torus_factor.to_dict(),
            "flat_dim": self.flat_dim,
        }


@dataclass(frozen=True)
class InjradLimit:
    r: int
    circle_radii: Tuple[float, ...]
    flat_dim: int

    def to_dict(self) -> Dict[str, object]:
        return {
            "mode": "injrad",
            "r": self.r,
            "circle_radii": list(self.circle_radii),
            "flat_dim": self.flat_dim,
        }


def diameter_fixed_limit(
    family: SiegelFamily, tol: Optional[float] = None, config: Optional[Config] = None
) -> CollapseResult:
    r, degenerate = detect_rank(family)
    if not degenerate:
        raise NotDegenerate("no diagonal entry diverges; the family has no collapse limit")
    top = family.laws[-1].c
    ratios = tuple(law.c / top for law in family.laws[r:])
    tail = np.array(family.B)[r:, r:]
    gram0 = FlatTorus.from_matrix(tail.T @ np.diag(ratios) @ tail)
    limit = rescale_torus(gram0, "diameter", tol, config)
    logger.debug("diameter-fixed limit: r=%s, limit dim %s", r, limit.dim)
    return CollapseResult(r, ratios, gram0, limit)


def volume_fixed_limit(family: SiegelFamily) -> VolumeLimit:
    rates = family.rates
    r = sum(1 for p in rates if p == 0)
    if any(p > 0 for p in rates[:r]):
        raise MixedGrowth("bounded diagonal entries must precede the diverging ones")
    if r == 0:
        return VolumeLimit(0, None, family.g)
    b_head = np.array(family.B)[:r, :r]
    x_head = np.array(family.X)[:r, :r]
    y_head = b_head.T @ np.diag(family.constants[:r]) @ b_head
    f = np.linalg.inv(y_head)
    g = f @ x_head
    h = x_head @ f @ x_head + y_head
    gram = np.block([[f, g], [g.T, h]])
    return VolumeLimit(r, FlatTorus.from_matrix((gram + gram.T) / 2.0), family.g - r)


def injrad_fixed_limit(family: SiegelFamily) -> InjradLimit:
    """Circle factors S^1(a_{g-j+1} / (2 pi a_1)) for j = 1..g-r, times R^{g+r}."""
    g = family.g
    if np.any(np.array(family.X)) or not np.allclose(np.array(family.B), np.eye(g)):
        raise NotModelForm("the injectivity-radius limit needs X = 0 and B = I")
    rates = family.rates
    if any(p not in (0.0, 1.0) for p in rates):
        raise NotModelForm("diagonal rates must be 0 or 1")
    r = sum(1 for p in rates if p == 0)
    if any(p != 0 for p in rates[:r]):
        raise NotModelForm("bounded diagonal entries must come first")
    a = family.constants
    radii = tuple(a[g - j] / (2.0 * math.pi * a[0]) for j in range(1, g - r + 1))
    return InjradLimit(r, radii, g + r)


def family_for_torus(
    t: FlatTorus, g: int, u: Optional[float] = None, config: Optional[Config] = None
) -> SiegelFamily:
    """A family in genus g whose diameter-fixed limit is the rescaled torus t."""
    u = resolve(config).u if u is None else u
    n = t.dim
    if not 1 <= n <= g:
        raise BadParameter(f"torus dimension {n} must lie in 1..{g}")
    r = g - n
    reduced = lll_reduce_gram(t.matrix)
    jac = jacobi_decompose(reduced.gram)
    b = np.eye(g)
    b[r:, r:] = jac.B
    laws: List[Tuple[float, float]] = [(1.0, 0.0)] * r + [(float(d), 1.0) for d in jac.d]
    return SiegelFamily.build(laws, np.zeros((g, g)), b, u)
