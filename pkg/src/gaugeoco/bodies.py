"""Convex bodies exposed through membership queries.

Every body carries its dimension, an inner radius ``r`` (an origin-centered
ball of this radius is certified to lie inside) and its diameter ``D``.
Membership uses the closed convention: boundary points count as inside.
Membership queries are tallied on the body's :class:`OracleCounter`;
polytope constraint-row evaluations are tallied separately because a
polytope row oracle is strictly stronger than plain membership.

Bodies are immutable after construction. The counter is the only mutable
state and is meant to be confined to one experiment run at a time.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

__all__ = [
    "OracleCounter",
    "ConvexBody",
    "Ball",
    "Ellipsoid",
    "PolytopeBody",
    "SmoothedPolytopeBody",
    "box_body",
    "simplex_body",
    "random_polytope",
    "active_face",
]

_UNIT_ROW_TOL = 1e-12


class OracleCounter:
    """Tally of membership queries and polytope constraint-row evaluations."""

    __slots__ = ("calls", "row_evals")

    def __init__(self) -> None:
        self.calls = 0
        self.row_evals = 0

    def reset(self) -> None:
        self.calls = 0
        self.row_evals = 0

    def __repr__(self) -> str:
        return f"OracleCounter(calls={self.calls}, row_evals={self.row_evals})"


class ConvexBody:
    """Base class: geometry constants plus a counted membership query.

    Parameters
    ----------
    dim:
        Ambient dimension.
    inner_radius:
        Radius of an origin-centered ball contained in the body.
    diameter:
        Euclidean diameter of the body.
    """

    def __init__(self, dim: int, inner_radius: float, diameter: float) -> None:
        if dim < 1:
            raise ValueError(f"dimension must be positive, got {dim}")
        if not (0.0 < inner_radius <= diameter):
            raise ValueError(
                f"need 0 < inner_radius <= diameter, got r={inner_radius}, D={diameter}"
            )
        self.dim = int(dim)
        self.r = float(inner_radius)
        self.D = float(diameter)
        self.counter = OracleCounter()
        if not self._inside(np.zeros(self.dim)):
            raise ValueError("body must contain the origin")

    def contains(self, x: np.ndarray) -> bool:
        """Membership query. Counts one oracle call."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError(f"point of shape {x.shape} queried against body of dim {self.dim}")
        self.counter.calls += 1
        return self._inside(x)

    def _inside(self, x: np.ndarray) -> bool:
        raise NotImplementedError


class Ball(ConvexBody):
    """Origin-centered Euclidean ball of the given radius."""

    def __init__(self, radius: float, dim: int = 2) -> None:
        self.radius = float(radius)
        self._rad2 = self.radius * self.radius
        super().__init__(dim, inner_radius=self.radius, diameter=2.0 * self.radius)

    def _inside(self, x: np.ndarray) -> bool:
        return float(x @ x) <= self._rad2


class Ellipsoid(ConvexBody):
    """Axis-aligned ellipsoid ``{x : sum_i a_i x_i^2 <= 1}`` with ``a_i > 0``."""

    def __init__(self, diag: np.ndarray) -> None:
        diag = np.asarray(diag, dtype=float)
        if diag.ndim != 1 or np.any(diag <= 0):
            raise ValueError("diag must be a 1-d array of positive entries")
        self.diag = diag
        r = 1.0 / math.sqrt(float(diag.max()))
        d_ = 2.0 / math.sqrt(float(diag.min()))
        super().__init__(diag.size, inner_radius=r, diameter=d_)

    def quad(self, x: np.ndarray) -> float:
        """The defining quadratic form ``sum_i a_i x_i^2`` (uncounted)."""
        return float((self.diag * x) @ x)

    def _inside(self, x: np.ndarray) -> bool:
        return float((self.diag * x) @ x) <= 1.0


class PolytopeBody(ConvexBody):
    """Polytope ``{x : max_i (a_i . x + b_i) <= 0}`` with unit normal rows.

    The inner radius defaults to the exact distance from the origin to the
    nearest constraint plane, ``min_i(-b_i)``. The diameter is taken from
    the vertex list when one is stored, otherwise it must be supplied.
    """

    def __init__(
        self,
        normals: np.ndarray,
        offsets: np.ndarray,
        diameter: float | None = None,
        inner_radius: float | None = None,
        vertices: np.ndarray | None = None,
    ) -> None:
        normals = np.asarray(normals, dtype=float)
        offsets = np.asarray(offsets, dtype=float)
        if normals.ndim != 2 or offsets.shape != (normals.shape[0],):
            raise ValueError("normals must be (m, d) and offsets (m,)")
        row_norms = np.linalg.norm(normals, axis=1)
        if np.any(np.abs(row_norms - 1.0) > _UNIT_ROW_TOL):
            raise ValueError("constraint rows must be unit vectors")
        self.normals = normals
        self.offsets = offsets
        self.m = normals.shape[0]
        self.vertices = None if vertices is None else np.asarray(vertices, dtype=float)

        r_exact = float(-offsets.max())
        if r_exact <= 0:
            raise ValueError("origin must be strictly inside the polytope")
        r = r_exact if inner_radius is None else float(inner_radius)
        if r > r_exact + _UNIT_ROW_TOL:
            raise ValueError(f"inner_radius {r} exceeds the exact facet distance {r_exact}")

        if diameter is None:
            if self.vertices is None:
                raise ValueError("supply a diameter or a vertex list")
            diff = self.vertices[:, None, :] - self.vertices[None, :, :]
            diameter = float(np.sqrt((diff * diff).sum(axis=2)).max())
        super().__init__(normals.shape[1], inner_radius=r, diameter=float(diameter))

    def h(self, x: np.ndarray) -> float:
        """Max-of-affine boundary function; costs ``m`` row evaluations."""
        self.counter.row_evals += self.m
        return float((self.normals @ x + self.offsets).max())

    def _inside(self, x: np.ndarray) -> bool:
        self.counter.row_evals += self.m
        return float((self.normals @ x + self.offsets).max()) <= 0.0


class SmoothedPolytopeBody(ConvexBody):
    """Inner smoothing of a polytope via a log-sum-exp boundary surrogate.

    Membership is ``h_a(x) <= 0`` where ``h_a`` is the scaled log-sum-exp
    of the base polytope's rows. The smoothed set sits between the base
    set shrunk by ``log(m)/a`` and the base set itself, so the inner
    radius shrinks by that amount.
    """

    def __init__(self, base: PolytopeBody, scale: float) -> None:
        if scale <= 0:
            raise ValueError("smoothing scale must be positive")
        self.base = base
        self.scale = float(scale)
        self.m = base.m
        r = base.r - math.log(base.m) / self.scale
        if r <= 0:
            raise ValueError(
                f"smoothing scale {scale} too small: log(m)/a = "
                f"{math.log(base.m) / scale:.3g} wipes out the inner radius {base.r:.3g}"
            )
        super().__init__(base.dim, inner_radius=r, diameter=base.D)

    def h_smooth(self, x: np.ndarray) -> float:
        """Log-sum-exp surrogate; max-subtraction makes overflow impossible."""
        self.counter.row_evals += self.m
        return self._h_smooth_raw(x)

    def _h_smooth_raw(self, x: np.ndarray) -> float:
        z = self.scale * (self.base.normals @ x + self.base.offsets)
        zmax = float(z.max())
        return (zmax + math.log(float(np.exp(z - zmax).sum()))) / self.scale

    def _inside(self, x: np.ndarray) -> bool:
        self.counter.row_evals += self.m
        return self._h_smooth_raw(x) <= 0.0


def active_face(body: PolytopeBody, x: np.ndarray, tie_tol: float = 1e-9) -> tuple[int, bool]:
    """Index of the row attaining ``h(x)``, with a tie flag.

    Ties within ``tie_tol`` (absolute) are broken by lowest index and
    reported, since a tied face makes the face-normal gradient ambiguous.
    Costs ``m`` row evaluations.
    """
    body.counter.row_evals += body.m
    vals = body.normals @ np.asarray(x, dtype=float) + body.offsets
    idx = int(np.argmax(vals))
    tied = bool(np.count_nonzero(vals >= vals[idx] - tie_tol) > 1)
    return idx, tied


def box_body(half_width: float, dim: int = 2) -> PolytopeBody:
    """Axis-aligned box ``[-c, c]^d`` as a polytope with 2d rows."""
    if half_width <= 0:
        raise ValueError("half_width must be positive")
    eye = np.eye(dim)
    normals = np.vstack([eye, -eye])
    offsets = np.full(2 * dim, -half_width)
    verts = None
    if dim <= 12:
        verts = np.array(list(itertools.product((-half_width, half_width), repeat=dim)))
    return PolytopeBody(
        normals, offsets, diameter=2.0 * half_width * math.sqrt(dim), vertices=verts
    )


def simplex_body(dim: int) -> PolytopeBody:
    """Solid probability simplex recentered so an origin ball fits inside.

    ``{x : x + c >= 0, sum(x + c) <= 1}`` with ``c = 1/(d+1)`` in every
    coordinate; the centroid of the solid simplex moves to the origin.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    c = 1.0 / (dim + 1)
    eye = np.eye(dim)
    ones = np.ones(dim) / math.sqrt(dim)
    normals = np.vstack([-eye, ones])
    # rows: x_i >= -c for each i, and sum(x) <= c (normalized by sqrt(d))
    offsets = np.concatenate([np.full(dim, -c), [-c / math.sqrt(dim)]])
    verts = np.vstack([np.zeros(dim), eye]) - c
    return PolytopeBody(normals, offsets, vertices=verts)


def random_polytope(
    dim: int,
    n_points: int,
    rng: np.random.Generator,
    radial_range: tuple[float, float] = (0.6, 1.0),
    max_tries: int = 50,
) -> PolytopeBody:
    """Convex hull of random points on a spherical shell around the origin.

    Retries until the origin is strictly interior. The facet rows come from
    the hull equations (already unit-normalized), the vertex list is stored
    for exact linear optimization in comparators.
    """
    from scipy.spatial import ConvexHull

    lo, hi = radial_range
    for _ in range(max_tries):
        dirs = rng.normal(size=(n_points, dim))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        pts = dirs * rng.uniform(lo, hi, size=(n_points, 1))
        hull = ConvexHull(pts)
        normals = hull.equations[:, :dim]
        offsets = hull.equations[:, dim]
        if offsets.max() < -0.05 * lo:
            return PolytopeBody(normals, offsets, vertices=pts[hull.vertices])
    raise RuntimeError("failed to sample a polytope with the origin inside")
