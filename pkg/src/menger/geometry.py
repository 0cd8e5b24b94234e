"""Exact finite-dimensional geometry: distances, circumradii, Menger
curvature, simplex volumes via Gram determinants, and the two curvature
kernels (the ambient-simplex kernel and the graph kernel).

All operations are pure and accept batched inputs: point tuples are arrays
of shape ``(..., k, d)`` and vector lists are ``(..., k, d)``; results drop
the last two axes.  Volumes are computed from Gram determinants, which is
dimension-agnostic and numerically stable; the explicit minor expansion of
the exterior product is reserved for test oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

#: A triple counts as collinear when twice its area divided by the product
#: of its two longest sides falls below this (dimensionless sine-like
#: measure); the corresponding circumradius is reported as infinite.
COLLINEAR_TOL = 1e-12

#: Negative Gram determinants within this relative tolerance of zero are
#: rounding noise and get clamped; anything more negative signals a bug.
GRAM_NEG_TOL = 1e-12


@dataclass(frozen=True)
class PointTuple:
    """Ordered vertices in Euclidean space."""

    points: np.ndarray  # (k, d)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise ValueError("PointTuple needs a (k, d) array with k >= 1")
        if not np.all(np.isfinite(pts)):
            raise ValueError("PointTuple coordinates must be finite")
        object.__setattr__(self, "points", pts)

    @property
    def k(self) -> int:
        return self.points.shape[0]

    @property
    def dimension(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class AffineMap:
    """x -> A x + b on R^d; carrier for rigid-motion and shear tests."""

    matrix: np.ndarray  # (d, d)
    offset: np.ndarray  # (d,)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        b = np.asarray(self.offset, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or b.shape != (m.shape[0],):
            raise ValueError("matrix must be (d, d) and offset (d,)")
        if not (np.all(np.isfinite(m)) and np.all(np.isfinite(b))):
            raise ValueError("AffineMap entries must be finite")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "offset", b)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(points, dtype=float) @ self.matrix.T + self.offset

    @staticmethod
    def random_rotation(d: int, rng: np.random.Generator,
                        offset: np.ndarray | None = None) -> "AffineMap":
        q, r = np.linalg.qr(rng.standard_normal((d, d)))
        q = q * np.sign(np.diag(r))
        if offset is None:
            offset = np.zeros(d)
        return AffineMap(q, offset)


def _as_points(t) -> np.ndarray:
    if isinstance(t, PointTuple):
        return t.points
    return np.asarray(t, dtype=float)


def diameter(t) -> np.ndarray | float:
    """Largest pairwise Euclidean distance of a point tuple ``(..., k, d)``."""
    pts = _as_points(t)
    if pts.shape[-2] < 2:
        raise ValueError("diameter needs at least 2 points")
    diff = pts[..., :, None, :] - pts[..., None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=-1))
    return dist.max(axis=(-2, -1))


def _triangle_sides_area(x, y, z):
    x, y, z = (np.asarray(v, dtype=float) for v in (x, y, z))
    a = np.linalg.norm(y - x, axis=-1)
    b = np.linalg.norm(z - y, axis=-1)
    c = np.linalg.norm(x - z, axis=-1)
    area = 0.5 * wedge_norm(np.stack([y - x, z - x], axis=-2))
    return a, b, c, area


def _collinear_mask(a, b, c, area, tol):
    sides = np.sort(np.stack([a, b, c], axis=-1), axis=-1)
    two_longest = sides[..., 1] * sides[..., 2]
    return 2.0 * area < tol * two_longest


def circumradius(x, y, z, tol: float = COLLINEAR_TOL):
    """Radius of the circle through three points of R^d (d >= 2); +inf for
    collinear triples (within ``tol``)."""
    a, b, c, area = _triangle_sides_area(x, y, z)
    if np.asarray(x).shape[-1] < 2:
        raise ValueError("circumradius needs ambient dimension >= 2")
    if np.any(a == 0) or np.any(b == 0) or np.any(c == 0):
        raise ValueError("circumradius requires pairwise distinct points")
    collinear = _collinear_mask(a, b, c, area, tol)
    with np.errstate(divide="ignore"):
        r = np.where(collinear, np.inf, a * b * c / np.maximum(4.0 * area, 1e-300))
    return r if r.ndim else float(r)


def menger_curvature(x, y, z, tol: float = COLLINEAR_TOL):
    """c(x, y, z) = 4 * area / (|x-y| |y-z| |z-x|); zero for collinear
    triples.  Equals 1/circumradius."""
    a, b, c, area = _triangle_sides_area(x, y, z)
    if np.any(a == 0) or np.any(b == 0) or np.any(c == 0):
        raise ValueError("menger_curvature requires pairwise distinct points")
    collinear = _collinear_mask(a, b, c, area, tol)
    curv = np.where(collinear, 0.0, 4.0 * area / (a * b * c))
    return curv if curv.ndim else float(curv)


def gram_det(vectors: np.ndarray) -> np.ndarray:
    """Clamped determinant of the Gram matrix of row vectors ``(..., k, d)``."""
    v = np.asarray(vectors, dtype=float)
    g = v @ np.swapaxes(v, -1, -2)
    det = np.linalg.det(g)
    diag = np.diagonal(g, axis1=-2, axis2=-1)
    scale = np.maximum(np.prod(diag, axis=-1), 1.0)
    bad = det < -GRAM_NEG_TOL * scale
    if np.any(bad):
        raise RuntimeError(
            f"Gram determinant {det[bad].min() if det.ndim else det:.3e} is negative "
            "beyond rounding tolerance; this indicates a bug, not data")
    return np.maximum(det, 0.0)


def wedge_norm(vectors) -> np.ndarray | float:
    """|w_1 ^ ... ^ w_k| = sqrt(det Gram) = volume of the spanned
    parallelotope.  ``vectors``: (..., k, d) with k <= d."""
    v = np.asarray(vectors, dtype=float)
    k, d = v.shape[-2], v.shape[-1]
    if k > d:
        raise ValueError(f"wedge of {k} vectors in R^{d} is not defined")
    out = np.sqrt(gram_det(v))
    return out if out.ndim else float(out)


def simplex_volume(t) -> np.ndarray | float:
    """k-volume of the simplex on k+1 points ``(..., k+1, d)``, k <= d."""
    pts = _as_points(t)
    k = pts.shape[-2] - 1
    if k < 1:
        raise ValueError("simplex_volume needs at least 2 points")
    edges = pts[..., 1:, :] - pts[..., :1, :]
    out = wedge_norm(edges) / math.factorial(k)
    return out


def k_kernel(t) -> np.ndarray | float:
    """Ambient curvature kernel on n+2 points of R^{n+m}:
    (n+1)-volume of their convex hull over diameter^(n+2)."""
    pts = _as_points(t)
    n = pts.shape[-2] - 2
    if n < 0:
        raise ValueError("k_kernel needs at least 2 points")
    if pts.shape[-1] < n + 1:
        raise ValueError("k_kernel needs ambient dimension >= n + 1")
    diam = np.asarray(diameter(pts))
    if np.any(diam == 0.0):
        raise ValueError("k_kernel is undefined for an all-coincident tuple")
    out = simplex_volume(pts) / diam ** (n + 2)
    return out if np.ndim(out) else float(out)


def k_pq_kernel(xs, f_values, params) -> np.ndarray | float:
    """Graph curvature kernel on n+2 domain points ``(..., n+2, n)`` with
    their sampled values ``(..., n+2)``.

    Numerator: (n+1)-volume of the simplex on the lifted points
    (x_i, f(x_i)) in R^{n+1}, raised to ``params.p``; denominator: diameter
    of the unlifted domain tuple raised to ``(n+2) * params.q``.

    All-coincident domain tuples yield NaN, the invalid-sample marker
    consumed (counted and skipped) by the Monte Carlo layer.
    """
    x = np.asarray(xs, dtype=float)
    fv = np.asarray(f_values, dtype=float)
    n = x.shape[-1]
    if x.shape[-2] != n + 2:
        raise ValueError(f"expected {n + 2} points in R^{n}, got {x.shape[-2]}")
    if fv.shape != x.shape[:-1]:
        raise ValueError("f_values must have one value per point")
    lifted = np.concatenate([x, fv[..., None]], axis=-1)
    vol = np.asarray(simplex_volume(lifted))
    diam = np.asarray(diameter(x))
    degenerate = diam == 0.0
    safe = np.where(degenerate, 1.0, diam)
    with np.errstate(over="ignore"):
        out = vol ** params.p / safe ** ((n + 2) * params.q)
    out = np.where(degenerate, np.nan, out)
    return out if out.ndim else float(out)
