"""
Fixed-size real linear algebra for Bloch-space computations.

Everything here works on 3-vectors and 3x3 matrices held as numpy arrays:
a sorted symmetric eigendecomposition, a rotation-only SVD, and a
Newton-accelerated Weiszfeld solver for the geometric median
(Fermat-Toricelli point) of a small point set.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import PreconditionError

logger = logging.getLogger(__name__)

# Vec3 is a float array of shape (3,), Mat3 of shape (3, 3)
Vec3 = np.ndarray
Mat3 = np.ndarray

# Constants
TOL_SYM = 1e-12
TOL_EIG = 1e-10
DEFAULT_WEISZFELD_TOL = 1e-11
DEFAULT_WEISZFELD_MAX_ITER = 10_000
VERTEX_SNAP = 1e-13
STALL_STEP = 4.0 * np.finfo(float).eps
# totals closer than this are equal at double precision
TOTAL_SLACK = 8.0 * np.finfo(float).eps


# ============================================================================
# Result Types
# ============================================================================

@dataclass(frozen=True)
class SymEig3:
    """Spectral decomposition of a symmetric 3x3 matrix.

    ``eigenvectors[:, i]`` belongs to ``eigenvalues[i]``; eigenvalues are
    nonincreasing.
    """
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def vector(self, i: int) -> Vec3:
        return self.eigenvectors[:, i]


@dataclass(frozen=True)
class SVD3:
    """Rotation-only singular value decomposition.

    ``T = u @ diag(signed) @ v.T`` with ``u`` and ``v`` proper rotations,
    where ``signed = (s1, s2, det_sign * s3)``.
    """
    u: Mat3
    s: np.ndarray
    v: Mat3
    det_sign: float

    @property
    def signed(self) -> np.ndarray:
        return np.array([self.s[0], self.s[1], self.det_sign * self.s[2] + 0.0])


@dataclass(frozen=True)
class FTSolution:
    """Fermat-Toricelli point of a point set with solver diagnostics."""
    ft: Vec3
    total_distance: float
    iterations: int
    converged: bool
    anchored_vertex: Optional[int] = None


# ============================================================================
# Validation Helpers
# ============================================================================

def as_vec3(v: Sequence[float] | np.ndarray, name: str = "vector") -> Vec3:
    """Convert input to a finite float array of shape (3,)."""
    arr = np.asarray(v, dtype=float)
    if arr.shape != (3,):
        raise PreconditionError(f"{name} must have shape (3,), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise PreconditionError(f"{name} has non-finite components: {arr}")
    return arr


def as_mat3(m: Sequence[Sequence[float]] | np.ndarray, name: str = "matrix") -> Mat3:
    """Convert input to a finite float array of shape (3, 3)."""
    arr = np.asarray(m, dtype=float)
    if arr.shape != (3, 3):
        raise PreconditionError(f"{name} must have shape (3, 3), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise PreconditionError(f"{name} has non-finite entries")
    return arr


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip each column so that its first non-negligible component is positive."""
    out = vectors.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        nonzero = np.flatnonzero(np.abs(col) > TOL_EIG)
        if nonzero.size and col[nonzero[0]] < 0:
            out[:, j] = -col
    return out


# ============================================================================
# Eigendecomposition and SVD
# ============================================================================

def eig_sym3(m: Mat3) -> SymEig3:
    """Sorted eigendecomposition of a symmetric 3x3 matrix.

    Args:
        m: Symmetric matrix (asymmetry up to ``TOL_SYM`` relative to its scale)

    Returns:
        SymEig3 with nonincreasing eigenvalues and orthonormal eigenvectors
        whose first non-negligible component is positive

    Raises:
        PreconditionError: If the matrix is malformed or not symmetric

    Examples:
        >>> eig_sym3(np.diag([4.0, 1.0, 0.0])).eigenvalues
        array([4., 1., 0.])
    """
    m = as_mat3(m)
    scale = max(1.0, float(np.max(np.abs(m))))
    asym = float(np.max(np.abs(m - m.T)))
    if asym > TOL_SYM * scale:
        raise PreconditionError(f"matrix is not symmetric (max |M - M^T| = {asym:.3e})")

    # eigh wants an exactly symmetric input
    values, vectors = np.linalg.eigh(0.5 * (m + m.T))
    order = np.argsort(values, kind="stable")[::-1]
    return SymEig3(eigenvalues=values[order], eigenvectors=_fix_signs(vectors[:, order]))


def svd3(t: Mat3) -> SVD3:
    """Singular value decomposition with both factors proper rotations.

    The sign of ``det T`` cannot be carried by nonnegative singular values
    when ``U`` and ``V`` are rotations, so it is returned as ``det_sign``
    and applied to the smallest singular value in ``SVD3.signed``.

    Args:
        t: Any real 3x3 matrix

    Returns:
        SVD3 with ``s`` nonnegative and nonincreasing
    """
    t = as_mat3(t)
    u, s, vt = np.linalg.svd(t)
    v = vt.T
    det_sign = 1.0
    if np.linalg.det(u) < 0:
        u = u.copy()
        u[:, 2] = -u[:, 2]
        det_sign = -det_sign
    if np.linalg.det(v) < 0:
        v = v.copy()
        v[:, 2] = -v[:, 2]
        det_sign = -det_sign
    return SVD3(u=u, s=s, v=v, det_sign=det_sign)


# ============================================================================
# Fermat-Toricelli Point
# ============================================================================

def total_distance(points: np.ndarray, q: Vec3) -> float:
    """Sum of Euclidean distances from ``q`` to every row of ``points``."""
    return float(np.sum(np.linalg.norm(points - q, axis=1)))


def _anchored_vertex(points: np.ndarray, snap: float) -> Optional[int]:
    """Index of the first input point that is itself a geometric median.

    A point with multiplicity w is optimal iff the resultant of the unit
    vectors towards all other (distinct) points has norm <= w.
    """
    diff = points[None, :, :] - points[:, None, :]
    dist = np.linalg.norm(diff, axis=2)
    same = dist <= snap
    units = np.where(same[:, :, None], 0.0, diff / np.where(same, 1.0, dist)[:, :, None])
    resultant = np.linalg.norm(units.sum(axis=1), axis=1)
    hits = np.flatnonzero(resultant <= same.sum(axis=1))
    return int(hits[0]) if hits.size else None


def _gradient_terms(pts: np.ndarray, y: Vec3, snap: float):
    diff = pts - y
    dist = np.linalg.norm(diff, axis=1)
    far = dist > snap
    inv = 1.0 / dist[far]
    units = diff[far] * inv[:, None]
    return far, inv, units, units.sum(axis=0)


def _newton_point(y: Vec3, inv: np.ndarray, units: np.ndarray, resultant: Vec3) -> Optional[Vec3]:
    # Hessian of the total distance: sum (I - u u^T) / d
    hessian = np.eye(3) * inv.sum() - np.einsum("ki,kj,k->ij", units, units, inv)
    try:
        y_next = y + np.linalg.solve(hessian, resultant)
    except np.linalg.LinAlgError:
        return None
    return y_next if np.all(np.isfinite(y_next)) else None


def weiszfeld(
    points: Sequence[Sequence[float]] | np.ndarray,
    tol: float = DEFAULT_WEISZFELD_TOL,
    max_iter: int = DEFAULT_WEISZFELD_MAX_ITER,
    start: Optional[Sequence[float] | np.ndarray] = None,
) -> FTSolution:
    """Geometric median of a small point set by the modified Weiszfeld iteration.

    Every iteration also tries a Newton step on the exact Hessian and keeps
    whichever of the two candidates has the smaller total distance, so flat
    (nearly collinear) configurations converge quadratically instead of
    crawling.

    Args:
        points: Array of shape (k, 3); the steering code always passes k = 4
        tol: Bound on the norm of the gradient (the resultant of the unit
            vectors towards the points); the total distance is then within
            tol times the distance to the optimum of the true minimum
        max_iter: Iteration cap
        start: Initial iterate; the centroid when None

    Returns:
        FTSolution; ``converged`` is False when ``max_iter`` was exhausted,
        and the caller decides what to do with the last iterate

    Raises:
        PreconditionError: If ``tol <= 0``, ``max_iter < 1`` or the points are malformed

    Notes:
        - Vertex optimality is tested first, so optimal data points are
          returned exactly and never approached asymptotically.
        - An iterate that lands on a data point is moved with the
          Vardi-Zhang update instead of dividing by zero.
        - An iterate that no longer moves at floating-point resolution
          counts as converged.
    """
    if tol <= 0:
        raise PreconditionError(f"tol must be positive, got {tol}")
    if max_iter < 1:
        raise PreconditionError(f"max_iter must be >= 1, got {max_iter}")
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3 or pts.shape[0] < 1:
        raise PreconditionError(f"points must have shape (k, 3), got {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise PreconditionError("points have non-finite coordinates")

    extent = float(np.max(np.linalg.norm(pts - pts.mean(axis=0), axis=1)))
    snap = VERTEX_SNAP * (1.0 + extent)

    vertex = _anchored_vertex(pts, snap)
    if vertex is not None:
        ft = pts[vertex].copy()
        return FTSolution(ft=ft, total_distance=total_distance(pts, ft), iterations=0,
                          converged=True, anchored_vertex=vertex)

    stall = STALL_STEP * (1.0 + extent)
    y = pts.mean(axis=0) if start is None else as_vec3(start, name="start")
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        far, inv, units, resultant = _gradient_terms(pts, y, snap)
        eta = len(pts) - int(np.count_nonzero(far))
        r = float(np.linalg.norm(resultant))

        if eta == 0 and r <= tol:
            polished = _newton_point(y, inv, units, resultant)
            if polished is not None:
                _, _, _, grad = _gradient_terms(pts, polished, snap)
                if np.linalg.norm(grad) < r:
                    y = polished
            converged = True
            break

        t_weighted = (pts[far] * inv[:, None]).sum(axis=0) / inv.sum()
        if eta:
            gamma = min(1.0, eta / r) if r > 0 else 1.0
            y_next = (1.0 - gamma) * t_weighted + gamma * y
        else:
            y_next = t_weighted
            newton = _newton_point(y, inv, units, resultant)
            if newton is not None and (
                total_distance(pts, newton) <= total_distance(pts, y_next) * (1.0 + TOTAL_SLACK)
            ):
                y_next = newton

        step = float(np.linalg.norm(y_next - y))
        y = y_next
        if step <= stall:
            converged = True
            break

    if not converged:
        logger.warning("Weiszfeld stopped after %d iterations without converging", max_iter)
    else:
        logger.debug("Weiszfeld converged in %d iterations", iterations)
    return FTSolution(ft=y, total_distance=total_distance(pts, y), iterations=iterations,
                      converged=converged, anchored_vertex=None)
