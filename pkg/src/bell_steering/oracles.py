"""
Brute-force verifiers for the closed-form steering criteria.

These are test-time tools, orders of magnitude slower than the closed
forms they check:

- ``s_grid_oracle``: grid maximization of |r1 + r2| + |r1 - r2| over pairs
  of measurement directions.
- ``ft_direct_oracle``: direct minimization of the total distance to four
  points (coarse grid plus Nelder-Mead), independent of Weiszfeld.
- ``parent_povm_search``: penalty search for a four-outcome parent POVM
  that reproduces two noisy observables by deterministic post-processing.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize

from .config import OracleSettings
from .errors import PreconditionError
from .linalg import Vec3, total_distance
from .models import BellDiagonalState, NoisyObservable, ParentStatus

logger = logging.getLogger(__name__)

# Constants
MIN_GRID = 8
FT_COARSE_POINTS = 21
PARENT_MAX_EVALUATIONS = 2000
# fraction of tol a restart must gain to count as progress
PARENT_PROGRESS = 1e-2


# ============================================================================
# Grid Oracle for S
# ============================================================================

def _oracle_matrix(s: BellDiagonalState) -> np.ndarray:
    # the matrix as supplied keeps the grid independent of the canonical frame
    if s.raw_T is not None:
        return np.array(s.raw_T, dtype=float)
    return s.correlation_matrix


def s_grid_oracle(
    s: BellDiagonalState,
    n_theta: Optional[int] = None,
    n_phi: Optional[int] = None,
    settings: Optional[OracleSettings] = None,
) -> float:
    """Grid maximum of |T^T e1 + T^T e2| + |T^T e1 - T^T e2| over direction pairs.

    A pair of unit vectors is written e1,2 = cos(chi) c +/- sin(chi) c_perp
    with c, c_perp orthonormal. The sum direction c runs over the upper
    hemisphere (polar step pi/n_theta, azimuthal step 2 pi/n_phi), c_perp
    over n_phi/2 angles in the plane orthogonal to c, and chi is set to
    its optimum for each (c, c_perp). The pair is then evaluated directly.

    Args:
        s: State to analyze
        n_theta: Polar resolution (the hemisphere gets n_theta/2 + 1 rings);
            ``settings.n_theta`` when None
        n_phi: Azimuthal resolution; ``settings.n_phi`` when None
        settings: Oracle settings; defaults when None

    Returns:
        Largest parallelogram sum on the grid; never above S beyond
        rounding, and nondecreasing when both sizes are doubled

    Raises:
        PreconditionError: If either grid size is below 8
    """
    settings = settings or OracleSettings()
    n_theta = settings.n_theta if n_theta is None else n_theta
    n_phi = settings.n_phi if n_phi is None else n_phi
    if n_theta < MIN_GRID or n_phi < MIN_GRID:
        raise PreconditionError(f"grid sizes must be >= {MIN_GRID}, got {n_theta}x{n_phi}")

    t = _oracle_matrix(s)
    theta = math.pi * np.arange(n_theta // 2 + 1) / n_theta
    phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
    th, ph = (a.ravel() for a in np.meshgrid(theta, phi, indexing="ij"))

    c = np.column_stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)])
    u = np.column_stack([-np.sin(ph), np.cos(ph), np.zeros_like(ph)])
    w = np.column_stack([np.cos(th) * np.cos(ph), np.cos(th) * np.sin(ph), -np.sin(th)])
    tc = c @ t
    norm_c = np.linalg.norm(tc, axis=1)

    best = 0.0
    for psi in math.pi * np.arange(n_phi // 2) / (n_phi // 2):
        perp = math.cos(psi) * u + math.sin(psi) * w
        chi = np.arctan2(np.linalg.norm(perp @ t, axis=1), norm_c)
        e1 = np.cos(chi)[:, None] * c + np.sin(chi)[:, None] * perp
        e2 = np.cos(chi)[:, None] * c - np.sin(chi)[:, None] * perp
        r1, r2 = e1 @ t, e2 @ t
        values = np.linalg.norm(r1 + r2, axis=1) + np.linalg.norm(r1 - r2, axis=1)
        best = max(best, float(values.max()))

    logger.debug("grid oracle %dx%d for t=%s: %.12g", n_theta, n_phi, s.t, best)
    return best


# ============================================================================
# Direct FT Oracle
# ============================================================================

def ft_direct_oracle(points: Sequence[Sequence[float]] | np.ndarray) -> Vec3:
    """Minimizer of the total distance to ``points`` without Weiszfeld.

    A 21^3 grid over the padded bounding box picks the start; Nelder-Mead
    with an initial simplex of one grid cell refines it.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise PreconditionError(f"points must have shape (k, 3), got {pts.shape}")

    lo, hi = pts.min(axis=0), pts.max(axis=0)
    pad = 0.05 * (1.0 + float(np.max(hi - lo)))
    lo, hi = lo - pad, hi + pad
    axes = [np.linspace(lo[i], hi[i], FT_COARSE_POINTS) for i in range(3)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    totals = np.linalg.norm(grid[:, None, :] - pts[None, :, :], axis=2).sum(axis=1)
    x0 = grid[int(np.argmin(totals))]

    cell = (hi - lo) / (FT_COARSE_POINTS - 1)
    simplex = np.vstack([x0, x0 + np.diag(cell)])
    result = minimize(
        lambda q: total_distance(pts, q),
        x0,
        method="Nelder-Mead",
        options={
            "initial_simplex": simplex,
            "xatol": 1e-12,
            "fatol": 1e-14,
            "maxiter": 20_000,
            "maxfev": 40_000,
        },
    )
    logger.debug("direct FT oracle: %d evaluations, total %.15g", result.nfev, result.fun)
    return np.asarray(result.x, dtype=float)


# ============================================================================
# Parent-POVM Feasibility
# ============================================================================

@dataclass(frozen=True)
class ParentSearchResult:
    """Outcome of the parent-POVM search for two noisy observables.

    The parent has outcomes (++, +-, -+, --), each G = (a I + m.sigma)/2.
    ``violation`` is the smallest worst-case positivity slack max(|m| - a)
    found; it is <= 0 exactly when a valid parent exists.
    """
    status: ParentStatus
    violation: float
    weights: Tuple[float, float, float, float]
    vectors: np.ndarray
    restarts_used: int

    @property
    def feasible(self) -> bool:
        return self.status == ParentStatus.feasible


def _parent_elements(x: np.ndarray, r1: np.ndarray, r2: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    # marginals and completeness leave a_++ and m_++ free
    alpha, m = x[0], x[1:4]
    a = np.array([alpha, 1.0 - alpha, 1.0 - alpha, alpha])
    vectors = np.vstack([m, r1 - m, r2 - m, m - r1 - r2])
    return a, vectors


def _positivity_violation(x: np.ndarray, r1: np.ndarray, r2: np.ndarray) -> float:
    a, vectors = _parent_elements(x, r1, r2)
    return float(np.max(np.linalg.norm(vectors, axis=1) - a))


def parent_povm_search(
    r1: NoisyObservable,
    r2: NoisyObservable,
    tol: Optional[float] = None,
    restarts: Optional[int] = None,
    penalty: Optional[float] = None,
    seed: int = 0,
    settings: Optional[OracleSettings] = None,
) -> ParentSearchResult:
    """Search for a four-outcome parent of two unbiased noisy observables.

    Starts alternate between the incumbent (a fresh simplex around the best
    point so far) and uniform random points. The objective is convex, so
    the search stops once ``settings.patience`` consecutive starts gain less
    than a hundredth of ``tol``.

    Args:
        r1, r2: The observables
        tol: Half-width of the inconclusive band around violation 0
        restarts: Maximal number of Nelder-Mead starts (the first is deterministic)
        penalty: Weight of the box penalty keeping 0 <= a_++ <= 1
        seed: Seed of the random starts
        settings: Defaults for ``tol``, ``restarts``, ``penalty`` and the
            patience; ``OracleSettings()`` when None

    Returns:
        ParentSearchResult; the search stops early once a parent with
        violation below -tol is found
    """
    settings = settings or OracleSettings()
    tol = settings.tol if tol is None else tol
    restarts = settings.restarts if restarts is None else restarts
    penalty = settings.penalty if penalty is None else penalty
    if tol <= 0:
        raise PreconditionError(f"tol must be positive, got {tol}")
    if restarts < 1:
        raise PreconditionError(f"restarts must be >= 1, got {restarts}")
    a, b = r1.vector, r2.vector

    def objective(x: np.ndarray) -> float:
        box = max(0.0, -x[0]) + max(0.0, x[0] - 1.0)
        return _positivity_violation(x, a, b) + penalty * box

    rng = np.random.default_rng(seed)
    best_x = np.concatenate([[0.5], 0.5 * (a + b)])
    best = objective(best_x)
    used = 0
    stale = 0
    for k in range(restarts):
        if k % 2 == 0:
            x0 = best_x
        else:
            direction = rng.standard_normal(3)
            radius = rng.random() ** (1.0 / 3.0)
            x0 = np.concatenate([[rng.random()], radius * direction / np.linalg.norm(direction)])
        result = minimize(objective, x0, method="Nelder-Mead",
                          options={"xatol": 1e-10, "fatol": 1e-12, "maxfev": PARENT_MAX_EVALUATIONS})
        used = k + 1
        gain = best - float(result.fun)
        if gain > 0:
            best, best_x = float(result.fun), np.asarray(result.x, dtype=float)
        stale = 0 if gain > PARENT_PROGRESS * tol else stale + 1
        if best < -tol or stale >= settings.patience:
            break

    violation = _positivity_violation(best_x, a, b)
    if violation < -tol:
        status = ParentStatus.feasible
    elif violation > tol:
        status = ParentStatus.infeasible
    else:
        status = ParentStatus.boundary_inconclusive
    weights, vectors = _parent_elements(best_x, a, b)
    logger.debug("parent search: %s after %d starts (violation %.3e)", status.value, used, violation)
    return ParentSearchResult(
        status=status,
        violation=violation,
        weights=tuple(float(w) for w in weights),  # type: ignore[arg-type]
        vectors=vectors,
        restarts_used=used,
    )


def parent_povm_feasible(
    r1: NoisyObservable,
    r2: NoisyObservable,
    tol: Optional[float] = None,
    restarts: Optional[int] = None,
    penalty: Optional[float] = None,
    seed: int = 0,
    settings: Optional[OracleSettings] = None,
) -> ParentStatus:
    """Feasibility verdict of ``parent_povm_search``.

    Returns ``ParentStatus.boundary_inconclusive`` when the best violation
    lies within ``tol`` of zero.
    """
    return parent_povm_search(r1, r2, tol=tol, restarts=restarts, penalty=penalty,
                              seed=seed, settings=settings).status
