"""
Steering of Bell-diagonal states by three projective measurements.

Three unbiased noisy observables r1, r2, r3 are compatible iff the four
vectors Lambda0 = r1 + r2 + r3, Lambda_x = 2 r_x - Lambda0 have a
Fermat-Toricelli point at total distance <= 4. The FT point has a closed
form only when one observable is orthogonal to the other two; otherwise it
is found with the Weiszfeld iteration.

S3 (half the largest achievable total over the steering ellipsoid) has no
known closed form. It is bounded below by 2 ||T||_F, which certifies
steerability whenever ||T||_F > 1, and estimated here by a multi-start
Nelder-Mead search over the three measurement directions.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import minimize

from .errors import ConvergenceError, PreconditionError
from .linalg import (
    DEFAULT_WEISZFELD_MAX_ITER,
    DEFAULT_WEISZFELD_TOL,
    VERTEX_SNAP,
    FTSolution,
    Vec3,
    eig_sym3,
    total_distance,
    weiszfeld,
)
from .models import BellDiagonalState, NoisyObservable
from .states import frobenius_norm
from .steering_two import TOL_CMP, optimal_directions_two

logger = logging.getLogger(__name__)

# Constants
TOL_ORTH = 1e-10
COMPATIBILITY_BOUND = 4.0
DEFAULT_RESTARTS = 32
DEFAULT_MAX_EVALUATIONS = 200
DEFAULT_INNER_TOL = 1e-10
INNER_MAX_ITER = 500


# ============================================================================
# Result Types
# ============================================================================

@dataclass(frozen=True)
class TripleAssessment:
    """Compatibility verdict for three noisy observables."""
    r: Tuple[NoisyObservable, NoisyObservable, NoisyObservable]
    lambdas: np.ndarray
    ft: FTSolution
    half_total: float
    compatible: bool


@dataclass(frozen=True)
class S3Search:
    """Best direction triple found while estimating S3."""
    value: float
    directions: np.ndarray
    start_index: int
    evaluations: int


# ============================================================================
# Lambda Vectors and the FT Point
# ============================================================================

def _lambdas(rs: np.ndarray) -> np.ndarray:
    lam0 = rs[0] + rs[1] + rs[2]
    return np.vstack([lam0, 2.0 * rs - lam0])


def lambda_vectors(r1: NoisyObservable, r2: NoisyObservable, r3: NoisyObservable) -> np.ndarray:
    """Rows Lambda0 = r1 + r2 + r3 and Lambda_x = 2 r_x - Lambda0, x = 1, 2, 3.

    Examples:
        >>> lambda_vectors(*(NoisyObservable(r=tuple(v)) for v in np.eye(3)))[0]
        array([1., 1., 1.])
    """
    return _lambdas(np.vstack([r1.vector, r2.vector, r3.vector]))


def _closed_form_ft(ra: np.ndarray, rb: np.ndarray, rc: np.ndarray) -> Vec3:
    minus = float(np.linalg.norm(ra - rb))
    plus = float(np.linalg.norm(ra + rb))
    denom = minus + plus
    if denom == 0.0:
        return np.zeros(3)
    return (minus - plus) / denom * rc


def _orthogonal_index(rs: np.ndarray, tol: float = TOL_ORTH) -> Optional[int]:
    """Index k such that r_k is orthogonal to the other two, r3 checked first."""
    for k in (2, 0, 1):
        others = [i for i in range(3) if i != k]
        if all(abs(float(rs[k] @ rs[i])) <= tol for i in others):
            return k
    return None


def ft_orthogonal(r1: NoisyObservable, r2: NoisyObservable, r3: NoisyObservable) -> Vec3:
    """Closed-form FT vector when r3 is orthogonal to r1 and r2.

    The FT point is ((|r1 - r2| - |r1 + r2|) / (|r1 - r2| + |r1 + r2|)) r3 and
    the total distance is 2 sqrt((|r1 - r2| + |r1 + r2|)^2 + 4 |r3|^2).

    Raises:
        PreconditionError: If r3 is not orthogonal to r1 and r2 within 1e-10
    """
    a, b, c = r1.vector, r2.vector, r3.vector
    if abs(float(a @ c)) > TOL_ORTH or abs(float(b @ c)) > TOL_ORTH:
        raise PreconditionError(
            f"closed form needs r3 orthogonal to r1 and r2 (r1.r3 = {a @ c:.3e}, r2.r3 = {b @ c:.3e})"
        )
    return _closed_form_ft(a, b, c)


def _solve_ft(
    rs: np.ndarray,
    tol: float,
    max_iter: int,
    start: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, FTSolution]:
    lambdas = _lambdas(rs)
    k = _orthogonal_index(rs)
    if k is None:
        return lambdas, weiszfeld(lambdas, tol=tol, max_iter=max_iter, start=start)

    a, b = (rs[i] for i in range(3) if i != k)
    ft = _closed_form_ft(a, b, rs[k])
    dist = np.linalg.norm(lambdas - ft, axis=1)
    hits = np.flatnonzero(dist <= VERTEX_SNAP)
    solution = FTSolution(
        ft=ft,
        total_distance=total_distance(lambdas, ft),
        iterations=0,
        converged=True,
        anchored_vertex=int(hits[0]) if hits.size else None,
    )
    return lambdas, solution


def triple_compatible(
    r1: NoisyObservable,
    r2: NoisyObservable,
    r3: NoisyObservable,
    tol: float = DEFAULT_WEISZFELD_TOL,
    max_iter: int = DEFAULT_WEISZFELD_MAX_ITER,
) -> TripleAssessment:
    """Joint measurability of three unbiased noisy qubit observables.

    Args:
        r1, r2, r3: The observables
        tol: Weiszfeld tolerance when no closed form applies
        max_iter: Weiszfeld iteration cap

    Returns:
        TripleAssessment; a total of exactly 4 counts as compatible

    Raises:
        ConvergenceError: If Weiszfeld does not converge; ``partial`` holds
            the assessment built from the last iterate
    """
    rs = np.vstack([r1.vector, r2.vector, r3.vector])
    lambdas, solution = _solve_ft(rs, tol, max_iter)
    assessment = TripleAssessment(
        r=(r1, r2, r3),
        lambdas=lambdas,
        ft=solution,
        half_total=0.5 * solution.total_distance,
        compatible=solution.total_distance <= COMPATIBILITY_BOUND + TOL_CMP,
    )
    if not solution.converged:
        raise ConvergenceError(
            f"FT point did not converge in {solution.iterations} iterations", partial=assessment
        )
    return assessment


def compatibility_total(r1: NoisyObservable, r2: NoisyObservable, r3: NoisyObservable) -> float:
    """Sum of distances from the Lambda vectors to their FT point."""
    return triple_compatible(r1, r2, r3).ft.total_distance


# ============================================================================
# Sufficient Criteria
# ============================================================================

def s3_lower_bound(s: BellDiagonalState) -> float:
    """2 ||T||_F, attained by measuring along the eigenvectors of T T^T."""
    return 2.0 * frobenius_norm(s)


def steerable_by_three_sufficient(s: BellDiagonalState) -> bool:
    """||T||_F > 1. Sufficient only: False means "not certified"."""
    return frobenius_norm(s) > 1.0 + TOL_CMP


def classify_three(s: BellDiagonalState) -> str:
    return "steerable3" if steerable_by_three_sufficient(s) else "uncertified3"


# ============================================================================
# S3 Estimation
# ============================================================================

def _directions_from_angles(x: np.ndarray) -> np.ndarray:
    theta, phi = x[0::2], x[1::2]
    return np.column_stack([
        np.sin(theta) * np.cos(phi),
        np.sin(theta) * np.sin(phi),
        np.cos(theta),
    ])


def _angles_from_directions(e: np.ndarray) -> np.ndarray:
    e = e / np.linalg.norm(e, axis=1)[:, None]
    theta = np.arccos(np.clip(e[:, 2], -1.0, 1.0))
    phi = np.arctan2(e[:, 1], e[:, 0])
    return np.column_stack([theta, phi]).ravel()


def _run_start(
    t: Tuple[float, float, float],
    start: np.ndarray,
    max_evaluations: int,
    inner_tol: float,
) -> Tuple[float, np.ndarray, int]:
    """One Nelder-Mead run; returns (best value, its angles, objective evaluations).

    Each inner FT solve starts from the FT point of the previous evaluation
    of the same run, so runs are independent of each other.
    """
    t_vec = np.asarray(t, dtype=float)
    warm: List[Optional[np.ndarray]] = [None]

    def objective(x: np.ndarray) -> float:
        rs = _directions_from_angles(x) * t_vec
        _, solution = _solve_ft(rs, inner_tol, INNER_MAX_ITER, start=warm[0])
        warm[0] = solution.ft if solution.anchored_vertex is None else None
        return 0.5 * solution.total_distance

    x0 = _angles_from_directions(np.asarray(start, dtype=float))
    value, x_best = objective(x0), x0
    result = minimize(
        lambda x: -objective(x),
        x0,
        method="Nelder-Mead",
        options={"maxfev": max_evaluations, "xatol": 1e-7, "fatol": 1e-12},
    )
    if -result.fun > value:
        value, x_best = float(-result.fun), np.asarray(result.x, dtype=float)
    return value, x_best, int(result.nfev) + 1


def s3_search(
    s: BellDiagonalState,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
    max_evaluations: int = DEFAULT_MAX_EVALUATIONS,
    inner_tol: float = DEFAULT_INNER_TOL,
    workers: int = 1,
) -> S3Search:
    """Multi-start Nelder-Mead maximization of half the FT total distance.

    Args:
        s: State to analyze
        restarts: Number of random starts on top of the two structured ones
        seed: Seed of the random starts
        max_evaluations: Objective evaluations per start
        inner_tol: Weiszfeld tolerance inside the objective
        workers: Process-pool size; starts are distributed over the pool and
            the result does not depend on it

    Returns:
        S3Search with the best value; ties keep the lowest start index

    Notes:
        Start 0 measures along the eigenvectors of T T^T (value 2 ||T||_F)
        and start 1 repeats the second direction of the two-measurement
        optimum (value S), so the result never falls below either bound.
    """
    if restarts < 1:
        raise PreconditionError(f"restarts must be >= 1, got {restarts}")
    if workers < 1:
        raise PreconditionError(f"workers must be >= 1, got {workers}")

    tt = s.correlation_matrix @ s.correlation_matrix.T
    pair = optimal_directions_two(s)
    rng = np.random.default_rng(seed)
    starts = [eig_sym3(tt).eigenvectors.T, np.vstack([pair.e1, pair.e2, pair.e2])]
    starts.extend(rng.standard_normal((restarts, 3, 3)))

    run = partial(_run_start, tuple(s.t), max_evaluations=max_evaluations, inner_tol=inner_tol)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            runs = list(executor.map(run, starts))
    else:
        runs = [run(start) for start in starts]

    best_index = 0
    for index, (value, _, _) in enumerate(runs):
        logger.debug("S3 start %d reached %.12g", index, value)
        if value > runs[best_index][0]:
            best_index = index
    value, angles, _ = runs[best_index]
    return S3Search(
        value=value,
        directions=_directions_from_angles(angles),
        start_index=best_index,
        evaluations=sum(n for _, _, n in runs),
    )


def s3_estimate(
    s: BellDiagonalState,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
    max_evaluations: int = DEFAULT_MAX_EVALUATIONS,
    inner_tol: float = DEFAULT_INNER_TOL,
    workers: int = 1,
) -> float:
    """Estimate of S3 from below; deterministic for a fixed seed."""
    return s3_search(s, restarts=restarts, seed=seed, max_evaluations=max_evaluations,
                     inner_tol=inner_tol, workers=workers).value
