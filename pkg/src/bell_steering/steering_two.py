"""
Steering of Bell-diagonal states by two projective measurements.

Two unbiased noisy qubit observables r1, r2 are jointly measurable iff
|r1 + r2| + |r1 - r2| <= 2. Maximizing the left side over the measurement
directions of the steering party gives S = 2 sqrt(lambda1 + lambda2), with
lambda1, lambda2 the two largest eigenvalues of T T^T. The same number is
the maximal CHSH value of the state.
"""

from __future__ import annotations

import logging
import math
from typing import NamedTuple, Tuple

import numpy as np

from .linalg import Vec3, eig_sym3
from .models import BellDiagonalState, NoisyObservable

logger = logging.getLogger(__name__)

# Constants
TOL_CMP = 1e-12
S_MAX = 2.0 * math.sqrt(2.0)


class OptimalPair(NamedTuple):
    e1: Vec3
    e2: Vec3
    value: float


# ============================================================================
# Pair Compatibility
# ============================================================================

def parallelogram_sum(r1: np.ndarray, r2: np.ndarray) -> float:
    """|r1 + r2| + |r1 - r2|, half the perimeter of the inscribed parallelogram."""
    return float(np.linalg.norm(r1 + r2) + np.linalg.norm(r1 - r2))


def pair_compatible(r1: NoisyObservable, r2: NoisyObservable) -> bool:
    """Joint measurability of two unbiased noisy qubit observables.

    Examples:
        >>> x = NoisyObservable(r=(1.0, 0.0, 0.0))
        >>> y = NoisyObservable(r=(0.0, 1.0, 0.0))
        >>> pair_compatible(x, y)
        False
    """
    return parallelogram_sum(r1.vector, r2.vector) <= 2.0 + TOL_CMP


# ============================================================================
# Steering Measure
# ============================================================================

def _top_pair_weight(s: BellDiagonalState) -> float:
    # canonical form: T T^T = diag(t^2) with t1^2 >= t2^2 >= t3^2
    return s.t1 * s.t1 + s.t2 * s.t2


def steering_measure(s: BellDiagonalState) -> float:
    """S = 2 sqrt(lambda1 + lambda2)."""
    return 2.0 * math.sqrt(_top_pair_weight(s))


steering_measure_S = steering_measure


def chsh_max(s: BellDiagonalState) -> float:
    """Maximal CHSH value; the same number as ``steering_measure``."""
    return steering_measure(s)


def steerable_by_two(s: BellDiagonalState) -> bool:
    """lambda1 + lambda2 > 1; the boundary S = 2 counts as unsteerable."""
    return _top_pair_weight(s) > 1.0 + TOL_CMP


def normalized_steering(s: BellDiagonalState) -> float:
    """max{0, (S - 2) / (2 sqrt 2 - 2)}, in [0, 1]."""
    value = (steering_measure(s) - 2.0) / (S_MAX - 2.0)
    return min(1.0, max(0.0, value))


def cylinder_membership(s: BellDiagonalState) -> Tuple[bool, bool, bool]:
    """Membership in the solid cylinders t1^2+t2^2 <= 1, t2^2+t3^2 <= 1, t3^2+t1^2 <= 1.

    All three hold iff the state is not steerable by two measurements.
    """
    t1, t2, t3 = s.t
    return (
        t1 * t1 + t2 * t2 <= 1.0 + TOL_CMP,
        t2 * t2 + t3 * t3 <= 1.0 + TOL_CMP,
        t3 * t3 + t1 * t1 <= 1.0 + TOL_CMP,
    )


# ============================================================================
# Optimal Measurements
# ============================================================================

def optimal_directions_two(s: BellDiagonalState) -> OptimalPair:
    """Mutually unbiased measurement pair that attains S.

    The directions are the eigenvectors of T T^T for its two largest
    eigenvalues; degenerate spectra are resolved by the eigenvector sign
    convention of ``eig_sym3``.
    """
    t = s.correlation_matrix
    eig = eig_sym3(t @ t.T)
    e1, e2 = eig.vector(0), eig.vector(1)
    value = parallelogram_sum(t.T @ e1, t.T @ e2)
    logger.debug("optimal pair for t=%s attains %.12g", s.t, value)
    return OptimalPair(e1=e1, e2=e2, value=value)


def skewed_optimal_directions(s: BellDiagonalState) -> OptimalPair:
    """Optimal pair e1,2 = (t1, +/-t2, 0) / sqrt(t1^2 + t2^2).

    The two directions are not orthogonal in general, so the corresponding
    measurements are not mutually unbiased. For the maximally mixed state
    the coordinate axes are returned.
    """
    t1, t2, _ = s.t
    norm = math.hypot(t1, t2)
    if norm == 0.0:
        e1, e2 = np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])
    else:
        e1 = np.array([t1, t2, 0.0]) / norm
        e2 = np.array([t1, -t2, 0.0]) / norm
    t = s.correlation_matrix
    return OptimalPair(e1=e1, e2=e2, value=parallelogram_sum(t.T @ e1, t.T @ e2))
