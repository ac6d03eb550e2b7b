"""
Bell-diagonal states: construction, canonical form and scalar measures.

A Bell-diagonal state is fixed by its correlation triple (t1, t2, t3),
which lives in the regular tetrahedron spanned by the four Bell states.
Local rotations permute the triple and flip signs in pairs, so every state
is stored in the canonical form t1 >= t2 >= |t3| with sign(t3) equal to
sign(det T). The 4x4 density operator is never built; every quantity
below is a closed form in the triple.
"""

from __future__ import annotations

import logging
import math
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import InvalidStateError, PreconditionError
from .linalg import as_mat3, as_vec3, svd3
from .models import (
    BELL_LABELS,
    BELL_VERTICES,
    TOL_STATE,
    BellDiagonalState,
    NoisyObservable,
    Spectrum4,
    Triple,
)

logger = logging.getLogger(__name__)

# Constants
TOL_PROB_SUM = 1e-9
TOL_UNIT = 1e-9


# ============================================================================
# Canonical Form
# ============================================================================

def bell_probabilities(t: Sequence[float] | np.ndarray) -> np.ndarray:
    """Bell-basis weights p_mu,nu = (1 + v_mu,nu . t) / 4 of raw triples.

    Args:
        t: A triple of shape (3,) or a batch of shape (n, 3)

    Returns:
        Array of shape (4,) or (n, 4), columns ordered p00, p01, p10, p11
    """
    arr = np.asarray(t, dtype=float)
    return 0.25 * (1.0 + arr @ BELL_VERTICES.T)


def canonicalize(t: Sequence[float] | np.ndarray) -> Triple:
    """Canonical representative of a triple under local rotations.

    Examples:
        >>> canonicalize((-1.0, -1.0, -1.0))
        (1.0, 1.0, -1.0)
    """
    a = sorted((abs(float(x)) for x in t), reverse=True)
    sign = -1.0 if t[0] * t[1] * t[2] < 0 else 1.0
    return (a[0], a[1], sign * a[2] + 0.0)


def canonicalize_batch(t: np.ndarray) -> np.ndarray:
    """Row-wise ``canonicalize`` for an (n, 3) array."""
    t = np.asarray(t, dtype=float)
    out = -np.sort(-np.abs(t), axis=1)
    sign = np.where(np.prod(t, axis=1) < 0, -1.0, 1.0)
    out[:, 2] = out[:, 2] * sign + 0.0
    return out


def _check_tetrahedron(t: np.ndarray) -> None:
    probs = bell_probabilities(t)
    i = int(np.argmin(probs))
    if probs[i] < -TOL_STATE:
        raise InvalidStateError(
            f"triple {tuple(float(x) for x in t)} lies outside the Bell-diagonal tetrahedron: "
            f"{BELL_LABELS[i]} = {probs[i]:.6g}"
        )


def _build(t_raw: np.ndarray, raw_matrix: Optional[np.ndarray] = None) -> BellDiagonalState:
    _check_tetrahedron(t_raw)
    canonical = canonicalize(t_raw)
    raw = raw_matrix if raw_matrix is not None else np.diag(t_raw)
    return BellDiagonalState(
        t=canonical,
        raw_T=tuple(tuple(float(x) for x in row) for row in raw),
    )


# ============================================================================
# Constructors
# ============================================================================

def from_t(t1: float, t2: float, t3: float) -> BellDiagonalState:
    """State with diagonal correlation matrix diag(t1, t2, t3).

    Raises:
        InvalidStateError: If the point is outside the tetrahedron; the
            message names the negative Bell probability
    """
    return _build(as_vec3((t1, t2, t3), name="correlation triple"))


def from_probabilities(p00: float, p01: float, p10: float, p11: float) -> BellDiagonalState:
    """Mixture of the four Bell states with the given weights.

    Weights summing to 1 within 1e-9 are renormalized.

    Raises:
        PreconditionError: On a negative weight or a bad normalization
    """
    p = np.array([p00, p01, p10, p11], dtype=float)
    if not np.all(np.isfinite(p)):
        raise PreconditionError(f"probabilities must be finite, got {p}")
    if np.any(p < 0):
        i = int(np.argmin(p))
        raise PreconditionError(f"negative Bell probability {BELL_LABELS[i]} = {p[i]}")
    total = float(p.sum())
    if abs(total - 1.0) > TOL_PROB_SUM:
        raise PreconditionError(f"Bell probabilities must sum to 1, got {total}")
    p = p / total
    return _build(p @ BELL_VERTICES)


def from_correlation_matrix(t: Sequence[Sequence[float]] | np.ndarray) -> BellDiagonalState:
    """State with an arbitrary (not necessarily diagonal) correlation matrix.

    The canonical triple is (s1, s2, sign(det T) * s3) from the singular
    values; matrices whose triple leaves the tetrahedron are rejected, not
    projected.

    Examples:
        >>> from_correlation_matrix(np.diag([1.0, -1.0, 1.0])).t
        (1.0, 1.0, -1.0)
    """
    matrix = as_mat3(t, name="correlation matrix")
    signed = svd3(matrix).signed
    return _build(signed, raw_matrix=matrix)


def bell_state(mu: int, nu: int) -> BellDiagonalState:
    """The Bell state |beta_mu,nu>; (1, 1) is the singlet."""
    if mu not in (0, 1) or nu not in (0, 1):
        raise PreconditionError(f"mu and nu must be 0 or 1, got ({mu}, {nu})")
    return _build(BELL_VERTICES[2 * mu + nu].copy())


def werner(f: float) -> BellDiagonalState:
    """Werner state f |beta11><beta11| + (1 - f)/3 (I - |beta11><beta11|).

    Examples:
        >>> werner(0.25).t
        (0.0, 0.0, 0.0)
    """
    if not 0.0 <= f <= 1.0:
        raise PreconditionError(f"Werner parameter must be in [0, 1], got {f}")
    c = (1.0 - 4.0 * f) / 3.0
    return _build(np.array([c, c, c]))


def edge(p: float) -> BellDiagonalState:
    """Rank-2 mixture p |beta11><beta11| + (1 - p) |beta10><beta10|.

    The two weights play symmetric roles, so p is replaced by max(p, 1 - p);
    the ellipsoid semiaxes are (1, 2p - 1, 2p - 1).
    """
    if not 0.0 <= p <= 1.0:
        raise PreconditionError(f"edge parameter must be in [0, 1], got {p}")
    p = max(p, 1.0 - p)
    q = 1.0 - 2.0 * p
    return _build(np.array([-1.0, q, q]))


# ============================================================================
# Measures
# ============================================================================

def spectrum(s: BellDiagonalState) -> Spectrum4:
    """Eigenvalues of rho in nondecreasing order."""
    t1, t2, t3 = s.t
    values = sorted((
        0.25 * (1.0 - t1 - t2 - t3),
        0.25 * (1.0 - t1 + t2 + t3),
        0.25 * (1.0 + t1 - t2 + t3),
        0.25 * (1.0 + t1 + t2 - t3),
    ))
    return Spectrum4(p=tuple(values))


def concurrence(s: BellDiagonalState) -> float:
    """C = max{0, 2 p_max - 1}; exactly 0 whenever ``is_separable`` holds."""
    value = 2.0 * spectrum(s).p_max - 1.0
    if value <= 2.0 * TOL_STATE:
        return 0.0
    return min(1.0, value)


def is_separable(s: BellDiagonalState) -> bool:
    return spectrum(s).p_max <= 0.5 + TOL_STATE


def is_in_octahedron(s: BellDiagonalState) -> bool:
    """Sum |t_i| <= 1; equivalent to ``is_separable`` on valid states."""
    return sum(abs(x) for x in s.t) <= 1.0 + 4.0 * TOL_STATE


def ellipsoid_volume(s: BellDiagonalState) -> float:
    """Normalized steering-ellipsoid volume V = |det T|."""
    t1, t2, t3 = s.t
    return min(1.0, abs(t1 * t2 * t3))


def frobenius_norm(s: BellDiagonalState) -> float:
    t1, t2, t3 = s.t
    return math.sqrt(t1 * t1 + t2 * t2 + t3 * t3)


def semiaxes(s: BellDiagonalState) -> Tuple[float, float, float]:
    """Steering-ellipsoid semiaxes, largest first."""
    return (abs(s.t1), abs(s.t2), abs(s.t3))


# ============================================================================
# Steering-Equivalent Observables
# ============================================================================

def steering_equivalent(s: BellDiagonalState, e: Sequence[float] | np.ndarray) -> NoisyObservable:
    """Observable r = T^T e induced by a projective measurement along ``e``.

    ``e`` is read in the canonical frame of ``s``.

    Raises:
        PreconditionError: If ``e`` is not a unit vector within 1e-9
    """
    e = as_vec3(e, name="measurement direction")
    norm = float(np.linalg.norm(e))
    if abs(norm - 1.0) > TOL_UNIT:
        raise PreconditionError(f"measurement direction must be a unit vector, got |e| = {norm}")
    return NoisyObservable.from_vector(s.correlation_matrix.T @ (e / norm))
