"""
Classification, reports and the verification harness.

Single states go through the scalar modules (``states``, ``steering_two``,
``steering_three``). Batches use ``measure_arrays``, a vectorized
evaluation of the same closed forms on raw triples, so that the
inequality suite over 10^6 samples stays a few array passes.
"""

from __future__ import annotations

import logging
import math
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import bisect

from .config import SteeringConfig
from .errors import PreconditionError
from .models import (
    SAMPLE_COLUMNS,
    TOL_STATE,
    BellDiagonalState,
    ImplicationCheck,
    InequalityCheck,
    InequalityReport,
    SaturationCheck,
    StateClass,
    SteeringReport,
)
from .sampling import sample_triples
from .states import (
    bell_probabilities,
    canonicalize_batch,
    concurrence,
    edge,
    ellipsoid_volume,
    frobenius_norm,
    is_separable,
    spectrum,
    werner,
)
from .steering_three import s3_estimate, s3_lower_bound, steerable_by_three_sufficient
from .steering_two import S_MAX, TOL_CMP, chsh_max, normalized_steering, steerable_by_two, steering_measure

logger = logging.getLogger(__name__)

# Derived thresholds
C_STEERABLE2 = (3.0 - math.sqrt(2.0)) / (2.0 * math.sqrt(2.0))
V_UNSTEERABLE2 = 1.0 / (2.0 * math.sqrt(2.0))
C_UNCERTIFIED3 = (math.sqrt(3.0) - 1.0) / 2.0
V_UNCERTIFIED3 = 1.0 / (3.0 * math.sqrt(3.0))
V_SEPARABLE = 1.0 / 27.0

FAMILIES = ("werner", "edge")
AXES = ("t1", "t2", "t3")
INVALID = "invalid"
MIN_RESOLUTION = 16


# ============================================================================
# Single States
# ============================================================================

def classify(s: BellDiagonalState) -> StateClass:
    """Separable if C = 0; else steerable2 if S > 2; else by the ||T||_F > 1 certificate."""
    if is_separable(s):
        return StateClass.separable
    if steerable_by_two(s):
        return StateClass.steerable2
    if steerable_by_three_sufficient(s):
        return StateClass.steerable3
    return StateClass.uncertified3


def report(
    s: BellDiagonalState,
    with_s3_estimate: bool = False,
    seed: int = 0,
    config: Optional[SteeringConfig] = None,
) -> SteeringReport:
    """Every measure of ``s``; the S3 search runs only when asked for."""
    estimate = None
    if with_s3_estimate:
        settings = (config or SteeringConfig()).s3
        estimate = s3_estimate(
            s,
            restarts=settings.restarts,
            seed=seed,
            max_evaluations=settings.max_evaluations,
            inner_tol=settings.inner_tol,
            workers=config.workers if config else 1,
        )
    value = steering_measure(s)
    return SteeringReport(
        t=s.t,
        probabilities=s.probabilities,
        concurrence=concurrence(s),
        steering=value,
        chsh=chsh_max(s),
        normalized_steering=normalized_steering(s),
        volume=ellipsoid_volume(s),
        frobenius=frobenius_norm(s),
        s3_lower=s3_lower_bound(s),
        s3_estimate=estimate,
        state_class=classify(s),
    )


# ============================================================================
# Vectorized Measures
# ============================================================================

def measure_arrays(t_raw: np.ndarray) -> Dict[str, np.ndarray]:
    """Closed-form measures of many raw triples at once.

    Args:
        t_raw: Array of shape (n, 3); rows must lie in the tetrahedron.
            The t columns hold the canonical triple, the p columns the
            Bell weights of the raw row.

    Returns:
        Dict of arrays keyed by the CSV column names (``class`` holds strings)
    """
    t = canonicalize_batch(np.atleast_2d(t_raw))
    probs = bell_probabilities(t)
    p_max = probs.max(axis=1)
    weight = t[:, 0] ** 2 + t[:, 1] ** 2
    frob = np.sqrt(np.sum(t * t, axis=1))
    s = 2.0 * np.sqrt(weight)

    c = 2.0 * p_max - 1.0
    separable = c <= 2.0 * TOL_STATE
    c = np.where(separable, 0.0, np.minimum(c, 1.0))
    steerable2 = weight > 1.0 + TOL_CMP
    certified3 = frob > 1.0 + TOL_CMP

    labels = np.where(
        separable,
        StateClass.separable.value,
        np.where(
            steerable2,
            StateClass.steerable2.value,
            np.where(certified3, StateClass.steerable3.value, StateClass.uncertified3.value),
        ),
    )
    # weights of the draw itself; canonicalization only permutes them
    clamped = np.clip(bell_probabilities(np.atleast_2d(t_raw)), 0.0, None)
    return {
        "t1": t[:, 0], "t2": t[:, 1], "t3": t[:, 2],
        "p00": clamped[:, 0], "p01": clamped[:, 1], "p10": clamped[:, 2], "p11": clamped[:, 3],
        "C": c,
        "S": s,
        "chsh": s,
        "normS": np.clip((s - 2.0) / (S_MAX - 2.0), 0.0, 1.0),
        "V": np.minimum(1.0, np.abs(t[:, 0] * t[:, 1] * t[:, 2])),
        "frob": frob,
        "s3lb": 2.0 * frob,
        "class": labels,
    }


def measure_table(t_raw: np.ndarray, start_index: int = 0) -> pd.DataFrame:
    """Vectorized measures as a DataFrame with the sample CSV schema."""
    arrays = measure_arrays(t_raw)
    n = len(arrays["t1"])
    df = pd.DataFrame(arrays)
    df.insert(0, "index", np.arange(start_index, start_index + n))
    df["s3est"] = np.nan
    return df[SAMPLE_COLUMNS]


def sample_table(n: int, seed: int, workers: int = 1) -> pd.DataFrame:
    """Measures of the first ``n`` uniform samples, rows in index order."""
    return measure_table(sample_triples(n, seed, workers=workers))


# ============================================================================
# Inequality Suite
# ============================================================================

# name, human-readable bound, slack (lhs - rhs, <= 0 when it holds), entangled only
Bound = Tuple[str, str, Callable[[Dict[str, np.ndarray]], np.ndarray], bool]

BOUNDS: List[Bound] = [
    ("S_lower_C", "(2 sqrt2 / 3)(1 + 2C) <= S",
     lambda m: (2.0 * math.sqrt(2.0) / 3.0) * (1.0 + 2.0 * m["C"]) - m["S"], True),
    ("S_upper_C", "S <= 2 sqrt(1 + C^2)",
     lambda m: m["S"] - 2.0 * np.sqrt(1.0 + m["C"] ** 2), False),
    ("V_lower_C", "C^2 <= V",
     lambda m: m["C"] ** 2 - m["V"], False),
    ("V_upper_C", "V <= ((1 + 2C) / 3)^3",
     lambda m: m["V"] - ((1.0 + 2.0 * m["C"]) / 3.0) ** 3, False),
    ("S_lower_V", "2 sqrt2 V^(1/3) <= S",
     lambda m: 2.0 * math.sqrt(2.0) * np.cbrt(m["V"]) - m["S"], False),
    ("S_upper_V", "S <= 2 sqrt(1 + V)",
     lambda m: m["S"] - 2.0 * np.sqrt(1.0 + m["V"]), False),
    ("F_lower_C", "(1 + 2C) / sqrt3 <= ||T||_F",
     lambda m: (1.0 + 2.0 * m["C"]) / math.sqrt(3.0) - m["frob"], True),
    ("F_upper_C", "||T||_F <= sqrt(1 + 2C^2)",
     lambda m: m["frob"] - np.sqrt(1.0 + 2.0 * m["C"] ** 2), False),
    ("F_lower_V", "sqrt3 V^(1/3) <= ||T||_F",
     lambda m: math.sqrt(3.0) * np.cbrt(m["V"]) - m["frob"], False),
    ("F_upper_V", "||T||_F <= sqrt(1 + 2V)",
     lambda m: m["frob"] - np.sqrt(1.0 + 2.0 * m["V"]), False),
]

# (family, bound name, parameter range); Werner on [1/2, 1] where C = 2f - 1 > 0
SATURATING: List[Tuple[str, str, Tuple[float, float]]] = [
    ("werner", "S_lower_C", (0.5, 1.0)),
    ("werner", "V_upper_C", (0.5, 1.0)),
    ("werner", "F_lower_C", (0.5, 1.0)),
    ("werner", "S_lower_V", (0.0, 1.0)),
    ("werner", "F_lower_V", (0.0, 1.0)),
    ("edge", "S_upper_C", (0.5, 1.0)),
    ("edge", "V_lower_C", (0.5, 1.0)),
    ("edge", "S_upper_V", (0.5, 1.0)),
    ("edge", "F_upper_C", (0.5, 1.0)),
    ("edge", "F_upper_V", (0.5, 1.0)),
]


def _triple(m: Dict[str, np.ndarray], i: int) -> Tuple[float, float, float]:
    return (float(m["t1"][i]), float(m["t2"][i]), float(m["t3"][i]))


def _family_triples(family: str, values: np.ndarray) -> np.ndarray:
    build = werner if family == "werner" else edge
    return np.array([build(float(x)).t for x in values])


def _check_bounds(m: Dict[str, np.ndarray], tol: float) -> List[InequalityCheck]:
    entangled = m["C"] > 0.0
    checks = []
    for name, text, slack_of, entangled_only in BOUNDS:
        slack = slack_of(m)
        mask = entangled if entangled_only else np.ones_like(entangled)
        count = int(np.count_nonzero(mask))
        if count == 0:
            checks.append(InequalityCheck(name=name, bound=text, samples=0, max_violation=-math.inf,
                                          applies_to="entangled" if entangled_only else "all", passed=True))
            continue
        masked = np.where(mask, slack, -np.inf)
        worst = int(np.argmax(masked))
        violation = float(masked[worst])
        passed = violation <= tol
        if not passed:
            logger.error(f"{name} violated by {violation:.3e} at t = {_triple(m, worst)}")
        checks.append(InequalityCheck(
            name=name,
            bound=text,
            applies_to="entangled" if entangled_only else "all",
            samples=count,
            max_violation=violation,
            worst_t=_triple(m, worst),
            passed=passed,
        ))
    return checks


def _check_implications(m: Dict[str, np.ndarray], tol: float) -> List[ImplicationCheck]:
    labels = m["class"]
    steerable2 = labels == StateClass.steerable2.value
    certified3 = m["frob"] > 1.0 + TOL_CMP
    rules = [
        ("high_C_steerable2", f"C > {C_STEERABLE2:.7f} => S > 2",
         m["C"] > C_STEERABLE2 + tol, steerable2),
        ("unsteerable2_V", f"S <= 2 => V <= {V_UNSTEERABLE2:.7f}",
         ~steerable2, m["V"] <= V_UNSTEERABLE2 + tol),
        ("uncertified3_C", f"||T||_F <= 1 => C <= {C_UNCERTIFIED3:.7f}",
         ~certified3, m["C"] <= C_UNCERTIFIED3 + tol),
        ("uncertified3_V", f"||T||_F <= 1 => V <= {V_UNCERTIFIED3:.7f}",
         ~certified3, m["V"] <= V_UNCERTIFIED3 + tol),
        ("separable_V", "C = 0 => V <= 1/27",
         m["C"] == 0.0, m["V"] <= V_SEPARABLE + tol),
        ("steerable2_certified3", "S > 2 => ||T||_F > 1",
         steerable2, certified3),
    ]
    checks = []
    for name, statement, premise, conclusion in rules:
        bad = np.flatnonzero(premise & ~conclusion)
        worst = _triple(m, int(bad[0])) if bad.size else None
        if bad.size:
            logger.error(f"{statement} fails on {bad.size} samples, first t = {worst}")
        checks.append(ImplicationCheck(
            name=name,
            statement=statement,
            premise_count=int(np.count_nonzero(premise)),
            violations=int(bad.size),
            worst_t=worst,
            passed=bad.size == 0,
        ))
    return checks


def _check_saturation(points: int, tol: float) -> List[SaturationCheck]:
    slack_of = {name: fn for name, _, fn, _ in BOUNDS}
    checks = []
    for family, name, (lo, hi) in SATURATING:
        m = measure_arrays(_family_triples(family, np.linspace(lo, hi, points)))
        gap = float(np.max(np.abs(slack_of[name](m))))
        checks.append(SaturationCheck(family=family, name=name, parameter_range=(lo, hi),
                                      max_gap=gap, passed=gap <= tol))
        if gap > tol:
            logger.error(f"{family} family does not saturate {name}: gap {gap:.3e}")
    return checks


def _extremes(m: Dict[str, np.ndarray]) -> Dict[str, float]:
    labels = m["class"]
    out: Dict[str, float] = {}
    groups = {
        "max_V_separable": labels == StateClass.separable.value,
        "max_V_unsteerable2": labels != StateClass.steerable2.value,
        "max_V_uncertified3": labels == StateClass.uncertified3.value,
    }
    for key, mask in groups.items():
        if np.any(mask):
            out[key] = float(m["V"][mask].max())
    for state_class in StateClass:
        out[f"fraction_{state_class.value}"] = float(np.mean(labels == state_class.value))
    return out


def verify_inequalities(
    n: int,
    seed: int,
    config: Optional[SteeringConfig] = None,
    workers: Optional[int] = None,
) -> InequalityReport:
    """Check every two-sided bound, the derived implications and the saturating families.

    Args:
        n: Number of uniform samples
        seed: Sampling seed
        config: Tolerances; defaults when None
        workers: Overrides ``config.workers`` for sampling

    Returns:
        InequalityReport; ``passed`` covers the bounds, ``strict_passed``
        adds implications and saturation
    """
    config = config or SteeringConfig()
    settings = config.verification
    m = measure_arrays(sample_triples(n, seed, workers=workers or config.workers))

    result = InequalityReport(
        n=n,
        seed=seed,
        checks=_check_bounds(m, settings.violation_tol),
        implications=_check_implications(m, settings.violation_tol),
        saturation=_check_saturation(settings.saturation_points, settings.saturation_tol),
        extremes=_extremes(m),
    )
    failed = [c.name for c in result.checks if not c.passed]
    if failed:
        logger.error(f"Inequality suite failed on {n} samples: {', '.join(failed)}")
    else:
        logger.info(f"All {len(result.checks)} bounds hold on {n} samples (seed {seed})")
    return result


# ============================================================================
# Families, Slices and Thresholds
# ============================================================================

def sweep_family(family: str, start: float, stop: float, step: float) -> List[SteeringReport]:
    """Reports along the Werner or edge family, one per parameter value.

    Raises:
        ValueError: On an unknown family, ``step <= 0`` or a range outside [0, 1]
    """
    if family not in FAMILIES:
        raise ValueError(f"family must be one of {FAMILIES}, got '{family}'")
    if step <= 0:
        raise ValueError(f"step must be positive, got {step}")
    if not 0.0 <= start <= stop <= 1.0:
        raise ValueError(f"sweep range must satisfy 0 <= from <= to <= 1, got [{start}, {stop}]")

    values = sweep_values(start, stop, step)
    build = werner if family == "werner" else edge
    return [report(build(float(x))) for x in values]


def sweep_values(start: float, stop: float, step: float) -> np.ndarray:
    """Parameter values visited by ``sweep_family``."""
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return np.minimum(start + step * np.arange(count), stop)


def region_slice(axis: str, value: float, resolution: int) -> pd.DataFrame:
    """Class labels on the plane ``axis = value`` over [-1, 1]^2.

    Returns:
        DataFrame with one row per cell (row, col, t1, t2, t3, class);
        cells outside the tetrahedron carry the label "invalid"
    """
    if axis not in AXES:
        raise PreconditionError(f"axis must be one of {AXES}, got '{axis}'")
    if abs(value) > 1.0:
        raise PreconditionError(f"slice value must satisfy |value| <= 1, got {value}")
    if resolution < MIN_RESOLUTION:
        raise PreconditionError(f"resolution must be >= {MIN_RESOLUTION}, got {resolution}")

    k = AXES.index(axis)
    a, b = (i for i in range(3) if i != k)
    grid = np.linspace(-1.0, 1.0, resolution)
    rows, cols = np.meshgrid(np.arange(resolution), np.arange(resolution), indexing="ij")
    t = np.empty((resolution * resolution, 3))
    t[:, a] = grid[rows.ravel()]
    t[:, b] = grid[cols.ravel()]
    t[:, k] = value

    valid = bell_probabilities(t).min(axis=1) >= -TOL_STATE
    labels = np.full(len(t), INVALID, dtype=object)
    if np.any(valid):
        labels[valid] = measure_arrays(t[valid])["class"]
    logger.info(f"Slice {axis} = {value}: {int(valid.sum())} of {len(t)} cells inside the tetrahedron")
    return pd.DataFrame({
        "row": rows.ravel(),
        "col": cols.ravel(),
        "t1": t[:, 0],
        "t2": t[:, 1],
        "t3": t[:, 2],
        "class": labels,
    })


def werner_thresholds(config: Optional[SteeringConfig] = None) -> Dict[str, float]:
    """Werner parameters where the class changes, bisected on [1/4, 1].

    Returns:
        ``separable`` (1/2), ``steerable3_certified`` ((sqrt3 + 1)/4) and
        ``steerable2`` ((3 sqrt2 + 2)/8)
    """
    settings = (config or SteeringConfig()).thresholds
    targets = {
        "separable": lambda f: spectrum(werner(f)).p_max - 0.5,
        "steerable3_certified": lambda f: frobenius_norm(werner(f)) - 1.0,
        "steerable2": lambda f: steering_measure(werner(f)) - 2.0,
    }
    out = {
        name: float(bisect(fn, 0.25, 1.0, xtol=settings.xtol, maxiter=settings.maxiter))
        for name, fn in targets.items()
    }
    logger.info(f"Werner thresholds: {out}")
    return out
