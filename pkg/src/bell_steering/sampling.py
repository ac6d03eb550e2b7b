"""
Uniform Monte Carlo sampling over the Bell-diagonal tetrahedron.

Bell probabilities are drawn from the flat Dirichlet distribution, which is
the uniform measure on the tetrahedron volume. Indices are grouped in
fixed-size chunks and chunk k draws from the substream
``default_rng([seed, k])``, so the state at a given index depends only on
(seed, index) and never on the number of workers.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from typing import Iterator

import numpy as np

from .errors import PreconditionError
from .models import BELL_VERTICES, BellDiagonalState
from .states import from_probabilities

logger = logging.getLogger(__name__)

CHUNK_SIZE = 4096


def _chunk_probabilities(seed: int, chunk: int) -> np.ndarray:
    rng = np.random.default_rng([seed, chunk])
    return rng.dirichlet(np.ones(4), size=CHUNK_SIZE)


def _check(n: int, seed: int) -> None:
    if n < 1:
        raise PreconditionError(f"sample size must be >= 1, got {n}")
    if seed < 0:
        raise PreconditionError(f"seed must be nonnegative, got {seed}")


def sample_probabilities(n: int, seed: int, workers: int = 1) -> np.ndarray:
    """Bell probabilities of the first ``n`` samples, shape (n, 4).

    Args:
        n: Number of samples
        seed: Nonnegative master seed
        workers: Process-pool size; 1 draws in this process

    Returns:
        Rows ordered p00, p01, p10, p11, identical for every ``workers``
    """
    _check(n, seed)
    n_chunks = (n + CHUNK_SIZE - 1) // CHUNK_SIZE
    draw = partial(_chunk_probabilities, seed)

    if workers > 1 and n_chunks > 1:
        logger.info(f"Sampling {n} states in {n_chunks} chunks on {workers} workers")
        with ProcessPoolExecutor(max_workers=workers) as executor:
            chunks = list(executor.map(draw, range(n_chunks)))
    else:
        chunks = [draw(k) for k in range(n_chunks)]
    return np.concatenate(chunks)[:n]


def sample_triples(n: int, seed: int, workers: int = 1) -> np.ndarray:
    """Raw correlation triples t = sum p_mu,nu v_mu,nu of the samples, shape (n, 3)."""
    return sample_probabilities(n, seed, workers=workers) @ BELL_VERTICES


def sample_state_at(seed: int, index: int) -> BellDiagonalState:
    """The sample at ``index`` without drawing the ones before its chunk."""
    if index < 0:
        raise PreconditionError(f"index must be nonnegative, got {index}")
    _check(1, seed)
    row = _chunk_probabilities(seed, index // CHUNK_SIZE)[index % CHUNK_SIZE]
    return from_probabilities(*row)


def sample_states(n: int, seed: int) -> Iterator[BellDiagonalState]:
    """Stream of ``n`` validated states, one chunk in memory at a time."""
    _check(n, seed)
    emitted = 0
    chunk = 0
    while emitted < n:
        for row in _chunk_probabilities(seed, chunk)[: n - emitted]:
            yield from_probabilities(*row)
            emitted += 1
        chunk += 1
