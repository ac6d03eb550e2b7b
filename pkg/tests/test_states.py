import math
import sys
import unittest
from pathlib import Path

import numpy as np

# Ensure package under src is importable
PROJECT_ROOT = Path(__file__).resolve().parents[1]
SRC_DIR = PROJECT_ROOT / "src"
sys.path.insert(0, str(SRC_DIR))

from bell_steering.errors import InvalidStateError, PreconditionError
from bell_steering.models import BellDiagonalState, NoisyObservable, Spectrum4
from bell_steering.sampling import sample_probabilities
from bell_steering.states import (
    bell_probabilities,
    bell_state,
    canonicalize,
    canonicalize_batch,
    concurrence,
    edge,
    ellipsoid_volume,
    frobenius_norm,
    from_correlation_matrix,
    from_probabilities,
    from_t,
    is_in_octahedron,
    is_separable,
    semiaxes,
    spectrum,
    steering_equivalent,
    werner,
)
from bell_steering.steering_two import steering_measure


def rotation(axis, angle):
    k = np.asarray(axis, dtype=float)
    k = k / np.linalg.norm(k)
    kx = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + math.sin(angle) * kx + (1 - math.cos(angle)) * kx @ kx


class TestConstructors(unittest.TestCase):
    """Building states from triples, probabilities and matrices"""

    def test_from_t_canonicalizes(self):
        s = from_t(-0.2, 0.5, 0.1)
        self.assertEqual(s.t, (0.5, 0.2, -0.1))
        self.assertEqual(s.raw_T[0][0], -0.2)

    def test_from_t_outside_tetrahedron(self):
        with self.assertRaises(InvalidStateError) as ctx:
            from_t(1.0, 1.0, 1.0)
        self.assertIn("p11", str(ctx.exception))

    def test_all_bell_states_share_canonical_form(self):
        for mu in (0, 1):
            for nu in (0, 1):
                self.assertEqual(bell_state(mu, nu).t, (1.0, 1.0, -1.0))
        with self.assertRaises(PreconditionError):
            bell_state(2, 0)

    def test_from_probabilities(self):
        singlet = from_probabilities(0.0, 0.0, 0.0, 1.0)
        self.assertEqual(singlet.t, (1.0, 1.0, -1.0))
        mixed = from_probabilities(0.25, 0.25, 0.25, 0.25)
        np.testing.assert_allclose(mixed.t, (0.0, 0.0, 0.0), atol=1e-15)

    def test_from_probabilities_errors(self):
        with self.assertRaises(PreconditionError):
            from_probabilities(-0.1, 0.4, 0.4, 0.3)
        with self.assertRaises(PreconditionError):
            from_probabilities(0.2, 0.2, 0.2, 0.3)

    def test_probabilities_round_trip(self):
        s = from_probabilities(0.1, 0.2, 0.3, 0.4)
        np.testing.assert_allclose(sorted(s.probabilities), [0.1, 0.2, 0.3, 0.4], atol=1e-15)

    def test_from_correlation_matrix(self):
        s = from_correlation_matrix(np.diag([1.0, -1.0, 1.0]))
        self.assertEqual(s.t, (1.0, 1.0, -1.0))
        r = rotation([1, 1, 0], 0.4)
        q = rotation([0, 0, 1], 2.2)
        s = from_correlation_matrix(r @ np.diag([0.5, 0.3, 0.1]) @ q.T)
        np.testing.assert_allclose(s.t, (0.5, 0.3, 0.1), atol=1e-12)
        with self.assertRaises(PreconditionError):
            from_correlation_matrix(np.eye(2))

    def test_werner(self):
        self.assertEqual(werner(0.25).t, (0.0, 0.0, 0.0))
        np.testing.assert_allclose(werner(1.0).t, (1.0, 1.0, -1.0))
        np.testing.assert_allclose(werner(0.0).t, (1 / 3, 1 / 3, 1 / 3))
        with self.assertRaises(PreconditionError):
            werner(1.5)

    def test_edge(self):
        np.testing.assert_allclose(edge(0.8).t, (1.0, 0.6, -0.6), atol=1e-15)
        self.assertEqual(edge(0.5).t, (1.0, 0.0, 0.0))
        np.testing.assert_allclose(edge(0.2).t, edge(0.8).t)
        with self.assertRaises(PreconditionError):
            edge(-0.1)

    def test_direct_model_validation(self):
        with self.assertRaises(ValueError):
            BellDiagonalState(t=(0.1, 0.5, 0.0))
        with self.assertRaises(ValueError):
            BellDiagonalState(t=(1.0, 1.0, 1.0))
        with self.assertRaises(ValueError):
            NoisyObservable(r=(1.0, 1.0, 0.0))
        with self.assertRaises(ValueError):
            Spectrum4(p=(0.5, 0.1, 0.2, 0.2))


class TestCanonicalForm(unittest.TestCase):

    def test_scalar(self):
        self.assertEqual(canonicalize((-1.0, -1.0, -1.0)), (1.0, 1.0, -1.0))
        self.assertEqual(canonicalize((0.1, -0.3, -0.2)), (0.3, 0.2, 0.1))

    def test_batch_matches_scalar(self):
        rng = np.random.default_rng(2)
        t = rng.uniform(-1, 1, size=(200, 3))
        batch = canonicalize_batch(t)
        for row, expected in zip(batch, t):
            self.assertEqual(tuple(row), canonicalize(expected))

    def test_bell_probabilities_sum_to_one(self):
        t = sample_probabilities(500, seed=4) @ np.array([
            [1.0, -1.0, 1.0], [1.0, 1.0, -1.0], [-1.0, 1.0, 1.0], [-1.0, -1.0, -1.0],
        ])
        np.testing.assert_allclose(bell_probabilities(t).sum(axis=1), 1.0, atol=1e-12)


class TestMeasures(unittest.TestCase):
    """Closed-form scalar measures"""

    def test_werner_spectrum(self):
        for f in (0.1, 0.5, 0.9):
            p = spectrum(werner(f)).p
            np.testing.assert_allclose(sorted(p), sorted([f] + [(1 - f) / 3] * 3), atol=1e-15)

    def test_concurrence(self):
        self.assertAlmostEqual(concurrence(werner(0.9)), 0.8, places=12)
        self.assertEqual(concurrence(werner(0.5)), 0.0)
        self.assertEqual(concurrence(werner(0.3)), 0.0)
        self.assertAlmostEqual(concurrence(bell_state(1, 1)), 1.0, places=15)

    def test_separability(self):
        self.assertTrue(is_separable(werner(0.5)))
        self.assertFalse(is_separable(bell_state(0, 1)))
        self.assertTrue(is_separable(edge(0.5)))

    def test_octahedron_matches_separability(self):
        for p in sample_probabilities(2000, seed=9):
            s = from_probabilities(*p)
            self.assertEqual(is_in_octahedron(s), is_separable(s))

    def test_volume_and_norm(self):
        self.assertAlmostEqual(ellipsoid_volume(werner(0.9)), 2.6 ** 3 / 27, places=12)
        self.assertAlmostEqual(ellipsoid_volume(bell_state(0, 0)), 1.0)
        self.assertAlmostEqual(frobenius_norm(bell_state(0, 0)), math.sqrt(3.0))
        self.assertAlmostEqual(frobenius_norm(werner(0.7)), 1.8 / math.sqrt(3.0), places=12)
        self.assertEqual(semiaxes(from_t(0.2, -0.5, 0.1)), (0.5, 0.2, 0.1))


class TestSteeringEquivalent(unittest.TestCase):

    def test_singlet_axis(self):
        r = steering_equivalent(bell_state(1, 1), (1.0, 0.0, 0.0))
        np.testing.assert_allclose(r.vector, (1.0, 0.0, 0.0))

    def test_shrinks_by_semiaxes(self):
        s = from_t(0.6, 0.3, 0.05)
        e = np.array([1.0, 1.0, 1.0]) / math.sqrt(3.0)
        np.testing.assert_allclose(steering_equivalent(s, e).vector, np.array(s.t) * e, atol=1e-15)

    def test_stays_in_bloch_ball(self):
        rng = np.random.default_rng(43)
        for p in sample_probabilities(500, seed=44):
            s = from_probabilities(*p)
            for e in rng.standard_normal((20, 3)):
                r = steering_equivalent(s, e / np.linalg.norm(e))
                self.assertLessEqual(float(np.linalg.norm(r.vector)), 1.0 + 1e-12)

    def test_rejects_non_unit(self):
        with self.assertRaises(PreconditionError):
            steering_equivalent(werner(0.9), (1.0, 1.0, 0.0))


class TestLocalRotations(unittest.TestCase):
    """Measures depend on the singular values only"""

    def test_measures_invariant_under_rotations(self):
        rng = np.random.default_rng(47)
        for p in sample_probabilities(200, seed=48):
            s = from_probabilities(*p)
            r1 = rotation(rng.standard_normal(3), rng.uniform(0, 2 * math.pi))
            r2 = rotation(rng.standard_normal(3), rng.uniform(0, 2 * math.pi))
            rotated = from_correlation_matrix(r1 @ np.diag(s.t) @ r2.T)
            np.testing.assert_allclose(rotated.t, s.t, atol=1e-12)
            self.assertAlmostEqual(steering_measure(rotated), steering_measure(s), delta=1e-12)
            self.assertAlmostEqual(concurrence(rotated), concurrence(s), delta=1e-12)
            self.assertAlmostEqual(ellipsoid_volume(rotated), ellipsoid_volume(s), delta=1e-12)
            self.assertAlmostEqual(frobenius_norm(rotated), frobenius_norm(s), delta=1e-12)


if __name__ == "__main__":
    unittest.main()
