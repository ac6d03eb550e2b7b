import math
import sys
import time
import unittest
from pathlib import Path

import numpy as np

# Ensure package under src is importable
PROJECT_ROOT = Path(__file__).resolve().parents[1]
SRC_DIR = PROJECT_ROOT / "src"
sys.path.insert(0, str(SRC_DIR))

from bell_steering.config import OracleSettings
from bell_steering.errors import PreconditionError
from bell_steering.linalg import total_distance, weiszfeld
from bell_steering.models import NoisyObservable, ParentStatus
from bell_steering.oracles import ft_direct_oracle, parent_povm_feasible, parent_povm_search, s_grid_oracle
from bell_steering.sampling import sample_states
from bell_steering.states import bell_state, from_correlation_matrix, werner
from bell_steering.steering_two import pair_compatible, parallelogram_sum, steering_measure
from bell_steering.steering_three import ft_orthogonal, lambda_vectors


def obs(*r):
    return NoisyObservable(r=tuple(float(x) for x in r))


class TestGridOracle(unittest.TestCase):
    """Grid maximum of the parallelogram sum"""

    def test_maximally_mixed(self):
        self.assertEqual(s_grid_oracle(werner(0.25), 8, 8), 0.0)

    def test_singlet(self):
        self.assertAlmostEqual(s_grid_oracle(bell_state(1, 1), 16, 32), 2 * math.sqrt(2), delta=2e-3)

    def test_werner(self):
        expected = 2 * math.sqrt(2) / 3 * 2.6
        self.assertAlmostEqual(s_grid_oracle(werner(0.9), 16, 32), expected, delta=2e-3)

    def test_bounded_by_closed_form(self):
        for s in sample_states(20, seed=6):
            value = s_grid_oracle(s, 16, 32)
            self.assertLessEqual(value, steering_measure(s) + 1e-12)
            self.assertGreater(value, steering_measure(s) - 2e-3)

    def test_rotated_state_refinement(self):
        rng = np.random.default_rng(8)
        q1, _ = np.linalg.qr(rng.standard_normal((3, 3)))
        q2, _ = np.linalg.qr(rng.standard_normal((3, 3)))
        s = from_correlation_matrix(q1 @ np.diag([0.55, 0.3, 0.1]) @ q2.T)
        coarse = s_grid_oracle(s, 16, 32)
        fine = s_grid_oracle(s, 32, 64)
        self.assertLessEqual(coarse, fine + 1e-12)
        self.assertLessEqual(fine, steering_measure(s) + 1e-12)
        self.assertGreater(fine, steering_measure(s) - 2e-2)

    def test_settings_set_the_grid(self):
        s = from_correlation_matrix(np.diag([0.7, -0.4, 0.2]))
        settings = OracleSettings(n_theta=16, n_phi=32)
        self.assertEqual(s_grid_oracle(s, settings=settings), s_grid_oracle(s, 16, 32))
        self.assertEqual(s_grid_oracle(s, n_phi=64, settings=settings), s_grid_oracle(s, 16, 64))

    def test_rejects_small_grid(self):
        with self.assertRaises(PreconditionError):
            s_grid_oracle(werner(0.9), 4, 16)


class TestDirectFTOracle(unittest.TestCase):

    def test_identical_points(self):
        q = np.array([0.2, -0.4, 0.1])
        self.assertLess(np.linalg.norm(ft_direct_oracle(np.tile(q, (4, 1))) - q), 1e-6)

    def test_regular_tetrahedron(self):
        points = np.array([[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]])
        self.assertLess(np.linalg.norm(ft_direct_oracle(points)), 1e-6)

    def test_never_beats_weiszfeld(self):
        rng = np.random.default_rng(13)
        for _ in range(20):
            points = rng.uniform(-1, 1, size=(4, 3))
            direct = total_distance(points, ft_direct_oracle(points))
            iterative = weiszfeld(points).total_distance
            self.assertGreaterEqual(direct, iterative - 1e-7)
            self.assertAlmostEqual(direct, iterative, delta=1e-6)

    def test_matches_closed_form(self):
        r1, r2, r3 = obs(0.6, 0.2, 0), obs(-0.3, 0.5, 0), obs(0, 0, 0.4)
        lam = lambda_vectors(r1, r2, r3)
        np.testing.assert_allclose(ft_direct_oracle(lam), ft_orthogonal(r1, r2, r3), atol=1e-6)


class TestParentPOVM(unittest.TestCase):
    """Four-outcome parent search for two noisy observables"""

    def test_repeated_observable(self):
        r = obs(0.8, 0, 0)
        self.assertEqual(parent_povm_feasible(r, r), ParentStatus.feasible)

    def test_sharp_orthogonal_pair(self):
        self.assertEqual(parent_povm_feasible(obs(1, 0, 0), obs(0, 1, 0)), ParentStatus.infeasible)

    def test_unsharp_orthogonal_pair(self):
        result = parent_povm_search(obs(0.6, 0, 0), obs(0, 0.6, 0))
        self.assertTrue(result.feasible)
        self.assertAlmostEqual(sum(result.weights), 2.0, places=12)
        np.testing.assert_allclose(result.vectors.sum(axis=0), np.zeros(3), atol=1e-12)
        norms = np.linalg.norm(result.vectors, axis=1)
        self.assertTrue(np.all(norms <= np.array(result.weights) + 1e-9))

    def test_agrees_with_pair_criterion(self):
        rng = np.random.default_rng(21)
        checked = 0
        started = time.perf_counter()
        while checked < 40:
            v = rng.standard_normal((2, 3))
            v *= (rng.random((2, 1)) ** (1 / 3)) / np.linalg.norm(v, axis=1, keepdims=True)
            if abs(parallelogram_sum(v[0], v[1]) - 2) <= 0.05:
                continue
            r1, r2 = NoisyObservable.from_vector(v[0]), NoisyObservable.from_vector(v[1])
            expected = ParentStatus.feasible if pair_compatible(r1, r2) else ParentStatus.infeasible
            self.assertEqual(parent_povm_feasible(r1, r2), expected)
            checked += 1
        self.assertLess(time.perf_counter() - started, 20.0)

    def test_infeasible_pair_stops_early(self):
        result = parent_povm_search(obs(1, 0, 0), obs(0, 1, 0))
        self.assertEqual(result.status, ParentStatus.infeasible)
        self.assertLess(result.restarts_used, OracleSettings().restarts)
        self.assertAlmostEqual(result.violation, (2 * math.sqrt(2) - 2) / 4, delta=1e-6)

    def test_settings_drive_the_search(self):
        x, y = obs(1, 0, 0), obs(0, 1, 0)
        loose = OracleSettings(tol=0.5)
        self.assertEqual(parent_povm_feasible(x, y, settings=loose), ParentStatus.boundary_inconclusive)
        self.assertEqual(parent_povm_feasible(x, y, tol=1e-6, settings=loose), ParentStatus.infeasible)
        single = parent_povm_search(x, y, settings=OracleSettings(restarts=1))
        self.assertEqual(single.restarts_used, 1)
        patient = parent_povm_search(x, y, settings=OracleSettings(restarts=5, patience=1))
        self.assertLessEqual(patient.restarts_used, 5)

    def test_rejects_bad_arguments(self):
        with self.assertRaises(PreconditionError):
            parent_povm_search(obs(0.5, 0, 0), obs(0, 0.5, 0), tol=0.0)


if __name__ == "__main__":
    unittest.main()
