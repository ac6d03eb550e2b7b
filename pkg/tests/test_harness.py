import math
import sys
import unittest
from pathlib import Path

import numpy as np
import pandas as pd

# Ensure package under src is importable
PROJECT_ROOT = Path(__file__).resolve().parents[1]
SRC_DIR = PROJECT_ROOT / "src"
sys.path.insert(0, str(SRC_DIR))

from bell_steering.config import S3Settings, SteeringConfig
from bell_steering.errors import PreconditionError
from bell_steering.harness import (
    classify,
    measure_table,
    region_slice,
    report,
    sample_table,
    sweep_family,
    verify_inequalities,
    werner_thresholds,
)
from bell_steering.models import SAMPLE_COLUMNS, StateClass
from bell_steering.sampling import sample_probabilities, sample_state_at, sample_states, sample_triples
from bell_steering.states import bell_state, edge, from_t, werner


class TestClassification(unittest.TestCase):

    def test_werner_classes(self):
        self.assertEqual(classify(werner(0.4)), StateClass.separable)
        self.assertEqual(classify(werner(0.6)), StateClass.uncertified3)
        self.assertEqual(classify(werner(0.7)), StateClass.steerable3)
        self.assertEqual(classify(werner(0.75)), StateClass.steerable3)
        self.assertEqual(classify(werner(0.85)), StateClass.steerable2)

    def test_class_labels(self):
        self.assertEqual(StateClass.uncertified3.value, "entangled-unsteerable2-uncertified3")
        self.assertEqual(StateClass.steerable3.value, "entangled-unsteerable2-steerable3")


class TestReport(unittest.TestCase):

    def test_singlet(self):
        r = report(bell_state(1, 1))
        self.assertAlmostEqual(r.concurrence, 1.0)
        self.assertAlmostEqual(r.steering, 2 * math.sqrt(2))
        self.assertEqual(r.chsh, r.steering)
        self.assertAlmostEqual(r.volume, 1.0)
        self.assertAlmostEqual(r.frobenius, math.sqrt(3))
        self.assertEqual(r.state_class, StateClass.steerable2)
        self.assertIsNone(r.s3_estimate)

    def test_maximally_mixed(self):
        r = report(werner(0.25))
        for value in (r.concurrence, r.steering, r.volume, r.frobenius, r.normalized_steering):
            self.assertEqual(value, 0.0)
        self.assertEqual(r.state_class, StateClass.separable)

    def test_with_s3_estimate(self):
        config = SteeringConfig(s3=S3Settings(restarts=1, max_evaluations=60))
        r = report(werner(0.7), with_s3_estimate=True, seed=3, config=config)
        self.assertGreaterEqual(r.s3_estimate, r.s3_lower - 1e-9)
        self.assertEqual(r.to_record(4).index, 4)

    def test_werner_volume_meets_upper_bound(self):
        r = report(werner(0.9))
        self.assertAlmostEqual(r.volume, 2.6 ** 3 / 27, places=12)
        self.assertAlmostEqual(r.volume, ((1 + 2 * r.concurrence) / 3) ** 3, places=12)

    def test_edge_meets_upper_bound(self):
        r = report(edge(0.8))
        self.assertAlmostEqual(r.concurrence, 0.6, places=12)
        self.assertAlmostEqual(r.steering, 2 * math.sqrt(1 + r.concurrence ** 2), places=12)


class TestSampling(unittest.TestCase):
    """Flat Dirichlet sampling with per-chunk substreams"""

    def test_single_state(self):
        states = list(sample_states(1, seed=0))
        self.assertEqual(len(states), 1)
        self.assertGreaterEqual(min(states[0].probabilities), 0.0)

    def test_uniform_mean(self):
        p = sample_probabilities(50_000, seed=1)
        np.testing.assert_allclose(p.mean(axis=0), 0.25, atol=0.005)

    def test_index_addressable(self):
        t = sample_triples(5000, seed=2)
        for index in (0, 17, 4095, 4096, 4999):
            s = sample_state_at(2, index)
            expected = from_t(*t[index])
            np.testing.assert_allclose(s.t, expected.t, atol=1e-15)

    def test_stream_matches_batch(self):
        p = sample_probabilities(10, seed=7)
        streamed = [s.t for s in sample_states(10, seed=7)]
        batch = [from_t(*row).t for row in p @ np.array([
            [1.0, -1.0, 1.0], [1.0, 1.0, -1.0], [-1.0, 1.0, 1.0], [-1.0, -1.0, -1.0],
        ])]
        np.testing.assert_allclose(streamed, batch, atol=1e-15)

    def test_rejects_empty(self):
        with self.assertRaises(PreconditionError):
            sample_probabilities(0, seed=1)


class TestMeasureTable(unittest.TestCase):

    def test_schema(self):
        df = measure_table(sample_triples(10, seed=3))
        self.assertEqual(list(df.columns), SAMPLE_COLUMNS)
        self.assertEqual(list(df["index"]), list(range(10)))
        self.assertTrue(df["s3est"].isna().all())

    def test_matches_scalar_reports(self):
        t = sample_triples(200, seed=4)
        df = measure_table(t)
        for i, row in df.iterrows():
            r = report(from_t(*t[i]))
            self.assertEqual(row["class"], r.state_class.value)
            self.assertAlmostEqual(row["S"], r.steering, places=12)
            self.assertAlmostEqual(row["C"], r.concurrence, places=12)
            self.assertAlmostEqual(row["V"], r.volume, places=12)
            self.assertAlmostEqual(row["frob"], r.frobenius, places=12)

    def test_deterministic(self):
        pd.testing.assert_frame_equal(sample_table(300, seed=5), sample_table(300, seed=5))

    def test_weights_follow_the_draw(self):
        df = sample_table(500, seed=6)
        p = sample_probabilities(500, seed=6)
        np.testing.assert_allclose(df[["p00", "p01", "p10", "p11"]].to_numpy(), p, atol=1e-15)
        np.testing.assert_allclose(df["C"], np.maximum(0.0, 2.0 * p.max(axis=1) - 1.0), atol=1e-12)


class TestInequalities(unittest.TestCase):
    """Bounds, implications and saturating families"""

    @classmethod
    def setUpClass(cls):
        cls.result = verify_inequalities(20_000, seed=11)

    def test_bounds_hold(self):
        self.assertEqual(len(self.result.checks), 10)
        for check in self.result.checks:
            self.assertTrue(check.passed, msg=f"{check.name}: {check.max_violation}")
        self.assertTrue(self.result.passed)

    def test_entangled_only_bounds(self):
        conditional = {c.name for c in self.result.checks if c.applies_to == "entangled"}
        self.assertEqual(conditional, {"S_lower_C", "F_lower_C"})

    def test_implications_and_saturation(self):
        for check in self.result.implications:
            self.assertTrue(check.passed, msg=check.statement)
        for check in self.result.saturation:
            self.assertTrue(check.passed, msg=f"{check.family} {check.name}: {check.max_gap}")
        self.assertTrue(self.result.strict_passed)

    def test_extremal_volumes(self):
        self.assertLessEqual(self.result.extremes["max_V_separable"], 1 / 27 + 1e-12)
        self.assertLessEqual(self.result.extremes["max_V_unsteerable2"], 1 / (2 * math.sqrt(2)) + 1e-12)
        self.assertAlmostEqual(report(from_t(1 / 3, 1 / 3, -1 / 3)).volume, 1 / 27, places=15)


class TestSweepsAndSlices(unittest.TestCase):

    def test_werner_sweep(self):
        reports = sweep_family("werner", 0.0, 1.0, 0.25)
        self.assertEqual(len(reports), 5)
        unit = 2 * math.sqrt(2) / 3
        for r, factor in zip(reports, (1, 0, 1, 2, 3)):
            self.assertAlmostEqual(r.steering, unit * factor, places=12)

    def test_werner_sweep_monotone(self):
        values = [r.steering for r in sweep_family("werner", 0.25, 1.0, 0.05)]
        self.assertTrue(all(b >= a for a, b in zip(values, values[1:])))

    def test_edge_sweep(self):
        reports = sweep_family("edge", 0.5, 1.0, 0.1)
        self.assertEqual(reports[0].steering, 2.0)
        self.assertAlmostEqual(reports[-1].steering, 2 * math.sqrt(2), places=12)
        for r in reports[1:]:
            self.assertEqual(r.state_class, StateClass.steerable2)

    def test_sweep_validation(self):
        with self.assertRaises(ValueError):
            sweep_family("werner", 0.0, 1.0, 0.0)
        with self.assertRaises(ValueError):
            sweep_family("werner", 0.5, 1.2, 0.1)
        with self.assertRaises(ValueError):
            sweep_family("isotropic", 0.0, 1.0, 0.1)

    def test_slice_through_center(self):
        df = region_slice("t3", 0.0, 41)
        self.assertEqual(len(df), 41 * 41)
        valid = df[df["class"] != "invalid"]
        self.assertTrue((valid["class"] == StateClass.separable.value).all())
        outside = df[np.abs(df["t1"]) + np.abs(df["t2"]) > 1 + 1e-9]
        self.assertTrue((outside["class"] == "invalid").all())

    def test_steerable_cells_leave_cylinder(self):
        df = region_slice("t1", 0.8, 41)
        steerable = df[df["class"] == StateClass.steerable2.value]
        self.assertGreater(len(steerable), 0)
        canonical = np.sort(np.abs(df.loc[steerable.index, ["t1", "t2", "t3"]].to_numpy()), axis=1)[:, ::-1]
        self.assertTrue(np.all(canonical[:, 0] ** 2 + canonical[:, 1] ** 2 > 1))

    def test_slice_at_face_keeps_only_edge(self):
        df = region_slice("t3", 1.0, 33)
        valid = df[df["class"] != "invalid"]
        self.assertEqual(len(valid), 33)
        np.testing.assert_allclose(valid["t1"] + valid["t2"], 0.0, atol=1e-12)

    def test_slice_validation(self):
        with self.assertRaises(PreconditionError):
            region_slice("t3", 0.0, 8)
        with self.assertRaises(PreconditionError):
            region_slice("t3", 1.5, 32)
        with self.assertRaises(PreconditionError):
            region_slice("t4", 0.0, 32)


class TestThresholds(unittest.TestCase):

    def test_werner_transitions(self):
        found = werner_thresholds()
        self.assertAlmostEqual(found["separable"], 0.5, delta=1e-9)
        self.assertAlmostEqual(found["steerable3_certified"], (math.sqrt(3) + 1) / 4, delta=1e-9)
        self.assertAlmostEqual(found["steerable2"], (3 * math.sqrt(2) + 2) / 8, delta=1e-9)


if __name__ == "__main__":
    unittest.main()
