import unittest
from fractions import Fraction

from cyclechar.errors import ScenarioError
from cyclechar.scenario import bundled, load, loads, parse_complex
from cyclechar.selftest import FULL_ONLY, SCENARIOS

RANK_ONE = """{
  "version": 1,
  "name": "rank-one",
  "options": {"kernel": "exact", "tol": "1e-7", "seed": 3},
  "model": {"kind": "fredholm-even", "reference": "rank-one"},
  "tasks": [{"kind": "index-pairing", "m": 1}]
}"""


class TestParseComplex(unittest.TestCase):
    def test_forms(self):
        self.assertEqual(parse_complex("1/2-3i"), (Fraction(1, 2), Fraction(-3)))
        self.assertEqual(parse_complex("2i"), (0, 2))
        self.assertEqual(parse_complex("-i"), (0, -1))
        self.assertEqual(parse_complex("1+i"), (1, 1))
        self.assertEqual(parse_complex("1e-3+2i"), (Fraction(1, 1000), 2))


class TestLoads(unittest.TestCase):
    def test_valid(self):
        s = loads(RANK_ONE)
        self.assertEqual(s.name, "rank-one")
        self.assertEqual(s.options.kernel, "exact")
        self.assertEqual(s.options.tol, 1e-7)
        self.assertEqual(s.options.seed, 3)
        self.assertEqual(s.tasks[0].name, "index-pairing#0")
        self.assertEqual(s.tasks[0].params, {"m": 1})

    def test_unknown_field_reports_line(self):
        text = RANK_ONE.replace('"name": "rank-one",', '"name": "rank-one",\n  "bogus": true,')
        with self.assertRaises(ScenarioError) as cm:
            loads(text)
        self.assertEqual(cm.exception.field, "bogus")
        self.assertEqual(cm.exception.line, 4)
        self.assertIn("line=4", str(cm.exception))

    def test_unknown_model_field(self):
        text = RANK_ONE.replace('"reference": "rank-one"', '"reference": "rank-one", "Fx": 1')
        with self.assertRaises(ScenarioError) as cm:
            loads(text)
        self.assertEqual(cm.exception.field, "model.Fx")

    def test_bad_version(self):
        with self.assertRaises(ScenarioError) as cm:
            loads(RANK_ONE.replace('"version": 1', '"version": 2'))
        self.assertEqual(cm.exception.field, "version")

    def test_invalid_json(self):
        with self.assertRaises(ScenarioError) as cm:
            loads(RANK_ONE.replace('"m": 1}', '"m": 1,}'))
        self.assertEqual(cm.exception.line, 6)

    def test_task_model_mismatch(self):
        with self.assertRaises(ScenarioError) as cm:
            loads(RANK_ONE.replace('"index-pairing"', '"spectral-flow"'))
        self.assertEqual(cm.exception.field, "tasks[0].kind")

    def test_zero_alpha(self):
        text = RANK_ONE.replace('{"kind": "index-pairing", "m": 1}', '{"kind": "compute-character", "alpha": 0}')
        with self.assertRaises(ScenarioError):
            loads(text)

    def test_model_value_errors_surface_at_load(self):
        text = """{
  "version": 1,
  "model": {"kind": "fredholm-even", "F": [[0, 1, 0], [0, 0, 0], [1, 0, 0]],
            "gamma": [[1, 0, 0], [0, 1, 0], [0, 0, -1]]},
  "tasks": []
}"""
        with self.assertRaises(ScenarioError):
            loads(text)


class TestBundled(unittest.TestCase):
    def test_all_load(self):
        for name in SCENARIOS + FULL_ONLY:
            s = load(bundled(name))
            self.assertEqual(s.name, name)
            self.assertTrue(s.tasks, name)

    def test_missing(self):
        with self.assertRaises(ScenarioError):
            bundled("no-such-scenario")
        with self.assertRaises(ScenarioError):
            load("/nonexistent/scenario.json")


if __name__ == "__main__":
    unittest.main()
