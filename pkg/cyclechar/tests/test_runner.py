import io
import json
import os
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout

from cyclechar.cli import main
from cyclechar.logger import add_console_handler, logger, setup_logger, timed
from cyclechar.progress import ProgressPrinter, format_elapsed
from cyclechar.runner import WINDOW_NOTE, Report, run
from cyclechar.scenario import bundled, load, loads

RANK_ONE = """{
  "version": 1,
  "name": "rank-one",
  "options": {"seed": 3},
  "model": {"kind": "fredholm-even", "reference": "rank-one"},
  "tasks": [
    {"kind": "index-pairing", "name": "index", "m": 1},
    {"kind": "compute-character", "name": "values", "m": 1, "limit": 2}
  ]
}"""


EMPTY = """{"version": 1, "model": {"kind": "fredholm-even", "reference": "rank-one"}, "tasks": []}"""


class TestRun(unittest.TestCase):
    def test_rank_one(self):
        report = run(loads(RANK_ONE))
        self.assertTrue(report.passed)
        self.assertEqual(report.exit_code, 0)
        self.assertEqual(report.counts(), {"pass": 2, "fail": 0, "error": 0})
        row = report.tasks[0].values["pairings"][0]
        self.assertEqual(row["index"]["index"], 1)

    def test_options_precedence(self):
        report = run(loads(RANK_ONE), kernel="float", budget=500)
        self.assertEqual(report.options["kernel"], "float")
        self.assertEqual(report.options["budget"], 500)
        self.assertEqual(report.options["seed"], 3)
        self.assertEqual(report.options["tol"], 1e-9)
        self.assertTrue(report.passed)

    def test_empty_task_list(self):
        report = run(loads(EMPTY))
        self.assertEqual(report.tasks, [])
        self.assertTrue(report.passed)
        self.assertIn("summary: 0 tasks", report.render_text())

    def test_report_omits_timing(self):
        report = run(loads(RANK_ONE))
        task = report.to_dict()["tasks"][0]
        self.assertNotIn("elapsed_ms", task)
        self.assertIn("elapsed_ms", report.to_dict(timing=True)["tasks"][0])
        self.assertIn("B_sign", report.to_dict()["conventions"])

    def test_odd_model_on_exact_kernel(self):
        report = run(load(bundled("winding")), kernel="exact")
        self.assertTrue(report.passed)
        self.assertEqual(report.tasks[0].values["winding"]["window_flow"], 1)
        self.assertEqual(report.tasks[0].values["winding"]["total_flow"], 0)
        self.assertIn("surrogate", report.tasks[0].values["winding"]["note"])
        window = [c for c in report.tasks[0].checks if c["label"] == "window flow"][0]
        self.assertEqual(window["note"], WINDOW_NOTE)

    def test_text_matches_json(self):
        report = run(loads(RANK_ONE))
        text = report.render_text()
        self.assertTrue(text.startswith("scenario: rank-one"))
        self.assertIn("[PASS] index (index-pairing)", text)
        self.assertIsInstance(report, Report)


class TestCli(unittest.TestCase):
    def _main(self, argv):
        out, err = io.StringIO(), io.StringIO()
        with redirect_stdout(out), redirect_stderr(err):
            code = main(argv)
        return code, out.getvalue(), err.getvalue()

    def test_run_writes_report(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "rank_one.json")
            with open(path, "w", encoding="utf-8") as f:
                f.write(RANK_ONE)
            out_path = os.path.join(tmp, "out", "report.json")
            code, out, _ = self._main(["run", path, "--no-progress", "--out", out_path])
            self.assertEqual(code, 0)
            self.assertIn("summary: 2 tasks, 2 passed", out)
            with open(out_path, encoding="utf-8") as f:
                data = json.load(f)
            self.assertTrue(data["passed"])
            self.assertEqual(data["scenario"], "rank-one")

    def test_bad_scenario(self):
        code, out, err = self._main(["run", "/nonexistent/scenario.json", "--no-progress"])
        self.assertEqual(code, 2)
        self.assertEqual(out, "")
        self.assertIn("invalid scenario", err)

    def test_unknown_field(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "bad.json")
            with open(path, "w", encoding="utf-8") as f:
                f.write(RANK_ONE.replace('"seed": 3', '"seed": 3, "speed": 1'))
            code, _, err = self._main(["run", path, "--no-progress", "--log-level", "CRITICAL"])
            self.assertEqual(code, 2)
            self.assertIn("field=options.speed", err)


class TestProgress(unittest.TestCase):
    def test_lines_and_tally(self):
        stream = io.StringIO()
        p = ProgressPrinter(stream=stream)
        p.start("rank-one/index", 1, 2)
        p.done("pass")
        p.start("rank-one/coin", 2, 2)
        p.done("fail")
        p.finish()
        lines = stream.getvalue().splitlines()
        self.assertTrue(lines[0].startswith("✓ [1/2] rank-one/index pass"))
        self.assertTrue(lines[1].startswith("✗ [2/2] rank-one/coin fail"))
        self.assertEqual(lines[2], "done: 1 pass, 1 fail, 0 error")

    def test_disabled_still_counts(self):
        stream = io.StringIO()
        p = ProgressPrinter(enabled=False, stream=stream)
        p.start("x")
        p.done("error")
        p.finish()
        self.assertEqual(stream.getvalue(), "")
        self.assertEqual(p.tally["error"], 1)

    def test_format_elapsed(self):
        self.assertEqual(format_elapsed(2.25), "2.2s")
        self.assertEqual(format_elapsed(125), "2m5s")


class TestLogger(unittest.TestCase):
    def tearDown(self):
        setup_logger(level="WARNING", console=False)

    def test_file_and_timed(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "logs", "run.log")
            setup_logger(filepath=path, level="DEBUG", console=False)
            with timed("character k=%d", 2):
                pass
            for h in logger.handlers:
                h.close()
            with open(path, encoding="utf-8") as f:
                self.assertIn("character k=2 (", f.read())

    def test_console_handler(self):
        setup_logger(level="WARNING", console=False)
        add_console_handler("DEBUG")
        self.assertEqual(len(logger.handlers), 2)
        self.assertTrue(logger.isEnabledFor(10))


if __name__ == "__main__":
    unittest.main()
