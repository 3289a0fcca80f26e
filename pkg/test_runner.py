import contextlib
import importlib.util
import io
import json
import os
import tempfile
import unittest

from main import build_services
from tools.ultra_runner import EXIT_INPUT, EXIT_OK, EXIT_USAGE, EXIT_VERDICT, run


def doc(points, dist, range_set=None):
    obj = {"points": points, "dist": [[str(v) for v in row] for row in dist]}
    if range_set:
        obj["range_set"] = range_set
    return json.dumps(obj)


VALID = doc(["a", "b", "c"], [[0, 1, 2], [1, 0, 2], [2, 2, 0]])
BROKEN = doc(["a", "b", "c"], [[0, 1, 3], [1, 0, 2], [3, 2, 0]])
TELESCOPE = json.dumps({"radii": {"kind": "geometric", "ratio": "1/2"}, "offset": 0,
                        "blocks": {"kind": "equidistant-growing", "start_size": 2}})
PROBLEM = json.dumps({"ambient": json.loads(VALID),
                      "family": [{"subset": ["a", "b"], "matrix": [["0", "4"], ["4", "0"]]}]})


class TestRunner(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.services = build_services()

    def call(self, *argv):
        out, err = io.StringIO(), io.StringIO()
        with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
            code = run(list(argv), self.services)
        text = out.getvalue()
        return code, (json.loads(text) if text.strip() else None)

    def test_validate_valid(self):
        """A valid space passes with its diameter reported."""
        code, report = self.call("validate", VALID)
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(report["command"], "validate")
        self.assertEqual(report["exact_values"]["diameter"], "2")
        self.assertTrue(all(v["passed"] for v in report["verdicts"]))

    def test_validate_violation(self):
        """A broken triangle fails with its witness triple."""
        code, report = self.call("validate", BROKEN)
        self.assertEqual(code, EXIT_VERDICT)
        verdict = report["verdicts"][0]
        self.assertEqual(verdict["name"], "TriangleViolation")
        self.assertEqual(verdict["witness"]["triple"], ["a", "c", "b"])

    def test_input_errors(self):
        """Unparseable and malformed input exits with the input code."""
        code, _ = self.call("validate", "{not json")
        self.assertEqual(code, EXIT_INPUT)
        code, report = self.call("validate", doc(["a", "b"], [[0, 1], [2, 0]]))
        self.assertEqual(code, EXIT_INPUT)
        self.assertEqual(report["verdicts"][0]["name"], "MalformedMatrix")
        code, _ = self.call("validate", doc(["a", "b"], [[0, "0.5"], ["0.5", 0]]))
        self.assertEqual(code, EXIT_INPUT)

    def test_usage_errors(self):
        """Unknown or incomplete commands exit with the usage code."""
        self.assertEqual(self.call("bogus")[0], EXIT_USAGE)
        self.assertEqual(self.call()[0], EXIT_USAGE)
        self.assertEqual(self.call("truncate", VALID)[0], EXIT_USAGE)

    def test_domain_error_becomes_verdict(self):
        """eps outside the range set is a failed verdict."""
        space = doc(["a", "b"], [[0, 1], [1, 0]], {"kind": "finite", "values": ["1", "4"]})
        code, report = self.call("truncate", space, "--eps", "2")
        self.assertEqual(code, EXIT_VERDICT)
        self.assertEqual(report["verdicts"][0]["name"], "NotInRangeSet")

    def test_dlps(self):
        code, report = self.call("dlps", "--range-set", '{"kind": "finite", "values": ["1", "3"]}')
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(report["outputs"]["space"]["points"], ["0", "1", "3"])
        self.assertIn("range_set", report["inputs"])

    def test_ud(self):
        d = doc(["a", "b"], [[0, 1], [1, 0]])
        e = doc(["a", "b"], [[0, 3], [3, 0]])
        code, report = self.call("ud", d, e)
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(report["exact_values"]["ud"], "3")
        self.assertEqual(report["exact_values"]["ud_scan"], "3")

    def test_interpolate(self):
        code, report = self.call("interpolate", PROBLEM)
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(report["exact_values"]["eta"], "4")
        self.assertEqual(report["exact_values"]["ud"], "4")
        self.assertEqual(len(report["inputs"]["problem"]), 64)

    def test_demo_niemytzki(self):
        code, report = self.call("demo-niemytzki", "--tol", "1/10")
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(report["outputs"]["index"], 11)
        code, report = self.call("demo-niemytzki", "--tol", "1/8", "--radii", "geometric")
        self.assertEqual(report["outputs"]["index"], 4)

    def test_witness_on_telescope(self):
        code, report = self.call("witness", TELESCOPE, "--C", "1", "10", "--alpha", "1")
        self.assertEqual(code, EXIT_OK)
        self.assertEqual([w["size"] for w in report["outputs"]["witnesses"]], [3, 12])

    def test_approx(self):
        space = doc(["a", "b", "c"], [[0, "1/3", 1], ["1/3", 0, 1], [1, 1, 0]])
        code, report = self.call("approx", space, "--eps", "1/10",
                                 "--target-range", '{"kind": "lattice", "step": "1/8"}')
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(report["outputs"]["space"]["dist"][0][1], "3/8")

    def test_perturb(self):
        code, report = self.call("perturb", TELESCOPE, "--eps", "1/8", "--C", "1", "--alpha", "1")
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(report["outputs"]["start_block"], 3)

    def test_out_file(self):
        """--out writes the report to a file instead of stdout."""
        with tempfile.TemporaryDirectory() as tmp:
            target = os.path.join(tmp, "report.json")
            code, report = self.call("embed", VALID, "--out", target)
            self.assertEqual(code, EXIT_OK)
            self.assertIsNone(report)
            with open(target, encoding="utf-8") as fh:
                saved = json.load(fh)
        self.assertEqual(saved["outputs"]["base"], "o")
        self.assertIn("isometry", [v["name"] for v in saved["verdicts"]])
        self.assertTrue(all(v["passed"] for v in saved["verdicts"]))

    def test_space_from_file_and_csv(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "space.json")
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(VALID)
            csv_path = os.path.join(tmp, "space.csv")
            with open(csv_path, "w", encoding="utf-8") as fh:
                fh.write(",a,b\na,0,1/2\nb,1/2,0\n")
            self.assertEqual(self.call("validate", path)[0], EXIT_OK)
            code, report = self.call("validate", csv_path)
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(report["exact_values"]["diameter"], "1/2")

    @unittest.skipUnless(importlib.util.find_spec("reportlab"), "reportlab not installed")
    def test_pdf_export(self):
        with tempfile.TemporaryDirectory() as tmp:
            target = os.path.join(tmp, "matrix.pdf")
            code, _ = self.call("validate", VALID, "--pdf", target)
            self.assertEqual(code, EXIT_OK)
            self.assertTrue(os.path.getsize(target) > 0)


if __name__ == "__main__":
    unittest.main()
