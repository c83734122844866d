import json
import unittest
from pathlib import Path

import numpy as np

from tropical_collapse.errors import InvalidInput
from tropical_collapse.reporting import Report, ReportBuilder
from tests.factories import temporary_directory


def sample_report() -> Report:
    return Report(
        kind="ghdist",
        payload={"lb": np.float64(0.25), "ub": 0.5, "meshes": np.array([0.1, 0.2]), "tags": {"b", "a"}},
        rows=[{"i": 100, "ub": 0.2}, {"i": 10, "ub": 0.4}],
        columns=("i", "ub"),
        dot='graph "G" {}',
    )


class ReportingTests(unittest.TestCase):
    def test_json_is_canonical(self):
        text = ReportBuilder("json").build(sample_report())
        self.assertEqual(
            json.loads(text), {"lb": 0.25, "ub": 0.5, "meshes": [0.1, 0.2], "tags": ["a", "b"]}
        )
        self.assertLess(text.index('"lb"'), text.index('"ub"'))

    def test_csv_rows_are_sorted(self):
        text = ReportBuilder("csv").build(sample_report())
        self.assertEqual(text.splitlines(), ["i,ub", "10,0.4", "100,0.2"])

    def test_unsorted_rows_keep_their_order(self):
        report = sample_report()
        report.sort_rows = False
        self.assertEqual(ReportBuilder("csv").build(report).splitlines()[1], "100,0.2")

    def test_table_counts_rows(self):
        text = ReportBuilder("TABLE ").build(sample_report())
        lines = text.splitlines()
        self.assertEqual(lines[1], "ghdist")
        self.assertEqual(lines[-1], "(2 rows)")

    def test_payload_is_flattened_without_rows(self):
        report = Report(kind="reduce", payload={"gamma": [[1, -5], [0, 1]], "ok": True})
        text = ReportBuilder("csv").build(report)
        self.assertIn("gamma[0][1],-5", text.splitlines())
        self.assertIn("ok,true", text.splitlines())

    def test_dot(self):
        self.assertEqual(ReportBuilder("dot").build(sample_report()), 'graph "G" {}')
        with self.assertRaises(InvalidInput):
            ReportBuilder("dot").build(Report(kind="reduce", payload={}))

    def test_unknown_format(self):
        with self.assertRaises(InvalidInput):
            ReportBuilder("html")

    def test_persist(self):
        with temporary_directory() as tmp:
            target = Path(tmp) / "nested" / "out.json"
            saved = ReportBuilder("json").persist("{}", target)
            self.assertEqual(Path(saved).read_text(encoding="utf-8"), "{}\n")


if __name__ == "__main__":  # pragma: no cover
    unittest.main()
