import io
import json
import tempfile
import unittest
from pathlib import Path
from unittest.mock import patch

import numpy as np

from pymskdx.cli import EXIT_BACKEND, EXIT_OK, EXIT_PARTIAL, EXIT_USAGE, main
from pymskdx.core.gateway import MockBackend
from pymskdx.core.models import LabelSet, ReportRecord
from pymskdx.core.parser import parse_student_list
from pymskdx.core.vocabulary import default_vocabulary
from pymskdx.services import store
from pymskdx.utils.cache import file_digest

VOCAB = default_vocabulary()
IMPRESSIONS = (
    "Acute displaced distal radius fracture.",
    "Erosive changes at the first MTP joint, possibly gout.",
    "Full-thickness supraspinatus tear.",
    "Soft tissue swelling compatible with cellulitis. No osteomyelitis.",
    "No acute osseous abnormality.",
)
MODALITIES = ("CR", "CT", "MR", "US")


def _run(*argv):
    """(código de salida, stdout) de una invocación de la CLI."""
    with patch("sys.stdout", new_callable=io.StringIO) as stdout:
        code = main([str(a) for a in argv])
    return code, stdout.getvalue()


class CliTestCase(unittest.TestCase):

    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def write_corpus(self, n: int, name: str = "corpus.jsonl") -> Path:
        reports = [ReportRecord(report_id=f"r{i}", modality=MODALITIES[i % 4],
                                impression=f"{IMPRESSIONS[i % 5]} Series {i}.") for i in range(n)]
        return store.write_reports(reports, self.tmp / name)


class TestPipeline(CliTestCase):

    def _pipeline(self, corpus: Path, out: Path) -> None:
        self.assertEqual(_run("label", "--corpus", corpus, "--out", out / "label", "--seed", 7)[0], EXIT_OK)
        self.assertEqual(_run("vote", "--runs-file", out / "label" / "runs.jsonl",
                              "--out", out / "revoted.jsonl")[0], EXIT_OK)
        self.assertEqual(_run("split", "--labels", out / "label" / "labels.jsonl", "--out", out / "split")[0],
                         EXIT_OK)
        self.assertEqual(_run("emit-finetune", "--corpus", corpus, "--labels", out / "label" / "labels.jsonl",
                              "--assignment", out / "split" / "assignment.jsonl", "--out", out / "ft")[0], EXIT_OK)

    def test_end_to_end_is_reproducible(self):
        corpus = self.write_corpus(50)
        self._pipeline(corpus, self.tmp / "a")
        self._pipeline(corpus, self.tmp / "b")

        for relative in ("label/labels.jsonl", "label/runs.jsonl", "split/assignment.jsonl", "split/quality.json",
                         "ft/finetune.jsonl", "ft/train.jsonl", "ft/validation.jsonl"):
            with self.subTest(relative):
                self.assertEqual(file_digest(self.tmp / "a" / relative), file_digest(self.tmp / "b" / relative))

        labels_path = self.tmp / "a" / "label" / "labels.jsonl"
        self.assertEqual(labels_path.read_bytes(), (self.tmp / "a" / "revoted.jsonl").read_bytes())

        labels = store.read_labels(labels_path)
        rows = [json.loads(line) for line in (self.tmp / "a" / "ft" / "finetune.jsonl").read_text("utf-8").splitlines()]
        self.assertEqual(len(rows), 50)
        for report_id, row in zip(labels, rows):
            self.assertEqual(parse_student_list(row["completion"], VOCAB).label_set, labels[report_id].label_set)

        train = (self.tmp / "a" / "ft" / "train.jsonl").read_text("utf-8").splitlines()
        validation = (self.tmp / "a" / "ft" / "validation.jsonl").read_text("utf-8").splitlines()
        self.assertEqual(len(train) + len(validation), 50)

        for step in ("label", "split", "ft"):
            verified = store.verify_manifest(self.tmp / "a" / step / "manifest.json")
            self.assertTrue(verified and all(verified.values()), msg=step)


class TestLabelCommand(CliTestCase):

    def test_partial_failure(self):
        corpus = self.write_corpus(4)
        backend = MockBackend(VOCAB, fail_predicate=lambda req: req.report_id == "r2")
        with patch("pymskdx.cli.create_backend", return_value=backend):
            code, out = _run("label", "--corpus", corpus, "--out", self.tmp / "out")
        self.assertEqual(code, EXIT_PARTIAL)
        self.assertEqual(json.loads(out)["failed"], ["r2"])
        self.assertEqual(len(store.read_labels(self.tmp / "out" / "labels.jsonl")), 3)

    def test_all_reports_fail(self):
        corpus = self.write_corpus(2)
        backend = MockBackend(VOCAB, fail_predicate=lambda req: True)
        with patch("pymskdx.cli.create_backend", return_value=backend):
            code, _ = _run("label", "--corpus", corpus, "--out", self.tmp / "out")
        self.assertEqual(code, EXIT_BACKEND)

    def test_missing_corpus(self):
        self.assertEqual(_run("label", "--corpus", self.tmp / "nope.jsonl", "--out", self.tmp / "out")[0],
                         EXIT_USAGE)


class TestSplitCommand(CliTestCase):

    def _labels(self, n: int) -> Path:
        sets = [LabelSet(report_id=f"r{i}", labels=[1 + i % 3]) for i in range(n)]
        return store.write_labels(sets, self.tmp / "labels.jsonl")

    def test_bad_ratios(self):
        code, _ = _run("split", "--labels", self._labels(4), "--out", self.tmp / "s", "--ratios", "0.5,0.4")
        self.assertEqual(code, EXIT_USAGE)

    def test_single_report(self):
        code, out = _run("split", "--labels", self._labels(1), "--out", self.tmp / "s")
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(sum(json.loads(out)["part_sizes"]), 1)

    def test_random_method(self):
        code, out = _run("split", "--labels", self._labels(30), "--out", self.tmp / "s", "--method", "random",
                         "--ratios", "0.6,0.4", "--seed", "3")
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(json.loads(out)["part_sizes"], [18, 12])
        manifest = store.read_manifest(self.tmp / "s" / "manifest.json")
        self.assertEqual(manifest.seeds, {"split": 3})


class TestEvalCommands(CliTestCase):

    def setUp(self):
        super().setUp()
        gout, cellulitis = VOCAB.lookup("gout").id, VOCAB.lookup("cellulitis").id
        self.gold = store.write_labels([LabelSet(report_id=f"r{i}", labels=[gout]) for i in range(3)],
                                       self.tmp / "gold.jsonl")
        self.pred = store.write_labels([LabelSet(report_id=f"r{i}", labels=[cellulitis]) for i in range(3)],
                                       self.tmp / "pred.jsonl")

    def test_identical_sets(self):
        code, out = _run("eval", "--gold", self.gold, "--pred", self.gold, "--out", self.tmp / "m.json")
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(out.splitlines()[1].split(), ["Overall", "3", "1.000", "1.000", "1.000", "1.000"])
        self.assertEqual(json.loads((self.tmp / "m.json").read_text("utf-8"))["f1_micro"], 1.0)

    def test_raw_predictions_with_modalities(self):
        corpus = self.write_corpus(3)
        raw = store.write_jsonl(self.tmp / "raw.jsonl", [{"report_id": f"r{i}", "output": "Gout"} for i in range(3)])
        code, out = _run("eval", "--gold", self.gold, "--pred", raw, "--pred-format", "raw", "--corpus", corpus)
        self.assertEqual(code, EXIT_OK)
        subsets = [line.split()[0] for line in out.splitlines()[1:]]
        self.assertEqual(subsets, ["Overall", "CR", "CT", "MR"])

    def test_strict_missing(self):
        partial = store.write_labels([LabelSet(report_id="r0")], self.tmp / "partial.jsonl")
        self.assertEqual(_run("eval", "--gold", self.gold, "--pred", partial)[0], EXIT_OK)
        self.assertEqual(_run("eval", "--gold", self.gold, "--pred", partial, "--strict-missing")[0], EXIT_USAGE)

    def test_errors(self):
        code, out = _run("errors", "--gold", self.gold, "--pred", self.pred, "--top-k", "5")
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(out.strip(), "3\tgout -> cellulitis")


class TestAdapterCommands(CliTestCase):

    def test_param_count(self):
        code, out = _run("param-count", "--arch", "llama3-8b", "--rank", "64")
        self.assertEqual(code, EXIT_OK)
        payload = json.loads(out)
        self.assertEqual((payload["total"], payload["per_layer"]), (167_772_160, 5_242_880))
        self.assertEqual(payload["bytes_16bit"], 335_544_320)

    def test_quantize_zero_tensor(self):
        source = self.tmp / "w.npy"
        np.save(source, np.zeros((2, 64)))
        code, out = _run("quantize", "--input", source, "--out", self.tmp / "w.nf4", "--block-size", "64")
        self.assertEqual(code, EXIT_OK)
        payload = json.loads(out)
        self.assertEqual(payload["max_abs_error"], 0.0)
        self.assertAlmostEqual(payload["compression_ratio"], 256 / 68)
        self.assertTrue((self.tmp / "w.nf4").exists())

    def test_quantize_normal_tensor(self):
        source = self.tmp / "w.npy"
        np.save(source, np.random.default_rng(0).normal(size=(16, 64)))
        code, out = _run("quantize", "--input", source, "--out", self.tmp / "w.nf4")
        self.assertEqual(code, EXIT_OK)
        payload = json.loads(out)
        self.assertLessEqual(payload["max_abs_error"], payload["error_bound"])
        self.assertGreater(payload["compression_ratio"], 3.0)

    def test_quantize_unreadable_input(self):
        source = self.tmp / "w.npy"
        source.write_text("not an array", encoding="utf-8")
        self.assertEqual(_run("quantize", "--input", source, "--out", self.tmp / "w.nf4")[0], EXIT_USAGE)


class TestArguments(unittest.TestCase):

    def test_unknown_flag(self):
        with patch("sys.stderr", new_callable=io.StringIO):
            with self.assertRaises(SystemExit) as ctx:
                main(["split", "--labels", "x", "--out", "y", "--bogus"])
        self.assertEqual(ctx.exception.code, 2)

    def test_no_credential_flag(self):
        with patch("sys.stderr", new_callable=io.StringIO):
            with self.assertRaises(SystemExit):
                main(["label", "--corpus", "c", "--out", "o", "--api-key", "secret"])


if __name__ == '__main__':
    unittest.main()
