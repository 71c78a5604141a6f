import unittest

from hypothesis import given, settings
from sklearn.metrics import f1_score as sk_f1_score
from sklearn.metrics import precision_score, recall_score
from sklearn.preprocessing import MultiLabelBinarizer

from pymskdx.core.enums import MacroScope, Modality, Provenance
from pymskdx.core.metrics import align_predictions, confusion_pairs, evaluate, f1_score, to_table
from pymskdx.core.models import EvalPair, LabelSet
from pymskdx.core.vocabulary import default_vocabulary
from pymskdx.exceptions import EmptyInputError, MissingReportError
from tests.strategies import eval_pairs

A, B, C = 1, 2, 3


def _pair(report_id, gold, predicted, oov=(), modality=Modality.OTHER):
    return EvalPair(
        report_id=report_id,
        modality=modality,
        gold=LabelSet(report_id=report_id, labels=gold, provenance=Provenance.GOLD),
        predicted=LabelSet(report_id=report_id, labels=predicted, oov_names=oov),
    )


def _oracle(pairs, count_oov_as_fp=True):
    """Conteo directo sobre la matriz reporte × clase."""
    classes = sorted({c for p in pairs for c in p.gold.labels + p.predicted.labels})
    tp = fp = fn = 0
    f1s = []
    for c in classes:
        ctp = sum(c in p.gold.label_set and c in p.predicted.label_set for p in pairs)
        cfp = sum(c not in p.gold.label_set and c in p.predicted.label_set for p in pairs)
        cfn = sum(c in p.gold.label_set and c not in p.predicted.label_set for p in pairs)
        tp, fp, fn = tp + ctp, fp + cfp, fn + cfn
        if ctp + cfn > 0:
            f1s.append(2 * ctp / (2 * ctp + cfp + cfn))
    if count_oov_as_fp:
        fp += sum(len(p.predicted.oov_names) for p in pairs)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    micro = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    macro = sum(f1s) / len(f1s) if f1s else 0.0
    return precision, recall, micro, macro


class TestF1(unittest.TestCase):

    def test_harmonic_mean(self):
        self.assertEqual(round(f1_score(0.941, 0.877), 3), 0.908)

    def test_zero(self):
        self.assertEqual(f1_score(0.0, 0.0), 0.0)


class TestEvaluate(unittest.TestCase):

    def test_single_pair(self):
        report = evaluate([_pair("r1", [A, B], [A])])
        self.assertEqual(report.precision, 1.0)
        self.assertEqual(report.recall, 0.5)
        self.assertAlmostEqual(report.f1_micro, 2 / 3)
        self.assertEqual(report.f1_macro, 0.5)
        self.assertEqual((report.tp, report.fp, report.fn), (1, 0, 1))
        self.assertEqual(report.per_class[B].support, 1)

    def test_counts_at_corpus_scale(self):
        pairs = [_pair(f"tp{i}", [A], [A]) for i in range(800)]
        pairs += [_pair(f"fp{i}", [], [B]) for i in range(50)]
        pairs += [_pair(f"fn{i}", [C], []) for i in range(112)]
        report = evaluate(pairs)
        self.assertEqual(round(report.precision, 3), 0.941)
        self.assertEqual(round(report.recall, 3), 0.877)
        self.assertEqual(round(report.f1_micro, 3), 0.908)

    def test_identical_sets(self):
        report = evaluate([_pair("r1", [A], [A]), _pair("r2", [B, C], [B, C])])
        self.assertEqual((report.precision, report.recall, report.f1_micro, report.f1_macro), (1.0, 1.0, 1.0, 1.0))

    def test_all_empty(self):
        report = evaluate([_pair("r1", [], [])])
        self.assertEqual((report.precision, report.recall, report.f1_micro, report.f1_macro), (0.0, 0.0, 0.0, 0.0))

    def test_oov_counts_as_false_positive(self):
        pairs = [_pair("r1", [A], [A], oov=("bone dragon",))]
        self.assertEqual(evaluate(pairs).precision, 0.5)
        self.assertEqual(evaluate(pairs, count_oov_as_fp=False).precision, 1.0)
        self.assertEqual(evaluate(pairs).hallucination_rate, 0.5)

    def test_macro_scope(self):
        pairs = [_pair("r1", [A], [A, B])]
        self.assertEqual(evaluate(pairs, macro_scope=MacroScope.SUPPORTED).f1_macro, 1.0)
        self.assertEqual(evaluate(pairs, macro_scope=MacroScope.UNION).f1_macro, 0.5)

    def test_per_modality(self):
        pairs = [_pair("r1", [A], [A], modality=Modality.CT), _pair("r2", [A], [], modality=Modality.MR)]
        report = evaluate(pairs)
        self.assertEqual(list(report.per_modality), ["CT", "MR"])
        self.assertEqual(report.per_modality["CT"].recall, 1.0)
        self.assertEqual(report.per_modality["MR"].recall, 0.0)
        self.assertEqual(report.recall, 0.5)

    def test_empty_input(self):
        with self.assertRaises(EmptyInputError):
            evaluate([])

    @settings(max_examples=1000, deadline=None)
    @given(eval_pairs())
    def test_matches_direct_count(self, pairs):
        report = evaluate(pairs, macro_scope=MacroScope.SUPPORTED)
        precision, recall, micro, macro = _oracle(pairs)
        self.assertAlmostEqual(report.precision, precision)
        self.assertAlmostEqual(report.recall, recall)
        self.assertAlmostEqual(report.f1_micro, micro)
        self.assertAlmostEqual(report.f1_macro, macro)

    @settings(max_examples=150, deadline=None)
    @given(eval_pairs(max_reports=30, max_classes=8))
    def test_matches_sklearn(self, pairs):
        binarizer = MultiLabelBinarizer(classes=list(range(1, 9)))
        y_true = binarizer.fit_transform([p.gold.labels for p in pairs])
        y_pred = binarizer.transform([p.predicted.labels for p in pairs])
        report = evaluate(pairs, count_oov_as_fp=False)

        self.assertAlmostEqual(report.precision, precision_score(y_true, y_pred, average="micro", zero_division=0))
        self.assertAlmostEqual(report.recall, recall_score(y_true, y_pred, average="micro", zero_division=0))
        self.assertAlmostEqual(report.f1_micro, sk_f1_score(y_true, y_pred, average="micro", zero_division=0))

        supported = sorted({c for p in pairs for c in p.gold.labels})
        if supported:
            columns = [c - 1 for c in supported]
            expected = sk_f1_score(y_true, y_pred, labels=columns, average="macro", zero_division=0)
            self.assertAlmostEqual(report.f1_macro, expected)


class TestMetricInvariants(unittest.TestCase):

    @settings(max_examples=200, deadline=None)
    @given(eval_pairs(max_reports=30, max_classes=10))
    def test_micro_f1_symmetric_in_gold_and_prediction(self, pairs):
        swapped = [_pair(p.report_id, p.predicted.labels, p.gold.labels, modality=p.modality) for p in pairs]
        forward = evaluate(pairs, count_oov_as_fp=False)
        backward = evaluate(swapped, count_oov_as_fp=False)
        self.assertAlmostEqual(forward.f1_micro, backward.f1_micro)
        self.assertEqual((forward.tp, forward.fp, forward.fn), (backward.tp, backward.fn, backward.fp))

    @settings(max_examples=200, deadline=None)
    @given(eval_pairs(max_reports=40, max_classes=10))
    def test_modality_counts_add_up(self, pairs):
        for count_oov_as_fp in (True, False):
            report = evaluate(pairs, count_oov_as_fp=count_oov_as_fp)
            groups = report.per_modality.values()
            self.assertEqual(sum(g.tp for g in groups), report.tp)
            self.assertEqual(sum(g.fp for g in groups), report.fp)
            self.assertEqual(sum(g.fn for g in groups), report.fn)
            self.assertEqual(sum(g.n_reports for g in groups), report.n_reports)


class TestConfusionPairs(unittest.TestCase):

    def test_named_confusion(self):
        vocab = default_vocabulary()
        partial = vocab.lookup("partial rotator cuff tear").id
        biceps = vocab.lookup("biceps tear").id
        (pair,) = confusion_pairs([_pair("r1", [partial], [biceps])])
        self.assertEqual((pair.gold_label, pair.predicted_label, pair.count), (partial, biceps, 1))

    def test_ranked_by_count(self):
        pairs = [_pair(f"r{i}", [B], [C]) for i in range(3)] + [_pair("r9", [A], [C])]
        ranked = confusion_pairs(pairs)
        self.assertEqual([(p.gold_label, p.predicted_label, p.count) for p in ranked], [(B, C, 3), (A, C, 1)])
        self.assertEqual(len(confusion_pairs(pairs, top_k=1)), 1)

    def test_correct_predictions_produce_nothing(self):
        self.assertEqual(confusion_pairs([_pair("r1", [A], [A, B])]), [])

    def test_invalid_top_k(self):
        with self.assertRaises(ValueError):
            confusion_pairs([_pair("r1", [A], [B])], top_k=0)


class TestReporting(unittest.TestCase):

    def test_table(self):
        table = to_table(evaluate([_pair("r1", [A], [A], modality=Modality.CR)]))
        lines = table.splitlines()
        self.assertEqual(lines[0].split(), ["Subset", "Support", "Precision", "Recall", "F1", "Micro", "F1", "Macro"])
        self.assertEqual(lines[1].split(), ["Overall", "1", "1.000", "1.000", "1.000", "1.000"])
        self.assertTrue(lines[2].startswith("CR"))

    def test_align_predictions(self):
        gold = {rid: LabelSet(report_id=rid, labels=[A], provenance=Provenance.GOLD) for rid in ("r1", "r2")}
        predicted = {"r2": LabelSet(report_id="r2", labels=[A]), "r3": LabelSet(report_id="r3", labels=[B])}
        pairs = align_predictions(gold, predicted, modalities={"r1": Modality.US})
        self.assertEqual([p.report_id for p in pairs], ["r1", "r2"])
        self.assertEqual(pairs[0].predicted.labels, ())
        self.assertEqual(pairs[0].modality, Modality.US)
        with self.assertRaises(MissingReportError):
            align_predictions(gold, predicted, missing_as_empty=False)


if __name__ == '__main__':
    unittest.main()
