import itertools
import unittest

from pymskdx.core.enums import Provenance, VoteMode
from pymskdx.core.models import LabelSet, RunOutput
from pymskdx.core.voting import group_runs, hallucination_tally, majority_vote
from pymskdx.exceptions import MixedReportsError, NoRunsError

A, B, C, D = 1, 2, 3, 4
UNIVERSE = (A, B, C, D)
SUBSETS = [frozenset(c) for n in range(len(UNIVERSE) + 1) for c in itertools.combinations(UNIVERSE, n)]


def _runs(*label_sets, report_id="r1", oov=()):
    return [
        RunOutput(report_id=report_id, run_index=i,
                  label_set=LabelSet(report_id=report_id, labels=labels, oov_names=oov))
        for i, labels in enumerate(label_sets)
    ]


def _per_label_oracle(sets):
    return frozenset(label for label in UNIVERSE if sum(label in s for s in sets) >= 2)


class TestMajorityVote(unittest.TestCase):

    def test_plurality_set(self):
        voted = majority_vote(_runs({A, B}, {A, B}, {A}), VoteMode.SET_LEVEL)
        self.assertEqual(voted.label_set, {A, B})
        self.assertEqual(voted.provenance, Provenance.TEACHER_VOTE)

    def test_all_distinct_falls_back(self):
        self.assertEqual(majority_vote(_runs({A}, {B}, {C}), VoteMode.SET_LEVEL).labels, ())

    def test_all_distinct_fallback_keeps_majority_labels(self):
        self.assertEqual(majority_vote(_runs({A, B}, {A}, {A, C}), VoteMode.SET_LEVEL).label_set, {A})

    def test_per_label(self):
        self.assertEqual(majority_vote(_runs({A, B}, {A}, {A, C}), VoteMode.PER_LABEL).label_set, {A})

    def test_single_run(self):
        self.assertEqual(majority_vote(_runs({A, C}), VoteMode.PER_LABEL).label_set, {A, C})

    def test_even_runs_need_strict_majority(self):
        self.assertEqual(majority_vote(_runs({A}, {B}), VoteMode.PER_LABEL).labels, ())

    def test_no_runs(self):
        with self.assertRaises(NoRunsError):
            majority_vote([])

    def test_mixed_reports(self):
        runs = _runs({A}, report_id="r1") + _runs({A}, report_id="r2")
        with self.assertRaises(MixedReportsError):
            majority_vote(runs)

    def test_oov_names_accumulate(self):
        voted = majority_vote(_runs({A}, {A}, {A}, oov=("bone dragon",)))
        self.assertEqual(voted.labels, (A,))
        self.assertEqual(voted.oov_names, ("bone dragon",) * 3)


class TestVotingExhaustive(unittest.TestCase):
    """Todas las combinaciones de 3 corridas sobre subconjuntos de un universo de 4 etiquetas."""

    def test_properties(self):
        for sets in itertools.product(SUBSETS, repeat=3):
            runs = _runs(*sets)
            set_level = majority_vote(runs, VoteMode.SET_LEVEL).label_set
            per_label = majority_vote(runs, VoteMode.PER_LABEL).label_set

            self.assertEqual(per_label, _per_label_oracle(sets))
            repeated = [s for s in sets if sets.count(s) >= 2]
            expected = repeated[0] if repeated else _per_label_oracle(sets)
            self.assertEqual(set_level, expected)

            for perm in itertools.permutations(sets):
                self.assertEqual(majority_vote(_runs(*perm), VoteMode.SET_LEVEL).label_set, set_level)
                self.assertEqual(majority_vote(_runs(*perm), VoteMode.PER_LABEL).label_set, per_label)

    def test_unanimity(self):
        for s in SUBSETS:
            for mode in VoteMode:
                self.assertEqual(majority_vote(_runs(s, s, s), mode).label_set, s)


class TestHelpers(unittest.TestCase):

    def test_hallucination_tally_sorted_by_count(self):
        runs = _runs({A}, oov=("green fever",)) + _runs({A}, {B}, report_id="r2", oov=("bone dragon",))
        self.assertEqual(hallucination_tally(runs), {"bone dragon": 2, "green fever": 1})

    def test_group_runs_keeps_first_seen_order(self):
        runs = _runs({A}, report_id="r2") + _runs({B}, {C}, report_id="r1")
        grouped = group_runs(runs)
        self.assertEqual(list(grouped), ["r2", "r1"])
        self.assertEqual(len(grouped["r1"]), 2)


if __name__ == '__main__':
    unittest.main()
