import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crisissumm.embeddings import EmbeddingTable, cosine, load_embeddings
from crisissumm.metrics import (
    avg_diversity,
    coverage_report,
    explanation_vector,
    pair_diversity,
    relevance_distribution,
    rouge,
    rouge_l,
    rouge_n,
    summary_diversity,
)
from crisissumm.summarizers import SummaryRecord
from crisissumm.taxonomy import TopicAssignment, TopicLabel

from conftest import build_dataset

NINE_TOPICS = [t for t in TopicLabel
               if t not in (TopicLabel.IRRELEVANT, TopicLabel.SUPPLY_NEEDS)]


def nine_topic_assignment():
    by_topic = {}
    i = 0
    for topic in NINE_TOPICS:
        by_topic[topic] = (f"t{i}", f"t{i+1}")
        i += 2
    return TopicAssignment(by_topic=by_topic, dropped=())


class TestCoverage:
    def test_eight_of_nine_misses_infrastructure(self):
        asg = nine_topic_assignment()
        ids = []
        for topic in NINE_TOPICS:
            if topic is not TopicLabel.INFRASTRUCTURE_DAMAGE:
                ids.append(asg.by_topic[topic][0])
        summary = SummaryRecord(method="human:p1", dataset="d1",
                                tweet_ids=tuple(ids), budget=40)
        report = coverage_report(summary, asg)
        assert report.topics_present == 8
        assert report.missed == (TopicLabel.INFRASTRUCTURE_DAMAGE,)

    def test_full_coverage(self):
        asg = nine_topic_assignment()
        ids = tuple(asg.by_topic[t][0] for t in NINE_TOPICS)
        summary = SummaryRecord(method="m", dataset="d", tweet_ids=ids, budget=40)
        report = coverage_report(summary, asg)
        assert report.missed == ()
        assert report.topics_present == len(NINE_TOPICS)

    def test_empty_summary_misses_all(self):
        asg = nine_topic_assignment()
        summary = SummaryRecord(method="m", dataset="d", tweet_ids=(), budget=40)
        report = coverage_report(summary, asg)
        assert report.topics_present == 0
        assert set(report.missed) == set(NINE_TOPICS)

    def test_unclassified_summary_tweet_errors(self):
        asg = nine_topic_assignment()
        summary = SummaryRecord(method="m", dataset="d",
                                tweet_ids=("zzz",), budget=40)
        with pytest.raises(ValueError, match="not classified"):
            coverage_report(summary, asg)


class TestRelevanceDistribution:
    def _summary(self, n=40):
        return SummaryRecord(method="human:p1", dataset="d",
                             tweet_ids=tuple(f"t{i}" for i in range(n)), budget=n)

    def test_34_high_6_medium(self):
        labels = {f"t{i}": "high" if i < 34 else "medium" for i in range(40)}
        dist = relevance_distribution(self._summary(), labels)
        assert dist["high_pct"] == pytest.approx(85.00, abs=0.01)
        assert dist["med_pct"] == pytest.approx(15.00, abs=0.01)
        assert dist["low_pct"] == pytest.approx(0.0, abs=0.01)

    def test_37_high_3_medium(self):
        labels = {f"t{i}": "high" if i < 37 else "medium" for i in range(40)}
        dist = relevance_distribution(self._summary(), labels)
        assert dist["high_pct"] == pytest.approx(92.50, abs=0.01)
        assert dist["med_pct"] == pytest.approx(7.50, abs=0.01)

    def test_all_low(self):
        labels = {f"t{i}": "low" for i in range(40)}
        dist = relevance_distribution(self._summary(), labels)
        assert (dist["high_pct"], dist["med_pct"], dist["low_pct"]) == (0.0, 0.0, 100.0)

    def test_unlabeled_tweet_errors(self):
        with pytest.raises(ValueError, match="no relevance label"):
            relevance_distribution(self._summary(2), {"t0": "high"})

    @settings(max_examples=100)
    @given(st.lists(st.sampled_from(["high", "medium", "low"]),
                    min_size=1, max_size=60))
    def test_percentages_sum_to_100(self, label_list):
        labels = {f"t{i}": lab for i, lab in enumerate(label_list)}
        summary = SummaryRecord(method="m", dataset="d",
                                tweet_ids=tuple(labels), budget=len(labels))
        dist = relevance_distribution(summary, labels)
        assert sum(dist.values()) == pytest.approx(100.0, abs=0.01)


def table3d():
    return EmbeddingTable(3, {
        "water": np.array([1.0, 0.0, 0.0]),
        "rising": np.array([0.9, 0.1, 0.0]),
        "bridge": np.array([0.0, 1.0, 0.0]),
        "prayers": np.array([0.0, 0.0, 1.0]),
        "everyone": np.array([0.0, 0.1, 0.9]),
    })


class TestDiversity:
    def test_identical_explanations_div_zero(self):
        table = table3d()
        assert pair_diversity("water rising", "water rising", table) == 0.0

    def test_orthogonal_explanations_div_one(self):
        table = table3d()
        assert pair_diversity("water", "bridge", table) == pytest.approx(1.0)
        assert avg_diversity(["water", "bridge"], table) == pytest.approx(1.0)

    def test_four_tweet_bruteforce_oracle(self):
        table = table3d()
        explanations = ["water rising", "bridge", "prayers everyone", "water bridge"]

        def oracle():
            def embed(text):
                toks = [t for t in text.lower().split() if t in table.vectors]
                if not toks:
                    return np.zeros(3)
                return sum(table.vectors[t] for t in toks) / len(toks)

            vecs = [embed(e) for e in explanations]
            total, count = 0.0, 0
            for i in range(len(vecs)):
                for j in range(i + 1, len(vecs)):
                    na, nb = np.linalg.norm(vecs[i]), np.linalg.norm(vecs[j])
                    if na == 0 or nb == 0:
                        sim = 0.0
                    elif np.array_equal(vecs[i], vecs[j]):
                        sim = 1.0
                    else:
                        sim = float(vecs[i] @ vecs[j] / (na * nb))
                    total += 1.0 - sim
                    count += 1
            return total / count

        assert avg_diversity(explanations, table) == pytest.approx(oracle(), abs=1e-9)

    def test_fewer_than_two_errors(self):
        with pytest.raises(ValueError):
            avg_diversity(["water"], table3d())

    def test_oov_explanation_counts_fully_diverse(self):
        table = table3d()
        assert explanation_vector("zzz qqq", table).tolist() == [0.0, 0.0, 0.0]
        assert pair_diversity("zzz qqq", "water", table) == pytest.approx(1.0)

    def test_scale_invariance(self):
        table = table3d()
        scaled = EmbeddingTable(3, {t: 3.7 * v for t, v in table.vectors.items()})
        explanations = ["water rising", "bridge", "prayers everyone"]
        assert avg_diversity(explanations, table) == pytest.approx(
            avg_diversity(explanations, scaled), abs=1e-9)

    def test_negative_cosine_pair_flagged_not_clamped(self, caplog):
        table = EmbeddingTable(2, {"hot": np.array([1.0, 0.0]),
                                   "cold": np.array([-1.0, 0.0])})
        with caplog.at_level("WARNING"):
            div = avg_diversity(["hot", "cold"], table)
        assert div == pytest.approx(2.0)  # raw value, above 1
        assert any("negative cosine" in r.message for r in caplog.records)

    def test_summary_diversity_requires_explanations(self):
        ds = build_dataset(["flood warning", "bridge collapsed"],
                           explanations={0: "water rising"})
        record = SummaryRecord(method="m", dataset="test",
                               tweet_ids=("t000", "t001"), budget=2)
        with pytest.raises(ValueError, match="no explanation"):
            summary_diversity(record, ds, table3d())


class TestRouge:
    def test_identical(self):
        scores = rouge(list("abcd"), list("abcd"))
        assert scores.rouge1_f1 == scores.rouge2_f1 == scores.rougeL_f1 == 1.0

    def test_hand_counted_example(self):
        # ref "a b c d" vs sys "a b x y":
        # unigrams: match {a, b} -> P = R = 2/4 -> F1 = 0.5
        # bigrams: match {(a,b)} of 3 ref / 3 sys -> F1 = 1/3
        # LCS "a b" -> P = R = 0.5 -> F1 = 0.5
        system = "a b x y".split()
        reference = "a b c d".split()
        scores = rouge(system, reference)
        assert scores.rouge1_f1 == pytest.approx(0.5, abs=1e-9)
        assert scores.rouge2_f1 == pytest.approx(1 / 3, abs=1e-9)
        assert scores.rougeL_f1 == pytest.approx(0.5, abs=1e-9)

    def test_disjoint_vocabularies(self):
        scores = rouge("a b".split(), "x y".split())
        assert scores.rouge1_f1 == scores.rouge2_f1 == scores.rougeL_f1 == 0.0

    def test_empty_errors(self):
        with pytest.raises(ValueError):
            rouge([], ["a"])

    def test_clipping(self):
        # sys repeats "a" 3 times but ref has it twice: clipped match = 2
        assert rouge_n(["a", "a", "a"], ["a", "a", "b"], 1) == pytest.approx(
            2 * (2 / 3) * (2 / 3) / (2 / 3 + 2 / 3))

    @settings(max_examples=100)
    @given(st.lists(st.sampled_from("abcde"), min_size=1, max_size=12),
           st.lists(st.sampled_from("abcde"), min_size=1, max_size=12))
    def test_f1_symmetric_under_swap(self, xs, ys):
        a = rouge(xs, ys)
        b = rouge(ys, xs)
        assert a.rouge1_f1 == pytest.approx(b.rouge1_f1, abs=1e-12)
        assert a.rouge2_f1 == pytest.approx(b.rouge2_f1, abs=1e-12)
        assert a.rougeL_f1 == pytest.approx(b.rougeL_f1, abs=1e-12)

    def test_lcs_oracle(self):
        # brute-force LCS via recursion on a small pair
        def lcs(a, b):
            if not a or not b:
                return 0
            if a[-1] == b[-1]:
                return 1 + lcs(a[:-1], b[:-1])
            return max(lcs(a[:-1], b), lcs(a, b[:-1]))

        a = list("abcabba")
        b = list("cbabac")
        expected = lcs(a, b)
        got = rouge_l(a, b)
        f1 = 2 * (expected / len(a)) * (expected / len(b)) / (
            expected / len(a) + expected / len(b))
        assert got == pytest.approx(f1)


class TestLoadEmbeddings:
    def test_three_lines_dim4(self, tmp_path):
        path = tmp_path / "vec.txt"
        path.write_text("flood 1 0 0 0\nbridge 0 1 0 0\npray 0 0 1 0\n")
        table = load_embeddings(path)
        assert table.dimension == 4
        assert len(table) == 3

    def test_wrong_arity_skipped(self, tmp_path, caplog):
        path = tmp_path / "vec.txt"
        path.write_text("flood 1 0\nbad 1\nbridge 0 1\n")
        with caplog.at_level("WARNING"):
            table = load_embeddings(path)
        assert len(table) == 2
        assert any("malformed" in r.message for r in caplog.records)

    def test_duplicate_last_wins(self, tmp_path, caplog):
        path = tmp_path / "vec.txt"
        path.write_text("flood 1 0\nflood 0 1\n")
        with caplog.at_level("WARNING"):
            table = load_embeddings(path)
        assert table.get("flood").tolist() == [0.0, 1.0]
        assert any("duplicate" in r.message for r in caplog.records)

    def test_case_folded_lookup(self, tmp_path):
        path = tmp_path / "vec.txt"
        path.write_text("Flood 1 0\n")
        table = load_embeddings(path)
        assert "FLOOD" in table
        assert table.get("flood") is not None

    def test_all_malformed_errors(self, tmp_path):
        path = tmp_path / "vec.txt"
        path.write_text("notavector\n")
        with pytest.raises(ValueError):
            load_embeddings(path)
