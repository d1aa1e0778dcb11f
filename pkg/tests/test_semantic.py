import math
import random

import numpy as np
import pytest

from truthkit.backends import LexicalEntailment
from truthkit.backends.similarity import ConstantSimilarity, UnigramCosineSimilarity
from truthkit.errors import MethodFailure
from truthkit.methods.semantic import (
    build_affinity,
    num_semantic_sets,
    semantic_cluster,
    semantic_entropy,
    sent_sar,
)
from truthkit.types import GenerationRecord, SamplePool

from conftest import entail_rule, entail_rules_from_groups, record, scripted_entailment
from oracles import entropy_bruteforce


def pool_of(texts, logprobs=None):
    if logprobs is None:
        return SamplePool([GenerationRecord(text=t) for t in texts], includes_target=True)
    records = [
        GenerationRecord.from_tokens([(t, lp)], text=t) for t, lp in zip(texts, logprobs)
    ]
    return SamplePool(records, includes_target=True)


class TestBuildAffinity:
    def test_single_node_diagonal_only(self):
        g = build_affinity("q", pool_of(["only"]), scripted_entailment([]))
        assert g.affinity.tolist() == [[1.0]]

    def test_identical_texts_lexical_all_ones(self):
        g = build_affinity("q", pool_of(["Paris", "Paris"]), LexicalEntailment())
        assert g.affinity.tolist() == [[1.0, 1.0], [1.0, 1.0]]

    def test_asymmetric_verdicts_average(self):
        rules = [
            entail_rule("a", "b", "ENTAIL"),
            entail_rule("b", "a", "CONTRADICT"),
        ]
        g = build_affinity("q", pool_of(["a", "b"]), scripted_entailment(rules))
        assert g.affinity[0, 1] == 0.5

    def test_random_verdict_tables_keep_invariants(self):
        rng = random.Random(31)
        labels = ["ENTAIL", "NEUTRAL", "CONTRADICT"]
        for _ in range(50):
            m = rng.randint(1, 6)
            texts = [f"text number {i}" for i in range(m)]
            rules = [
                entail_rule(a, b, rng.choice(labels))
                for a in texts
                for b in texts
                if a != b
            ]
            g = build_affinity("q", pool_of(texts), scripted_entailment(rules))
            assert np.max(np.abs(g.affinity - g.affinity.T)) <= 1e-12
            assert np.all(np.diag(g.affinity) == 1.0)
            assert np.all((g.affinity >= 0) & (g.affinity <= 1))

    def test_no_provider_calls_for_diagonal(self):
        provider = scripted_entailment([])  # any call would raise a script miss
        build_affinity("q", pool_of(["solo"]), provider)


class TestSemanticCluster:
    def test_all_identical_single_cluster(self):
        clustering = semantic_cluster("q", pool_of(["x", "x", "x"]), LexicalEntailment())
        assert clustering.assignment == [0, 0, 0]
        assert clustering.cluster_mass == [1.0]

    def test_two_contradicting_pairs_blackbox_masses(self):
        rules = entail_rules_from_groups([["a1", "a2"], ["b1", "b2"]])
        clustering = semantic_cluster(
            "q", pool_of(["a1", "a2", "b1", "b2"]), scripted_entailment(rules)
        )
        assert clustering.assignment == [0, 0, 1, 1]
        assert clustering.cluster_mass == pytest.approx([0.5, 0.5])
        assert clustering.mode == "blackbox"

    def test_greedy_rule_on_scripted_table(self):
        # s2 entails s1's representative bidirectionally, s3 entails neither
        rules = entail_rules_from_groups([["s1", "s2"], ["s3"]])
        clustering = semantic_cluster("q", pool_of(["s1", "s2", "s3"]), scripted_entailment(rules))
        assert clustering.assignment == [0, 0, 1]

    def test_one_direction_only_does_not_merge(self):
        rules = [
            entail_rule("s1", "s2", "ENTAIL"),
            entail_rule("s2", "s1", "NEUTRAL"),
        ]
        clustering = semantic_cluster("q", pool_of(["s1", "s2"]), scripted_entailment(rules))
        assert clustering.assignment == [0, 1]

    def test_representative_is_first_member(self):
        # s3 matches s1 (cluster 0's rep) even though s2 is also in cluster 0
        rules = entail_rules_from_groups([["s1", "s2", "s3"]])
        # make s3 contradict s2 in both directions: rep comparison still wins
        rules = [
            r
            for r in rules
            if not (
                r["match"]["premise"] in ("s2", "s3")
                and r["match"]["hypothesis"] in ("s2", "s3")
                and r["match"]["premise"] != r["match"]["hypothesis"]
            )
        ]
        clustering = semantic_cluster("q", pool_of(["s1", "s2", "s3"]), scripted_entailment(rules))
        assert clustering.assignment == [0, 0, 0]

    def test_greybox_masses_from_logprobs(self):
        rules = entail_rules_from_groups([["a"], ["b"]])
        pool = pool_of(["a", "b"], logprobs=[-1.0, -2.0])
        clustering = semantic_cluster("q", pool, scripted_entailment(rules))
        pa, pb = math.exp(-1.0), math.exp(-2.0)
        assert clustering.mode == "greybox"
        assert clustering.cluster_mass == pytest.approx(
            [pa / (pa + pb), pb / (pa + pb)], abs=1e-12
        )

    def test_greybox_masses_sum_to_one_random(self):
        rng = random.Random(77)
        for _ in range(50):
            m = rng.randint(1, 6)
            texts = [f"t{i}" for i in range(m)]
            groups = [[t] for t in texts]
            rules = entail_rules_from_groups(groups)
            pool = pool_of(texts, logprobs=[rng.uniform(-5, 0) for _ in range(m)])
            clustering = semantic_cluster("q", pool, scripted_entailment(rules))
            assert sum(clustering.cluster_mass) == pytest.approx(1.0, abs=1e-9)


class TestSemanticEntropy:
    def test_single_cluster_zero(self):
        clustering = semantic_cluster("q", pool_of(["x", "x"]), LexicalEntailment())
        score = semantic_entropy(clustering)
        assert score.raw_value == 0.0

    def test_uniform_two_clusters(self):
        rules = entail_rules_from_groups([["a"], ["b"]])
        clustering = semantic_cluster("q", pool_of(["a", "b"]), scripted_entailment(rules))
        score = semantic_entropy(clustering)
        assert score.details["semantic_entropy"] == pytest.approx(math.log(2), abs=1e-12)
        assert score.raw_value == pytest.approx(-math.log(2), abs=1e-12)

    def test_mixed_masses_match_bruteforce(self):
        from truthkit.methods.semantic import Clustering

        clustering = Clustering(
            assignment=[0, 0, 1, 2], cluster_mass=[0.7, 0.2, 0.1], mode="blackbox"
        )
        score = semantic_entropy(clustering)
        assert score.details["semantic_entropy"] == pytest.approx(
            entropy_bruteforce([0.7, 0.2, 0.1]), abs=1e-12
        )

    def test_uniform_masses_equal_log_count(self):
        from truthkit.methods.semantic import Clustering

        for k in range(1, 9):
            clustering = Clustering(
                assignment=list(range(k)), cluster_mass=[1.0 / k] * k
            )
            score = semantic_entropy(clustering)
            assert score.details["semantic_entropy"] == pytest.approx(
                math.log(k), abs=1e-12
            )


class TestNumSemanticSets:
    def test_all_identical(self):
        clustering = semantic_cluster("q", pool_of(["x"] * 4), LexicalEntailment())
        assert num_semantic_sets(clustering).raw_value == -1.0

    def test_all_distinct(self):
        rules = entail_rules_from_groups([["a"], ["b"], ["c"]])
        clustering = semantic_cluster("q", pool_of(["a", "b", "c"]), scripted_entailment(rules))
        assert num_semantic_sets(clustering).raw_value == -3.0

    def test_three_cluster_fixture(self):
        rules = entail_rules_from_groups([["s1", "s2"], ["s3"], ["s4", "s5"]])
        clustering = semantic_cluster(
            "q", pool_of(["s1", "s2", "s3", "s4", "s5"]), scripted_entailment(rules)
        )
        assert num_semantic_sets(clustering).raw_value == -3.0


class TestSentSar:
    def test_single_sample_equals_mean_logprob(self):
        pool = pool_of(["only"], logprobs=[-0.8])
        score = sent_sar("q", pool, ConstantSimilarity(0.0))
        assert score.raw_value == pytest.approx(-0.8, abs=1e-12)

    def test_zero_similarity_reduces_to_mean_of_means(self):
        pool = pool_of(["a", "b", "c"], logprobs=[-1.0, -2.0, -3.0])
        score = sent_sar("q", pool, ConstantSimilarity(0.0))
        assert score.raw_value == pytest.approx(-(1 + 2 + 3) / 3, abs=1e-12)

    def test_full_agreement_boosts_to_zero(self):
        lp = math.log(0.5)
        pool = pool_of(["same", "same"], logprobs=[lp, lp])
        score = sent_sar("q", pool, ConstantSimilarity(1.0))
        assert score.raw_value == pytest.approx(0.0, abs=1e-12)

    def test_missing_logprobs_fails(self):
        pool = SamplePool([GenerationRecord(text="bare")])
        with pytest.raises(MethodFailure):
            sent_sar("q", pool, UnigramCosineSimilarity())


class FailingProvider(LexicalEntailment):
    """Raises a transport error for one specific ordered pair."""

    def __init__(self, bad_pairs):
        self.bad_pairs = set(bad_pairs)

    def entail(self, context, premise, hypothesis):
        if (premise, hypothesis) in self.bad_pairs:
            from truthkit.errors import BackendError

            raise BackendError("provider down")
        return super().entail(context, premise, hypothesis)


class TestProviderFailures:
    def test_affinity_pair_failure_degrades_to_neutral_with_flag(self):
        provider = FailingProvider({("Paris", "London"), ("London", "Paris")})
        g = build_affinity("q", pool_of(["Paris", "London", "Paris"]), provider)
        assert g.affinity[0, 1] == 0.5
        assert (0, 1) in g.flagged_pairs
        # the unaffected pair is still judged lexically
        assert g.affinity[0, 2] == 1.0

    def test_cluster_failure_treated_as_non_entail(self):
        provider = FailingProvider({("Paris", "paris"), ("paris", "Paris")})
        clustering = semantic_cluster("q", pool_of(["Paris", "paris"]), provider)
        # the unjudgeable pair cannot merge, so two clusters form
        assert clustering.assignment == [0, 1]


class TestMassUnderflow:
    def test_extreme_logprobs_fall_back_to_count_masses(self):
        # exp(mean logprob) underflows to exactly 0.0 here
        pool = pool_of(["a", "b"], logprobs=[-800.0, -900.0])
        rules = entail_rules_from_groups([["a"], ["b"]])
        clustering = semantic_cluster("q", pool, scripted_entailment(rules))
        assert clustering.mode == "blackbox"
        assert clustering.cluster_mass == pytest.approx([0.5, 0.5])
