"""Sampling-based consistency methods: the entailment affinity graph, greedy
semantic clustering, entropy over cluster masses, and the shifted-attention
sequence variant."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..backends.entailment import EntailmentProvider, LexicalEntailment
from ..backends.similarity import SimilarityProvider, UnigramCosineSimilarity
from ..errors import BackendError, MethodFailure, ProtocolError
from ..types import SamplePool, TruthScore, last_user_content
from .base import POOL_COMPOSITION, TruthMethod

#: provider failures on a pair degrade to this affinity, with the pair flagged
_NEUTRAL_AFFINITY = 0.5


@dataclass
class SemanticGraph:
    """Symmetric affinity over sampled responses; the basis of all spectral methods."""

    affinity: np.ndarray
    node_texts: list[str]
    flagged_pairs: list[tuple[int, int]] = field(default_factory=list)

    def __post_init__(self):
        self.affinity = np.asarray(self.affinity, dtype=float)
        m = self.affinity.shape[0]
        if self.affinity.shape != (m, m) or m != len(self.node_texts):
            raise ValueError("affinity must be square and match node_texts")
        if np.max(np.abs(self.affinity - self.affinity.T)) > 1e-12:
            raise ValueError("affinity must be symmetric")
        if np.any(np.diag(self.affinity) != 1.0):
            raise ValueError("affinity diagonal must be exactly 1")
        if np.any(self.affinity < 0) or np.any(self.affinity > 1):
            raise ValueError("affinity entries must lie in [0, 1]")

    @property
    def size(self) -> int:
        return self.affinity.shape[0]


@dataclass
class Clustering:
    """Semantic equivalence classes over a sample pool."""

    assignment: list[int]
    cluster_mass: list[float]
    mode: str = "blackbox"
    representatives: list[str] = field(default_factory=list)

    def __post_init__(self):
        ids = sorted(set(self.assignment))
        if ids != list(range(len(self.cluster_mass))):
            raise ValueError("cluster ids must be contiguous from 0 and match masses")
        if abs(sum(self.cluster_mass) - 1.0) > 1e-9:
            raise ValueError("cluster masses must sum to 1")

    @property
    def num_clusters(self) -> int:
        return len(self.cluster_mass)


def build_affinity(
    question: str, pool: SamplePool, entailment: EntailmentProvider
) -> SemanticGraph:
    """Pairwise affinity W[i,j] = (e(i->j) + e(j->i)) / 2 with ENTAIL/NEUTRAL/CONTRADICT
    mapped to 1/0.5/0; the diagonal is 1 without provider calls."""
    texts = pool.texts()
    m = len(texts)
    affinity = np.eye(m)
    flagged: list[tuple[int, int]] = []
    for i in range(m):
        for j in range(i + 1, m):
            try:
                forward = entailment.entail(question, texts[i], texts[j]).value
                backward = entailment.entail(question, texts[j], texts[i]).value
                value = (forward + backward) / 2.0
            except (BackendError, ProtocolError):
                value = _NEUTRAL_AFFINITY
                flagged.append((i, j))
            affinity[i, j] = affinity[j, i] = value
    return SemanticGraph(affinity, texts, flagged)


def semantic_cluster(
    question: str, pool: SamplePool, entailment: EntailmentProvider
) -> Clustering:
    """Greedy clustering in sample order.

    A sample joins the first cluster whose representative (its first member) it
    bidirectionally entails, else opens a new cluster. Masses use normalized
    length-normalized sequence probabilities when every sample carries
    logprobs, else plain counts.
    """
    texts = pool.texts()
    reps: list[str] = []
    assignment: list[int] = []
    for text in texts:
        placed = False
        for cid, rep in enumerate(reps):
            try:
                if entailment.bidirectional_entail(question, rep, text):
                    assignment.append(cid)
                    placed = True
                    break
            except (BackendError, ProtocolError):
                continue  # an unjudgeable pair never merges clusters
        if not placed:
            reps.append(text)
            assignment.append(len(reps) - 1)

    k = len(reps)
    weights = None
    mode = "blackbox"
    if pool.has_logprobs():
        raw = np.array([math.exp(r.mean_logprob()) for r in pool.samples])
        # exp underflows to 0 around mean logprob -745; fall back to counts
        if raw.sum() > 0:
            weights = raw / raw.sum()
            mode = "greybox"
    if weights is None:
        weights = np.full(len(texts), 1.0 / len(texts))
    masses = [float(sum(w for w, c in zip(weights, assignment) if c == cid)) for cid in range(k)]
    return Clustering(assignment, masses, mode=mode, representatives=reps)


def semantic_entropy(clustering: Clustering, method_id: str = "semantic_entropy") -> TruthScore:
    """Shannon entropy over cluster masses, negated so higher means more truthful."""
    entropy = -sum(m * math.log(m) for m in clustering.cluster_mass if m > 0)
    return TruthScore(
        method_id,
        -entropy,
        details={
            "semantic_entropy": entropy,
            "masses": list(clustering.cluster_mass),
            "mode": clustering.mode,
        },
    )


def num_semantic_sets(clustering: Clustering, method_id: str = "num_semantic_sets") -> TruthScore:
    """Negated count of semantic clusters: more distinct meanings, less truthful."""
    return TruthScore(
        method_id,
        -float(clustering.num_clusters),
        details={"num_clusters": clustering.num_clusters},
    )


def sent_sar(
    question: str,
    pool: SamplePool,
    similarity: SimilarityProvider,
    method_id: str = "sent_sar",
) -> TruthScore:
    """Sentence-level relevance-adjusted confidence.

    Each sample's length-normalized probability is boosted by similarity-weighted
    probabilities of the other samples; the score is the mean log of the adjusted
    values (which may exceed 1, accepted as-is).
    """
    if not pool.has_logprobs():
        raise MethodFailure("sentence-level scoring needs logprobs on every sample")
    texts = pool.texts()
    probs = [math.exp(r.mean_logprob()) for r in pool.samples]
    m = len(probs)
    adjusted = []
    for i in range(m):
        boost = sum(similarity.similarity(texts[i], texts[j]) * probs[j] for j in range(m) if j != i)
        adjusted.append(probs[i] + boost)
    value = sum(math.log(p) for p in adjusted) / m
    return TruthScore(method_id, value, details={"adjusted_probs": adjusted})


class _SamplingMethod(TruthMethod):
    requires_sampling = True

    def __init__(self, num_samples: int = 5, entailment: EntailmentProvider | None = None):
        super().__init__()
        if num_samples < 1:
            raise ValueError("num_samples must be >= 1")
        self._num_samples = num_samples
        self.entailment = entailment or LexicalEntailment()

    @property
    def num_samples(self) -> int:
        return self._num_samples

    def _pool_details(self, pool: SamplePool) -> dict:
        sampled = pool.texts()[1:] if pool.includes_target else pool.texts()
        return {"pool": POOL_COMPOSITION, "sampled_texts": sampled}


class SemanticEntropy(_SamplingMethod):
    method_id = "semantic_entropy"

    def _score(self, messages, record, handle, config, pool) -> TruthScore:
        sub = self._need_pool(pool)
        clustering = semantic_cluster(last_user_content(messages), sub, self.entailment)
        score = semantic_entropy(clustering, self.method_id)
        score.details.update(self._pool_details(sub))
        score.details["cluster_ids"] = list(clustering.assignment)
        return score


class NumSemanticSets(_SamplingMethod):
    method_id = "num_semantic_sets"

    def _score(self, messages, record, handle, config, pool) -> TruthScore:
        sub = self._need_pool(pool)
        clustering = semantic_cluster(last_user_content(messages), sub, self.entailment)
        score = num_semantic_sets(clustering, self.method_id)
        score.details.update(self._pool_details(sub))
        score.details["cluster_ids"] = list(clustering.assignment)
        return score


class SentSar(TruthMethod):
    method_id = "sent_sar"
    requires_sampling = True

    def __init__(self, num_samples: int = 5, similarity: SimilarityProvider | None = None):
        super().__init__()
        if num_samples < 1:
            raise ValueError("num_samples must be >= 1")
        self._num_samples = num_samples
        self.similarity = similarity or UnigramCosineSimilarity()

    @property
    def num_samples(self) -> int:
        return self._num_samples

    def _score(self, messages, record, handle, config, pool) -> TruthScore:
        sub = self._need_pool(pool)
        score = sent_sar(last_user_content(messages), sub, self.similarity, self.method_id)
        score.details["pool"] = POOL_COMPOSITION
        return score
