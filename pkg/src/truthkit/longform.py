"""Long-form truthfulness: decompose a generation into self-contained claims,
score each claim with claim-check methods, and evaluate at the claim level,
pooling every (claim, score) pair as its own evaluation sample."""

from __future__ import annotations

import csv
import io
import json
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path

from .backends.base import ModelHandle, ModelSpec
from .backends.entailment import ENTAIL, EntailmentProvider, LexicalEntailment
from .errors import BackendError, DatasetError, DecompositionError, MethodFailure
from .evaluation import auroc, prr, rejection_curve, roc_points, threshold_metrics
from .orchestrator import generate_with_truth_value
from .parsing import parse_string_array
from .prompts import prompts_hash, render
from .textnorm import claim_hash, normalize
from .types import (
    ChatMessage,
    GenerationConfig,
    GenerationRecord,
    TruthScore,
    failure_score,
    last_user_content,
    validate_transcript,
)

_PRONOUNS = frozenset({"he", "she", "it", "they"})
_ARRAY_RETRY = "Output only the JSON array of strings, with no other text."


@dataclass
class Claim:
    """One self-contained factual statement extracted from a generation."""

    text: str
    source_span: tuple[int, int] | None = None
    scores: list[TruthScore] = field(default_factory=list)
    correctness: int | None = None
    flags: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.text:
            raise ValueError("claim text must be non-empty")


def _claim_from_text(text: str, generation: str) -> Claim:
    start = generation.find(text)
    span = (start, start + len(text)) if start >= 0 else None
    claim = Claim(text=text, source_span=span)
    first_word = text.split()[0].lower().strip(".,;:!?") if text.split() else ""
    if first_word in _PRONOUNS:
        claim.flags.append("unresolved_pronoun")
    return claim


@dataclass
class Decomposer:
    """Splits text into claims by prompting a model for a strict JSON array."""

    spec: ModelSpec
    depth: int = 1

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError("decomposition depth must be >= 1")

    def run(self, generation: str, handle: ModelHandle, config: GenerationConfig) -> list[Claim]:
        return decompose(generation, handle.with_spec(self.spec), config, depth=self.depth)


def decompose(
    generation: str,
    handle: ModelHandle,
    config: GenerationConfig,
    depth: int = 1,
) -> list[Claim]:
    """Decompose a generation into claims; extra depth re-decomposes each claim
    once per level, deduplicating by normalized text."""
    if not generation:
        raise ValueError("generation must be non-empty")
    if depth < 1:
        raise ValueError("depth must be >= 1")

    texts = _decompose_once(generation, handle, config)
    for _ in range(depth - 1):
        texts = [sub for text in texts for sub in _decompose_once(text, handle, config)]

    seen = set()
    claims = []
    for text in texts:
        key = normalize(text)
        if key in seen:
            continue
        seen.add(key)
        claims.append(_claim_from_text(text, generation))
    return claims


def _decompose_once(text: str, handle: ModelHandle, config: GenerationConfig) -> list[str]:
    ask = [ChatMessage("user", render("decomposer", text=text))]
    reply = handle.chat_complete(ask, config, temperature=0.0)
    parsed = parse_string_array(reply.text)
    if parsed is None:
        retry = ask + [
            ChatMessage("assistant", reply.text or "(empty)"),
            ChatMessage("user", _ARRAY_RETRY),
        ]
        reply = handle.chat_complete(retry, config, temperature=0.0)
        parsed = parse_string_array(reply.text)
    if parsed is None:
        raise DecompositionError(f"decomposer did not return a JSON array: {reply.text!r}")
    return [t for t in parsed if t]


class ClaimCheckMethod(ABC):
    """Scores one claim; pure given inputs and scripts.

    ``check`` returns one score per underlying method (wrappers return one per
    wrapped truth method); a failure yields sentinels of the same arity.
    """

    method_id: str = "claim_check"

    @property
    def scores_per_claim(self) -> int:
        return 1

    def score_ids(self) -> list[str]:
        return [self.method_id]

    def check(
        self,
        question: str,
        generation: str,
        claim: Claim,
        handle: ModelHandle,
        config: GenerationConfig,
    ) -> list[TruthScore]:
        try:
            return self._check(question, generation, claim, handle, config)
        except Exception as exc:
            return [failure_score(score_id, exc) for score_id in self.score_ids()]

    @abstractmethod
    def _check(self, question, generation, claim, handle, config) -> list[TruthScore]:
        ...


class QuestionAnswerGeneration(ClaimCheckMethod):
    """Adapts whole-generation truth methods to one claim.

    Writes a question whose answer is the claim, re-answers it with the scored
    model, and applies each wrapped truth method to that fresh QA pair. When
    the re-answer does not bidirectionally entail the claim, scores keep their
    raw values but carry a claim_mismatch flag.
    """

    method_id = "qa_generation"

    def __init__(self, truth_methods, entailment: EntailmentProvider | None = None):
        if not truth_methods:
            raise ValueError("at least one wrapped truth method is required")
        self.truth_methods = list(truth_methods)
        self.entailment = entailment or LexicalEntailment()

    @property
    def scores_per_claim(self) -> int:
        return len(self.truth_methods)

    def score_ids(self) -> list[str]:
        return [f"{self.method_id}:{m.method_id}" for m in self.truth_methods]

    def _check(self, question, generation, claim, handle, config) -> list[TruthScore]:
        ask = [ChatMessage("user", render("qa_question", claim=claim.text))]
        probe = handle.chat_complete(ask, config, temperature=0.0)
        if not probe.text.strip():
            raise MethodFailure("question generation returned empty text")
        new_question = probe.text.strip()

        qa_messages = [ChatMessage("user", new_question)]
        answer = handle.chat_complete(qa_messages, config)

        pool = None
        wanted = [m.num_samples for m in self.truth_methods if m.requires_sampling]
        if wanted:
            from .types import SamplePool

            samples = handle.sample_n(qa_messages, config, max(wanted))
            pool = SamplePool.build(answer, samples)

        mismatch = not self.entailment.bidirectional_entail(new_question, answer.text, claim.text)
        scores = []
        for method, score_id in zip(self.truth_methods, self.score_ids()):
            score = method.score(qa_messages, answer, handle, config, pool)
            score.method_id = score_id
            score.details["generated_question"] = new_question
            score.details["generated_answer"] = answer.text
            if mismatch:
                score.details["claim_mismatch"] = True
            scores.append(score)
        return scores


class AnswerClaimEntailment(ClaimCheckMethod):
    """Probes the claim with generated questions and counts how many sampled
    answers entail it."""

    method_id = "answer_claim_entailment"

    def __init__(
        self,
        num_questions: int = 3,
        answers_per_question: int = 2,
        entailment: EntailmentProvider | None = None,
    ):
        if num_questions < 1 or answers_per_question < 1:
            raise ValueError("num_questions and answers_per_question must be >= 1")
        self.num_questions = num_questions
        self.answers_per_question = answers_per_question
        self.entailment = entailment or LexicalEntailment()

    def _probe_questions(self, claim: Claim, handle, config) -> list[str]:
        ask = [
            ChatMessage(
                "user", render("probe_question", claim=claim.text, count=self.num_questions)
            )
        ]
        reply = handle.chat_complete(ask, config, temperature=0.0)
        parsed = parse_string_array(reply.text)
        if parsed is None:
            retry = ask + [
                ChatMessage("assistant", reply.text or "(empty)"),
                ChatMessage("user", _ARRAY_RETRY),
            ]
            reply = handle.chat_complete(retry, config, temperature=0.0)
            parsed = parse_string_array(reply.text)
        if parsed is None:
            return []
        return [q for q in parsed if q][: self.num_questions]

    def _check(self, question, generation, claim, handle, config) -> list[TruthScore]:
        probes = self._probe_questions(claim, handle, config)
        entailed = 0
        total = 0
        grid = []
        for probe in probes:
            try:
                answers = handle.sample_n(
                    [ChatMessage("user", probe)], config, self.answers_per_question
                )
            except BackendError:
                continue
            row = []
            for answer in answers:
                verdict = self.entailment.entail(probe, answer.text, claim.text)
                row.append(verdict.label)
                total += 1
                if verdict.label == ENTAIL:
                    entailed += 1
            grid.append({"question": probe, "verdicts": row})
        if total == 0:
            raise MethodFailure("no usable probe answers")
        return [
            TruthScore(self.method_id, entailed / total, details={"probes": grid})
        ]


@dataclass
class LongFormResult:
    generation: GenerationRecord
    claims: list[Claim]
    decomposition_error: str | None = None


def long_form_generation_with_truth_value(
    messages: list[ChatMessage],
    decomposer: Decomposer,
    claim_check_methods: list[ClaimCheckMethod],
    handle: ModelHandle,
    config: GenerationConfig,
) -> LongFormResult:
    """Generate, decompose, then score every claim with every claim-check method.

    The generation comes back unmodified; a decomposition error yields an empty
    claim list with the error flagged rather than losing the generation.
    """
    if not claim_check_methods:
        raise ValueError("at least one claim-check method is required")
    validate_transcript(messages)
    record, _ = generate_with_truth_value(messages, [], config, handle)
    if record.finish_reason == "error":
        return LongFormResult(record, [], decomposition_error="generation failed")

    try:
        claims = decomposer.run(record.text, handle, config)
    except DecompositionError as exc:
        return LongFormResult(record, [], decomposition_error=str(exc))

    question = last_user_content(messages)
    for claim in claims:
        for method in claim_check_methods:
            claim.scores.extend(method.check(question, record.text, claim, handle, config))
    return LongFormResult(record, claims)


# ---------------------------------------------------------------------------
# claim-level evaluation


class ClaimEvaluator(ABC):
    """Labels one claim 0/1, or None when no label is known."""

    @abstractmethod
    def label(self, claim_text: str) -> int | None:
        ...


class FixtureClaimEvaluator(ClaimEvaluator):
    """Labels claims from a JSONL fixture of {claim_norm_hash, label} rows."""

    def __init__(self, labels_by_hash: dict[str, int]):
        if not labels_by_hash:
            raise DatasetError("claim-label fixture holds no labels")
        self._labels = dict(labels_by_hash)

    @staticmethod
    def load(path: str | Path) -> "FixtureClaimEvaluator":
        mapping = {}
        try:
            lines = Path(path).read_text().splitlines()
        except OSError as exc:
            raise DatasetError(f"cannot read claim-label fixture {path}: {exc}") from exc
        for lineno, line in enumerate(lines, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                mapping[str(obj["claim_norm_hash"])] = int(obj["label"])
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise DatasetError(f"{path}:{lineno}: bad claim-label row ({exc})") from exc
        return FixtureClaimEvaluator(mapping)

    @staticmethod
    def from_claims(labels_by_claim: dict[str, int]) -> "FixtureClaimEvaluator":
        return FixtureClaimEvaluator({claim_hash(c): y for c, y in labels_by_claim.items()})

    def label(self, claim_text: str) -> int | None:
        return self._labels.get(claim_hash(claim_text))


def load_longform_dataset(path: str | Path) -> list[dict]:
    """JSONL rows of {"question": str}; long-form rows carry no ground truths."""
    rows = []
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise DatasetError(f"cannot read dataset {path}: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            question = obj["question"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise DatasetError(f"{path}:{lineno}: bad dataset row ({exc})") from exc
        if not isinstance(question, str) or not question:
            raise DatasetError(f"{path}:{lineno}: question must be a non-empty string")
        rows.append({"question": question})
    return rows


@dataclass
class LongFormReport:
    """Pooled claim-level metrics per claim-check score id."""

    methods: dict[str, dict[str, float | None]]
    generations: int
    claims_total: int
    claims_labeled: int
    claims_unlabeled: int
    decomposition_errors: int
    model_name: str
    seed: int
    threshold: float | None
    prompt_hash: str
    curves: dict[str, dict] = field(default_factory=dict)

    def to_json(self) -> str:
        payload = {
            "metadata": {
                "generations": self.generations,
                "claims_total": self.claims_total,
                "claims_labeled": self.claims_labeled,
                "claims_unlabeled": self.claims_unlabeled,
                "decomposition_errors": self.decomposition_errors,
                "model": self.model_name,
                "seed": self.seed,
                "threshold": self.threshold,
                "prompt_hash": self.prompt_hash,
            },
            "methods": self.methods,
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["method", "metric", "value"])
        for method_id in sorted(self.methods):
            for metric in sorted(self.methods[method_id]):
                value = self.methods[method_id][metric]
                writer.writerow([method_id, metric, "" if value is None else repr(value)])
        return buf.getvalue()

    def plot_data_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["method", "curve", "x", "y"])
        for method_id in sorted(self.curves):
            data = self.curves[method_id]
            for k, err in enumerate(data["rejection"]):
                writer.writerow([method_id, "rejection", k, repr(err)])
            for fpr, tpr in data["roc"]:
                writer.writerow([method_id, "roc", repr(fpr), repr(tpr)])
        return buf.getvalue()


def evaluate_long_form(
    dataset: list[dict],
    decomposer: Decomposer,
    claim_check_methods: list[ClaimCheckMethod],
    handle: ModelHandle,
    claim_evaluator: ClaimEvaluator,
    config: GenerationConfig,
    *,
    dataset_metrics: list[str] = ("auroc", "prr"),
    sample_metrics: list[str] = (),
    threshold: float | None = None,
) -> LongFormReport:
    """Label every claim, pool all (claim, score) pairs dataset-wide, and compute
    dataset-level metrics; per-sample metrics are computed within each
    generation and averaged."""
    if not dataset:
        raise DatasetError("dataset is empty")

    score_ids = [sid for method in claim_check_methods for sid in method.score_ids()]
    pooled: dict[str, list[tuple[float, int]]] = {sid: [] for sid in score_ids}
    per_generation: dict[str, list[list[tuple[float, int]]]] = {sid: [] for sid in score_ids}
    claims_total = claims_labeled = decomposition_errors = 0

    for row in dataset:
        messages = [ChatMessage("user", row["question"])]
        result = long_form_generation_with_truth_value(
            messages, decomposer, claim_check_methods, handle, config
        )
        if result.decomposition_error is not None:
            decomposition_errors += 1
            continue
        generation_pairs: dict[str, list[tuple[float, int]]] = {sid: [] for sid in score_ids}
        for claim in result.claims:
            claims_total += 1
            label = claim_evaluator.label(claim.text)
            claim.correctness = label
            if label is None:
                continue
            claims_labeled += 1
            for score in claim.scores:
                pooled[score.method_id].append((score.raw_value, label))
                generation_pairs[score.method_id].append((score.raw_value, label))
        for sid in score_ids:
            per_generation[sid].append(generation_pairs[sid])

    report = LongFormReport(
        methods={},
        generations=len(dataset),
        claims_total=claims_total,
        claims_labeled=claims_labeled,
        claims_unlabeled=claims_total - claims_labeled,
        decomposition_errors=decomposition_errors,
        model_name=handle.spec.model_name,
        seed=config.seed,
        threshold=threshold,
        prompt_hash=prompts_hash(),
    )

    for sid in score_ids:
        pairs = pooled[sid]
        scores = [s for s, _ in pairs]
        labels = [y for _, y in pairs]
        values: dict[str, float | None] = {}
        for metric in dataset_metrics:
            if metric == "auroc":
                values["auroc"] = auroc(scores, labels)
            elif metric == "prr":
                values["prr"] = prr(scores, labels)
            else:
                raise ValueError(f"unknown dataset-level metric {metric!r}")
        for metric in sample_metrics:
            if metric != "f1":
                raise ValueError(f"unknown per-sample metric {metric!r}")
            cut = 0.5 if threshold is None else threshold
            per_gen_f1 = [
                threshold_metrics([s for s, _ in gp], [y for _, y in gp], cut).f1
                for gp in per_generation[sid]
                if gp
            ]
            values["f1_per_sample"] = (
                sum(per_gen_f1) / len(per_gen_f1) if per_gen_f1 else None
            )
        report.methods[sid] = values
        if scores:
            report.curves[sid] = {
                "rejection": rejection_curve(scores, labels),
                "roc": roc_points(scores, labels),
            }
    return report
