"""Correctness evaluators, truth-method quality metrics, and the dataset pipeline.

Metric conventions are pinned exactly:

* AUROC is rank-based (Mann-Whitney) with average ranks for ties.
* PRR is a fully discrete rejection-curve ratio. For k = 0..n rejected rows,
  the n-k rows with the highest scores are retained (ties broken by stable
  input order) and err(k) is the mean error over them, with err(n) := 0.
  The curve areas are plain means over k; the random curve holds the base
  error rate until exhaustion; PRR = (random - method) / (random - oracle).
  Input order is part of the metric's input.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import textnorm
from .backends.base import ModelHandle
from .errors import DatasetError, EvaluationAborted, MetricUndefinedError
from .orchestrator import generate_with_truth_value
from .prompts import prompts_hash, render
from .textnorm import first_integer
from .types import ChatMessage, GenerationConfig, GenerationRecord

THRESHOLD_METRIC_NAMES = ("accuracy", "precision", "recall", "f1")
KNOWN_METRICS = ("auroc", "prr") + THRESHOLD_METRIC_NAMES


# ---------------------------------------------------------------------------
# correctness evaluators


def exact_match(generated: str, ground_truths: list[str], contains: bool = False) -> int:
    """1 iff the normalized generation equals (or, in contains mode, contains)
    any normalized ground truth."""
    if not ground_truths:
        raise ValueError("ground_truths must be non-empty")
    gen = textnorm.normalize(generated)
    for truth in ground_truths:
        ref = textnorm.normalize(truth)
        if gen == ref or (contains and ref and ref in gen):
            return 1
    return 0


def lexical_f1(generated: str, ground_truths: list[str]) -> float:
    """Max over ground truths of unigram F1 between normalized token multisets."""
    if not ground_truths:
        raise ValueError("ground_truths must be non-empty")
    from collections import Counter

    gen_counts = Counter(textnorm.tokens(generated))
    best = 0.0
    for truth in ground_truths:
        ref_counts = Counter(textnorm.tokens(truth))
        overlap = sum((gen_counts & ref_counts).values())
        if overlap == 0:
            continue
        precision = overlap / sum(gen_counts.values())
        recall = overlap / sum(ref_counts.values())
        best = max(best, 2 * precision * recall / (precision + recall))
    return best


class CorrectnessEvaluator:
    """Labels one generation 0/1, or None when the row cannot be labeled."""

    name = "evaluator"

    def label(self, question: str, generated: str, ground_truths: list[str]) -> int | None:
        raise NotImplementedError


class ExactMatchEvaluator(CorrectnessEvaluator):
    name = "exact_match"

    def __init__(self, contains: bool = False):
        self.contains = contains

    def label(self, question, generated, ground_truths):
        return exact_match(generated, ground_truths, contains=self.contains)


class LexicalOverlapEvaluator(CorrectnessEvaluator):
    name = "lexical_f1"

    def __init__(self, threshold: float = 0.5):
        self.threshold = threshold

    def label(self, question, generated, ground_truths):
        return 1 if lexical_f1(generated, ground_truths) >= self.threshold else 0


class ModelJudgeEvaluator(CorrectnessEvaluator):
    """Asks a judge model for a binary correctness judgment; parses the first
    integer and re-asks once before giving the row up as unlabeled."""

    name = "model_judge"

    _RETRY = "Reply with a single digit, 0 or 1, and nothing else."

    def __init__(self, handle: ModelHandle, config: GenerationConfig | None = None):
        self.handle = handle
        self.config = config or GenerationConfig()

    def label(self, question, generated, ground_truths):
        prompt = render(
            "judge",
            question=question,
            generation=generated,
            references="; ".join(ground_truths),
        )
        ask = [ChatMessage("user", prompt)]
        reply = self.handle.chat_complete(ask, self.config, temperature=0.0, max_new_tokens=4)
        value = first_integer(reply.text)
        if value not in (0, 1):
            retry = ask + [
                ChatMessage("assistant", reply.text or "(empty)"),
                ChatMessage("user", self._RETRY),
            ]
            reply = self.handle.chat_complete(retry, self.config, temperature=0.0, max_new_tokens=4)
            value = first_integer(reply.text)
        return value if value in (0, 1) else None


# ---------------------------------------------------------------------------
# metrics


def _check_binary(labels: list[int]) -> None:
    classes = set(labels)
    if not classes <= {0, 1}:
        raise ValueError(f"labels must be 0/1, got {sorted(classes)}")
    if classes != {0, 1}:
        raise MetricUndefinedError("metric needs both classes present in labels")


def auroc(scores: list[float], labels: list[int]) -> float:
    """Rank-based AUROC with average ranks for ties."""
    if len(scores) != len(labels):
        raise ValueError("scores and labels must have equal length")
    _check_binary(labels)
    n = len(scores)
    order = sorted(range(n), key=lambda i: scores[i])
    ranks = [0.0] * n
    pos = 0
    while pos < n:
        end = pos
        while end + 1 < n and scores[order[end + 1]] == scores[order[pos]]:
            end += 1
        avg_rank = (pos + end) / 2 + 1  # 1-based
        for idx in order[pos : end + 1]:
            ranks[idx] = avg_rank
        pos = end + 1
    n_pos = sum(labels)
    n_neg = n - n_pos
    rank_sum = sum(r for r, y in zip(ranks, labels) if y == 1)
    return (rank_sum - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg)


def rejection_curve(scores: list[float], labels: list[int]) -> list[float]:
    """err(k) for k = 0..n rejected rows, retaining the highest-scoring rows
    first (stable ties) and defining err(n) := 0."""
    n = len(scores)
    order = sorted(range(n), key=lambda i: (-scores[i], i))
    return _curve_from_retention([labels[i] for i in order])


def _curve_from_retention(labels_in_retention_order: list[int]) -> list[float]:
    n = len(labels_in_retention_order)
    errors_prefix = [0]
    for y in labels_in_retention_order:
        errors_prefix.append(errors_prefix[-1] + (1 - y))
    curve = [errors_prefix[n - k] / (n - k) for k in range(n)]
    curve.append(0.0)
    return curve


def prr(scores: list[float], labels: list[int]) -> float:
    """Prediction rejection ratio: 1 = oracle rejection, 0 = random, negative =
    worse than random."""
    if len(scores) != len(labels):
        raise ValueError("scores and labels must have equal length")
    _check_binary(labels)
    n = len(scores)
    method_curve = rejection_curve(scores, labels)
    oracle_order = sorted(range(n), key=lambda i: (-labels[i], i))
    oracle_curve = _curve_from_retention([labels[i] for i in oracle_order])
    base_err = sum(1 - y for y in labels) / n
    random_curve = [base_err] * n + [0.0]

    auc_method = sum(method_curve) / (n + 1)
    auc_oracle = sum(oracle_curve) / (n + 1)
    auc_random = sum(random_curve) / (n + 1)
    denom = auc_random - auc_oracle
    if denom == 0:
        raise MetricUndefinedError("oracle and random rejection coincide (degenerate labels)")
    return (auc_random - auc_method) / denom


@dataclass
class ThresholdMetrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    #: metric names whose denominator was 0; their value is reported as 0.0
    undefined: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
        }


def threshold_metrics(scores: list[float], labels: list[int], threshold: float) -> ThresholdMetrics:
    """Confusion-matrix metrics predicting truthful iff score >= threshold."""
    if not scores:
        return ThresholdMetrics(0.0, 0.0, 0.0, 0.0, undefined=THRESHOLD_METRIC_NAMES)
    tp = fp = tn = fn = 0
    for score, y in zip(scores, labels):
        predicted = score >= threshold
        if predicted and y == 1:
            tp += 1
        elif predicted and y == 0:
            fp += 1
        elif not predicted and y == 0:
            tn += 1
        else:
            fn += 1
    undefined = []
    accuracy = (tp + tn) / len(scores)
    precision = recall = f1 = 0.0
    if tp + fp:
        precision = tp / (tp + fp)
    else:
        undefined.append("precision")
    if tp + fn:
        recall = tp / (tp + fn)
    else:
        undefined.append("recall")
    if precision + recall > 0:
        f1 = 2 * precision * recall / (precision + recall)
    else:
        undefined.append("f1")
    return ThresholdMetrics(accuracy, precision, recall, f1, undefined=tuple(undefined))


def roc_points(scores: list[float], labels: list[int]) -> list[tuple[float, float]]:
    """(FPR, TPR) sweep from (0,0) to (1,1) over descending unique thresholds."""
    n_pos = sum(labels)
    n_neg = len(labels) - n_pos
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
    points = [(0.0, 0.0)]
    tp = fp = 0
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and scores[order[j + 1]] == scores[order[i]]:
            j += 1
        for idx in order[i : j + 1]:
            if labels[idx] == 1:
                tp += 1
            else:
                fp += 1
        points.append((fp / n_neg if n_neg else 0.0, tp / n_pos if n_pos else 0.0))
        i = j + 1
    return points


# ---------------------------------------------------------------------------
# dataset pipeline


@dataclass
class LabeledRow:
    question: str
    ground_truths: list[str]
    generation: GenerationRecord
    correct: int
    scores: dict[str, float]
    score_details: dict[str, dict] = field(default_factory=dict)


def load_qa_dataset(path: str | Path) -> list[dict]:
    """JSONL rows of {"question": str, "ground_truths": [str, ...]}."""
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
            truths = obj["ground_truths"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise DatasetError(f"{path}:{lineno}: bad dataset row ({exc})") from exc
        if not isinstance(question, str) or not isinstance(truths, list) or not truths:
            raise DatasetError(f"{path}:{lineno}: bad dataset row (wrong field shapes)")
        rows.append({"question": question, "ground_truths": [str(t) for t in truths]})
    return rows


def collect_labeled_rows(
    dataset: list[dict],
    methods,
    handle: ModelHandle,
    evaluator: CorrectnessEvaluator,
    config: GenerationConfig,
) -> tuple[list[LabeledRow], dict]:
    """Generate, score, and label every dataset row.

    Rows run concurrently up to config.max_concurrency but are assembled by
    index, so the output is independent of completion order.
    """
    ids = [m.method_id for m in methods]
    if len(set(ids)) != len(ids):
        raise ValueError(f"method ids must be unique within a run, got {ids}")

    def run_row(row: dict) -> tuple[LabeledRow | None, str]:
        messages = [ChatMessage("user", row["question"])]
        record, scores = generate_with_truth_value(messages, methods, config, handle)
        if record.finish_reason == "error":
            return None, "failed"
        label = evaluator.label(row["question"], record.text, row["ground_truths"])
        if label is None:
            return None, "unlabeled"
        return (
            LabeledRow(
                question=row["question"],
                ground_truths=row["ground_truths"],
                generation=record,
                correct=label,
                scores={s.method_id: s.raw_value for s in scores},
                score_details={s.method_id: s.details for s in scores},
            ),
            "ok",
        )

    if config.max_concurrency > 1:
        with ThreadPoolExecutor(max_workers=config.max_concurrency) as pool:
            results = list(pool.map(run_row, dataset))
    else:
        results = [run_row(row) for row in dataset]

    rows = [row for row, status in results if status == "ok"]
    stats = {
        "total": len(dataset),
        "scored": len(rows),
        "failed": sum(1 for _, status in results if status == "failed"),
        "unlabeled": sum(1 for _, status in results if status == "unlabeled"),
    }
    return rows, stats


@dataclass
class EvalReport:
    """Per-method metric table over one dataset run."""

    methods: dict[str, dict[str, float | None]]
    dataset_size: int
    rows_scored: int
    rows_failed: int
    rows_unlabeled: int
    model_name: str
    seed: int
    threshold: float | None
    sentinel_policy: str
    prompt_hash: str
    curves: dict[str, dict] = field(default_factory=dict)

    def to_json(self) -> str:
        payload = {
            "metadata": {
                "dataset_size": self.dataset_size,
                "rows_scored": self.rows_scored,
                "rows_failed": self.rows_failed,
                "rows_unlabeled": self.rows_unlabeled,
                "model": self.model_name,
                "seed": self.seed,
                "threshold": self.threshold,
                "sentinel_policy": self.sentinel_policy,
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
            metrics = self.methods[method_id]
            for metric in sorted(metrics):
                value = metrics[metric]
                writer.writerow([method_id, metric, "" if value is None else repr(value)])
        return buf.getvalue()

    def plot_data_csv(self) -> str:
        """Rejection curves and ROC points, one row per point, for external plotting."""
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

    def table(self) -> str:
        metric_names = sorted({m for metrics in self.methods.values() for m in metrics})
        header = ["method"] + metric_names
        lines = ["\t".join(header)]
        for method_id in sorted(self.methods):
            row = [method_id]
            for name in metric_names:
                value = self.methods[method_id].get(name)
                row.append("-" if value is None else f"{value:.4f}")
            lines.append("\t".join(row))
        return "\n".join(lines)


def evaluate_truth_method(
    dataset: list[dict],
    methods,
    handle: ModelHandle,
    evaluator: CorrectnessEvaluator,
    metrics: list[str],
    config: GenerationConfig,
    *,
    threshold: float | None = None,
    sentinel_policy: str = "worst",
    abort_failed_fraction: float = 0.5,
) -> EvalReport:
    """Run the pipeline over a dataset and compute the requested metrics per method.

    Failure-sentinel scores are either dropped per method or kept as
    worst-ranked, per *sentinel_policy*. If more than *abort_failed_fraction*
    of rows fail to generate, the run aborts carrying the partial report.
    """
    if not metrics:
        raise ValueError("at least one metric must be requested")
    unknown = [m for m in metrics if m not in KNOWN_METRICS]
    if unknown:
        raise ValueError(f"unknown metrics {unknown}; known: {list(KNOWN_METRICS)}")
    if sentinel_policy not in ("worst", "drop"):
        raise ValueError("sentinel_policy must be 'worst' or 'drop'")
    if not dataset:
        raise DatasetError("dataset is empty")

    rows, stats = collect_labeled_rows(dataset, methods, handle, evaluator, config)

    report = EvalReport(
        methods={},
        dataset_size=stats["total"],
        rows_scored=stats["scored"],
        rows_failed=stats["failed"],
        rows_unlabeled=stats["unlabeled"],
        model_name=handle.spec.model_name,
        seed=config.seed,
        threshold=threshold,
        sentinel_policy=sentinel_policy,
        prompt_hash=prompts_hash(),
    )

    if stats["failed"] > abort_failed_fraction * stats["total"]:
        raise EvaluationAborted(
            f"{stats['failed']}/{stats['total']} rows failed to generate", report=report
        )

    for method in methods:
        method_id = method.method_id
        pairs = [(row.scores[method_id], row.correct) for row in rows]
        if sentinel_policy == "drop":
            pairs = [(s, y) for s, y in pairs if math.isfinite(s)]
        scores = [s for s, _ in pairs]
        labels = [y for _, y in pairs]

        values: dict[str, float | None] = {}
        for metric in metrics:
            if metric == "auroc":
                values["auroc"] = auroc(scores, labels)
            elif metric == "prr":
                values["prr"] = prr(scores, labels)
        wanted_threshold = [m for m in metrics if m in THRESHOLD_METRIC_NAMES]
        if wanted_threshold:
            decision_scores, cut = _decision_scores(method, scores, threshold)
            tm = threshold_metrics(decision_scores, labels, cut)
            for name in wanted_threshold:
                values[name] = getattr(tm, name)
        report.methods[method_id] = values
        report.curves[method_id] = {
            "rejection": rejection_curve(scores, labels),
            "roc": roc_points(scores, labels),
        }
    return report


def _decision_scores(method, scores: list[float], threshold: float | None):
    """Threshold metrics run on normalized scores at 0.5 by default; raw scores
    need an explicit threshold because raw ranges are method-specific."""
    if method.normalizer is not None and method.normalizer.fitted:
        return [method.normalizer.transform_one(s) for s in scores], (
            0.5 if threshold is None else threshold
        )
    if threshold is None:
        raise ValueError(
            f"threshold metrics on uncalibrated scores of {method.method_id!r} "
            "require an explicit threshold"
        )
    return list(scores), threshold

