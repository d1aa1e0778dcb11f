"""Score calibration: isotonic regression via pool-adjacent-violators, and
min-max scaling. Fitted normalizers map raw truth values onto [0, 1] and
serialize to a JSON sidecar for reuse across runs.
"""

from __future__ import annotations

import bisect
import json
import math
import warnings
from pathlib import Path

from .errors import DatasetError, FitError


def pava(values: list[float], weights: list[float]) -> list[float]:
    """Weighted monotone (nondecreasing) least-squares fit of a sequence.

    Adjacent violating blocks are merged into their weighted mean until the
    block means are nondecreasing; the result minimizes sum(w*(fit - y)^2).
    """
    blocks: list[list[float]] = []  # [mean, weight, count]
    for y, w in zip(values, weights):
        blocks.append([y, w, 1])
        while len(blocks) > 1 and blocks[-2][0] > blocks[-1][0]:
            m2, w2, c2 = blocks.pop()
            m1, w1, c1 = blocks.pop()
            total = w1 + w2
            blocks.append([(m1 * w1 + m2 * w2) / total, total, c1 + c2])
    fitted = []
    for mean, _, count in blocks:
        fitted.extend([mean] * count)
    return fitted


class MinMaxNormalizer:
    """Linear rescaling of the observed score range onto [0, 1], clamped.

    A degenerate range (all scores equal) maps every input to 0.5.
    """

    kind = "minmax"

    def __init__(self):
        self.lo_: float | None = None
        self.hi_: float | None = None

    @property
    def fitted(self) -> bool:
        return self.lo_ is not None

    def fit(self, scores: list[float], labels=None) -> "MinMaxNormalizer":
        finite = [s for s in scores if math.isfinite(s)]
        if not finite:
            raise FitError("min-max fit needs at least one finite score")
        self.lo_, self.hi_ = min(finite), max(finite)
        return self

    def transform_one(self, score: float) -> float:
        if not self.fitted:
            raise FitError("normalizer is not fitted")
        if self.lo_ == self.hi_:
            return 0.5
        scaled = (score - self.lo_) / (self.hi_ - self.lo_)
        return min(max(scaled, 0.0), 1.0)

    def transform(self, scores: list[float]) -> list[float]:
        return [self.transform_one(s) for s in scores]

    def to_parameters(self) -> dict:
        return {"lo": self.lo_, "hi": self.hi_}

    @staticmethod
    def from_parameters(params: dict) -> "MinMaxNormalizer":
        norm = MinMaxNormalizer()
        norm.lo_ = float(params["lo"])
        norm.hi_ = float(params["hi"])
        return norm


class IsotonicNormalizer:
    """Isotonic regression of correctness on score.

    Prediction is the step function over fitted blocks: a new score takes the
    fitted value of its containing block and clamps to the first/last block
    outside the fitted range. Equal scores are forced into one block before
    fitting, since a function of score cannot distinguish them.
    """

    kind = "isotonic"

    def __init__(self):
        #: ascending (block start score, fitted value) pairs
        self.breakpoints_: list[tuple[float, float]] | None = None

    @property
    def fitted(self) -> bool:
        return self.breakpoints_ is not None

    def fit(self, scores: list[float], labels: list[float]) -> "IsotonicNormalizer":
        pairs = [
            (s, float(y))
            for s, y in zip(scores, labels)
            if math.isfinite(s)
        ]
        if len(pairs) < 2:
            raise FitError("isotonic fit needs at least two (score, label) pairs")
        if any(not 0.0 <= y <= 1.0 for _, y in pairs):
            raise FitError("isotonic targets must lie in [0, 1]")
        if len({y for _, y in pairs}) == 1:
            warnings.warn("isotonic fit saw a single label value; output is constant")

        pairs.sort(key=lambda p: p[0])
        # pre-merge ties into weighted points
        grouped: list[tuple[float, float, float]] = []  # (score, mean_y, weight)
        for score, y in pairs:
            if grouped and grouped[-1][0] == score:
                s0, m0, w0 = grouped[-1]
                grouped[-1] = (s0, (m0 * w0 + y) / (w0 + 1), w0 + 1)
            else:
                grouped.append((score, y, 1.0))
        fitted = pava([m for _, m, _ in grouped], [w for _, _, w in grouped])

        breakpoints = []
        for (score, _, _), value in zip(grouped, fitted):
            if not breakpoints or value != breakpoints[-1][1]:
                breakpoints.append((score, value))
        self.breakpoints_ = breakpoints
        return self

    def transform_one(self, score: float) -> float:
        if not self.fitted:
            raise FitError("normalizer is not fitted")
        starts = [s for s, _ in self.breakpoints_]
        idx = bisect.bisect_right(starts, score) - 1
        return self.breakpoints_[max(idx, 0)][1]

    def transform(self, scores: list[float]) -> list[float]:
        return [self.transform_one(s) for s in scores]

    def to_parameters(self) -> dict:
        return {"breakpoints": [[s, v] for s, v in self.breakpoints_]}

    @staticmethod
    def from_parameters(params: dict) -> "IsotonicNormalizer":
        norm = IsotonicNormalizer()
        norm.breakpoints_ = [(float(s), float(v)) for s, v in params["breakpoints"]]
        return norm


_KINDS = {"isotonic": IsotonicNormalizer, "minmax": MinMaxNormalizer}


def make_normalizer(kind: str):
    try:
        return _KINDS[kind]()
    except KeyError:
        raise FitError(f"unknown normalizer kind {kind!r}") from None


def fit_isotonic(pairs: list[tuple[float, float]]) -> IsotonicNormalizer:
    scores = [s for s, _ in pairs]
    labels = [y for _, y in pairs]
    return IsotonicNormalizer().fit(scores, labels)


def fit_minmax(scores: list[float]) -> MinMaxNormalizer:
    return MinMaxNormalizer().fit(scores)


def save_normalizers(path: str | Path, normalizers: dict) -> None:
    payload = {
        method_id: {"kind": norm.kind, "parameters": norm.to_parameters()}
        for method_id, norm in normalizers.items()
    }
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True))


def load_normalizers(path: str | Path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DatasetError(f"cannot load normalizer sidecar {path}: {exc}") from exc
    out = {}
    for method_id, entry in data.items():
        kind = entry.get("kind")
        if kind == "isotonic":
            out[method_id] = IsotonicNormalizer.from_parameters(entry["parameters"])
        elif kind == "minmax":
            out[method_id] = MinMaxNormalizer.from_parameters(entry["parameters"])
        else:
            raise DatasetError(f"unknown normalizer kind {kind!r} for {method_id!r}")
    return out


def calibrate_truth_method(
    dataset,
    methods,
    handle,
    correctness_evaluator,
    config,
    normalizer_kind: str = "isotonic",
):
    """Run the labeled pipeline, then fit each method's configured normalizer.

    Methods without a configured normalizer get a fresh one of
    *normalizer_kind*. Rows where a method reported the failure sentinel are
    excluded from that method's fit; a method with no usable rows ends up
    unfitted, with the error recorded in the returned summary.
    """
    from .evaluation import collect_labeled_rows

    rows, stats = collect_labeled_rows(dataset, methods, handle, correctness_evaluator, config)
    if not rows:
        raise DatasetError("calibration dataset produced no labeled rows")

    fitted = {}
    report = {}
    for method in methods:
        if method.normalizer is None:
            method.set_normalizer(make_normalizer(normalizer_kind))
        usable = [
            (row.scores[method.method_id], row.correct)
            for row in rows
            if math.isfinite(row.scores[method.method_id])
        ]
        if not usable:
            report[method.method_id] = {"fitted": False, "error": "all rows failed"}
            continue
        try:
            method.normalizer.fit([s for s, _ in usable], [y for _, y in usable])
        except FitError as exc:
            report[method.method_id] = {"fitted": False, "error": str(exc)}
            continue
        fitted[method.method_id] = method.normalizer
        report[method.method_id] = {"fitted": True, "rows_used": len(usable)}
    return fitted, report, stats
