"""Command-line front end.

Subcommands: generate (one question with scores), eval (dataset evaluation),
calibrate (fit normalizers), longform-eval (claim-level evaluation).
Exit codes: 0 success, 1 configuration/input error, 2 backend/transport error,
3 metric-undefined error.
"""

from __future__ import annotations

import argparse
import inspect
import json
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .backends import (
    JudgeEntailment,
    LexicalEntailment,
    MockBackend,
    MockScript,
    ModelHandle,
    ModelSpec,
    OpenAiHttpBackend,
)
from .calibration import calibrate_truth_method, load_normalizers, save_normalizers
from .errors import (
    BackendError,
    DatasetError,
    DecompositionError,
    EndpointConfigError,
    EvaluationAborted,
    FitError,
    MetricUndefinedError,
    RegistryError,
    ScriptMissError,
    TranscriptError,
)
from .evaluation import (
    ExactMatchEvaluator,
    LexicalOverlapEvaluator,
    ModelJudgeEvaluator,
    evaluate_truth_method,
    load_qa_dataset,
)
from .longform import (
    AnswerClaimEntailment,
    Decomposer,
    FixtureClaimEvaluator,
    QuestionAnswerGeneration,
    evaluate_long_form,
    load_longform_dataset,
)
from .methods.single import DocumentSet
from .orchestrator import generate_with_truth_value
from .registry import DEFAULT_REGISTRY
from .types import ChatMessage, GenerationConfig


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # bad flags are input errors, exit 1
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="truthkit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser):
        p.add_argument("--config", help="TOML config file; flags override its values")
        p.add_argument("--model", help="model name sent to the endpoint")
        p.add_argument("--endpoint", help="OpenAI-compatible chat-completions URL")
        p.add_argument("--api-key-env", help="environment variable holding the API key")
        p.add_argument("--no-logprobs", action="store_true", help="endpoint has no logprobs")
        p.add_argument("--mock-fixture", help="run against a scripted mock backend")
        p.add_argument("--methods", help="comma-separated truth method ids")
        p.add_argument("--seed", type=int, help="generation seed (default 0)")
        p.add_argument("--concurrency", type=int, help="max concurrent rows (default 1)")
        p.add_argument("--temperature", type=float)
        p.add_argument("--sampling-temperature", type=float)
        p.add_argument("--max-new-tokens", type=int)
        p.add_argument("--num-samples", type=int)
        p.add_argument("--max-retries", type=int, default=2)
        p.add_argument("--retry-backoff", type=float, default=0.5)
        p.add_argument(
            "--entailment", choices=["lexical", "judge"], default="lexical",
            help="entailment provider for semantic methods",
        )
        p.add_argument("--judge-model", help="model for judge-based entailment/correctness")
        p.add_argument("--normalizers", help="normalizer sidecar JSON to apply")

    g = sub.add_parser("generate", help="score one question")
    common(g)
    g.add_argument("--question", help="question text (reads stdin when omitted)")
    g.add_argument("--system", help="optional system prompt")
    g.set_defaults(func=cmd_generate)

    e = sub.add_parser("eval", help="evaluate truth methods on a labeled dataset")
    common(e)
    e.add_argument("--dataset", required=True, help="JSONL with question/ground_truths rows")
    e.add_argument(
        "--correctness", choices=["exact_match", "contains", "lexical_f1", "model_judge"],
        default="exact_match",
    )
    e.add_argument("--metrics", default="auroc,prr", help="comma-separated metric names")
    e.add_argument("--threshold", type=float, help="decision threshold for threshold metrics")
    e.add_argument(
        "--sentinel-policy", choices=["worst", "drop"], default="worst",
        help="treatment of failure-sentinel scores",
    )
    e.add_argument("--out", required=True, help="output directory for report files")
    e.set_defaults(func=cmd_eval)

    c = sub.add_parser("calibrate", help="fit normalizers on a labeled dataset")
    common(c)
    c.add_argument("--dataset", required=True)
    c.add_argument(
        "--correctness", choices=["exact_match", "contains", "lexical_f1", "model_judge"],
        default="exact_match",
    )
    c.add_argument("--normalizer", choices=["isotonic", "minmax"], default="isotonic")
    c.add_argument("--out", required=True, help="path of the normalizer sidecar JSON")
    c.set_defaults(func=cmd_calibrate)

    lf = sub.add_parser("longform-eval", help="claim-level evaluation of long-form generations")
    common(lf)
    lf.add_argument("--dataset", required=True, help="JSONL with question rows")
    lf.add_argument("--claim-labels", required=True, help="JSONL claim-label fixture")
    lf.add_argument(
        "--claim-checks", default="answer_claim_entailment",
        help="comma-separated: answer_claim_entailment and/or qa_generation",
    )
    lf.add_argument("--qa-methods", default="confidence", help="truth methods wrapped by qa_generation")
    lf.add_argument("--decomposer-model", help="model for decomposition (defaults to --model)")
    lf.add_argument("--decomposition-depth", type=int, default=1)
    lf.add_argument("--metrics", default="auroc,prr", help="dataset-level metrics")
    lf.add_argument("--sample-metrics", default="", help="per-sample metrics (f1)")
    lf.add_argument("--threshold", type=float)
    lf.add_argument("--out", required=True, help="output directory for report files")
    lf.set_defaults(func=cmd_longform_eval)

    return parser


# ---------------------------------------------------------------------------
# run context assembly


class RunContext:
    def __init__(self, args):
        self.file_config = _load_config(args.config) if args.config else {}
        run = self.file_config.get("run", {})

        def pick(flag_value, key, default):
            if flag_value is not None:
                return flag_value
            return run.get(key, default)

        self.model_name = pick(args.model, "model", "mock-model")
        self.endpoint = pick(args.endpoint, "endpoint", "http://localhost:8000/v1/chat/completions")
        self.api_key_env = pick(args.api_key_env, "api_key_env", "TRUTHKIT_API_KEY")
        self.supports_logprobs = not (args.no_logprobs or run.get("no_logprobs", False))
        self.spec = ModelSpec(
            model_name=self.model_name,
            endpoint_url=self.endpoint,
            api_key_env=self.api_key_env,
            supports_logprobs=self.supports_logprobs,
        )
        self.config = GenerationConfig(
            temperature=pick(args.temperature, "temperature", 1.0),
            max_new_tokens=pick(args.max_new_tokens, "max_new_tokens", 64),
            num_samples=pick(args.num_samples, "num_samples", 5),
            sampling_temperature=pick(args.sampling_temperature, "sampling_temperature", 1.0),
            seed=pick(args.seed, "seed", 0),
            max_concurrency=pick(args.concurrency, "concurrency", 1),
        )
        if args.mock_fixture:
            self.backend = MockBackend(MockScript.load(args.mock_fixture))
        else:
            self.backend = OpenAiHttpBackend(
                max_retries=args.max_retries, backoff=args.retry_backoff
            )
        self.handle = ModelHandle(self.backend, self.spec)
        self.judge_model = args.judge_model or run.get("judge_model")
        self.entailment = self._entailment_provider(args.entailment)

    def _entailment_provider(self, kind: str):
        if kind == "judge":
            if not self.judge_model:
                raise ValueError("--entailment judge requires --judge-model")
            return JudgeEntailment(self.handle.with_spec(self.judge_spec()))
        return LexicalEntailment()

    def judge_spec(self) -> ModelSpec:
        if not self.judge_model:
            raise ValueError("--judge-model is required for judge-based evaluation")
        return ModelSpec(
            model_name=self.judge_model,
            endpoint_url=self.endpoint,
            api_key_env=self.api_key_env,
            supports_logprobs=False,
        )

    def build_methods(self, methods_arg: str | None):
        ids = _split_csv(methods_arg) if methods_arg else list(
            self.file_config.get("methods", {})
        )
        if not ids:
            raise ValueError("no methods configured; pass --methods or a [methods.*] config table")
        return [self._build_method(mid) for mid in ids]

    def _build_method(self, method_id: str):
        params = dict(self.file_config.get("methods", {}).get(method_id, {}))
        if "examiner_model" in params:
            params["examiner"] = ModelSpec(
                model_name=params.pop("examiner_model"),
                endpoint_url=self.endpoint,
                api_key_env=self.api_key_env,
                supports_logprobs=False,
            )
        if "reviewer_models" in params:
            params["reviewers"] = [
                ModelSpec(
                    model_name=name,
                    endpoint_url=self.endpoint,
                    api_key_env=self.api_key_env,
                    supports_logprobs=False,
                )
                for name in params.pop("reviewer_models")
            ]
        if "documents" in params:
            params["documents"] = DocumentSet(passages=list(params["documents"]))
        factory = DEFAULT_REGISTRY.factory(method_id)
        accepted = inspect.signature(factory).parameters
        if "entailment" in accepted and "entailment" not in params:
            params["entailment"] = self.entailment
        return DEFAULT_REGISTRY.create(method_id, **params)

    def correctness_evaluator(self, kind: str):
        if kind == "exact_match":
            return ExactMatchEvaluator()
        if kind == "contains":
            return ExactMatchEvaluator(contains=True)
        if kind == "lexical_f1":
            return LexicalOverlapEvaluator()
        if kind == "model_judge":
            return ModelJudgeEvaluator(self.handle.with_spec(self.judge_spec()))
        raise ValueError(f"unknown correctness evaluator {kind!r}")

    def attach_normalizers(self, methods, sidecar_path: str | None):
        if not sidecar_path:
            return
        normalizers = load_normalizers(sidecar_path)
        by_id = {m.method_id: m for m in methods}
        unknown = sorted(set(normalizers) - set(by_id))
        if unknown:
            raise ValueError(f"normalizer sidecar names unknown methods: {unknown}")
        for method_id, normalizer in normalizers.items():
            by_id[method_id].set_normalizer(normalizer)


def _load_config(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise DatasetError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise DatasetError(f"config {path} is not valid TOML: {exc}") from exc


def _split_csv(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _score_payload(score) -> dict:
    return {
        "method_id": score.method_id,
        "raw_value": score.raw_value,
        "normalized_value": score.normalized_value,
        "details": _jsonable(score.details),
    }


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (str, int, bool)) or value is None:
        return value
    if isinstance(value, float):
        return value if value == value and abs(value) != float("inf") else repr(value)
    return repr(value)


# ---------------------------------------------------------------------------
# subcommands


def cmd_generate(args) -> int:
    ctx = RunContext(args)
    methods = ctx.build_methods(args.methods) if args.methods or ctx.file_config.get("methods") else []
    ctx.attach_normalizers(methods, args.normalizers)
    question = args.question if args.question is not None else sys.stdin.read().strip()
    if not question:
        raise ValueError("no question given (use --question or stdin)")
    messages = []
    if args.system:
        messages.append(ChatMessage("system", args.system))
    messages.append(ChatMessage("user", question))

    record, scores = generate_with_truth_value(messages, methods, ctx.config, ctx.handle)
    if record.finish_reason == "error":
        print("error: generation failed (backend unreachable)", file=sys.stderr)
        return 2
    payload = {
        "text": record.text,
        "finish_reason": record.finish_reason,
        "cumulative_logprob": record.cumulative_logprob,
        "scores": [_score_payload(s) for s in scores],
    }
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def _write_report(outdir: str, report) -> None:
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(report.to_json() + "\n")
    (out / "report.csv").write_text(report.to_csv())
    if getattr(report, "curves", None):
        (out / "plot_data.csv").write_text(report.plot_data_csv())


def cmd_eval(args) -> int:
    ctx = RunContext(args)
    methods = ctx.build_methods(args.methods)
    ctx.attach_normalizers(methods, args.normalizers)
    dataset = load_qa_dataset(args.dataset)
    evaluator = ctx.correctness_evaluator(args.correctness)
    metrics = _split_csv(args.metrics)
    try:
        report = evaluate_truth_method(
            dataset,
            methods,
            ctx.handle,
            evaluator,
            metrics,
            ctx.config,
            threshold=args.threshold,
            sentinel_policy=args.sentinel_policy,
        )
    except EvaluationAborted as exc:
        if exc.report is not None:
            _write_report(args.out, exc.report)
        print(f"error: evaluation aborted: {exc}", file=sys.stderr)
        return 2
    _write_report(args.out, report)
    print(report.table())
    return 0


def cmd_calibrate(args) -> int:
    ctx = RunContext(args)
    methods = ctx.build_methods(args.methods)
    dataset = load_qa_dataset(args.dataset)
    evaluator = ctx.correctness_evaluator(args.correctness)
    fitted, summary, _stats = calibrate_truth_method(
        dataset, methods, ctx.handle, evaluator, ctx.config, normalizer_kind=args.normalizer
    )
    if not fitted:
        print("error: no method could be calibrated", file=sys.stderr)
        for method_id in sorted(summary):
            print(f"  {method_id}: {summary[method_id]}", file=sys.stderr)
        return 1
    save_normalizers(args.out, fitted)
    for method_id in sorted(summary):
        print(f"{method_id}: {json.dumps(summary[method_id], sort_keys=True)}")
    return 0


def cmd_longform_eval(args) -> int:
    ctx = RunContext(args)
    claim_evaluator = FixtureClaimEvaluator.load(args.claim_labels)
    decomposer = Decomposer(
        spec=ModelSpec(
            model_name=args.decomposer_model or ctx.model_name,
            endpoint_url=ctx.endpoint,
            api_key_env=ctx.api_key_env,
            supports_logprobs=False,
        ),
        depth=args.decomposition_depth,
    )
    claim_checks = []
    for check_id in _split_csv(args.claim_checks):
        if check_id == "answer_claim_entailment":
            claim_checks.append(AnswerClaimEntailment(entailment=ctx.entailment))
        elif check_id == "qa_generation":
            wrapped = [ctx._build_method(mid) for mid in _split_csv(args.qa_methods)]
            claim_checks.append(QuestionAnswerGeneration(wrapped, entailment=ctx.entailment))
        else:
            raise ValueError(f"unknown claim-check method {check_id!r}")

    dataset = load_longform_dataset(args.dataset)
    report = evaluate_long_form(
        dataset,
        decomposer,
        claim_checks,
        ctx.handle,
        claim_evaluator,
        ctx.config,
        dataset_metrics=_split_csv(args.metrics),
        sample_metrics=_split_csv(args.sample_metrics),
        threshold=args.threshold,
    )
    _write_report(args.out, report)
    for method_id in sorted(report.methods):
        print(f"{method_id}: {json.dumps(report.methods[method_id], sort_keys=True)}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (
        DatasetError,
        RegistryError,
        EndpointConfigError,
        FitError,
        TranscriptError,
        DecompositionError,
        ScriptMissError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except BackendError as exc:
        print(f"error: backend failure: {exc}", file=sys.stderr)
        return 2
    except MetricUndefinedError as exc:
        print(f"error: metric undefined: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
