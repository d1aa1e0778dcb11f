import math

import pytest

from truthkit.errors import TranscriptError
from truthkit.types import (
    ChatMessage,
    GenerationConfig,
    GenerationRecord,
    SamplePool,
    TokenInfo,
    TruthScore,
    failure_score,
    last_user_content,
    replace_last_user,
    validate_transcript,
)


class TestChatMessage:
    def test_roundtrip(self):
        msg = ChatMessage("user", "hi")
        assert ChatMessage.from_dict(msg.to_dict()) == msg

    def test_unknown_role(self):
        with pytest.raises(TranscriptError):
            ChatMessage("tool", "x")

    def test_empty_user_content(self):
        with pytest.raises(TranscriptError):
            ChatMessage("user", "")

    def test_empty_system_content_allowed(self):
        ChatMessage("system", "")


class TestTranscript:
    def test_valid(self):
        validate_transcript([ChatMessage("system", "s"), ChatMessage("user", "q")])

    def test_empty(self):
        with pytest.raises(TranscriptError):
            validate_transcript([])

    def test_last_not_user(self):
        with pytest.raises(TranscriptError):
            validate_transcript([ChatMessage("user", "q"), ChatMessage("assistant", "a")])

    def test_last_user_content(self):
        messages = [ChatMessage("user", "first"), ChatMessage("assistant", "a"), ChatMessage("user", "second")]
        assert last_user_content(messages) == "second"

    def test_replace_last_user_copies(self):
        messages = [ChatMessage("system", "s"), ChatMessage("user", "q")]
        swapped = replace_last_user(messages, "other")
        assert swapped[-1].content == "other"
        assert messages[-1].content == "q"


class TestGenerationConfig:
    def test_defaults(self):
        cfg = GenerationConfig()
        assert cfg.max_new_tokens >= 1 and cfg.num_samples >= 1 and cfg.max_concurrency >= 1

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"temperature": -0.1},
            {"sampling_temperature": -1},
            {"max_new_tokens": 0},
            {"num_samples": 0},
            {"max_concurrency": 0},
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            GenerationConfig(**kwargs)


class TestTokenInfo:
    def test_positive_logprob_rejected(self):
        with pytest.raises(ValueError):
            TokenInfo("a", 0.1)

    def test_zero_ok(self):
        assert math.exp(TokenInfo("a", 0.0).logprob) == 1.0


class TestGenerationRecord:
    def test_from_tokens_derives_text_and_sum(self):
        rec = GenerationRecord.from_tokens([("Par", -0.1), ("is", -0.3)])
        assert rec.text == "Paris"
        assert rec.cumulative_logprob == pytest.approx(-0.4, abs=1e-12)

    def test_sum_mismatch_rejected(self):
        with pytest.raises(ValueError):
            GenerationRecord(
                text="ab",
                tokens=(TokenInfo("a", -0.1), TokenInfo("b", -0.1)),
                cumulative_logprob=-0.5,
            )

    def test_concat_mismatch_rejected(self):
        with pytest.raises(ValueError):
            GenerationRecord(
                text="xy",
                tokens=(TokenInfo("a", -0.1), TokenInfo("b", -0.1)),
                cumulative_logprob=-0.2,
            )

    def test_empty_tokens_allowed(self):
        rec = GenerationRecord(text="free text")
        assert rec.tokens == ()

    def test_bad_finish_reason(self):
        with pytest.raises(ValueError):
            GenerationRecord(text="x", finish_reason="banana")

    def test_mean_logprob(self):
        rec = GenerationRecord.from_tokens([("a", -0.1), ("b", -0.3), ("c", -0.2)])
        assert rec.mean_logprob() == pytest.approx(-0.2)


class TestTruthScore:
    def test_normalized_bounds(self):
        with pytest.raises(ValueError):
            TruthScore("m", 0.0, normalized_value=1.5)

    def test_failure_sentinel(self):
        score = failure_score("m", RuntimeError("boom"))
        assert score.failed
        assert score.details["error"] == "boom"
        assert not TruthScore("m", -1e308).failed


class TestSamplePool:
    def test_build_and_take(self):
        primary = GenerationRecord(text="p")
        samples = [GenerationRecord(text=f"s{i}") for i in range(4)]
        pool = SamplePool.build(primary, samples)
        assert pool.size == 5 and pool.includes_target and pool.target_index == 0
        sub = pool.take(2)
        assert sub.texts() == ["p", "s0", "s1"]

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            SamplePool(samples=[])

    def test_has_logprobs(self):
        with_lp = GenerationRecord.from_tokens([("a", -0.5)])
        without = GenerationRecord(text="x")
        assert SamplePool([with_lp]).has_logprobs()
        assert not SamplePool([with_lp, without]).has_logprobs()
