"""Generation plus truth scoring for one prompt.

Sampling-based methods share one sample pool: the orchestrator collects the
maximum requested sample count once and each method slices what it needs, so
attaching more methods never multiplies sampling cost.
"""

from __future__ import annotations

from .backends.base import ModelHandle
from .errors import BackendError
from .methods.base import TruthMethod
from .types import (
    ChatMessage,
    GenerationConfig,
    GenerationRecord,
    SamplePool,
    TruthScore,
    validate_transcript,
)


def generate_with_truth_value(
    messages: list[ChatMessage],
    methods: list[TruthMethod],
    config: GenerationConfig,
    handle: ModelHandle,
) -> tuple[GenerationRecord, list[TruthScore]]:
    """Generate once, then apply every method to the result, in order.

    A transport failure yields a record with finish_reason="error" and no
    scores; a single method's failure yields that method's sentinel score
    while the others still report.
    """
    validate_transcript(messages)
    try:
        record = handle.chat_complete(messages, config)
    except BackendError:
        return GenerationRecord(text="", finish_reason="error"), []

    wanted = [m.num_samples for m in methods if m.requires_sampling]
    pool = None
    if wanted:
        samples = handle.sample_n(messages, config, max(wanted))
        pool = SamplePool.build(record, samples)

    scores = [m.score(messages, record, handle, config, pool) for m in methods]
    return record, scores
