"""The truth-method contract.

A truth method scores a finished generation post hoc; it never interferes with
generation and never mutates its inputs. A method that blows up internally
yields the failure sentinel instead of sinking the whole run.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod

from ..backends.base import ModelHandle
from ..types import (
    ChatMessage,
    GenerationConfig,
    GenerationRecord,
    SamplePool,
    TruthScore,
    failure_score,
)

#: value recorded in details for the pool-composition choice of sampling methods
POOL_COMPOSITION = "target+samples"


class TruthMethod(ABC):
    method_id: str = "truth_method"
    #: set on methods that consume the shared sample pool
    requires_sampling: bool = False

    def __init__(self):
        self.normalizer = None

    @property
    def num_samples(self) -> int:
        """Samples this method wants from the shared pool (0 for single-pass methods)."""
        return 0

    def set_normalizer(self, normalizer) -> "TruthMethod":
        self.normalizer = normalizer
        return self

    def get_params(self) -> dict:
        """Scalar configuration of this instance, for report metadata."""
        return {
            k: v
            for k, v in vars(self).items()
            if not k.startswith("_") and isinstance(v, (bool, int, float, str))
        }

    def score(
        self,
        messages: list[ChatMessage],
        record: GenerationRecord,
        handle: ModelHandle,
        config: GenerationConfig,
        pool: SamplePool | None = None,
    ) -> TruthScore:
        try:
            result = self._score(messages, record, handle, config, pool)
        except Exception as exc:  # isolate per-method failures
            return failure_score(self.method_id, exc)
        if self.normalizer is not None and math.isfinite(result.raw_value):
            result.normalized_value = self.normalizer.transform_one(result.raw_value)
        return result

    @abstractmethod
    def _score(self, messages, record, handle, config, pool) -> TruthScore:
        ...

    def _need_pool(self, pool: SamplePool | None) -> SamplePool:
        if pool is None:
            raise ValueError(f"{self.method_id} needs a sample pool")
        return pool.take(self.num_samples)
