from .base import Backend, ModelHandle, ModelSpec
from .entailment import (
    CONTRADICT,
    ENTAIL,
    NEUTRAL,
    VERDICT_VALUE,
    EntailmentProvider,
    EntailmentVerdict,
    JudgeEntailment,
    LexicalEntailment,
)
from .evidence import EvidenceProvider, FixtureEvidence
from .http import OpenAiHttpBackend
from .mock import (
    MockBackend,
    MockScript,
    ScriptedEntailment,
    ScriptedEvidence,
    ScriptedSimilarity,
    entailment_table_rules,
)
from .similarity import ConstantSimilarity, SimilarityProvider, UnigramCosineSimilarity

__all__ = [
    "Backend",
    "ModelHandle",
    "ModelSpec",
    "ENTAIL",
    "NEUTRAL",
    "CONTRADICT",
    "VERDICT_VALUE",
    "EntailmentProvider",
    "EntailmentVerdict",
    "JudgeEntailment",
    "LexicalEntailment",
    "EvidenceProvider",
    "FixtureEvidence",
    "OpenAiHttpBackend",
    "MockBackend",
    "MockScript",
    "ScriptedEntailment",
    "ScriptedEvidence",
    "ScriptedSimilarity",
    "entailment_table_rules",
    "SimilarityProvider",
    "UnigramCosineSimilarity",
    "ConstantSimilarity",
]
