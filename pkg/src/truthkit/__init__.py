"""truthkit: truthfulness scoring for LLM generations.

The toolkit generates a response, applies pluggable truth methods to score how
likely it is to be truthful, calibrates those scores, evaluates methods
against labeled datasets, and extends scoring to long-form generations via
claim decomposition.
"""

from . import backends, calibration, evaluation, longform, methods
from .orchestrator import generate_with_truth_value
from .registry import DEFAULT_REGISTRY, create_method, register_method
from .types import (
    ChatMessage,
    FAILURE_SENTINEL,
    GenerationConfig,
    GenerationRecord,
    SamplePool,
    TokenInfo,
    TruthScore,
)

__version__ = "0.1.0"

__all__ = [
    "backends",
    "calibration",
    "evaluation",
    "longform",
    "methods",
    "generate_with_truth_value",
    "DEFAULT_REGISTRY",
    "create_method",
    "register_method",
    "ChatMessage",
    "GenerationConfig",
    "GenerationRecord",
    "TokenInfo",
    "TruthScore",
    "SamplePool",
    "FAILURE_SENTINEL",
    "__version__",
]
