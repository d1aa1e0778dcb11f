from .base import TruthMethod
from .collab import CrossExamination, MultiLlmCollab, SelfDetection
from .semantic import (
    Clustering,
    NumSemanticSets,
    SemanticEntropy,
    SemanticGraph,
    SentSar,
    build_affinity,
    num_semantic_sets,
    semantic_cluster,
    semantic_entropy,
    sent_sar,
)
from .single import (
    Confidence,
    DocumentCheck,
    DocumentSet,
    PTrue,
    TokenSar,
    VerbalizedConfidence,
    confidence_mean_logprob,
    document_check,
    token_sar,
)
from .spectral import (
    Eccentricity,
    KernelLanguageEntropy,
    MatrixDegree,
    eccentricity,
    kernel_language_entropy,
    laplacian_spectrum,
    matrix_degree,
    normalized_laplacian,
)

__all__ = [
    "TruthMethod",
    "Confidence",
    "PTrue",
    "VerbalizedConfidence",
    "TokenSar",
    "DocumentCheck",
    "DocumentSet",
    "confidence_mean_logprob",
    "token_sar",
    "document_check",
    "SemanticGraph",
    "Clustering",
    "SemanticEntropy",
    "NumSemanticSets",
    "SentSar",
    "build_affinity",
    "semantic_cluster",
    "semantic_entropy",
    "num_semantic_sets",
    "sent_sar",
    "Eccentricity",
    "MatrixDegree",
    "KernelLanguageEntropy",
    "normalized_laplacian",
    "laplacian_spectrum",
    "eccentricity",
    "matrix_degree",
    "kernel_language_entropy",
    "SelfDetection",
    "CrossExamination",
    "MultiLlmCollab",
]
