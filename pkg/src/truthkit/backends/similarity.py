"""Similarity providers. The lexical default is a unigram cosine over token multisets."""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from collections import Counter

from .. import textnorm


class SimilarityProvider(ABC):
    @abstractmethod
    def similarity(self, a: str, b: str) -> float:
        """Symmetric similarity in [0, 1]; 1 for identical non-empty strings."""


class UnigramCosineSimilarity(SimilarityProvider):
    def similarity(self, a: str, b: str) -> float:
        ca = Counter(textnorm.simple_tokens(a))
        cb = Counter(textnorm.simple_tokens(b))
        if not ca or not cb:
            return 0.0
        dot = sum(ca[w] * cb[w] for w in ca.keys() & cb.keys())
        if dot == 0:
            return 0.0
        # sqrt of the product keeps identical inputs at exactly 1.0
        norm = math.sqrt(
            sum(v * v for v in ca.values()) * sum(v * v for v in cb.values())
        )
        return min(dot / norm, 1.0)


class ConstantSimilarity(SimilarityProvider):
    """Every pair gets the same similarity; useful for reduction checks."""

    def __init__(self, value: float):
        if not 0.0 <= value <= 1.0:
            raise ValueError("similarity value must lie in [0, 1]")
        self.value = value

    def similarity(self, a: str, b: str) -> float:
        return self.value
