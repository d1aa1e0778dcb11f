"""Method registry: construct truth methods by id from CLI and config files."""

from __future__ import annotations

from typing import Callable

from .errors import RegistryError
from .methods.base import TruthMethod


class MethodRegistry:
    def __init__(self):
        self._factories: dict[str, Callable[..., TruthMethod]] = {}

    def register(self, method_id: str, factory: Callable[..., TruthMethod]) -> "MethodRegistry":
        if method_id in self._factories:
            raise RegistryError(f"method id {method_id!r} is already registered")
        self._factories[method_id] = factory
        return self

    def factory(self, method_id: str) -> Callable[..., TruthMethod]:
        try:
            return self._factories[method_id]
        except KeyError:
            raise RegistryError(
                f"unknown method id {method_id!r}; known: {', '.join(self.available())}"
            ) from None

    def create(self, method_id: str, **params) -> TruthMethod:
        return self.factory(method_id)(**params)

    def available(self) -> list[str]:
        return sorted(self._factories)

    def __contains__(self, method_id: str) -> bool:
        return method_id in self._factories


DEFAULT_REGISTRY = MethodRegistry()


def register_method(method_id: str, factory: Callable[..., TruthMethod]) -> MethodRegistry:
    return DEFAULT_REGISTRY.register(method_id, factory)


def create_method(method_id: str, **params) -> TruthMethod:
    return DEFAULT_REGISTRY.create(method_id, **params)


def _register_builtins() -> None:
    from .methods.collab import CrossExamination, MultiLlmCollab, SelfDetection
    from .methods.semantic import NumSemanticSets, SemanticEntropy, SentSar
    from .methods.single import Confidence, DocumentCheck, PTrue, TokenSar, VerbalizedConfidence
    from .methods.spectral import Eccentricity, KernelLanguageEntropy, MatrixDegree

    for cls in (
        Confidence,
        PTrue,
        VerbalizedConfidence,
        TokenSar,
        DocumentCheck,
        SemanticEntropy,
        NumSemanticSets,
        SentSar,
        Eccentricity,
        MatrixDegree,
        KernelLanguageEntropy,
        SelfDetection,
        CrossExamination,
        MultiLlmCollab,
    ):
        DEFAULT_REGISTRY.register(cls.method_id, cls)


_register_builtins()
