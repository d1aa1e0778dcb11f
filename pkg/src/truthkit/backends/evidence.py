"""Evidence providers for claim-level checks.

Only the fixture-backed implementation ships; search-backed providers plug in
behind the same interface.
"""

from __future__ import annotations

import json
from abc import ABC, abstractmethod
from pathlib import Path

from ..errors import DatasetError
from ..textnorm import claim_hash


class EvidenceProvider(ABC):
    @abstractmethod
    def fetch_evidence(self, claim: str) -> list[str]:
        """Evidence passages for *claim*; empty list when nothing is known."""

    def _check_claim(self, claim: str) -> None:
        if not claim:
            raise ValueError("claim must be non-empty")


class FixtureEvidence(EvidenceProvider):
    """Scripted passages keyed by the hash of the normalized claim text."""

    def __init__(self, passages_by_hash: dict[str, list[str]]):
        self._by_hash = dict(passages_by_hash)

    @staticmethod
    def from_claims(claims_to_passages: dict[str, list[str]]) -> "FixtureEvidence":
        return FixtureEvidence({claim_hash(c): p for c, p in claims_to_passages.items()})

    @staticmethod
    def load(path: str | Path) -> "FixtureEvidence":
        """Load a JSON fixture: {"claims": [{"claim": str, "passages": [str, ...]}]}."""
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise DatasetError(f"cannot load evidence fixture {path}: {exc}") from exc
        try:
            entries = data["claims"]
            mapping = {e["claim"]: list(e["passages"]) for e in entries}
        except (KeyError, TypeError) as exc:
            raise DatasetError(f"evidence fixture {path} has the wrong shape") from exc
        return FixtureEvidence.from_claims(mapping)

    def fetch_evidence(self, claim: str) -> list[str]:
        self._check_claim(claim)
        return list(self._by_hash.get(claim_hash(claim), []))
