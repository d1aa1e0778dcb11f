"""Text normalization shared by correctness checks, lexical providers, and fixtures.

All lexical semantics in the toolkit (exact match, unigram overlap, the
lexical entailment fallback, claim hashing) go through the same pipeline:
lowercase, strip punctuation, drop articles, collapse whitespace.
"""

import hashlib
import re
import string

_PUNCT_TABLE = str.maketrans({c: " " for c in string.punctuation})
_ARTICLES = frozenset({"a", "an", "the"})


def normalize(text: str) -> str:
    """Lowercase, strip punctuation and articles, collapse whitespace."""
    lowered = text.lower().translate(_PUNCT_TABLE)
    kept = [tok for tok in lowered.split() if tok not in _ARTICLES]
    return " ".join(kept)


def tokens(text: str) -> list[str]:
    """Normalized unigram tokens of *text* (possibly empty)."""
    norm = normalize(text)
    return norm.split() if norm else []


def simple_tokens(text: str) -> list[str]:
    """Lowercased, punctuation-stripped tokens with articles kept.

    Similarity scoring keeps articles: every surface token carries weight there,
    unlike correctness matching.
    """
    return text.lower().translate(_PUNCT_TABLE).split()


def first_integer(text: str) -> int | None:
    """First integer occurring in *text*, or None."""
    match = re.search(r"-?\d+", text)
    return int(match.group()) if match else None


def claim_hash(claim: str) -> str:
    """Stable hex digest of the normalized claim text, used to key label fixtures."""
    return hashlib.sha256(normalize(claim).encode("utf-8")).hexdigest()
