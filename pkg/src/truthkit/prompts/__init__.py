"""Versioned prompt texts.

Prompts are part of a method's definition, so they ship as plain files and a
hash over all of them lands in every report's metadata for auditability.
"""

from __future__ import annotations

import hashlib
from functools import lru_cache
from importlib import resources


@lru_cache(maxsize=None)
def prompt_text(name: str) -> str:
    return resources.files(__name__).joinpath(f"{name}.txt").read_text(encoding="utf-8").rstrip("\n")


def render(name: str, **fields) -> str:
    return prompt_text(name).format(**fields)


@lru_cache(maxsize=1)
def prompts_hash() -> str:
    """Digest over all prompt files, stable across runs of the same build."""
    digest = hashlib.sha256()
    root = resources.files(__name__)
    names = sorted(
        entry.name for entry in root.iterdir() if entry.name.endswith(".txt")
    )
    for name in names:
        digest.update(name.encode("utf-8"))
        digest.update(b"\x00")
        digest.update(root.joinpath(name).read_bytes())
    return digest.hexdigest()
