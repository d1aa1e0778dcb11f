"""Parsing of structured model replies."""

from __future__ import annotations

import json


def parse_string_array(text: str) -> list[str] | None:
    """Parse a strict JSON array of strings; None when the reply is anything else.

    Surrounding whitespace and markdown code fences are tolerated, nothing more.
    """
    stripped = text.strip()
    if stripped.startswith("```"):
        lines = stripped.splitlines()
        if lines and lines[0].startswith("```"):
            lines = lines[1:]
        if lines and lines[-1].strip() == "```":
            lines = lines[:-1]
        stripped = "\n".join(lines).strip()
    try:
        data = json.loads(stripped)
    except json.JSONDecodeError:
        return None
    if not isinstance(data, list) or not all(isinstance(x, str) for x in data):
        return None
    return data
