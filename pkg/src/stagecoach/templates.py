"""Prompt template loading and slot substitution.

Templates are plain text files shipped as package data. Slots use the
literal brace style of the published prompts (e.g. "{linker name}") and are
filled in a single pass so substituted values can never be re-expanded.
"""

from __future__ import annotations

import re
from functools import lru_cache
from importlib import resources
from typing import Mapping

_SLOT = re.compile(r"\{([a-z0-9 ]+)\}")

_WORDS = (
    "zero one two three four five six seven eight nine ten eleven twelve "
    "thirteen fourteen fifteen sixteen seventeen eighteen nineteen twenty"
).split()


def data_path(*parts: str):
    """Traversable pointing into the packaged data directory."""
    root = resources.files("stagecoach").joinpath("data")
    for p in parts:
        root = root.joinpath(p)
    return root


@lru_cache(maxsize=None)
def load_template(name: str) -> str:
    return data_path("templates", f"{name}.txt").read_text(encoding="utf-8")


def substitute(template: str, values: Mapping[str, str]) -> str:
    """Replace every known {slot} in one pass; unknown slots are left
    untouched so structural markers survive for the caller to inspect."""

    def repl(m: re.Match[str]) -> str:
        key = m.group(1)
        return values[key] if key in values else m.group(0)

    return _SLOT.sub(repl, template)


def count_word(n: int) -> str:
    """Spell small stage counts the way the canonical prompts do."""
    if 0 <= n < len(_WORDS):
        return _WORDS[n]
    return str(n)
