"""Text rules shared across phases: sentence counting and sentinel detection.

Both rules are deliberately dumb and deterministic; they are contracts, not
NLP. The sentence counter exists to lint prompt-length limits, and the
sentinel detector decides stage advancement, so neither may ever depend on
model output quirks or locale.
"""

from __future__ import annotations

import re

# The exact operator declaration that triggers a stage advance.
SENTINEL_PHRASE = "I'm ready to move to the next stage"

# Placeholder rendered into prompt input fields on a campaign's first turn,
# where no history exists yet.
EMPTY_MARKER = "(none — first iteration)"

_TERMINATORS = ".!?"

_APOSTROPHES = str.maketrans({"’": "'", "‘": "'", "ʼ": "'"})
_WS_RUN = re.compile(r"\s+")


def count_sentences(text: str) -> int:
    """Count sentences: split on '.', '!' or '?' followed by whitespace or
    end of text. A period squeezed between two digits (a decimal point such
    as "8.5 ppm") is never a boundary. A trailing fragment without a
    terminator still counts as a sentence.
    """
    if not text.strip():
        return 0
    count = 0
    buf_has_content = False
    n = len(text)
    for i, ch in enumerate(text):
        if not ch.isspace():
            buf_has_content = True
        if ch in _TERMINATORS:
            nxt = text[i + 1] if i + 1 < n else ""
            prev = text[i - 1] if i > 0 else ""
            is_decimal = ch == "." and prev.isdigit() and nxt.isdigit()
            if (nxt == "" or nxt.isspace()) and not is_decimal:
                if buf_has_content:
                    count += 1
                buf_has_content = False
    if buf_has_content:
        count += 1
    return count


def normalize_for_sentinel(text: str) -> str:
    """Case-fold, ASCII-fy apostrophes, collapse whitespace runs, and strip
    terminal punctuation."""
    t = text.translate(_APOSTROPHES).casefold()
    t = _WS_RUN.sub(" ", t).strip()
    return t.rstrip(".!?,;: ")


_SENTINEL_NORMALIZED = normalize_for_sentinel(SENTINEL_PHRASE)


def detect_sentinel(feedback_text: str) -> bool:
    """True iff the normalized feedback contains the normalized sentinel
    phrase."""
    return _SENTINEL_NORMALIZED in normalize_for_sentinel(feedback_text)


_DASHES = str.maketrans({"–": "-", "—": "-", "‐": "-", "−": "-"})


def normalize_dashes(text: str) -> str:
    """Map typographic dash variants to ASCII hyphen (opt-in for cursor
    parsing)."""
    return text.translate(_DASHES)
