"""Answer extraction from raw completions.

Grammar, applied in priority order (case-insensitive throughout):

1. the first standalone token that is a single letter within ``A..letter(n)``,
   after stripping surrounding wrapper characters ``( ) * . : ; , " '``;
2. the pattern ``answer is X`` (optional colon/dash and wrappers around X);
   a letter at this site beyond the option count makes the reply unparseable;
3. an exact full-text match of one option string.

Anything else is Unparsed, which scoring counts as incorrect.
"""

from __future__ import annotations

import re

from .prompting import LETTERS

_WRAPPERS = "()*.:;,\"'"
_ANSWER_IS_RE = re.compile(
    r"answer\s+is\s*[:\-]?\s*[(\*\"']*([A-Za-z])(?![A-Za-z])", re.IGNORECASE
)

UNPARSED = None


def parse_answer(raw_text: str, n_options: int, options: list[str] | None = None) -> int | None:
    if not 2 <= n_options <= 20:
        raise ValueError(f"n_options must be in [2, 20], got {n_options}")
    allowed = LETTERS[:n_options]

    for token in raw_text.split():
        stripped = token.strip(_WRAPPERS)
        if len(stripped) == 1 and stripped.upper() in allowed:
            return allowed.index(stripped.upper())

    match = _ANSWER_IS_RE.search(raw_text)
    if match:
        letter = match.group(1).upper()
        if letter in allowed:
            return allowed.index(letter)
        if letter in LETTERS:
            return UNPARSED

    if options:
        flat = raw_text.strip().strip("\"'").casefold()
        for index, option in enumerate(options):
            if flat == option.casefold():
                return index

    return UNPARSED
