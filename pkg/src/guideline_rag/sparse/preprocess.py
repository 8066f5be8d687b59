"""Query and chunk text preprocessing for keyword retrieval.

Lowercase, split on non-alphanumerics, drop stop words, then apply a small
set of deterministic suffix rules. The rules are intentionally shallow; what
matters for retrieval is that queries and chunks are reduced the same way,
and the outputs are frozen as golden fixtures in the test suite.
"""

from __future__ import annotations

import re
from collections.abc import Callable, Collection

_WORD_RE = re.compile(r"[a-z0-9]+")

STOP_WORDS = frozenset(
    """
    a about above after again against all am an and any are as at be because
    been before being below between both but by can did do does doing down
    during each few for from further had has have having he her here hers
    herself him himself his how i if in into is it its itself just me more
    most my myself no nor not now of off on once only or other our ours
    ourselves out over own same she should so some such than that the their
    theirs them themselves then there these they this those through to too
    under until up very was we were what when where which while who whom why
    will with you your yours yourself yourselves
    """.split()
)

# Words the suffix rules would mangle, plus a few true irregular plurals.
_IRREGULAR = {
    "analyses": "analysis",
    "children": "child",
    "criteria": "criterion",
    "diabetes": "diabetes",
    "diagnoses": "diagnosis",
    "feet": "foot",
    "measles": "measles",
    "men": "man",
    "mice": "mouse",
    "rabies": "rabies",
    "scabies": "scabies",
    "series": "series",
    "species": "species",
    "teeth": "tooth",
    "women": "woman",
}

_VOWELS = set("aeiou")


def _strip_plural(token: str) -> str:
    if token.endswith("ies") and len(token) > 4:
        return token[:-3] + "y"
    if token.endswith(("sses", "xes", "zes", "ches", "shes")):
        return token[:-2]
    if token.endswith("s") and not token.endswith(("ss", "us", "is")) and len(token) > 3:
        return token[:-1]
    return token


def _strip_verbal(token: str) -> str:
    if token.endswith("ing") and len(token) >= 6:
        stem = token[:-3]
    elif token.endswith("ed") and len(token) >= 5:
        stem = token[:-2]
    else:
        return token
    if not _VOWELS & set(stem):
        return token
    if len(stem) >= 2 and stem[-1] == stem[-2] and stem[-1] not in "aeioulsz":
        stem = stem[:-1]
    return stem


def lemmatize(token: str) -> str:
    """Reduce one lowercase token to a base form via ordered suffix rules."""
    if token in _IRREGULAR:
        return _IRREGULAR[token]
    return _strip_verbal(_strip_plural(token))


def preprocess(
    text: str,
    stop_words: Collection[str] = STOP_WORDS,
    lemmatizer: Callable[[str], str] = lemmatize,
) -> list[str]:
    """Turn raw text into the term list BM25 statistics are computed over."""
    return [
        lemmatizer(word)
        for word in _WORD_RE.findall(text.lower())
        if word not in stop_words
    ]
