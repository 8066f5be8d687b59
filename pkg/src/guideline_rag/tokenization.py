"""Pluggable tokenizers used for chunk sizing.

The default build ships a deterministic local tokenizer (words and single
punctuation marks) so the whole pipeline runs offline and reproducibly.
A remote HTTP tokenizer can be registered for parity with hosted embedding
models whose tokenizers are proprietary.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Protocol

from .errors import UnknownTokenizer

REFERENCE_TOKENIZER_ID = "reference"

_TOKEN_RE = re.compile(r"\w+|[^\w\s]")


@dataclass(frozen=True)
class Token:
    text: str
    start: int  # char offset, inclusive
    end: int  # char offset, exclusive


class Tokenizer(Protocol):
    tokenizer_id: str

    def encode(self, text: str) -> list[Token]: ...

    def count(self, text: str) -> int: ...


class ReferenceTokenizer:
    """Deterministic word/punctuation tokenizer with character spans."""

    tokenizer_id = REFERENCE_TOKENIZER_ID

    def encode(self, text: str) -> list[Token]:
        return [Token(m.group(), m.start(), m.end()) for m in _TOKEN_RE.finditer(text)]

    def count(self, text: str) -> int:
        return sum(1 for _ in _TOKEN_RE.finditer(text))


class HttpTokenizer:
    """Counts tokens via a remote tokenize endpoint.

    Expects a JSON API taking ``{"model": ..., "texts": [...]}`` and returning
    ``{"tokens": [[...], ...]}``. Character spans are reconstructed by greedy
    left-to-right matching, so overlap arithmetic stays usable even though the
    token strings come from a remote vocabulary.
    """

    def __init__(self, tokenizer_id: str, url: str, model: str, client=None):
        import httpx

        self.tokenizer_id = tokenizer_id
        self.url = url
        self.model = model
        self._client = client or httpx.Client(timeout=30.0)

    def encode(self, text: str) -> list[Token]:
        resp = self._client.post(self.url, json={"model": self.model, "texts": [text]})
        resp.raise_for_status()
        pieces: list[str] = resp.json()["tokens"][0]
        tokens: list[Token] = []
        cursor = 0
        for piece in pieces:
            probe = piece.strip()
            if not probe:
                continue
            found = text.find(probe, cursor)
            if found < 0:
                found = cursor
            tokens.append(Token(probe, found, found + len(probe)))
            cursor = found + len(probe)
        return tokens

    def count(self, text: str) -> int:
        return len(self.encode(text))


_REGISTRY: dict[str, Callable[[], Tokenizer]] = {
    REFERENCE_TOKENIZER_ID: ReferenceTokenizer,
}


def register_tokenizer(tokenizer_id: str, factory: Callable[[], Tokenizer]) -> None:
    _REGISTRY[tokenizer_id] = factory


def get_tokenizer(tokenizer_id: str) -> Tokenizer:
    try:
        factory = _REGISTRY[tokenizer_id]
    except KeyError:
        raise UnknownTokenizer(tokenizer_id) from None
    return factory()


def count_tokens(text: str, tokenizer_id: str = REFERENCE_TOKENIZER_ID) -> int:
    """Token count of ``text`` under the named tokenizer."""
    return get_tokenizer(tokenizer_id).count(text)
