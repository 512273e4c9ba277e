"""Core data model: language-tagged tokens, utterances, corpora, and the
mixed Mandarin/English tokenizer."""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field
from enum import Enum

from .errors import TokenizeError, ValidationError

# CJK Unified Ideographs: main block, Extension A, and the supplementary
# extensions (B and onward).
_CJK_RANGES = (
    (0x4E00, 0x9FFF),
    (0x3400, 0x4DBF),
    (0x20000, 0x2EBEF),
    (0x30000, 0x3134A),
)

_ENG_SURFACE_RE = re.compile(r"^[a-z0-9'-]+$")
_HAS_ALNUM_RE = re.compile(r"[a-z0-9]")


def is_cjk(char: str) -> bool:
    """True if the single character is a CJK unified ideograph."""
    cp = ord(char)
    return any(lo <= cp <= hi for lo, hi in _CJK_RANGES)


class LanguageTag(Enum):
    ENG = "eng"
    MAN = "man"

    def other(self) -> "LanguageTag":
        return LanguageTag.MAN if self is LanguageTag.ENG else LanguageTag.ENG


@dataclass(frozen=True, slots=True)
class Token:
    """One scoring unit: a Mandarin character or an English word.

    Mandarin surfaces are exactly one CJK ideograph; English surfaces are
    lowercase runs of ASCII letters/digits with internal apostrophes or
    hyphens allowed.
    """

    surface: str
    lang: LanguageTag

    def __post_init__(self):
        if self.lang is LanguageTag.MAN:
            if len(self.surface) != 1 or not is_cjk(self.surface):
                raise ValidationError(
                    f"Mandarin token must be a single CJK ideograph: {self.surface!r}"
                )
        else:
            if not _ENG_SURFACE_RE.match(self.surface) or not _HAS_ALNUM_RE.search(
                self.surface
            ):
                raise ValidationError(
                    f"English token must be a lowercase Latin/digit run: {self.surface!r}"
                )

    def __str__(self) -> str:
        return f"{self.surface}/{self.lang.value}"


class UtteranceCategory(Enum):
    ENG_ONLY = "eng_only"
    MAN_ONLY = "man_only"
    CODE_SWITCHED = "code_switched"
    EMPTY = "empty"


@dataclass(frozen=True, slots=True)
class Utterance:
    """An ordered token sequence under a unique id.

    An empty token list is allowed (held-out placeholder).
    """

    id: str
    tokens: tuple[Token, ...]

    def __post_init__(self):
        if not self.id or any(c.isspace() for c in self.id):
            raise ValidationError(f"utterance id must be non-empty, no whitespace: {self.id!r}")
        object.__setattr__(self, "tokens", tuple(self.tokens))


@dataclass(frozen=True)
class Corpus:
    """A named, ordered collection of utterances with unique ids."""

    name: str
    utterances: tuple[Utterance, ...]
    _by_id: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "utterances", tuple(self.utterances))
        by_id = {}
        for utt in self.utterances:
            if utt.id in by_id:
                raise ValidationError(f"duplicate utterance id {utt.id!r} in corpus {self.name!r}")
            by_id[utt.id] = utt
        object.__setattr__(self, "_by_id", by_id)

    def __len__(self) -> int:
        return len(self.utterances)

    def __iter__(self):
        return iter(self.utterances)

    def __getitem__(self, utt_id: str) -> Utterance:
        return self._by_id[utt_id]

    def __contains__(self, utt_id: str) -> bool:
        return utt_id in self._by_id

    def ids(self) -> list[str]:
        return [u.id for u in self.utterances]


def tokenize_mixed(raw: str) -> list[Token]:
    """Tokenize mixed Mandarin/English text.

    Each CJK ideograph becomes one Mandarin token; each maximal ASCII
    letter/digit run (with internal apostrophes/hyphens) becomes one
    lowercased English token. Punctuation and symbols are dropped;
    whitespace separates runs. Any other code point (unsupported script)
    raises TokenizeError with its position.
    """
    tokens: list[Token] = []
    run: list[str] = []

    def flush():
        if run:
            tokens.append(Token("".join(run).lower(), LanguageTag.ENG))
            run.clear()

    for pos, char in enumerate(raw):
        if char.isascii() and char.isalnum():
            run.append(char)
        elif char in "'-" and run:
            run.append(char)
        elif is_cjk(char):
            flush()
            tokens.append(Token(char, LanguageTag.MAN))
        elif char.isspace():
            flush()
        elif unicodedata.category(char)[0] in ("P", "S"):
            flush()
        else:
            raise TokenizeError("unsupported script", pos, char)
    flush()
    return tokens


def render_tokens(tokens) -> str:
    """Render tokens back to text: English words space-joined, Mandarin
    characters joined without spaces, a single space at language changes."""
    parts: list[str] = []
    prev: Token | None = None
    for tok in tokens:
        if prev is not None and not (
            prev.lang is LanguageTag.MAN and tok.lang is LanguageTag.MAN
        ):
            parts.append(" ")
        parts.append(tok.surface)
        prev = tok
    return "".join(parts)


def categorize_utterance(utt: Utterance) -> UtteranceCategory:
    """Classify an utterance by the languages it contains."""
    langs = {tok.lang for tok in utt.tokens}
    if not langs:
        return UtteranceCategory.EMPTY
    if langs == {LanguageTag.ENG}:
        return UtteranceCategory.ENG_ONLY
    if langs == {LanguageTag.MAN}:
        return UtteranceCategory.MAN_ONLY
    return UtteranceCategory.CODE_SWITCHED


def monolingual_runs(tokens) -> list[list[Token]]:
    """Partition a token sequence into maximal same-language runs."""
    runs: list[list[Token]] = []
    for tok in tokens:
        if runs and runs[-1][-1].lang is tok.lang:
            runs[-1].append(tok)
        else:
            runs.append([tok])
    return runs


def split_at_language_boundaries(utt: Utterance, min_tokens: int = 2) -> list[Utterance]:
    """Split an utterance into monolingual pieces at language boundaries.

    Pieces are named "<parent-id>#<k>". If any piece has fewer than
    min_tokens tokens, nothing is retained and the empty list is returned.
    """
    if min_tokens < 1:
        raise ValidationError(f"min_tokens must be >= 1, got {min_tokens}")
    runs = monolingual_runs(utt.tokens)
    if not runs or any(len(run) < min_tokens for run in runs):
        return []
    return [Utterance(f"{utt.id}#{k}", tuple(run)) for k, run in enumerate(runs)]
