"""Trigram language models with Witten-Bell smoothing, linear interpolation,
perplexity, and n-best rescoring."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Optional, Sequence, Union

from .errors import ValidationError
from .rover import Hypothesis, ScoredToken
from .tokens import Corpus, LanguageTag, Token, Utterance

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"

# Words are Token instances; BOS/EOS/UNK are plain string sentinels.
Symbol = Union[Token, str]

DEFAULT_UNK_PROB = 1e-6


class TrigramLM:
    """Witten-Bell interpolated trigram model.

    Counts are collected over utterances padded with two start symbols and
    one end symbol. The unigram level is maximum likelihood over tokens and
    the end symbol, with unk_prob mass reserved for unknown words; unseen
    words (in queries or histories) are mapped to the unknown symbol.
    """

    def __init__(
        self,
        name: str,
        unigram_counts: dict[Symbol, int],
        followers: dict[tuple, dict[Symbol, int]],
        unk_prob: float = DEFAULT_UNK_PROB,
    ):
        if not unigram_counts:
            raise ValidationError("language model has no events")
        if not 0.0 < unk_prob < 1.0:
            raise ValidationError(f"unk_prob must be in (0,1): {unk_prob!r}")
        self.name = name
        self.unk_prob = unk_prob
        self._uni = dict(unigram_counts)
        self._followers = {h: dict(f) for h, f in followers.items()}
        self._totals = {h: sum(f.values()) for h, f in self._followers.items()}
        self._n_events = sum(self._uni.values())
        self._cache: dict = {}
        self.vocab = frozenset(w for w in self._uni if isinstance(w, Token))

    def _canon(self, w: Symbol) -> Symbol:
        if w == BOS or w == EOS or w == UNK:
            return w
        return w if w in self._uni else UNK

    def prob(self, word: Symbol, history: Sequence[Symbol]) -> float:
        """Smoothed P(word | history); history is the up-to-2 preceding symbols."""
        h = tuple(self._canon(x) for x in history[-2:])
        key = (self._canon(word), h)
        cached = self._cache.get(key)
        if cached is None:
            cached = self._cache[key] = self._prob(*key)
        return cached

    def _prob(self, w: Symbol, h: tuple) -> float:
        if h:
            total = self._totals.get(h, 0)
            if total == 0:
                return self._prob(w, h[1:])
            followers = self._followers[h]
            t = len(followers)
            return (followers.get(w, 0) + t * self._prob(w, h[1:])) / (total + t)
        if w == UNK:
            return self.unk_prob
        count = self._uni.get(w, 0)
        return (1.0 - self.unk_prob) * count / self._n_events


def train_trigram(corpus: Corpus, unk_prob: float = DEFAULT_UNK_PROB) -> TrigramLM:
    """Count padded n-grams over a corpus and build a smoothed trigram LM."""
    if len(corpus) == 0:
        raise ValidationError(f"cannot train on empty corpus {corpus.name!r}")
    uni: dict[Symbol, int] = {}
    followers: dict[tuple, dict[Symbol, int]] = {}
    for utt in corpus:
        h1: Symbol = BOS
        h2: Symbol = BOS
        for w in list(utt.tokens) + [EOS]:
            uni[w] = uni.get(w, 0) + 1
            for hist in ((h2,), (h1, h2)):
                fol = followers.setdefault(hist, {})
                fol[w] = fol.get(w, 0) + 1
            h1, h2 = h2, w
    return TrigramLM(corpus.name, uni, followers, unk_prob)


class InterpolatedLM:
    """Linear mixture of trigram models: P(w|h) = sum_i weight_i * P_i(w|h)."""

    def __init__(self, components: Sequence[TrigramLM], weights: Sequence[float]):
        if not components:
            raise ValidationError("interpolation needs at least one component")
        if len(components) != len(weights):
            raise ValidationError(
                f"{len(components)} components but {len(weights)} weights"
            )
        for w in weights:
            if w < 0:
                raise ValidationError(f"negative interpolation weight: {w!r}")
        total = float(sum(weights))
        if abs(total - 1.0) > 1e-9:
            raise ValidationError(f"weights must sum to 1 (got {total!r})")
        self.components = tuple(components)
        self.weights = tuple(w / total for w in weights)
        self._cache: dict = {}
        self.vocab = frozenset().union(*(c.vocab for c in self.components))

    @property
    def component_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.components)

    def prob(self, word: Symbol, history: Sequence[Symbol]) -> float:
        key = (word, tuple(history[-2:]))
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        p = 0.0
        for lam, component in zip(self.weights, self.components):
            if lam:
                p += lam * component.prob(word, history)
        self._cache[key] = p
        return p


AnyLM = Union[TrigramLM, InterpolatedLM]


def interpolate(lms: Sequence[TrigramLM], weights: Optional[Sequence[float]] = None) -> InterpolatedLM:
    """Mix trigram LMs; omitted weights default to uniform 1/N."""
    if not lms:
        raise ValidationError("interpolate needs at least one model")
    if weights is None:
        weights = [1.0 / len(lms)] * len(lms)
    return InterpolatedLM(lms, weights)


def sequence_logprob(lm: AnyLM, utt: Union[Utterance, Sequence[Token]]) -> float:
    """Natural-log probability of a token sequence, end symbol included."""
    tokens = getattr(utt, "tokens", utt)
    h1: Symbol = BOS
    h2: Symbol = BOS
    logprob = 0.0
    for w in list(tokens) + [EOS]:
        logprob += math.log(lm.prob(w, (h1, h2)))
        h1, h2 = h2, w
    return logprob


def perplexity(lm: AnyLM, corpus: Corpus) -> float:
    """exp(-logprob / predicted events); each utterance predicts len+1 events."""
    total_logprob = 0.0
    events = 0
    for utt in corpus:
        total_logprob += sequence_logprob(lm, utt)
        events += len(utt.tokens) + 1
    if events == 0:
        raise ValidationError("perplexity of an empty corpus is undefined")
    return math.exp(-total_logprob / events)


class NBestEntry(NamedTuple):
    tokens: tuple[Token, ...]
    acoustic_score: float


@dataclass(frozen=True)
class NBestList:
    """Alternative hypotheses for one utterance; entries need not be sorted."""

    utt_id: str
    entries: tuple[NBestEntry, ...]

    def __post_init__(self):
        if not self.entries:
            raise ValidationError(f"empty n-best list for {self.utt_id!r}")


def decode_nbest(nbest: NBestList, lm: AnyLM, lm_scale: float) -> Hypothesis:
    """Pick the entry maximizing acoustic_score + lm_scale * logprob.

    Ties go to the earliest entry. Every emitted token carries the same
    confidence: the softmax weight of the winning entry's total score over
    all entries.
    """
    if lm_scale < 0:
        raise ValidationError(f"lm_scale must be non-negative: {lm_scale!r}")
    totals = []
    for entry in nbest.entries:
        total = entry.acoustic_score
        if lm_scale:
            total += lm_scale * sequence_logprob(lm, entry.tokens)
        totals.append(total)
    best_idx = 0
    for idx, total in enumerate(totals):
        if total > totals[best_idx]:
            best_idx = idx
    peak = max(totals)
    weight = math.exp(totals[best_idx] - peak) / sum(math.exp(t - peak) for t in totals)
    confidence = min(1.0, weight)
    winner = nbest.entries[best_idx]
    return Hypothesis(
        nbest.utt_id, tuple(ScoredToken(tok, confidence) for tok in winner.tokens)
    )


# --- plain-text persistence ---------------------------------------------

_FORMAT_HEADER = "# csrover ngram counts v1"


def _symbol_str(sym: Symbol) -> str:
    return sym if isinstance(sym, str) else f"{sym.surface}/{sym.lang.value}"


def _parse_symbol(text: str) -> Symbol:
    if text in (BOS, EOS, UNK):
        return text
    surface, _, lang = text.rpartition("/")
    if not surface:
        raise ValidationError(f"malformed LM symbol: {text!r}")
    return Token(surface, LanguageTag(lang))


def save_lm(lm: TrigramLM, path: Union[str, Path]) -> None:
    """Write the model as a sorted n-gram/count listing with a header."""
    lines = [
        _FORMAT_HEADER,
        "# smoothing witten-bell",
        f"# unk_prob {lm.unk_prob!r}",
        f"# name {lm.name}",
        "# order 3",
    ]
    grams: list[tuple[int, str, int]] = []
    for w, count in lm._uni.items():
        grams.append((1, _symbol_str(w), count))
    for hist, followers in lm._followers.items():
        order = len(hist) + 1
        prefix = " ".join(_symbol_str(s) for s in hist)
        for w, count in followers.items():
            grams.append((order, f"{prefix} {_symbol_str(w)}", count))
    grams.sort()
    lines.extend(f"{order}\t{text}\t{count}" for order, text, count in grams)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_lm(path: Union[str, Path]) -> TrigramLM:
    """Rebuild a trigram LM from its saved count listing."""
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != _FORMAT_HEADER:
        raise ValidationError(f"{path}: not a csrover LM file")
    unk_prob = DEFAULT_UNK_PROB
    name = path.stem
    uni: dict[Symbol, int] = {}
    followers: dict[tuple, dict[Symbol, int]] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        if line.startswith("#"):
            fields = line[1:].split(None, 1)
            if fields and fields[0] == "unk_prob":
                unk_prob = float(fields[1])
            elif fields and fields[0] == "name":
                name = fields[1].strip()
            continue
        try:
            order_str, text, count_str = line.split("\t")
            symbols = [_parse_symbol(s) for s in text.split(" ")]
            order, count = int(order_str), int(count_str)
        except (ValueError, ValidationError) as exc:
            raise ValidationError(f"{path}:{lineno}: bad n-gram line ({exc})") from exc
        if order != len(symbols):
            raise ValidationError(f"{path}:{lineno}: order {order} != {len(symbols)} symbols")
        if order == 1:
            uni[symbols[0]] = count
        else:
            hist = tuple(symbols[:-1])
            followers.setdefault(hist, {})[symbols[-1]] = count
    return TrigramLM(name, uni, followers, unk_prob)
