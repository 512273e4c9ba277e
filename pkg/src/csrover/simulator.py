"""Seeded generative model of domain-mismatched transcription systems.

Given reference transcripts and per-language match levels, corrupts tokens
with a bias toward the better-matched language (cross-language
substitution), attaches confidences, and produces n-best alternatives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Optional

import numpy as np

from .errors import ValidationError
from .lm import NBestEntry, NBestList
from .rover import Hypothesis, ScoredToken, SystemOutput
from .tokens import Corpus, LanguageTag, Token, Utterance


@dataclass(frozen=True)
class SystemProfile:
    """Knobs of one simulated system.

    match_* abstract how well each language's training data matches the
    target domain; kappa scales the propensity to substitute into the
    better-matched language, delta the deletion share of the error mass,
    ins_rate the per-gap insertion probability.
    """

    name: str
    match_eng: float
    match_man: float
    seed: int
    kappa: float = 0.8
    delta: float = 0.15
    ins_rate: float = 0.03
    nbest_size: int = 4

    def __post_init__(self):
        for field_name in ("match_eng", "match_man", "kappa", "delta", "ins_rate"):
            value = getattr(self, field_name)
            if not 0.0 <= value <= 1.0:
                raise ValidationError(f"profile {self.name!r}: {field_name}={value!r} not in [0,1]")
        if not 0 <= self.seed < 2**64:
            raise ValidationError(f"profile {self.name!r}: seed must be a 64-bit unsigned int")
        if self.nbest_size < 1:
            raise ValidationError(f"profile {self.name!r}: nbest_size must be >= 1")


class Event(Enum):
    CORRECT = "correct"
    CROSS_SUB = "cross_sub"
    SAME_SUB = "same_sub"
    DELETE = "delete"


@dataclass(frozen=True)
class EventProbs:
    p_correct: float
    p_cross_sub: float
    p_same_sub: float
    p_del: float

    def __post_init__(self):
        for value in (self.p_correct, self.p_cross_sub, self.p_same_sub, self.p_del):
            if value < 0:
                raise ValidationError(f"negative event probability: {value!r}")
        total = self.p_correct + self.p_cross_sub + self.p_same_sub + self.p_del
        if abs(total - 1.0) > 1e-12:
            raise ValidationError(f"event probabilities sum to {total!r}, not 1")


def derive_event_probs(profile: SystemProfile, lang: LanguageTag) -> EventProbs:
    """Per-token event distribution for reference tokens of one language.

    Correctness equals the own-language match; the residual splits into
    cross-language substitution (growing with the other language's match),
    deletion, and same-language substitution. If the same-substitution
    share would go negative, cross and deletion are rescaled to fill the
    residual exactly.
    """
    m_own = profile.match_eng if lang is LanguageTag.ENG else profile.match_man
    m_other = profile.match_man if lang is LanguageTag.ENG else profile.match_eng
    residual = 1.0 - m_own
    ratio = m_other / (m_own + m_other) if m_own + m_other > 0 else 0.5
    p_cross = residual * profile.kappa * ratio
    p_del = residual * profile.delta
    p_same = residual - p_cross - p_del
    if p_same < 0:
        p_cross = residual * p_cross / (p_cross + p_del)
        p_del = residual - p_cross
        p_same = 0.0
    return EventProbs(m_own, p_cross, p_same, p_del)


@dataclass(frozen=True)
class VocabPools:
    """Surrogate token pools used for substitution and insertion draws."""

    eng: tuple[Token, ...]
    man: tuple[Token, ...]

    def for_lang(self, lang: LanguageTag) -> tuple[Token, ...]:
        return self.eng if lang is LanguageTag.ENG else self.man


def pools_from_corpus(corpus: Corpus) -> VocabPools:
    """Per-language vocabularies of a corpus, sorted for determinism."""
    eng = sorted({t.surface for u in corpus for t in u.tokens if t.lang is LanguageTag.ENG})
    man = sorted({t.surface for u in corpus for t in u.tokens if t.lang is LanguageTag.MAN})
    return VocabPools(
        tuple(Token(s, LanguageTag.ENG) for s in eng),
        tuple(Token(s, LanguageTag.MAN) for s in man),
    )


def _correct_conf(rng) -> float:
    return 0.5 + 0.5 * float(rng.beta(8.0, 2.0))


def _error_conf(rng) -> float:
    return 0.7 * float(rng.beta(2.0, 5.0))


class UtteranceSim(NamedTuple):
    """Per-utterance simulation: top-1 tokens, per-position events, n-best."""

    tokens: tuple[ScoredToken, ...]
    events: tuple[Event, ...]
    nbest: NBestList


def _entry_from(emissions, gaps) -> NBestEntry:
    scored: list[ScoredToken] = []
    for emitted, gap in zip(emissions, gaps):
        if emitted is not None:
            scored.append(emitted)
        if gap is not None:
            scored.append(gap)
    acoustic = sum(math.log(max(st.confidence, 1e-300)) for st in scored)
    return NBestEntry(tuple(st.token for st in scored), acoustic), scored


def simulate_utterance(
    rng: np.random.Generator,
    utt: Utterance,
    profile: SystemProfile,
    pools: VocabPools,
    probs_by_lang: Optional[dict[LanguageTag, EventProbs]] = None,
) -> UtteranceSim:
    """Corrupt one utterance with the profile's event model.

    Per reference token: sample correct / cross-substitute / same-substitute
    / delete; after each position, insert with probability ins_rate (the
    inserted language follows the normalized match levels). Correct tokens
    get high confidences, erroneous ones low. The n-best holds the top-1
    plus nbest_size-1 entries whose substitution positions and surviving
    insertions are re-sampled; acoustic score is the sum of per-token log
    confidences.
    """
    if probs_by_lang is None:
        probs_by_lang = {lang: derive_event_probs(profile, lang) for lang in LanguageTag}
    p_ins_lang_eng = (
        profile.match_eng / (profile.match_eng + profile.match_man)
        if profile.match_eng + profile.match_man > 0
        else 0.5
    )
    same_pool_cache: dict[Token, tuple[Token, ...]] = {}

    def draw(pool: tuple[Token, ...]) -> Token:
        return pool[int(rng.integers(len(pool)))]

    def draw_same_sub(truth: Token) -> Token:
        pool = same_pool_cache.get(truth)
        if pool is None:
            full = pools.for_lang(truth.lang)
            pool = tuple(t for t in full if t != truth) or full
            same_pool_cache[truth] = pool
        return draw(pool)

    def draw_insertion() -> Optional[ScoredToken]:
        if float(rng.random()) >= profile.ins_rate:
            return None
        lang = LanguageTag.ENG if float(rng.random()) < p_ins_lang_eng else LanguageTag.MAN
        return ScoredToken(draw(pools.for_lang(lang)), _error_conf(rng))

    def emit(event: Event, truth: Token) -> Optional[ScoredToken]:
        if event is Event.CORRECT:
            return ScoredToken(truth, _correct_conf(rng))
        if event is Event.CROSS_SUB:
            return ScoredToken(draw(pools.for_lang(truth.lang.other())), _error_conf(rng))
        if event is Event.SAME_SUB:
            return ScoredToken(draw_same_sub(truth), _error_conf(rng))
        return None

    events: list[Event] = []
    emissions: list[Optional[ScoredToken]] = []
    gaps: list[Optional[ScoredToken]] = []
    for tok in utt.tokens:
        probs = probs_by_lang[tok.lang]
        u = float(rng.random())
        if u < probs.p_correct:
            event = Event.CORRECT
        elif u < probs.p_correct + probs.p_cross_sub:
            event = Event.CROSS_SUB
        elif u < probs.p_correct + probs.p_cross_sub + probs.p_same_sub:
            event = Event.SAME_SUB
        else:
            event = Event.DELETE
        events.append(event)
        emissions.append(emit(event, tok))
        gaps.append(draw_insertion())

    top_entry, top_scored = _entry_from(emissions, gaps)
    entries = [top_entry]
    for _ in range(profile.nbest_size - 1):
        alt_emissions: list[Optional[ScoredToken]] = []
        for tok, event, emitted in zip(utt.tokens, events, emissions):
            if event in (Event.CORRECT, Event.DELETE):
                alt_emissions.append(emitted)
                continue
            probs = probs_by_lang[tok.lang]
            kept = probs.p_correct + probs.p_cross_sub + probs.p_same_sub
            u = float(rng.random()) * kept
            if u < probs.p_correct:
                alt_event = Event.CORRECT
            elif u < probs.p_correct + probs.p_cross_sub:
                alt_event = Event.CROSS_SUB
            else:
                alt_event = Event.SAME_SUB
            alt_emissions.append(emit(alt_event, tok))
        alt_gaps = [None if gap is None else draw_insertion() for gap in gaps]
        entries.append(_entry_from(alt_emissions, alt_gaps)[0])
    return UtteranceSim(
        tuple(top_scored), tuple(events), NBestList(utt.id, tuple(entries))
    )


def simulate_system(
    profile: SystemProfile, refs: Corpus, pools: Optional[VocabPools] = None
) -> tuple[SystemOutput, dict[str, NBestList]]:
    """Simulate one system over a reference corpus.

    Deterministic given (profile.seed, corpus order): utterance k draws
    from the substream seeded by (profile.seed, k), so per-utterance
    generation is independent of processing order.
    """
    if pools is None:
        pools = pools_from_corpus(refs)
    if not pools.eng or not pools.man:
        raise ValidationError("both language pools must be non-empty")
    probs_by_lang = {lang: derive_event_probs(profile, lang) for lang in LanguageTag}
    hypotheses: dict[str, Hypothesis] = {}
    nbests: dict[str, NBestList] = {}
    for index, utt in enumerate(refs):
        rng = np.random.default_rng([profile.seed, index])
        sim = simulate_utterance(rng, utt, profile, pools, probs_by_lang)
        hypotheses[utt.id] = Hypothesis(utt.id, sim.tokens)
        nbests[utt.id] = sim.nbest
    return SystemOutput(profile.name, hypotheses), nbests


# --- synthetic reference text --------------------------------------------

_ENG_WORDS = (
    "i you we they go eat want can like very good one two three time then so but "
    "really think know say make take see come now today home work school friend "
    "nice okay lah lor also already later maybe because actually still quite just "
    "here there first next last week day thing people talk play buy money food"
).split()

_MAN_CHARS = (
    "我你他她们的是不了在有这那个好很都要会说去吃喝茶饭家学校工作朋友时间今天明天"
    "现在然后就还可以什么知道觉得喜欢真多少点看想来走买东西钱吧呢啊嘛"
)


def default_pools() -> VocabPools:
    """Built-in per-language pools used by the synthetic corpus generator."""
    return VocabPools(
        tuple(Token(w, LanguageTag.ENG) for w in _ENG_WORDS),
        tuple(Token(c, LanguageTag.MAN) for c in dict.fromkeys(_MAN_CHARS)),
    )


def generate_reference_corpus(
    n_utterances: int,
    seed: int,
    name: str = "synthetic",
    min_segments: int = 1,
    max_segments: int = 4,
    min_segment_len: int = 1,
    max_segment_len: int = 4,
) -> Corpus:
    """Seeded synthetic corpus of alternating-language segments.

    With min_segments >= 2 every utterance is code-switched.
    """
    if n_utterances < 1:
        raise ValidationError("need at least one utterance")
    if not 1 <= min_segments <= max_segments or not 1 <= min_segment_len <= max_segment_len:
        raise ValidationError("invalid segment bounds")
    pools = default_pools()
    rng = np.random.default_rng([seed])
    utterances = []
    for k in range(n_utterances):
        n_segments = int(rng.integers(min_segments, max_segments + 1))
        lang = LanguageTag.ENG if rng.random() < 0.5 else LanguageTag.MAN
        tokens: list[Token] = []
        for _ in range(n_segments):
            seg_len = int(rng.integers(min_segment_len, max_segment_len + 1))
            pool = pools.for_lang(lang)
            tokens.extend(pool[int(rng.integers(len(pool)))] for _ in range(seg_len))
            lang = lang.other()
        utterances.append(Utterance(f"u{k:05d}", tuple(tokens)))
    return Corpus(name, tuple(utterances))
