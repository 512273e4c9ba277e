"""ROVER-style hypothesis combination: iterative alignment of system
outputs into a word transition network, then per-slot confidence voting."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

from .errors import ValidationError
from .tokens import Token


@dataclass(frozen=True, slots=True)
class ScoredToken:
    token: Token
    confidence: float

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValidationError(f"confidence out of [0,1]: {self.confidence!r}")


@dataclass(frozen=True, slots=True)
class Hypothesis:
    """One system's token sequence (with confidences) for one utterance."""

    utt_id: str
    tokens: tuple[ScoredToken, ...]

    def surface_tokens(self) -> list[Token]:
        return [st.token for st in self.tokens]


@dataclass(frozen=True)
class SystemOutput:
    """All hypotheses of one system, keyed by utterance id."""

    system_id: str
    hypotheses: dict[str, Hypothesis]

    def __post_init__(self):
        for utt_id, hyp in self.hypotheses.items():
            if hyp.utt_id != utt_id:
                raise ValidationError(
                    f"hypothesis keyed {utt_id!r} carries utt_id {hyp.utt_id!r}"
                )

    def token_map(self) -> dict[str, list[Token]]:
        """Plain token sequences per utterance, for scoring."""
        return {utt_id: hyp.surface_tokens() for utt_id, hyp in self.hypotheses.items()}


@dataclass(frozen=True)
class CorrespondenceSet:
    """One voting slot per merged system; None marks absence (NULL)."""

    slots: dict[str, Optional[ScoredToken]]

    def __post_init__(self):
        if all(st is None for st in self.slots.values()):
            raise ValidationError("correspondence set with no non-NULL slot")


@dataclass(frozen=True)
class WordTransitionNetwork:
    utt_id: str
    sets: tuple[CorrespondenceSet, ...]
    merged_systems: tuple[str, ...]

    def system_tokens(self, system_id: str) -> list[ScoredToken]:
        """Recover one system's original token sequence (NULLs dropped)."""
        return [s.slots[system_id] for s in self.sets if s.slots[system_id] is not None]


class VoteStat(Enum):
    MAX_CONF = "max"
    AVG_CONF = "avg"
    FREQUENCY_ONLY = "freq"


@dataclass(frozen=True)
class VoteConfig:
    """Per-slot scoring: s(w) = alpha*N(w)/Ns + (1-alpha)*C(w).

    C(w) is the max (MAX_CONF) or mean (AVG_CONF) confidence over w's
    occurrences; NULL scores with confidence null_conf. FREQUENCY_ONLY
    forces alpha to 1 so confidences are ignored.
    """

    alpha: float = 0.0
    null_conf: float = 0.7
    stat: VoteStat = VoteStat.MAX_CONF

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValidationError(f"alpha out of [0,1]: {self.alpha!r}")
        if not 0.0 <= self.null_conf <= 1.0:
            raise ValidationError(f"null_conf out of [0,1]: {self.null_conf!r}")
        if self.stat is VoteStat.FREQUENCY_ONLY:
            object.__setattr__(self, "alpha", 1.0)


def build_wtn(hyps: Sequence[tuple[str, Hypothesis]]) -> WordTransitionNetwork:
    """Merge hypotheses into a word transition network, in the given order.

    The first hypothesis seeds one set per token; each next one is aligned
    against the current network by minimal edit cost (0 when the incoming
    token equals any non-NULL token already in a set, else 1; skipped sets
    take NULL; unmatched tokens open new sets that are NULL for everyone
    merged before). Ties prefer consume-both, then deletion, then
    insertion, walking from the start.
    """
    if not hyps:
        raise ValidationError("build_wtn needs at least one hypothesis")
    system_ids = [sys_id for sys_id, _ in hyps]
    if any(a >= b for a, b in zip(system_ids, system_ids[1:])):
        raise ValidationError(f"systems must be pre-sorted by unique system_id: {system_ids}")
    utt_id = hyps[0][1].utt_id
    for _, hyp in hyps:
        if hyp.utt_id != utt_id:
            raise ValidationError(f"mismatched utt_ids: {hyp.utt_id!r} vs {utt_id!r}")

    first_sys, first_hyp = hyps[0]
    slots_list: list[dict[str, Optional[ScoredToken]]] = [
        {first_sys: st} for st in first_hyp.tokens
    ]
    keys_list: list[set] = [{(st.token.surface, st.token.lang)} for st in first_hyp.tokens]
    merged = [first_sys]

    for sys_id, hyp in hyps[1:]:
        toks = hyp.tokens
        tkey = [(st.token.surface, st.token.lang) for st in toks]
        n, m = len(slots_list), len(toks)

        # cost[i][j] = minimal cost merging sets[i:] with tokens[j:]
        cost = [[0] * (m + 1) for _ in range(n + 1)]
        last = cost[n]
        for j in range(m):
            last[j] = m - j
        for i in range(n - 1, -1, -1):
            keys_i = keys_list[i]
            cur = cost[i]
            nxt = cost[i + 1]
            cur[m] = n - i
            for j in range(m - 1, -1, -1):
                best = nxt[j + 1] + (tkey[j] not in keys_i)
                down = nxt[j] + 1
                if down < best:
                    best = down
                right = cur[j + 1] + 1
                if right < best:
                    best = right
                cur[j] = best

        new_slots: list[dict[str, Optional[ScoredToken]]] = []
        new_keys: list[set] = []
        i = j = 0
        while i < n or j < m:
            c = cost[i][j]
            if (
                i < n
                and j < m
                and cost[i + 1][j + 1] + (tkey[j] not in keys_list[i]) == c
            ):
                slots_list[i][sys_id] = toks[j]
                keys_list[i].add(tkey[j])
                new_slots.append(slots_list[i])
                new_keys.append(keys_list[i])
                i += 1
                j += 1
            elif i < n and cost[i + 1][j] + 1 == c:
                slots_list[i][sys_id] = None
                new_slots.append(slots_list[i])
                new_keys.append(keys_list[i])
                i += 1
            else:
                slots = dict.fromkeys(merged, None)
                slots[sys_id] = toks[j]
                new_slots.append(slots)
                new_keys.append({tkey[j]})
                j += 1
        slots_list, keys_list = new_slots, new_keys
        merged.append(sys_id)

    return WordTransitionNetwork(
        utt_id, tuple(CorrespondenceSet(s) for s in slots_list), tuple(merged)
    )


def vote(wtn: WordTransitionNetwork, cfg: VoteConfig) -> Hypothesis:
    """Pick one winner per correspondence set.

    Candidates are the distinct tokens in the set, plus NULL when some slot
    is NULL. Score ties go to the candidate first contributed by the
    earliest merged system; NULL loses all exact ties. Winning tokens are
    emitted in set order with their score as confidence.
    """
    if not wtn.merged_systems:
        raise ValidationError("cannot vote on a network with no merged systems")
    ns = len(wtn.merged_systems)
    alpha = cfg.alpha
    out: list[ScoredToken] = []
    for cset in wtn.sets:
        candidates: dict = {}  # key -> [count, confidences, token]; insertion = first occurrence
        null_count = 0
        for sys_id in wtn.merged_systems:
            st = cset.slots[sys_id]
            if st is None:
                null_count += 1
                continue
            key = (st.token.surface, st.token.lang)
            entry = candidates.setdefault(key, [0, [], st.token])
            entry[0] += 1
            entry[1].append(st.confidence)
        best_score = -1.0
        best_token: Optional[Token] = None
        for count, confs, token in candidates.values():
            if cfg.stat is VoteStat.MAX_CONF:
                conf = max(confs)
            elif cfg.stat is VoteStat.AVG_CONF:
                conf = sum(confs) / len(confs)
            else:
                conf = 0.0
            score = alpha * count / ns + (1.0 - alpha) * conf
            if score > best_score:
                best_score = score
                best_token = token
        if null_count:
            null_score = alpha * null_count / ns + (1.0 - alpha) * cfg.null_conf
            if null_score > best_score:
                best_score = null_score
                best_token = None
        if best_token is not None:
            out.append(ScoredToken(best_token, min(1.0, max(0.0, best_score))))
    return Hypothesis(wtn.utt_id, tuple(out))


def combine(outputs: Sequence[SystemOutput], cfg: Optional[VoteConfig] = None) -> SystemOutput:
    """ROVER-combine system outputs over their shared utterance set.

    Members are merged in lexicographic system_id order; all outputs must
    cover the same utterance ids.
    """
    if not outputs:
        raise ValidationError("combine needs at least one system output")
    cfg = cfg or VoteConfig()
    ordered = sorted(outputs, key=lambda o: o.system_id)
    ids = [o.system_id for o in ordered]
    if len(set(ids)) != len(ids):
        raise ValidationError(f"duplicate system ids: {ids}")
    key_set = set(ordered[0].hypotheses)
    for out in ordered[1:]:
        if set(out.hypotheses) != key_set:
            raise ValidationError(
                f"system {out.system_id!r} covers a different utterance set "
                f"than {ordered[0].system_id!r}"
            )
    combined_id = "ROVER(" + ",".join(ids) + ")"
    combined: dict[str, Hypothesis] = {}
    for utt_id in ordered[0].hypotheses:
        wtn = build_wtn([(o.system_id, o.hypotheses[utt_id]) for o in ordered])
        combined[utt_id] = vote(wtn, cfg)
    return SystemOutput(combined_id, combined)
