"""Edit-distance alignment and error metrics: CER over Mandarin, WER over
English, MER per utterance category, and the cross-language substitution
matrix."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, NamedTuple, Optional, Sequence

from .errors import MissingHypothesis
from .tokens import Corpus, LanguageTag, Token, UtteranceCategory, categorize_utterance


class AlignKind(Enum):
    MATCH = "match"
    SUB = "sub"
    INS = "ins"
    DEL = "del"


@dataclass(frozen=True, slots=True)
class AlignmentOp:
    """One edit step. MATCH/SUB carry both tokens, INS only hyp, DEL only ref."""

    kind: AlignKind
    ref: Optional[Token]
    hyp: Optional[Token]


def align(ref: Sequence[Token], hyp: Sequence[Token]) -> list[AlignmentOp]:
    """Minimal-cost edit script between token sequences (match 0, others 1).

    A MATCH requires equal surface and language. Ties are broken walking
    from the start, preferring consume-both over deletion over insertion,
    so the output is deterministic.
    """
    n, m = len(ref), len(hyp)
    rkey = [(t.surface, t.lang) for t in ref]
    hkey = [(t.surface, t.lang) for t in hyp]

    # cost[i][j] = minimal edit cost for ref[i:] vs hyp[j:]
    cost = [[0] * (m + 1) for _ in range(n + 1)]
    last = cost[n]
    for j in range(m):
        last[j] = m - j
    for i in range(n - 1, -1, -1):
        ri = rkey[i]
        cur = cost[i]
        nxt = cost[i + 1]
        cur[m] = n - i
        for j in range(m - 1, -1, -1):
            best = nxt[j + 1] + (ri != hkey[j])
            down = nxt[j] + 1
            if down < best:
                best = down
            right = cur[j + 1] + 1
            if right < best:
                best = right
            cur[j] = best

    ops: list[AlignmentOp] = []
    i = j = 0
    while i < n or j < m:
        c = cost[i][j]
        if i < n and j < m and cost[i + 1][j + 1] + (rkey[i] != hkey[j]) == c:
            kind = AlignKind.MATCH if rkey[i] == hkey[j] else AlignKind.SUB
            ops.append(AlignmentOp(kind, ref[i], hyp[j]))
            i += 1
            j += 1
        elif i < n and cost[i + 1][j] + 1 == c:
            ops.append(AlignmentOp(AlignKind.DEL, ref[i], None))
            i += 1
        else:
            ops.append(AlignmentOp(AlignKind.INS, None, hyp[j]))
            j += 1
    return ops


def alignment_cost(ops: Iterable[AlignmentOp]) -> int:
    return sum(1 for op in ops if op.kind is not AlignKind.MATCH)


class ErrorCounts(NamedTuple):
    ref_tokens: int = 0
    subs: int = 0
    ins: int = 0
    dels: int = 0

    @property
    def errors(self) -> int:
        return self.subs + self.ins + self.dels

    @property
    def rate(self) -> Optional[float]:
        """Error percentage, or None when there are no reference tokens."""
        if self.ref_tokens == 0:
            return None
        return 100.0 * self.errors / self.ref_tokens

    def __add__(self, other):
        return ErrorCounts(*(a + b for a, b in zip(self, other)))


class Scope(Enum):
    """Which token population CER(M)/WER(E) are measured on.

    BY_UTTERANCE_CATEGORY scores CER over Mandarin-only utterances and WER
    over English-only ones; BY_TOKEN_LANGUAGE scores them over all tokens
    of each language regardless of utterance, attributing substitutions
    and deletions to the reference token's language and insertions to the
    hypothesis token's language.
    """

    BY_UTTERANCE_CATEGORY = "category"
    BY_TOKEN_LANGUAGE = "token"


@dataclass(frozen=True)
class ErrorReport:
    """Aggregated error counts with CER/WER/MER views.

    Rates are percentages and may exceed 100 (insertions); a rate is None
    when its reference-token denominator is zero.
    """

    scope: Scope
    by_category: dict[UtteranceCategory, ErrorCounts]
    by_language: dict[LanguageTag, ErrorCounts]

    @property
    def cer_man(self) -> Optional[float]:
        if self.scope is Scope.BY_TOKEN_LANGUAGE:
            return self.by_language[LanguageTag.MAN].rate
        return self.by_category[UtteranceCategory.MAN_ONLY].rate

    @property
    def wer_eng(self) -> Optional[float]:
        if self.scope is Scope.BY_TOKEN_LANGUAGE:
            return self.by_language[LanguageTag.ENG].rate
        return self.by_category[UtteranceCategory.ENG_ONLY].rate

    @property
    def mer_cs(self) -> Optional[float]:
        return self.by_category[UtteranceCategory.CODE_SWITCHED].rate

    @property
    def total(self) -> ErrorCounts:
        out = ErrorCounts()
        for counts in self.by_category.values():
            out = out + counts
        return out

    @property
    def mer_all(self) -> Optional[float]:
        return self.total.rate


@dataclass(frozen=True)
class SubstitutionMatrix:
    """Cross-language substitution counts, denominated by reference tokens."""

    eng_refs: int
    eng_refs_subbed_by_man: int
    man_refs: int
    man_refs_subbed_by_eng: int

    @property
    def pct_eng_as_man(self) -> Optional[float]:
        if self.eng_refs == 0:
            return None
        return 100.0 * self.eng_refs_subbed_by_man / self.eng_refs

    @property
    def pct_man_as_eng(self) -> Optional[float]:
        if self.man_refs == 0:
            return None
        return 100.0 * self.man_refs_subbed_by_eng / self.man_refs

    @property
    def gap(self) -> Optional[float]:
        """Absolute difference between the two cells; None if either is undefined."""
        a, b = self.pct_eng_as_man, self.pct_man_as_eng
        if a is None or b is None:
            return None
        return abs(a - b)


HypMapping = Mapping[str, Sequence[Token]]


def _iter_alignments(refs: Corpus, hyps: HypMapping):
    for utt in refs:
        if utt.id not in hyps:
            raise MissingHypothesis(utt.id)
        yield utt, align(utt.tokens, tuple(hyps[utt.id]))


def score_with_matrix(
    refs: Corpus, hyps: HypMapping, scope: Scope = Scope.BY_UTTERANCE_CATEGORY
) -> tuple[ErrorReport, SubstitutionMatrix]:
    """Score hypotheses and the substitution matrix in one alignment pass.

    Every reference utterance id must be present in hyps; extra hypothesis
    ids are ignored. Counts are kept per utterance category and per token
    language; the scope selects which view CER(M)/WER(E) report.
    """
    by_cat = {cat: [0, 0, 0, 0] for cat in UtteranceCategory}
    by_lang = {lang: [0, 0, 0, 0] for lang in LanguageTag}
    eng_as_man = man_as_eng = 0
    for utt, ops in _iter_alignments(refs, hyps):
        cat = by_cat[categorize_utterance(utt)]
        cat[0] += len(utt.tokens)
        for tok in utt.tokens:
            by_lang[tok.lang][0] += 1
        for op in ops:
            if op.kind is AlignKind.SUB:
                cat[1] += 1
                by_lang[op.ref.lang][1] += 1
                if op.ref.lang is not op.hyp.lang:
                    if op.ref.lang is LanguageTag.ENG:
                        eng_as_man += 1
                    else:
                        man_as_eng += 1
            elif op.kind is AlignKind.INS:
                cat[2] += 1
                by_lang[op.hyp.lang][2] += 1
            elif op.kind is AlignKind.DEL:
                cat[3] += 1
                by_lang[op.ref.lang][3] += 1
    report = ErrorReport(
        scope,
        {cat: ErrorCounts(*c) for cat, c in by_cat.items()},
        {lang: ErrorCounts(*c) for lang, c in by_lang.items()},
    )
    matrix = SubstitutionMatrix(
        by_lang[LanguageTag.ENG][0], eng_as_man, by_lang[LanguageTag.MAN][0], man_as_eng
    )
    return report, matrix


def score_corpus(
    refs: Corpus, hyps: HypMapping, scope: Scope = Scope.BY_UTTERANCE_CATEGORY
) -> ErrorReport:
    """Score hypotheses against a reference corpus (see score_with_matrix)."""
    return score_with_matrix(refs, hyps, scope)[0]


def substitution_matrix(refs: Corpus, hyps: HypMapping) -> SubstitutionMatrix:
    """Count reference tokens substituted by a token of the other language."""
    return score_with_matrix(refs, hyps)[1]


def format_rate(value: Optional[float]) -> str:
    """One-decimal presentation; undefined rates render as "n/a"."""
    return "n/a" if value is None else f"{value:.1f}"


_TABLE_COLUMNS = ("CER(M)", "WER(E)", "MER(CS)", "MER(All)", "%Eng-as-Man", "%Man-as-Eng")


def format_report_table(
    rows: Sequence[tuple[str, ErrorReport, Optional[SubstitutionMatrix]]]
) -> str:
    """Render labeled reports as an aligned plain-text table."""
    cells = []
    for label, report, subs in rows:
        row = [
            format_rate(report.cer_man),
            format_rate(report.wer_eng),
            format_rate(report.mer_cs),
            format_rate(report.mer_all),
            format_rate(subs.pct_eng_as_man) if subs else "n/a",
            format_rate(subs.pct_man_as_eng) if subs else "n/a",
            label,
        ]
        cells.append(row)
    header = list(_TABLE_COLUMNS) + ["System"]
    widths = [
        max(len(header[k]), *(len(row[k]) for row in cells)) if cells else len(header[k])
        for k in range(len(header))
    ]
    lines = []
    for row in [header] + cells:
        padded = [row[k].rjust(widths[k]) for k in range(len(header) - 1)]
        padded.append(row[-1])
        lines.append("  ".join(padded))
    return "\n".join(lines) + "\n"


def report_to_dict(report: ErrorReport, subs: Optional[SubstitutionMatrix] = None) -> dict:
    """Machine-readable form of a report (full precision, JSON-friendly)."""
    out = {
        "scope": report.scope.value,
        "cer_man": report.cer_man,
        "wer_eng": report.wer_eng,
        "mer_cs": report.mer_cs,
        "mer_all": report.mer_all,
        "by_category": {
            cat.value: counts._asdict() for cat, counts in report.by_category.items()
        },
        "by_language": {
            lang.value: counts._asdict() for lang, counts in report.by_language.items()
        },
    }
    if subs is not None:
        out["substitution_matrix"] = {
            "denominator": "reference_tokens",
            "pct_eng_as_man": subs.pct_eng_as_man,
            "pct_man_as_eng": subs.pct_man_as_eng,
            "eng_refs": subs.eng_refs,
            "eng_refs_subbed_by_man": subs.eng_refs_subbed_by_man,
            "man_refs": subs.man_refs,
            "man_refs_subbed_by_eng": subs.man_refs_subbed_by_eng,
        }
    return out
