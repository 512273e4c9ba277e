"""Readers and writers for the plain-text interchange formats.

Transcript files: one utterance per line, "utt_id<TAB>raw text".
Hypothesis files: one token per line, "utt_id token lang confidence"
(space-separated); a bare "utt_id" line declares an empty hypothesis.
N-best files: hypothesis lines with an entry-index column and the entry's
total acoustic score, "utt_id idx token lang score"; empty entries are
"utt_id idx score".
"""

from __future__ import annotations

from pathlib import Path
from typing import Union

from .errors import ValidationError
from .lm import NBestEntry, NBestList
from .rover import Hypothesis, ScoredToken, SystemOutput
from .tokens import Corpus, LanguageTag, Token, Utterance, render_tokens, tokenize_mixed

PathLike = Union[str, Path]


def read_transcripts(path: PathLike, name: str | None = None) -> Corpus:
    """Parse a transcript file into a tokenized corpus (name from the stem)."""
    path = Path(path)
    utterances = []
    with path.open(encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            utt_id, sep, text = line.partition("\t")
            if not sep:
                raise ValidationError(f"{path}:{lineno}: expected 'utt_id<TAB>text'")
            try:
                tokens = tokenize_mixed(text)
                utterances.append(Utterance(utt_id, tuple(tokens)))
            except ValidationError as exc:
                raise ValidationError(f"{path}:{lineno}: {exc}") from exc
    return Corpus(name or path.stem, tuple(utterances))


def write_transcripts(corpus: Corpus, path: PathLike) -> None:
    lines = [f"{utt.id}\t{render_tokens(utt.tokens)}" for utt in corpus]
    Path(path).write_text("\n".join(lines) + "\n" if lines else "", encoding="utf-8")


def _parse_token(surface: str, lang: str, where: str) -> Token:
    try:
        return Token(surface, LanguageTag(lang))
    except ValueError as exc:
        raise ValidationError(f"{where}: unknown language tag {lang!r}") from exc


def read_hypotheses(path: PathLike, system_id: str | None = None) -> SystemOutput:
    """Parse a hypothesis file; system id defaults to the file stem."""
    path = Path(path)
    tokens_by_utt: dict[str, list[ScoredToken]] = {}
    with path.open(encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            fields = line.split(" ")
            where = f"{path}:{lineno}"
            if len(fields) == 1:
                tokens_by_utt.setdefault(fields[0], [])
            elif len(fields) == 4:
                utt_id, surface, lang, conf_str = fields
                token = _parse_token(surface, lang, where)
                try:
                    confidence = float(conf_str)
                except ValueError as exc:
                    raise ValidationError(f"{where}: bad confidence {conf_str!r}") from exc
                try:
                    scored = ScoredToken(token, confidence)
                except ValidationError as exc:
                    raise ValidationError(f"{where}: {exc}") from exc
                tokens_by_utt.setdefault(utt_id, []).append(scored)
            else:
                raise ValidationError(
                    f"{where}: expected 'utt_id token lang confidence' or a bare utt_id"
                )
    hypotheses = {
        utt_id: Hypothesis(utt_id, tuple(tokens)) for utt_id, tokens in tokens_by_utt.items()
    }
    return SystemOutput(system_id or path.stem, hypotheses)


def write_hypotheses(output: SystemOutput, path: PathLike) -> None:
    lines = []
    for utt_id, hyp in output.hypotheses.items():
        if not hyp.tokens:
            lines.append(utt_id)
        for st in hyp.tokens:
            lines.append(f"{utt_id} {st.token.surface} {st.token.lang.value} {st.confidence!r}")
    Path(path).write_text("\n".join(lines) + "\n" if lines else "", encoding="utf-8")


def read_nbest(path: PathLike) -> dict[str, NBestList]:
    """Parse an n-best file into per-utterance entry lists."""
    path = Path(path)
    entries: dict[str, dict[int, tuple[list[Token], float]]] = {}
    with path.open(encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            fields = line.split(" ")
            where = f"{path}:{lineno}"
            try:
                if len(fields) == 3:
                    utt_id, idx_str, score_str = fields
                    token = None
                elif len(fields) == 5:
                    utt_id, idx_str, surface, lang, score_str = fields
                    token = _parse_token(surface, lang, where)
                else:
                    raise ValidationError(
                        f"{where}: expected 'utt_id idx token lang score' or 'utt_id idx score'"
                    )
                idx, score = int(idx_str), float(score_str)
            except ValueError as exc:
                raise ValidationError(f"{where}: {exc}") from exc
            entry = entries.setdefault(utt_id, {}).setdefault(idx, ([], score))
            if token is not None:
                entry[0].append(token)
    out = {}
    for utt_id, by_idx in entries.items():
        if sorted(by_idx) != list(range(len(by_idx))):
            raise ValidationError(
                f"{path}: utterance {utt_id!r} has non-contiguous entry indices"
            )
        out[utt_id] = NBestList(
            utt_id,
            tuple(NBestEntry(tuple(by_idx[i][0]), by_idx[i][1]) for i in sorted(by_idx)),
        )
    return out


def write_nbest(nbests: dict[str, NBestList], path: PathLike) -> None:
    lines = []
    for utt_id, nbest in nbests.items():
        for idx, entry in enumerate(nbest.entries):
            if not entry.tokens:
                lines.append(f"{utt_id} {idx} {entry.acoustic_score!r}")
            for token in entry.tokens:
                lines.append(
                    f"{utt_id} {idx} {token.surface} {token.lang.value} {entry.acoustic_score!r}"
                )
    Path(path).write_text("\n".join(lines) + "\n" if lines else "", encoding="utf-8")
