"""Ensemble orchestration: simulate members, optionally LM-rescore them,
combine with ROVER voting, report error rates, and emit pseudo-transcripts
for semi-supervised training."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional

from .errors import ValidationError
from .lm import InterpolatedLM, TrigramLM, decode_nbest, interpolate, train_trigram
from .rover import SystemOutput, VoteConfig, VoteStat, combine
from .scoring import (
    ErrorReport,
    Scope,
    SubstitutionMatrix,
    format_report_table,
    report_to_dict,
    score_with_matrix,
)
from .simulator import SystemProfile, pools_from_corpus, simulate_system
from .tokens import (
    Corpus,
    LanguageTag,
    Token,
    render_tokens,
    split_at_language_boundaries,
)

LM_CORPUS_NAMES = ("eng", "man")


def derive_seed(base_seed: int, label: str) -> int:
    """Stable 64-bit seed for a named component of a run."""
    digest = hashlib.blake2b(f"{base_seed}:{label}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


class CombineMode(Enum):
    FLAT = "flat"
    CASCADED = "cascaded"


@dataclass(frozen=True)
class MemberSpec:
    """One ensemble member: a simulated system, optionally LM-rescored.

    lm_scale 0 disables rescoring; lm_weights maps the per-language LM
    corpus names ("eng", "man") to interpolation weights, defaulting to
    uniform. group names a sub-ensemble for cascaded combination.
    """

    profile: SystemProfile
    lm_weights: Optional[dict[str, float]] = None
    lm_scale: float = 0.0
    group: Optional[str] = None

    def __post_init__(self):
        if self.lm_scale < 0:
            raise ValidationError(f"member {self.profile.name!r}: lm_scale must be >= 0")
        if self.lm_weights is not None:
            if self.lm_scale == 0:
                raise ValidationError(
                    f"member {self.profile.name!r}: lm_weights require lm_scale > 0"
                )
            if set(self.lm_weights) != set(LM_CORPUS_NAMES):
                raise ValidationError(
                    f"member {self.profile.name!r}: lm_weights keys must be {LM_CORPUS_NAMES}"
                )
            for name, weight in self.lm_weights.items():
                if weight < 0:
                    raise ValidationError(
                        f"member {self.profile.name!r}: lm_weights.{name} is negative"
                    )
            total = sum(self.lm_weights.values())
            if abs(total - 1.0) > 1e-9:
                raise ValidationError(
                    f"member {self.profile.name!r}: lm_weights sum to {total!r}, not 1"
                )

    def effective_weights(self) -> dict[str, float]:
        if self.lm_weights is not None:
            return dict(self.lm_weights)
        return {name: 1.0 / len(LM_CORPUS_NAMES) for name in LM_CORPUS_NAMES}

    @property
    def system_id(self) -> str:
        if self.lm_scale == 0:
            return self.profile.name
        w = self.effective_weights()
        return (
            f"{self.profile.name}"
            f"+lm[eng={w['eng']:g},man={w['man']:g},scale={self.lm_scale:g}]"
        )


@dataclass(frozen=True)
class EnsembleSpec:
    name: str
    members: tuple[MemberSpec, ...]
    mode: CombineMode = CombineMode.FLAT
    vote: VoteConfig = field(default_factory=VoteConfig)

    def __post_init__(self):
        if not self.name:
            raise ValidationError("ensemble name must be non-empty")
        object.__setattr__(self, "members", tuple(self.members))
        if not self.members:
            raise ValidationError(f"ensemble {self.name!r} has no members")
        ids = [m.system_id for m in self.members]
        if len(set(ids)) != len(ids):
            raise ValidationError(f"ensemble {self.name!r} has duplicate member ids: {ids}")


@dataclass(frozen=True)
class EnsembleResult:
    """Combined output plus per-member and combined reports.

    provenance is a JSON-friendly document sufficient to reproduce the run
    byte-exactly against the same reference corpus.
    """

    combined: SystemOutput
    member_reports: tuple[tuple[str, ErrorReport, SubstitutionMatrix], ...]
    combined_report: tuple[ErrorReport, SubstitutionMatrix]
    provenance: dict

    @property
    def name(self) -> str:
        return self.provenance["ensemble"]["name"]


def corpus_digest(corpus: Corpus) -> str:
    """sha256 over the canonical transcript rendering of a corpus."""
    text = "\n".join(f"{u.id}\t{render_tokens(u.tokens)}" for u in corpus)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def language_halves(refs: Corpus) -> dict[str, Corpus]:
    """Monolingual runs of the reference text, grouped per language."""
    by_lang: dict[LanguageTag, list] = {lang: [] for lang in LanguageTag}
    for utt in refs:
        for run in split_at_language_boundaries(utt, 1):
            by_lang[run.tokens[0].lang].append(run)
    return {
        "eng": Corpus("eng", tuple(by_lang[LanguageTag.ENG])),
        "man": Corpus("man", tuple(by_lang[LanguageTag.MAN])),
    }


def _combine_members(spec: EnsembleSpec, outputs: list[SystemOutput]) -> SystemOutput:
    if spec.mode is CombineMode.FLAT:
        return combine(outputs, spec.vote)
    groups: dict[str, list[SystemOutput]] = {}
    singles: list[SystemOutput] = []
    for member, output in zip(spec.members, outputs):
        if member.group is None:
            singles.append(output)
        else:
            groups.setdefault(member.group, []).append(output)
    stage = [combine(members, spec.vote) for members in groups.values()] + singles
    return combine(stage, spec.vote)


def _build_provenance(spec: EnsembleSpec, refs: Corpus, scope: Scope, combined_id: str) -> dict:
    members = []
    for m in spec.members:
        p = m.profile
        members.append(
            {
                "system_id": m.system_id,
                "group": m.group,
                "lm_scale": m.lm_scale,
                "lm_weights": dict(m.lm_weights) if m.lm_weights is not None else None,
                "profile": {
                    "name": p.name,
                    "match_eng": p.match_eng,
                    "match_man": p.match_man,
                    "seed": p.seed,
                    "kappa": p.kappa,
                    "delta": p.delta,
                    "ins_rate": p.ins_rate,
                    "nbest_size": p.nbest_size,
                },
            }
        )
    return {
        "format": "csrover-provenance v1",
        "scope": scope.value,
        "ensemble": {
            "name": spec.name,
            "mode": spec.mode.value,
            "vote": {
                "alpha": spec.vote.alpha,
                "null_conf": spec.vote.null_conf,
                "stat": spec.vote.stat.value,
            },
            "members": members,
        },
        "refs": {
            "name": refs.name,
            "utterances": len(refs),
            "sha256": corpus_digest(refs),
        },
        "combined_system_id": combined_id,
    }


def run_ensemble(
    spec: EnsembleSpec, refs: Corpus, scope: Scope = Scope.BY_UTTERANCE_CATEGORY
) -> EnsembleResult:
    """Simulate, rescore, combine, and score one ensemble against refs."""
    if len(refs) == 0:
        raise ValidationError("reference corpus is empty")
    pools = pools_from_corpus(refs)
    sims: dict[str, tuple] = {}
    for member in spec.members:
        if member.profile.name not in sims:
            sims[member.profile.name] = simulate_system(member.profile, refs, pools)

    language_lms: Optional[dict[str, TrigramLM]] = None
    interp_cache: dict[tuple[float, float], InterpolatedLM] = {}
    member_outputs: list[SystemOutput] = []
    for member in spec.members:
        base, nbests = sims[member.profile.name]
        if member.lm_scale > 0:
            if language_lms is None:
                halves = language_halves(refs)
                for name in LM_CORPUS_NAMES:
                    if len(halves[name]) == 0:
                        raise ValidationError(
                            f"cannot LM-rescore: refs contain no {name!r} text"
                        )
                language_lms = {name: train_trigram(halves[name]) for name in LM_CORPUS_NAMES}
            weights = member.effective_weights()
            key = (weights["eng"], weights["man"])
            lm = interp_cache.get(key)
            if lm is None:
                lm = interpolate(
                    [language_lms["eng"], language_lms["man"]], [weights["eng"], weights["man"]]
                )
                interp_cache[key] = lm
            hyps = {
                utt_id: decode_nbest(nbest, lm, member.lm_scale)
                for utt_id, nbest in nbests.items()
            }
        else:
            hyps = base.hypotheses
        member_outputs.append(SystemOutput(member.system_id, hyps))

    combined = _combine_members(spec, member_outputs)
    member_reports = []
    for output in member_outputs:
        report, matrix = score_with_matrix(refs, output.token_map(), scope)
        member_reports.append((output.system_id, report, matrix))
    combined_report = score_with_matrix(refs, combined.token_map(), scope)
    provenance = _build_provenance(spec, refs, scope, combined.system_id)
    return EnsembleResult(combined, tuple(member_reports), combined_report, provenance)


def ensemble_spec_from_provenance(provenance: dict) -> tuple[EnsembleSpec, Scope]:
    """Rebuild the resolved spec (and scope) recorded in a provenance doc."""
    try:
        ens = provenance["ensemble"]
        members = tuple(
            MemberSpec(
                SystemProfile(**m["profile"]),
                m["lm_weights"],
                m["lm_scale"],
                m["group"],
            )
            for m in ens["members"]
        )
        vote = VoteConfig(
            ens["vote"]["alpha"], ens["vote"]["null_conf"], VoteStat(ens["vote"]["stat"])
        )
        spec = EnsembleSpec(ens["name"], members, CombineMode(ens["mode"]), vote)
        return spec, Scope(provenance["scope"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed provenance document: {exc}") from exc


def run_from_provenance(provenance: dict, refs: Corpus) -> EnsembleResult:
    """Replay a run from its provenance; refuses a mismatched corpus."""
    spec, scope = ensemble_spec_from_provenance(provenance)
    recorded = provenance["refs"]["sha256"]
    actual = corpus_digest(refs)
    if recorded != actual:
        raise ValidationError(
            f"reference corpus digest {actual} does not match provenance ({recorded})"
        )
    return run_ensemble(spec, refs, scope)


def dump_json(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, indent=2) + "\n"


def emit_reports(result: EnsembleResult, out_dir) -> list[Path]:
    """Write the member+combined table and its JSON equivalent."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = [(sys_id, rep, subs) for sys_id, rep, subs in result.member_reports]
    rows.append((result.name, result.combined_report[0], result.combined_report[1]))

    table_path = out_dir / f"{result.name}_report.txt"
    table_path.write_text(format_report_table(rows), encoding="utf-8")

    json_rows = []
    for label, report, subs in rows:
        row = {"system": label}
        row.update(report_to_dict(report, subs))
        json_rows.append(row)
    doc = {
        "ensemble": result.name,
        "combined_system_id": result.provenance["combined_system_id"],
        "rows": json_rows,
        "provenance": result.provenance,
    }
    json_path = out_dir / f"{result.name}_report.json"
    json_path.write_text(dump_json(doc), encoding="utf-8")
    return [table_path, json_path]


@dataclass(frozen=True)
class PseudoTranscriptSet:
    """Combined hypotheses rendered as training labels, confidences dropped."""

    source: str
    manifest: dict[str, tuple[Token, ...]]

    def lines(self) -> list[str]:
        return [f"{utt_id}\t{render_tokens(tokens)}" for utt_id, tokens in self.manifest.items()]

    def write(self, path) -> None:
        lines = self.lines()
        Path(path).write_text("\n".join(lines) + "\n" if lines else "", encoding="utf-8")


def emit_pseudo_transcripts(result: EnsembleResult, unlabeled: Corpus) -> PseudoTranscriptSet:
    """One pseudo-transcript per unlabeled utterance, in corpus order."""
    hypotheses = result.combined.hypotheses
    missing = [utt.id for utt in unlabeled if utt.id not in hypotheses]
    if missing:
        raise ValidationError(
            f"combined output does not cover {len(missing)} unlabeled utterances "
            f"(first: {missing[0]!r})"
        )
    manifest = {
        utt.id: tuple(hypotheses[utt.id].surface_tokens()) for utt in unlabeled
    }
    return PseudoTranscriptSet(result.name, manifest)
