"""Command-line interface.

Exit codes: 0 success, 1 validation error, 2 I/O error, 3 internal error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .config import load_config
from .errors import InternalError, ValidationError
from .formats import (
    read_hypotheses,
    read_transcripts,
    write_hypotheses,
    write_nbest,
    write_transcripts,
)
from .lm import interpolate, load_lm, perplexity, save_lm, train_trigram
from .pipeline import (
    dump_json,
    emit_pseudo_transcripts,
    emit_reports,
    run_ensemble,
)
from .rover import VoteConfig, VoteStat, combine
from .scoring import (
    Scope,
    format_rate,
    format_report_table,
    report_to_dict,
    score_corpus,
    substitution_matrix,
)
from .simulator import simulate_system
from .tokens import Corpus, split_at_language_boundaries


def _write_or_print(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _add_vote_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--alpha", type=float, default=0.0,
                        help="frequency vs confidence trade-off (default 0)")
    parser.add_argument("--null-conf", type=float, default=0.7,
                        help="confidence assigned to NULL (default 0.7)")
    parser.add_argument("--vote-stat", choices=[s.value for s in VoteStat], default="max",
                        help="per-candidate confidence statistic (default max)")


def _vote_config(args) -> VoteConfig:
    return VoteConfig(args.alpha, args.null_conf, VoteStat(args.vote_stat))


def _scope(args) -> Scope:
    return Scope(args.scope)


def cmd_tokenize(args) -> int:
    corpus = read_transcripts(args.transcripts)
    lines = [
        f"{utt.id}\t" + " ".join(str(tok) for tok in utt.tokens) for utt in corpus
    ]
    _write_or_print("\n".join(lines) + "\n" if lines else "", args.out)
    return 0


def cmd_split(args) -> int:
    corpus = read_transcripts(args.transcripts)
    pieces = []
    for utt in corpus:
        pieces.extend(split_at_language_boundaries(utt, args.min_tokens))
    split_corpus = Corpus(f"{corpus.name}-split", tuple(pieces))
    if args.out:
        write_transcripts(split_corpus, args.out)
    else:
        from .tokens import render_tokens

        for utt in split_corpus:
            sys.stdout.write(f"{utt.id}\t{render_tokens(utt.tokens)}\n")
    return 0


def cmd_score(args) -> int:
    refs = read_transcripts(args.refs)
    hyps = read_hypotheses(args.hyps)
    report = score_corpus(refs, hyps.token_map(), _scope(args))
    subs = substitution_matrix(refs, hyps.token_map())
    sys.stdout.write(format_report_table([(hyps.system_id, report, subs)]))
    if args.out:
        Path(args.out).write_text(dump_json(report_to_dict(report, subs)), encoding="utf-8")
    return 0


def cmd_subs_matrix(args) -> int:
    refs = read_transcripts(args.refs)
    hyps = read_hypotheses(args.hyps)
    subs = substitution_matrix(refs, hyps.token_map())
    sys.stdout.write(
        f"pct_eng_as_man {format_rate(subs.pct_eng_as_man)}\n"
        f"pct_man_as_eng {format_rate(subs.pct_man_as_eng)}\n"
        f"eng_refs {subs.eng_refs}\n"
        f"eng_refs_subbed_by_man {subs.eng_refs_subbed_by_man}\n"
        f"man_refs {subs.man_refs}\n"
        f"man_refs_subbed_by_eng {subs.man_refs_subbed_by_eng}\n"
    )
    return 0


def cmd_rover(args) -> int:
    outputs = [read_hypotheses(path) for path in args.hyps]
    combined = combine(outputs, _vote_config(args))
    if args.out:
        write_hypotheses(combined, args.out)
    else:
        import io

        buffer = io.StringIO()
        for utt_id, hyp in combined.hypotheses.items():
            if not hyp.tokens:
                buffer.write(f"{utt_id}\n")
            for st in hyp.tokens:
                buffer.write(
                    f"{utt_id} {st.token.surface} {st.token.lang.value} {st.confidence!r}\n"
                )
        sys.stdout.write(buffer.getvalue())
    return 0


def cmd_lm_train(args) -> int:
    corpus = read_transcripts(args.text)
    lm = train_trigram(corpus)
    save_lm(lm, args.out)
    return 0


def cmd_lm_ppl(args) -> int:
    lms = [load_lm(path) for path in args.lm]
    weights = None
    if args.weights:
        by_name = {}
        for pair in args.weights:
            name, sep, value = pair.partition("=")
            if not sep:
                raise ValidationError(f"--weights expects name=weight, got {pair!r}")
            try:
                by_name[name] = float(value)
            except ValueError:
                raise ValidationError(f"--weights {pair!r}: bad number") from None
        known = {lm.name for lm in lms}
        unknown = set(by_name) - known
        if unknown:
            raise ValidationError(f"--weights names {sorted(unknown)} not among LMs {sorted(known)}")
        weights = [by_name.get(lm.name, 0.0) for lm in lms]
    model = interpolate(lms, weights)
    corpus = read_transcripts(args.text)
    sys.stdout.write(f"perplexity {perplexity(model, corpus)!r}\n")
    return 0


def cmd_simulate(args) -> int:
    cfg = load_config(args.config, args.seed)
    if args.profile not in cfg.profiles:
        raise ValidationError(
            f"profiles.{args.profile}: not defined in {cfg.path} "
            f"(available: {sorted(cfg.profiles)})"
        )
    refs = read_transcripts(args.refs or cfg.refs_path)
    output, nbests = simulate_system(cfg.profiles[args.profile], refs)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_hypotheses(output, out_dir / f"{args.profile}.hyp")
    write_nbest(nbests, out_dir / f"{args.profile}.nbest")
    sys.stdout.write(f"wrote {out_dir / (args.profile + '.hyp')}\n")
    return 0


def _select_ensembles(cfg, names):
    if not names:
        return list(cfg.ensembles)
    for name in names:
        if name not in cfg.ensembles:
            raise ValidationError(
                f"ensembles.{name}: not defined in {cfg.path} "
                f"(available: {sorted(cfg.ensembles)})"
            )
    return list(names)


def cmd_run_ensemble(args) -> int:
    cfg = load_config(args.config, args.seed)
    refs = read_transcripts(cfg.refs_path)
    scope = Scope(args.scope) if args.scope else cfg.scope
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name in _select_ensembles(cfg, args.ensemble):
        result = run_ensemble(cfg.ensembles[name], refs, scope)
        emit_reports(result, out_dir)
        write_hypotheses(result.combined, out_dir / f"{name}_combined.hyp")
        (out_dir / f"{name}_provenance.json").write_text(
            dump_json(result.provenance), encoding="utf-8"
        )
        report, subs = result.combined_report
        sys.stdout.write(
            f"{name}: MER(All) {format_rate(report.mer_all)} "
            f"(CER(M) {format_rate(report.cer_man)}, WER(E) {format_rate(report.wer_eng)}, "
            f"MER(CS) {format_rate(report.mer_cs)})\n"
        )
    return 0


def cmd_emit_pseudo(args) -> int:
    cfg = load_config(args.config, args.seed)
    refs = read_transcripts(cfg.refs_path)
    scope = Scope(args.scope) if args.scope else cfg.scope
    if args.unlabeled:
        unlabeled = read_transcripts(args.unlabeled)
    elif cfg.unlabeled_path is not None:
        unlabeled = read_transcripts(cfg.unlabeled_path)
    else:
        unlabeled = refs
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name in _select_ensembles(cfg, args.ensemble):
        result = run_ensemble(cfg.ensembles[name], refs, scope)
        pseudo = emit_pseudo_transcripts(result, unlabeled)
        path = out_dir / f"{name}_pseudo.tsv"
        pseudo.write(path)
        sys.stdout.write(f"wrote {path} ({len(pseudo.manifest)} utterances)\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="csrover",
        description="Score, bias-measure, and ROVER-combine code-switched "
        "Mandarin/English ASR hypotheses.",
    )
    parser.add_argument("--version", action="version", version=f"csrover {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tokenize", help="tokenize a transcript file")
    p.add_argument("transcripts")
    p.add_argument("--out")
    p.set_defaults(func=cmd_tokenize)

    p = sub.add_parser("split", help="split utterances at language boundaries")
    p.add_argument("transcripts")
    p.add_argument("--min-tokens", type=int, default=2)
    p.add_argument("--out")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("score", help="score a hypothesis file against references")
    p.add_argument("--refs", required=True)
    p.add_argument("--hyps", required=True)
    p.add_argument("--scope", choices=[s.value for s in Scope], default="category")
    p.add_argument("--out", help="also write a JSON report here")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("subs-matrix", help="cross-language substitution percentages")
    p.add_argument("--refs", required=True)
    p.add_argument("--hyps", required=True)
    p.set_defaults(func=cmd_subs_matrix)

    p = sub.add_parser("rover", help="combine hypothesis files by confidence voting")
    p.add_argument("hyps", nargs="+")
    _add_vote_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_rover)

    p = sub.add_parser("lm-train", help="train a trigram LM from transcripts")
    p.add_argument("--text", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_lm_train)

    p = sub.add_parser("lm-ppl", help="perplexity of text under (interpolated) LMs")
    p.add_argument("--lm", action="append", required=True, help="LM file (repeatable)")
    p.add_argument("--weights", action="append", metavar="NAME=W",
                   help="per-LM interpolation weight (repeatable; default uniform)")
    p.add_argument("--text", required=True)
    p.set_defaults(func=cmd_lm_ppl)

    p = sub.add_parser("simulate", help="simulate one profile over references")
    p.add_argument("--config", required=True)
    p.add_argument("--profile", required=True)
    p.add_argument("--refs", help="override the config's reference corpus")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("run-ensemble", help="run ensembles and emit reports")
    p.add_argument("--config", required=True)
    p.add_argument("--ensemble", action="append", help="ensemble name (repeatable; default all)")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--scope", choices=[s.value for s in Scope])
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_run_ensemble)

    p = sub.add_parser("emit-pseudo", help="emit pseudo-transcripts from an ensemble")
    p.add_argument("--config", required=True)
    p.add_argument("--ensemble", action="append", help="ensemble name (repeatable; default all)")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--scope", choices=[s.value for s in Scope])
    p.add_argument("--unlabeled", help="override the unlabeled corpus path")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_emit_pseudo)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"csrover: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"csrover: I/O error: {exc}", file=sys.stderr)
        return 2
    except (InternalError, AssertionError) as exc:
        print(f"csrover: internal error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
