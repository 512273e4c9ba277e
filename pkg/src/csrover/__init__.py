"""Scoring, bias measurement, and ROVER combination for code-switched
Mandarin/English ASR hypotheses, with a seeded system simulator."""

__version__ = "0.1.0"

from .errors import (
    CsRoverError,
    InternalError,
    MissingHypothesis,
    TokenizeError,
    ValidationError,
)
from .tokens import (
    Corpus,
    LanguageTag,
    Token,
    Utterance,
    UtteranceCategory,
    categorize_utterance,
    render_tokens,
    split_at_language_boundaries,
    tokenize_mixed,
)
from .scoring import (
    AlignKind,
    AlignmentOp,
    ErrorCounts,
    ErrorReport,
    Scope,
    SubstitutionMatrix,
    align,
    score_corpus,
    score_with_matrix,
    substitution_matrix,
)
from .rover import (
    CorrespondenceSet,
    Hypothesis,
    ScoredToken,
    SystemOutput,
    VoteConfig,
    VoteStat,
    WordTransitionNetwork,
    build_wtn,
    combine,
    vote,
)
from .lm import (
    BOS,
    EOS,
    UNK,
    InterpolatedLM,
    NBestEntry,
    NBestList,
    TrigramLM,
    decode_nbest,
    interpolate,
    load_lm,
    perplexity,
    save_lm,
    sequence_logprob,
    train_trigram,
)
from .simulator import (
    Event,
    EventProbs,
    SystemProfile,
    VocabPools,
    derive_event_probs,
    generate_reference_corpus,
    pools_from_corpus,
    simulate_system,
    simulate_utterance,
)
from .pipeline import (
    CombineMode,
    EnsembleResult,
    EnsembleSpec,
    MemberSpec,
    PseudoTranscriptSet,
    derive_seed,
    emit_pseudo_transcripts,
    emit_reports,
    run_ensemble,
    run_from_provenance,
)
from .config import RunConfig, load_config
