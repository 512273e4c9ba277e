import random

import pytest

from conftest import corpus, eng, man, utt
from csrover.errors import TokenizeError, ValidationError
from csrover.tokens import (
    Corpus,
    LanguageTag,
    Token,
    Utterance,
    UtteranceCategory,
    categorize_utterance,
    monolingual_runs,
    render_tokens,
    split_at_language_boundaries,
    tokenize_mixed,
)


def test_tokenize_mixed_basic():
    assert tokenize_mixed("我 like 喝茶") == [man("我"), eng("like"), man("喝"), man("茶")]


def test_tokenize_empty():
    assert tokenize_mixed("") == []


def test_tokenize_script_boundaries_and_punctuation():
    assert tokenize_mixed("OK的lah!") == [eng("ok"), man("的"), eng("lah")]


def test_tokenize_rejects_unknown_script_with_position():
    with pytest.raises(TokenizeError) as excinfo:
        tokenize_mixed("我 λ茶")
    assert excinfo.value.position == 2
    assert excinfo.value.char == "λ"


def test_tokenize_cyrillic_rejected():
    with pytest.raises(TokenizeError):
        tokenize_mixed("hello привет")


def test_tokenize_internal_apostrophe_and_hyphen():
    assert tokenize_mixed("don't well-known") == [eng("don't"), eng("well-known")]


def test_tokenize_leading_hyphen_is_punctuation():
    assert tokenize_mixed("- dash 我-toned") == [eng("dash"), man("我"), eng("toned")]


def test_tokenize_digits_and_cjk_punctuation():
    assert tokenize_mixed("mp3 player。你好，ok") == [
        eng("mp3"),
        eng("player"),
        man("你"),
        man("好"),
        eng("ok"),
    ]


def test_tokenize_fullwidth_punctuation_dropped():
    assert tokenize_mixed("（我）！") == [man("我")]


def test_render_tokens_spacing():
    toks = [man("我"), eng("like"), man("喝"), man("茶")]
    assert render_tokens(toks) == "我 like 喝茶"
    assert render_tokens([]) == ""
    assert render_tokens([eng("a"), eng("b")]) == "a b"


@pytest.mark.parametrize("seed", range(5))
def test_tokenize_render_round_trip(seed):
    rng = random.Random(seed)
    eng_pool = ["like", "mp3", "don't", "well-known", "lah", "a"]
    man_pool = list("我你他茶好的")
    for _ in range(100):
        toks = []
        for _ in range(rng.randint(0, 12)):
            if rng.random() < 0.5:
                toks.append(eng(rng.choice(eng_pool)))
            else:
                toks.append(man(rng.choice(man_pool)))
        assert tokenize_mixed(render_tokens(toks)) == toks


def test_token_validation():
    with pytest.raises(ValidationError):
        Token("我是", LanguageTag.MAN)  # two code points
    with pytest.raises(ValidationError):
        Token("like", LanguageTag.MAN)
    with pytest.raises(ValidationError):
        Token("我", LanguageTag.ENG)
    with pytest.raises(ValidationError):
        Token("Like", LanguageTag.ENG)  # not lowercased
    with pytest.raises(ValidationError):
        Token("", LanguageTag.ENG)
    with pytest.raises(ValidationError):
        Token("---", LanguageTag.ENG)  # no alphanumeric material
    assert Token("mp3", LanguageTag.ENG).surface == "mp3"


def test_man_token_iff_single_cjk():
    for tok in tokenize_mixed("我 like 喝茶 mp3"):
        assert (tok.lang is LanguageTag.MAN) == (
            len(tok.surface) == 1 and not tok.surface.isascii()
        )


def test_utterance_id_validation():
    with pytest.raises(ValidationError):
        Utterance("", ())
    with pytest.raises(ValidationError):
        Utterance("has space", ())


def test_corpus_duplicate_ids_rejected():
    with pytest.raises(ValidationError):
        Corpus("c", (utt("u1", "我"), utt("u1", "like")))


def test_categorize():
    assert categorize_utterance(utt("u", "我 茶")) is UtteranceCategory.MAN_ONLY
    assert categorize_utterance(utt("u", "我 like")) is UtteranceCategory.CODE_SWITCHED
    assert categorize_utterance(utt("u", "")) is UtteranceCategory.EMPTY
    assert categorize_utterance(utt("u", "so like")) is UtteranceCategory.ENG_ONLY


def test_split_one_boundary():
    parent = utt("u", "我 是 like this")
    pieces = split_at_language_boundaries(parent, 2)
    assert [(p.id, p.tokens) for p in pieces] == [
        ("u#0", (man("我"), man("是"))),
        ("u#1", (eng("like"), eng("this"))),
    ]


def test_split_short_run_discards_everything():
    assert split_at_language_boundaries(utt("u", "我 like this"), 2) == []


def test_split_monolingual_kept_whole():
    pieces = split_at_language_boundaries(utt("u", "我 是"), 2)
    assert [(p.id, p.tokens) for p in pieces] == [("u#0", (man("我"), man("是")))]


def test_split_empty_utterance():
    assert split_at_language_boundaries(utt("u", ""), 1) == []


def test_split_min_tokens_validation():
    with pytest.raises(ValidationError):
        split_at_language_boundaries(utt("u", "我"), 0)


@pytest.mark.parametrize("seed", range(5))
def test_split_concatenation_and_cs_equivalence(seed):
    rng = random.Random(100 + seed)
    pools = {LanguageTag.ENG: [eng(w) for w in ("a", "b", "c")],
             LanguageTag.MAN: [man(c) for c in "我你他"]}
    for k in range(60):
        toks = tuple(
            rng.choice(pools[rng.choice(list(LanguageTag))]) for _ in range(rng.randint(0, 10))
        )
        parent = Utterance(f"u{k}", toks)
        pieces = split_at_language_boundaries(parent, rng.randint(1, 3))
        if pieces:
            rejoined = tuple(t for p in pieces for t in p.tokens)
            assert rejoined == parent.tokens
        runs = split_at_language_boundaries(parent, 1)
        is_cs = categorize_utterance(parent) is UtteranceCategory.CODE_SWITCHED
        assert is_cs == (len(runs) >= 2)


def test_monolingual_runs_are_maximal():
    runs = monolingual_runs(tokenize_mixed("我 是 like 茶"))
    assert [len(r) for r in runs] == [2, 1, 1]
    assert all(len({t.lang for t in run}) == 1 for run in runs)
