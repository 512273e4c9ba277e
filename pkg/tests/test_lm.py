import math
import random

import pytest

from conftest import corpus, eng, man, utt
from csrover.errors import ValidationError
from csrover.lm import (
    BOS,
    EOS,
    UNK,
    InterpolatedLM,
    NBestEntry,
    NBestList,
    decode_nbest,
    interpolate,
    load_lm,
    perplexity,
    save_lm,
    sequence_logprob,
    train_trigram,
)
from csrover.simulator import generate_reference_corpus
from csrover.tokens import Corpus, Utterance


def test_unigram_mle_with_reserved_unk_mass():
    lm = train_trigram(corpus("t", ("u1", "a a b")))
    # MLE before the unk reservation: P(a)=2/4, P(b)=1/4, P(end)=1/4
    assert lm.prob(eng("a"), ()) == pytest.approx((1 - 1e-6) * 0.5, rel=1e-12)
    assert lm.prob(eng("b"), ()) == pytest.approx((1 - 1e-6) * 0.25, rel=1e-12)
    assert lm.prob(EOS, ()) == pytest.approx((1 - 1e-6) * 0.25, rel=1e-12)
    assert lm.prob(UNK, ()) == 1e-6


def test_seen_token_dominates_unk_in_context():
    lm = train_trigram(corpus("t", ("u1", "x x x")))
    x = eng("x")
    assert lm.prob(x, (x, x)) > lm.prob(UNK, (x, x))


def _sampled_histories(lm, rng, count=100):
    vocab = sorted(lm.vocab, key=str)
    picks = [(), (BOS, BOS)]
    while len(picks) < count:
        n = rng.randint(1, 2)
        hist = tuple(rng.choice(vocab) for _ in range(n))
        if rng.random() < 0.3:
            hist = (BOS,) + hist[1:]
        picks.append(hist)
    return picks


def _check_normalized(lm, histories):
    symbols = sorted(lm.vocab, key=str) + [EOS, UNK]
    for hist in histories:
        total = sum(lm.prob(w, hist) for w in symbols)
        assert abs(total - 1.0) <= 1e-9, (hist, total)


def test_normalization_over_sampled_histories():
    refs = generate_reference_corpus(60, seed=3, min_segments=1)
    lm = train_trigram(refs)
    _check_normalized(lm, _sampled_histories(lm, random.Random(0)))


def _shuffled_copy(refs, seed, name):
    rng = random.Random(seed)
    utts = []
    for u in refs:
        toks = list(u.tokens)
        rng.shuffle(toks)
        utts.append(Utterance(u.id, tuple(toks)))
    return Corpus(name, tuple(utts))


def test_interpolated_normalization():
    # components share one vocabulary (same tokens, different order), so the
    # mixture's event space is well-defined and sums to 1
    refs = generate_reference_corpus(40, seed=4, name="a")
    a = train_trigram(refs)
    b = train_trigram(_shuffled_copy(refs, 1, "b"))
    assert a.vocab == b.vocab
    mix = interpolate([a, b], [0.3, 0.7])
    _check_normalized(mix, _sampled_histories(mix, random.Random(1)))


def test_interpolated_disjoint_vocab_overshoot_is_bounded():
    # with different vocabularies, every word outside a component's vocab
    # draws that component's whole unk mass, so the union-vocab sum
    # overshoots 1 by at most |vocab difference| * unk_prob
    a = train_trigram(generate_reference_corpus(40, seed=4, name="a"))
    b = train_trigram(corpus("b", ("u1", "我 是 好"), ("u2", "so good lah")))
    mix = interpolate([a, b], [0.3, 0.7])
    symbols = sorted(mix.vocab, key=str) + [EOS, UNK]
    total = sum(mix.prob(w, ()) for w in symbols)
    bound = (
        0.3 * len(mix.vocab - a.vocab) * a.unk_prob
        + 0.7 * len(mix.vocab - b.vocab) * b.unk_prob
    )
    assert 1.0 - 1e-9 <= total <= 1.0 + bound + 1e-9


def test_empty_utterance_logprob_is_end_given_start():
    lm = train_trigram(corpus("t", ("u1", "a b"), ("u2", "a")))
    assert sequence_logprob(lm, Utterance("e", ())) == pytest.approx(
        math.log(lm.prob(EOS, (BOS, BOS)))
    )


class _FixedLM:
    """Degenerate model assigning one constant probability."""

    vocab = frozenset()

    def __init__(self, p):
        self._p = p

    def prob(self, word, history):
        return self._p


def test_uniform_model_perplexity():
    uniform = _FixedLM(0.25)
    text = corpus("t", ("u1", "a b c"), ("u2", "我 是"))
    assert perplexity(uniform, text) == pytest.approx(4.0, rel=1e-12)


def test_interpolate_defaults_to_uniform_weights():
    a = train_trigram(corpus("a", ("u1", "a")))
    b = train_trigram(corpus("b", ("u1", "b")))
    assert interpolate([a, b]).weights == (0.5, 0.5)


def test_interpolate_one_hot_equals_component_exactly():
    a = train_trigram(generate_reference_corpus(30, seed=5, name="a"))
    b = train_trigram(corpus("b", ("u1", "so good")))
    one_hot = interpolate([a, b], [1.0, 0.0])
    probe = generate_reference_corpus(10, seed=6)
    for u in probe:
        assert sequence_logprob(one_hot, u) == sequence_logprob(a, u)


def test_interpolate_linear_combination():
    mix = InterpolatedLM([_FixedLM(0.2), _FixedLM(0.6)], [0.25, 0.75])
    assert mix.prob(eng("w"), ()) == pytest.approx(0.5, rel=1e-12)


def test_interpolate_validation():
    a = train_trigram(corpus("a", ("u1", "a")))
    with pytest.raises(ValidationError):
        interpolate([a], [-0.5])
    with pytest.raises(ValidationError):
        interpolate([a, a], [1.0])
    with pytest.raises(ValidationError):
        interpolate([a, a], [0.9, 0.3])
    with pytest.raises(ValidationError):
        interpolate([])


def test_interpolated_probability_linear_in_weights():
    a = train_trigram(generate_reference_corpus(40, seed=7, name="a"))
    b = train_trigram(generate_reference_corpus(40, seed=8, name="b"))
    rng = random.Random(2)
    vocab = sorted(a.vocab | b.vocab, key=str)
    for _ in range(25):
        w = rng.choice(vocab + [EOS])
        hist = tuple(rng.choice(vocab) for _ in range(rng.randint(0, 2)))
        points = []
        for lam in (0.2, 0.5, 0.8):
            points.append(interpolate([a, b], [lam, 1 - lam]).prob(w, hist))
        # three-point collinearity: equally spaced lambdas
        assert points[1] == pytest.approx((points[0] + points[2]) / 2, abs=1e-12)


def test_training_perplexity_not_worse_than_disjoint():
    train = generate_reference_corpus(120, seed=9, name="train")
    held_out = generate_reference_corpus(120, seed=10, name="heldout")
    lm = train_trigram(train)
    assert perplexity(lm, train) <= perplexity(lm, held_out)


def test_empty_corpus_rejected():
    with pytest.raises(ValidationError):
        train_trigram(Corpus("empty", ()))


def test_decode_nbest_lm_beats_acoustic():
    lm = train_trigram(corpus("t", ("u1", "好 好 好")))
    h1 = tuple(utt("x", "so good lah").tokens)
    h2 = (man("好"),)
    nbest = NBestList("u", (NBestEntry(h1, -2.0), NBestEntry(h2, -2.5)))
    # logprob(h2) is far higher under the Mandarin LM; with scale 1 it wins
    winner = decode_nbest(nbest, lm, 1.0)
    assert [st.token for st in winner.tokens] == list(h2)


def test_decode_nbest_scale_zero_uses_acoustic_only():
    lm = train_trigram(corpus("t", ("u1", "好")))
    nbest = NBestList(
        "u", (NBestEntry((eng("a"),), -2.0), NBestEntry((eng("b"),), -1.0))
    )
    winner = decode_nbest(nbest, lm, 0.0)
    assert [st.token.surface for st in winner.tokens] == ["b"]


def test_decode_nbest_tie_prefers_earliest():
    lm = train_trigram(corpus("t", ("u1", "好")))
    nbest = NBestList(
        "u", (NBestEntry((eng("a"),), -1.0), NBestEntry((eng("b"),), -1.0))
    )
    winner = decode_nbest(nbest, lm, 0.0)
    assert [st.token.surface for st in winner.tokens] == ["a"]


def test_decode_nbest_softmax_confidence():
    lm = train_trigram(corpus("t", ("u1", "好")))
    nbest = NBestList(
        "u",
        (NBestEntry((eng("a"),), 0.0), NBestEntry((eng("b"),), math.log(3.0))),
    )
    winner = decode_nbest(nbest, lm, 0.0)
    assert winner.tokens[0].confidence == pytest.approx(0.75)


def test_decode_nbest_language_bias_flips_winner():
    # two single-language candidates; raising the Mandarin component weight
    # past the analytically located crossing flips the decode winner
    man_lm = train_trigram(corpus("man", ("u1", "我 是 好"), ("u2", "好 好")))
    eng_lm = train_trigram(corpus("eng", ("u1", "so good lah"), ("u2", "good good")))
    cand_man = tuple(utt("x", "好 好").tokens)
    cand_eng = tuple(utt("x", "good good").tokens)
    nbest = NBestList("u", (NBestEntry(cand_eng, -1.0), NBestEntry(cand_man, -1.0)))

    def analytic_total(tokens, lam):
        # independent evaluation of acoustic + logprob under the mixture,
        # straight from the component models
        h1, h2 = BOS, BOS
        total = -1.0
        for w in list(tokens) + [EOS]:
            p = lam * man_lm.prob(w, (h1, h2)) + (1 - lam) * eng_lm.prob(w, (h1, h2))
            total += math.log(p)
            h1, h2 = h2, w
        return total

    grid = [k / 20 for k in range(1, 20)]
    winners = []
    for lam in grid:
        mix = interpolate([man_lm, eng_lm], [lam, 1 - lam])
        got = decode_nbest(nbest, mix, 1.0)
        expected = cand_man if analytic_total(cand_man, lam) > analytic_total(cand_eng, lam) else cand_eng
        assert tuple(st.token for st in got.tokens) == expected
        winners.append(expected is cand_man)
    assert winners[0] is False and winners[-1] is True
    assert winners == sorted(winners)  # single crossing


def test_decode_nbest_rejects_negative_scale():
    lm = train_trigram(corpus("t", ("u1", "好")))
    nbest = NBestList("u", (NBestEntry((eng("a"),), -1.0),))
    with pytest.raises(ValidationError):
        decode_nbest(nbest, lm, -0.1)


def test_nbest_requires_entries():
    with pytest.raises(ValidationError):
        NBestList("u", ())


def test_save_load_round_trip(tmp_path):
    refs = generate_reference_corpus(50, seed=11, name="train")
    lm = train_trigram(refs)
    path = tmp_path / "train.arpa.txt"
    save_lm(lm, path)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "# csrover ngram counts v1"
    body = [line for line in lines if not line.startswith("#")]
    assert body == sorted(body)
    loaded = load_lm(path)
    assert loaded.name == "train"
    rng = random.Random(3)
    vocab = sorted(lm.vocab, key=str)
    for _ in range(50):
        w = rng.choice(vocab + [EOS, UNK])
        hist = tuple(rng.choice(vocab + [BOS]) for _ in range(rng.randint(0, 2)))
        assert loaded.prob(w, hist) == lm.prob(w, hist)


def test_load_rejects_garbage(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("not an lm\n", encoding="utf-8")
    with pytest.raises(ValidationError):
        load_lm(path)
