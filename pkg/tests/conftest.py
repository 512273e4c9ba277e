import pytest

from csrover.tokens import Corpus, LanguageTag, Token, Utterance, tokenize_mixed


def eng(surface: str) -> Token:
    return Token(surface, LanguageTag.ENG)


def man(surface: str) -> Token:
    return Token(surface, LanguageTag.MAN)


def utt(utt_id: str, text: str) -> Utterance:
    return Utterance(utt_id, tuple(tokenize_mixed(text)))


def corpus(name: str, *entries: tuple[str, str]) -> Corpus:
    return Corpus(name, tuple(utt(utt_id, text) for utt_id, text in entries))


@pytest.fixture
def tea_corpus() -> Corpus:
    return corpus("tea", ("u1", "我 like 茶"))
