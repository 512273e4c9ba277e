"""Exception types shared across the package."""


class CsRoverError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(CsRoverError):
    """Bad input: malformed text, files, configs, or violated preconditions."""


class TokenizeError(ValidationError):
    """Unsupported code point encountered while tokenizing."""

    def __init__(self, message: str, position: int, char: str):
        super().__init__(f"{message} (code point {char!r} at position {position})")
        self.position = position
        self.char = char


class MissingHypothesis(ValidationError):
    """A reference utterance has no hypothesis."""

    def __init__(self, utt_id: str):
        super().__init__(f"no hypothesis for utterance {utt_id!r}")
        self.utt_id = utt_id


class InternalError(CsRoverError):
    """An internal invariant was violated; indicates a bug, not bad input."""
