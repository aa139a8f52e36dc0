"""Exception types raised by the library."""


class LyapdetError(Exception):
    """Base class for all library errors."""


class ConfigError(LyapdetError, ValueError):
    """A system or run configuration is malformed or a lookup failed."""


class NormalizationError(ConfigError):
    """A g-function does not sum to one over preimages."""


class ReducibleShiftError(LyapdetError, ValueError):
    """The operation needs an irreducible transition matrix."""


class NotDominated(LyapdetError, ArithmeticError):
    """A matrix (product) has no simple, real, strictly dominant eigenvalue.

    ``word`` is set by the trace engine to the periodic block whose cocycle
    product failed the check.
    """

    def __init__(self, message, word=None):
        super().__init__(message if word is None else f"{message} (orbit word {word_str(word)})")
        self.word = word


class DegenerateDenominator(LyapdetError, ArithmeticError):
    pass


class NoRoot(LyapdetError, ArithmeticError):
    pass


class Insufficient(LyapdetError, ValueError):
    """Too few usable coefficients for a decay fit."""


def word_str(word):
    if word is None:
        return ""
    if all(s < 10 for s in word):
        return "".join(str(s) for s in word)
    return ",".join(str(s) for s in word)
