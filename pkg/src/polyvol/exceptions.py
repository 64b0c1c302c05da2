"""Exception hierarchy shared by every polyvol module."""


class PolyvolError(Exception):
    """Base class; ``code`` is the stable identifier used in CLI error objects."""

    code = "polyvol-error"


class ParseError(PolyvolError, ValueError):
    code = "parse-error"


class NonFiniteEntry(ParseError):
    code = "non-finite-entry"


class DomainError(PolyvolError, ValueError):
    code = "domain-error"


class RankDeficient(PolyvolError):
    code = "rank-deficient"


class SingularGram(PolyvolError, ArithmeticError):
    code = "singular-gram"


class NoInterior(PolyvolError):
    code = "no-interior"


class PossiblyUnbounded(PolyvolError):
    code = "possibly-unbounded"


class MaxIterations(PolyvolError):
    code = "max-iterations"


class UnbalancedMargins(DomainError):
    code = "unbalanced-margins"


class DimensionTooLarge(PolyvolError):
    code = "dimension-too-large"


class NumericalDegeneracy(PolyvolError, ArithmeticError):
    code = "numerical-degeneracy"


class ZeroAcceptance(PolyvolError):
    code = "zero-acceptance"
