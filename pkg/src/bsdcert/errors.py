"""Exception hierarchy."""


class BSDCertError(Exception):
    """Base class for all package errors."""


class SingularCurve(BSDCertError, ValueError):
    pass


class NotMinimalAtP(BSDCertError):
    pass


class BadTwist(BSDCertError, ValueError):
    pass


class PrecisionExhausted(BSDCertError, ArithmeticError):
    pass


class ConsistencyError(BSDCertError):
    """Numerical data contradicts an assumption (e.g. the assumed analytic rank)."""


class ReconstructionFailed(BSDCertError):
    pass


class BudgetExceeded(BSDCertError):
    """A point search hit its time cap; the search is inconclusive."""


class RankOutOfScope(BSDCertError, ValueError):
    pass


class Inconclusive(BSDCertError):
    pass


class ParseError(BSDCertError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class ValidationError(BSDCertError, ValueError):
    pass


class SoundnessViolation(ConsistencyError):
    """A proven upper bound fell below ord_p(Sha_an): a bug or a counterexample."""
