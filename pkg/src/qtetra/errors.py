"""Exception hierarchy shared by all modules."""


class QtetraError(Exception):
    pass


class DivisionByZero(QtetraError, ZeroDivisionError):
    pass


class BadArity(QtetraError, ValueError):
    pass


ArityMismatch = BadArity


class BadIndex(QtetraError, IndexError):
    pass


class NonInjectiveMap(QtetraError, ValueError):
    pass


class NotInvertible(QtetraError, ValueError):
    pass


class TraceDiverges(QtetraError, ArithmeticError):
    """The diagonal sum over the traced exponent is infinite or ill-defined."""


class NonMonomialTrace(QtetraError, ArithmeticError):
    """The traced term would carry a support constraint outside the monomial class."""


class ZeroParamMonomial(QtetraError, ValueError):
    pass


class ParamMismatch(QtetraError, ValueError):
    pass


class DegreeDecreasing(QtetraError, ValueError):
    pass


class UngradedTerm(QtetraError, ValueError):
    pass


class UnknownSuite(QtetraError, KeyError):
    pass


class ExprSyntaxError(QtetraError, SyntaxError):
    """Parse failure; ``pos`` is the 0-based character offset."""

    def __init__(self, msg, pos):
        super().__init__(f"{msg} at position {pos}")
        self.pos = pos
