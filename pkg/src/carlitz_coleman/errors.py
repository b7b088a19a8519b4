"""Exception hierarchy shared by every module."""


class CarlitzError(Exception):
    """Base class for all errors raised by this package."""


class PrecisionError(CarlitzError):
    """Tracked precision is not enough to answer the question asked."""


class ValuationAmbiguityError(PrecisionError):
    """A value is zero to all known digits but is not known to be zero."""


class ConsistencyError(CarlitzError):
    """An internal identity that must hold exactly was violated."""


class BudgetError(CarlitzError):
    """A truncation or precision budget cannot sustain the requested work."""


class AdmissibilityError(CarlitzError):
    """Inputs fall outside the range where an operation is defined."""
