"""Exception hierarchy shared by all czic modules."""


class CzicError(Exception):
    """Base class for every error raised by czic."""


# probability tensors
class NegativeMass(CzicError):
    pass


class NotNormalized(CzicError):
    pass


class DuplicateAxis(CzicError):
    pass


class UnknownAxis(CzicError):
    pass


class OverlappingAxisSets(CzicError):
    pass


class MissingAxis(CzicError):
    pass


# channel ingestion and assembly
class ParseError(CzicError):
    pass


class BadShape(CzicError):
    pass


class RowNotNormalized(CzicError):
    pass


class ShapeMismatch(CzicError):
    pass


# optimization
class NotNoiseless(CzicError):
    """Raised when a formula that needs Y2 to be a relabeling of X2 gets a noisy link."""


class Infeasible(CzicError):
    """No scheme in the searched family reaches the requested R2 target."""


class BudgetExceeded(CzicError):
    """An enumeration or a codebook would exceed its configured size budget."""


class TooLarge(CzicError):
    """Brute-force oracle refused an instance above its size guard."""


# coding simulation
class DegenerateScheme(CzicError):
    pass


class EncodingFailure(CzicError):
    """The selected bin holds no codeword jointly typical with the interference."""


class DecodeFailure(CzicError):
    """Zero or several typical candidates at some decoding stage."""
