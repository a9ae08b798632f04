"""Exception hierarchy shared by every module."""


class MarkovError(Exception):
    """Base class for all errors raised by finmcmc."""


class InvalidInput(MarkovError, ValueError):
    """A value violates the invariants of the type being constructed."""


class SpaceMismatch(MarkovError, ValueError):
    pass


class NotIrreducible(MarkovError):
    pass


class NotAperiodic(MarkovError):
    pass


class SingularSystem(MarkovError):
    pass


class NotAnEigenvector(MarkovError, ValueError):
    pass


class CoordinateOutOfRange(MarkovError, IndexError):
    pass


class SiteOutOfRange(MarkovError, IndexError):
    pass


class EmptyAfterBurnIn(MarkovError, ValueError):
    pass
