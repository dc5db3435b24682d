"""Exception hierarchy.

Every error raised by the library derives from :class:`EigenEdgeError`.  The
CLI maps the three families below onto process exit codes.
"""


class EigenEdgeError(Exception):
    """Base class for all library errors."""


# --- configuration / input errors (CLI exit code 2) ---

class ConfigError(EigenEdgeError, ValueError):
    pass


class ShapeError(EigenEdgeError, ValueError):
    pass


class DomainError(EigenEdgeError, ValueError):
    pass


class MomentUnavailableError(EigenEdgeError, ValueError):
    pass


# --- numerical / degeneracy errors (CLI exit code 3) ---

class NumericError(EigenEdgeError, ArithmeticError):
    pass


class RankError(NumericError):
    pass


class EigengapError(NumericError):
    pass


class DegenerateError(NumericError):
    pass


class ConvergenceError(NumericError):
    pass


class QualityError(NumericError):
    """Too many degenerate replicates or bootstrap draws were dropped."""


# --- I/O errors (CLI exit code 4) ---

class FormatError(EigenEdgeError, IOError):
    pass
