"""Exception types shared across the package.

Each error carries a stable ``exit_code`` used by the command line front-end:
1 parse, 2 validation, 3 computation, 4 truncation.
"""


class RhtError(Exception):
    exit_code = 3


class CompositionNotZero(RhtError):
    pass


class NotAChainMap(RhtError):
    pass


class NotInvertible(RhtError):
    def __init__(self, message, defect=0):
        super().__init__(message)
        self.defect = defect


class QuasiIsoDefect(RhtError):
    pass


class InfiniteRank(RhtError):
    pass


class NonzeroDifferential(RhtError):
    exit_code = 2


class UnsupportedModel(RhtError):
    """No strict finite module model of the target is available."""


class UnsafeTruncation(RhtError):
    exit_code = 4


class ValidationError(RhtError):
    exit_code = 2


class DegreeError(ValidationError):
    pass


class DslError(RhtError):
    """Parse-phase failure with a source position."""

    exit_code = 1

    def __init__(self, message, line=None, col=None):
        where = f"{line}:{col}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line
        self.col = col


class DslSyntaxError(DslError):
    pass


class DslNameError(DslError):
    pass


class DslDegreeError(DslError):
    pass
