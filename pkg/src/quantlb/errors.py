"""Exception hierarchy shared across the package."""


class QuantLBError(Exception):
    """Base class for every error raised by quantlb."""


class EmptyInterval(QuantLBError, ValueError):
    pass


class InvalidInterval(QuantLBError, ValueError):
    pass


class DuplicateItem(QuantLBError, ValueError):
    pass


class NotInStream(QuantLBError, KeyError):
    pass


class NoSuccessor(QuantLBError, LookupError):
    pass


class NoPredecessor(QuantLBError, LookupError):
    pass


class EmptySummary(QuantLBError, ValueError):
    pass


class EmptyStream(QuantLBError, ValueError):
    pass


class LengthMismatch(QuantLBError, ValueError):
    pass


class ArrayMismatch(QuantLBError, ValueError):
    """Restricted item arrays of the two runs have different sizes.

    Only a summary that is not comparison-based can trigger this.
    """


class DegenerateArray(QuantLBError, ValueError):
    pass


class InvalidEpsilon(QuantLBError, ValueError):
    pass


class PreconditionViolated(QuantLBError, AssertionError):
    """An adversary precondition failed at a recursion-tree node.

    ``path`` is the node path from the root, e.g. ``"root/L/R"``.
    """

    def __init__(self, message: str, path: str = "") -> None:
        super().__init__(f"{message} (node {path})" if path else message)
        self.path = path


class SummaryNotStreaming(QuantLBError, TypeError):
    pass


class SubjectLacksRankQuery(QuantLBError, TypeError):
    pass
