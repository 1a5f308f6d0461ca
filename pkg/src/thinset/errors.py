"""Exception hierarchy shared by all thinset modules."""


class ThinsetError(Exception):
    """Base class; ``name`` is what the CLI reports on exit code 3."""

    @property
    def name(self) -> str:
        return type(self).__name__


class DomainError(ThinsetError, ValueError):
    pass


class AliasError(ThinsetError, ValueError):
    pass


class PreconditionError(ThinsetError, ValueError):
    pass


class MeanNotZero(ThinsetError, ValueError):
    pass


class CapExceeded(ThinsetError):
    """An enumeration budget ran out.

    ``partial`` carries whatever the operation could still certify: a lower
    bound on a count, or a partial (valid but not maximal) family.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class Infeasible(ThinsetError):
    pass


class ToleranceNotMet(ThinsetError):
    def __init__(self, message, primal=None, dual=None):
        super().__init__(message)
        self.primal = primal
        self.dual = dual


class CertificateFailure(ThinsetError):
    pass
