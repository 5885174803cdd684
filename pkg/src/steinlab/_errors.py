"""Exception hierarchy shared by all steinlab modules."""


class SteinlabError(Exception):
    """Base class for all library errors."""


class DomainError(SteinlabError, ValueError):
    """Argument outside the mathematically valid domain."""


class RegimeError(SteinlabError, ValueError):
    """Law / operation mismatch: integrability flags or limit behavior
    do not match what the requested identity assumes."""


class UnsupportedFamilyError(SteinlabError, NotImplementedError):
    """The requested operation needs a sampler or closed form this
    radial family does not provide."""


class EvaluationError(SteinlabError, ArithmeticError):
    """A user-supplied integrand returned a non-finite value.

    Carries the offending abscissa in ``node``.
    """

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class DecayError(SteinlabError, RuntimeError):
    """Time integrand failed the empirical exponential-decay probe."""
