class IsodistError(Exception):
    """Base class for library errors."""


class InvalidStateError(IsodistError, ValueError):
    """An input matrix or spectrum violates its invariants."""


class RankAmbiguityError(InvalidStateError):
    """The numerical rank of a state cannot be decided at the given tolerance."""


class NotIsospectralError(IsodistError, ValueError):
    """Two states (or a state and a spectrum) do not share a spectrum."""


class NotTangentError(IsodistError, ValueError):
    """A matrix is not tangent to S(sigma) at the given base point."""


class RetractionError(IsodistError, ArithmeticError):
    """Retraction onto S(sigma) failed because the input is rank deficient."""
