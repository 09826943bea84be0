"""Exception hierarchy shared by every layer of the package."""


class EOQuadError(Exception):
    """Base class for all errors raised by eoquad."""

    exit_code = 1


class ParseError(EOQuadError):
    exit_code = 2


class DescriptorMismatch(EOQuadError):
    pass


class NotDivisible(EOQuadError):
    pass


class NotIntegral(EOQuadError):
    pass


class InapplicableSubstitution(EOQuadError):
    pass


class NotComaximal(EOQuadError):
    pass


class VerificationError(EOQuadError):
    """An exact check failed; ``detail`` names the first offending item."""

    exit_code = 3

    def __init__(self, message, detail=None):
        super().__init__(message)
        self.detail = detail


class WitnessError(EOQuadError):
    """A supplied witness (word, orientation datum, certificate) failed ingestion."""

    exit_code = 4


class BoundExceeded(EOQuadError):
    exit_code = 5
