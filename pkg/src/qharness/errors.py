"""Exception hierarchy shared by all qharness modules.

Every domain error carries its class name, which the CLI prints on stderr.
"""


class QHError(Exception):
    """Base class for all domain errors raised by the toolkit."""


class ZeroDenominator(QHError):
    pass


class ZeroScale(QHError):
    pass


class SingularMap(QHError):
    pass


class PoleInInterval(QHError):
    pass


class DegenerateCovariance(QHError):
    pass


class NonpositiveChiTilde(QHError):
    pass


class WrongOrientation(QHError):
    pass


class SignViolation(QHError):
    pass


class NonpositiveDenominator(QHError):
    pass


class NonpositiveK(QHError):
    def __init__(self, message, path_index=None):
        super().__init__(message)
        self.path_index = path_index


class NonpositiveKappaSq(QHError):
    pass


class InfeasibleTarget(QHError):
    pass


class InvalidParams(QHError):
    pass


class DomainViolation(QHError):
    pass


class InvalidDescriptor(QHError):
    pass


class GridMismatch(QHError):
    pass


class TooLarge(QHError):
    pass


class EmptyEnsemble(QHError):
    pass


class SingularDesign(QHError):
    pass


class MismatchedTriples(QHError):
    pass
