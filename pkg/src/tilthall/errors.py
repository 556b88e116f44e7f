"""Exception types shared across the package."""


class TiltHallError(Exception):
    """Base class for all package errors."""


class NonPrime(TiltHallError):
    pass


class UnsupportedSize(TiltHallError):
    pass


class ShapeMismatch(TiltHallError):
    pass


class Singular(TiltHallError):
    pass


class InfiniteDimensional(TiltHallError):
    pass


class MalformedRelation(TiltHallError):
    pass


class NonAssociative(TiltHallError):
    pass


class AlgebraMismatch(TiltHallError):
    pass


class InvalidModule(TiltHallError):
    pass


class CapExceeded(TiltHallError):
    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class NotResolvingSpec(TiltHallError):
    pass


class NotRigid(TiltHallError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class CoresolutionNotFound(TiltHallError):
    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class NotFunctorial(TiltHallError):
    pass


class ApproximationTestInconclusive(TiltHallError):
    pass


class AlgebraTooLarge(TiltHallError):
    pass


class IncompleteCatalog(TiltHallError):
    pass


class NotPLE1(TiltHallError):
    pass


class CommutationNotCertified(TiltHallError):
    pass


class TruncationOverflow(TiltHallError):
    pass


class BClassNotInCatalog(TiltHallError):
    pass


class NotGPdim1(TiltHallError):
    pass


class UnsupportedSpec(TiltHallError):
    pass


class ParseError(TiltHallError):
    pass


class CacheCorrupt(TiltHallError):
    pass


class HashMismatch(TiltHallError):
    pass
