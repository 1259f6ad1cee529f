"""Exception hierarchy shared by every module of the package."""


class RabiHetError(Exception):
    """Base class for all errors raised by rabi_het."""


class ParamsError(RabiHetError, ValueError):
    pass


class BadLambda(ParamsError):
    pass


class BadC0(ParamsError):
    pass


class RatioOutOfRange(ParamsError):
    pass


class DegenerateSpectrum(RabiHetError):
    pass


class DomainViolation(RabiHetError, ValueError):
    pass


class MeshTooCoarse(RabiHetError):
    pass


class OutOfDomain(RabiHetError, ValueError):
    pass


class RegimeMismatch(RabiHetError, ValueError):
    pass


class NewtonDiverged(RabiHetError):
    pass


class LeftDomain(NewtonDiverged):
    """An iterate left the positive quadrant u > 0, v > 0."""


class IllConditioned(RabiHetError):
    pass


class ContinuationStalled(RabiHetError):
    def __init__(self, lam, cause=None):
        self.lam = lam
        self.cause = cause
        msg = f"continuation stalled at lambda={lam!r}"
        if cause is not None:
            msg += f": {cause}"
        super().__init__(msg)


class InsufficientData(RabiHetError, ValueError):
    pass


class TailBelowFloor(RabiHetError):
    pass
