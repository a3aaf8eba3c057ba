"""Exception types raised by the library."""


class Su2FisherError(ValueError):
    """Base class for all input/domain errors raised by su2fisher."""


class StateFamilyError(Su2FisherError):
    """A probe-state family was requested with an invalid photon number or index."""


class OrderError(Su2FisherError):
    """A two-particle quantity was requested for a state with fewer than two photons."""


class ScaleError(Su2FisherError):
    """An oracle was asked to run beyond its brute-force size guard."""


class ConversionError(Su2FisherError):
    """A matrix could not be converted because it is not (special) unitary."""


class DomainError(Su2FisherError):
    """Angular-momentum quantum numbers are outside their lattice."""


class UnknownProtocolError(Su2FisherError):
    """Protocol tag not recognised by the bound calculator."""


class SpecError(Su2FisherError):
    """A CLI state or unitary input string could not be parsed."""
