"""Exception hierarchy shared across the package."""


class StokesDiffError(Exception):
    """Base class for all package errors."""


# series
class ZeroLeadingTerm(StokesDiffError, ZeroDivisionError):
    pass


class InsufficientTruncation(StokesDiffError):
    pass


class RamificationCapExceeded(StokesDiffError):
    pass


# exponents
class EqualExponents(StokesDiffError):
    pass


class NotRootOfUnity(StokesDiffError):
    pass


class InvalidArc(StokesDiffError, ValueError):
    pass


# special
class PoleAt(StokesDiffError, ValueError):
    def __init__(self, z):
        super().__init__(f"Gamma has a pole at {z}")
        self.z = z


class RayHitsPole(StokesDiffError, ValueError):
    pass


class IntegerInput(StokesDiffError, ValueError):
    pass


# diffmod
class NotMild(StokesDiffError):
    pass


class ClusteredEigenvalues(StokesDiffError):
    pass


class UnsupportedFormalStructure(StokesDiffError):
    def __init__(self, message, block=None):
        super().__init__(message)
        self.block = block


# sectorial
class SeedDivergence(StokesDiffError):
    pass


class StokesLineInArc(StokesDiffError):
    pass


class NormalizationViolated(StokesDiffError):
    pass


class QuadratureNoConvergence(StokesDiffError):
    pass


class MissingCompanions(StokesDiffError):
    pass


class InsufficientSamples(StokesDiffError):
    pass


# stokes
class FullCircleArc(StokesDiffError):
    pass


class CertificationFailed(StokesDiffError):
    def __init__(self, message, overlap=None):
        super().__init__(message)
        self.overlap = overlap


class InconsistentData(StokesDiffError):
    pass


# parser
class ParseError(StokesDiffError):
    """Syntax error with a 1-based source position."""

    def __init__(self, message, line, column, expected=None, found=None):
        self.line = line
        self.column = column
        self.expected = expected
        self.found = found
        detail = message
        if expected is not None:
            detail += f" (expected {expected}, found {found!r})"
        super().__init__(f"line {line}, column {column}: {detail}")


class ExpansionError(StokesDiffError):
    pass


class NonMildExponent(StokesDiffError):
    pass
