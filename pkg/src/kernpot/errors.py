"""Exception hierarchy.

Two broad families matter for the CLI exit-code mapping: ``DataError``
(malformed inputs, broken files, contract violations -> exit 2) and
``NumericalError`` (a computation that cannot proceed -> exit 3).
"""


class KernpotError(Exception):
    """Base class for all toolkit errors."""


class DataError(KernpotError):
    """Invalid input data, file contents, or argument combination."""


class NumericalError(KernpotError):
    """A numerical procedure failed or is undefined for the given input."""


# -- dataset / configuration ------------------------------------------------

class EmptyDataset(DataError):
    pass


class BadRatios(DataError):
    pass


class UnknownSpecies(DataError):
    pass


class SingularCell(DataError):
    pass


class NonFiniteCoordinate(DataError):
    pass


class LengthMismatch(DataError):
    pass


# -- featurization / kernels -------------------------------------------------

class CellTooSmall(DataError):
    """A periodic cell vector is shorter than twice the descriptor cutoff."""


class DimensionMismatch(DataError):
    pass


class DegenerateDistances(NumericalError):
    """Median pairwise distance is zero; no length-scale can be inferred."""


class NotSymmetric(DataError):
    pass


# -- regression --------------------------------------------------------------

class SingularGram(NumericalError):
    """Factorization of (G + lambda I) failed even after jitter escalation."""


class AlphaAtBoundary(DataError):
    """Explicit multi-weight solve requested with alpha outside [0, 1]."""


class RankDeficientComposition(NumericalError):
    pass


class MissingSpeciesBaseline(DataError):
    pass


# -- persistence --------------------------------------------------------------

class FormatError(DataError):
    pass


class ChecksumError(DataError):
    pass


class VersionMismatch(DataError):
    pass


class IoError(DataError):
    pass
