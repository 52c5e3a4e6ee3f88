"""Exception types shared across the package.

Every error carries a short machine-readable ``code`` so the command line
front end can map it to an exit status and a diagnostic.
"""


class SkewError(Exception):
    code = "ERROR"


class NotPureError(SkewError, ValueError):
    code = "NOT_PURE"


class NotInvertibleError(SkewError, ValueError):
    code = "NOT_INVERTIBLE"


class SpectralRadiusError(SkewError, ValueError):
    code = "SPECTRAL_RADIUS_NOT_ONE"


class SpectrumError(SkewError, ValueError):
    code = "SPECTRUM_NOT_ONE"


class NotNilpotentError(SkewError, ValueError):
    code = "NOT_NILPOTENT"


class RankDeficientError(SkewError, ValueError):
    code = "RANK_DEFICIENT"


class NotIrreducibleError(SkewError, ValueError):
    code = "NOT_IRREDUCIBLE"


class EmptyInputError(SkewError, ValueError):
    code = "EMPTY_INPUT"


class NotFullDimensionalError(SkewError, ValueError):
    code = "NOT_FULL_DIMENSIONAL"


class TwistedInputError(SkewError, ValueError):
    code = "TWISTED_INPUT"


class NotInvariantError(SkewError, ValueError):
    code = "NOT_INVARIANT"


class ThresholdNotMetError(SkewError, ValueError):
    code = "THRESHOLD_NOT_MET"


class PreconditionError(SkewError, ValueError):
    code = "PRECONDITION"


class ParseError(SkewError):
    code = "PARSE_ERROR"


class ValidationError(SkewError):
    code = "VALIDATION_ERROR"


class InvariantBreach(SkewError, AssertionError):
    """An internal consistency check failed; always a bug."""

    code = "INTERNAL"
