"""Exception taxonomy for the toolkit.

Everything raised on bad data derives from SpoofsenseError so CLI entry
points can catch one type and exit nonzero.  Genuine bugs (wrong argument
types and the like) stay ordinary ValueErrors/TypeErrors.
"""


class SpoofsenseError(Exception):
    pass


# --- audio i/o ---

class MalformedRiff(SpoofsenseError):
    pass


class UnsupportedEncoding(SpoofsenseError):
    pass


class TruncatedData(SpoofsenseError):
    pass


class InputTooShort(SpoofsenseError):
    pass


# --- F0 / perturbation ---

class EmptyAfterTrim(SpoofsenseError):
    pass


class NoVoicedRegion(SpoofsenseError):
    pass


class TooFewCycles(SpoofsenseError):
    pass


class ZeroAmplitude(SpoofsenseError):
    pass


class AlignmentMismatch(SpoofsenseError):
    pass


# --- entropy ---

class SequenceTooShort(SpoofsenseError):
    pass


class AllZeroPsd(SpoofsenseError):
    pass


# --- classifier ---

class BadDims(SpoofsenseError):
    pass


class DimMismatch(SpoofsenseError):
    pass


class EmptyDataset(SpoofsenseError):
    pass


# --- metrics ---

class DegenerateLabels(SpoofsenseError):
    pass


class IllPosedCostModel(SpoofsenseError):
    pass


# --- manifests / trials / embeddings ---

class ParseError(SpoofsenseError):
    """Malformed text input; carries the 1-based line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = "line %d: %s" % (line, message)
        super().__init__(message)
        self.line = line


class DuplicateUttId(SpoofsenseError):
    pass


class MissingMimickedTarget(SpoofsenseError):
    pass


class EmptyCategory(SpoofsenseError):
    pass


class MissingEmbedding(SpoofsenseError):
    pass


class ZeroVector(SpoofsenseError):
    pass


# --- feature store / model files ---

class BadMagic(SpoofsenseError):
    pass


class TruncatedPayload(SpoofsenseError):
    pass


class KindDimsMismatch(SpoofsenseError):
    pass


class MissingFeatureFile(SpoofsenseError):
    pass


# --- configuration ---

class ConfigError(SpoofsenseError):
    pass
