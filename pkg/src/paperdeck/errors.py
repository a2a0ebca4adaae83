"""Exception hierarchy for the paperdeck pipeline.

Every error raised by the library derives from :class:`PaperDeckError`, so
callers (notably the CLI) can map failures to exit codes in one place.
"""


class PaperDeckError(Exception):
    """Base class for all paperdeck errors."""


class MalformedXml(PaperDeckError):
    """The paper XML is not well formed."""

    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column


class SchemaViolation(PaperDeckError):
    """Well-formed XML that breaks the paper document contract."""


class EmptySlides(PaperDeckError):
    """A slides file with no usable lines."""


class DimensionMismatch(PaperDeckError):
    """Vector or cache dimensions disagree."""


class CacheMiss(PaperDeckError):
    """A vector-cache lookup failed; the message names the missing key."""

    def __init__(self, key, text=None):
        detail = f"vector cache has no entry for key {key}"
        if text is not None:
            detail += f" (text: {text[:60]!r})"
        super().__init__(detail)
        self.key = key


class LengthMismatch(PaperDeckError):
    """Embedding count does not match the sentence count."""


class SchemaMismatch(PaperDeckError):
    """Feature matrix does not match the model's feature schema."""


class EmptyTrainingSet(PaperDeckError):
    """Training requested with zero rows."""


class EmptyReference(PaperDeckError):
    """Labeling requested with no reference slide sentences."""


class TooLarge(PaperDeckError):
    """Instance exceeds the exact solver's size cap."""


class TooFewPairs(PaperDeckError):
    """Size-model regression needs at least one pair per coefficient."""


class EmptyCorpus(PaperDeckError):
    """Corpus evaluation requested with zero pairs."""


class InternalInvariantError(PaperDeckError):
    """A pipeline invariant was violated; indicates a bug, not bad input."""
