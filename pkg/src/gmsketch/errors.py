"""Exception hierarchy shared by the sketch library."""


class GmSketchError(Exception):
    """Base class for all library errors."""


class EmptyVectorError(GmSketchError):
    """A sketch was requested for a vector with no positive entries."""


class InvalidWeightError(GmSketchError):
    """A weight was nonpositive, non-finite, or too small to invert safely."""


class InvalidParameterError(GmSketchError):
    """A generation parameter (k, delta, register count) is out of range."""


class MissingElementError(GmSketchError):
    """An element index was not present in the vector."""


class QueueExhaustedError(GmSketchError):
    """All k order statistics of an element queue have already been emitted."""


class MismatchedSketchError(GmSketchError):
    """Sketches differ in length k or in seed-scheme fingerprint."""


class IncompleteSketchError(GmSketchError):
    """A streaming sketch was finalized while some registers were unset."""

    def __init__(self, unset_registers):
        self.unset_registers = list(unset_registers)
        super().__init__(
            f"{len(self.unset_registers)} register(s) unset: "
            f"{self.unset_registers[:10]}"
        )


class InconsistentWeightError(GmSketchError):
    """A stream element reappeared with a different weight."""


class DatasetParseError(GmSketchError):
    """A sparse dataset file could not be parsed."""

    def __init__(self, message, line_number=None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class UnknownDistributionError(GmSketchError):
    """An unrecognized synthetic weight distribution was requested."""
