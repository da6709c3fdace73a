"""Exception types raised across the toolkit.

Every data-level failure maps to one of these; the CLI catches
``AmrkitError`` and exits with status 2 so callers can tell bad data
apart from bad usage.
"""


class AmrkitError(Exception):
    """Base class for all data errors raised by this package."""


# --- PENMAN parsing / graph validation ---

class GraphError(AmrkitError):
    """A graph is structurally invalid or its text form cannot be parsed."""

    def __init__(self, message: str, offset: int | None = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)


class EmptyInput(GraphError):
    pass


class UnbalancedParens(GraphError):
    pass


class DuplicateVariable(GraphError):
    pass


class DanglingReference(GraphError):
    pass


# --- smatch ---

class TooLarge(AmrkitError):
    """Exact alignment was requested for graphs beyond the variable bound."""


# --- featurizer / encoder ---

class BadDim(AmrkitError):
    pass


class DimMismatch(AmrkitError):
    pass


class EmptyBatch(AmrkitError):
    pass


class EmptyFile(AmrkitError):
    pass


class DuplicateId(AmrkitError):
    pass


class MalformedRecord(AmrkitError):
    def __init__(self, message: str, line: int):
        self.line = line
        super().__init__(f"{message} (line {line})")


# --- datasets / classifier ---

class BothMissing(AmrkitError):
    pass


class MissingField(AmrkitError):
    pass


class ClassTooSmall(AmrkitError):
    pass


class DegenerateLabels(AmrkitError):
    pass


class LengthMismatch(AmrkitError):
    pass


class MissingEmbedding(AmrkitError):
    pass


class NoSplit(AmrkitError):
    pass


class NoPositiveClass(AmrkitError):
    pass


class MissingScore(AmrkitError):
    pass


# --- sts ---

class ConstantInput(AmrkitError):
    pass


# --- complexity ---

class NoLetters(AmrkitError):
    pass


class NoWords(AmrkitError):
    pass


class NoArcs(AmrkitError):
    pass


class MalformedConllu(AmrkitError):
    def __init__(self, message: str, line: int):
        self.line = line
        super().__init__(f"{message} (line {line})")


class MissingProfile(AmrkitError):
    pass


class TooFewSamples(AmrkitError):
    pass
