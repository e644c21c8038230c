"""Exception hierarchy shared across the toolkit."""


class SubqaError(Exception):
    """Base class for all toolkit errors."""


# --- SRT codec ---

class SrtParseError(SubqaError):
    """Structural problem in an SRT byte stream; carries the 1-based block number."""

    def __init__(self, message: str, block: int):
        super().__init__(f"block {block}: {message}")
        self.block = block


class MalformedTimecode(SrtParseError):
    pass


class NonMonotonicIndex(SrtParseError):
    pass


class EmptyCueText(SrtParseError):
    pass


# --- transcript interchange ---

class SchemaViolation(SubqaError):
    """Missing field or wrong type in the interchange JSON; names the field."""

    def __init__(self, field: str, message: str = ""):
        super().__init__(f"field '{field}'" + (f": {message}" if message else ""))
        self.field = field


class TimingViolation(SubqaError):
    pass


# --- metrics ---

class EmptyReference(SubqaError):
    pass


class ZeroDuration(SubqaError):
    pass


class ScorerFailure(SubqaError):
    def __init__(self, message: str, ref: str = "", hyp: str = ""):
        super().__init__(message)
        self.ref = ref
        self.hyp = hyp


# --- entities ---

class UnknownCategory(SubqaError):
    pass


class MissingField(SubqaError):
    pass


class EmptyEntityList(SubqaError):
    pass


# --- segmenter ---

class InfeasibleSegment(SubqaError):
    """A single word on its own violates a hard readability constraint."""

    def __init__(self, message: str, word=None):
        super().__init__(message)
        self.word = word


class Unsplittable(SubqaError):
    pass


# --- reviewer ---

class ProviderUnreachable(SubqaError):
    pass


class ContractViolation(SubqaError):
    pass


class CountMismatch(SubqaError):
    pass


class TooFewSamples(SubqaError):
    pass


# --- harness ---

class NonPositiveDuration(SubqaError):
    pass


class MissingRtfx(SubqaError):
    pass


class SpecInvalid(SubqaError):
    pass


class IoFailure(SubqaError):
    pass


# --- job service ---

class InvalidInputs(SubqaError):
    pass


class StoreUnavailable(SubqaError):
    pass


class JobNotFound(SubqaError):
    pass
