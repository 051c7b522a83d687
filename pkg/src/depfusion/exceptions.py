"""Exception hierarchy.

Everything derives from :class:`DepfusionError`, which is a ``ValueError`` so
callers that only care about bad input can catch the builtin.
"""


class DepfusionError(ValueError):
    pass


class EmptyInputError(DepfusionError):
    pass


class ParseError(DepfusionError):
    """Malformed input file. ``line`` is 1-based (``None`` for whole-file problems)."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class RaggedRowError(ParseError):
    pass


class NonNumericCellError(ParseError):
    pass


class ArityError(ParseError):
    pass


class NonMonotoneTimestampError(ParseError):
    pass


class MalformedTimeError(ParseError):
    pass


class MissingFieldError(ParseError):
    pass


class ValenceRangeError(ParseError):
    pass


class DuplicateIdError(ParseError):
    pass


class LabelRangeError(ParseError):
    pass


class MissingLabelError(DepfusionError):
    def __init__(self, session_id):
        self.session_id = session_id
        super().__init__(f"session {session_id!r} has no phq8 label")


class MissingFeaturesError(DepfusionError):
    def __init__(self, session_id, modality):
        self.session_id = session_id
        self.modality = modality
        super().__init__(f"session {session_id!r} has no {modality} features")


class DimensionMismatchError(DepfusionError):
    pass


class ZeroDurationError(DepfusionError):
    pass


class StrategyMismatchError(DepfusionError):
    pass


class MissingSplitError(DepfusionError):
    pass


class ModelFormatError(DepfusionError):
    pass


class CorruptModelError(ModelFormatError):
    pass


class VersionMismatchError(ModelFormatError):
    pass
