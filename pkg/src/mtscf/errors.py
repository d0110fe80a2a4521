"""Exception hierarchy shared across the package."""


class MtscfError(Exception):
    """Base class for all errors raised by this package."""


class StructuralError(MtscfError, ValueError):
    """Shapes or identifiers of the inputs do not line up."""


class FitError(MtscfError):
    """A classifier could not be fitted on the given data."""


class PredictionError(MtscfError):
    """A classifier failed to produce a valid probability vector."""


class UndefinedMetricError(MtscfError):
    """A metric has no defined value for the given reports."""


class ParseError(MtscfError, ValueError):
    """Malformed input file. ``line`` is 1-based, or None when not line specific."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        self.detail = message
        super().__init__(f"line {line}: {message}" if line is not None else message)


class HeaderError(ParseError):
    pass


class MissingDataSectionError(ParseError):
    pass


class RaggedSeriesError(ParseError):
    pass


class DimensionMismatchError(ParseError):
    pass


class UnknownLabelError(ParseError):
    pass


class NonNumericValueError(ParseError):
    pass


class UnequalLengthError(ParseError):
    pass


class TimestampsUnsupportedError(ParseError):
    pass


class FieldCountError(ParseError):
    pass


class DuplicateIdError(ParseError):
    pass
