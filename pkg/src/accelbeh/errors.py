"""Exception hierarchy.

Everything raised for bad input derives from :class:`DataError`; the CLI maps
it to exit code 2. :class:`InvariantError` signals a broken internal
guarantee (exit code 3).
"""


class AccelBehError(Exception):
    pass


class DataError(AccelBehError):
    """Invalid or inconsistent input data."""


class ParseError(DataError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class GapError(ParseError):
    pass


class StructuralError(ParseError):
    pass


class ValidationError(DataError):
    pass


class EmptyAlignmentError(DataError):
    pass


class FilterDesignError(DataError):
    pass


class SpecError(DataError):
    pass


class InputTooShortError(DataError):
    pass


class ShapeError(DataError):
    pass


class SchemaError(DataError):
    """Feature names/order at predict time differ from fit time."""


class InvariantError(AccelBehError):
    pass
