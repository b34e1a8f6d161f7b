"""Exception hierarchy shared across modules."""


class RDILError(Exception):
    pass


class ParseError(RDILError, ValueError):
    """Malformed dataset file. ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class EmptyDatasetError(ParseError):
    pass


class SchemaMismatchError(RDILError, ValueError):
    pass


class DegenerateError(RDILError, ValueError):
    """Training input that cannot produce a meaningful model."""


class DegenerateWeightsError(DegenerateError):
    pass


class DegenerateClassError(DegenerateError):
    pass
