"""Exception hierarchy; each family maps to a distinct CLI exit code."""


class GdaidsError(Exception):
    exit_code = 1


class ConfigError(GdaidsError, ValueError):
    exit_code = 2


class DataError(GdaidsError, ValueError):
    exit_code = 3


class ParseError(DataError):
    """Malformed input line. Carries the 1-based line number."""

    def __init__(self, message, line=None, source=None):
        self.line = line
        self.source = source
        where = ""
        if source is not None:
            where += f"{source}:"
        if line is not None:
            where += f"{line}: "
        elif where:
            where += " "
        super().__init__(where + message)


class NumericError(GdaidsError, ArithmeticError):
    exit_code = 4


class NotPositiveDefiniteError(NumericError):
    pass
