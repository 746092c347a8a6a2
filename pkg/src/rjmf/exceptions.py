"""Exception types raised by rjmf."""


class RatingsError(ValueError):
    """Base class for problems with rating data."""


class ParseError(RatingsError):
    def __init__(self, lineno: int, line: str, reason: str):
        self.lineno = lineno
        self.line = line
        super().__init__(f"line {lineno}: {reason}: {line!r}")


class DuplicateRatingError(RatingsError):
    def __init__(self, lineno: int, user, item):
        self.lineno = lineno
        self.user = user
        self.item = item
        super().__init__(f"line {lineno}: duplicate rating for user {user}, item {item}")


class EmptyDatasetError(RatingsError):
    pass


class UndefinedMetricError(ValueError):
    """A metric or loss was requested over an empty rating set."""


class SingularSystemError(ArithmeticError):
    """A ridge normal system could not be factorized."""

    def __init__(self, side: str, index: int):
        self.side = side
        self.index = index
        super().__init__(f"singular normal equations for {side} {index}")
