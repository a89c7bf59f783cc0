"""Exception types shared across the package."""


class DataError(Exception):
    """Malformed or inconsistent input data (corpus, parses, vectors)."""


class CorpusFormatError(DataError):
    """A file violated one of the supported text formats."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:"
        if line is not None:
            where += f"{line}: "
        elif path is not None:
            where += " "
        super().__init__(where + message)


class NumericalError(Exception):
    """Training or inference produced non-finite numbers."""
