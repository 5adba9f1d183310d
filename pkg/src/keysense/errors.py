"""Exception hierarchy shared across the package.

Data problems (bad records, empty orbits, missing edges) and numeric
problems (optimizers or iterations that fail to converge) are kept on
separate branches so callers can map them to distinct exit codes.
"""

from __future__ import annotations


class KeysenseError(Exception):
    """Base class for all errors raised by this package."""


class DataError(KeysenseError):
    """Invalid, inconsistent, or missing input data."""


class MalformedRecordError(DataError):
    """A record in the input stream could not be parsed."""

    def __init__(self, line: int, reason: str):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class DuplicateDocumentError(DataError):
    """Two records carry the same document id."""

    def __init__(self, doc_id: str, line: int | None = None):
        self.doc_id = doc_id
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"duplicate document id {doc_id!r}{where}")


class EmptyOrbitError(DataError):
    """A concept has no documents under the requested filter."""


class NoEdgeError(DataError):
    """Two concepts never co-occur, so pairwise quantities are undefined."""


class ArtifactError(DataError):
    """An on-disk artifact is missing, malformed, or from a different run."""


class ConvergenceError(KeysenseError):
    """An iterative numeric procedure failed to converge."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        self.diagnostics = dict(diagnostics or {})
        if self.diagnostics:
            detail = ", ".join(f"{k}={v}" for k, v in self.diagnostics.items())
            message = f"{message} [{detail}]"
        super().__init__(message)
