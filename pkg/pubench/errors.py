"""Exception hierarchy for pubench.

Every error raised on purpose by the library derives from ``PuBenchError`` so
the CLI can map it to a validation-failure exit code.
"""

from pathlib import Path


class PuBenchError(Exception):
    """Base class for all pubench errors."""


class InvalidSpecError(PuBenchError, ValueError):
    """A dataset, mixture or model description violates its invariants."""


class DimensionMismatchError(PuBenchError, ValueError):
    """Array shapes that must agree do not."""


class NonFiniteError(PuBenchError, ArithmeticError):
    """A loss, gradient or parameter update produced NaN or infinity.

    The harness treats this as the signal to abort a trial.
    """


class DegenerateDrawError(PuBenchError):
    """A PU draw left the positive or the unlabeled set empty."""


class DegenerateSplitError(PuBenchError):
    """A validation split left one of its four parts empty."""


class MissingOracleError(PuBenchError):
    """Hidden labels were requested but are absent or not allowed."""


class ConfigError(PuBenchError, ValueError):
    """An experiment or synthesis config is invalid."""


class CsvFormatError(PuBenchError, ValueError):
    """A CSV file does not match the documented schema."""

    def __init__(
        self,
        path: str | Path,
        message: str,
        row: int | None = None,
        column: str | None = None,
    ) -> None:
        self.path = Path(path)
        self.row = row
        self.column = column
        location = str(self.path)
        if row is not None:
            location += f", row {row}"
        if column is not None:
            location += f", column {column!r}"
        super().__init__(f"{location}: {message}")
