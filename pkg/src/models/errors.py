from typing import Optional


class FrameworkError(Exception):
    """Base class for every error raised by the simulator.

    Attributes:
        message (str): Explanation of the error.
        category (int): Process exit code used by `main.py`.
    """

    category: int = 1

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class ConfigurationError(FrameworkError):
    """Invalid hyperparameter, stream definition or transform id."""

    category = 2


class ConfigIssue:
    """One problem found while validating a run config."""

    def __init__(self, section: str, key: str, line: Optional[int], problem: str):
        self.section = section
        self.key = key
        self.line = line
        self.problem = problem

    def __str__(self) -> str:
        where = f"line {self.line}" if self.line is not None else "missing"
        return f"[{self.section}] {self.key} ({where}): {self.problem}"


class ConfigValidationError(ConfigurationError):
    """Run config text failed validation; carries every issue found."""

    def __init__(self, issues: list[ConfigIssue]):
        self.issues = issues
        super().__init__("; ".join(str(issue) for issue in issues))


class InputShapeError(FrameworkError):
    """Array dimensions disagree with the model or with each other."""

    category = 3


class EmptyInputError(FrameworkError):
    """An operation that averages over samples received none."""

    category = 3


class InsufficientDataError(FrameworkError):
    """A statistical test received an empty sample."""

    category = 3


class DatasetFormatError(FrameworkError):
    """An IDX file is malformed.

    Attributes:
        path (str): Offending file.
        offset (int): Byte offset where parsing failed.
    """

    category = 4

    def __init__(self, path: str, offset: int, problem: str):
        self.path = path
        self.offset = offset
        super().__init__(f"{path} at byte {offset}: {problem}")


class DatasetMissingError(FrameworkError):
    """Dataset files are not present under the dataset root."""

    category = 4


class LabelMismatchError(FrameworkError):
    """A resample pool holds a sample of a different class."""

    category = 5


class DegenerateGradientError(FrameworkError):
    """A cosine or alignment quantity was requested for a zero vector."""

    category = 6


class IncompleteRunError(FrameworkError):
    """The accuracy matrix is missing entries a metric needs."""

    category = 6


class UndefinedMetricError(FrameworkError):
    """The metric is undefined for this stream length."""

    category = 6


class IncompatibleRunsError(FrameworkError):
    """Summaries being compared were produced on different streams."""

    category = 6


class ArtifactIOError(FrameworkError):
    """Reading or writing a run artifact failed."""

    category = 7

    def __init__(self, path: str, problem: str):
        self.path = path
        super().__init__(f"{path}: {problem}")


class DownloadError(FrameworkError):
    """Fetching dataset files failed."""

    category = 8


class VerificationFailedError(FrameworkError):
    """At least one oracle self-check failed."""

    category = 9
