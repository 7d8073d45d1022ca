from abc import ABC, abstractmethod
from typing import Generic, TypeVar

_T = TypeVar("_T")
_E = TypeVar("_E", bound=Exception)


class ResultException(Exception):
    """Raised when a Result is unwrapped on the wrong side.

    Attributes:
        message (str): Explanation of the exception.
    """

    def __init__(self, message: str = "Cannot unwrap error from a Success"):
        super().__init__(message)
        self.message = message


class Result(Generic[_T, _E], ABC):
    """Outcome of a service-boundary call: a value or an error, never both.

    Runner, sweep, diagnostics and download entry points return a Result so
    that `main.py` decides how a failure surfaces (message and exit code).

    Type Variables:
        _T: Type of the success value.
        _E: Type of the error, an exception carrying an exit category.
    """

    @abstractmethod
    def is_success(self) -> bool:
        """Returns True if the Result carries a value."""

    @abstractmethod
    def is_failure(self) -> bool:
        """Returns True if the Result carries an error."""

    @abstractmethod
    def unwrap(self) -> _T:
        """Extracts the success value.

        Raises:
            ResultException: If the Result is a failure.
        """

    @abstractmethod
    def unwrap_err(self) -> _E:
        """Extracts the error value.

        Raises:
            ResultException: If the Result is a success.
        """

    @abstractmethod
    def unwrap_or_raise(self) -> _T:
        """Extracts the success value or raises the carried error itself."""
