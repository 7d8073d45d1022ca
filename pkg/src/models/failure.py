from src.models.result import _E, _T, Result, ResultException


class Failure(Result[_T, _E]):
    """Failed outcome holding the error, usually a `FrameworkError`."""

    def __init__(self, error: _E):
        self._error = error

    def __repr__(self) -> str:
        return f"Failure({self._error!r})"

    def __str__(self) -> str:
        return f"Failed with: {self._error}"

    def is_success(self) -> bool:
        return False

    def is_failure(self) -> bool:
        return True

    def unwrap(self) -> _T:
        raise ResultException(f"Cannot unwrap a Failure: {self._error}")

    def unwrap_err(self) -> _E:
        return self._error

    def unwrap_or_raise(self) -> _T:
        raise self._error
