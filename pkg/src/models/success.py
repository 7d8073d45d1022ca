from src.models.result import _E, _T, Result, ResultException


class Success(Result[_T, _E]):
    """Successful outcome holding a value (a summary, a report, a path list)."""

    def __init__(self, value: _T):
        self._value = value

    def __repr__(self) -> str:
        return f"Success({self._value!r})"

    def is_success(self) -> bool:
        return True

    def is_failure(self) -> bool:
        return False

    def unwrap(self) -> _T:
        return self._value

    def unwrap_err(self) -> _E:
        raise ResultException()

    def unwrap_or_raise(self) -> _T:
        return self._value
