import numpy as np

from src.models.errors import IncompleteRunError, InputShapeError


class AccuracyMatrix:
    """Lower-triangular A[i][j]: accuracy on task j's test split after task i.

    Entries with j > i are undefined and stored as NaN.
    """

    def __init__(self, num_tasks: int):
        if num_tasks < 1:
            raise InputShapeError("AccuracyMatrix needs at least one task")
        self.num_tasks = num_tasks
        self._values = np.full((num_tasks, num_tasks), np.nan, dtype=np.float64)

    @classmethod
    def from_rows(cls, rows: list[list[float]]) -> "AccuracyMatrix":
        """Builds a matrix from ragged rows, row i holding i + 1 values."""
        matrix = cls(len(rows))
        for i, row in enumerate(rows):
            if len(row) > i + 1:
                raise InputShapeError(f"row {i} has {len(row)} entries, at most {i + 1} allowed")
            for j, value in enumerate(row):
                matrix.set(i, j, value)
        return matrix

    def set(self, i: int, j: int, value: float) -> None:
        if not 0 <= j <= i < self.num_tasks:
            raise InputShapeError(f"entry ({i}, {j}) is outside the lower triangle")
        if not 0.0 <= value <= 1.0:
            raise InputShapeError(f"accuracy {value} outside [0, 1]")
        self._values[i, j] = value

    def get(self, i: int, j: int) -> float:
        if not 0 <= j <= i < self.num_tasks:
            raise InputShapeError(f"entry ({i}, {j}) is outside the lower triangle")
        value = self._values[i, j]
        if np.isnan(value):
            raise IncompleteRunError(f"entry ({i}, {j}) has not been measured")
        return float(value)

    def row(self, i: int) -> list[float]:
        return [self.get(i, j) for j in range(i + 1)]

    def is_row_complete(self, i: int) -> bool:
        return not np.any(np.isnan(self._values[i, : i + 1]))

    def to_rows(self) -> list[list[float]]:
        """Measured prefix of each row (empty list for unmeasured rows)."""
        return [
            [float(v) for v in self._values[i, : i + 1] if not np.isnan(v)]
            for i in range(self.num_tasks)
        ]

    def __eq__(self, other) -> bool:
        if not isinstance(other, AccuracyMatrix):
            return False
        return np.array_equal(self._values, other._values, equal_nan=True)

    def __repr__(self) -> str:
        return f"<AccuracyMatrix tasks={self.num_tasks}>"
