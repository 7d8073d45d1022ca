from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.models.kinds import TransformKind


class DriftEvent(BaseModel):
    """Model to represent a drift event fired when previously seen classes recur.

    Attributes:
        task_index (int): Task T_i at which the drift fires; at least 1.
        transform (TransformKind): Transform applied to the affected classes.
        severity (int): Severity level in [1, 5].
        affected_classes (tuple[int, ...]): Classes whose version is incremented.
        seed (int): Seed of the event's transformation map.
    """

    model_config = ConfigDict(frozen=True)

    task_index: int = Field(..., ge=1)
    transform: TransformKind
    severity: int = Field(..., ge=1, le=5)
    affected_classes: tuple[int, ...]
    seed: int = Field(..., ge=0)


class TaskSpec(BaseModel):
    """One task of the stream: its position and its new-class set C_i."""

    model_config = ConfigDict(frozen=True)

    index: int = Field(..., ge=0)
    new_classes: tuple[int, ...]

    @model_validator(mode="after")
    def _check_classes(self) -> "TaskSpec":
        if not self.new_classes:
            raise ValueError(f"task {self.index} has no classes")
        return self
