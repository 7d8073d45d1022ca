import math
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.models.kinds import UncertaintySource


class UncertaintySet(BaseModel):
    """Predictive-entropy values of one class from one source.

    Attributes:
        values (list[float]): Entropies in nats, each in [0, ln K].
        source (UncertaintySource): Buffer reference or incoming test data.
    """

    model_config = ConfigDict(frozen=True)

    values: list[float]
    source: UncertaintySource

    @field_validator("values")
    @classmethod
    def _finite_non_negative(cls, values: list[float]) -> list[float]:
        for value in values:
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"uncertainty {value} must be finite and non-negative")
        return values

    def __len__(self) -> int:
        return len(self.values)


class DriftDecision(BaseModel):
    """Outcome of the per-class KS drift test.

    `drifted` follows the configured rule: p_value < significance in
    significance mode, ks_statistic > delta in threshold mode.
    """

    model_config = ConfigDict(frozen=True)

    class_id: int
    ks_statistic: float = Field(..., ge=0, le=1)
    p_value: float = Field(..., ge=0, le=1)
    drifted: bool
    n_ref: int = Field(..., ge=0)
    n_test: int = Field(..., ge=0)
    under_sampled: bool = False
    task_index: Optional[int] = None
