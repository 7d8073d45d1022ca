from abc import ABC, abstractmethod
from typing import TYPE_CHECKING

from src.models.kinds import StrategyKind
from src.models.sample import SampleSet

if TYPE_CHECKING:
    from src.services.trainer import TrainState


class AdaptationStrategyBase(ABC):
    """Abstract base class for drift adaptation strategies.

    A strategy reacts to one detected drifted class at a time, before the
    task's training epochs run.

    Attributes:
        name (str): Registry name of the strategy.
        kind (StrategyKind): Enum value selected in the run config.
    """

    name: str
    kind: StrategyKind

    @abstractmethod
    def adapt(self, state: "TrainState", label: int, pool: SampleSet) -> SampleSet:
        """Reacts to drift of class `label`.

        Args:
            state (TrainState): Mutable run state (model, buffer, ledger).
            label (int): The drifted class.
            pool (SampleSet): Labeled drifted data of `label` available this task.

        Returns:
            SampleSet: Extra samples to append to this task's training data.
        """

    def __str__(self) -> str:
        return f"{type(self).__name__}(name={self.name})"

    def __repr__(self) -> str:
        return f"<{type(self).__name__} name='{self.name}'>"

    def __eq__(self, other) -> bool:
        if not isinstance(other, AdaptationStrategyBase):
            return False
        return self.name == other.name

    def __hash__(self) -> int:
        return hash(self.name)
