import logging

from src.models.kinds import StrategyKind
from src.models.sample import SampleSet
from src.services.abstract import AdaptationStrategyBase
from src.services.memory import amr_flush, amr_resample

logger = logging.getLogger("Trainer")


class AmrStrategy(AdaptationStrategyBase):
    """Adaptive Memory Realignment: flush class slots, refill from the new distribution.

    Only the samples placed in the buffer are charged as adaptation labels;
    nothing is added to the task's training data.

    Attributes:
        realign_fraction (float): Share of the class's slots to realign (1.0 = all).
    """

    name: str = "amr"
    kind: StrategyKind = StrategyKind.AMR

    def __init__(self, realign_fraction: float = 1.0):
        self.realign_fraction = realign_fraction

    def adapt(self, state, label: int, pool: SampleSet) -> SampleSet:
        freed = amr_flush(state.buffer, label, self.realign_fraction)
        placed = amr_resample(state.buffer, label, pool.of_class(label), freed)
        state.ledger.adaptation_labels += placed
        logger.info(f"AMR realigned class {label}: {placed}/{len(freed)} slots refilled")
        return SampleSet.empty(pool.dim)
