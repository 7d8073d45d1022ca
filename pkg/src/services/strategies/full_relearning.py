import logging

from src.models.kinds import StrategyKind
from src.models.sample import SampleSet
from src.services.abstract import AdaptationStrategyBase

logger = logging.getLogger("Trainer")


class FullRelearningStrategy(AdaptationStrategyBase):
    """Full Relearning: train on the complete labeled pool of the drifted class.

    The model is not reinitialised; the pool joins the task's training data
    and every pool sample is charged.
    """

    name: str = "full_relearning"
    kind: StrategyKind = StrategyKind.FULL_RELEARNING

    def adapt(self, state, label: int, pool: SampleSet) -> SampleSet:
        extra = pool.of_class(label)
        state.ledger.adaptation_labels += len(extra)
        logger.info(f"FR adds {len(extra)} labeled samples of class {label}")
        return extra
