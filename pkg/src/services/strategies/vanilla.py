from src.models.kinds import StrategyKind
from src.models.sample import SampleSet
from src.services.abstract import AdaptationStrategyBase


class VanillaStrategy(AdaptationStrategyBase):
    """Plain rehearsal: detections are logged, nothing else changes."""

    name: str = "vanilla"
    kind: StrategyKind = StrategyKind.VANILLA

    def adapt(self, state, label: int, pool: SampleSet) -> SampleSet:
        return SampleSet.empty(pool.dim)
