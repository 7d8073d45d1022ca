from src.models.errors import ConfigurationError
from src.models.kinds import StrategyKind
from src.services.abstract import AdaptationStrategyBase
from src.services.strategies.amr import AmrStrategy
from src.services.strategies.full_relearning import FullRelearningStrategy
from src.services.strategies.vanilla import VanillaStrategy

# Mapping of config values to strategy classes
STRATEGY_MAP: dict[StrategyKind, type[AdaptationStrategyBase]] = {
    StrategyKind.VANILLA: VanillaStrategy,
    StrategyKind.AMR: AmrStrategy,
    StrategyKind.FULL_RELEARNING: FullRelearningStrategy,
}


def build_strategy(kind: "StrategyKind | str", realign_fraction: float = 1.0) -> AdaptationStrategyBase:
    """Instantiates the strategy registered for `kind`."""
    try:
        kind = kind if isinstance(kind, StrategyKind) else StrategyKind.parse(kind)
    except ValueError as e:
        raise ConfigurationError(f"Unknown strategy: {kind}") from e
    strategy_class = STRATEGY_MAP[kind]
    if strategy_class is AmrStrategy:
        return AmrStrategy(realign_fraction=realign_fraction)
    return strategy_class()
