from enum import Enum


class TransformKind(str, Enum):
    """Enumeration of the drift transforms applied to recurring classes.

    Attributes:
        PERMUTE (str): Seeded permutation of a severity-dependent share of features.
        GAUSSIAN_NOISE (str): Additive seeded Gaussian noise.
        ROTATE_PAIRS (str): Planar rotation of seeded feature pairs.
    """
    PERMUTE = "permute"
    GAUSSIAN_NOISE = "gaussian_noise"
    ROTATE_PAIRS = "rotate_pairs"


class StrategyKind(str, Enum):
    """Enumeration of the drift adaptation strategies.

    Attributes:
        VANILLA (str): Plain rehearsal, no reaction to drift.
        AMR (str): Adaptive Memory Realignment of the replay buffer.
        FULL_RELEARNING (str): Retrain on the full drifted pool.
    """
    VANILLA = "vanilla"
    AMR = "amr"
    FULL_RELEARNING = "full_relearning"

    @classmethod
    def parse(cls, value: str) -> "StrategyKind":
        """Accepts the enum value or the short alias `fr`."""
        normalized = value.strip().lower()
        if normalized == "fr":
            return cls.FULL_RELEARNING
        return cls(normalized)


class DetectorMode(str, Enum):
    """Decision rule of the drift detector.

    Attributes:
        SIGNIFICANCE (str): Drift when the KS p-value is below the level.
        THRESHOLD (str): Drift when the KS statistic exceeds a fixed delta.
    """
    SIGNIFICANCE = "significance"
    THRESHOLD = "threshold"


class UncertaintySource(str, Enum):
    REFERENCE = "reference"
    TEST = "test"


class DatasetKind(str, Enum):
    SYNTHETIC = "synthetic"
    FASHION_MNIST = "fashion_mnist"
