from pathlib import Path
from typing import Optional

from src.models.errors import ConfigurationError
from src.models.kinds import DatasetKind
from src.models.run_config import StreamSettings
from src.services.config import config
from src.services.streams.fashion import make_fashion_mnist_stream
from src.services.streams.idx import load_fashion_mnist, load_fashion_mnist_splits
from src.services.streams.stream import TaskStream, TaskView, build_drift_events, task_view
from src.services.streams.synthetic import make_synthetic_stream
from src.services.streams.transforms import DriftMap, apply_drift_transform


def build_stream(
    settings: StreamSettings, seed: int, probe_size: int = 100, data_root: Optional[str] = None
) -> TaskStream:
    """Builds the stream selected by `settings.dataset`.

    The dataset root resolves from the argument, then the `[stream]
    data_root` key, then the ambient config (`DRIFTCL_DATASET_ROOT`).
    """
    if settings.dataset is DatasetKind.SYNTHETIC:
        return make_synthetic_stream(settings, seed, probe_size)
    if settings.dataset is DatasetKind.FASHION_MNIST:
        root = Path(data_root or settings.data_root or config.dataset_root())
        return make_fashion_mnist_stream(settings, seed, root, probe_size)
    raise ConfigurationError(f"Unknown dataset: {settings.dataset}")
