import logging
from pathlib import Path
from typing import Optional

import numpy as np

from src.models.errors import ConfigurationError
from src.models.run_config import StreamSettings
from src.models.sample import SampleSet
from src.services.streams.idx import load_fashion_mnist_splits
from src.services.streams.stream import TaskStream, build_drift_events, consecutive_tasks

logger = logging.getLogger("Streams")

FASHION_MNIST_CLASSES = 10


def cap_per_class(samples: SampleSet, limit: Optional[int]) -> SampleSet:
    """Keeps the first `limit` samples of each class in file order."""
    if limit is None:
        return samples
    keep = np.concatenate(
        [np.flatnonzero(samples.labels == c)[:limit] for c in np.unique(samples.labels)]
    )
    return samples.subset(np.sort(keep))


def make_fashion_mnist_stream(
    settings: StreamSettings, seed: int, root: "str | Path", probe_size: int = 100
) -> TaskStream:
    """Split Fashion-MNIST-CD: task i holds classes {2i, 2i+1} for the default split."""
    if settings.num_classes > FASHION_MNIST_CLASSES:
        raise ConfigurationError(
            f"{settings.tasks} tasks x {settings.classes_per_task} classes exceeds the "
            f"{FASHION_MNIST_CLASSES} Fashion-MNIST classes"
        )
    train, test = load_fashion_mnist_splits(root)
    classes = list(range(settings.num_classes))
    train = cap_per_class(train.of_classes(classes), settings.train_per_class)
    test = cap_per_class(test.of_classes(classes), settings.test_per_class)
    tasks = consecutive_tasks(settings.tasks, settings.classes_per_task)
    logger.info(
        f"Fashion-MNIST stream: {len(train)} train / {len(test)} test samples, "
        f"drift at {settings.drift_tasks or 'none'}"
    )
    return TaskStream(
        tasks=tasks,
        train=train,
        test=test,
        drift_events=build_drift_events(settings, tasks, seed),
        num_classes=settings.num_classes,
        seed=seed,
        probe_size=probe_size,
    )
