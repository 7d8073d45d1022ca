import logging

import numpy as np

from src.models.errors import ConfigurationError
from src.models.run_config import StreamSettings
from src.models.sample import SampleSet
from src.services.streams.stream import TaskStream, build_drift_events, consecutive_tasks

logger = logging.getLogger("Streams")

MIN_SEPARATION_STDS = 4.0
MAX_PLACEMENT_ATTEMPTS = 2000
DEFAULT_TRAIN_PER_CLASS = 500
DEFAULT_TEST_PER_CLASS = 200


def class_means(
    num_classes: int, dim: int, std: float, mean_scale: float, rng: np.random.Generator
) -> np.ndarray:
    """Seeded class means in [-mean_scale, mean_scale]^dim, pairwise >= 4 std apart.

    Raises:
        ConfigurationError: If the separation cannot be met in the requested dimension.
    """
    min_distance = MIN_SEPARATION_STDS * std
    means: list[np.ndarray] = []
    for label in range(num_classes):
        for _ in range(MAX_PLACEMENT_ATTEMPTS):
            candidate = rng.uniform(-mean_scale, mean_scale, size=dim)
            if all(np.linalg.norm(candidate - other) >= min_distance for other in means):
                means.append(candidate)
                break
        else:
            raise ConfigurationError(
                f"cannot place {num_classes} class means {min_distance:g} apart in {dim} dimensions "
                f"within +/-{mean_scale:g} (placed {label}); raise feature_dim or mean_scale"
            )
    return np.stack(means)


def gaussian_split(
    means: np.ndarray, std: float, per_class: int, rng: np.random.Generator, id_offset: int
) -> SampleSet:
    num_classes, dim = means.shape
    labels = np.repeat(np.arange(num_classes), per_class)
    features = means[labels] + rng.normal(0.0, std, size=(labels.shape[0], dim))
    return SampleSet.build(features, labels, ids=np.arange(labels.shape[0]) + id_offset)


def make_synthetic_stream(settings: StreamSettings, seed: int, probe_size: int = 100) -> TaskStream:
    """Split-Gaussian stream: task i holds classes {i*m, ..., i*m + m - 1}.

    Each class is an isotropic Gaussian cluster with a seeded mean.
    """
    rng = np.random.default_rng(seed)
    means = class_means(settings.num_classes, settings.feature_dim, settings.cluster_std, settings.mean_scale, rng)
    train_per_class = settings.train_per_class or DEFAULT_TRAIN_PER_CLASS
    test_per_class = settings.test_per_class or DEFAULT_TEST_PER_CLASS
    train = gaussian_split(means, settings.cluster_std, train_per_class, rng, id_offset=0)
    test = gaussian_split(means, settings.cluster_std, test_per_class, rng, id_offset=len(train))

    tasks = consecutive_tasks(settings.tasks, settings.classes_per_task)
    logger.info(
        f"Synthetic stream: {settings.tasks} tasks x {settings.classes_per_task} classes, "
        f"d={settings.feature_dim}, drift at {settings.drift_tasks or 'none'}"
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
