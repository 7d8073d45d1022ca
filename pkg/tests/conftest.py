import gzip
import struct
from pathlib import Path

import numpy as np
import pytest

from src.models.run_config import (
    DetectorSettings,
    MemorySettings,
    ModelSettings,
    RunConfig,
    RunSettings,
    StreamSettings,
    TrainingSettings,
)
from src.services.streams.idx import FASHION_MNIST_FILES, IMAGE_MAGIC, LABEL_MAGIC


def write_idx_images(path: Path, images: np.ndarray, compress: bool = False) -> Path:
    count, rows, cols = images.shape
    raw = struct.pack(">4I", IMAGE_MAGIC, count, rows, cols) + images.astype(np.uint8).tobytes()
    opener = gzip.open if compress else open
    with opener(path, "wb") as f:
        f.write(raw)
    return path


def write_idx_labels(path: Path, labels: np.ndarray, compress: bool = False) -> Path:
    raw = struct.pack(">2I", LABEL_MAGIC, len(labels)) + np.asarray(labels, dtype=np.uint8).tobytes()
    opener = gzip.open if compress else open
    with opener(path, "wb") as f:
        f.write(raw)
    return path


@pytest.fixture
def fake_fashion_root(tmp_path: Path) -> Path:
    """Four gzipped IDX files with 4x4 images of classes 0-3."""
    rng = np.random.default_rng(7)
    root = tmp_path / "fmnist"
    root.mkdir()
    for split, per_class in (("train", 12), ("test", 5)):
        labels = np.repeat(np.arange(4), per_class)
        images = rng.integers(0, 256, size=(len(labels), 4, 4))
        write_idx_images(root / f"{FASHION_MNIST_FILES[f'{split}_images']}.gz", images, compress=True)
        write_idx_labels(root / f"{FASHION_MNIST_FILES[f'{split}_labels']}.gz", labels, compress=True)
    return root


@pytest.fixture
def stream_settings() -> StreamSettings:
    return StreamSettings(
        dataset="synthetic",
        tasks=5,
        classes_per_task=2,
        drift_tasks=[3],
        feature_dim=16,
        train_per_class=80,
        test_per_class=30,
    )


@pytest.fixture
def small_config(stream_settings: StreamSettings, tmp_path: Path) -> RunConfig:
    """A fast synthetic run: one epoch, one small hidden layer."""
    return RunConfig(
        stream=stream_settings,
        model=ModelSettings(hidden_dims=[16]),
        memory=MemorySettings(capacity=60),
        training=TrainingSettings(strategy="amr", epochs=1, lr=0.05, batch_size=16, replay_size=16),
        detector=DetectorSettings(min_samples=5, probe_size=30),
        run=RunSettings(seed=0, output_dir=str(tmp_path / "runs")),
    )
