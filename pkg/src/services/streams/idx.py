import gzip
import logging
import struct
from pathlib import Path
from typing import Optional

import numpy as np

from src.models.errors import DatasetFormatError, DatasetMissingError
from src.models.sample import SampleSet

logger = logging.getLogger("Streams")

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801

FASHION_MNIST_FILES = {
    "train_images": "train-images-idx3-ubyte",
    "train_labels": "train-labels-idx1-ubyte",
    "test_images": "t10k-images-idx3-ubyte",
    "test_labels": "t10k-labels-idx1-ubyte",
}
TRAIN_SIZE = 60_000


def _read_bytes(path: Path) -> bytes:
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "rb") as f:
        return f.read()


def _read_header(raw: bytes, path: Path, expected_magic: int, ndims: int) -> list[int]:
    # Data format (big endian):
    # u32 | magic
    # u32 | item count
    # u32 | rows, u32 | columns (images only)
    header_size = 4 * (1 + ndims)
    if len(raw) < header_size:
        raise DatasetFormatError(str(path), len(raw), f"truncated header, need {header_size} bytes")
    magic, *dims = struct.unpack(f">{1 + ndims}I", raw[:header_size])
    if magic != expected_magic:
        raise DatasetFormatError(str(path), 0, f"bad magic number 0x{magic:08x}, expected 0x{expected_magic:08x}")
    return dims


def read_idx_images(path: "str | Path") -> np.ndarray:
    """Images as a (count x rows*cols) float64 array scaled to [0, 1]."""
    path = Path(path)
    raw = _read_bytes(path)
    count, rows, cols = _read_header(raw, path, IMAGE_MAGIC, 3)
    expected = 16 + count * rows * cols
    if len(raw) < expected:
        raise DatasetFormatError(str(path), len(raw), f"truncated pixel data, expected {expected} bytes")
    pixels = np.frombuffer(raw, dtype=np.uint8, count=count * rows * cols, offset=16)
    return pixels.reshape(count, rows * cols).astype(np.float64) / 255.0


def read_idx_labels(path: "str | Path") -> np.ndarray:
    path = Path(path)
    raw = _read_bytes(path)
    (count,) = _read_header(raw, path, LABEL_MAGIC, 1)
    if len(raw) < 8 + count:
        raise DatasetFormatError(str(path), len(raw), f"truncated labels, expected {8 + count} bytes")
    return np.frombuffer(raw, dtype=np.uint8, count=count, offset=8).astype(np.int64)


def load_fashion_mnist(
    images_path: "str | Path", labels_path: "str | Path", id_offset: int = 0
) -> SampleSet:
    """Parses an IDX image/label file pair into a SampleSet.

    Raises:
        DatasetFormatError: On a bad magic number, truncation, or a count
            mismatch between the two files.
    """
    images = read_idx_images(images_path)
    labels = read_idx_labels(labels_path)
    if images.shape[0] != labels.shape[0]:
        raise DatasetFormatError(
            str(labels_path), 4, f"{labels.shape[0]} labels for {images.shape[0]} images in {images_path}"
        )
    logger.info(f"Loaded {images.shape[0]} samples from {Path(images_path).name}")
    return SampleSet.build(images, labels, ids=np.arange(images.shape[0]) + id_offset)


def locate(root: Path, stem: str) -> Optional[Path]:
    for candidate in (root / stem, root / f"{stem}.gz"):
        if candidate.exists():
            return candidate
    return None


def load_fashion_mnist_splits(root: "str | Path") -> tuple[SampleSet, SampleSet]:
    """Train and test splits from the four standard files under `root`.

    Train ids occupy [0, 60000) and test ids follow, so the splits never share ids.
    """
    root = Path(root)
    paths = {key: locate(root, stem) for key, stem in FASHION_MNIST_FILES.items()}
    missing = [FASHION_MNIST_FILES[key] for key, path in paths.items() if path is None]
    if missing:
        raise DatasetMissingError(
            f"Fashion-MNIST files not found under {root}: {', '.join(missing)}. "
            f"Run `python main.py download --root {root}` or set DRIFTCL_DATASET_ROOT."
        )
    train = load_fashion_mnist(paths["train_images"], paths["train_labels"])
    test = load_fashion_mnist(paths["test_images"], paths["test_labels"], id_offset=max(TRAIN_SIZE, len(train)))
    return train, test
