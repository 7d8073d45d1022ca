from typing import Iterable, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.models.errors import InputShapeError


class Sample(BaseModel):
    """Model to represent one labeled instance of the stream.

    Attributes:
        features (np.ndarray): Feature vector (unit-normalized pixels for images).
        label (int): Class id in [0, K).
        drift_version (int): 0 for the original distribution, +1 per drift event.
        sample_id (int): Identity of the underlying instance; drifted copies keep it.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    features: np.ndarray
    label: int = Field(..., ge=0)
    drift_version: int = Field(0, ge=0)
    sample_id: int = 0

    @model_validator(mode="after")
    def _check_features(self) -> "Sample":
        if self.features.ndim != 1:
            raise InputShapeError(f"Sample features must be 1-D, got shape {self.features.shape}")
        if not np.all(np.isfinite(self.features)):
            raise InputShapeError("Sample features must be finite")
        return self


class SampleSet(BaseModel):
    """Column-oriented collection of samples sharing one feature dimension.

    Rows line up across `features`, `labels`, `versions` and `ids`.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    features: np.ndarray
    labels: np.ndarray
    versions: np.ndarray
    ids: np.ndarray

    @model_validator(mode="after")
    def _check_rows(self) -> "SampleSet":
        if self.features.ndim != 2:
            raise InputShapeError(f"features must be 2-D, got shape {self.features.shape}")
        n = self.features.shape[0]
        for name in ("labels", "versions", "ids"):
            column = getattr(self, name)
            if column.shape != (n,):
                raise InputShapeError(f"{name} has shape {column.shape}, expected ({n},)")
        return self

    @classmethod
    def build(
        cls,
        features: np.ndarray,
        labels: Iterable[int],
        versions: Optional[Iterable[int]] = None,
        ids: Optional[Iterable[int]] = None,
    ) -> "SampleSet":
        """Builds a set, defaulting versions to 0 and ids to row positions."""
        features = np.asarray(features, dtype=np.float64)
        if features.ndim == 1:
            features = features.reshape(1, -1)
        labels = np.asarray(labels if isinstance(labels, np.ndarray) else list(labels), dtype=np.int64)
        n = features.shape[0]
        versions = np.zeros(n, dtype=np.int64) if versions is None else np.asarray(versions, dtype=np.int64)
        ids = np.arange(n, dtype=np.int64) if ids is None else np.asarray(ids, dtype=np.int64)
        return cls(features=features, labels=labels, versions=versions, ids=ids)

    @classmethod
    def empty(cls, dim: int) -> "SampleSet":
        return cls(
            features=np.zeros((0, dim), dtype=np.float64),
            labels=np.zeros(0, dtype=np.int64),
            versions=np.zeros(0, dtype=np.int64),
            ids=np.zeros(0, dtype=np.int64),
        )

    @classmethod
    def concat(cls, parts: list["SampleSet"], dim: int) -> "SampleSet":
        parts = [p for p in parts if len(p)]
        if not parts:
            return cls.empty(dim)
        return cls(
            features=np.concatenate([p.features for p in parts]),
            labels=np.concatenate([p.labels for p in parts]),
            versions=np.concatenate([p.versions for p in parts]),
            ids=np.concatenate([p.ids for p in parts]),
        )

    def __len__(self) -> int:
        return int(self.labels.shape[0])

    @property
    def dim(self) -> int:
        return int(self.features.shape[1])

    def subset(self, index: np.ndarray) -> "SampleSet":
        return SampleSet(
            features=self.features[index],
            labels=self.labels[index],
            versions=self.versions[index],
            ids=self.ids[index],
        )

    def of_class(self, label: int) -> "SampleSet":
        return self.subset(np.flatnonzero(self.labels == label))

    def of_classes(self, labels: Iterable[int]) -> "SampleSet":
        return self.subset(np.flatnonzero(np.isin(self.labels, list(labels))))

    def as_batch(self) -> "Batch":
        return Batch(inputs=self.features, labels=self.labels, ids=self.ids)


class Batch(BaseModel):
    """Minibatch of inputs (batch x input dim) and integer class ids.

    `ids` optionally carries the sample ids of the rows, for the train/eval audit.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    inputs: np.ndarray
    labels: np.ndarray
    ids: Optional[np.ndarray] = None

    @model_validator(mode="after")
    def _check_rows(self) -> "Batch":
        if self.inputs.ndim != 2:
            raise InputShapeError(f"Batch inputs must be 2-D, got shape {self.inputs.shape}")
        if self.labels.shape != (self.inputs.shape[0],):
            raise InputShapeError(
                f"Batch has {self.inputs.shape[0]} rows but {self.labels.shape[0]} labels"
            )
        if self.labels.size and self.labels.min() < 0:
            raise InputShapeError("Batch labels must be non-negative")
        if self.ids is not None and self.ids.shape != self.labels.shape:
            raise InputShapeError(f"Batch has {self.labels.shape[0]} labels but {self.ids.shape[0]} ids")
        return self

    def __len__(self) -> int:
        return int(self.labels.shape[0])
