from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.models.kinds import DatasetKind, DetectorMode, StrategyKind, TransformKind


class StreamSettings(BaseModel):
    """`[stream]` section: which data, how it is split and where it drifts."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    dataset: DatasetKind
    data_root: Optional[str] = None
    tasks: int = Field(5, ge=2)
    classes_per_task: int = Field(2, ge=1)
    drift_tasks: list[int] = Field(default_factory=list)
    drift_classes: Optional[list[int]] = None
    transform: TransformKind = TransformKind.PERMUTE
    severity: int = Field(5, ge=1, le=5)
    feature_dim: int = Field(16, ge=1, description="Synthetic feature dimension")
    cluster_std: float = Field(1.0, gt=0)
    mean_scale: float = Field(3.0, gt=0, description="Half-width of the box holding class means")
    train_per_class: Optional[int] = Field(None, ge=1)
    test_per_class: Optional[int] = Field(None, ge=1)

    @property
    def num_classes(self) -> int:
        return self.tasks * self.classes_per_task

    @model_validator(mode="after")
    def _check_drift(self) -> "StreamSettings":
        for task in self.drift_tasks:
            if not 1 <= task < self.tasks:
                raise ValueError(f"drift task {task} outside [1, {self.tasks})")
        if len(set(self.drift_tasks)) != len(self.drift_tasks):
            raise ValueError("drift_tasks contains duplicates")
        for label in self.drift_classes or []:
            if not 0 <= label < self.num_classes:
                raise ValueError(f"drift class {label} outside [0, {self.num_classes})")
        return self


class ModelSettings(BaseModel):
    """`[model]` section: hidden layer widths of the MLP."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    hidden_dims: list[int] = Field(default_factory=lambda: [256, 256])

    @model_validator(mode="after")
    def _check_widths(self) -> "ModelSettings":
        if any(width < 1 for width in self.hidden_dims):
            raise ValueError("hidden widths must be positive")
        return self


class MemorySettings(BaseModel):
    """`[memory]` section: replay buffer capacity and realignment share."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    capacity: int = Field(500, gt=0)
    realign_fraction: float = Field(1.0, gt=0, le=1)
    snapshot: bool = False


class TrainingSettings(BaseModel):
    """`[training]` section: strategy and SGD hyperparameters."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    strategy: StrategyKind = StrategyKind.AMR
    epochs: int = Field(3, ge=1)
    lr: float = Field(0.05, gt=0)
    batch_size: int = Field(32, ge=1)
    replay_size: int = Field(32, ge=0)


class DetectorSettings(BaseModel):
    """`[detector]` section: KS decision rule and sample guards."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    mode: DetectorMode = DetectorMode.SIGNIFICANCE
    value: float = Field(0.05, gt=0, le=1)
    min_samples: int = Field(30, ge=1)
    probe_size: int = Field(100, ge=1)


class RunSettings(BaseModel):
    """`[run]` section: master seed and artifact root."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    seed: int = Field(0, ge=0)
    output_dir: Optional[str] = None


class RunConfig(BaseModel):
    """Fully validated experiment configuration with defaults applied."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    stream: StreamSettings
    model: ModelSettings = Field(default_factory=ModelSettings)
    memory: MemorySettings = Field(default_factory=MemorySettings)
    training: TrainingSettings = Field(default_factory=TrainingSettings)
    detector: DetectorSettings = Field(default_factory=DetectorSettings)
    run: RunSettings = Field(default_factory=RunSettings)

    def with_strategy(self, strategy: StrategyKind) -> "RunConfig":
        return self.model_copy(
            update={"training": self.training.model_copy(update={"strategy": strategy})}
        )

    def with_seed(self, seed: int) -> "RunConfig":
        return self.model_copy(update={"run": self.run.model_copy(update={"seed": seed})})
