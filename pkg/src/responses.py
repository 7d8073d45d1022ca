from typing import List, Optional

from pydantic import BaseModel, Field

from src.models.kinds import StrategyKind
from src.models.uncertainty import DriftDecision
from src.services.metrics import GradientDiag, ReplacementReport


class NormalizedCosts(BaseModel):
    """Costs of a run divided by those of a Full Relearning baseline.

    A ratio is None when the baseline value is zero.
    """

    baseline_run_id: str
    adaptation_labels: Optional[float] = None
    flops: Optional[float] = None
    wall_time: Optional[float] = None


class RunSummary(BaseModel):
    """Model to represent the outcome of one seeded run."""

    run_id: str
    strategy: StrategyKind
    seed: int
    config_hash: str
    stream_key: str
    faa: float
    forgetting: float
    forgetting_per_task: List[float]
    backward_transfer: float
    accuracy_curve: List[float]
    accuracy_matrix: List[List[float]]
    detections: List[DriftDecision] = Field(default_factory=list)
    adaptation_labels: int
    samples_processed: int
    gradient_steps: int
    detection_samples: int
    flops: float
    wall_time_seconds: float
    normalized: Optional[NormalizedCosts] = None
    output_dir: Optional[str] = None


class ExperimentSummary(BaseModel):
    """Aggregate of one config over several seeds (population std)."""

    strategy: StrategyKind
    config_hash: str
    stream_key: str
    seeds: List[int]
    runs: List[RunSummary]
    faa_mean: float
    faa_std: float
    forgetting_mean: float
    forgetting_std: float
    adaptation_labels_mean: float
    flops_mean: float
    wall_time_mean: float


class ComparisonRow(BaseModel):
    """One strategy row of comparison.csv, raw and normalized to the FR row."""

    strategy: StrategyKind
    runs: int
    faa: float
    forgetting: float
    adaptation_labels: float
    flops: float
    wall_time_seconds: float
    faa_norm: Optional[float] = None
    forgetting_norm: Optional[float] = None
    labels_norm: Optional[float] = None
    flops_norm: Optional[float] = None
    time_norm: Optional[float] = None


class ClassAlignment(BaseModel):
    """Alpha sweep for one drifted class, G_old from the previous version and G_new from the current one."""

    class_id: int
    old_version: int
    new_version: int
    series: List[GradientDiag]


class DiagnosticsReport(BaseModel):
    """Response model of the `diagnose` verb."""

    drift_task: Optional[int] = None
    alignment: List[ClassAlignment] = Field(default_factory=list)
    control: List[GradientDiag] = Field(default_factory=list)
    replacement: List[ReplacementReport] = Field(default_factory=list)


class CheckResult(BaseModel):
    """Defines the structure of one oracle self-check."""

    name: str
    passed: bool
    detail: str
    seconds: float


class VerificationReport(BaseModel):
    checks: List[CheckResult]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failed(self) -> List[str]:
        return [check.name for check in self.checks if not check.passed]
