from src.models.accuracy import AccuracyMatrix
from src.models.failure import Failure
from src.models.kinds import DatasetKind, DetectorMode, StrategyKind, TransformKind, UncertaintySource
from src.models.result import Result
from src.models.result import ResultException
from src.models.run_config import RunConfig
from src.models.sample import Batch, Sample, SampleSet
from src.models.stream import DriftEvent, TaskSpec
from src.models.success import Success
from src.models.uncertainty import DriftDecision, UncertaintySet
