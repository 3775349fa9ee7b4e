"""Plans, verdicts and reports exchanged between the detectors and the CLI."""

from enum import Enum
from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from treesieve import __version__

DEFAULT_EPSILON = 0.042894
DEFAULT_SAMPLER_P = 0.3589
DEFAULT_ALPHA = 0.8627
REPORT_SCHEMA = "treesieve.run/1"


class Strategy(str, Enum):
    """How each trial picks its bipartition."""
    RANDOM = "random"
    COLOR = "color"
    FRACTIONAL = "fractional"
    VECTOR = "vector"
    BIPARTITION = "bipartition"


class Answer(str, Enum):
    """Detector outcome; YES is always sound."""
    YES = "YES"
    NO = "NO"


class DetectionPlan(BaseModel):
    """Target shape and the knobs controlling the trial schedule."""
    model_config = ConfigDict(frozen=True)

    k: int = Field(ge=1, description="Tree vertex count")
    l: int = Field(description="Leaf count")
    strategy: Strategy = Field(default=Strategy.RANDOM, description="Bipartition strategy")
    epsilon: float = Field(default=DEFAULT_EPSILON, ge=0.0, lt=0.25, description="Schedule slack")
    trials: Optional[int] = Field(default=None, ge=1, description="Trial count override")
    r_override: Optional[int] = Field(default=None, ge=1, description="Label budget override")
    seed: int = Field(default=0, ge=0, lt=2**64, description="Root seed")
    confidence_boost: int = Field(default=1, ge=1, description="Trial count multiplier")
    workers: int = Field(default=1, ge=1, description="Worker processes")
    sampler_p: float = Field(default=DEFAULT_SAMPLER_P, gt=0.0, lt=1.0, description="Independent-set inclusion bound")
    fractional_t: int = Field(default=1, ge=1, description="Color subset size for fractional colorings")
    color_subset_cap: int = Field(default=10_000, ge=1, description="Color subsets enumerated before sampling")

    @model_validator(mode="after")
    def _check_leaves(self) -> "DetectionPlan":
        if not 2 <= self.l <= max(2, self.k - 1):
            raise ValueError(f"l={self.l} outside [2, {max(2, self.k - 1)}] for k={self.k}")
        return self


class Schedule(BaseModel):
    """Trial schedule of the random-bipartition detector."""
    t: int
    r: int
    trials: int


class TrialRecord(BaseModel):
    """Outcome of one evaluation."""
    trial: int
    r: int
    v1_size: int
    nonzero: bool


class Verdict(BaseModel):
    """One-sided decision with trial statistics."""
    answer: Answer
    trials_run: int = Field(ge=0)
    first_hit_trial: Optional[int] = None
    r_used: int = Field(ge=0)
    strategy_detail: dict[str, Any] = Field(default_factory=dict)
    trial_log: list[TrialRecord] = Field(default_factory=list)

    @model_validator(mode="after")
    def _hit_recorded(self) -> "Verdict":
        if self.answer is Answer.YES and self.first_hit_trial is None:
            raise ValueError("a YES verdict needs first_hit_trial")
        if self.answer is Answer.NO and self.first_hit_trial is not None:
            raise ValueError("a NO verdict cannot have a hit")
        return self

    @property
    def yes(self) -> bool:
        return self.answer is Answer.YES


class GraphStats(BaseModel):
    n: int
    m: int
    max_degree: int


class PlanSummary(BaseModel):
    """Plan parameters as they were actually used."""
    k: int
    l: Optional[int] = None
    r: Optional[int] = None
    t: Optional[int] = None
    epsilon: float
    trials: Optional[int] = None
    strategy: Strategy
    seed: int


class RunReport(BaseModel):
    """Everything one CLI invocation decided, ready for JSON."""
    schema_: str = Field(default=REPORT_SCHEMA, alias="schema")
    version: str = __version__
    command: list[str]
    graph: GraphStats
    plan: PlanSummary
    verdict: Verdict
    timings: dict[str, float] = Field(default_factory=dict)

    model_config = ConfigDict(populate_by_name=True)

    def to_json(self) -> str:
        return self.model_dump_json(by_alias=True, indent=2)

    def canonical_json(self) -> str:
        """JSON without timing fields; identical inputs and seeds give identical text."""
        return self.model_dump_json(by_alias=True, indent=2, exclude={"timings"})
