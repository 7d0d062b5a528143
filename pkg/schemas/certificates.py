"""Pydantic schemas for truncations, bounds and certificates on the wire.

Every rational crosses the boundary as a "p/q" (or integer) string; floats
are rejected by the shared validator.
"""

from fractions import Fraction
from typing import Annotated, Dict, List, Literal, Optional

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, PlainSerializer

from core.intervals import Interval, IntervalSet, normalize
from core.rationals import format_rational, to_rational

RationalField = Annotated[
    Fraction,
    BeforeValidator(to_rational),
    PlainSerializer(format_rational, return_type=str),
]


class WireModel(BaseModel):
    """Base for all wire models."""

    model_config = ConfigDict(arbitrary_types_allowed=True, extra="forbid")


# ============== SETS ==============


class IntervalModel(WireModel):
    lo: RationalField
    hi: RationalField
    lo_open: bool = False
    hi_open: bool = False

    @classmethod
    def from_interval(cls, interval: Interval) -> "IntervalModel":
        return cls(lo=interval.lo, hi=interval.hi, lo_open=interval.lo_open, hi_open=interval.hi_open)

    def to_interval(self) -> Interval:
        return Interval(self.lo, self.hi, self.lo_open, self.hi_open)


def intervals_to_set(items: List[IntervalModel]) -> IntervalSet:
    return normalize([item.to_interval() for item in items])


class SlackRegionModel(WireModel):
    hull: IntervalModel
    mass: RationalField
    label: str = ""


class TruncatedSetModel(WireModel):
    """A truncation: over-approximation plus exact omitted-mass accounting."""

    epsilon: RationalField
    omitted_mass: RationalField
    upper: List[IntervalModel]
    slack: List[SlackRegionModel] = Field(default_factory=list)
    window: Optional[IntervalModel] = None
    removal_count: int = 0


class CheckResultModel(WireModel):
    name: str
    passed: bool
    detail: str = ""
    values: Dict[str, str] = Field(default_factory=dict)


# ============== CERTIFICATES ==============


class SequenceModel(WireModel):
    """Textual sequence description, e.g. gamma "geom:1:1/2", delta "table:1/4,1/16"."""

    gamma: str
    delta: str


class WitnessLevelModel(WireModel):
    k: int = Field(ge=1)
    index: int = Field(ge=1)
    address: List[int]
    x: RationalField
    r_x: RationalField
    rho: RationalField
    interval: IntervalModel
    density_hi: RationalField
    gamma: RationalField
    delta: RationalField
    status: Literal["certified", "vacuous"]
    epsilon: RationalField


class WitnessCertificateModel(WireModel):
    type: Literal["non-udt"] = "non-udt"
    sequence: SequenceModel
    coarsen: bool = False
    epsilon: RationalField
    levels: List[WitnessLevelModel]
    enclosure: IntervalModel


class SudtStepModel(WireModel):
    j: int = Field(ge=1)
    k_prime: int
    m_prime: int
    m: int
    n_prime: int
    i: int
    chain: List[int]
    check_a: List[CheckResultModel]
    check_b: List[CheckResultModel]


class SudtCertificateModel(WireModel):
    type: Literal["non-sudt"] = "non-sudt"
    sequence: SequenceModel
    base_checks: List[CheckResultModel]
    steps: List[SudtStepModel]
    enclosure: IntervalModel


class FiniteUnionCertificateModel(WireModel):
    type: Literal["sudt-finite"] = "sudt-finite"
    components: List[IntervalModel]
    gamma: str
    delta: RationalField
    deltas: List[RationalField]
    checks: List[CheckResultModel]


class SuiteReportModel(WireModel):
    suite: str
    passed: bool
    checks: List[CheckResultModel]
