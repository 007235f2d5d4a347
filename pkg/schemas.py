from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from typing import Optional, List, Dict, Tuple, Literal
from datetime import datetime
from enum import Enum
import math

from config import settings

class StabilityEnum(str, Enum):
    attracting = "attracting"
    repelling = "repelling"
    neutral = "neutral"

# ---------------------------------------------------------------- map core

class GameSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    alpha: float = Field(..., gt=0, description="Cost coefficient of strategy 1")
    beta: float = Field(..., gt=0, description="Cost coefficient of strategy 2")
    epsilon: float = Field(..., gt=0, lt=1, description="MWU learning rate")

class Params(BaseModel):
    model_config = ConfigDict(frozen=True)

    a: float = Field(..., gt=0, le=settings.A_MAX, description="Learning-rate composite")
    b: float = Field(..., gt=0, lt=1, description="Interior fixed point / Nash coordinate")

    @property
    def is_bimodal(self) -> bool:
        return self.a > 4

    @property
    def repelling_threshold(self) -> float:
        return 2 / (self.b * (1 - self.b))

    @property
    def interior_fp_repelling(self) -> bool:
        return self.a > self.repelling_threshold

    def mirrored(self) -> "Params":
        return Params(a=self.a, b=1 - self.b)

class CostTable(BaseModel):
    c11: float
    c12: float
    c21: float
    c22: float

class StabilityReport(BaseModel):
    point: float = Field(..., ge=0, le=1)
    multiplier: float
    label: StabilityEnum

class FixedPointStability(BaseModel):
    params: Params
    reports: List[StabilityReport]

class SchwarzianReport(BaseModel):
    a: float
    t_star: float
    p_at_t_star: float
    p_grid_min: float
    sg_grid_max: float
    grid_size: int
    positive: bool
    negative: bool

# ---------------------------------------------------------- interval dynamics

class Orbit(BaseModel):
    """Finite diagonal trajectory.

    ``partial_sums[k]`` is the sum of ``points[j] - b`` over ``j < k``, so
    ``logit(points[k]) == logit(x0) - a * partial_sums[k]`` in exact arithmetic.
    """
    params: Params
    x0: float = Field(..., ge=0, le=1)
    points: List[float]
    partial_sums: List[float]

    @model_validator(mode="after")
    def check_lengths(self):
        if len(self.points) != len(self.partial_sums):
            raise ValueError("points and partial_sums must have equal length")
        return self

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def partial_sum(self) -> float:
        return self.partial_sums[-1] + (self.points[-1] - self.params.b)

    @property
    def mean(self) -> float:
        return math.fsum(self.points) / len(self.points)

class InvariantInterval(BaseModel):
    params: Params
    delta: float = Field(..., gt=0, lt=0.5)
    lo: float
    hi: float
    ladder_k: int
    entry_bound: int = Field(..., ge=0)
    entry_bound_capped: bool = False
    image_min: float
    image_max: float

    @model_validator(mode="after")
    def check_bounds(self):
        if self.lo != self.delta or self.hi != 1 - self.delta:
            raise ValueError("interval must be [delta, 1 - delta]")
        return self

class PeriodicOrbit(BaseModel):
    period: int = Field(..., ge=1)
    points: List[float]
    multiplier: float
    stability: StabilityEnum
    center_of_mass: float
    residual: float = 0.0

    @property
    def interior(self) -> bool:
        return all(0 < x < 1 for x in self.points)

class CycleReport(BaseModel):
    params: Params
    max_period: int
    cycles: List[PeriodicOrbit]

    def periods(self) -> List[int]:
        return sorted({c.period for c in self.cycles})

    def of_period(self, m: int) -> List[PeriodicOrbit]:
        return [c for c in self.cycles if c.period == m]

class CesaroReport(BaseModel):
    params: Params
    x0: float
    n: int
    burn_in: int = 0
    delta: float
    average: float
    bound: float
    residual: float
    within_bound: bool

class ChaosWitness(BaseModel):
    params: Params
    x_witness: Optional[float] = None
    satisfied: bool
    orientation: Literal["forward", "reversed"] = "forward"
    margin: float = 1e-9
    a_threshold_estimate: Optional[float] = None

class ThresholdEstimate(BaseModel):
    b: float
    estimate: float
    lo: float
    hi: float
    tol: float
    monotonicity_assumed: bool = True
    label: Literal["estimate"] = "estimate"

class SigmaReport(BaseModel):
    a: float
    sigma: float
    residual: float = Field(..., description="|f(sigma) - (1 - sigma)| at b = 1/2")

class SymmetricLimitKind(str, Enum):
    fixed_point = "fixed_point"
    two_cycle = "two_cycle"
    exceptional = "exceptional"
    undecided = "undecided"

class SymmetricLimit(BaseModel):
    a: float
    x0: float
    kind: SymmetricLimitKind
    limit_points: List[float] = []
    sigma: Optional[float] = None
    steps: int
    hit_step: Optional[int] = None

class LyapunovReport(BaseModel):
    params: Params
    x0: float
    n: int
    burn_in: int
    exponent: float

class AttractionEvidence(BaseModel):
    params: Params
    below_threshold: bool
    starts: int
    converged: int
    max_final_distance: float
    label: Literal["evidence"] = "evidence"

class LiYorkeStatistics(BaseModel):
    params: Params
    x: float
    y: float
    n: int
    liminf_distance: float
    limsup_distance: float

# ----------------------------------------------------------- planar dynamics

class PlanarOrbit(BaseModel):
    params: Params
    start: Tuple[float, float]
    points: List[Tuple[float, float]]
    partial_sums_x: List[float]
    partial_sums_y: List[float]

    @field_validator("start")
    @classmethod
    def validate_start(cls, v):
        if not all(0 <= c <= 1 for c in v):
            raise ValueError("start must lie in the unit square")
        return v

    @property
    def n(self) -> int:
        return len(self.points)

class RegionEnum(str, Enum):
    V = "V"
    T_delta = "T_delta"
    S_r = "S_r"
    S_ell = "S_ell"
    diagonal = "diagonal"

class RegionLabel(BaseModel):
    region: RegionEnum
    mirrored: bool = False
    delta: float

    @property
    def name(self) -> str:
        if self.mirrored:
            return f"upper_mirror({self.region.value})"
        return self.region.value

class DiagonalJacobian(BaseModel):
    x: float
    matrix: List[List[float]]
    eigenvectors: List[Tuple[float, float]] = [(1.0, 1.0), (1.0, -1.0)]
    tangential_eigenvalue: float
    transverse_eigenvalue: float

class TransverseCertificate(BaseModel):
    params: Params
    delta: float
    N: int = Field(..., ge=1)
    kappa: float = Field(..., gt=1)
    log_kappa: float
    samples: int
    min_log_product: float
    verified_on: str

class PlanarFixedPointReport(BaseModel):
    point: Tuple[float, float]
    eigenvalues: Tuple[float, float]
    attracting: bool
    is_nash: bool
    residual: float
    expected_cost: Optional[float] = None

class FixedPointsReport(BaseModel):
    params: Params
    game: Optional[GameSpec] = None
    fixed_points: List[PlanarFixedPointReport]

class PlanarLimitKind(str, Enum):
    converged = "converged"
    undecided = "undecided"
    diagonal = "diagonal"

class PlanarLimit(BaseModel):
    params: Params
    start: Tuple[float, float]
    kind: PlanarLimitKind
    side: Literal["below", "above", "diagonal"]
    limit: Optional[Tuple[float, float]] = None
    steps: int
    final: Tuple[float, float]
    delta: float
    entered_v_step: Optional[int] = None
    left_v: bool = False
    t_delta_violations: int = 0
    cesaro: Optional[CesaroReport] = None

# ---------------------------------------------------------------- sweeps

class SweepKind(str, Enum):
    bifurcation = "bifurcation"
    lyapunov = "lyapunov"
    threshold = "threshold"
    cesaro = "cesaro"

class ARange(BaseModel):
    model_config = ConfigDict(frozen=True)

    min: float = Field(..., gt=0)
    max: float = Field(..., gt=0, le=settings.A_MAX)
    steps: int = Field(..., ge=0, description="Number of intervals; 0 yields the single value min")

    @model_validator(mode="after")
    def check_order(self):
        if self.max < self.min:
            raise ValueError("a_range max must not be below min")
        return self

class SweepJob(BaseModel):
    model_config = ConfigDict(frozen=True)

    b_values: List[float] = Field(..., min_length=1)
    a_range: ARange
    transient: int = Field(default=settings.SWEEP_TRANSIENT, ge=0)
    samples_per_cell: int = Field(default=settings.SWEEP_SAMPLES, ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)
    kind: SweepKind = SweepKind.bifurcation
    threshold_tol: float = Field(default=settings.THRESHOLD_TOL, ge=1e-6)

    @field_validator("b_values")
    @classmethod
    def validate_b_values(cls, v):
        if not all(0 < b < 1 for b in v):
            raise ValueError("every b must lie in (0, 1)")
        return v

    @property
    def a_grid(self) -> List[float]:
        r = self.a_range
        if r.steps == 0:
            return [r.min]
        return [r.min + (r.max - r.min) * i / r.steps for i in range(r.steps + 1)]

    @property
    def n_cells(self) -> int:
        if self.kind == SweepKind.threshold:
            return len(self.b_values)
        return len(self.b_values) * len(self.a_grid)

class DatasetRow(BaseModel):
    model_config = ConfigDict(ser_json_inf_nan="constants")

    cell: int
    a: float
    b: float
    sample_index: int
    value: float
    flags: List[str] = []

class SweepManifest(BaseModel):
    job: SweepJob
    seed: int
    tool_version: str
    rows: int
    started_at: datetime
    elapsed_ms: float
    workers: int
    flagged_cells: Dict[int, List[str]] = {}

class SweepResult(BaseModel):
    rows: List[DatasetRow]
    manifest: SweepManifest
    csv_path: Optional[str] = None
    manifest_path: Optional[str] = None
