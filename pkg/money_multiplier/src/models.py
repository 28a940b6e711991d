# src/models.py
import math
from enum import Enum
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

SIGMA_SUM_TOL = 1e-12

# Parameters the calibrator is allowed to move
CALIBRATED_PARAMETERS = ("theta", "A", "B", "b", "k", "E", "sigma1")

TARGET_NAMES = (
    "markup",
    "uc_over_dm",
    "r_over_y",
    "pi_over_y",
    "cd_ratio",
    "c_over_y",
    "semi_elasticity",
    "pi_over_d",
)


class FrozenModel(BaseModel):
    """Immutable, strictly validated record"""

    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)


class Regime(str, Enum):
    NO_BANKING = "no_banking"
    SCARCE = "scarce"
    AMPLE = "ample"


class OutputDefinition(str, Enum):
    """Denominator used for every ratio to output"""

    UTILITY_SCALE = "utility_scale"  # Y = B + sum sigma_j z_j
    CM_NORMALIZED = "cm_normalized"  # Y = 1 + sum sigma_j z_j


class WelfareShare(str, Enum):
    """Surplus share credited to the buyer in the welfare measure"""

    PRINTED = "printed"  # 1 - theta
    KALAI = "kalai"  # theta


class Preferences(FrozenModel):
    """DM utility u(q) = B q^(1-b) / (1-b), cost c(q) = q, buyer power theta"""

    B: float = Field(gt=0)
    b: float = Field(gt=0, lt=1)
    theta: float = Field(gt=0, le=1)

    @model_validator(mode="after")
    def _finite_satiation(self) -> "Preferences":
        try:
            q_star = self.B ** (1.0 / self.b)
        except OverflowError:
            q_star = math.inf
        if not math.isfinite(q_star) or q_star <= 0:
            raise ValueError(f"B={self.B}, b={self.b} give a non-finite efficient quantity")
        return self


class TradeOutcome(FrozenModel):
    q: float = Field(ge=0)
    p: float = Field(ge=0)


class BankCostParams(FrozenModel):
    """Deposit cost A d^a, enforcement cost E l^2 and entry cost k"""

    A: float = Field(gt=0)
    a: float = Field(gt=1)
    E: float = Field(gt=0)
    k: float = Field(gt=0)


class PolicyPoint(FrozenModel):
    i: float
    i_r: float = Field(ge=0)
    chi: float = Field(gt=0, le=1)
    delta_bar: float = Field(default=0.0, ge=0)
    sigma: Tuple[float, float, float]

    @field_validator("i")
    @classmethod
    def _nonnegative_nominal_rate(cls, value: float) -> float:
        if value < 0:
            raise ValueError(
                f"i={value}: a stationary monetary equilibrium requires i >= 0"
            )
        return value

    @field_validator("sigma")
    @classmethod
    def _probabilities(cls, value: Tuple[float, float, float]) -> Tuple[float, float, float]:
        if any(s < 0 for s in value):
            raise ValueError(f"meeting probabilities must be non-negative, got {value}")
        if abs(sum(value) - 1.0) > SIGMA_SUM_TOL:
            raise ValueError(f"meeting probabilities must sum to 1, got {sum(value)!r}")
        return value

    @property
    def kappa(self) -> float:
        """Maximum loans per unit of reserves, (1 - chi) / chi"""
        return (1.0 - self.chi) / self.chi

    def with_changes(self, **changes) -> "PolicyPoint":
        """Copy with some fields replaced, re-validated"""
        return PolicyPoint(**{**self.model_dump(), **changes})


class ModelParameters(FrozenModel):
    """Full parameter bundle; defaults are the pre-2008 calibration"""

    theta: float = Field(default=0.454, gt=0, le=1)
    B: float = Field(default=0.825, gt=0)
    b: float = Field(default=0.398, gt=0, lt=1)
    A: float = Field(default=0.0017, gt=0)
    a: float = Field(default=1.2, gt=1)
    E: float = Field(default=0.001, gt=0)
    k: float = Field(default=0.0011, gt=0)
    sigma1: float = Field(default=0.187, ge=0, le=1)
    sigma3: float = Field(default=0.69, ge=0, le=1)

    @model_validator(mode="after")
    def _meeting_probabilities(self) -> "ModelParameters":
        if self.sigma1 + self.sigma3 > 1.0:
            raise ValueError(
                f"sigma1 + sigma3 = {self.sigma1 + self.sigma3} exceeds 1"
            )
        # Raises on a non-finite efficient quantity
        Preferences(B=self.B, b=self.b, theta=self.theta)
        return self

    @property
    def sigma2(self) -> float:
        return max(0.0, 1.0 - self.sigma1 - self.sigma3)

    @property
    def sigma(self) -> Tuple[float, float, float]:
        return (self.sigma1, self.sigma2, self.sigma3)

    @property
    def preferences(self) -> Preferences:
        return Preferences(B=self.B, b=self.b, theta=self.theta)

    @property
    def bank_costs(self) -> BankCostParams:
        return BankCostParams(A=self.A, a=self.a, E=self.E, k=self.k)

    def policy(self, i: float, i_r: float, chi: float, delta_bar: float = 0.0) -> PolicyPoint:
        return PolicyPoint(i=i, i_r=i_r, chi=chi, delta_bar=delta_bar, sigma=self.sigma)

    def with_changes(self, **changes) -> "ModelParameters":
        return ModelParameters(**{**self.model_dump(), **changes})


class Thresholds(FrozenModel):
    i_r: float
    chi: float
    i_lower: float
    i_hat: float
    i_bar: float
    i_floor: float
    r_hat: float = Field(gt=0)
    r_lower: float = Field(gt=0)
    gamma_prime_r_hat: float = Field(ge=0)
    gamma_prime_r_lower: float = Field(ge=0)

    @model_validator(mode="after")
    def _ordered(self) -> "Thresholds":
        if self.i_r > self.gamma_prime_r_hat and not self.i_bar > self.i_lower:
            raise ValueError(
                f"i_bar={self.i_bar} does not exceed i_lower={self.i_lower} at i_r={self.i_r}"
            )
        return self


class BankAllocation(FrozenModel):
    r_tilde: float = Field(ge=0)
    l_tilde: float = Field(ge=0)
    i_d: float
    i_l: float
    lambda_L: float = Field(ge=0)
    n: float = Field(ge=0)


class MeetingOutcome(FrozenModel):
    j: int = Field(ge=1, le=3)
    q: float = Field(ge=0)
    p: float = Field(ge=0)
    z: float = Field(ge=0)
    m: float = Field(ge=0)
    d: float = Field(ge=0)
    l: float = Field(ge=0)
    credit_used: float = Field(ge=0)


class Equilibrium(FrozenModel):
    regime: Regime
    policy: PolicyPoint
    bank: BankAllocation
    meetings: Tuple[MeetingOutcome, MeetingOutcome, MeetingOutcome]
    m: float = Field(ge=0)
    r: float = Field(ge=0)
    l: float = Field(ge=0)
    delta_hat: float = Field(ge=0)

    def meeting(self, j: int) -> MeetingOutcome:
        return self.meetings[j - 1]


class AggregateStats(FrozenModel):
    m0: float
    m1: float
    zeta: float
    cd_ratio: Optional[float]
    required: float
    excess: float
    excess_ratio: Optional[float]
    y: float = Field(gt=0)
    c_over_y: float
    r_over_y: float
    uc_over_y: float
    uc_over_dm: Optional[float]
    markup: Optional[float]
    pi_over_y: float
    pi_over_d: Optional[float]

    @field_validator("zeta")
    @classmethod
    def _multiplier_bound(cls, value: float) -> float:
        if value < 1.0 - 1e-12:
            raise ValueError(f"money multiplier {value} below its lower bound 1")
        return value


class WelfareReport(FrozenModel):
    jb: Tuple[float, float, float]
    js: Tuple[float, float, float]
    total: float
    dispersion: float = Field(ge=0)


class ScenarioRow(FrozenModel):
    period: str
    i: float = Field(ge=0)
    i_r: float = Field(ge=0)
    chi: float = Field(gt=0, le=1)
    uc_over_y_obs: float = Field(ge=0)


class SeriesRecord(FrozenModel):
    """One period of a simulated or counterfactual series"""

    period: str
    regime: Regime
    i: float
    i_r: float
    chi: float
    delta_bar: float
    zeta: float
    excess_ratio: Optional[float]
    cd_ratio: Optional[float]
    r_over_y: float
    c_over_y: float
    uc_over_y: float
    m: float
    required: float
    excess: float
    m0: float
    welfare_total: float


class ChowTestResult(FrozenModel):
    f_stat: float = Field(ge=0, allow_inf_nan=True)
    df_num: int
    df_den: int
    nobs: int = Field(gt=0)
    p_value: float
    rss_restricted: float
    rss_unrestricted: float
    breaks: Tuple[int, ...]


class RegressionResult(FrozenModel):
    names: Tuple[str, ...]
    coefficients: Tuple[float, ...]
    std_errors: Tuple[float, ...]
    lag: int = Field(ge=0)
    r_squared: float
    adj_r_squared: float
    residuals: Tuple[float, ...]
    nobs: int
    chow: Optional[ChowTestResult] = None

    @model_validator(mode="after")
    def _shapes(self) -> "RegressionResult":
        if not (len(self.names) == len(self.coefficients) == len(self.std_errors)):
            raise ValueError("coefficient, name and standard-error counts differ")
        return self

    def coefficient(self, name: str) -> float:
        return self.coefficients[self.names.index(name)]


class ParameterBound(FrozenModel):
    name: str
    lower: float
    upper: float

    @model_validator(mode="after")
    def _known_and_ordered(self) -> "ParameterBound":
        if self.name not in CALIBRATED_PARAMETERS:
            raise ValueError(
                f"'{self.name}' is not a calibrated parameter; choose from {CALIBRATED_PARAMETERS}"
            )
        if not self.lower < self.upper:
            raise ValueError(f"bound for {self.name}: lower {self.lower} >= upper {self.upper}")
        return self


class CalibrationTarget(FrozenModel):
    name: str
    value: float
    weight: float = Field(default=1.0, ge=0)

    @field_validator("name")
    @classmethod
    def _known_target(cls, value: str) -> str:
        if value not in TARGET_NAMES:
            raise ValueError(f"unknown calibration target '{value}'; choose from {TARGET_NAMES}")
        return value

    @model_validator(mode="after")
    def _nonzero_when_weighted(self) -> "CalibrationTarget":
        if self.weight > 0 and self.value == 0:
            raise ValueError(f"target {self.name} is zero; relative residuals are undefined")
        return self


class CalibrationSpec(FrozenModel):
    free: Tuple[ParameterBound, ...]
    initial: ModelParameters = Field(default_factory=ModelParameters)
    targets: Tuple[CalibrationTarget, ...]
    scenario: Tuple[ScenarioRow, ...]
    starts: int = Field(default=16, ge=1)
    seed: int = 0
    max_iter: int = Field(default=4000, ge=1)

    @model_validator(mode="after")
    def _consistent(self) -> "CalibrationSpec":
        names = [bound.name for bound in self.free]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate free parameters in {names}")
        if not self.scenario:
            raise ValueError("calibration needs at least one scenario row")
        for bound in self.free:
            start = getattr(self.initial, bound.name)
            if not bound.lower <= start <= bound.upper:
                raise ValueError(
                    f"initial {bound.name}={start} lies outside [{bound.lower}, {bound.upper}]"
                )
        return self


class StartLog(FrozenModel):
    index: int
    start: Dict[str, float]
    objective: float = Field(allow_inf_nan=True)
    iterations: int
    success: bool
    message: str


class CalibrationResult(FrozenModel):
    parameters: ModelParameters
    objective: float
    moments: Dict[str, Optional[float]]
    residuals: Dict[str, Optional[float]]
    starts: List[StartLog] = Field(default_factory=list)
