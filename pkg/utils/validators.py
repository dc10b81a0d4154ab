import math
from enum import Enum
from pathlib import Path
from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


def _split_list(value: Any) -> Any:
    """Accept '1.1, 1.5' style strings for list-valued parameters."""
    if isinstance(value, str):
        return [item.strip() for item in value.split(',') if item.strip()]
    if isinstance(value, (int, float)):
        return [value]
    return value


# --------------------------------------------------------------------------- enums

class TailPolicy(str, Enum):
    TRUNCATE = 'truncate'
    TAIL_BOUND = 'tail_bound'


class NormalizationMode(str, Enum):
    RIESZ = 'riesz'
    UNIT = 'unit'


class RadiusRule(str, Enum):
    STANDARD = 'standard'
    CERTIFIED = 'certified'


class EnvelopeKind(str, Enum):
    POWER = 'power'
    LOWER = 'lower'
    UPPER = 'upper'


class InitialDataKind(str, Enum):
    SADDLE = 'saddle'
    ELLIPTIC = 'elliptic'
    SINGLE_MODE = 'single_mode'


class ProfileKind(str, Enum):
    LINEAR = 'linear'
    TANH = 'tanh'


class CommandName(str, Enum):
    VERIFY = 'verify'
    BOUNDS = 'bounds'
    ANGLE = 'angle'
    BLOWUP_TIME = 'blowup-time'
    ORACLE = 'oracle'
    SIMULATE = 'simulate'


# --------------------------------------------------------------------------- special functions

class SeriesControl(BaseModel):
    """
    Truncation policy for the ratio-generated series of the special-function layer.

    ``abs_tol`` stops summation at the first term below it. When the budget
    ``max_terms`` runs out first, ``tail_bound`` adds an analytic tail estimate
    and accepts the sum if the estimate is self-consistent within ``tail_tol``;
    ``truncate`` reports non-convergence.
    """
    model_config = ConfigDict(frozen=True)

    max_terms: int = Field(200_000, ge=1)
    abs_tol: float = Field(1e-16, ge=0)
    tail_policy: TailPolicy = TailPolicy.TAIL_BOUND
    tail_tol: float = Field(1e-9, ge=0)
    chunk_size: int = Field(8192, ge=1)

    @classmethod
    def tight(cls) -> "SeriesControl":
        return cls(max_terms=400_000, abs_tol=1e-18, tail_policy=TailPolicy.TAIL_BOUND, tail_tol=1e-10)


class SeriesResult(BaseModel):
    value: float
    terms_used: int
    converged: bool
    tail_estimate: float = 0.0
    error_estimate: float = 0.0


class Hyp2F1Args(BaseModel):
    model_config = ConfigDict(frozen=True)

    a: float
    b: float
    c: float
    z: float = Field(ge=0.0, le=1.0)

    @field_validator('c')
    @classmethod
    def c_not_pole(cls, c: float) -> float:
        if c <= 0 and float(c).is_integer():
            raise ValueError(f"c = {c} is a non-positive integer")
        return c


class BetaParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    beta: float = Field(gt=1.0, lt=2.0)
    sigma: float = Field(gt=0.0)

    @model_validator(mode='after')
    def sigma_below_beta(self) -> "BetaParams":
        if self.sigma >= self.beta - 1.0:
            raise ValueError(f"sigma must lie in (0, beta - 1) = (0, {self.beta - 1.0:g})")
        return self


# --------------------------------------------------------------------------- kernel

class QuadControl(BaseModel):
    model_config = ConfigDict(frozen=True)

    abs_tol: float = Field(1e-10, gt=0)
    max_subdivisions: int = Field(200, ge=1)
    singularity_ring_width: float = Field(0.25, gt=0)
    max_attempts: int = Field(3, ge=1)


class KernelSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    beta: float = Field(gt=1.0, lt=2.0)
    v: tuple[float, float] = (1.0, 0.0)
    r_in: float = Field(0.0, ge=0.0)
    r_out: float

    @field_validator('v')
    @classmethod
    def unit_vector(cls, v: tuple[float, float]) -> tuple[float, float]:
        if abs(math.hypot(*v) - 1.0) > 1e-12:
            raise ValueError(f"v = {v} is not a unit vector")
        return v

    @model_validator(mode='after')
    def ordered_radii(self) -> "KernelSpec":
        if self.r_out <= self.r_in:
            raise ValueError(f"r_out ({self.r_out}) must exceed r_in ({self.r_in})")
        return self


# --------------------------------------------------------------------------- bounds

class BoundContext(BaseModel):
    """Inputs of the stream-function lower bound; ``r`` may be left unset and computed."""
    model_config = ConfigDict(frozen=True)

    beta: float = Field(gt=1.0, lt=2.0)
    sigma: float = Field(gt=0.0)
    K_const: float = Field(gt=0.0)
    L: float = Field(gt=1.0)
    N_sigma: float = Field(gt=0.0)
    theta0_inf: float = Field(gt=0.0)
    C_beta_norm: float = Field(1.0, gt=0.0)
    r: Optional[float] = Field(None, gt=0.0)

    @model_validator(mode='after')
    def sigma_below_beta(self) -> "BoundContext":
        if self.sigma >= self.beta - 1.0:
            raise ValueError(f"sigma must lie in (0, beta - 1) = (0, {self.beta - 1.0:g})")
        return self


class FieldNorms(BaseModel):
    sup_norm: float = Field(ge=0.0)
    l2_norm: float = Field(ge=0.0)


class UpperBoundConstants(BaseModel):
    near: float
    mid: float
    far: float


class StreamBoundReport(BaseModel):
    tau: float = Field(gt=0.0)
    lower: float = Field(ge=0.0)
    upper: Optional[float] = None
    i1: float
    i2_bound: float
    i3_bound: float
    i4_bound: float
    chain_lower: float
    constants: Optional[UpperBoundConstants] = None

    @property
    def remainder_ratio(self) -> float:
        """(I2 + I3) / I1, at most 1/2 when the radius is admissible."""
        return (self.i2_bound + self.i3_bound) / self.i1 if self.i1 > 0 else math.inf


# --------------------------------------------------------------------------- angle dynamics

class StepControl(BaseModel):
    model_config = ConfigDict(frozen=True)

    rtol: float = Field(1e-10, gt=0)
    atol: float = Field(1e-12, gt=0)
    method: str = 'DOP853'
    max_step: float = Field(math.inf, gt=0)


class AngleState(BaseModel):
    t: float = Field(ge=0.0)
    gamma: float = Field(ge=0.0)
    depth: Optional[float] = None


class AngleTrajectory(BaseModel):
    samples: list[AngleState]
    vanish_time: Optional[float] = None
    gamma_floor: float = Field(gt=0.0)
    finite_collapse: bool = True
    step_underflow: bool = False

    @model_validator(mode='after')
    def monotone(self) -> "AngleTrajectory":
        for prev, cur in zip(self.samples, self.samples[1:]):
            if cur.t <= prev.t:
                raise ValueError(f"sample times must increase ({prev.t} -> {cur.t})")
            if cur.gamma > prev.gamma * (1.0 + 1e-12):
                raise ValueError(f"opening angle increased at t={cur.t}")
        return self

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    @property
    def gammas(self) -> np.ndarray:
        return np.array([s.gamma for s in self.samples])


# --------------------------------------------------------------------------- simulation

class SimConfig(BaseModel):
    """
    Simulation parameters. Field names are the keys of the ``key = value``
    configuration files.
    """
    model_config = ConfigDict(frozen=True, extra='forbid')

    beta: float = Field(gt=1.0, lt=2.0)
    n: int
    dt: float = Field(gt=0.0)
    t_end: float = Field(ge=0.0)
    box_length: float = Field(2 * math.pi, gt=0.0)
    dealias: float = Field(2.0 / 3.0, gt=0.0, le=1.0)
    cfl_max: float = Field(0.5, gt=0.0)
    initial_data: InitialDataKind = InitialDataKind.SADDLE
    alpha0: float = 0.1
    delta0: float = 0.1
    a0: float = Field(1.0, gt=0.0)
    b0: float = Field(2.0, gt=0.0)
    mode_k: int = Field(1, ge=1)
    profile: ProfileKind = ProfileKind.LINEAR
    amplitude: float = 1.0
    profile_width: float = Field(1.0, gt=0.0)
    offset: float = 1.0
    cutoff_radius: float = Field(2.0, gt=0.0)
    sigma: float = Field(0.25, gt=0.0, lt=1.0)
    level_values: tuple[float, float] = (0.9, 0.95)
    epsilon_level: float = Field(0.05, gt=0.0, lt=1.0)
    fit_radius: Optional[float] = Field(None, gt=0.0)
    diag_every: int = Field(10, ge=1)
    snapshot_every: int = Field(0, ge=0)

    @field_validator('level_values', mode='before')
    @classmethod
    def parse_levels(cls, value: Any) -> Any:
        return _split_list(value)

    @field_validator('n')
    @classmethod
    def power_of_two(cls, n: int) -> int:
        if n < 8 or n & (n - 1):
            raise ValueError(f"n = {n} must be a power of two >= 8")
        return n

    @model_validator(mode='after')
    def geometry(self) -> "SimConfig":
        if self.initial_data is not InitialDataKind.SINGLE_MODE and self.cutoff_radius >= self.box_length / 2:
            raise ValueError(
                f"cutoff_radius ({self.cutoff_radius}) must be below half the box ({self.box_length / 2:g})")
        if self.initial_data is InitialDataKind.SADDLE and self.offset == 0.0:
            raise ValueError("offset g(0) must be nonzero for saddle data")
        if self.level_values[0] == self.level_values[1]:
            raise ValueError("level_values must be two distinct levels")
        if self.alpha0 * self.delta0 == 1.0:
            raise ValueError("alpha0 * delta0 must differ from 1")
        return self

    @property
    def effective_fit_radius(self) -> float:
        return self.fit_radius if self.fit_radius is not None else self.cutoff_radius / 3.0


class ScalarField(BaseModel):
    """Periodic grid function; ``values[i, j]`` sits at (x1[i], x2[j]) with the origin at node n/2."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    n: int
    box_length: float = Field(2 * math.pi, gt=0.0)
    values: np.ndarray
    time: float = Field(0.0, ge=0.0)

    @model_validator(mode='after')
    def shape_matches(self) -> "ScalarField":
        if self.values.shape != (self.n, self.n):
            raise ValueError(f"values shape {self.values.shape} does not match n = {self.n}")
        return self

    @property
    def spacing(self) -> float:
        return self.box_length / self.n

    @property
    def axis(self) -> np.ndarray:
        return -self.box_length / 2 + self.spacing * np.arange(self.n)

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.values).all())

    def with_values(self, values: np.ndarray, time: Optional[float] = None) -> "ScalarField":
        return ScalarField(n=self.n, box_length=self.box_length, values=values,
                           time=self.time if time is None else time)


class DiagRecord(BaseModel):
    time: float
    sup_theta: float
    l2_theta: float
    sup_grad: float
    holder_seminorm: float
    theta_at_origin: float
    opening_angle: Optional[float] = None
    level_distance: Optional[float] = None
    holder_time_integral: float = Field(ge=0.0)
    sup_velocity: float

    @model_validator(mode='after')
    def finite(self) -> "DiagRecord":
        for name, value in self.model_dump().items():
            if value is not None and not math.isfinite(value):
                raise ValueError(f"diagnostic '{name}' is not finite")
        return self

    @property
    def holder_norm(self) -> float:
        return self.sup_theta + self.holder_seminorm


# --------------------------------------------------------------------------- verification

class IdentityRow(BaseModel):
    """One closed-form vs oracle comparison of the ``verify`` report."""
    identity: str
    beta: Optional[float] = None
    L: Optional[float] = None
    closed_form: float
    oracle: float
    abs_diff: float
    passed: bool

    def csv_row(self) -> list[Any]:
        return [self.identity, self.beta, self.L, self.closed_form, self.oracle, self.abs_diff, self.passed]


# --------------------------------------------------------------------------- command line

class CommandSpec(BaseModel):
    command: CommandName
    parameters: dict[str, Any] = Field(default_factory=dict)
    output_path: Path
    seed: int = Field(12345, ge=0)
    plot: bool = False


class VerifyParams(BaseModel):
    model_config = ConfigDict(extra='forbid')

    beta: Optional[float] = Field(None, gt=1.0, lt=2.0)
    L: Optional[float] = Field(None, gt=1.0)
    perturb_a: float = 0.0
    series_tol: float = Field(1e-8, gt=0)
    soma_tol: float = Field(1e-6, gt=0)
    angular_tol: float = Field(1e-8, gt=0)
    annulus_rel_tol: float = Field(1e-5, gt=0)
    identity_rel_tol: float = Field(1e-6, gt=0)
    inc_beta_samples: int = Field(5, ge=0)


class BoundsParams(BaseModel):
    model_config = ConfigDict(extra='forbid')

    beta: list[float] = [1.5]
    sigma: Optional[list[float]] = None
    sigma_fraction: list[float] = [0.5]
    K: Optional[float] = Field(None, gt=0.0)
    L: Optional[float] = Field(None, gt=1.0)
    Nsigma: float = Field(10.0, gt=0.0)
    theta0: float = Field(1.0, gt=0.0)
    tau: Optional[float] = Field(None, gt=0.0)
    p1_norm: Optional[float] = Field(None, ge=0.0)
    sup_norm: Optional[float] = Field(None, gt=0.0)
    l2_norm: float = Field(1.0, ge=0.0)
    L_cut: float = Field(1.0, gt=0.0)
    normalization: NormalizationMode = NormalizationMode.RIESZ
    radius_rule: RadiusRule = RadiusRule.CERTIFIED

    split_lists = field_validator('beta', 'sigma', 'sigma_fraction', mode='before')(_split_list)


class AngleParams(BaseModel):
    model_config = ConfigDict(extra='forbid')

    envelope: EnvelopeKind = EnvelopeKind.UPPER
    beta: float = Field(1.5, ge=1.0, lt=2.0)
    gamma0: float = Field(0.01, gt=0.0, lt=1.0)
    C: float = Field(1.0, gt=0.0)
    C2: float = Field(1.0, gt=0.0)
    C_tilde: Optional[float] = Field(None, gt=0.0)
    C3: float = Field(0.0, ge=0.0)
    theta0: float = Field(1.0, gt=0.0)
    m_p: float = Field(1.0, gt=0.0)
    t_max: float = Field(10.0, gt=0.0)
    gamma_floor: Optional[float] = Field(None, gt=0.0, lt=1.0)
    rtol: Optional[float] = Field(None, gt=0.0)
    atol: Optional[float] = Field(None, gt=0.0)


class BlowupTimeParams(BaseModel):
    model_config = ConfigDict(extra='forbid')

    beta: list[float] = [1.5]
    gamma0: list[float] = [0.01]
    C: list[float] = [1.0]
    abs_tol: Optional[float] = Field(None, gt=0.0)

    split_lists = field_validator('beta', 'gamma0', 'C', mode='before')(_split_list)


class OracleParams(BaseModel):
    model_config = ConfigDict(extra='forbid')

    beta: list[float] = [1.5]
    r_in: float = Field(0.0, ge=0.0)
    r_out: float = Field(1.0, gt=0.0)
    v1: float = 1.0
    v2: float = 0.0
    abs_tol: Optional[float] = Field(None, gt=0.0)
    max_subdivisions: Optional[int] = Field(None, ge=1)

    split_lists = field_validator('beta', mode='before')(_split_list)
