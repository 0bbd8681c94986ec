import math
from enum import Enum
from typing import Dict, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

DEFAULT_CHI0_MODE = "paper-default"
DEFAULT_BOUND_CONST = 3.0 / (32.0 * math.pi ** 2)


class HelferParams(BaseModel):
    """Validated state parameters. Build through params.make_params."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    lambda_: float = Field(alias="lambda")
    p0: float
    q: float
    chi0: float
    n_norm: float = 1.0


class GridScale(str, Enum):
    LINEAR = "linear"
    LOG = "log"


class GridSpec(BaseModel):
    """1D sampling grid. min == max is allowed only as a pinned single point."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    min: float
    max: float
    count: int
    scale: GridScale = GridScale.LINEAR

    @model_validator(mode="after")
    def check_bounds(self):
        if not (math.isfinite(self.min) and math.isfinite(self.max)):
            raise ValueError("grid bounds must be finite")
        if self.count == 1:
            if self.min != self.max:
                raise ValueError("a single-point grid needs min == max")
        elif self.count < 2:
            raise ValueError(f"grid count must be >= 2, got {self.count}")
        elif not self.min < self.max:
            raise ValueError(f"grid needs min < max, got [{self.min}, {self.max}]")
        if self.scale == GridScale.LOG and self.min <= 0:
            raise ValueError("log-scaled grid requires min > 0")
        return self

    @property
    def pinned(self) -> bool:
        return self.count == 1

    def points(self) -> np.ndarray:
        if self.pinned:
            return np.array([self.min])
        if self.scale == GridScale.LOG:
            return np.geomspace(self.min, self.max, self.count)
        # min + span * (i / (count - 1)) puts the midpoint of a symmetric grid at exactly 0
        points = self.min + (self.max - self.min) * (np.arange(self.count) / (self.count - 1))
        points[-1] = self.max
        return points


class FieldSample(BaseModel):
    model_config = ConfigDict(frozen=True)

    r: float
    t: float
    rho1: float
    rho2: float
    rho: float
    flux: float


class ProfileBranch(str, Enum):
    SERIES = "series"
    CLOSED_FORM = "closed-form"


class ProfileValue(BaseModel):
    model_config = ConfigDict(frozen=True)

    value: float
    branch: ProfileBranch


class CaseLabel(str, Enum):
    """Sign classification of a vacuum correlator sample.

    2D, energy density on x'=0 and flux on t=0:
      A-positive  t'<0, x>0, C>0: positive density earlier, flux away from x'=0 afterwards
      A-negative  t'<0, x<0, C<0: same case seen from the other side of x'=0
      B-negative  t'>0, x>0, C<0: inward flux first, positive density later
      B-positive  t'>0, x<0, C>0: mirror image of B-negative
    4D, density at r'=0 and radial flux at radius r:
      outgoing-correlated  dt>0: positive density earlier goes with outgoing flux later
      ingoing-correlated   dt<0: outgoing flux earlier goes with negative density later
    """

    A_POSITIVE = "A-positive"
    A_NEGATIVE = "A-negative"
    B_POSITIVE = "B-positive"
    B_NEGATIVE = "B-negative"
    INGOING = "ingoing-correlated"
    OUTGOING = "outgoing-correlated"
    LIGHTCONE = "lightcone"
    UNCORRELATED = "uncorrelated"


class CorrSample(BaseModel):
    model_config = ConfigDict(frozen=True)

    coord_a: float
    coord_b: float
    c_value: Optional[float] = None
    case_label: CaseLabel


class ShellSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    lambda_lo: float
    lambda_hi: float


class MCEstimate(BaseModel):
    model_config = ConfigDict(frozen=True)

    mean: float
    std_error: float
    n_samples: int
    n_accepted: int
    seed: int
    imag_mean: float = 0.0
    elapsed: float = 0.0

    def report(self) -> dict:
        # elapsed stays out so reports are reproducible byte for byte
        return self.model_dump(exclude={"elapsed"})


class OracleCheck(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    r: float
    t: float
    estimate: MCEstimate
    target: float
    tolerance: float
    passed: bool


class QIReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    r: float
    tau_or_T: float
    averaged_rho: float
    bound_value: float
    margin: float
    passed: bool


class HorizonResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    t_star: Optional[float] = None
    all_positive_beyond: bool
    n_crossings: int


class ParamsInput(BaseModel):
    """Config-file form of the state parameters (chi0 may be the paper default)."""

    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    lambda_: float = Field(default=1000.0, alias="lambda")
    p0: float = 1.0
    q: float = 10.0
    chi0: Union[float, Literal["paper-default"]] = DEFAULT_CHI0_MODE


class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    params: ParamsInput = ParamsInput()
    seed: int = Field(default=20090127, ge=0, lt=2 ** 64)
    output_dir: str = "out"
    grids: Dict[str, GridSpec] = {}
    bound_const: float = DEFAULT_BOUND_CONST
    workers: int = Field(default=8, ge=1)

    def to_json(self) -> str:
        return self.model_dump_json(by_alias=True, indent=2)
