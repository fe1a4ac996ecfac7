import math
from pathlib import Path
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.services.errors import DomainError
from src.services.statevector import MAX_QUBITS, MarkedSet
from src.services.sweeps import SweepMode, grid_points
from src.services.unknown_m import DEFAULT_LAMBDA, DriverConfig
from utils.parsers import parse_iterations, parse_marked_spec
from utils.rng import SEED_MAX


class SimulateInput(BaseModel):
    n: int = Field(ge=1, le=MAX_QUBITS)
    marked: str
    q: Optional[int] = None  # None means "auto"
    seed: int = Field(0, ge=0, le=SEED_MAX)
    trace: bool = False

    @field_validator("marked")
    @classmethod
    def validate_marked(cls, v: str) -> str:
        v = v.strip().strip('"').strip("'")
        if not v:
            raise ValueError("marked cannot be empty")
        return v

    @field_validator("q", mode="before")
    @classmethod
    def parse_q(cls, v):
        """Accepts an int, a numeric string or "auto"."""
        if isinstance(v, str):
            return parse_iterations(v)
        return v

    def marked_set(self) -> MarkedSet:
        return parse_marked_spec(self.marked, self.n, self.seed)


class SweepInput(BaseModel):
    start: float
    stop: float = 1.0
    step: float
    mode: SweepMode = SweepMode.compare

    @model_validator(mode="after")
    def validate_grid(self) -> "SweepInput":
        """
        Validate the ratio grid.

        Requires 0 < start <= stop <= 1 and a positive step; every value must
        be finite.

        Raises:
            ValueError: If the grid is empty or leaves (0, 1]
        """
        for name in ("start", "stop", "step"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.step <= 0.0:
            raise ValueError(f"step must be positive, got {self.step}")
        if self.start <= 0.0:
            raise ValueError(f"start must be positive, got {self.start}")
        if self.stop > 1.0:
            raise ValueError(f"stop must not exceed 1, got {self.stop}")
        if self.start > self.stop:
            raise ValueError(f"start {self.start} is past stop {self.stop}")
        return self

    def ratios(self) -> np.ndarray:
        return grid_points(self.start, self.stop, self.step)


class UnknownMInput(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    n: int = Field(ge=1, le=MAX_QUBITS)
    m: int
    runs: int = Field(ge=1)
    seed: int = Field(0, ge=0, le=SEED_MAX)
    lam: float = Field(DEFAULT_LAMBDA, alias="lambda")
    max_rounds: Optional[int] = None
    curve_step: float = Field(0.01, gt=0.0, le=1.0)

    @model_validator(mode="after")
    def validate_matches(self) -> "UnknownMInput":
        if self.m < 1:
            # not a usage problem: the driver cannot terminate without a match
            raise DomainError(f"the randomized driver needs M >= 1, got M={self.m}")
        if self.m > 2**self.n:
            raise ValueError(f"M={self.m} exceeds N={2**self.n}")
        return self

    def driver_config(self) -> DriverConfig:
        return DriverConfig(lam=self.lam, seed=self.seed, max_rounds=self.max_rounds)

    def marked_set(self) -> MarkedSet:
        return MarkedSet.random(self.n, self.m, self.seed)


class CircuitCheckInput(BaseModel):
    n: int
    emit_gates: Optional[Path] = None


class AnalyticInput(BaseModel):
    n: Optional[int] = Field(None, ge=1, le=62)
    m: Optional[int] = None
    ratio: Optional[float] = None
    lam: float = DEFAULT_LAMBDA

    @model_validator(mode="after")
    def validate_shape(self) -> "AnalyticInput":
        """Either n and m (integer shape, N = 2^n) or a bare ratio, not both."""
        if self.ratio is not None:
            if self.n is not None or self.m is not None:
                raise ValueError("give either --ratio or --n/--m, not both")
            return self
        if self.n is None or self.m is None:
            raise ValueError("--n and --m are required unless --ratio is given")
        return self
