from typing import List, Literal, Optional, Union

from pydantic import BaseModel

OutOfRange = Literal["out-of-range"]


class TripleOut(BaseModel):
    a: Optional[float] = None  # absent when every item is marked
    b: Optional[float] = None  # absent when nothing is marked
    c: Optional[float] = None


class TraceStepOut(BaseModel):
    iteration: int
    step: str  # "init" | "oracle" | "diffusion"
    a: Optional[float] = None
    b: Optional[float] = None
    c: Optional[float] = None
    p_success: float


class SimulateReport(BaseModel):
    n: int
    N: int
    M: int
    q: int
    p_success_sim: float
    p_success_analytic: Optional[float] = None  # analytic forms need M >= 1
    triple: TripleOut
    trace: Optional[List[TraceStepOut]] = None


class SweepRow(BaseModel):
    ratio: float
    q: int
    p_proposed: float
    p_lower_bound: float
    q_grover: Optional[int] = None
    p_grover: Optional[float] = None


class SweepSummary(BaseModel):
    points: int
    min_p_proposed: float
    argmin_p_proposed: float
    min_p_lower_bound: float
    argmin_p_lower_bound: float
    min_p_grover: Optional[float] = None
    argmin_p_grover: Optional[float] = None


class ReliabilityReport(BaseModel):
    points: int
    # (1 + y^2)/(1 + y) >= 1 - M/N at every point
    bound_dominates: bool
    min_p_proposed: float
    min_p_grover: float
    min_dominates: bool
    # share of points where p_proposed >= p_grover
    pointwise_share: float


class CostRow(BaseModel):
    ratio: float
    m_q: float
    cost_proposed: float
    steps_proposed: int
    m_g: Optional[float] = None
    cost_grover: Union[float, OutOfRange]
    steps_grover: Union[int, OutOfRange]


class RunRow(BaseModel):
    run: int
    seed: int
    rounds: int
    total_iterations: int
    oracle_calls: int
    found: Optional[int] = None


class RunSummary(BaseModel):
    runs: int
    found: int
    success_rate: float
    mean_total_iterations: float
    max_total_iterations: int
    mean_rounds: float
    mean_oracle_calls: float


class UnknownMSummary(BaseModel):
    n: int
    N: int
    M: int
    seed: int
    lam: float
    empirical: RunSummary
    m_q: float
    proposed_coefficient: float
    predicted_proposed: float
    empirical_to_predicted: float
    m_g: Optional[float] = None
    predicted_grover: Union[float, OutOfRange]
    curves: List[CostRow]


class CircuitCheckReport(BaseModel):
    n: int
    width: int
    gate_count: int
    deviation_operator: float
    deviation_simulator: float
    max_deviation: float
    tolerance: float
    status: Literal["PASS", "FAIL"]


class GroverInfo(BaseModel):
    theta_g: float
    q_g: int
    p_success: float
    iteration_bound: float


class AnalyticReport(BaseModel):
    N: Optional[int] = None
    M: Optional[int] = None
    ratio: float
    s: Optional[float] = None
    y: float
    theta: float
    q: int
    q_exact: float
    q_bar: float
    iteration_bound: float
    p_success: float
    p_failure: float
    p_lower_bound: float
    grover: GroverInfo
    cost_proposed: float
    cost_grover: Union[float, OutOfRange]


class ErrorReport(BaseModel):
    error: str
    message: str
    exit_code: int
