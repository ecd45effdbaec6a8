"""
Report and manifest models
"""
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, Field


class ProxRegularityReport(BaseModel):
    """Monte-Carlo check of the proximal normal inequality"""
    r: float = Field(..., gt=0, description="Candidate prox-regularity radius")
    n_samples: int = Field(..., ge=0, description="Samples with a nonzero normal")
    seed: int
    passed: bool
    worst_margin: float = Field(..., description="max of zeta.(y-x) - |y-x|^2/(2r)")
    witness: Optional[Dict[str, Any]] = Field(None, description="(t, x, y, zeta) of the worst sample on failure")


class PetrovPoint(BaseModel):
    """Best achievable decrease margin at one sampled point"""
    t: float
    x: List[float]
    d_S: float = Field(..., ge=0)
    v_bar: List[float] = Field(..., description="Velocity of G(t,x) achieving the margin")
    xi_bar: List[float] = Field(..., description="Superdifferential vector of d_S at x")
    worst_p: List[float] = Field(..., description="Normal p attaining the worst case for v_bar")
    margin: float
    passed: bool


class PetrovReport(BaseModel):
    """Sampled decrease condition (v-p).xi <= -mu(d_S)"""
    mu: Dict[str, Any]
    delta: float = Field(..., gt=0)
    L: float = Field(..., ge=0)
    sigma_levels: List[float]
    points: List[PetrovPoint] = Field(default_factory=list)
    excluded_in_target: int = Field(0, ge=0)
    passed: bool
    worst_margin: Optional[float] = None


class ProbeRecord(BaseModel):
    """One Hamiltonian evaluation"""
    t: Optional[float] = Field(None, description="Time (None for autonomous checks)")
    x: List[float]
    lam: Optional[float] = Field(None, description="Value coordinate of the augmented point")
    p: List[float] = Field(..., description="Covector the Hamiltonian was evaluated at")
    inequality: Literal["H-", "H+", "Hmeno", "Hpiu"]
    value: float
    passed: bool
    horizontal: bool = False
    source: str = Field("", description="Where the normal came from: table name, gradient, graph, kink, target")


class HamiltonianReport(BaseModel):
    """Hamilton-Jacobi or invariance verification over a sample plan"""
    check: Literal["candidate", "weak_invariance", "strong_invariance"]
    tol: float
    rho: float
    n_probes: int = Field(0, ge=0)
    records: List[ProbeRecord] = Field(default_factory=list)
    max_violation: float = Field(..., description="Largest Hamiltonian value; -inf when nothing was tested")
    worst: Optional[ProbeRecord] = None
    passed: bool
    skipped: int = Field(0, ge=0, description="Probes dropped because they left graph(C)")


class DescentReport(BaseModel):
    """Inductive Petrov descent towards the target"""
    t0: float
    x0: List[float]
    times: List[float]
    distances: List[float] = Field(..., description="d_S at every descent node")
    elapsed: float
    reached: bool
    upper_bound: Optional[float] = Field(None, description="2 * integral of 1/mu up to d_S(x0)")
    K: float


class OracleResult(BaseModel):
    """Brute-force minimum time at a probe point"""
    t0: float
    x0: List[float]
    best_time: float
    controls: List[List[float]] = Field(default_factory=list, description="Piecewise-constant control sequence")
    switch_times: List[float] = Field(default_factory=list)
    evaluated: int = Field(0, ge=0)


class RunManifest(BaseModel):
    """Everything needed to reproduce and interpret a run"""
    schema_version: str
    command: str
    scenario: str
    seed: int
    workers: int
    constants: Dict[str, Optional[float]] = Field(..., description="r, L_C, M, L_G, rho and command constants")
    parameters: Dict[str, Any] = Field(default_factory=dict)
    tolerances: Dict[str, float] = Field(default_factory=dict)
    artifacts: List[str] = Field(default_factory=list)
    status: str
    exit_code: int
    summary: Dict[str, Any] = Field(default_factory=dict)
    wall_time_seconds: Optional[float] = Field(None, description="Only recorded with --timing")
