"""
Run request models
"""
from typing import Any, Dict, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from sweepctl.utils.constants import (
    ANALYTIC_HJ_TOL,
    BALL_CONTROL_SAMPLES,
    DEFAULT_STEP,
    GRID_CANDIDATE_DX,
    GRID_HJ_FACTOR,
    MODULUS_K_PRIME,
    ORACLE_BUDGET,
    ORACLE_MAX_SEGMENTS,
    ORACLE_STEP,
    PETROV_DELTA,
    PETROV_NEIGHBORS,
    PLAN_STEP,
    VALUE_ITERATION_MAX_SWEEPS,
    VALUE_ITERATION_TOL,
)


class MuSpec(BaseModel):
    """
    Nondecreasing decrease rate mu(r)

    constant: mu(r) = c
    power:    mu(r) = c * r**alpha
    table:    piecewise-linear through (r_i, mu_i), constant past the last node
    """
    kind: Literal["constant", "power", "table"]
    c: float = Field(1.0, gt=0)
    alpha: float = Field(0.5, ge=0)
    r_nodes: List[float] = Field(default_factory=list)
    mu_nodes: List[float] = Field(default_factory=list)

    @model_validator(mode="after")
    def validate_table(self) -> "MuSpec":
        if self.kind != "table":
            return self
        if len(self.r_nodes) < 2 or len(self.r_nodes) != len(self.mu_nodes):
            raise ValueError("table needs at least two (r, mu) pairs")
        if self.r_nodes[0] != 0.0:
            raise ValueError("table must start at r = 0")
        if any(b <= a for a, b in zip(self.r_nodes, self.r_nodes[1:])):
            raise ValueError("table r values must be strictly increasing")
        if any(b < a for a, b in zip(self.mu_nodes, self.mu_nodes[1:])) or self.mu_nodes[0] < 0:
            raise ValueError("table mu values must be nonnegative and nondecreasing")
        return self

    def __call__(self, r: float) -> float:
        if self.kind == "constant":
            return self.c
        if self.kind == "power":
            return self.c * r ** self.alpha if r > 0 else (self.c if self.alpha == 0 else 0.0)
        return float(np.interp(r, self.r_nodes, self.mu_nodes))

    def label(self) -> str:
        if self.kind == "constant":
            return f"const:{self.c:g}"
        if self.kind == "power":
            return f"power:{self.c:g},{self.alpha:g}"
        pairs = ",".join(f"{r:g}:{m:g}" for r, m in zip(self.r_nodes, self.mu_nodes))
        return f"table:{pairs}"

    @classmethod
    def parse(cls, text: str) -> "MuSpec":
        """
        Parse 'const:0.5', 'sqrt', 'power:2,0.5' or 'table:0:0,1:0.5,2:1'

        Raises:
            ValueError: on unknown forms
        """
        text = text.strip()
        if text == "sqrt":
            return cls(kind="power", c=1.0, alpha=0.5)
        head, _, body = text.partition(":")
        if head in ("const", "constant"):
            return cls(kind="constant", c=float(body))
        if head == "power":
            parts = [float(p) for p in body.split(",")]
            if len(parts) != 2:
                raise ValueError(f"power needs 'c,alpha', got {body!r}")
            return cls(kind="power", c=parts[0], alpha=parts[1])
        if head == "table":
            pairs = [p.split(":") for p in body.split(",")]
            if any(len(p) != 2 for p in pairs):
                raise ValueError(f"table entries must be 'r:mu', got {body!r}")
            return cls(
                kind="table",
                r_nodes=[float(p[0]) for p in pairs],
                mu_nodes=[float(p[1]) for p in pairs]
            )
        raise ValueError(f"Unknown mu specification {text!r}")


class SimulateParams(BaseModel):
    """Parameters of the `simulate` command"""
    command: Literal["simulate"] = "simulate"
    h: float = Field(DEFAULT_STEP, gt=0)
    horizon: Optional[float] = Field(None, gt=0)
    start: Optional[List[float]] = Field(None, description="t0 followed by x0")
    policy: Optional[List[float]] = Field(None, description="Constant control u; None selects the scenario default")
    greedy: bool = Field(False, description="Use the greedy policy of a solved value grid")
    dx: Optional[float] = Field(None, gt=0, description="Grid spacing for the greedy policy")
    dt: Optional[float] = Field(None, gt=0)
    integrator: Literal["catching_up", "subdifferential", "projected"] = "catching_up"


class MintimeParams(BaseModel):
    """Parameters of the `mintime` command"""
    command: Literal["mintime"] = "mintime"
    dx: float = Field(..., gt=0)
    dt: Optional[float] = Field(None, gt=0)
    n_controls: int = Field(BALL_CONTROL_SAMPLES, ge=2)
    tol: float = Field(VALUE_ITERATION_TOL, gt=0)
    max_sweeps: int = Field(VALUE_ITERATION_MAX_SWEEPS, ge=1)
    probes: List[List[float]] = Field(default_factory=list, description="(t, x...) points reported in the summary")


class HJCheckParams(BaseModel):
    """Parameters of the `hjcheck` command"""
    command: Literal["hjcheck"] = "hjcheck"
    candidate: Literal["exact", "grid", "perturbed"] = "exact"
    plan_dx: float = Field(PLAN_STEP, gt=0)
    plan_dt: float = Field(PLAN_STEP, gt=0)
    tol: Optional[float] = Field(None, gt=0, description="Defaults to 1e-9 (analytic) or 5*max(dx, dt) (grid)")
    rho: Optional[float] = Field(None, gt=0)
    dx: Optional[float] = Field(None, gt=0, description="Grid spacing when candidate=grid")
    dt: Optional[float] = Field(None, gt=0)

    def resolved_tol(self) -> float:
        if self.tol is not None:
            return self.tol
        if self.candidate == "grid":
            spacing = self.dx or GRID_CANDIDATE_DX
            return GRID_HJ_FACTOR * max(spacing, self.dt or 0.0)
        return ANALYTIC_HJ_TOL


class PetrovParams(BaseModel):
    """Parameters of the `petrov` command"""
    command: Literal["petrov"] = "petrov"
    mu: MuSpec = Field(default_factory=lambda: MuSpec(kind="constant", c=0.5))
    delta: float = Field(PETROV_DELTA, gt=0)
    L: Optional[float] = Field(None, ge=0)
    n_points: int = Field(50, ge=1)
    n_neighbors: int = Field(PETROV_NEIGHBORS, ge=0)
    points: List[List[float]] = Field(default_factory=list, description="Extra (t, x...) points to probe")
    K: Optional[float] = Field(None, ge=0)
    K_prime: float = Field(MODULUS_K_PRIME, ge=0)
    dx: float = Field(0.01, ge=0)
    dt: float = Field(0.0, ge=0)
    T_bound: float = Field(1.0, ge=0)


class InvarianceParams(BaseModel):
    """Parameters of the `invariance` command"""
    command: Literal["invariance"] = "invariance"
    K: Dict[str, Any] = Field(..., description="Shape descriptor of the candidate invariant set")
    mode: Literal["weak", "strong", "both"] = "both"
    plan_dx: float = Field(PLAN_STEP, gt=0)
    plan_dt: float = Field(PLAN_STEP, gt=0)
    tol: float = Field(ANALYTIC_HJ_TOL, gt=0)
    rho: Optional[float] = Field(None, gt=0)


class OracleParams(BaseModel):
    """Parameters of the `oracle` command"""
    command: Literal["oracle"] = "oracle"
    probes: List[List[float]] = Field(..., min_length=1, description="(t, x...) points")
    n_segments: int = Field(ORACLE_MAX_SEGMENTS, ge=1)
    h: float = Field(ORACLE_STEP, gt=0)
    budget: int = Field(ORACLE_BUDGET, ge=1)
    horizon: Optional[float] = Field(None, gt=0)


CommandParams = Union[SimulateParams, MintimeParams, HJCheckParams, PetrovParams, InvarianceParams, OracleParams]


class RunConfig(BaseModel):
    """One CLI invocation"""
    command: Literal["simulate", "mintime", "hjcheck", "petrov", "invariance", "oracle"]
    scenario: str = Field(..., description="Built-in name or path of a scenario JSON document")
    output_dir: str
    seed: int = 0
    workers: int = Field(1, ge=1)
    timing: bool = False
    params: CommandParams = Field(..., discriminator="command")

    @field_validator("scenario")
    @classmethod
    def validate_scenario(cls, v: str) -> str:
        if not v.strip():
            raise ValueError("scenario must not be empty")
        return v.strip()

    @model_validator(mode="after")
    def validate_command(self) -> "RunConfig":
        if self.params.command != self.command:
            raise ValueError(f"parameters for {self.params.command!r} given to command {self.command!r}")
        return self
