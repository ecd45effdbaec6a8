"""
Scenario document models (the JSON configuration format)
"""
from typing import Annotated, List, Literal, Optional, Union

from pydantic import BaseModel, Field, field_validator, model_validator


class IntervalShape(BaseModel):
    """[a0 + a1 t, b0 + b1 t]"""
    kind: Literal["interval"]
    a0: float
    a1: float = 0.0
    b0: float
    b1: float = 0.0
    t0: float = 0.0
    t_max: Optional[float] = None


class BoxShape(BaseModel):
    kind: Literal["box"]
    lo: List[float] = Field(..., min_length=1, max_length=3)
    hi: List[float] = Field(..., min_length=1, max_length=3)

    @model_validator(mode="after")
    def validate_bounds(self) -> "BoxShape":
        if len(self.lo) != len(self.hi) or any(a > b for a, b in zip(self.lo, self.hi)):
            raise ValueError("box needs lo <= hi componentwise with equal lengths")
        return self


class BoxMinusBallShape(BaseModel):
    kind: Literal["box_minus_ball"]
    lo: List[float] = Field(..., min_length=2, max_length=3)
    hi: List[float] = Field(..., min_length=2, max_length=3)
    center: List[float] = Field(..., min_length=2, max_length=3)
    radius: float = Field(..., gt=0)


class HalfSpaceShape(BaseModel):
    """{x : normal . x <= offset}"""
    kind: Literal["halfspace"]
    normal: List[float] = Field(..., min_length=1, max_length=3)
    offset: float


class BallShape(BaseModel):
    kind: Literal["ball"]
    center: List[float] = Field(..., min_length=1, max_length=3)
    radius: float = Field(..., gt=0)


class WholeSpaceShape(BaseModel):
    kind: Literal["whole_space"]
    dim: int = Field(..., ge=1, le=3)


ShapeSpec = Annotated[
    Union[IntervalShape, BoxShape, BoxMinusBallShape, HalfSpaceShape, BallShape, WholeSpaceShape],
    Field(discriminator="kind")
]


class PolytopeFieldSpec(BaseModel):
    """G(t,x) = conv(vertices) + A x + b"""
    kind: Literal["polytope"]
    vertices: List[List[float]] = Field(..., min_length=1)
    drift_matrix: Optional[List[List[float]]] = None
    drift_offset: Optional[List[float]] = None
    bound: float = Field(..., gt=0, description="M")
    lipschitz: Optional[float] = Field(None, ge=0, description="L_G; defaults to the spectral norm of A")

    @field_validator("vertices")
    @classmethod
    def validate_vertices(cls, v: List[List[float]]) -> List[List[float]]:
        if len({len(row) for row in v}) != 1:
            raise ValueError("all vertices must have the same dimension")
        return v


class BallFieldSpec(BaseModel):
    """G(t,x) = A x + b + radius * B"""
    kind: Literal["ball"]
    radius: float = Field(..., gt=0)
    dim: int = Field(..., ge=1, le=3)
    drift_matrix: Optional[List[List[float]]] = None
    drift_offset: Optional[List[float]] = None
    bound: float = Field(..., gt=0)
    lipschitz: Optional[float] = Field(None, ge=0)


FieldSpec = Annotated[Union[PolytopeFieldSpec, BallFieldSpec], Field(discriminator="kind")]


class TargetSpec(BaseModel):
    shape: ShapeSpec
    internal_sphere_radius: float = Field(float("inf"), gt=0)


class ScenarioConfig(BaseModel):
    """A complete scenario: constraint, velocity set, target and defaults"""
    name: str = Field(..., min_length=1)
    description: str = ""
    constraint: ShapeSpec
    prox_radius: Optional[float] = Field(None, gt=0, description="Overrides the shape's own radius")
    control: FieldSpec
    target: TargetSpec
    rho: Optional[float] = Field(None, gt=0, description="Truncation radius; defaults to L_C + M")
    exact_candidate: Optional[Literal["example1", "example2"]] = Field(
        None, description="Attach a built-in closed-form value function"
    )
    start: Optional[List[float]] = Field(None, description="Default (t0, x0...) for simulate")
    policy: Optional[List[float]] = Field(None, description="Default constant control u")
    horizon: Optional[float] = Field(None, gt=0)
