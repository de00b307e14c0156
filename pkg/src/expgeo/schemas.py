"""Pydantic request/response models for the service and the CLI wire format.

Spaces, densities and variables travel as {"weights": [...], "values": [...]};
Gibbs specs as {"linear": [...], "quadratic": [[...]], "bounded": [{"c":
..., "d": [...]}]}.  Conversion helpers raise ValueError naming the offending
field so the service can map them to client errors.
"""

from __future__ import annotations

from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, Field

from .boltzmann import GibbsSpec
from .space import Density, RandomVariable, SampleSpace


class VectorPayload(BaseModel):
    """A density or random variable over a weighted finite space."""

    weights: list[float] = Field(min_length=1)
    values: list[float] = Field(min_length=1)

    def to_space(self, name: str) -> SampleSpace:
        try:
            return SampleSpace(self.weights)
        except ValueError as exc:
            raise ValueError(f"{name}.weights: {exc}") from None

    def to_density(self, name: str) -> Density:
        space = self.to_space(name)
        try:
            return Density(space, self.values)
        except ValueError as exc:
            raise ValueError(f"{name}.values: {exc}") from None

    def to_variable(self, name: str, space: SampleSpace) -> RandomVariable:
        if not np.allclose(space.weights, self.weights, rtol=0.0, atol=1e-12):
            raise ValueError(f"{name}.weights: do not match the density weights")
        try:
            return RandomVariable(space, self.values)
        except ValueError as exc:
            raise ValueError(f"{name}.values: {exc}") from None

    @classmethod
    def of(cls, space: SampleSpace, values) -> "VectorPayload":
        return cls(weights=list(map(float, space.weights)), values=list(map(float, values)))


class NormRequest(BaseModel):
    density: VectorPayload
    variable: VectorPayload
    kind: Literal["a", "b"] = "b"
    tol: float = 1e-12


class NormResponse(BaseModel):
    norm: float


class ChartRequest(BaseModel):
    """Convert between a density and its chart coordinate at `base`.

    Provide exactly one of `density` (mapped to a coordinate) or
    `coordinate` (mapped to a density).
    """

    base: VectorPayload
    density: Optional[VectorPayload] = None
    coordinate: Optional[VectorPayload] = None


class ChartResponse(BaseModel):
    direction: Literal["to_coordinate", "to_density"]
    result: VectorPayload


class KLRequest(BaseModel):
    q1: VectorPayload
    q2: VectorPayload
    base: Optional[VectorPayload] = None  # chart center; defaults to q2


class KLResponse(BaseModel):
    direct: float
    chart: float


class EntropyRequest(BaseModel):
    density: VectorPayload


class EntropyResponse(BaseModel):
    entropy: float


class FlowRequest(BaseModel):
    field: Literal["expectation", "entropy"]
    p0: VectorPayload
    f: Optional[VectorPayload] = None  # required for the expectation field
    t_end: float = Field(1.0, gt=0.0)
    step: float = Field(1e-3, gt=0.0)


class FlowPoint(BaseModel):
    t: float
    density: list[float]
    value: float
    fisher: float


class FlowResponse(BaseModel):
    weights: list[float]
    points: list[FlowPoint]


class BoundedTermPayload(BaseModel):
    c: float
    d: list[float] = Field(min_length=3, max_length=3)


class GibbsSpecPayload(BaseModel):
    linear: list[float] = Field(default=[0.0, 0.0, 0.0], min_length=3, max_length=3)
    quadratic: list[list[float]] = Field(
        default=[[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]],
        min_length=3,
        max_length=3,
    )
    bounded: list[BoundedTermPayload] = Field(default_factory=list)

    def to_spec(self) -> GibbsSpec:
        try:
            return GibbsSpec(
                linear=self.linear,
                quadratic=self.quadratic,
                bounded_terms=tuple((term.c, term.d) for term in self.bounded),
            )
        except ValueError as exc:
            raise ValueError(f"spec: {exc}") from None


class BoltzmannRequest(BaseModel):
    spec: GibbsSpecPayload = Field(default_factory=GibbsSpecPayload)
    g: str = "invariant"
    n: int = Field(10000, ge=1)
    seed: int = Field(0, ge=0)
    workers: Optional[int] = Field(None, ge=1)


class MCEstimateResponse(BaseModel):
    mean: float
    stderr: float
    n: int
