"""FastAPI service exposing the toolkit as stateless JSON endpoints.

Every operation is a pure function of its request, so the service is safe
to scale horizontally; stochastic endpoints are reproducible through the
request seed.  Domain errors surface as 400 with a detail naming the field,
numeric failures (flow overflow, unmet tolerances) as 500.
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, HTTPException

from . import calculus, manifold, young
from .boltzmann import named_test_function, weak_boltzmann
from .schemas import (
    BoltzmannRequest,
    ChartRequest,
    ChartResponse,
    EntropyRequest,
    EntropyResponse,
    FlowPoint,
    FlowRequest,
    FlowResponse,
    KLRequest,
    KLResponse,
    MCEstimateResponse,
    NormRequest,
    NormResponse,
    VectorPayload,
)

app = FastAPI(
    title="expgeo",
    description="Exponential statistical manifolds on finite sample spaces",
    version="0.1.0",
)


def _bad_request(exc: ValueError) -> HTTPException:
    return HTTPException(status_code=400, detail=str(exc))


def _numeric_failure(exc: Exception) -> HTTPException:
    return HTTPException(status_code=500, detail=str(exc))


@app.get("/health")
def health():
    return {"status": "ok"}


@app.post("/norm", response_model=NormResponse)
def norm(req: NormRequest) -> NormResponse:
    try:
        p = req.density.to_density("density")
        v = req.variable.to_variable("variable", p.space)
        value = young.luxemburg_norm(p, v, young.YoungPair.parse(req.kind), tol=req.tol)
    except ValueError as exc:
        raise _bad_request(exc) from None
    return NormResponse(norm=value)


@app.post("/chart", response_model=ChartResponse)
def chart(req: ChartRequest) -> ChartResponse:
    try:
        base = req.base.to_density("base")
        if (req.density is None) == (req.coordinate is None):
            raise ValueError("chart: provide exactly one of density, coordinate")
        if req.density is not None:
            q = req.density.to_density("density")
            if not base.space.same_as(q.space):
                raise ValueError("density.weights: do not match the base weights")
            u = manifold.chart(base, q)
            return ChartResponse(
                direction="to_coordinate", result=VectorPayload.of(base.space, u.values)
            )
        u = req.coordinate.to_variable("coordinate", base.space)
        q = manifold.chart_inverse(base, manifold.coordinate_values(base, u.values))
        return ChartResponse(direction="to_density", result=VectorPayload.of(base.space, q.values))
    except ValueError as exc:
        raise _bad_request(exc) from None


@app.post("/kl", response_model=KLResponse)
def kl(req: KLRequest) -> KLResponse:
    try:
        q1 = req.q1.to_density("q1")
        q2 = req.q2.to_density("q2")
        base = req.base.to_density("base") if req.base is not None else q2
        if not q1.space.same_as(q2.space) or not q1.space.same_as(base.space):
            raise ValueError("q1/q2/base weights do not match")
        direct = calculus.kl_divergence(q1, q2)
        u1 = manifold.chart(base, q1)
        u2 = manifold.chart(base, q2)
        in_chart = calculus.kl_in_chart(base, u1.values, u2.values)
    except ValueError as exc:
        raise _bad_request(exc) from None
    return KLResponse(direct=direct, chart=in_chart)


@app.post("/entropy", response_model=EntropyResponse)
def entropy(req: EntropyRequest) -> EntropyResponse:
    try:
        q = req.density.to_density("density")
    except ValueError as exc:
        raise _bad_request(exc) from None
    return EntropyResponse(entropy=calculus.entropy_functional().evaluate(q))


@app.post("/flow", response_model=FlowResponse)
def flow(req: FlowRequest) -> FlowResponse:
    try:
        p0 = req.p0.to_density("p0")
        if req.field == "expectation":
            if req.f is None:
                raise ValueError("f: required for the expectation field")
            f = req.f.to_variable("f", p0.space)
            functional = calculus.expectation_functional(f)
        else:
            functional = calculus.entropy_functional()
        vector_field = calculus.VectorField(at=functional.gradient)
    except ValueError as exc:
        raise _bad_request(exc) from None
    try:
        traj = calculus.gradient_flow(vector_field, p0, req.t_end, req.step)
        fisher = calculus.fisher_curve(traj)
        points = [
            FlowPoint(
                t=float(t),
                density=list(map(float, d.values)),
                value=functional.evaluate(d),
                fisher=float(i),
            )
            for t, d, i in zip(traj.times, traj.densities, fisher)
        ]
    except (calculus.FlowOverflowError, FloatingPointError) as exc:
        raise _numeric_failure(exc) from None
    return FlowResponse(weights=list(map(float, p0.space.weights)), points=points)


@app.post("/boltzmann", response_model=MCEstimateResponse)
def boltzmann(req: BoltzmannRequest) -> MCEstimateResponse:
    try:
        spec = req.spec.to_spec()
        g = named_test_function(req.g, spec)
    except ValueError as exc:
        raise _bad_request(exc) from None
    est = weak_boltzmann(spec, g, req.n, seed=req.seed, workers=req.workers)
    if not (np.isfinite(est.mean) and np.isfinite(est.stderr)):
        raise _numeric_failure(RuntimeError("estimator returned non-finite values"))
    return MCEstimateResponse(mean=est.mean, stderr=est.stderr, n=est.n)
