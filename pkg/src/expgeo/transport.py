"""Parallel transports between fibers and the tangent/pretangent duality.

Three transports move a centered variable from the fiber at p to the fiber
at q, all pointwise formulas on a finite space:

  exponential   u -> u - E_q[u]                 (tangent bundle)
  mixture       v -> (p/q) v                    (pretangent bundle)
  isometric     v -> sqrt(p/q) v - correction   (Hilbert bundle, L2 isometry)

The first two are transitive and dual to each other under the pairing
<v, w>_r = E_r[vw]; the isometric transport inverts exactly but is not
transitive.
"""

from __future__ import annotations

import numpy as np

from .space import ATOL, CenteredRandomVariable, Density, center, expect, _values

# Centered fiber elements of the three bundles share one representation on a
# finite space; the aliases mark which contract an API expects.
TangentVector = CenteredRandomVariable
PretangentVector = CenteredRandomVariable
HilbertVector = CenteredRandomVariable


def _fiber_values(p: Density, u) -> np.ndarray:
    if isinstance(u, CenteredRandomVariable):
        if not np.allclose(u.base.values, p.values, rtol=0.0, atol=ATOL):
            raise ValueError("vector is based at a different density")
        return u.values
    vals = _values(u)
    if vals.size != p.space.size:
        raise ValueError("vector and density live on different spaces")
    return vals


def _same_space(p: Density, q: Density) -> None:
    if not p.space.same_as(q.space):
        raise ValueError("densities live on different spaces")


def e_transport(p: Density, q: Density, u) -> TangentVector:
    """Exponential transport from B_p to B_q: u - E_q[u]."""
    _same_space(p, q)
    return center(q, _fiber_values(p, u))


def m_transport(p: Density, q: Density, v) -> PretangentVector:
    """Mixture transport from *B_p to *B_q: (p/q) v."""
    _same_space(p, q)
    vals = _fiber_values(p, v)
    return CenteredRandomVariable(q, (p.values / q.values) * vals)


def duality(v: PretangentVector, w: TangentVector) -> float:
    """Duality coupling <v, w>_r = E_r[vw] of vectors based at the same r."""
    if not isinstance(v, CenteredRandomVariable) or not isinstance(w, CenteredRandomVariable):
        raise ValueError("duality expects centered vectors carrying their base")
    if not np.allclose(v.base.values, w.base.values, rtol=0.0, atol=ATOL):
        raise ValueError("vectors are based at different densities")
    return expect(v.base, v.values * w.values)


def isometric_transport(p: Density, q: Density, v) -> HilbertVector:
    """L2 isometry from H_p to H_q.

    With s = sqrt(p/q):  v -> s v - (1 + E_q[s])^{-1} (1 + s) E_q[s v].
    Preserves the L2 norm across bases, inverts exactly under the reverse
    transport, and is the adjoint of the reverse transport; it is not
    transitive along triples.
    """
    _same_space(p, q)
    vals = _fiber_values(p, v)
    s = np.sqrt(p.values / q.values)
    correction = (1.0 + s) * expect(q, s * vals) / (1.0 + expect(q, s))
    return CenteredRandomVariable(q, s * vals - correction)


def hilbert_transport_derivative_check(curve, field, t: float, step: float = 1e-4) -> float:
    """Residual of the metric-connection derivative identity at time t.

    curve: t -> Density (a Trajectory works too, sampled on its own grid);
    field: Density -> HilbertVector at that density.  Compares the central
    finite difference of s -> T_{p(s)}^{p(t)} F(p(s)) against
    dF delta_p + (1/2) F delta_p recentered at p(t), where dF and delta_p
    are the raw finite-difference field derivative and the curve velocity.
    The residual decays as O(step^2) for smooth curve and field.
    """
    if hasattr(curve, "density_at"):  # Trajectory: evaluate on its grid
        step = curve.step
        curve = curve.density_at
    if step <= 0:
        raise ValueError("step must be positive")
    pt = curve(t)
    plus, minus = curve(t + step), curve(t - step)
    f_plus = _fiber_values(plus, field(plus))
    f_minus = _fiber_values(minus, field(minus))
    lhs = (
        isometric_transport(plus, pt, f_plus).values
        - isometric_transport(minus, pt, f_minus).values
    ) / (2.0 * step)
    velocity = (np.log(plus.values) - np.log(minus.values)) / (2.0 * step)
    raw_derivative = (f_plus - f_minus) / (2.0 * step)
    inner = raw_derivative + 0.5 * _fiber_values(pt, field(pt)) * velocity
    rhs = inner - expect(pt, inner)
    residual = lhs - rhs
    if not np.all(np.isfinite(residual)):
        raise ValueError("non-finite intermediate values in derivative check")
    return float(np.max(np.abs(residual)))
