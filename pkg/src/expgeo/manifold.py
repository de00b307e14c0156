"""Exponential charts, the cumulant functional and its derivatives.

A strictly positive density q near p is written q = exp(u - K_p(u)) * p with
u centered at p; the chart map s_p sends q to u and e_p inverts it.  On a
finite space every centered u is admissible (the moment functional is a
finite sum), so no domain guard is needed.
"""

from __future__ import annotations

import numpy as np
from scipy.special import logsumexp

from .space import (
    ATOL,
    CenteredRandomVariable,
    Density,
    central_moments,
    center,
    expect,
    _values,
)


def coordinate_values(p: Density, u) -> np.ndarray:
    """Validate that u is a chart coordinate at p and return its values."""
    if isinstance(u, CenteredRandomVariable):
        if not u.base.space.same_as(p.space) or not np.allclose(
            u.base.values, p.values, rtol=0.0, atol=ATOL
        ):
            raise ValueError("coordinate is centered at a different base density")
        return u.values
    vals = _values(u)
    if vals.size != p.space.size:
        raise ValueError("coordinate and density live on different spaces")
    mean = expect(p, vals)
    if abs(mean) > ATOL * max(1.0, float(np.max(np.abs(vals)))):
        raise ValueError(f"coordinate is not centered at the base: E_p = {mean!r}")
    return vals


def cumulant(p: Density, u) -> float:
    """K_p(u) = log E_p[exp u], via max-shifted log-sum-exp."""
    vals = coordinate_values(p, u)
    return float(logsumexp(vals, b=p.values * p.space.weights))


def chart_inverse(p: Density, u) -> Density:
    """e_p(u) = exp(u - K_p(u)) * p."""
    vals = coordinate_values(p, u)
    log_q = np.log(p.values) + vals - cumulant(p, vals)
    return Density.renormalized(p.space, np.exp(log_q))


def chart(p: Density, q: Density) -> CenteredRandomVariable:
    """s_p(q) = ln(q/p) - E_p[ln(q/p)]."""
    if not p.space.same_as(q.space):
        raise ValueError("densities live on different spaces")
    return center(p, np.log(q.values) - np.log(p.values))


def cumulant_derivatives(p: Density, u, dirs) -> float:
    """Directional derivatives of K_p at u, orders one to three.

    With q = e_p(u): the first derivative is E_q[v], the second Cov_q(v1,v2),
    the third the joint third central moment.  Exact moment formulas, never
    numeric differentiation.
    """
    vals = coordinate_values(p, u)
    q = chart_inverse(p, vals)
    if len(dirs) == 1:
        return expect(q, coordinate_values(p, dirs[0]))
    if len(dirs) in (2, 3):
        return central_moments(q, [coordinate_values(p, d) for d in dirs])
    raise ValueError(f"cumulant_derivatives takes 1 to 3 directions, got {len(dirs)}")


def transition_map(p: Density, q: Density, u) -> CenteredRandomVariable:
    """s_q(e_p(u)) = u - E_q[u] + ln(p/q) - E_q[ln(p/q)], centered at q."""
    vals = coordinate_values(p, u)
    return center(q, vals + np.log(p.values) - np.log(q.values))


def nabla_K(p: Density, u) -> CenteredRandomVariable:
    """Gradient of K_p at u as the pretangent vector q/p - 1 based at p."""
    q = chart_inverse(p, u)
    return CenteredRandomVariable(p, q.values / p.values - 1.0)


def nabla_K_derivative(p: Density, u, w) -> np.ndarray:
    """Weak derivative of u -> nabla_K_p(u) applied to w: (q/p)(w - E_q[w])."""
    q = chart_inverse(p, u)
    w_vals = coordinate_values(p, w)
    return (q.values / p.values) * (w_vals - expect(q, w_vals))
