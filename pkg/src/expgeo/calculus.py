"""Functionals, covariant gradients, gradient flows and second-order checks.

Scalar functionals carry their covariant gradient: the pretangent vector
grad(q) with directional derivative E_q[grad(q) * w] along any tangent
direction w.  Gradient flows integrate d/dt ln p(t) = field(p(t)) with a
fixed-step RK4 in log-density space, renormalizing after every step so the
trajectory stays on the simplex interior by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import logsumexp

from .space import CenteredRandomVariable, Density, SampleSpace, center, expect, _values
from .manifold import chart_inverse, coordinate_values, cumulant, cumulant_derivatives
from .transport import e_transport, m_transport

# RK4 in log space cannot represent densities beyond this magnitude; flows
# stop with a diagnostic instead of clamping.
LOG_DENSITY_LIMIT = 700.0


class FlowOverflowError(RuntimeError):
    """A flow produced a log-density outside the representable range."""


@dataclass(frozen=True)
class ScalarField:
    """Real functional with its covariant gradient (pretangent representative)."""

    evaluate: Callable[[Density], float]
    gradient: Callable[[Density], CenteredRandomVariable]


@dataclass(frozen=True)
class VectorField:
    """Assignment q -> vector at q; `bundle` records the intended contract."""

    at: Callable[[Density], CenteredRandomVariable]
    bundle: str = "tangent"


@dataclass(frozen=True)
class Trajectory:
    """Time-indexed density path from flow integration (fixed step)."""

    times: np.ndarray
    densities: Sequence[Density]
    step: float

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        if times.ndim != 1 or times.size != len(self.densities):
            raise ValueError("times and densities lengths differ")
        if times.size >= 2 and np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing")
        object.__setattr__(self, "times", times)

    def index_of(self, t: float) -> int:
        i = int(round((t - self.times[0]) / self.step))
        if i < 0 or i >= self.times.size or abs(self.times[i] - t) > 1e-9:
            raise ValueError(f"t={t} is not on the trajectory grid")
        return i

    def density_at(self, t: float) -> Density:
        return self.densities[self.index_of(t)]


def expectation_functional(f) -> ScalarField:
    """q -> E_q[f], with covariant gradient f - E_q[f]."""
    f_vals = _values(f).copy()
    return ScalarField(
        evaluate=lambda q: expect(q, f_vals),
        gradient=lambda q: center(q, f_vals),
    )


def entropy_functional() -> ScalarField:
    """Boltzmann entropy functional q -> E_q[ln q], gradient ln q - E_q[ln q].

    Note the sign: this is the negative of the physical entropy, so the
    collision dynamics *decreases* it (see boltzmann.entropy_production).
    """
    return ScalarField(
        evaluate=lambda q: expect(q, np.log(q.values)),
        gradient=lambda q: center(q, np.log(q.values)),
    )


def kl_divergence(q1: Density, q2: Density) -> float:
    """D(q1 || q2) by direct summation of q1 ln(q1/q2)."""
    if not q1.space.same_as(q2.space):
        raise ValueError("densities live on different spaces")
    return expect(q1, np.log(q1.values) - np.log(q2.values))


def kl_in_chart(p: Density, u1, u2) -> float:
    """D(e_p(u1) || e_p(u2)) through the chart: dK_p(u1)(u1-u2) - K_p(u1) + K_p(u2)."""
    v1 = coordinate_values(p, u1)
    v2 = coordinate_values(p, u2)
    return cumulant_derivatives(p, v1, [v1 - v2]) - cumulant(p, v1) + cumulant(p, v2)


def kl_partial_gradient(q1: Density, q: Density) -> CenteredRandomVariable:
    """Covariant gradient of q -> D(q1 || q), the pretangent vector 1 - q1/q."""
    if not q1.space.same_as(q.space):
        raise ValueError("densities live on different spaces")
    return CenteredRandomVariable(q, 1.0 - q1.values / q.values)


def kl_mixed_second_derivative(q: Density, w1, w2) -> float:
    """Mixed second derivative of KL on the diagonal: -E_q[w1 w2]."""
    v1 = coordinate_values(q, w1)
    v2 = coordinate_values(q, w2)
    return -expect(q, v1 * v2)


def _density_from_log(space: SampleSpace, log_values: np.ndarray) -> Density:
    shift = np.max(log_values)
    unnorm = np.exp(log_values - shift)
    return Density.renormalized(space, unnorm)


def gradient_flow(field: VectorField, p0: Density, t_end: float, step: float) -> Trajectory:
    """Integrate d/dt ln p(t) = field(p(t)) from p0 up to t_end.

    Classic RK4 with fixed step on y = ln p, renormalizing after every step.
    Raises FlowOverflowError if any log-density magnitude exceeds
    LOG_DENSITY_LIMIT or a stage produces non-finite values.
    """
    if step <= 0 or t_end <= 0:
        raise ValueError("step and t_end must be positive")
    n_steps = max(1, int(round(t_end / step)))
    h = t_end / n_steps
    space = p0.space

    def rhs(y: np.ndarray) -> np.ndarray:
        q = _density_from_log(space, y)
        vec = field.at(q)
        return vec.values if isinstance(vec, CenteredRandomVariable) else _values(vec)

    y = np.log(p0.values)
    densities = [p0]
    for _ in range(n_steps):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * h * k1)
        k3 = rhs(y + 0.5 * h * k2)
        k4 = rhs(y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise FlowOverflowError("flow step produced non-finite log-density")
        y = y - logsumexp(y, b=space.weights)  # renormalize in log space
        if np.max(np.abs(y)) > LOG_DENSITY_LIMIT:
            raise FlowOverflowError(
                f"log-density magnitude exceeded {LOG_DENSITY_LIMIT:g}; flow stopped"
            )
        densities.append(Density(space, np.exp(y)))
    times = np.linspace(0.0, t_end, n_steps + 1)
    return Trajectory(times=times, densities=densities, step=h)


def _log_density_matrix(traj: Trajectory) -> np.ndarray:
    return np.stack([d.log() for d in traj.densities])


def _time_derivative(rows: np.ndarray, h: float) -> np.ndarray:
    """Second-order finite difference along axis 0: central inside, one-sided at the ends."""
    if rows.shape[0] < 3:
        raise ValueError("need at least three trajectory points for derivatives")
    out = np.empty_like(rows)
    out[1:-1] = (rows[2:] - rows[:-2]) / (2.0 * h)
    out[0] = (-3.0 * rows[0] + 4.0 * rows[1] - rows[2]) / (2.0 * h)
    out[-1] = (3.0 * rows[-1] - 4.0 * rows[-2] + rows[-3]) / (2.0 * h)
    return out


def velocity(traj: Trajectory, t: float) -> CenteredRandomVariable:
    """Fisher score delta_p(t) = d/dt ln p(t), from differences of stored logs."""
    i = traj.index_of(t)
    p_t = traj.densities[i]
    dlog = _time_derivative(_log_density_matrix(traj), traj.step)[i]
    return center(p_t, dlog)


def fisher_information(traj: Trajectory, t: float) -> float:
    """I(p(t)) = E_{p(t)}[delta_p(t)^2] >= 0."""
    v = velocity(traj, t)
    return expect(v.base, v.values**2)


def fisher_curve(traj: Trajectory) -> np.ndarray:
    """Fisher information at every trajectory time, in one pass."""
    dlog = _time_derivative(_log_density_matrix(traj), traj.step)
    dens = np.stack([d.values for d in traj.densities])
    weights = traj.densities[0].space.weights
    centered = dlog - np.sum(dlog * dens * weights, axis=1, keepdims=True)
    return np.sum(centered**2 * dens * weights, axis=1)


def e_acceleration(traj: Trajectory, t: float) -> CenteredRandomVariable:
    """Second component of the tangent-bundle velocity: (delta_p)' + I(p(t)).

    Computed as the projection of d/dt delta_p onto the centered fiber at
    p(t), which equals the displayed sum because E[(delta_p)'] = -I.
    Vanishes identically along one-parameter exponential families.
    """
    i = traj.index_of(t)
    logs = _log_density_matrix(traj)
    dlog = _time_derivative(logs, traj.step)
    ddlog = _time_derivative(dlog, traj.step)
    return center(traj.densities[i], ddlog[i])


def directional_derivative(field: ScalarField, q: Density, w, step: float = 1e-5) -> float:
    """Covariant derivative D_w E(q) by central differences along e_q(eps w)."""
    w_vals = coordinate_values(q, w)
    plus = field.evaluate(chart_inverse(q, step * w_vals))
    minus = field.evaluate(chart_inverse(q, -step * w_vals))
    return (plus - minus) / (2.0 * step)


def pretangent_covariant_derivative(F, q: Density, w, step: float = 1e-5) -> np.ndarray:
    """D_w F at q for a pretangent field F, via m-transport finite differences."""
    w_vals = coordinate_values(q, w)
    q_plus = chart_inverse(q, step * w_vals)
    q_minus = chart_inverse(q, -step * w_vals)
    f_plus = m_transport(q_plus, q, F(q_plus)).values
    f_minus = m_transport(q_minus, q, F(q_minus)).values
    return (f_plus - f_minus) / (2.0 * step)


def tangent_covariant_derivative(G, q: Density, w, step: float = 1e-5) -> np.ndarray:
    """D_w G at q for a tangent field G, via e-transport finite differences."""
    w_vals = coordinate_values(q, w)
    q_plus = chart_inverse(q, step * w_vals)
    q_minus = chart_inverse(q, -step * w_vals)
    g_plus = e_transport(q_plus, q, G(q_plus)).values
    g_minus = e_transport(q_minus, q, G(q_minus)).values
    return (g_plus - g_minus) / (2.0 * step)


def covariant_derivative_product_rule_check(F, G, H, q: Density, step: float = 1e-4) -> float:
    """Residual of D_H<F,G> = <D_H F, G> + <F, D_H G> at q.

    F is a pretangent field, G and H tangent fields, all callables
    Density -> CenteredRandomVariable at the argument.  All three covariant
    derivatives are computed by central chart differences with the given
    step, so the residual contracts at O(step^2).
    """
    w = H(q).values

    def coupling(d: Density) -> float:
        return expect(d, F(d).values * G(d).values)

    q_plus = chart_inverse(q, step * w)
    q_minus = chart_inverse(q, -step * w)
    lhs = (coupling(q_plus) - coupling(q_minus)) / (2.0 * step)
    df = pretangent_covariant_derivative(F, q, w, step)
    dg = tangent_covariant_derivative(G, q, w, step)
    rhs = expect(q, df * G(q).values) + expect(q, F(q).values * dg)
    residual = lhs - rhs
    if not np.isfinite(residual):
        raise ValueError("non-finite values in product rule check")
    return abs(residual)
