"""Space-homogeneous Boltzmann collision operator, Monte Carlo weak form.

Velocities live on R^3 with the standard normal density f0 as the reference
Maxwellian.  Densities are never gridded: a GibbsSpec parametrizes
f = exp(u - K0(u)) f0 with u(v) = a.v + v'Bv + sum_k c_k tanh(d_k . v); the
spectral bound max_eig(B) < 1/2 keeps f normalizable, the quadratic part
samples exactly as a Gaussian, and tanh terms enter through bounded
importance weights.

The weak form <g, Q(f)/f>_f is estimated as the sample mean of

    (1/2) (g(V_X) + g(W_X) - g(V) - g(W)) |X'(V - W)|

over (V, W) ~ f (x) f and X uniform on the sphere, with the angular kernel
|X'(V-W)| inside the expectation (required for the estimator to match the
integral of g against the collision operator; collision-invariant g gives an
identically zero summand).

All estimators draw from counter-based substreams keyed by (seed, stream,
chunk) over fixed-size chunks and reduce partial sums in chunk order, so
results are bit-identical for a fixed seed regardless of worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_legendre

_CHUNK = 1 << 14
_SPECTRAL_MARGIN = 1e-6

# substream tags, one per independent consumer of randomness
_STREAM_VELOCITY = 1
_STREAM_PAIRS = 2
_STREAM_CONDITIONING = 3
_STREAM_SPHERE = 4


@dataclass(frozen=True)
class MCEstimate:
    """Monte Carlo mean with standard error; n = 0 marks a closed form."""

    mean: float
    stderr: float
    n: int


def _unit3(x, name: str = "x") -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.shape != (3,):
        raise ValueError(f"{name} must be a 3-vector, got shape {arr.shape}")
    norm = np.linalg.norm(arr)
    if abs(norm - 1.0) > 1e-12:
        raise ValueError(f"{name} must be a unit vector, |{name}| = {norm!r}")
    return arr


def collide(v, w, x):
    """Elastic collision map: v_x = v - x x'(v-w), w_x = w + x x'(v-w).

    Accepts single 3-vectors or (..., 3) batches for v and w; x is a unit
    3-vector or a matching batch of unit vectors.  Conserves v + w,
    |v|^2 + |w|^2 and v.w; applying the same x twice restores (v, w).
    """
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    x = np.asarray(x, dtype=float)
    if v.shape[-1] != 3 or w.shape[-1] != 3 or x.shape[-1] != 3:
        raise ValueError("velocities and direction must have trailing dimension 3")
    norms = np.linalg.norm(x, axis=-1)
    if np.any(np.abs(norms - 1.0) > 1e-12):
        raise ValueError("collision direction must be a unit vector")
    c = np.sum(x * (v - w), axis=-1, keepdims=True)
    return v - x * c, w + x * c


def collision_matrix(x) -> np.ndarray:
    """The 6x6 linear representation [[I-P, P], [P, I-P]] with P = x x'."""
    x = _unit3(x)
    proj = np.outer(x, x)
    eye = np.eye(3)
    return np.block([[eye - proj, proj], [proj, eye - proj]])


def uniform_sphere(n: int, rng: np.random.Generator) -> np.ndarray:
    """n uniform directions on S^2 from normalized Gaussian triples."""
    z = rng.standard_normal((n, 3))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def sphere_product_nodes(polar: int = 16, azimuth: int = 32):
    """Deterministic product quadrature on S^2 (Gauss-Legendre x equal angles).

    Returns (nodes, weights) with weights summing to one; exact for
    spherical polynomials up to degree min(2*polar - 1, azimuth - 1).
    """
    cos_t, w_t = roots_legendre(polar)
    phi = 2.0 * np.pi * (np.arange(azimuth) + 0.5) / azimuth
    sin_t = np.sqrt(1.0 - cos_t**2)
    nodes = np.empty((polar * azimuth, 3))
    nodes[:, 0] = np.outer(sin_t, np.cos(phi)).ravel()
    nodes[:, 1] = np.outer(sin_t, np.sin(phi)).ravel()
    nodes[:, 2] = np.repeat(cos_t, azimuth)
    weights = np.repeat(w_t / 2.0, azimuth) / azimuth
    return nodes, weights


def _post_collision_pairs(v, w, directions):
    """All outcomes with the invariants of (v, w): m +- rho*y over directions y."""
    mid = 0.5 * (v + w)
    rho = 0.5 * np.linalg.norm(v - w)
    return mid + rho * directions, mid - rho * directions


def sphere_average(g, v, w, *, nodes=None, n: int | None = None, seed: int = 0) -> float:
    """Average of g over the collision outcomes of (v, w).

    Parametrized by the post-collision relative direction drawn uniformly on
    S^2, so the result is a function of the collision invariants (v + w,
    |v|^2 + |w|^2) alone; for Gaussian pairs it is the conditional
    expectation of g(V, W) given those invariants.  g must be vectorized
    over (k, 3) velocity batches.  Quadrature is the deterministic product
    rule by default, or Monte Carlo with `n` draws and a seed.
    """
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    if n is not None:
        directions = uniform_sphere(n, _substream(seed, _STREAM_SPHERE, 0))
        weights = np.full(n, 1.0 / n)
    else:
        directions, weights = nodes if nodes is not None else sphere_product_nodes()
    v_out, w_out = _post_collision_pairs(v, w, directions)
    return float(np.sum(weights * np.asarray(g(v_out, w_out), dtype=float)))


@dataclass(frozen=True, eq=False)
class GibbsSpec:
    """Perturbation u of the standard normal: u(v) = a.v + v'Bv + sum c tanh(d.v).

    B must be symmetric with max eigenvalue < 1/2 (normalizability); the
    tanh terms are bounded, so they never threaten integrability and give
    importance weights bounded away from 0 and infinity.
    """

    linear: np.ndarray = field(default_factory=lambda: np.zeros(3))
    quadratic: np.ndarray = field(default_factory=lambda: np.zeros((3, 3)))
    bounded_terms: tuple = ()

    def __post_init__(self):
        a = np.asarray(self.linear, dtype=float)
        b = np.asarray(self.quadratic, dtype=float)
        if a.shape != (3,):
            raise ValueError(f"linear must be a 3-vector, got shape {a.shape}")
        if b.shape != (3, 3):
            raise ValueError(f"quadratic must be 3x3, got shape {b.shape}")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("spec contains non-finite entries")
        if np.max(np.abs(b - b.T)) > 1e-12:
            raise ValueError("quadratic must be symmetric")
        b = 0.5 * (b + b.T)
        top = float(np.max(np.linalg.eigvalsh(b)))
        if top >= 0.5 - _SPECTRAL_MARGIN:
            raise ValueError(
                f"spectral bound violated: max eigenvalue {top!r} >= 1/2 (not normalizable)"
            )
        terms = []
        for c, d in self.bounded_terms:
            d = np.asarray(d, dtype=float)
            if d.shape != (3,) or not np.all(np.isfinite(d)) or not np.isfinite(c):
                raise ValueError("bounded term must be (finite c, finite 3-vector d)")
            d = d.copy()
            d.setflags(write=False)
            terms.append((float(c), d))
        a = a.copy()
        a.setflags(write=False)
        b = b.copy()
        b.setflags(write=False)
        object.__setattr__(self, "linear", a)
        object.__setattr__(self, "quadratic", b)
        object.__setattr__(self, "bounded_terms", tuple(terms))

    def perturbation(self, v: np.ndarray) -> np.ndarray:
        """u(v) for a (k, 3) batch."""
        v = np.asarray(v, dtype=float)
        out = v @ self.linear + np.einsum("ki,ij,kj->k", v, self.quadratic, v)
        return out + self.bounded_part(v)

    def bounded_part(self, v: np.ndarray) -> np.ndarray:
        out = np.zeros(v.shape[0])
        for c, d in self.bounded_terms:
            out += c * np.tanh(v @ d)
        return out

    def gaussian_moments(self):
        """Mean and covariance of the pure-quadratic proposal N((I-2B)^-1 a, (I-2B)^-1)."""
        precision = np.eye(3) - 2.0 * self.quadratic
        cov = np.linalg.inv(precision)
        return cov @ self.linear, cov

    def log_density_shifted(self, v: np.ndarray) -> np.ndarray:
        """ln f(v) up to an additive constant: u(v) - |v|^2 / 2.

        The normalizer K0(u) and the Gaussian constant drop out of every
        collision difference g(V_X)+g(W_X)-g(V)-g(W), so entropy-production
        estimates never need them.
        """
        v = np.asarray(v, dtype=float)
        return self.perturbation(v) - 0.5 * np.sum(v * v, axis=1)


def gaussian_log_normalizer(spec: GibbsSpec) -> float:
    """Closed form of K0 for the pure-quadratic part: a'(I-2B)^-1 a / 2 - log det(I-2B) / 2."""
    precision = np.eye(3) - 2.0 * spec.quadratic
    sign, logdet = np.linalg.slogdet(precision)
    if sign <= 0:
        raise ValueError("spectral bound violated: I - 2B is not positive definite")
    quad = float(spec.linear @ np.linalg.solve(precision, spec.linear))
    return 0.5 * quad - 0.5 * float(logdet)


def _substream(seed: int, stream: int, chunk: int) -> np.random.Generator:
    """Counter-based generator keyed by (seed, stream, chunk); worker-count free."""
    if seed < 0:
        raise ValueError("seed must be a nonnegative integer")
    ss = np.random.SeedSequence(entropy=(int(seed), stream, chunk))
    return np.random.Generator(np.random.Philox(ss))


def _resolve_workers(workers) -> int:
    cap = os.environ.get("EXPGEO_THREADS")
    limit = int(cap) if cap else None
    if workers is None:
        workers = 1
    workers = max(1, int(workers))
    if limit is not None:
        workers = min(workers, max(1, limit))
    return workers


def _chunks(n: int):
    return [(i, min(_CHUNK, n - i * _CHUNK)) for i in range((n + _CHUNK - 1) // _CHUNK)]


def _map_chunks(n: int, worker_fn, workers) -> list:
    """Evaluate worker_fn(chunk_index, count) over fixed chunks, results in chunk order."""
    if n < 1:
        raise ValueError("sample count must be at least 1")
    plan = _chunks(n)
    workers = _resolve_workers(workers)
    if workers == 1 or len(plan) == 1:
        return [worker_fn(i, m) for i, m in plan]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda im: worker_fn(*im), plan))


def _weighted_estimate(parts, n: int) -> MCEstimate:
    """Self-normalized mean and stderr from per-chunk partial sums.

    parts: iterable of (sum w, sum w*s, sum w^2, sum w^2*s, sum w^2*s^2);
    reduction runs in chunk order so the result is reproducible bit-for-bit.
    """
    sw = sws = sw2 = sw2s = sw2s2 = 0.0
    for a, b, c, d, e in parts:
        sw += a
        sws += b
        sw2 += c
        sw2s += d
        sw2s2 += e
    mean = sws / sw
    var = (sw2s2 - 2.0 * mean * sw2s + mean * mean * sw2) / (sw * sw)
    return MCEstimate(mean=float(mean), stderr=float(np.sqrt(max(var, 0.0))), n=n)


def _partial_sums(weights: np.ndarray, s: np.ndarray):
    w2 = weights * weights
    return (
        float(np.sum(weights)),
        float(np.sum(weights * s)),
        float(np.sum(w2)),
        float(np.sum(w2 * s)),
        float(np.sum(w2 * s * s)),
    )


@dataclass(frozen=True, eq=False)
class VelocitySample:
    """Seeded draws targeting a GibbsSpec, with self-normalized weights (mean 1)."""

    points: np.ndarray
    weights: np.ndarray
    seed: int
    target: GibbsSpec


def _draw_proposal(spec: GibbsSpec, rng: np.random.Generator, m: int) -> np.ndarray:
    mean, cov = spec.gaussian_moments()
    chol = np.linalg.cholesky(cov)
    return mean + rng.standard_normal((m, 3)) @ chol.T


def sample_velocities(spec: GibbsSpec, n: int, seed: int = 0) -> VelocitySample:
    """n velocity draws targeting f: exact Gaussian for pure-quadratic specs,
    importance-weighted by exp(sum c tanh(d.v)) otherwise."""
    points = np.empty((n, 3))
    raw = np.empty(n)
    offset = 0
    for i, m in _chunks(n):
        rng = _substream(seed, _STREAM_VELOCITY, i)
        v = _draw_proposal(spec, rng, m)
        points[offset : offset + m] = v
        raw[offset : offset + m] = np.exp(spec.bounded_part(v))
        offset += m
    weights = raw / raw.mean()
    return VelocitySample(points=points, weights=weights, seed=seed, target=spec)


def gibbs_normalizer(spec: GibbsSpec, n: int = 1 << 16, seed: int = 0) -> MCEstimate:
    """K0(u) = log integral exp(u) f0 dv.

    Pure-quadratic specs use the Gaussian closed form (n = 0, stderr = 0);
    bounded terms add log E[exp(sum c tanh)] under the Gaussian proposal,
    estimated by importance sampling with a delta-method stderr.
    """
    base = gaussian_log_normalizer(spec)
    if not spec.bounded_terms:
        return MCEstimate(mean=base, stderr=0.0, n=0)

    def chunk_sums(i, m):
        rng = _substream(seed, _STREAM_VELOCITY, i)
        t = np.exp(spec.bounded_part(_draw_proposal(spec, rng, m)))
        return float(np.sum(t)), float(np.sum(t * t))

    st = st2 = 0.0
    for a, b in _map_chunks(n, chunk_sums, workers=1):
        st += a
        st2 += b
    mean_t = st / n
    var_t = max(st2 / n - mean_t * mean_t, 0.0)
    return MCEstimate(
        mean=base + float(np.log(mean_t)),
        stderr=float(np.sqrt(var_t / n) / mean_t),
        n=n,
    )


def weak_boltzmann(spec: GibbsSpec, g, n: int, seed: int = 0, workers=None) -> MCEstimate:
    """Estimate <g, Q(f)/f>_f for vectorized g: (k, 3) -> (k,).

    Sample mean of (1/2)(g(V_X)+g(W_X)-g(V)-g(W)) |X'(V-W)| over
    (V, W) ~ f (x) f, X uniform on S^2; self-normalized weights carry the
    tanh perturbation.  Deterministic for fixed (spec, g, n, seed)
    regardless of `workers`.
    """

    def chunk_sums(i, m):
        rng = _substream(seed, _STREAM_PAIRS, i)
        v = _draw_proposal(spec, rng, m)
        w = _draw_proposal(spec, rng, m)
        x = uniform_sphere(m, rng)
        v_x, w_x = collide(v, w, x)
        kernel = np.abs(np.sum(x * (v - w), axis=1))
        s = 0.5 * (
            np.asarray(g(v_x), dtype=float)
            + np.asarray(g(w_x), dtype=float)
            - np.asarray(g(v), dtype=float)
            - np.asarray(g(w), dtype=float)
        ) * kernel
        if spec.bounded_terms:
            weights = np.exp(spec.bounded_part(v) + spec.bounded_part(w))
        else:
            weights = np.ones(m)
        return _partial_sums(weights, s)

    return _weighted_estimate(_map_chunks(n, chunk_sums, workers), n)


def entropy_production(spec: GibbsSpec, n: int, seed: int = 0, workers=None) -> MCEstimate:
    """Covariant derivative of E(q) = E_q[ln q] along the Boltzmann field.

    Weak form with g = ln f (additive constants cancel in the collision
    difference).  Nonpositive for every spec, zero exactly when f is a
    Maxwellian, i.e. a pure-Gaussian spec with isotropic quadratic part.
    """
    return weak_boltzmann(spec, spec.log_density_shifted, n, seed=seed, workers=workers)


def q_integral_zero_check(spec: GibbsSpec, n: int, seed: int = 0) -> MCEstimate:
    """Weak form with g = 1: every summand is identically zero."""
    return weak_boltzmann(spec, lambda v: np.ones(v.shape[0]), n, seed=seed)


def conditioning_orthogonality_test(
    g, h1, h2, n: int, seed: int = 0, nodes=None, workers=None
) -> MCEstimate:
    """E[(sphere_average(g) - g(V,W)) h1(V+W) h2(|V|^2+|W|^2)] under f0 (x) f0.

    The sphere average replaces g by its conditional expectation given the
    collision invariants, so the estimate is consistent with zero for every
    g; h1 takes (k, 3) sums, h2 takes (k,) energies, g takes two (k, 3)
    batches.
    """
    directions, d_weights = nodes if nodes is not None else sphere_product_nodes(8, 16)

    def chunk_sums(i, m):
        rng = _substream(seed, _STREAM_CONDITIONING, i)
        v = rng.standard_normal((m, 3))
        w = rng.standard_normal((m, 3))
        mid = 0.5 * (v + w)
        rho = 0.5 * np.linalg.norm(v - w, axis=1)
        v_out = mid[:, None, :] + rho[:, None, None] * directions[None, :, :]
        w_out = mid[:, None, :] - rho[:, None, None] * directions[None, :, :]
        flat = np.asarray(
            g(v_out.reshape(-1, 3), w_out.reshape(-1, 3)), dtype=float
        ).reshape(m, -1)
        averaged = flat @ d_weights
        residual = averaged - np.asarray(g(v, w), dtype=float)
        s = residual * np.asarray(h1(v + w), dtype=float)
        s = s * np.asarray(h2(np.sum(v * v, axis=1) + np.sum(w * w, axis=1)), dtype=float)
        return _partial_sums(np.ones(m), s)

    return _weighted_estimate(_map_chunks(n, chunk_sums, workers), n)


def interpolate(spec0: GibbsSpec, spec1: GibbsSpec, t: float) -> GibbsSpec:
    """Exponential-arc interpolation (1-t) u0 + t u1 between two specs."""
    terms = tuple((c * (1.0 - t), d) for c, d in spec0.bounded_terms) + tuple(
        (c * t, d) for c, d in spec1.bounded_terms
    )
    return GibbsSpec(
        linear=(1.0 - t) * spec0.linear + t * spec1.linear,
        quadratic=(1.0 - t) * spec0.quadratic + t * spec1.quadratic,
        bounded_terms=terms,
    )


def named_test_function(name: str, spec: GibbsSpec):
    """Resolve the CLI test-function names to vectorized g: (k, 3) -> (k,)."""
    if name == "invariant":
        return lambda v: np.sum(v * v, axis=1)
    if name == "v1sq":
        return lambda v: v[:, 0] ** 2
    if name == "logf":
        return spec.log_density_shifted
    if name.startswith("poly:"):
        try:
            powers = [int(s) for s in name[len("poly:") :].split(",")]
        except ValueError:
            powers = []
        if len(powers) != 3 or any(k < 0 for k in powers):
            raise ValueError(
                f"polynomial test function must be 'poly:i,j,k' with nonnegative ints, got {name!r}"
            )
        return lambda v: v[:, 0] ** powers[0] * v[:, 1] ** powers[1] * v[:, 2] ** powers[2]
    raise ValueError(f"unknown test function {name!r}")
