"""Finite measure spaces, strictly positive densities and random variables.

Everything downstream computes over a weighted finite sample space: atom i
carries measure mu_i > 0, a density is a strictly positive vector p with
sum(p_i * mu_i) = 1, and a random variable is any real vector over the atoms.
Densities are stored relative to mu (density values, not atom probabilities),
so non-uniform base measures are first-class.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Absolute tolerance for exact identities (normalization, centering).
ATOL = 1e-12


def _as_vector(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{name} must be a non-empty 1-d array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SampleSpace:
    """Finite measure space: n atoms with positive weights mu_i."""

    weights: np.ndarray

    def __post_init__(self):
        w = _as_vector(self.weights, "weights")
        if np.any(w <= 0):
            raise ValueError("weights must be strictly positive")
        object.__setattr__(self, "weights", w)

    @property
    def size(self) -> int:
        return self.weights.size

    @classmethod
    def uniform(cls, n: int) -> "SampleSpace":
        """Space of n atoms, each of measure 1/n (total mass one)."""
        return cls(np.full(n, 1.0 / n))

    def same_as(self, other: "SampleSpace", atol: float = ATOL) -> bool:
        return self.size == other.size and np.allclose(
            self.weights, other.weights, rtol=0.0, atol=atol
        )


def _check_space(space: SampleSpace, values: np.ndarray, name: str) -> None:
    if values.size != space.size:
        raise ValueError(
            f"{name} has {values.size} entries but the space has {space.size} atoms"
        )


@dataclass(frozen=True, eq=False)
class Density:
    """Strictly positive density p with sum(p_i * mu_i) = 1 (within ATOL)."""

    space: SampleSpace
    values: np.ndarray

    def __post_init__(self):
        vals = _as_vector(self.values, "density values")
        _check_space(self.space, vals, "density")
        if np.any(vals <= 0):
            raise ValueError("density values must be strictly positive")
        mass = float(np.sum(vals * self.space.weights))
        if abs(mass - 1.0) > ATOL:
            raise ValueError(
                f"density is not normalized: total mass {mass!r} (use Density.renormalized)"
            )
        object.__setattr__(self, "values", vals)

    @classmethod
    def renormalized(cls, space: SampleSpace, values) -> "Density":
        """Scale positive values to unit total mass; the explicit fix-up."""
        vals = np.asarray(values, dtype=float)
        mass = np.sum(vals * space.weights)
        if not np.isfinite(mass) or mass <= 0:
            raise ValueError(f"cannot renormalize: total mass {mass!r}")
        return cls(space, vals / mass)

    @classmethod
    def uniform(cls, space: SampleSpace) -> "Density":
        return cls(space, np.full(space.size, 1.0 / np.sum(space.weights)))

    def log(self) -> np.ndarray:
        return np.log(self.values)


@dataclass(frozen=True, eq=False)
class RandomVariable:
    """Real vector over the atoms of a space."""

    space: SampleSpace
    values: np.ndarray

    def __post_init__(self):
        vals = _as_vector(self.values, "variable values")
        _check_space(self.space, vals, "variable")
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True, eq=False)
class CenteredRandomVariable:
    """Random variable with zero expectation under its base density.

    On a finite space the tangent, pretangent and Hilbert fibers at p all
    coincide with this centered subspace; they differ only in which norm and
    transport the caller applies.  The constructor enforces centering, so a
    value of this type is a valid fiber element for any of the three bundles.
    """

    base: Density
    values: np.ndarray

    def __post_init__(self):
        vals = _as_vector(self.values, "centered variable values")
        _check_space(self.base.space, vals, "centered variable")
        mean = float(np.sum(vals * self.base.values * self.base.space.weights))
        scale = max(1.0, float(np.max(np.abs(vals))))
        if abs(mean) > ATOL * scale:
            raise ValueError(f"variable is not centered: E_p = {mean!r}")
        object.__setattr__(self, "values", vals)

    @property
    def space(self) -> SampleSpace:
        return self.base.space


def _values(f) -> np.ndarray:
    return f.values if hasattr(f, "values") else np.asarray(f, dtype=float)


def expect(p: Density, f) -> float:
    """E_p[f] = sum_i f_i p_i mu_i."""
    vals = _values(f)
    _check_space(p.space, vals, "variable")
    return float(np.sum(vals * p.values * p.space.weights))


def center(p: Density, f) -> CenteredRandomVariable:
    """f - E_p[f], the centered representative of f at p."""
    vals = _values(f)
    _check_space(p.space, vals, "variable")
    return CenteredRandomVariable(p, vals - expect(p, vals))


def central_moments(p: Density, fs) -> float:
    """Joint central moment E_p[prod_k (f_k - E_p f_k)] for 2 or 3 variables.

    Arity two is the covariance Cov_p(f1, f2), arity three the third joint
    central moment; these are the second and third derivatives of the
    cumulant functional at the tilted density.
    """
    if len(fs) not in (2, 3):
        raise ValueError(f"central_moments takes 2 or 3 variables, got {len(fs)}")
    prod = np.ones(p.space.size)
    for f in fs:
        vals = _values(f)
        _check_space(p.space, vals, "variable")
        prod = prod * (vals - expect(p, vals))
    return float(np.sum(prod * p.values * p.space.weights))


def l2_norm(p: Density, f) -> float:
    """L2(p) norm, the Hilbert-fiber norm."""
    return float(np.sqrt(expect(p, _values(f) ** 2)))
