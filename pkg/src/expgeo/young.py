"""Young pairs, Luxemburg norms and the Orlicz duality pairing.

Two conjugate pairs are provided:

  A:  Phi(y) = exp|y| - 1 - |y|          Phi*(x) = (1+|x|)ln(1+|x|) - |x|
  B:  Phi(y) = cosh y - 1                Phi*(x) = |x| asinh|x| - sqrt(1+x^2) + 1

Evaluations preserve the input dtype, so callers may pass np.longdouble
arrays when the float64 range is too small (pair-A values overflow float64
beyond |y| ~ 709).
"""

from __future__ import annotations

import enum

import numpy as np

from .space import Density, expect, _values

# Below this threshold the conjugate functions switch to their 4th-order
# Taylor forms: the closed forms lose all significant digits near zero.
_TAYLOR_CUTOFF = 1e-4


class YoungPair(enum.Enum):
    A = "a"
    B = "b"

    @classmethod
    def parse(cls, label) -> "YoungPair":
        if isinstance(label, cls):
            return label
        try:
            return cls(str(label).lower())
        except ValueError:
            raise ValueError(f"unknown Young pair {label!r}, expected 'a' or 'b'") from None


def young_function(kind: YoungPair, y):
    """Phi(y); even, convex, zero at zero."""
    y = np.abs(np.asanyarray(y))
    if YoungPair.parse(kind) is YoungPair.A:
        return np.expm1(y) - y
    sh = np.sinh(y / 2)
    return 2.0 * sh * sh  # cosh y - 1, stable near zero


def young_conjugate(kind: YoungPair, x):
    """Phi*(x); even, convex, zero at zero."""
    x = np.abs(np.asanyarray(x))
    x2 = x * x
    if YoungPair.parse(kind) is YoungPair.A:
        with np.errstate(invalid="ignore"):
            closed = (1.0 + x) * np.log1p(x) - x
        taylor = x2 / 2 - x2 * x / 6 + x2 * x2 / 12
    else:
        # sqrt(1+x^2) - 1 rewritten to avoid cancellation
        closed = x * np.arcsinh(x) - x2 / (1.0 + np.sqrt(1.0 + x2))
        taylor = x2 / 2 - x2 * x2 / 24
    return np.where(x < _TAYLOR_CUTOFF, taylor, closed)


def young_derivative(kind: YoungPair, y):
    """phi(y) = Phi'(y) on [0, inf); the equality case of Young's inequality."""
    y = np.asanyarray(y)
    if YoungPair.parse(kind) is YoungPair.A:
        return np.expm1(y)
    return np.sinh(y)


def eval_young(kind: YoungPair, which: str, x):
    """Evaluate Phi ("function") or Phi* ("conjugate") of the given pair."""
    if which == "function":
        return young_function(kind, x)
    if which == "conjugate":
        return young_conjugate(kind, x)
    raise ValueError(f"which must be 'function' or 'conjugate', got {which!r}")


def young_inequality_gap(kind: YoungPair, x, y):
    """Phi(x) + Phi*(y) - |xy|; nonnegative, zero iff y = phi(x) (x, y >= 0)."""
    x = np.asanyarray(x)
    y = np.asanyarray(y)
    return young_function(kind, x) + young_conjugate(kind, y) - np.abs(x * y)


def _unit_level_root(p: Density, vals: np.ndarray, func, tol: float) -> float:
    """Root of E_p[func(v/lam)] = 1 by bracketing bisection.

    On a finite space the map is continuous and strictly decreasing in lam
    for v != 0.  lam = max|v| gives E <= func(1) < 1 for all four Young
    functions, hence an upper bound; halving finds a lower bound.
    """
    sup = float(np.max(np.abs(vals)))
    if sup == 0.0:
        return 0.0

    def excess(lam: float) -> float:
        with np.errstate(over="ignore"):
            return expect(p, func(vals / lam)) - 1.0

    hi = sup
    lo = sup
    while excess(lo) <= 0.0:
        hi = lo
        lo /= 2.0
        if lo < 1e-300:
            raise ValueError("failed to bracket the unit level set")
    for _ in range(200):
        if hi - lo <= tol * hi:
            break
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _checked_values(p: Density, v) -> np.ndarray:
    vals = _values(v)
    if vals.size != p.space.size:
        raise ValueError("variable and density live on different spaces")
    if not np.all(np.isfinite(vals)):
        raise ValueError("variable contains non-finite entries")
    return vals


def luxemburg_norm(p: Density, v, kind: YoungPair = YoungPair.B, tol: float = 1e-12) -> float:
    """Luxemburg norm ||v||_{Phi,p}: gauge of {v : E_p[Phi(v)] <= 1}."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    kind = YoungPair.parse(kind)
    return _unit_level_root(p, _checked_values(p, v), lambda t: young_function(kind, t), tol)


def luxemburg_conjugate_norm(
    p: Density, v, kind: YoungPair = YoungPair.B, tol: float = 1e-12
) -> float:
    """Luxemburg norm ||v||_{Phi*,p} taken with the conjugate function."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    kind = YoungPair.parse(kind)
    return _unit_level_root(p, _checked_values(p, v), lambda t: young_conjugate(kind, t), tol)


def orlicz_pairing(p: Density, u, v) -> float:
    """Duality pairing <u, v>_p = E_p[uv].

    Independent of the Young pair; the pair enters only through the bound
    |<u,v>_p| <= 2 ||u||_{Phi*,p} ||v||_{Phi,p} that the pairing satisfies.
    """
    uv = _values(u) * _values(v)
    return expect(p, uv)
