"""Standard-normal special functions, quadrature and bracketing root helpers.

Everything here is a pure function of its arguments. The special functions
accept scalars or numpy arrays and return the same shape (a Python float for
scalar input).
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial.hermite import hermgauss
from numpy.polynomial.legendre import leggauss
from scipy.special import erfc, erfcx

from . import _kernels
from .errors import DomainError, EvaluationError, InfeasibleParametersError

INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
SQRT_HALF_PI = math.sqrt(0.5 * math.pi)
_SQRT2 = math.sqrt(2.0)


def _as_float_array(x, name="x"):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    return arr


def _out(arr, scalar):
    return float(arr) if scalar else arr


def phi(x):
    """Standard normal density."""
    arr = _as_float_array(x)
    return _out(INV_SQRT_2PI * np.exp(-0.5 * arr * arr), arr.ndim == 0)


def q_tail(x):
    """Gaussian tail Q(x) = P(Z > x).

    Evaluated through the scaled complementary error function, so relative
    accuracy holds deep in the right tail (no 1 - Phi cancellation).
    """
    arr = _as_float_array(x)
    return _out(_q(arr), arr.ndim == 0)


def _q(x):
    # scaled form erfcx(t) * exp(-t^2) on the right half-line keeps Q(38) > 0
    pos = x > 0
    xp = np.where(pos, x, 0.0)
    right = 0.5 * erfcx(xp / _SQRT2) * np.exp(-0.5 * xp * xp)
    return np.where(pos, right, 0.5 * erfc(x / _SQRT2))


def mills_ratio(x):
    """Q(x) / phi(x), finite for all x where phi underflows."""
    arr = _as_float_array(x)
    return _out(SQRT_HALF_PI * erfcx(arr / _SQRT2), arr.ndim == 0)


def q_inv(p):
    """Inverse of the Gaussian tail: returns x with Q(x) = p.

    ndtri gives the starting point; two Newton steps (derivative -phi) polish
    it and a bracketing bisection takes over for any element whose residual
    is still out of tolerance. Work is done on min(p, 1 - p), where 1 - p is
    exact for p >= 1/2.
    """
    arr = np.asarray(p, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0) or np.any(arr >= 1.0):
        raise DomainError("q_inv requires 0 < p < 1")
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    flat = np.ascontiguousarray(arr.ravel())
    x = np.empty_like(flat)
    bad = np.empty(flat.shape, dtype=np.bool_)
    _kernels.q_inv_newton(flat, x, bad)
    upper = flat > 0.5
    if np.any(bad):
        x[bad] = _q_inv_bisect(np.where(upper, 1.0 - flat, flat)[bad])
    x = np.where(upper, -x, x).reshape(arr.shape)
    return float(x[0]) if scalar else x


def _q_inv_bisect(p):
    lo = np.full_like(p, -40.0)
    hi = np.full_like(p, 40.0)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        above = _q(mid) > p
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
        if np.all(hi - lo <= 1e-15 * np.maximum(1.0, np.abs(mid))):
            break
    return 0.5 * (lo + hi)


# -- quadrature -------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights for E[f(Z)], Z ~ N(0, 1); weights sum to one."""

    nodes: np.ndarray
    weights: np.ndarray
    order: int

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.shape != weights.shape or nodes.ndim != 1:
            raise ValueError("nodes and weights must be 1-D arrays of equal length")
        if self.order < 1:
            raise ValueError("order must be positive")
        if np.any(weights <= 0):
            raise ValueError("weights must be positive")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("nodes must be strictly increasing")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError("weights must sum to one")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)


@functools.lru_cache(maxsize=None)
def hermite_rule(order: int = 61) -> QuadratureRule:
    """Gauss-Hermite rule rescaled to the standard normal measure."""
    if order < 1:
        raise ValueError("order must be positive")
    x, w = hermgauss(order)
    return QuadratureRule(nodes=_SQRT2 * x, weights=w / w.sum(), order=order)


def kink_rule(center: float, scale: float, order: int = 61, reach: float = 12.0) -> QuadratureRule:
    """Composite Gauss-Legendre rule against phi, refined around ``center``.

    Meant for integrands such as tanh((z - center) / scale) that turn into a
    step when ``scale`` is small: panels of width ``scale`` cover
    center +/- 24 * scale, unit-width panels cover the rest of [-reach, reach].
    Each panel uses max(8, order // 4) Legendre nodes.
    """
    if not (scale > 0 and math.isfinite(scale) and math.isfinite(center)):
        raise ValueError("scale must be positive and center finite")
    m = max(8, order // 4)
    lo_sharp = max(-reach, center - 24.0 * scale)
    hi_sharp = min(reach, center + 24.0 * scale)
    edges = [-reach]
    if lo_sharp < hi_sharp:
        edges += list(np.arange(-reach + 1.0, lo_sharp, 1.0))
        n_sharp = max(1, int(math.ceil((hi_sharp - lo_sharp) / scale)))
        edges += list(np.linspace(lo_sharp, hi_sharp, n_sharp + 1))
        edges += list(np.arange(math.floor(hi_sharp) + 1.0, reach, 1.0))
    else:
        edges += list(np.arange(-reach + 1.0, reach, 1.0))
    edges.append(reach)
    edges = np.unique(np.asarray(edges))
    edges = edges[np.concatenate([[True], np.diff(edges) > 1e-12])]
    t, w = leggauss(m)
    a, b = edges[:-1, None], edges[1:, None]
    nodes = (0.5 * (b - a) * t + 0.5 * (a + b)).ravel()
    weights = (0.5 * (b - a) * w).ravel() * INV_SQRT_2PI * np.exp(-0.5 * nodes * nodes)
    keep = weights > 0
    nodes, weights = nodes[keep], weights[keep]
    return QuadratureRule(nodes=nodes, weights=weights / weights.sum(), order=order)


def gauss_expectation(f: Callable[[np.ndarray], np.ndarray], rule: QuadratureRule) -> float:
    """sum_i w_i f(z_i) ~= E[f(Z)]; ``f`` is called once on the node array."""
    values = np.asarray(f(rule.nodes), dtype=float)
    if values.shape != rule.nodes.shape:
        values = np.broadcast_to(values, rule.nodes.shape)
    if not np.all(np.isfinite(values)):
        raise EvaluationError("integrand is not finite on the quadrature nodes")
    return float(np.dot(rule.weights, values))


# -- bracketing root finding ------------------------------------------------

def sign_changes(values: np.ndarray) -> np.ndarray:
    """Indices i with values[i] and values[i + 1] of strictly opposite sign.

    Exact zeros count as a change on the left side only.
    """
    s = np.sign(values)
    return np.nonzero((s[:-1] * s[1:] < 0) | ((s[:-1] == 0) & (s[1:] != 0)))[0]


def bisect(f: Callable[[float], float], lo: float, hi: float, xtol: float = 1e-12,
           rtol: float = 0.0, maxiter: int = 400) -> float:
    """Plain bisection on a sign-changing bracket.

    Stops when hi - lo <= xtol + rtol * |x| or the midpoint stops moving.
    """
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise InfeasibleParametersError(f"no sign change on [{lo!r}, {hi!r}]")
    for _ in range(maxiter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = f(mid)
        if fm == 0:
            return mid
        if np.sign(fm) == np.sign(flo):
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
        if hi - lo <= xtol + rtol * abs(mid):
            break
    return 0.5 * (lo + hi)
