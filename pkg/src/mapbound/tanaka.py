"""Replica-symmetric saddle-point system for the MAP detector at finite B.

State (m, q, E, F) with BER = (1 - m) / 2:

    m = E[tanh(sqrt(F) Z + E)]          q = E[tanh^2(sqrt(F) Z + E)]
    E = delta B / (1 + B (1 - q))      F = delta B^2 (s2 + 4 BER + q - 1) / (1 + B (1 - q))^2

MAP corresponds to B -> infinity. That limit is only checked analytically
(``b_infinity_consistency``) and through the trend of finite-B solutions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConvergenceError, ParameterError
from .model import ModelParams
from .scalar_math import QuadratureRule, gauss_expectation, hermite_rule, kink_rule, q_tail

# Gauss-Hermite loses accuracy as the tanh poles (distance pi / (2 sqrt F) from
# the real axis) approach it; at order 61 the error reaches 1e-10 near
# sqrt(F) = 1, so anything sharper than 0.5 gets the kink-adapted rule.
SHARP_THRESHOLD = 0.5


@dataclass(frozen=True)
class TanakaState:
    overlap_m: float
    q: float
    E: float
    F: float
    B: float
    clamped: bool = False

    def __post_init__(self):
        if not -1.0 <= self.overlap_m <= 1.0:
            raise ParameterError(f"overlap_m={self.overlap_m} outside [-1, 1]")
        if not 0.0 <= self.q <= 1.0:
            raise ParameterError(f"q={self.q} outside [0, 1]")
        if self.E < 0 or self.F < 0:
            raise ParameterError("E and F must be nonnegative")
        if not self.B > 0:
            raise ParameterError("B must be positive")

    @property
    def ber(self) -> float:
        return 0.5 * (1.0 - self.overlap_m)

    def vector(self) -> np.ndarray:
        return np.array([self.overlap_m, self.q, self.E, self.F])


def closure(ber: float, q: float, params: ModelParams, B: float) -> tuple[float, float, bool]:
    """(E, F, clamped) from (BER, q); a negative radicand is clamped to 0."""
    den = 1.0 + B * (1.0 - q)
    radicand = params.sigma2 + 4.0 * ber + q - 1.0
    clamped = radicand < 0
    E = params.delta * B / den
    F = params.delta * B * B * max(radicand, 0.0) / (den * den)
    return E, F, clamped


def initial_state(params: ModelParams, B: float, overlap_m: float = 0.0, q: float = 0.5) -> TanakaState:
    E, F, clamped = closure(0.5 * (1.0 - overlap_m), q, params, B)
    return TanakaState(overlap_m, q, E, F, B, clamped)


def tanh_moments(E: float, F: float, rule: QuadratureRule | None = None) -> tuple[float, float]:
    """(E[tanh(sqrt(F) Z + E)], E[tanh^2(sqrt(F) Z + E)])."""
    rule = rule or hermite_rule(61)
    a = math.sqrt(F)
    if a == 0.0:
        t = math.tanh(E)
        return t, t * t
    if a > SHARP_THRESHOLD:
        rule = kink_rule(center=-E / a, scale=1.0 / a, order=rule.order)
    m = gauss_expectation(lambda z: np.tanh(a * z + E), rule)
    q = gauss_expectation(lambda z: np.tanh(a * z + E) ** 2, rule)
    return min(max(m, -1.0), 1.0), min(max(q, 0.0), 1.0)


def tanaka_step(state: TanakaState, params: ModelParams, rule: QuadratureRule | None = None) -> TanakaState:
    """One sweep: moments from (E, F), then (E, F) from the new (BER, q)."""
    if not math.isfinite(state.B):
        raise ParameterError("tanaka_step needs finite B")
    m, q = tanh_moments(state.E, state.F, rule)
    E, F, clamped = closure(0.5 * (1.0 - m), q, params, state.B)
    if not all(math.isfinite(v) for v in (m, q, E, F)):
        raise ConvergenceError("non-finite iterate", state=state)
    return TanakaState(m, q, E, F, state.B, clamped)


@dataclass(frozen=True)
class TanakaSolution:
    state: TanakaState
    iterations: int
    change: float
    clamped_steps: int

    @property
    def ber(self) -> float:
        return self.state.ber


def _change(old: np.ndarray, new: np.ndarray) -> float:
    # absolute in (m, q), relative in (E, F) which grow like B and B^2
    d = np.abs(new - old)
    d[2:] /= np.maximum(1.0, np.abs(old[2:]))
    return float(d.max())


def solve_tanaka(params: ModelParams, B: float, damping: float = 0.5, init: TanakaState | None = None,
                 max_iters: int = 5000, rule: QuadratureRule | None = None, tol: float = 1e-10) -> TanakaSolution:
    """Damped Picard iteration x <- (1 - d) x + d step(x).

    Raises ConvergenceError carrying the last state if ``max_iters`` is hit.
    """
    if not 0.0 < damping <= 1.0:
        raise ParameterError("damping must lie in (0, 1]")
    if not (B > 0 and math.isfinite(B)):
        raise ParameterError("B must be positive and finite")
    state = init if init is not None else initial_state(params, B)
    if state.B != B:
        state = replace(state, B=B)
    clamped_steps = 0
    change = math.inf
    for it in range(1, max_iters + 1):
        stepped = tanaka_step(state, params, rule)
        clamped_steps += stepped.clamped
        old = state.vector()
        new = (1.0 - damping) * old + damping * stepped.vector()
        change = _change(old, new)
        state = TanakaState(*new, B=B, clamped=stepped.clamped)
        if change <= tol:
            return TanakaSolution(state, it, change, clamped_steps)
    raise ConvergenceError(f"no convergence after {max_iters} iterations (last change {change:.3e})",
                           state=state, iterations=max_iters)


@dataclass(frozen=True)
class BInfinityReport:
    ber: float
    c: float
    residual: float


def b_infinity_consistency(ber: float, params: ModelParams) -> BInfinityReport:
    """Residual of the B -> infinity limit (m -> 1 - 2 BER, q -> 1, E, F -> inf).

    With c = sqrt((s2 + 4 BER) / delta) the first moment equation collapses to
    BER = Q(1 / c), the replica fixed-point equation.
    """
    if not 0.0 < ber < 1.0:
        raise ParameterError("ber must lie in (0, 1)")
    c = math.sqrt((params.sigma2 + 4.0 * ber) / params.delta)
    return BInfinityReport(ber=ber, c=c, residual=abs(ber - q_tail(1.0 / c)))
