"""Sampling the Gaussian auxiliary problem behind the theta0 bound.

For a candidate error vector w = x0 - x with ||w||_2 = alpha (so alpha^2 n / 4
bits are wrong) the auxiliary objective is

    sqrt(alpha^2 + sigma^2) ||g|| - (2 / sqrt n) * sum of the k largest h_i,

with g in R^m, h in R^n iid N(0, 1/n) and k = round(alpha^2 n / 4). It only
depends on ||g|| and the descending prefix sums of h, which is all an
``AoSample`` keeps. Pointwise in alpha it concentrates on ell(alpha^2 / 4).

``gmt_shell_check`` compares that asymptotic lower bound with exact shell
minima of the real problem at small n.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .bounds import critical_points, ell, ell_at_zero, theta0
from .errors import BudgetError, DomainError, ParameterError
from .mc_sim import SHELL_MAX_N, c_star_profile
from .model import ModelParams, Stream, gen_instance, standard_normal, stream_key
from .scalar_math import phi, q_inv

ALPHA_MAX = 2.0  # ||x0 - x||_2 / sqrt(n) <= 2 on the hypercube


@dataclass(frozen=True, eq=False)
class AoSample:
    """Sufficient statistics of one (g, h) draw.

    ``prefix[k]`` = (2 / sqrt n) * (sum of the k largest h_i), k = 0..n.
    """

    n: int
    m: int
    g_norm: float
    prefix: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.prefix, dtype=float)
        if arr.shape != (self.n + 1,):
            raise ParameterError("prefix must have n + 1 entries")
        arr.setflags(write=False)
        object.__setattr__(self, "prefix", arr)


def draw_ao_sample(params: ModelParams, n: int, seed: int, trial: int) -> AoSample:
    if n < 1:
        raise ParameterError("n must be at least 1")
    m = params.rows(n)
    scale = 1.0 / math.sqrt(n)
    g = standard_normal(stream_key(seed, trial, Stream.AO_G), m) * scale
    h = standard_normal(stream_key(seed, trial, Stream.AO_H), n) * scale
    h_desc = -np.sort(-h)
    prefix = np.concatenate([[0.0], np.cumsum(h_desc)]) * (2.0 * scale)
    return AoSample(n=n, m=m, g_norm=float(np.linalg.norm(g)), prefix=prefix)


def shell_index(alpha: float, n: int) -> int:
    """k = round(alpha^2 n / 4), ties to even."""
    return int(round(alpha * alpha * n / 4.0))


def _check_alpha(alpha: float) -> float:
    if not (math.isfinite(alpha) and 0.0 < alpha <= ALPHA_MAX):
        raise DomainError(f"alpha must lie in (0, {ALPHA_MAX}], got {alpha}")
    return float(alpha)


def ao_objective(alpha: float, sample: AoSample, sigma2: float) -> float:
    alpha = _check_alpha(alpha)
    k = shell_index(alpha, sample.n)
    return math.sqrt(alpha * alpha + sigma2) * sample.g_norm - float(sample.prefix[k])


def ell_closed(theta: float, params: ModelParams) -> float:
    """ell extended continuously to theta in [0, 1]."""
    if theta <= 0.0:
        return ell_at_zero(params)
    if theta >= 1.0:
        return math.sqrt(params.delta) * math.sqrt(4.0 + params.sigma2)
    return float(ell(theta, params))


def ell_of_alpha(alpha: float, params: ModelParams) -> float:
    return ell_closed(_check_alpha(alpha) ** 2 / 4.0, params)


def min_ell_above(theta_min: float, params: ModelParams) -> float:
    """min of ell on [theta_min, 1]: endpoints plus interior critical points."""
    cands = [ell_closed(theta_min, params), ell_closed(1.0, params)]
    cands += [ell_closed(t, params) for t in critical_points(params) if t > theta_min]
    return min(cands)


def ao_trial_rows(params: ModelParams, n: int, alphas: Iterable[float], trials: int,
                  seed: int) -> list[tuple[int, float, float, float]]:
    """(trial, alpha, ao_value, ell_value) for every trial and alpha."""
    alphas = [_check_alpha(a) for a in alphas]
    if trials < 1:
        raise ParameterError("trials must be at least 1")
    rows = []
    for t in range(trials):
        s = draw_ao_sample(params, n, seed, t)
        rows.extend((t, a, ao_objective(a, s, params.sigma2), ell_of_alpha(a, params)) for a in alphas)
    return rows


def ao_mean_curve(params: ModelParams, n: int, alphas: Iterable[float], trials: int, seed: int) -> np.ndarray:
    """Mean AO objective per alpha over ``trials`` independent samples."""
    alphas = [_check_alpha(a) for a in alphas]
    samples = [draw_ao_sample(params, n, seed, t) for t in range(trials)]
    return np.array([math.fsum(ao_objective(a, s, params.sigma2) for s in samples) / trials for a in alphas])


@dataclass(frozen=True)
class OrderStatReport:
    theta: float
    n: int
    k: int
    trials: int
    mean: float
    stderr: float
    analytic: float

    @property
    def z_score(self) -> float:
        return (self.mean - self.analytic) / self.stderr if self.stderr > 0 else math.inf


def order_stat_concentration(theta: float, n: int, trials: int, seed: int) -> OrderStatReport:
    """(1/sqrt n) * (sum of the top round(theta n) of n iid N(0, 1/n)) against phi(Q^{-1}(theta))."""
    if not 0.0 < theta <= 1.0:
        raise DomainError("theta must lie in (0, 1]")
    k = int(round(theta * n))
    if k < 1:
        raise ParameterError("theta * n must round to at least 1")
    if trials < 2:
        raise ParameterError("need at least two trials for a standard error")
    vals = np.empty(trials)
    for t in range(trials):
        h = standard_normal(stream_key(seed, t, Stream.ORDER_STAT), n)
        top = -np.partition(-h, k - 1)[:k]
        vals[t] = math.fsum(top) / n
    analytic = 0.0 if theta == 1.0 else float(phi(q_inv(theta)))
    mean = math.fsum(vals) / trials
    stderr = float(np.std(vals, ddof=1) / math.sqrt(trials))
    return OrderStatReport(theta=theta, n=n, k=k, trials=trials, mean=mean, stderr=stderr, analytic=analytic)


@dataclass(frozen=True)
class ShellCheckReport:
    params: ModelParams
    n: int
    alpha_min: float
    theta_min: float
    k_min: int
    threshold: float
    eta: float
    trials: int
    violations: int
    shell_minima: np.ndarray

    @property
    def fraction(self) -> float:
        return self.violations / self.trials


def gmt_shell_check(params: ModelParams, n: int, alpha0: float | None = None, eps: float = 0.0,
                    eta: float = 0.1, trials: int = 100, seed: int = 0) -> ShellCheckReport:
    """Rate at which exact shell minima fall below the asymptotic bound.

    Over shells with ||x0 - x|| / sqrt(n) >= alpha0 + eps, a violation is a
    trial whose smallest normalized residual is below
    min_{theta >= (alpha0 + eps)^2 / 4} ell(theta) - eta. The bound only
    holds with probability tending to one, so this is a finite-n diagnostic.
    ``alpha0`` defaults to 2 sqrt(theta0).
    """
    if n > SHELL_MAX_N:
        raise BudgetError(f"exhaustive shell search limited to n <= {SHELL_MAX_N}, got {n}")
    if trials < 1:
        raise ParameterError("trials must be at least 1")
    if alpha0 is None:
        alpha0 = 2.0 * math.sqrt(theta0(params))
    alpha_min = alpha0 + eps
    if not 0.0 <= alpha_min <= ALPHA_MAX:
        raise ParameterError(f"alpha0 + eps = {alpha_min} leaves no shell in [0, {ALPHA_MAX}]")
    theta_min = alpha_min * alpha_min / 4.0
    k_min = math.ceil(theta_min * n - 1e-12)
    threshold = min_ell_above(theta_min, params) - eta
    minima = np.empty(trials)
    for t in range(trials):
        profile = c_star_profile(gen_instance(params, n, seed, t))
        minima[t] = profile[k_min:].min()
    violations = int(np.count_nonzero(minima < threshold))
    return ShellCheckReport(params=params, n=n, alpha_min=alpha_min, theta_min=theta_min, k_min=k_min,
                            threshold=threshold, eta=eta, trials=trials, violations=violations,
                            shell_minima=minima)
