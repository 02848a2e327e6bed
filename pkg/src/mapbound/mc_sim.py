"""Desk-scale Monte Carlo of the detectors themselves.

* ``map_detect``      exhaustive MAP over {+-1}^n (Gray code, n <= 24)
* ``bro_detect``      box relaxation + sign thresholding
* ``mf_genie_detect`` one bit with all other bits revealed
* ``c_star_shell``    exact minimum normalized residual on a Hamming shell

Trials are independent and keyed by their index, so ``monte_carlo_ber``
returns bit-identical reports for any number of workers.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _kernels
from .errors import BudgetError, ConvergenceError, ParameterError
from .model import (DetectionResult, Instance, ModelParams, Stream, ber_of, gen_instance, sample_x0,
                    stream_key, uniform_open)
from .scalar_math import q_inv

MAP_MAX_N = 24
SHELL_MAX_N = 20
Z95 = 1.959963984540054


class Detector(str, Enum):
    MAP = "map"
    BRO = "bro"
    MF_GENIE = "mf"


def _cols(instance: Instance) -> np.ndarray:
    return np.ascontiguousarray(instance.channel.T)


def decode_index(index: int, n: int) -> np.ndarray:
    """Codeword for a Gray/binary index: x_j = 1 - 2 * bit_j."""
    bits = (index >> np.arange(n)) & 1
    return 1.0 - 2.0 * bits


# -- MAP -----------------------------------------------------------------------

def map_search(instance: Instance) -> tuple[np.ndarray, float]:
    """(argmin codeword, min ||y - A x||) over the whole hypercube."""
    if instance.n > MAP_MAX_N:
        raise BudgetError(f"exhaustive MAP limited to n <= {MAP_MAX_N}, got {instance.n}")
    idx, best = _kernels.map_gray(_cols(instance), np.array(instance.y))
    return decode_index(int(idx), instance.n), math.sqrt(best)


def map_detect(instance: Instance) -> DetectionResult:
    x_hat, _ = map_search(instance)
    return ber_of(x_hat, instance.x0)


# -- BRO -------------------------------------------------------------------------

@dataclass(frozen=True)
class BoxLSResult:
    x: np.ndarray
    objective: float
    iterations: int
    pg_norm: float
    converged: bool


def power_iteration(M: np.ndarray, rtol: float = 1e-10, max_iter: int = 100_000) -> float:
    """Largest eigenvalue of a symmetric PSD matrix (Rayleigh quotient)."""
    v = np.ones(M.shape[0]) / math.sqrt(M.shape[0])
    lam = 0.0
    for _ in range(max_iter):
        w = M @ v
        new = float(v @ w)
        nrm = np.linalg.norm(w)
        if nrm == 0:
            return 0.0
        v = w / nrm
        if abs(new - lam) <= rtol * abs(new):
            return new
        lam = new
    return lam


def projected_gradient(x: np.ndarray, g: np.ndarray) -> np.ndarray:
    """x - P(x - g) for the box [-1, 1]^n."""
    return x - np.clip(x - g, -1.0, 1.0)


def solve_box_ls(A: np.ndarray, y: np.ndarray, tol: float = 1e-10, max_iter: int = 100_000,
                 polish_every: int = 20) -> BoxLSResult:
    """min_{x in [-1,1]^n} ||y - A x||^2 / 2 by projected gradient, step 1/L.

    Every ``polish_every`` iterations the current face is tried exactly:
    coordinates pinned at a bound with an outward gradient stay fixed and
    the rest are solved by least squares. The polished point replaces the
    iterate only if it is feasible and lowers the objective, so the
    projected-gradient iteration and its stopping rule are unchanged.
    """
    AtA = A.T @ A
    Aty = A.T @ y
    L = power_iteration(AtA)
    x = np.zeros(A.shape[1])
    obj = lambda v: 0.5 * float(np.sum((y - A @ v) ** 2))
    pg_norm = math.inf
    for it in range(1, max_iter + 1):
        g = AtA @ x - Aty
        pg_norm = float(np.linalg.norm(projected_gradient(x, g)))
        if pg_norm <= tol:
            return BoxLSResult(x, obj(x), it - 1, pg_norm, True)
        x = np.clip(x - g / L, -1.0, 1.0)
        if it % polish_every == 0:
            x = _polish(A, y, AtA, Aty, x, obj)
    g = AtA @ x - Aty
    pg_norm = float(np.linalg.norm(projected_gradient(x, g)))
    return BoxLSResult(x, obj(x), max_iter, pg_norm, pg_norm <= tol)


def _polish(A, y, AtA, Aty, x, obj):
    g = AtA @ x - Aty
    pinned = ((x <= -1.0) & (g > 0)) | ((x >= 1.0) & (g < 0))
    free = ~pinned
    if not free.any():
        return x
    cand = x.copy()
    rhs = y - A[:, pinned] @ x[pinned]
    cand[free] = np.linalg.lstsq(A[:, free], rhs, rcond=None)[0]
    if np.all(np.abs(cand) <= 1.0) and obj(cand) <= obj(x):
        return cand
    return x


def sign_pm1(v: np.ndarray) -> np.ndarray:
    """Coordinatewise sign with sign(0) = +1."""
    return np.where(v < 0, -1.0, 1.0)


def bro_relaxed(instance: Instance) -> BoxLSResult:
    return solve_box_ls(instance.channel, np.array(instance.y))


def bro_detect(instance: Instance) -> DetectionResult:
    res = bro_relaxed(instance)
    if not res.converged:
        raise ConvergenceError(f"box LS stopped at ||pg|| = {res.pg_norm:.3e}", state=res.x,
                               iterations=res.iterations)
    return ber_of(sign_pm1(res.x), instance.x0)


# -- matched-filter genie ----------------------------------------------------------

def mf_genie_detect(instance: Instance, bit_index: int) -> bool:
    """Detect bit j from y - sum_{i != j} x0_i a_i; True when correct."""
    j = int(bit_index)
    if not 0 <= j < instance.n:
        raise ParameterError(f"bit_index {j} outside [0, {instance.n})")
    a = instance.channel[:, j]
    y_tilde = instance.y - instance.channel @ instance.x0 + instance.x0[j] * a
    decision = 1.0 if a @ y_tilde >= 0 else -1.0
    return decision == instance.x0[j]


def _mf_genie_draws(m: int, n: int, seed: int, trials: range) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(x0_j, column j, noise) for bit j = trial mod n of each trial.

    Draws only the pieces the genie decision needs from the same streams
    ``gen_instance`` uses; per-trial uniforms are converted to normals in one
    vectorized ``q_inv`` call. None of it depends on sigma.
    """
    count = len(trials)
    u = np.empty((count, 2, m))
    signs = np.empty(count)
    for row, t in enumerate(trials):
        j = t % n
        signs[row] = sample_x0(j + 1, seed, t)[j]
        u[row, 0] = uniform_open(stream_key(seed, t, Stream.CHANNEL), m, block=j)
        u[row, 1] = uniform_open(stream_key(seed, t, Stream.NOISE), m)
    z = q_inv(u.ravel()).reshape(count, 2, m)
    return signs, z[:, 0] * (1.0 / math.sqrt(n)), z[:, 1]


def _mf_genie_decide(signs: np.ndarray, a: np.ndarray, noise: np.ndarray, sigma: float) -> np.ndarray:
    y_tilde = signs[:, None] * a + sigma * noise
    stat = np.einsum("ij,ij->i", a, y_tilde)
    return np.where(stat >= 0, 1.0, -1.0) == signs


def _rows_or_raise(params: ModelParams, n: int) -> int:
    m = params.rows(n)
    if m < 1:
        raise ParameterError("m = round(delta n) is zero")
    return m


def _mf_genie_batch(params: ModelParams, n: int, seed: int, trials: range) -> np.ndarray:
    """Per-trial correctness of the genie on bit j = trial mod n."""
    m = _rows_or_raise(params, n)
    if len(trials) == 0:
        return np.zeros(0, dtype=bool)
    return _mf_genie_decide(*_mf_genie_draws(m, n, seed, trials), params.sigma)


# -- Hamming shells --------------------------------------------------------------------

def c_star_shell(instance: Instance, k: int) -> float:
    """min over x at Hamming distance exactly k from x0 of ||y - A x|| / sqrt(n)."""
    n = instance.n
    if not 0 <= k <= n:
        raise ParameterError(f"shell index {k} outside [0, {n}]")
    if n > SHELL_MAX_N:
        raise BudgetError(f"shell enumeration limited to n <= {SHELL_MAX_N}, got {n}")
    r0 = np.array(instance.y) - instance.channel @ instance.x0
    best, _ = _kernels.shell_min_revolving(_cols(instance), r0, np.array(instance.x0), int(k))
    return math.sqrt(best / n)


def c_star_profile(instance: Instance) -> np.ndarray:
    """c_star for every shell k = 0..n in one Gray-code pass (n <= 24)."""
    if instance.n > MAP_MAX_N:
        raise BudgetError(f"shell profile limited to n <= {MAP_MAX_N}, got {instance.n}")
    r0 = np.array(instance.y) - instance.channel @ instance.x0
    best = _kernels.shell_profile_gray(_cols(instance), r0, np.array(instance.x0))
    return np.sqrt(best / instance.n)


# -- Monte Carlo driver ------------------------------------------------------------------

def wilson_interval(successes: int, total: int, z: float = Z95) -> tuple[float, float]:
    if total <= 0:
        raise ParameterError("Wilson interval needs a positive sample size")
    p = successes / total
    den = 1.0 + z * z / total
    centre = (p + z * z / (2 * total)) / den
    half = z * math.sqrt(p * (1 - p) / total + z * z / (4 * total * total)) / den
    return max(0.0, min(centre - half, p)), min(1.0, max(centre + half, p))


@dataclass(frozen=True)
class MonteCarloReport:
    detector: Detector
    params: ModelParams
    n: int
    trials: int
    bit_errors: int
    bits_total: int
    ci95: tuple[float, float]
    stderr: float
    seed: int

    @property
    def ber_hat(self) -> float:
        return self.bit_errors / self.bits_total

    @property
    def ci_halfwidth(self) -> float:
        return 0.5 * (self.ci95[1] - self.ci95[0])


def _trial_errors(detector: Detector, params: ModelParams, n: int, seed: int, trials: range) -> np.ndarray:
    if detector is Detector.MF_GENIE:
        return (~_mf_genie_batch(params, n, seed, trials)).astype(np.int64)
    detect = map_detect if detector is Detector.MAP else bro_detect
    return np.array([detect(gen_instance(params, n, seed, t)).errors for t in trials], dtype=np.int64)


def trial_errors(detector, params: ModelParams, n: int, trials: int, seed: int, workers: int = 1,
                 chunk: int = 2000) -> np.ndarray:
    """Error count of every trial, in trial order."""
    detector = Detector(detector)
    if trials < 1:
        raise ParameterError("trials must be at least 1")
    if detector is Detector.MAP and n > MAP_MAX_N:
        raise BudgetError(f"exhaustive MAP limited to n <= {MAP_MAX_N}, got {n}")
    ranges = [range(s, min(s + chunk, trials)) for s in range(0, trials, chunk)]
    if workers > 1 and len(ranges) > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda r: _trial_errors(detector, params, n, seed, r), ranges))
    else:
        parts = [_trial_errors(detector, params, n, seed, r) for r in ranges]
    return np.concatenate(parts)


def _report(detector: Detector, params: ModelParams, n: int, trials: int, seed: int,
            errs: np.ndarray) -> MonteCarloReport:
    bits_per_trial = 1 if detector is Detector.MF_GENIE else n
    bits_total = trials * bits_per_trial
    per_trial = errs / bits_per_trial
    stderr = float(np.std(per_trial, ddof=1) / math.sqrt(trials)) if trials > 1 else math.nan
    bit_errors = int(errs.sum())
    return MonteCarloReport(detector=detector, params=params, n=n, trials=trials, bit_errors=bit_errors,
                            bits_total=bits_total, ci95=wilson_interval(bit_errors, bits_total),
                            stderr=stderr, seed=int(seed))


def monte_carlo_ber(detector, params: ModelParams, n: int, trials: int, seed: int,
                    workers: int = 1) -> MonteCarloReport:
    """Pooled BER over ``trials`` deterministic instances.

    ``ci95`` is the Wilson interval of the pooled proportion; ``stderr`` is
    the trial-level standard error (errors inside one trial are correlated).
    """
    detector = Detector(detector)
    errs = trial_errors(detector, params, n, trials, seed, workers)
    return _report(detector, params, n, trials, seed, errs)


def mf_genie_sweep(params_list, n: int, trials: int, seed: int, chunk: int = 2000) -> list[MonteCarloReport]:
    """MF-genie reports for several noise levels from one set of draws.

    The genie's random inputs do not depend on sigma, so each chunk of trials
    is drawn once and decided at every noise level. Each report equals
    ``monte_carlo_ber("mf", p, n, trials, seed)``.
    """
    params_list = list(params_list)
    if trials < 1:
        raise ParameterError("trials must be at least 1")
    if not params_list:
        return []
    m = _rows_or_raise(params_list[0], n)
    if any(p.rows(n) != m for p in params_list):
        raise ParameterError("mf_genie_sweep needs one row count m = round(delta n) for all params")
    errs = [[] for _ in params_list]
    for start in range(0, trials, chunk):
        draws = _mf_genie_draws(m, n, seed, range(start, min(start + chunk, trials)))
        for out, p in zip(errs, params_list):
            out.append((~_mf_genie_decide(*draws, p.sigma)).astype(np.int64))
    return [_report(Detector.MF_GENIE, p, n, trials, seed, np.concatenate(e)) for p, e in zip(params_list, errs)]
