"""Analytic BER quantities for the MAP detector in the large-system limit.

With u = Q^{-1}(theta) the lower-bound function is

    ell(theta) = sqrt(delta) sqrt(4 theta + sigma^2) - 2 phi(u),

and everything else is a root of something built from it:

* theta0   -- largest root of ell(theta) = sigma sqrt(delta) (BER upper bound)
* tau0     -- the same root written as theta0 = Q(tau0)
* critical points -- roots of F(u) = u^2 (4 Q(u) + sigma^2) = delta; they are
  exactly the solutions of theta = Q(sqrt(delta / (sigma^2 + 4 theta)))
* theta_star -- the critical point minimizing ell (replica-symmetric BER)

All roots are found by a bracketing scan followed by bisection. Sign tests
use phi-scaled forms so they stay meaningful deep in the tail (theta0 is
about 1e-262 at delta = 1.2, 30 dB).
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import (DegenerateTangencyError, DomainError, InfeasibleParametersError,
                     MapboundError, NumericalError)
from .model import ModelParams
from .scalar_math import bisect, mills_ratio, phi, q_inv, q_tail, sign_changes

SQRT3 = math.sqrt(3.0)


class Regime(str, Enum):
    UNIQUE = "UniqueCritical"
    THREE = "ThreeCritical"


def _check_theta(theta):
    arr = np.asarray(theta, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0) or np.any(arr >= 1.0):
        raise DomainError("theta must lie in the open interval (0, 1)")
    return arr


def _out(arr, like):
    return float(arr) if np.ndim(like) == 0 else arr


# -- ell and its derivative ----------------------------------------------------

def ell(theta, params: ModelParams):
    """ell(theta) = sqrt(delta) sqrt(4 theta + sigma^2) - sqrt(2/pi) exp(-Q^{-1}(theta)^2 / 2)."""
    arr = _check_theta(theta)
    u = q_inv(arr)
    val = math.sqrt(params.delta) * np.sqrt(4.0 * arr + params.sigma2) - 2.0 * phi(u)
    return _out(val, theta)


def ell_at_zero(params: ModelParams) -> float:
    """Continuous extension ell(0) = ell(0+) = sigma sqrt(delta)."""
    return params.sigma * math.sqrt(params.delta)


def ell_of_u(u, params: ModelParams):
    """ell evaluated at theta = Q(u), without the q_inv round trip."""
    u = np.asarray(u, dtype=float)
    val = math.sqrt(params.delta) * np.sqrt(4.0 * q_tail(u) + params.sigma2) - 2.0 * phi(u)
    return _out(val, u)


def ell_prime(theta, params: ModelParams):
    arr = _check_theta(theta)
    val = 2.0 * math.sqrt(params.delta) / np.sqrt(4.0 * arr + params.sigma2) - 2.0 * q_inv(arr)
    return _out(val, theta)


def _gap_scaled_u(u, params: ModelParams):
    """(ell - sigma sqrt(delta)) / phi(u) at theta = Q(u); same sign as the gap."""
    u = np.asarray(u, dtype=float)
    s = params.sigma
    q = q_tail(u)
    return 4.0 * math.sqrt(params.delta) * mills_ratio(u) / (np.sqrt(4.0 * q + params.sigma2) + s) - 2.0


def ell_gap(theta, params: ModelParams):
    """ell(theta) - sigma sqrt(delta), free of the sqrt(4 theta + s2) - s cancellation."""
    arr = _check_theta(theta)
    u = q_inv(arr)
    val = (math.sqrt(params.delta) * 4.0 * arr / (np.sqrt(4.0 * arr + params.sigma2) + params.sigma)
           - 2.0 * phi(u))
    return _out(val, theta)


# -- auxiliary functions of the critical-point analysis --------------------------

def aux_F(u, sigma2):
    """F(u) = u^2 (4 Q(u) + sigma^2); F(u) = delta <=> u is a critical point."""
    u = np.asarray(u, dtype=float)
    return _out(u * u * (4.0 * q_tail(u) + sigma2), u)


def aux_G(u):
    """G(u) = 4 Q(u) + 2 u Q'(u); F'(u) = 2 u (G(u) + sigma^2)."""
    u = np.asarray(u, dtype=float)
    return _out(4.0 * q_tail(u) - 2.0 * u * phi(u), u)


def aux_H(u):
    """H(u) = -2 u^3 Q'(u), equal to F at the local maximum u_A of F."""
    u = np.asarray(u, dtype=float)
    return _out(2.0 * u ** 3 * phi(u), u)


# -G(sqrt 3) ~ 0.14183: below this noise level F(u) stops being monotone
G_MIN_ABS = -aux_G(SQRT3)


# -- critical points -------------------------------------------------------------

U_STEP = 1e-4


def critical_us(params: ModelParams, step: float = U_STEP) -> list[float]:
    """Roots u > 0 of F(u) = delta, ascending (so theta = Q(u) descending)."""
    delta, s2 = params.delta, params.sigma2
    u_max = max(10.0, 2.0 * math.sqrt(delta / s2))
    grid = step * np.arange(1, int(math.ceil(u_max / step)) + 1)
    vals = aux_F(grid, s2) - delta
    idx = sign_changes(vals)
    if len(idx) % 2 == 0:
        raise DegenerateTangencyError(
            f"F(u) = delta has {len(idx)} sign changes for {params}; tangency at the regime boundary")
    if len(idx) not in (1, 3):
        raise NumericalError(f"{len(idx)} critical points found for {params}")
    f = lambda v: aux_F(v, s2) - delta
    return [bisect(f, float(grid[i]), float(grid[i + 1]), xtol=0.0, rtol=1e-16) for i in idx]


def _theta_of_u(u: float, params: ModelParams) -> float:
    theta = float(q_tail(u))
    if theta < np.finfo(float).tiny:
        raise InfeasibleParametersError(f"critical point Q({u:.6g}) underflows double precision for {params}")
    return theta


def critical_points(params: ModelParams) -> list[float]:
    """Critical points of ell in (0, 1/2), ascending.

    A point Q(u) below the double-precision range comes back as 0.0; the
    count stays exact because roots are located in u.
    """
    return sorted(float(q_tail(u)) for u in critical_us(params))


def replica_theta_star(params: ModelParams) -> float:
    """Solution of theta = Q(sqrt(delta / (sigma^2 + 4 theta))) minimizing ell."""
    us = critical_us(params)
    vals = [ell_of_u(u, params) for u in us]
    return _theta_of_u(us[int(np.argmin(vals))], params)


def _u_roots_of_g(sigma2: float) -> tuple[float, float]:
    g = lambda u: aux_G(u) + sigma2
    try:
        u_a = bisect(g, 1e-8, SQRT3, xtol=0.0, rtol=1e-15)
        u_b = bisect(g, SQRT3, 40.0, xtol=0.0, rtol=1e-15)
    except InfeasibleParametersError as exc:  # G(sqrt 3) is the global minimum
        raise NumericalError(f"could not bracket G(u) = -{sigma2}") from exc
    return u_a, u_b


def classify_uniqueness(params: ModelParams) -> Regime:
    """Number of critical points of ell from the shape of F.

    F increases on [0, u_A], decreases on [u_A, u_B] and increases after,
    where u_A <= sqrt 3 <= u_B solve G(u) = -sigma^2. Three roots of F = delta
    therefore need F(u_B) <= delta <= F(u_A).
    """
    if params.sigma2 >= G_MIN_ABS:
        return Regime.UNIQUE
    u_a, u_b = _u_roots_of_g(params.sigma2)
    f_a, f_b = aux_F(u_a, params.sigma2), aux_F(u_b, params.sigma2)
    return Regime.THREE if f_b <= params.delta <= f_a else Regime.UNIQUE


def three_critical_window(sigma2: float) -> tuple[float, float] | None:
    """delta interval [F(u_B), F(u_A)] with three critical points, or None."""
    if sigma2 >= G_MIN_ABS:
        return None
    u_a, u_b = _u_roots_of_g(sigma2)
    return aux_F(u_b, sigma2), aux_F(u_a, sigma2)


# -- theta0 / tau0 -------------------------------------------------------------------

THETA_STEP = 1e-5


def theta0(params: ModelParams, check_unique: bool = True) -> float:
    """Largest root of ell(theta) = sigma sqrt(delta) in (0, 1).

    Descending scan from 1 - 1e-9 at step 1e-5; when the root lies below the
    linear grid the scan continues on a logarithmic grid down to 1e-300.
    The bracket is refined by bisection to 1e-12 (relative below 1e-5).
    """
    top = 1.0 - 1e-9
    lin = top - THETA_STEP * np.arange(int(top / THETA_STEP))
    lin = lin[lin > 0]
    n_log = int(math.ceil((300.0 + math.log10(lin[-1])) / 0.02))
    logs = lin[-1] * 10.0 ** (-0.02 * np.arange(1, n_log + 1))
    grid = np.concatenate([lin, logs])
    vals = _gap_scaled_u(q_inv(grid), params)
    if not vals[0] > 0:
        raise InfeasibleParametersError(f"ell(1-) <= sigma sqrt(delta) for {params}")
    idx = sign_changes(vals)
    if len(idx) == 0:
        raise InfeasibleParametersError(f"no crossing of ell with sigma sqrt(delta) above 1e-300 for {params}")
    i = int(idx[0])
    hi, lo = float(grid[i]), float(grid[i + 1])
    g = lambda t: float(_gap_scaled_u(q_inv(t), params))
    root = bisect(g, lo, hi, xtol=1e-12 if lo >= THETA_STEP else 0.0, rtol=1e-13)
    if check_unique and classify_uniqueness(params) is Regime.UNIQUE:
        below = vals[i + 1:]
        if np.any(below > 0):
            raise NumericalError(f"second crossing below theta0 in the unique regime for {params}")
    return root


def tau0_residual(tau, params: ModelParams):
    """sqrt(d S) + 2 S phi(tau) - sqrt(d S) sqrt(1 + 4 S Q(tau)), S = SNR."""
    tau = np.asarray(tau, dtype=float)
    snr = params.snr()
    r = math.sqrt(params.delta * snr)
    return _out(r + 2.0 * snr * phi(tau) - r * np.sqrt(1.0 + 4.0 * snr * q_tail(tau)), tau)


def _tau_scaled(tau, params: ModelParams):
    # -residual / (S phi(tau)); positive left of the smallest root
    snr = params.snr()
    r = math.sqrt(params.delta * snr)
    return 4.0 * r * mills_ratio(tau) / (1.0 + np.sqrt(1.0 + 4.0 * snr * q_tail(tau))) - 2.0


TAU_STEP = 1e-4


def tau0(params: ModelParams) -> float:
    """Smallest root tau of the SNR-form of the theta0 equation; Q(tau0) = theta0.

    Ascending scan from -10 to 20 at step 1e-4; if no root is bracketed the
    range widens to [-20, max(20, 2 sqrt(delta SNR) + 10)].
    """
    upper = max(20.0, 2.0 * math.sqrt(params.delta * params.snr()) + 10.0)
    for lo, hi in ((-10.0, 20.0), (-20.0, upper)):
        grid = lo + TAU_STEP * np.arange(int(round((hi - lo) / TAU_STEP)) + 1)
        vals = _tau_scaled(grid, params)
        idx = sign_changes(vals)
        if len(idx):
            i = int(idx[0])
            f = lambda t: float(_tau_scaled(t, params))
            return bisect(f, float(grid[i]), float(grid[i + 1]), xtol=1e-12)
    raise InfeasibleParametersError(f"tau0 not bracketed for {params}")


def mfb(params: ModelParams) -> float:
    """Matched-filter (genie) bound Q(sqrt(delta SNR))."""
    return float(q_tail(math.sqrt(params.delta / params.sigma2)))


# -- summaries and curves --------------------------------------------------------

@dataclass(frozen=True)
class BoundSummary:
    params: ModelParams
    theta0: float
    tau0: float
    theta_star: float
    critical_thetas: tuple[float, ...]
    regime: Regime
    mfb: float


def summarize(params: ModelParams) -> BoundSummary:
    return BoundSummary(
        params=params,
        theta0=theta0(params),
        tau0=tau0(params),
        theta_star=replica_theta_star(params),
        critical_thetas=tuple(critical_points(params)),
        regime=classify_uniqueness(params),
        mfb=mfb(params),
    )


@dataclass(frozen=True)
class CurveRow:
    snr_db: float
    mfb: float
    replica: float
    theta0: float
    regime: str
    error: str | None = None


def curve_row(delta: float, snr_db: float) -> CurveRow:
    try:
        p = ModelParams.from_snr_db(delta, snr_db)
        return CurveRow(snr_db, mfb(p), replica_theta_star(p), theta0(p), classify_uniqueness(p).value)
    except MapboundError as exc:
        nan = float("nan")
        return CurveRow(snr_db, nan, nan, nan, "error", error=f"{type(exc).__name__}: {exc}")


def ber_curves(delta: float, snr_db_grid: Sequence[float], workers: int = 1) -> list[CurveRow]:
    """One analytic row per SNR point; failing points come back flagged."""
    grid = [float(s) for s in snr_db_grid]
    if not grid:
        raise ValueError("empty SNR grid")
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(lambda s: curve_row(delta, s), grid))
    return [curve_row(delta, s) for s in grid]
