"""Named numerical property checks run by ``mapbound verify-props``.

Each check returns a ``CheckResult`` with the measured quantity, the value
it is compared against and a verdict; nothing here raises on failure.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar

from . import bounds
from .model import ModelParams
from .scalar_math import q_tail
from .tanaka import b_infinity_consistency


@dataclass(frozen=True)
class CheckResult:
    name: str
    measured: float
    threshold: float
    passed: bool
    detail: str = ""

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        text = f"{verdict} {self.name}: measured {self.measured:.6g} vs threshold {self.threshold:.6g}"
        return f"{text} ({self.detail})" if self.detail else text


def h_maximum() -> tuple[float, float]:
    """(argmax, max) of H(u) = 2 u^3 phi(u) over u > 0."""
    grid = np.linspace(0.01, 10.0, 2000)
    u0 = float(grid[np.argmax(bounds.aux_H(grid))])
    res = minimize_scalar(lambda u: -bounds.aux_H(u), bounds=(u0 - 0.01, u0 + 0.01), method="bounded",
                          options={"xatol": 1e-12})
    return float(res.x), float(-res.fun)


def check_g_sqrt3() -> CheckResult:
    g = float(bounds.aux_G(bounds.SQRT3))
    return CheckResult("G-sqrt3", g, -0.14183, abs(g + 0.14183) <= 1e-4, "|G(sqrt 3) + 0.14183| <= 1e-4")


def check_h_sqrt3() -> CheckResult:
    u, h = h_maximum()
    return CheckResult("H-sqrt3", h, 0.9251, h <= 0.9251 and abs(u - bounds.SQRT3) <= 1e-4,
                       f"argmax u = {u:.6f}")


UNIQUE_DELTAS = (0.93, 1.0, 1.5, 3.0)
UNIQUE_SIGMA2 = tuple(10.0 ** e for e in np.arange(-4.0, 0.01, 0.5))
SIGMA2_SWEEP = 0.15
DELTA_SWEEP = tuple(np.round(np.arange(0.1, 3.0001, 0.1), 10))


def uniqueness_grid() -> list[ModelParams]:
    pts = [ModelParams(d, s) for d in UNIQUE_DELTAS for s in UNIQUE_SIGMA2]
    pts += [ModelParams(float(d), SIGMA2_SWEEP) for d in DELTA_SWEEP]
    return pts


def check_uniqueness() -> CheckResult:
    counts = [len(bounds.critical_points(p)) for p in uniqueness_grid()]
    three = len(bounds.critical_points(ModelParams(0.6, 0.01)))
    ok = all(c == 1 for c in counts) and three == 3
    return CheckResult("uniqueness", float(max(counts)), 1.0, ok,
                       f"{len(counts)} grid points, delta=0.6 sigma2=0.01 has {three} critical points")


def consistency_grid() -> list[ModelParams]:
    return [ModelParams.from_snr_db(d, s) for d in (0.8, 1.0, 1.5, 2.0, 3.0) for s in range(0, 22, 3)]


def check_tau0() -> CheckResult:
    worst = max(abs(float(q_tail(bounds.tau0(p))) - bounds.theta0(p)) for p in consistency_grid())
    return CheckResult("tau0-consistency", worst, 1e-8, worst <= 1e-8, "max |Q(tau0) - theta0|")


REPLICA_POINTS = ((1.0, 0.1), (1.0, 0.5), (2.0, 0.1), (1.5, 0.05), (3.0, 0.3))


def check_replica_stationary() -> CheckResult:
    worst = max(abs(bounds.ell_prime(bounds.replica_theta_star(ModelParams(d, s)), ModelParams(d, s)))
                for d, s in REPLICA_POINTS)
    return CheckResult("replica-stationary", worst, 1e-9, worst <= 1e-9, "max |ell'(theta_star)|")


def check_tanaka_binf() -> CheckResult:
    worst = 0.0
    for d, s in ((2.0, 0.1),) + REPLICA_POINTS:
        p = ModelParams(d, s)
        worst = max(worst, b_infinity_consistency(bounds.replica_theta_star(p), p).residual)
    return CheckResult("tanaka-binf", worst, 1e-10, worst <= 1e-10, "max |theta_star - Q(1/c)|")


def check_ordering() -> CheckResult:
    worst = -math.inf
    for s in np.arange(0.0, 16.01, 0.5):
        p = ModelParams.from_snr_db(1.0, float(s))
        t0, ts, mf = bounds.theta0(p), bounds.replica_theta_star(p), bounds.mfb(p)
        worst = max(worst, ts - t0, mf - ts)
    return CheckResult("ordering", worst, 0.0, worst <= 0.0, "max of theta_star - theta0, mfb - theta_star at delta=1")


CHECKS: dict[str, Callable[[], CheckResult]] = {
    "G-sqrt3": check_g_sqrt3,
    "H-sqrt3": check_h_sqrt3,
    "uniqueness": check_uniqueness,
    "tau0-consistency": check_tau0,
    "replica-stationary": check_replica_stationary,
    "tanaka-binf": check_tanaka_binf,
    "ordering": check_ordering,
}


def run_checks(names: list[str]) -> list[CheckResult]:
    if names == ["all"]:
        names = list(CHECKS)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise KeyError(f"unknown check(s): {', '.join(unknown)}; choose from {', '.join(CHECKS)} or all")
    return [CHECKS[n]() for n in names]
