import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mapbound.bounds import replica_theta_star
from mapbound.errors import ConvergenceError, ParameterError
from mapbound.model import ModelParams
from mapbound.scalar_math import hermite_rule
from mapbound.tanaka import (TanakaState, b_infinity_consistency, closure, initial_state, solve_tanaka,
                             tanaka_step, tanh_moments)

from tolerances import BINF_RESIDUAL

P2 = ModelParams(2.0, 0.1)


@pytest.fixture(scope="module")
def b_sweep():
    return {B: solve_tanaka(P2, B) for B in (10, 30, 100)}


def mp_moments(E, F):
    a = mpmath.sqrt(F)
    f1 = lambda z: mpmath.tanh(a * z + E) * mpmath.npdf(z)
    f2 = lambda z: mpmath.tanh(a * z + E) ** 2 * mpmath.npdf(z)
    pts = [-mpmath.inf, -E / a, mpmath.inf]
    return float(mpmath.quad(f1, pts)), float(mpmath.quad(f2, pts))


class TestState:
    def test_validation(self):
        with pytest.raises(ParameterError):
            TanakaState(1.5, 0.5, 1, 1, 10)
        with pytest.raises(ParameterError):
            TanakaState(0.5, -0.1, 1, 1, 10)
        with pytest.raises(ParameterError):
            TanakaState(0.5, 0.5, -1, 1, 10)
        with pytest.raises(ParameterError):
            TanakaState(0.5, 0.5, 1, 1, 0)

    def test_ber(self):
        assert TanakaState(0.5, 0.5, 1, 1, 10).ber == 0.25


class TestStep:
    def test_zero_field(self):
        assert tanh_moments(0.0, 0.0) == (0.0, 0.0)

    def test_small_B_limit(self):
        E, F, _ = closure(0.2, 0.5, P2, 1e-12)
        assert E < 1e-11 and F < 1e-22

    def test_one_step_against_oracle(self):
        out = tanaka_step(TanakaState(0.5, 0.5, 1.0, 1.0, 10.0), P2, hermite_rule(61))
        m, q = mp_moments(1.0, 1.0)
        E, F, _ = closure(0.5 * (1 - m), q, P2, 10.0)
        assert (out.overlap_m, out.q) == pytest.approx((m, q), abs=1e-12)
        assert (out.E, out.F) == pytest.approx((E, F), rel=1e-11)

    @pytest.mark.parametrize("E,F", [(3.0, 40.0), (80.0, 5000.0), (500.0, 2e5), (0.1, 2.0)])
    def test_sharp_moments(self, E, F):
        assert tanh_moments(E, F) == pytest.approx(mp_moments(E, F), abs=1e-11)

    def test_clamp_flag(self):
        # sigma2 + 4 BER + q - 1 < 0 when q is small and BER is small
        s = tanaka_step(TanakaState(0.99, 0.0, 0.0, 0.0, 10.0), P2)
        assert s.overlap_m == 0.0
        assert closure(0.01, 0.1, P2, 10.0)[2] is True and closure(0.01, 0.1, P2, 10.0)[1] == 0.0

    @given(st.floats(-1, 1), st.floats(0, 1), st.floats(0, 1e3), st.floats(0, 1e6))
    def test_ranges(self, m, q, E, F):
        out = tanaka_step(TanakaState(m, q, E, F, 30.0), P2)
        assert -1 <= out.overlap_m <= 1 and 0 <= out.q <= 1 and out.E >= 0 and out.F >= 0

    def test_infinite_B_rejected(self):
        with pytest.raises(ParameterError):
            tanaka_step(TanakaState(0.5, 0.5, 1, 1, math.inf), P2)


class TestSolve:
    def test_fixed_point_property(self, b_sweep):
        for sol in b_sweep.values():
            again = tanaka_step(sol.state, P2)
            assert abs(again.overlap_m - sol.state.overlap_m) <= 1e-8
            assert abs(again.q - sol.state.q) <= 1e-8
            assert again.E == pytest.approx(sol.state.E, rel=1e-8)
            assert again.F == pytest.approx(sol.state.F, rel=1e-8)

    def test_monotone_towards_replica(self, b_sweep):
        ts = replica_theta_star(P2)
        bers = [b_sweep[B].ber for B in (10, 30, 100)]
        assert bers[0] > bers[1] > bers[2] > 0
        assert abs(bers[2] - ts) < abs(bers[1] - ts) < abs(bers[0] - ts)
        assert b_sweep[100].state.q >= 0.99

    def test_quadrature_order_agreement(self):
        a = solve_tanaka(P2, 30, rule=hermite_rule(61)).state.vector()
        b = solve_tanaka(P2, 30, rule=hermite_rule(121)).state.vector()
        assert np.all(np.abs(a[:2] - b[:2]) <= 1e-8)
        assert np.all(np.abs(a[2:] - b[2:]) <= 1e-8 * np.abs(a[2:]))

    @pytest.mark.parametrize("delta,sigma2", [(1.0, 0.1), (1.5, 0.2), (2.0, 0.1), (3.0, 0.05)])
    def test_large_B_close_to_replica(self, delta, sigma2):
        p = ModelParams(delta, sigma2)
        for B in (100, 300):
            assert abs(solve_tanaka(p, B).ber - replica_theta_star(p)) <= 10 / B

    def test_iteration_cap(self):
        with pytest.raises(ConvergenceError) as info:
            solve_tanaka(P2, 10, max_iters=2)
        assert isinstance(info.value.state, TanakaState) and info.value.iterations == 2

    def test_custom_init(self):
        init = initial_state(P2, 30, overlap_m=0.9, q=0.9)
        sol = solve_tanaka(P2, 30, init=init, damping=1.0)
        assert sol.ber == pytest.approx(solve_tanaka(P2, 30).ber, abs=1e-8)

    @pytest.mark.parametrize("kw", [{"damping": 0.0}, {"damping": 1.5}, {"B": math.inf}, {"B": -1.0}])
    def test_argument_checks(self, kw):
        args = {"params": P2, "B": 10.0, **kw}
        with pytest.raises(ParameterError):
            solve_tanaka(**args)


class TestBInfinity:
    @pytest.mark.parametrize("delta,sigma2", [(2.0, 0.1), (1.0, 0.1), (0.6, 0.01), (1.2, 1e-3)])
    def test_replica_point_is_consistent(self, delta, sigma2):
        p = ModelParams(delta, sigma2)
        assert b_infinity_consistency(replica_theta_star(p), p).residual <= BINF_RESIDUAL

    def test_non_solution(self):
        assert b_infinity_consistency(0.4, ModelParams(1.0, 0.1)).residual > 0.01

    @given(st.floats(1e-6, 0.99))
    def test_continuity(self, ber):
        p = ModelParams(1.0, 0.1)
        assert abs(b_infinity_consistency(ber, p).residual - b_infinity_consistency(ber + 1e-8, p).residual) <= 1e-6

    def test_c_value(self):
        r = b_infinity_consistency(0.1, ModelParams(1.0, 0.1))
        assert r.c == pytest.approx(math.sqrt(0.5))

    @pytest.mark.parametrize("bad", [0.0, 1.0, -0.5])
    def test_domain(self, bad):
        with pytest.raises(ParameterError):
            b_infinity_consistency(bad, P2)
