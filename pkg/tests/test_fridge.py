import math

import numpy as np
import pytest

from icofridge.channels import ThermalSpec, thermal_state
from icofridge.fridge import (
    AttemptCapExceeded,
    CycleParams,
    DegenerateCycle,
    REHOMOGENIZE,
    attempt_heats,
    cycle_events,
    heat_flows,
    p_minus_analytic,
    positive_refrigeration,
    reservoir_rehomogenize,
    run_cycle_stochastic,
    simulate_branches,
    simulate_success_path,
    step_i_state,
    work_and_cop,
)
from icofridge.switch import closed_form_ico, measure_control_pm


class TestParams:
    def test_defaults(self):
        p = CycleParams(2.0, 1.0)
        assert p.beta_r == 1.0 and p.alpha == 0.5 and p.delta == 1.0

    @pytest.mark.parametrize(
        "kw",
        [
            dict(beta_c=0.5, beta_h=1.0),
            dict(beta_c=1.0, beta_h=0.5, delta=0.0),
            dict(beta_c=1.0, beta_h=0.5, beta_r=-1.0),
            dict(beta_c=1.0, beta_h=0.5, alpha=1.0),
            dict(beta_c=math.inf, beta_h=0.5),
            dict(beta_c=0.0, beta_h=0.0),
        ],
    )
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            CycleParams(**kw)


class TestStepOne:
    def test_infinite_temperature(self):
        assert np.allclose(step_i_state(1.0).matrix, np.eye(2) / 2, atol=1e-15)

    def test_unit_beta_delta(self):
        pops = np.diag(step_i_state(math.exp(-1)).matrix).real
        # (r + 2) / (3r + 3) at r = 1/e
        assert pops == pytest.approx([0.577020, 0.422980], abs=1e-6)

    def test_zero_ratio_rejected(self):
        with pytest.raises(ValueError):
            step_i_state(0.0)

    @pytest.mark.parametrize("beta", [0.0, 0.3, 1.0, 2.5, 7.0])
    def test_matches_minus_branch(self, beta):
        spec = ThermalSpec.qubit(beta, 1.0)
        out = measure_control_pm(closed_form_ico(spec, thermal_state(spec), 0.5))
        assert np.max(np.abs(out.rho_minus.matrix - step_i_state(spec.r).matrix)) < 1e-12

    @pytest.mark.parametrize("beta", [0.0, 1.0, 5.0, 15.0, 25.0])
    def test_matches_switch_simulation(self, beta):
        b = simulate_branches(CycleParams(beta, beta, beta_r=1.0))
        assert np.max(np.abs(b.minus.matrix - step_i_state(math.exp(-beta)).matrix)) < 1e-12


class TestHeat:
    @pytest.mark.parametrize("beta,delta", [(0.5, 1.0), (1.0, 2.0), (3.0, 0.3)])
    def test_equal_temperatures(self, beta, delta):
        lg = heat_flows(CycleParams(beta, beta, delta))
        r = math.exp(-beta * delta)
        assert lg.q_cold_cycle == pytest.approx((r - 1) / (3 * (1 + r)) * delta, abs=1e-15)
        assert lg.q_cold_cycle < 0

    def test_symmetry_point(self):
        assert heat_flows(CycleParams(0.0, 0.0, beta_r=1.0)).q_cold_cycle == 0.0

    def test_low_temperature_asymptote(self):
        lg = heat_flows(CycleParams(20.0, 10.0))
        assert abs(lg.q_cold_cycle + 1 / 3) < 1e-3

    def test_conservation_random(self, rng):
        for _ in range(1000):
            bh = rng.uniform(0.01, 10)
            p = CycleParams(bh + rng.uniform(0, 10), bh, rng.uniform(0.1, 5))
            lg = heat_flows(p)
            assert abs(lg.total) < 1e-12
            assert abs(lg.q_cold_cycle - (lg.q_cold_i + lg.q_cold_iii)) < 1e-12

    def test_density_matrix_path_agrees(self, rng):
        for _ in range(200):
            bh = rng.uniform(0.01, 10)
            p = CycleParams(bh + rng.uniform(0, 15), bh, rng.uniform(0.1, 3))
            if p_minus_analytic(p) < 1e-13:
                continue
            a, s = heat_flows(p), simulate_success_path(p)
            for f in ("q_cold_i", "q_hot_ii", "q_cold_iii", "q_cold_cycle"):
                assert abs(getattr(a, f) - getattr(s, f)) < 1e-12

    def test_non_default_alpha_uses_simulation(self):
        lg = heat_flows(CycleParams(2.0, 1.0, alpha=0.3))
        assert not lg.analytic
        assert abs(lg.total) < 1e-12


class TestRefrigerationCondition:
    def test_cold_limit(self):
        assert positive_refrigeration(CycleParams(20.0, 10.0))

    @pytest.mark.parametrize("beta", [0.1, 1.0, 4.0])
    def test_equal_temperatures(self, beta):
        assert positive_refrigeration(CycleParams(beta, beta))

    def test_infinite_temperature_boundary(self):
        p = CycleParams(0.0, 0.0, beta_r=1.0)
        assert not positive_refrigeration(p)
        assert heat_flows(p).q_cold_cycle == 0.0

    def test_flag_matches_sign_on_grid(self):
        axis = np.linspace(0.0, 6.0, 61)
        seen = set()
        for bc in axis:
            for bh in axis[axis <= bc]:
                p = CycleParams(bc, bh, beta_r=1.0)
                flag = positive_refrigeration(p)
                assert flag == (heat_flows(p).q_cold_cycle < 0)
                seen.add(flag)
        assert seen == {True, False}

    def test_flag_matches_sign_off_default_alpha(self, rng):
        for _ in range(50):
            bh = rng.uniform(0.01, 3)
            p = CycleParams(bh + rng.uniform(0, 3), bh, alpha=rng.uniform(0.05, 0.95))
            assert positive_refrigeration(p) == (heat_flows(p).q_cold_cycle < 0)


class TestWork:
    def test_infinite_temperature(self):
        rep = work_and_cop(CycleParams(0.0, 0.0, beta_r=1.0))
        assert abs(rep.p_minus - 3 / 8) < 1e-15
        s = -(3 / 8) * math.log(3 / 8) - (5 / 8) * math.log(5 / 8)
        assert rep.entropy_per_measurement == pytest.approx(s, abs=1e-15)
        assert rep.entropy_per_measurement == pytest.approx(0.661563, abs=1e-6)
        assert rep.cop == 0.0

    def test_unit_beta_delta(self):
        rep = work_and_cop(CycleParams(1.0, 1.0))
        assert rep.p_minus == pytest.approx(0.294917, abs=1e-6)
        assert rep.ledger.q_cold_cycle == pytest.approx(-0.154039, abs=1e-6)
        assert rep.mean_attempts == pytest.approx(1 / rep.p_minus, abs=1e-12)
        assert rep.work_per_cycle == pytest.approx(rep.entropy_per_measurement / rep.p_minus, rel=1e-14)
        assert rep.cop == pytest.approx(-rep.ledger.q_cold_cycle / rep.work_per_cycle, rel=1e-14)

    def test_p_minus_matches_simulation(self, rng):
        for _ in range(50):
            bh = rng.uniform(0, 10)
            p = CycleParams(bh + rng.uniform(0, 20), bh, beta_r=1.0, alpha=rng.uniform(0.05, 0.95))
            a = p_minus_analytic(p)
            s = simulate_branches(p).p_minus
            assert abs(a - s) <= 1e-12 * a + 1e-15

    def test_p_minus_decreasing_in_cold_beta(self):
        ps = [p_minus_analytic(CycleParams(b, 0.0, beta_r=1.0)) for b in np.linspace(0, 30, 301)]
        assert all(x > y for x, y in zip(ps, ps[1:]))

    def test_below_carnot(self):
        axis = np.linspace(0.1, 15, 50)
        for bc in axis:
            for bh in axis[axis < bc]:
                rep = work_and_cop(CycleParams(bc, bh))
                if rep.prc_satisfied:
                    assert rep.cop <= rep.carnot_cop + 1e-9

    def test_degenerate(self):
        with pytest.raises(DegenerateCycle):
            work_and_cop(CycleParams(40.0, 1.0))


class TestLedgerEvents:
    def test_marker(self):
        ev = reservoir_rehomogenize()
        assert ev.step == REHOMOGENIZE and ev.heat == 0.0

    def test_cycle_events(self):
        p = CycleParams(1.5, 0.7)
        heats = attempt_heats(simulate_branches(p), p)
        events = cycle_events(heats, 4)
        assert sum(e.step == REHOMOGENIZE for e in events) == 1
        lg = heat_flows(p)
        cold = sum(e.heat for e in events if e.reservoir == "cold")
        hot = sum(e.heat for e in events if e.reservoir == "hot")
        assert abs(cold - lg.q_cold_cycle) < 1e-12
        assert abs(hot - lg.q_hot_ii) < 1e-12
        without_marker = [e for e in events if e.step != REHOMOGENIZE]
        assert sum(e.heat for e in events) == sum(e.heat for e in without_marker)

    def test_failed_attempt_nets_zero(self, rng):
        for _ in range(100):
            bh = rng.uniform(0.01, 5)
            p = CycleParams(bh + rng.uniform(0, 10), bh)
            heats = attempt_heats(simulate_branches(p), p)
            assert heats.plus_ico > 0
            assert abs(heats.failed_net) < 1e-12


class TestStochastic:
    def test_reproducible(self):
        p = CycleParams(1.0, 0.5)
        a = run_cycle_stochastic(p, seed=7, trials=500)
        b = run_cycle_stochastic(p, seed=7, trials=500)
        assert np.array_equal(a.attempts, b.attempts)
        c = run_cycle_stochastic(p, seed=8, trials=500)
        assert not np.array_equal(a.attempts, c.attempts)

    def test_trial_streams_independent_of_count(self):
        p = CycleParams(1.0, 0.5)
        short = run_cycle_stochastic(p, seed=3, trials=50)
        long = run_cycle_stochastic(p, seed=3, trials=200)
        assert np.array_equal(short.attempts, long.attempts[:50])

    def test_marker_count(self):
        run = run_cycle_stochastic(CycleParams(1.0, 1.0), seed=1, trials=321)
        assert run.rehomogenize_events == 321

    def test_attempt_statistics(self):
        p = CycleParams(2.0, 1.0)
        run = run_cycle_stochastic(p, seed=11, trials=20000)
        mean, se = run.mean_attempts
        assert abs(mean - 1 / run.p_minus) < 3 * se
        w, wse = run.mean_work
        assert abs(w - work_and_cop(p).work_per_cycle) < 3 * wse

    def test_attempt_cap(self):
        with pytest.raises(AttemptCapExceeded):
            run_cycle_stochastic(CycleParams(12.0, 1.0), seed=0, trials=50, max_attempts=10)

    def test_degenerate(self):
        with pytest.raises(DegenerateCycle):
            run_cycle_stochastic(CycleParams(40.0, 1.0), seed=0, trials=10)

    def test_bad_trials(self):
        with pytest.raises(ValueError):
            run_cycle_stochastic(CycleParams(1.0, 1.0), seed=0, trials=0)
