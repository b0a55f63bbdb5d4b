import math

import numpy as np
import pytest

from sunpump.lti import (DegenerateSystemError, ImproperSystemError,
                         NotSettledError, Polynomial, TransferFunction,
                         error_constants, frequency_response, poly_roots,
                         root_locus, root_residual_bound, routh_table,
                         ss_error_vs_gain, stability_margins,
                         stability_verdict_from_roots, step_metrics,
                         step_response, tf_feedback, tf_feedback_gain,
                         tf_from_text, tf_to_text)


class TestPolynomial:
    def test_zero_polynomial_rejected(self):
        with pytest.raises(ValueError):
            Polynomial([0.0, 0.0])

    def test_leading_zeros_trimmed(self):
        p = Polynomial([0.0, 0.0, 2.0, 1.0])
        assert p.degree == 1
        assert p.coeffs == (2.0, 1.0)

    def test_eval_and_multiply(self):
        p = Polynomial([1.0, 2.0])  # s + 2
        q = Polynomial([1.0, 3.0])  # s + 3
        assert (p * q).coeffs == (1.0, 5.0, 6.0)
        assert p(2.0) == 4.0


class TestRoots:
    def test_factorable_quadratic(self):
        r = poly_roots([1.0, 3.0, 2.0])
        assert r == pytest.approx([-2.0, -1.0])

    def test_tank_oscillator_poles(self):
        # underdamped pair of s^2 + 0.02241 s + 5
        r = poly_roots([1.0, 0.02241, 5.0])
        assert sorted(x.real for x in r) == pytest.approx([-0.011205] * 2,
                                                          abs=1e-6)
        assert sorted(x.imag for x in r) == pytest.approx([-2.23604, 2.23604],
                                                          abs=1e-4)

    def test_metering_pump_quadratic_formula(self):
        # quadratic formula oracle for s^2 + 12.32 s + 0.4582
        b, c = 12.32, 0.4582
        sq = math.sqrt(b * b - 4 * c)
        expected = sorted([(-b - sq) / 2, (-b + sq) / 2])
        r = poly_roots([1.0, b, c])
        assert [x.real for x in r] == pytest.approx(expected, rel=1e-9)
        assert expected == pytest.approx([-12.2826955, -0.0373045], abs=1e-6)

    def test_residual_contract_random(self):
        rng = np.random.RandomState(42)
        for _ in range(50):
            deg = rng.randint(2, 7)
            c = rng.uniform(-10, 10, deg + 1)
            if abs(c[0]) < 0.1:
                c[0] = 1.0
            p = Polynomial(c)
            for r in poly_roots(p):
                assert abs(p(r)) <= root_residual_bound(p, r)

    def test_degree_zero_rejected(self):
        with pytest.raises(ValueError):
            poly_roots([3.0])

    def test_double_root_survives_polish(self):
        # 53.82 s^2 + 897 s + 3737.5 = 53.82 (s + 25/3)^2 exactly
        r = poly_roots([53.82, 897.0, 3737.5])
        assert [x.real for x in r] == pytest.approx([-25.0 / 3] * 2,
                                                    rel=1e-6)

    def test_triple_root(self):
        # (s + 2)^3
        r = poly_roots(np.convolve(np.convolve([1, 2], [1, 2]), [1, 2]))
        assert sorted(x.real for x in r) == pytest.approx([-2.0] * 3,
                                                          abs=1e-4)


class TestFeedback:
    def test_pure_integrator_unity(self):
        g = TransferFunction([1.0], [1.0, 0.0])
        cl = tf_feedback(g, TransferFunction([1.0], [1.0]))
        assert cl.den.coeffs == pytest.approx((1.0, 1.0))
        assert cl.num.coeffs == pytest.approx((1.0,))

    def test_motor_loop_denominator(self):
        k = 1e5
        g = k * TransferFunction([0.0001563],
                                 [1.2e-8, 7.51e-6, 0.0001625, 0.0])
        cl = tf_feedback_gain(g, 1.0)
        # den scaled monic; check ratios against {1.2e-8, 7.51e-6,
        # 0.0001625, 0.0001563 K}
        expect = np.array([1.2e-8, 7.51e-6, 0.0001625, 0.0001563 * k])
        assert np.allclose(cl.den.coeffs, expect / 1.2e-8, rtol=1e-12)

    def test_open_loop_h_zero(self):
        g = TransferFunction([5.0], [475.0, 1.0])
        assert tf_feedback(g, 0.0) is g

    def test_degenerate(self):
        g = TransferFunction([1.0], [1.0, 0.0])   # 1/s
        h = TransferFunction([-1.0, 0.0], [1.0])  # -s
        with pytest.raises(DegenerateSystemError):
            tf_feedback(g, h)


class TestStepResponse:
    def test_first_order_analytic_point(self):
        tr = step_response(TransferFunction([1.0], [1.0, 1.0]), 5.0)
        y1 = np.interp(1.0, tr.t, tr.y)
        assert y1 == pytest.approx(1 - math.exp(-1), abs=1e-3)

    def test_pump_storage_analytic(self):
        tr = step_response(TransferFunction([5.0], [475.0, 1.0]), 475.0 * 6)
        y_tau = np.interp(475.0, tr.t, tr.y)
        assert y_tau == pytest.approx(5 * (1 - math.exp(-1)), rel=1e-4)

    def test_dc_gain_convergence(self):
        # stable 2nd order: final value -> num(0)/den(0) within 0.5%
        tf = TransferFunction([3.0], [1.0, 2.0, 4.0])
        tr = step_response(tf, 20.0)
        assert tr.y[-1] == pytest.approx(tf.dc_gain(), rel=5e-3)
        assert not tr.diverged

    def test_improper_rejected(self):
        with pytest.raises(ImproperSystemError):
            step_response(TransferFunction([1.0, 0.0, 0.0], [1.0, 1.0]), 1.0)

    def test_unstable_flagged(self):
        tr = step_response(TransferFunction([1.0], [1.0, -1.0]), 5.0)
        assert tr.diverged
        with pytest.raises(NotSettledError):
            step_metrics(tr)

    def test_direct_feedthrough(self):
        # (s + 2)/(s + 1): starts at 1, settles at 2
        tr = step_response(TransferFunction([1.0, 2.0], [1.0, 1.0]), 12.0)
        assert tr.y[0] == pytest.approx(1.0)
        assert tr.y[-1] == pytest.approx(2.0, rel=1e-4)

    def test_dt_halving_stability(self):
        tf = TransferFunction([10.0], [1.0, 2.0, 10.0])
        m1 = step_metrics(step_response(tf, 12.0, dt=0.004))
        m2 = step_metrics(step_response(tf, 12.0, dt=0.002))
        for attr in ("rise_time_s", "settling_time_s", "peak"):
            a, b = getattr(m1, attr), getattr(m2, attr)
            assert abs(a - b) <= 0.005 * abs(b)


class TestStepMetrics:
    @pytest.mark.parametrize("tau", [0.1, 1.0, 475.0])
    def test_first_order_formulas(self, tau):
        tr = step_response(TransferFunction([2.0], [tau, 1.0]), 12.0 * tau)
        m = step_metrics(tr)
        assert m.rise_time_s == pytest.approx(tau * math.log(9), rel=0.01)
        assert m.settling_time_s == pytest.approx(tau * math.log(50),
                                                  rel=0.01)
        assert m.overshoot_pct == 0.0
        assert m.steady_state_value == pytest.approx(2.0, rel=1e-3)

    def test_constant_trace(self):
        from sunpump.lti import StepTrace
        t = np.linspace(0, 1, 100)
        m = step_metrics(StepTrace(t, np.ones_like(t)))
        assert m.rise_time_s == 0.0
        assert m.overshoot_pct == 0.0
        assert m.steady_state_value == 1.0

    def test_second_order_overshoot(self):
        # zeta = 0.5: overshoot = exp(-pi zeta / sqrt(1 - zeta^2))
        wn, zeta = 3.0, 0.5
        tf = TransferFunction([wn * wn], [1.0, 2 * zeta * wn, wn * wn])
        m = step_metrics(step_response(tf, 10.0))
        expect = 100 * math.exp(-math.pi * zeta / math.sqrt(1 - zeta ** 2))
        assert m.overshoot_pct == pytest.approx(expect, rel=0.01)
        assert m.peak_time_s == pytest.approx(
            math.pi / (wn * math.sqrt(1 - zeta ** 2)), rel=0.01)


class TestRouth:
    def test_stable_quadratic(self):
        res = routh_table([1.0, 2.0, 5.0])
        assert res.verdict == "stable"
        assert res.sign_changes == 0
        assert len(res.table) == 3

    def test_negative_coefficient_unstable(self):
        assert routh_table([1.0, -1.0, 1.0]).verdict == "unstable"

    def test_printed_quartic_matches_root_oracle(self):
        p = Polynomial([1.0, 625.8, 1.382e4, 1.239e7, 7.349e6])
        res = routh_table(p)
        assert res.verdict == stability_verdict_from_roots(p)
        assert res.verdict == "unstable"

    def test_marginal_pure_imaginary(self):
        # s^2 + 4: roots on the axis
        res = routh_table([1.0, 0.0, 4.0])
        assert res.verdict == "marginal"
        assert stability_verdict_from_roots([1.0, 0.0, 4.0]) == "marginal"

    def test_full_zero_row_auxiliary(self):
        # (s^2+1)(s+1) = s^3 + s^2 + s + 1 -> zero row at s^1
        res = routh_table([1.0, 1.0, 1.0, 1.0])
        assert res.verdict == "marginal"

    def test_oracle_agreement_random(self):
        rng = np.random.RandomState(7)
        checked = 0
        while checked < 100:
            deg = rng.randint(2, 7)
            c = rng.uniform(-10, 10, deg + 1)
            if abs(c[0]) < 1e-3:
                continue
            p = Polynomial(c)
            roots = poly_roots(p)
            if np.any(np.abs(roots.real) < 1e-3):
                continue
            assert routh_table(p).verdict == stability_verdict_from_roots(p)
            checked += 1


class TestFrequencyResponse:
    def test_integrator_point(self):
        fr = frequency_response(TransferFunction([1.0], [1.0, 0.0]),
                                np.array([1.0, 2.0]))
        assert fr.magnitude_db[0] == pytest.approx(0.0, abs=1e-12)
        assert fr.phase_deg[0] == pytest.approx(-90.0)

    def test_corner_frequency(self):
        fr = frequency_response(TransferFunction([1.0], [1.0, 1.0]),
                                np.array([1.0, 2.0]))
        assert fr.magnitude_db[0] == pytest.approx(-3.0103, abs=1e-3)
        assert fr.phase_deg[0] == pytest.approx(-45.0)

    def test_grid_validation(self):
        tf = TransferFunction([1.0], [1.0, 1.0])
        with pytest.raises(ValueError):
            frequency_response(tf, np.array([2.0, 1.0]))
        with pytest.raises(ValueError):
            frequency_response(tf, np.array([-1.0, 1.0]))

    def test_phase_unwrapped(self):
        tf = TransferFunction([1.0], [1.0, 2.0, 2.0, 1.0])
        fr = frequency_response(tf, np.geomspace(0.01, 100, 500))
        assert fr.phase_deg[-1] == pytest.approx(-270.0, abs=2.0)


class TestMargins:
    def test_analytic_double_pole_crossover(self):
        # |G(jw)| = 1 for 1/(s(s+1)) at w^2(w^2+1) = 1
        g = TransferFunction([1.0], [1.0, 1.0, 0.0])
        fr = frequency_response(g, np.geomspace(1e-2, 1e2, 4000))
        m = stability_margins(fr)
        w = math.sqrt((math.sqrt(5) - 1) / 2)
        pm = 180 - 90 - math.degrees(math.atan(w))
        assert m.pm_freq_rad_s == pytest.approx(w, rel=1e-3)
        assert m.phase_margin_deg == pytest.approx(pm, rel=1e-3)
        assert m.gain_margin_db is None   # phase never reaches -180

    def test_no_crossing_absent(self):
        g = TransferFunction([1.0], [1.0, 1.0])
        m = stability_margins(frequency_response(g))
        assert m.gain_margin_db is None
        assert m.phase_margin_deg is None

    def test_stable_loop_positive_pm(self):
        for k in (0.5, 2.0, 10.0):
            g = k * TransferFunction([1.0], [1.0, 2.0, 1.0, 0.0])
            cl = tf_feedback_gain(g, 1.0)
            if np.all(poly_roots(cl.den).real < 0):
                m = stability_margins(frequency_response(
                    g, np.geomspace(1e-3, 1e3, 4000)))
                if m.phase_margin_deg is not None:
                    assert m.phase_margin_deg > 0


class TestRootLocus:
    def test_starts_at_open_loop_pole(self):
        g = TransferFunction([1.0], [1.0, 1.0])
        locus = root_locus(g, [1e-9])
        assert locus[0, 0] == pytest.approx(-1.0, abs=1e-6)

    def test_double_pole_at_unity_gain(self):
        g = TransferFunction([1.0], [1.0, 2.0, 0.0])
        locus = root_locus(g, [1.0])
        assert np.allclose(sorted(locus[0].real), [-1.0, -1.0], atol=1e-6)
        assert np.allclose(locus[0].imag, 0.0, atol=1e-9)

    def test_pump_locus_negative_real_axis(self):
        g = TransferFunction([5.0], [475.0, 1.0])
        gains = np.geomspace(0.01, 100, 30)
        locus = root_locus(g, gains)
        expected = -(1 + 5 * gains) / 475.0
        assert np.allclose(locus[:, 0].real, expected, rtol=1e-9)
        assert np.all(locus.imag == 0)
        assert np.all(locus.real < 0)

    def test_empty_gains_rejected(self):
        with pytest.raises(ValueError):
            root_locus(TransferFunction([1.0], [1.0, 1.0]), [])


class TestErrorConstants:
    def test_pump_final_value_theorem(self):
        ec = error_constants(TransferFunction([5.0], [475.0, 1.0]))
        assert ec.Kp_pos == pytest.approx(5.0)
        assert ec.Kv_vel == 0.0
        assert ec.Ka_acc == 0.0
        assert ec.e_step == pytest.approx(1.0 / 6.0)
        assert ec.system_type == 0

    def test_type_one(self):
        ec = error_constants(TransferFunction([1.0], [1.0, 0.0]))
        assert math.isinf(ec.Kp_pos)
        assert ec.e_step == 0.0
        assert ec.Kv_vel == pytest.approx(1.0)
        assert ec.system_type == 1

    def test_ss_error_monotone_decreasing(self):
        g = TransferFunction([0.05], [0.1, 1.1, 1.0])
        gains, errors, _ = ss_error_vs_gain(g, np.geomspace(0.1, 1e4, 50))
        assert np.all(np.diff(errors) < 0)

    def test_gain_for_targets_cascade(self):
        # e = 1/(1 + 0.05 K): 0.1 -> K = 180, 0.01 -> K = 1980
        g = TransferFunction([0.05], [0.1, 1.1, 1.0])
        _, _, targets = ss_error_vs_gain(g, np.geomspace(0.1, 1e5, 200))
        assert targets[0.1] == pytest.approx(180.0, rel=1e-6)
        assert targets[0.01] == pytest.approx(1980.0, rel=1e-6)

    def test_type_one_targets_trivially_met(self):
        g = TransferFunction([1.0], [1.0, 0.0])
        gains, errors, targets = ss_error_vs_gain(g, np.array([1.0, 10.0]))
        assert np.all(errors == 0.0)
        assert targets[0.1] == 1.0 and targets[0.01] == 1.0


class TestSerialization:
    def test_round_trip(self):
        tf = TransferFunction([0.0001563], [1.2e-8, 7.51e-6, 0.0001625, 0.0])
        again = tf_from_text(tf_to_text(tf))
        assert again.num.coeffs == tf.num.coeffs
        assert again.den.coeffs == tf.den.coeffs

    def test_format(self):
        text = tf_to_text(TransferFunction([2.0], [1.0, 3.0]))
        assert text == "num: 2 / den: 1 3"

    def test_malformed_rejected(self):
        with pytest.raises(ValueError):
            tf_from_text("den: 1 2 / num: 1")


class TestPoleOnGrid:
    def test_pole_exactly_on_grid_point_is_nudged(self):
        # pure oscillator: den(j*1) == 0 exactly at omega = 1
        tf = TransferFunction([1.0], [1.0, 0.0, 1.0])
        fr = frequency_response(tf, np.array([0.5, 1.0, 2.0]))
        assert np.all(np.isfinite(fr.magnitude_db))
        assert fr.magnitude_db[1] > 100.0   # huge but finite
