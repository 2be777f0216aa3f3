import math

import pytest
from hypothesis import given, settings, strategies as st

from resopt.attack import (AttackBudget, AttackSchedule, attack_active,
                           attack_metrics, check_duration_condition,
                           check_frequency_condition)
from resopt.errors import ValidationError


@st.composite
def schedules(draw, horizon=100.0, max_attacks=6):
    n = draw(st.integers(0, max_attacks))
    t = 0.0
    intervals = []
    for _ in range(n):
        gap = draw(st.floats(0.01, 10.0, allow_nan=False))
        tau = draw(st.floats(0.0, 8.0, allow_nan=False))
        start = t + gap
        if start + tau >= horizon:
            break
        intervals.append((start, tau))
        t = start + tau
    return AttackSchedule(intervals=tuple(intervals), horizon=horizon)


class TestScheduleInvariants:
    def test_overlap_rejected(self):
        with pytest.raises(ValidationError):
            AttackSchedule(intervals=((0.0, 2.0), (1.5, 1.0)), horizon=10.0)

    def test_touching_rejected(self):
        # a_{m+1} must be strictly after the previous attack ends
        with pytest.raises(ValidationError):
            AttackSchedule(intervals=((0.0, 2.0), (2.0, 1.0)), horizon=10.0)

    def test_negative_duration_rejected(self):
        with pytest.raises(ValidationError):
            AttackSchedule(intervals=((1.0, -0.5),), horizon=10.0)

    def test_periodic_expansion(self):
        sched = AttackSchedule.periodic(period=10.0, active=2.0, phase=3.0,
                                        horizon=25.0)
        assert sched.intervals == ((3.0, 2.0), (13.0, 2.0), (23.0, 2.0))


class TestAttackActive:
    def test_empty_schedule(self):
        sched = AttackSchedule.empty(10.0)
        assert not attack_active(sched, 5.0)

    def test_half_open_interval(self):
        sched = AttackSchedule(intervals=((2.0, 1.0),), horizon=10.0)
        assert attack_active(sched, 2.5)
        assert attack_active(sched, 2.0)
        assert not attack_active(sched, 3.0)

    def test_out_of_range(self):
        sched = AttackSchedule.empty(10.0)
        with pytest.raises(ValidationError):
            attack_active(sched, 11.0)
        with pytest.raises(ValidationError):
            attack_active(sched, -0.1)

    def test_bundled_case2_pattern(self):
        from resopt.cli import preset_scenario
        scen = preset_scenario("case2").scenario
        sched = scen.attack_schedule
        for a, tau in sched.intervals:
            assert attack_active(sched, a)
            assert attack_active(sched, a + 0.5 * tau)
            assert not attack_active(sched, a + tau)
            assert not attack_active(sched, a - 0.25)


class TestAttackMetrics:
    def test_empty(self):
        m = attack_metrics(AttackSchedule.empty(10.0), 0.0, 10.0)
        assert (m.count, m.total_duration, m.frequency) == (0, 0.0, 0.0)

    def test_single_interval(self):
        sched = AttackSchedule(intervals=((2.0, 1.0),), horizon=10.0)
        m = attack_metrics(sched, 0.0, 10.0)
        assert m.count == 1
        assert m.total_duration == pytest.approx(1.0)
        assert m.frequency == pytest.approx(0.1)

    def test_bad_window(self):
        with pytest.raises(ValidationError):
            attack_metrics(AttackSchedule.empty(10.0), 5.0, 5.0)

    def test_bundled_case2_frequency_bound(self):
        from resopt.cli import preset_scenario
        scen = preset_scenario("case2").scenario
        m = attack_metrics(scen.attack_schedule, 0.0, 100.0)
        assert m.frequency <= 0.01

    @given(schedules(), st.floats(0.0, 50.0), st.floats(0.1, 25.0),
           st.floats(0.1, 24.0))
    @settings(max_examples=100, deadline=None)
    def test_additive_over_adjacent_windows(self, sched, t1, d1, d2):
        t2, t3 = t1 + d1, t1 + d1 + d2
        left = attack_metrics(sched, t1, t2)
        right = attack_metrics(sched, t2, t3)
        both = attack_metrics(sched, t1, t3)
        assert left.count + right.count == both.count
        assert left.total_duration + right.total_duration == \
            pytest.approx(both.total_duration, abs=1e-12)

    @given(schedules(), st.floats(0.0, 50.0), st.floats(0.1, 49.0))
    @settings(max_examples=100, deadline=None)
    def test_duration_bounded_by_window(self, sched, t1, d):
        m = attack_metrics(sched, t1, t1 + d)
        assert m.total_duration <= d + 1e-12


def budget(**kw):
    base = dict(lambda_a=0.6, lambda_b=0.5, mu=math.e, eta_star=0.05,
                n0=1.0, t0=0.0, kappa_star=0.0)
    base.update(kw)
    return AttackBudget(**base)


class TestFrequencyCondition:
    def test_empty_schedule_passes(self):
        rep = check_frequency_condition(AttackSchedule.empty(100.0), budget(),
                                        (0.0, 100.0))
        assert rep.passed and rep.tightest == math.inf

    def test_mu_one_always_passes(self):
        sched = AttackSchedule(intervals=tuple((5.0 + 10.0 * k, 1.0)
                                               for k in range(9)), horizon=100.0)
        rep = check_frequency_condition(sched, budget(mu=1.0), (0.0, 100.0))
        assert rep.threshold == 0.0
        assert rep.passed

    def test_ten_uniform_attacks_fail(self):
        # 10 attacks spread over 100 s; with N0=1 the densest window admits
        # T_f of roughly 100/9, below the threshold ln(e)/0.05 = 20
        sched = AttackSchedule(intervals=tuple((5.0 + 10.0 * k, 1.0)
                                               for k in range(10)), horizon=100.0)
        rep = check_frequency_condition(sched, budget(mu=math.e, eta_star=0.05),
                                        (0.0, 100.0))
        assert rep.threshold == pytest.approx(20.0)
        assert 9.0 < rep.tightest < 12.0
        assert not rep.passed

    def test_event_variant_raises_threshold(self):
        sched = AttackSchedule.empty(100.0)
        b = budget(kappa_star=0.5)
        plain = check_frequency_condition(sched, b, (0.0, 100.0))
        event = check_frequency_condition(sched, b, (0.0, 100.0),
                                          event_variant=True)
        assert event.threshold > plain.threshold


class TestDurationCondition:
    def test_empty_schedule_passes(self):
        rep = check_duration_condition(AttackSchedule.empty(50.0), budget(),
                                       (0.0, 50.0))
        assert rep.passed

    def test_always_on_fails(self):
        sched = AttackSchedule(intervals=((0.0, 50.0),), horizon=50.0)
        rep = check_duration_condition(sched, budget(t0=0.0), (0.0, 50.0))
        assert rep.tightest == pytest.approx(1.0)
        assert rep.threshold > 1.0  # lambda_b > 0 forces T*_a above one
        assert not rep.passed

    def test_case2_budget_threshold_is_two(self):
        from resopt.cli import preset_scenario
        loaded = preset_scenario("case2")
        rep = check_duration_condition(loaded.scenario.attack_schedule,
                                       loaded.budget, (0.0, 210.0))
        assert rep.threshold == pytest.approx(2.0)
        assert rep.passed

    @given(schedules(), st.floats(0.05, 2.0), st.floats(0.0, 3.0))
    @settings(max_examples=100, deadline=None)
    def test_event_variant_never_more_permissive(self, sched, kappa, t0):
        b = budget(kappa_star=kappa, t0=t0)
        plain = check_duration_condition(sched, b, (0.0, 100.0))
        event = check_duration_condition(sched, b, (0.0, 100.0),
                                         event_variant=True)
        assert event.tightest <= plain.tightest + 1e-9
        if event.passed:
            assert plain.passed


class TestBudgetValidation:
    def test_eta_star_below_lambda_a(self):
        with pytest.raises(ValidationError):
            AttackBudget(lambda_a=0.1, lambda_b=0.5, mu=2.0, eta_star=0.2)

    def test_mu_at_least_one(self):
        with pytest.raises(ValidationError):
            AttackBudget(lambda_a=0.6, lambda_b=0.5, mu=0.5, eta_star=0.05)
