import math

import numpy as np
import pytest

from swarmbasis.basis import BasisConfig, ConcentrationMap, Partition, program
from swarmbasis.dynamics import (
    ConstantInput,
    RampInput,
    SampledInput,
    StepInput,
    SwarmProgram,
    analytic_v,
    drive,
    envelope_excess,
    mae,
    simulate,
    step,
    transient_error,
)
from swarmbasis.errors import EmptyTrace, OutOfDomain, ScheduleGap
from swarmbasis.targets import make_target

SQUARE = make_target({"name": "polynomial", "coeffs": [0, 0, 1]})
SIN3 = make_target({"name": "sin", "a": 3})


def const(c):
    return make_target({"name": "constant", "value": c})


class TestDrive:
    def test_examples(self, unit10):
        assert drive(program(SQUARE, unit10), unit10, [0.25]) == 0.0625
        assert drive(ConcentrationMap(unit10.partition), unit10, [0.4]) == 0.0
        assert drive(program(lambda u: -u[0], unit10), unit10, [0.25]) == -0.25

    def test_equals_rate_times_midpoint_value(self):
        cfg = BasisConfig(Partition.uniform([(0, 1)], [10]), alpha=0.3, clearance=2.0)
        assert drive(program(SIN3, cfg), cfg, [0.41]) == pytest.approx(2.0 * math.sin(1.35), abs=1e-12)


class TestClosedForms:
    def test_five_time_constants(self):
        for R in (0.5, 1.0, 4.0):
            frac = analytic_v(0.0, 1.0, R, 5.0 / R)
            assert 0.99326 < frac < 0.99327

    def test_initial_and_fixed_point(self):
        assert analytic_v(0.3, 2.0, 1.0, 0.0) == 0.3
        for el in (0.0, 1.0, 50.0):
            assert analytic_v(0.7, 0.7, 2.0, el) == pytest.approx(0.7, abs=1e-15)

    def test_transient_error(self):
        assert transient_error(1.0, 1.0, 1.0, 3.0) == 0.0
        assert transient_error(0.0, 1.0, 1.0, 5.0) == pytest.approx(0.006738, abs=1e-6)
        assert abs(transient_error(0.0, 1.0, 1.0, 60.0)) < 1e-25

    def test_error_bounded_by_initial_gap(self):
        for el in np.linspace(0, 10, 21):
            assert abs(transient_error(-0.4, 0.9, 0.7, el)) <= 1.3


class TestStep:
    def test_single_step(self, unit10):
        v = step(0.0, program(const(1.0), unit10), unit10, [0.5], 0.01)
        assert v == pytest.approx(1 - math.exp(-0.01), abs=1e-15)

    def test_converges_to_drive(self, unit10):
        m = program(const(0.8), unit10)
        v = 0.0
        for _ in range(4000):
            v = step(v, m, unit10, [0.5], 0.01)
        assert v == pytest.approx(0.8, abs=1e-12)

    def test_semigroup(self, unit10):
        m = program(SIN3, unit10)
        two = step(step(0.1, m, unit10, [0.6], 0.2), m, unit10, [0.6], 0.2)
        assert two == pytest.approx(step(0.1, m, unit10, [0.6], 0.4), abs=1e-15)

    def test_rejects_nonpositive_dt(self, unit10):
        with pytest.raises(ValueError):
            step(0.0, program(SIN3, unit10), unit10, [0.5], 0.0)


class TestSignals:
    def test_step_is_right_continuous(self):
        s = StepInput([[0.2], [0.8]], [300])
        assert s.values_at([299.99, 300.0, 301]).ravel().tolist() == [0.2, 0.8, 0.8]

    def test_ramp_holds_outside(self):
        r = RampInput([0.0], [1.0], 10, 20)
        assert r.values_at([0, 15, 25]).ravel().tolist() == [0.0, 0.5, 1.0]

    def test_ramp_crossings_land_in_new_cell(self, unit10):
        r = RampInput([0.0], [1.0], 0, 600)
        ev = sorted(r.events(unit10.partition, 0, 600))
        crossings = [t for t in ev if 0 < t < 600]
        assert len(crossings) == 9
        for k, t in enumerate(crossings, start=1):
            assert t == pytest.approx(60 * k)
            assert r.values_at([t])[0, 0] >= k / 10

    def test_sawtooth(self):
        r = RampInput([0.0], [1.0], 0, 200, period=200)
        assert r.values_at([100, 200, 300]).ravel().tolist() == [0.5, 0.0, 0.5]

    def test_sampled_hold(self):
        s = SampledInput([0, 1, 2], [[0.1], [0.5], [0.9]])
        assert s.values_at([-1, 0.5, 1.0, 5]).ravel().tolist() == [0.1, 0.1, 0.5, 0.9]


def one_segment(cfg, f):
    return SwarmProgram(cfg, ((0.0, program(f, cfg)),))


class TestSimulate:
    def test_constant_input_matches_closed_form(self, unit10):
        tr = simulate(one_segment(unit10, SIN3), ConstantInput([0.37]), 0, 10, 0.05, v0=0.2)
        target = math.sin(3 * 0.35)
        expected = [0.2 * math.exp(-t) + target * (1 - math.exp(-t)) for t in tr.t]
        assert np.max(np.abs(tr.v - expected)) <= 1e-12
        assert np.all(tr.v_desired == target)
        assert np.array_equal(tr.e, tr.v_desired - tr.v)
        assert np.all(np.diff(tr.t) > 0)

    def test_switch_follows_reprogramming_form(self, unit10):
        prog = SwarmProgram(unit10, ((0.0, program(SQUARE, unit10)), (7.0, program(SIN3, unit10))))
        tr = simulate(prog, ConstantInput([0.25]), 0, 30, 0.1)
        f1, f2 = 0.0625, math.sin(0.75)
        v2 = f1 * (1 - math.exp(-7.0))
        for t, v in zip(tr.t, tr.v):
            want = f1 * (1 - math.exp(-t)) if t <= 7 else v2 * math.exp(-(t - 7)) + f2 * (1 - math.exp(-(t - 7)))
            assert v == pytest.approx(want, abs=1e-12)
        assert tr.v[-1] == pytest.approx(f2, abs=1e-8)

    def test_switch_applies_at_its_row(self, unit10):
        prog = SwarmProgram(unit10, ((0.0, program(SQUARE, unit10)), (1.005, program(SIN3, unit10))))
        tr = simulate(prog, ConstantInput([0.25]), 0, 2, 0.01)
        j = int(np.nonzero(tr.t == 1.005)[0][0])
        assert tr.v_desired[j - 1] == 0.0625 and tr.v_desired[j] == math.sin(0.75)

    def test_splitting_identical_segment_is_noop(self, unit10):
        m = program(SIN3, unit10)
        sig = StepInput([[0.1], [0.9]], [3.0])
        a = simulate(SwarmProgram(unit10, ((0.0, m),)), sig, 0, 8, 0.01)
        b = simulate(SwarmProgram(unit10, ((0.0, m), (5.0, m))), sig, 0, 8, 0.01)
        assert np.array_equal(a.t, b.t) and np.array_equal(a.v, b.v) and np.array_equal(a.e, b.e)

    def test_error_decays_between_events(self, unit10):
        prog = SwarmProgram(unit10, ((0.0, program(SQUARE, unit10)), (20.0, program(SIN3, unit10))))
        tr = simulate(prog, RampInput([0.0], [1.0], 0, 40), 0, 40, 0.01)
        assert envelope_excess(tr) <= 1e-12

    def test_negative_v_allowed_and_flagged(self, unit10):
        tr = simulate(one_segment(unit10, const(-1.0)), ConstantInput([0.5]), 0, 3, 0.1)
        assert tr.v[-1] < 0 and tr.meta["negative_v"]

    def test_dt_not_dividing_span(self, unit10):
        tr = simulate(one_segment(unit10, SIN3), ConstantInput([0.5]), 0, 1.0, 0.3)
        assert tr.t.tolist() == pytest.approx([0, 0.3, 0.6, 0.9, 1.0])

    def test_schedule_gap(self, unit10):
        prog = SwarmProgram(unit10, ((1.0, program(SIN3, unit10)),))
        with pytest.raises(ScheduleGap):
            simulate(prog, ConstantInput([0.5]), 0, 5, 0.1)

    def test_input_leaving_domain(self, unit10):
        with pytest.raises(OutOfDomain):
            simulate(one_segment(unit10, SIN3), RampInput([0.5], [1.5], 0, 5), 0, 5, 0.1)

    def test_program_validation(self, unit10):
        m = program(SIN3, unit10)
        with pytest.raises(ValueError):
            SwarmProgram(unit10, ((0.0, m), (0.0, m)))
        other = BasisConfig(Partition.uniform([(0, 1)], [5]))
        with pytest.raises(ValueError):
            SwarmProgram(unit10, ((0.0, program(SIN3, other)),))


class TestMae:
    def test_zero_error(self, unit10):
        tr = simulate(one_segment(unit10, SIN3), ConstantInput([0.5]), 0, 1, 0.1, v0=math.sin(1.65))
        assert mae(tr) == pytest.approx(0.0, abs=1e-15)

    def test_exponential_error_average(self, unit10):
        tr = simulate(one_segment(unit10, const(1.0)), ConstantInput([0.5]), 0, 600, 0.01)
        # e(t) = exp(-t); mean over uniform samples ~ (1/600) * integral
        assert mae(tr) == pytest.approx(1 / 600, rel=0.01)

    def test_empty(self, unit10):
        tr = simulate(one_segment(unit10, SIN3), ConstantInput([0.5]), 0, 1, 0.1)
        empty = type(tr)(tr.t[:0], tr.u[:0], tr.v[:0], tr.v_desired[:0], tr.e[:0], tr.meta)
        with pytest.raises(EmptyTrace):
            mae(empty)
