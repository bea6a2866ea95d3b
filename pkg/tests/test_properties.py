"""Invariants checked over generated inputs."""

import math

import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from swarmbasis.basis import (
    BaType,
    BasisConfig,
    Partition,
    all_types,
    approximate,
    b_eval,
    cell_index,
    midpoint,
    program,
    sup_error,
)
from swarmbasis.design import DesignProblem, enumerate_min_types, near_minimal_types
from swarmbasis.dynamics import ConstantInput, StepInput, SwarmProgram, analytic_v, envelope_excess, simulate
from swarmbasis.targets import make_target

finite = st.floats(-5, 5, allow_nan=False)
positive = st.floats(0.05, 20, allow_nan=False)


@st.composite
def partitions(draw, max_dims=2):
    dims = draw(st.integers(1, max_dims))
    bps = []
    for _ in range(dims):
        start = draw(st.floats(-3, 3))
        widths = draw(st.lists(st.floats(0.01, 2), min_size=1, max_size=8))
        bps.append(tuple(np.concatenate([[start], start + np.cumsum(widths)])))
    return Partition(tuple(bps))


@st.composite
def point_in(draw, part):
    return [draw(st.floats(a, b)) for a, b in part.bounds]


def wavy(u):
    return math.sin(2 * u[0]) + (u[1] ** 2 if len(u) > 1 else 0.0) - 0.3


@settings(max_examples=150, deadline=None)
@given(st.data())
def test_unique_cell_and_active_type(data):
    part = data.draw(partitions())
    u = data.draw(point_in(part))
    cell = cell_index(part, u)
    for i, (k, bps) in enumerate(zip(cell, part.breakpoints)):
        assert bps[k - 1] <= u[i] <= bps[k]
    cfg = BasisConfig(part)
    active = [ba for ba in all_types(part) if b_eval(ba, cfg, u) != 0]
    assert sorted(active) == [BaType(-1, cell), BaType(1, cell)]


@settings(max_examples=150, deadline=None)
@given(st.data(), positive, positive)
def test_midpoint_exactness(data, alpha, rate):
    part = data.draw(partitions())
    cfg = BasisConfig(part, alpha, rate)
    u = data.draw(point_in(part))
    m = program(wavy, cfg)
    want = wavy(midpoint(part, cell_index(part, u)))
    assert abs(approximate(m, cfg, u) - want) <= 1e-12 * max(1.0, abs(want))


@settings(max_examples=100, deadline=None)
@given(st.data(), positive, positive, st.floats(0.1, 10))
def test_scaling_consistency(data, alpha, rate, c):
    part = data.draw(partitions())
    a = program(wavy, BasisConfig(part, alpha, rate))
    b = program(wavy, BasisConfig(part, c * alpha, c * rate))
    assert a.entries.keys() == b.entries.keys()
    for ba in a.entries:
        assert math.isclose(a.entries[ba], b.entries[ba], rel_tol=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.data())
def test_at_most_one_sign_per_cell(data):
    part = data.draw(partitions())
    m = program(wavy, BasisConfig(part))
    for ba in m.entries:
        assert m.get(BaType(-ba.sign, ba.cell)) == 0.0


@settings(max_examples=40, deadline=None)
@given(st.floats(0.2, 6), st.integers(1, 60))
def test_sup_error_within_gradient_bound(a, q):
    # |d/du sin(a u)| <= a on any interval
    f = make_target({"name": "sin", "a": a})
    cfg = BasisConfig(Partition.uniform([(0, 1)], [q]))
    assert sup_error(f, program(f, cfg), cfg, 501) <= a / q + 1e-12


@settings(max_examples=60, deadline=None)
@given(finite, finite, positive, st.floats(0.001, 3), st.integers(1, 6))
def test_step_composition(v0, target, rate, dt, n):
    v = v0
    for _ in range(n):
        v = analytic_v(v, target, rate, dt)
    assert math.isclose(v, analytic_v(v0, target, rate, n * dt), rel_tol=1e-12, abs_tol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1), positive, st.sampled_from([0.003, 0.01, 0.07, 0.25]))
def test_simulation_is_exact_flow(u, v0, rate, dt):
    cfg = BasisConfig(Partition.uniform([(0, 1)], [10]), 1.0, rate)
    f = make_target({"name": "exp", "a": -2})
    tr = simulate(SwarmProgram(cfg, ((0.0, program(f, cfg)),)), ConstantInput([u]), 0, 3, dt, v0)
    target = f(midpoint(cfg.partition, cell_index(cfg.partition, [u])))
    expected = np.array([analytic_v(v0, target, rate, t) for t in tr.t])
    assert np.max(np.abs(tr.v - expected)) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1), st.floats(0.5, 4.5), positive)
def test_error_envelope(u1, u2, t_switch, rate):
    cfg = BasisConfig(Partition.uniform([(0, 1)], [10]), 1.0, rate)
    f = make_target({"name": "sin", "a": 3})
    g = make_target({"name": "polynomial", "coeffs": [0, 0, 1]})
    prog = SwarmProgram(cfg, ((0.0, program(f, cfg)), (2.5, program(g, cfg))))
    tr = simulate(prog, StepInput([[u1], [u2]], [t_switch]), 0, 5, 0.01)
    assert envelope_excess(tr) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.floats(0, 4), min_size=1, max_size=2),
    st.floats(0.05, 3),
    st.lists(st.floats(0.2, 3), min_size=2, max_size=2),
)
def test_solver_matches_enumeration(L, eps, widths):
    n = len(L)
    p = DesignProblem([(0.0, w) for w in widths[:n]], eps, L, [20] * n)
    assume(p.feasible(p.q_max))
    sol = near_minimal_types(p)
    ref = enumerate_min_types(p)
    assert sol.n_types == ref.n_types and sol.q == ref.q
    assert sol.bound_value <= eps
