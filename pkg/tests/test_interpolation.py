import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from regularframe.errors import ConfigError, DegenerateFrameError
from regularframe.interpolation import (
    InterpolatedMetric,
    TransitionFunction,
    deform_frame,
    interpolated_metric_at,
    t_line,
    transition,
    verify_interpolation,
)
from regularframe.metrics import FRW, MINKOWSKI, ConstantMetric, DiagPoly, Minkowski, SpacetimePoint, WeakField

DIAG = ConstantMetric(np.diag([-4.0, 9.0, 1.0, 1.0]))


def test_transition_endpoints_and_midpoint():
    tf = TransitionFunction(0.3, 1.7)
    assert transition(0.3, tf) == 0.0
    assert transition(1.7, tf) == 1.0
    assert transition(1.0, tf) == pytest.approx(0.5, abs=1e-15)
    assert transition(-5.0, tf) == 0.0 and transition(5.0, tf) == 1.0


def test_transition_rejects_empty_window():
    with pytest.raises(ConfigError):
        TransitionFunction(1.0, 1.0)


@pytest.mark.parametrize("order", [1, 2, 3, 4])
def test_one_sided_derivatives_vanish_at_window_ends(order):
    # window of length 2: on a unit window the 4th difference at t1 is ~1e-3 at this h
    tf = TransitionFunction(0.0, 2.0)
    h = 1e-2
    k = np.arange(order + 1)
    binom = np.array([math.comb(order, j) for j in k])
    signs = (-1.0) ** (order - k)
    right = np.sum(signs * binom * transition(tf.t1 + k * h, tf)) / h**order
    left = np.sum(signs * binom * transition(tf.t2 - (order - k) * h, tf)) / h**order
    assert abs(right) < 1e-6
    assert abs(left) < 1e-6


@settings(max_examples=100, deadline=None)
@given(st.floats(-10, 10), st.floats(0.1, 5))
def test_transition_is_monotone_and_bounded(t, w):
    tf = TransitionFunction(0.0, w)
    f0, f1 = transition(t, tf), transition(t + 1e-3, tf)
    assert 0.0 <= f0 <= f1 <= 1.0


def test_transition_symmetry():
    tf = TransitionFunction(-1.0, 1.0)
    t = np.linspace(-1, 1, 41)
    assert np.max(np.abs(transition(t, tf) + transition(-t, tf) - 1.0)) < 1e-15


def test_deform_frame_cases():
    assert np.array_equal(deform_frame([-0.25, 0, 0, 0], 1.0), [-0.25, 0, 0, 0])
    assert np.array_equal(deform_frame([-3.0, 0.4, 0.1, 2.0], 0.0), [-1, 0, 0, 0])
    assert np.allclose(deform_frame([-4.0, 2.0, 0, 0], 0.5), [-2.0, 1.0, 0, 0])
    with pytest.raises(DegenerateFrameError):
        deform_frame([0.0, 1.0, 0, 0], 0.5)


def test_worked_midpoint_value():
    tf = TransitionFunction(0.0, 2.0)
    g = interpolated_metric_at(DIAG, tf, SpacetimePoint(1.0))
    assert np.max(np.abs(g - np.diag([-2.0, 3.0, 1.0, 1.0]))) < 1e-12


@pytest.mark.parametrize("base", [Minkowski(), DIAG, FRW(eps=0.1, t0=1.0, width=0.5),
                                  WeakField(0.05), DiagPoly(g00=[-1.0, -0.1], g11=[1.0, 0.05])])
def test_endpoints(base, rng):
    tf = TransitionFunction(0.0, 2.0)
    gi = InterpolatedMetric(base, tf)
    x = rng.uniform(-1, 1, (200, 3))
    early = gi.evaluate_batch(rng.uniform(-3, 0, 200), x)
    assert np.all(early == MINKOWSKI)
    t = rng.uniform(2, 4, 200)
    assert np.max(np.abs(gi.evaluate_batch(t, x) - base.evaluate_batch(t, x))) < 1e-12


def test_minkowski_is_a_fixed_point(rng):
    gi = InterpolatedMetric(Minkowski(), TransitionFunction(0.0, 1.0))
    g = gi.evaluate_batch(rng.uniform(-1, 2, 100), rng.uniform(-1, 1, (100, 3)))
    assert np.max(np.abs(g - MINKOWSKI)) < 1e-15


def test_non_diagonal_base_blends_smoothly(rng):
    g0 = np.diag([-2.0, 1.5, 1.0, 0.8])
    g0[0, 1] = g0[1, 0] = 0.3
    g0[2, 3] = g0[3, 2] = 0.2
    tf = TransitionFunction(0.0, 1.0)
    rep = verify_interpolation(ConstantMetric(g0), tf, np.vstack([t_line(tf), np.column_stack(
        [rng.uniform(-1, 2, 500), rng.uniform(-1, 1, (500, 3))])]))
    assert rep.passed, [c for c in rep.checks if not c.passed]


@pytest.mark.parametrize("base", [Minkowski(), DIAG, FRW(eps=0.1, t0=1.0, width=0.5)])
def test_verify_interpolation_passes(base, rng):
    tf = TransitionFunction(0.0, 2.0)
    pts = np.column_stack([rng.uniform(-2, 4, 2000), rng.uniform(-1, 1, (2000, 3))])
    rep = verify_interpolation(base, tf, np.vstack([pts, t_line(tf)]))
    assert rep.passed, [c for c in rep.checks if not c.passed]
