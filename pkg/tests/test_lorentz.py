import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from regularframe.errors import NotGloballyHyperbolicHereError, SignatureError, SingularMetricError
from regularframe.lorentz import (
    block_decompose,
    check_regular,
    frame_matrix,
    normal_vector,
    spd_power,
)
from regularframe.metrics import ConstantMetric, DiagPoly, Minkowski, SpacetimePoint

from conftest import random_lorentzian


def test_normal_vector_diagonal_cases():
    assert np.array_equal(normal_vector(np.diag([-1.0, 1, 1, 1])), [-1, 0, 0, 0])
    g = np.diag([-4.0, 9, 1, 1])
    n = normal_vector(g)
    assert np.allclose(n, [-0.25, 0, 0, 0])
    assert n @ g @ n == pytest.approx(-0.25)


def test_normal_vector_is_orthogonal_to_spatial_axes(rng):
    for _ in range(20):
        g = random_lorentzian(rng)
        n = normal_vector(g)
        assert np.max(np.abs((g @ n)[1:])) < 1e-12


def test_singular_metric_raises():
    with pytest.raises(SingularMetricError):
        normal_vector(np.diag([0.0, 1, 1, 1]))


def test_block_decompose_diagonal():
    bf = block_decompose(np.diag([-4.0, 9, 1, 1]))
    assert bf.lapse2 == pytest.approx(-0.25)
    assert np.array_equal(bf.spatial, np.diag([9.0, 1, 1]))
    bf = block_decompose(np.diag([-1.0, 1, 1, 1]))
    assert bf.lapse2 == -1.0 and np.array_equal(bf.spatial, np.eye(3))


def test_block_decompose_congruence_oracle(rng):
    for _ in range(20):
        g = random_lorentzian(rng)
        bf = block_decompose(g)
        M = frame_matrix(g)
        block = np.zeros((4, 4))
        block[0, 0] = bf.lapse2
        block[1:, 1:] = bf.spatial
        assert np.max(np.abs(M.T @ g @ M - block)) < 1e-12


def test_block_decompose_errors():
    with pytest.raises(NotGloballyHyperbolicHereError):
        block_decompose(np.diag([1.0, -1, 1, 1]))
    g = np.diag([-1.0, 1.0, 1.0, 1.0])
    g[1, 2] = g[2, 1] = 2.0
    with pytest.raises(SignatureError):
        block_decompose(g)


def test_spd_power_cases(rng):
    assert np.allclose(spd_power(np.diag([4.0, 1, 1]), 0.5), np.diag([2.0, 1, 1]), atol=1e-15)
    a = rng.standard_normal((3, 3))
    G = a @ a.T + 3 * np.eye(3)
    assert np.array_equal(spd_power(G, 0.0), np.eye(3))
    assert np.array_equal(spd_power(G, 1.0), G)
    R = spd_power(G, 0.5)
    assert np.linalg.norm(R @ R - G) < 1e-10


def test_spd_power_rejects_indefinite():
    with pytest.raises(SignatureError):
        spd_power(np.diag([1.0, -1.0, 1.0]), 0.5)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, (3, 3), elements=st.floats(-2, 2)), st.floats(0, 1), st.floats(0, 1))
def test_spd_power_semigroup(a, s, u):
    G = a @ a.T + np.eye(3)
    lhs = spd_power(G, s * 0.5) @ spd_power(G, u * 0.5)
    rhs = spd_power(G, 0.5 * (s + u))
    assert np.max(np.abs(lhs - rhs)) < 1e-10 * np.max(np.abs(G)) ** 2


def test_check_regular_cases():
    pts = [SpacetimePoint(t, (0.1, 0.2, 0.3)) for t in (-1.0, 0.0, 1.0)]
    assert check_regular(Minkowski(), pts).passed
    eu = check_regular(ConstantMetric(np.eye(4)), pts)
    assert not eu.passed and "signature" in eu.failures()
    rep = check_regular(DiagPoly(g00=[-1.0, 0.0, 1.0]), [SpacetimePoint(2.0)])
    assert not rep.passed and "lapse2 >= 0" in rep.failures()
    assert rep.summary()["min_lapse_margin"] < 0
