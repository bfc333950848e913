import numpy as np
import pytest

from regularframe.errors import ConfigError, EvaluationError
from regularframe.metrics import (
    FRW,
    MINKOWSKI,
    ConstantMetric,
    DiagPoly,
    Minkowski,
    SpacetimePoint,
    WeakField,
    evaluate_metric,
    metric_from_spec,
)


def test_minkowski_is_constant():
    assert np.array_equal(evaluate_metric(Minkowski(), SpacetimePoint(3.0, (1.0, -2.0, 0.5))), MINKOWSKI)


def test_diag_poly_substitution():
    g = evaluate_metric(DiagPoly(g00=[-1.0, 0.0, -1.0]), SpacetimePoint(1.0))
    assert np.array_equal(g, np.diag([-2.0, 1.0, 1.0, 1.0]))


def test_diag_poly_two_variable_coefficients():
    # g11 = 1 + t * x1
    g = DiagPoly(g11=[[1.0, 0.0], [0.0, 1.0]]).evaluate(SpacetimePoint(2.0, (3.0, 0.0, 0.0)))
    assert g[1, 1] == pytest.approx(7.0)


def test_frw_with_scale_two():
    g = evaluate_metric(FRW(eps=1.0, shape="const"), SpacetimePoint(0.3))
    assert np.allclose(g, np.diag([-1.0, 4.0, 4.0, 4.0]), atol=1e-15)


@pytest.mark.parametrize("field", [
    DiagPoly(g00=[-1.0, 0.0, -0.5], g11=[[1.0, 0.2], [0.1, 0.0]]),
    FRW(eps=0.1, shape="tanh", t0=0.5, width=0.7),
    FRW(eps=0.1, shape="bump", t0=0.5, width=0.7),
    FRW(eps=0.1, shape="sin", t0=0.5, width=0.7),
    WeakField(amplitude=0.05, width=0.8, center=(0.1, -0.2, 0.3)),
])
def test_analytic_derivatives_match_finite_differences(field, rng):
    t = rng.uniform(-1, 1, 7)
    x = rng.uniform(-1, 1, (7, 3))
    exact = field.derivatives_batch(t, x, mode="analytic")
    fd = field.derivatives_batch(t, x, mode="fd", h=1e-5)
    assert np.max(np.abs(exact - fd)) < 1e-8


def test_evaluate_batch_is_symmetric(rng):
    g = WeakField(0.1).evaluate_batch(rng.uniform(size=20), rng.uniform(size=(20, 3)))
    assert np.array_equal(g, np.swapaxes(g, -1, -2))


def test_non_finite_entries_raise():
    with pytest.raises(EvaluationError):
        ConstantMetric(np.diag([-1.0, np.inf, 1.0, 1.0])).evaluate(SpacetimePoint(0.0))


def test_domain_is_enforced():
    field = Minkowski(domain=[[0, 1], [-1, 1], [-1, 1], [-1, 1]])
    with pytest.raises(EvaluationError):
        evaluate_metric(field, SpacetimePoint(2.0))


def test_spec_round_trip():
    f = FRW(eps=0.05, t0=1.0, width=0.5)
    g = metric_from_spec(f.to_spec())
    p = SpacetimePoint(1.2, (0.1, 0.2, 0.3))
    assert np.array_equal(f.evaluate(p), g.evaluate(p))


def test_unknown_family_raises():
    with pytest.raises(ConfigError, match="unknown metric family"):
        metric_from_spec({"family": "schwarzschild"})
