"""Smooth blending of a regular metric into Minkowski space before a cutoff time.

The metric ``g'`` is built in the deformed frame ``{m_p, E1, E2, E3}`` as
``diag(-(-g(n,n))**f, G**f)`` and re-expressed in coordinates by the
congruence with the inverse frame matrix.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DegenerateFrameError, InterpolationSignatureError
from .lorentz import block_decompose_batch, negative_eigen_count, normal_vector_batch, spd_power_batch
from .metrics import MINKOWSKI, MetricField
from .report import Check, Report


def _bump(u):
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    pos = u > 0
    with np.errstate(over="ignore"):  # subnormal u: 1/u -> inf, exp -> 0 exactly
        out[pos] = np.exp(-1.0 / u[pos])
    return out


@dataclass(frozen=True)
class TransitionFunction:
    t1: float
    t2: float

    def __post_init__(self):
        if not self.t1 < self.t2:
            raise ConfigError(f"transition needs t1 < t2, got t1={self.t1}, t2={self.t2}")

    def __call__(self, t):
        return transition(t, self)


def transition(t, tf: TransitionFunction):
    """``s(u) / (s(u) + s(1 - u))`` with ``s(u) = exp(-1/u)``; exactly 0 / 1 outside the window."""
    t = np.asarray(t, dtype=float)
    u = (t - tf.t1) / (tf.t2 - tf.t1)
    inner = (u > 0.0) & (u < 1.0)
    uc = np.where(inner, u, 0.5)
    a, b = _bump(uc), _bump(1.0 - uc)
    f = np.where(inner, a / (a + b), np.where(u >= 1.0, 1.0, 0.0))
    return float(f) if f.ndim == 0 else f


def deform_frame(a, f):
    """``m = sgn(a0) |a0|**f E0 + f (a1 E1 + a2 E2 + a3 E3)``; batched over leading axes."""
    a = np.asarray(a, dtype=float)
    f = np.asarray(f, dtype=float)
    a0 = a[..., 0]
    if np.any(a0 == 0.0):
        raise DegenerateFrameError("time component of the normal vector vanishes")
    m = np.empty_like(a)
    m[..., 0] = np.sign(a0) * np.abs(a0) ** f
    m[..., 1:] = f[..., None] * a[..., 1:]
    return m


def interpolated_components(g: np.ndarray, f) -> np.ndarray:
    """Blend already-evaluated base metrics ``g`` with transition values ``f``."""
    f = np.broadcast_to(np.asarray(f, dtype=float), g.shape[:-2])
    n = normal_vector_batch(g)
    lapse2, G, _ = block_decompose_batch(g)
    m = deform_frame(n, f)
    frame = np.zeros(g.shape)
    frame[..., 0, 0] = -np.power(-lapse2, f)
    frame[..., 1:, 1:] = spd_power_batch(G, f)
    # inverse of the column matrix [m, E1, E2, E3] in closed form
    inv = np.broadcast_to(np.eye(4), g.shape).copy()
    inv[..., 0, 0] = 1.0 / m[..., 0]
    inv[..., 1:, 0] = -m[..., 1:] / m[..., 0:1]
    out = np.einsum("...ki,...kl,...lj->...ij", inv, frame, inv)
    return 0.5 * (out + np.swapaxes(out, -1, -2))


class InterpolatedMetric(MetricField):
    """Minkowskian for ``t <= t1``, equal to ``base`` for ``t >= t2``."""

    family = "interpolated"

    def __init__(self, base: MetricField, tf: TransitionFunction):
        super().__init__(None if base.domain is None else base.domain)
        self.base = base
        self.tf = tf

    def components(self, t, x):
        g = self.base.evaluate_batch(t, x)
        out = interpolated_components(g, self.tf(t))
        bad = negative_eigen_count(out) != 1
        if np.any(bad):
            raise InterpolationSignatureError("interpolated metric lost Lorentzian signature")
        return out

    def params(self):
        return {"base": self.base.to_spec(), "t1": self.tf.t1, "t2": self.tf.t2}


def interpolated_metric_at(base: MetricField, tf: TransitionFunction, p) -> np.ndarray:
    return InterpolatedMetric(base, tf).evaluate(p)


def _one_sided_jump(metric: MetricField, t, x, h):
    # second-order one-sided derivatives from each side; smooth data gives O(h^2)
    g = lambda s: metric.evaluate_batch(np.full(len(x), s), x)
    g0 = g(t)
    left = (3.0 * g0 - 4.0 * g(t - h) + g(t - 2 * h)) / (2.0 * h)
    right = (-3.0 * g0 + 4.0 * g(t + h) - g(t + 2 * h)) / (2.0 * h)
    return float(np.max(np.abs(right - left)))


def verify_interpolation(base: MetricField, tf: TransitionFunction, lattice, h: float = 1e-3,
                         c1_tol: float = 1e-4, end_tol: float = 1e-12) -> Report:
    """Endpoint exactness, signature and C1 continuity of ``g'`` on a sample lattice.

    ``lattice`` is an ``(N, 4)`` array of ``(t, x1, x2, x3)`` points.
    """
    pts = np.asarray(lattice, dtype=float).reshape(-1, 4)
    if len(pts) == 0:
        raise ValueError("lattice must be nonempty")
    gi = InterpolatedMetric(base, tf)
    t, x = pts[:, 0], pts[:, 1:]
    gb = base.evaluate_batch(t, x)
    gp = interpolated_components(gb, tf(t))
    report = Report("interpolate")

    early = t <= tf.t1
    late = t >= tf.t2
    mink_exact = bool(np.all(gp[early] == MINKOWSKI)) if np.any(early) else True
    report.add(Check.flag("minkowski_before_t1_bitwise", mink_exact))
    late_err = float(np.max(np.abs(gp[late] - gb[late]))) if np.any(late) else 0.0
    report.add(Check.below("equals_base_after_t2", late_err, end_tol))
    lorentz_frac = float(np.mean(negative_eigen_count(gp) == 1))
    report.add(Check.at_least("lorentzian_fraction", lorentz_frac, 1.0))

    xs = np.unique(x, axis=0)
    for name, tc in (("t1", tf.t1), ("t2", tf.t2)):
        jump = _one_sided_jump(gi, tc, xs, h)
        report.add(Check.below(f"c1_jump_at_{name}", jump, c1_tol))
    report.data["n_points"] = int(len(pts))
    return report


def t_line(tf: TransitionFunction, n: int = 50, delta: float | None = None, x=(0.0, 0.0, 0.0)) -> np.ndarray:
    """``n`` points on a t-line spanning ``[t1 - delta, t2 + delta]`` at fixed ``x``."""
    if delta is None:
        delta = 0.5 * (tf.t2 - tf.t1)
    ts = np.linspace(tf.t1 - delta, tf.t2 + delta, n)
    pts = np.zeros((n, 4))
    pts[:, 0] = ts
    pts[:, 1:] = x
    return pts
