"""Regular charts from Riemann normal coordinates and a tan rescaling.

A chart around ``x`` is built in four steps: an orthonormal frame at ``x``,
the exponential map ``y -> exp_x(frame y)`` by geodesic integration, the
largest cube ``|y_mu| < r`` on which ``g_y(n_y, n_y) < 0`` and
``{n_y, E1, E2, E3}`` stay independent, and the rescaling
``z_mu = tan(pi y_mu / 2r)`` onto all of R^4.

Geodesics are integrated in offset variables ``d = exp_x(v) - x`` so that
small displacements keep full relative precision; the finite-difference
Jacobian of the exponential map relies on this.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BlowupError,
    ConfigError,
    CoverFailureError,
    DomainExitError,
    EvaluationError,
    NoRegularNeighborhoodError,
    OutOfCubeError,
)
from .lorentz import block_decompose, check_regular, normal_vector, spd_power
from .metrics import ConstantMetric, MetricField, Minkowski, SpacetimePoint

DET_MIN = 1e-8


@dataclass(frozen=True)
class GeodesicConfig:
    step: float = 0.1
    max_steps: int = 10_000
    christoffel_mode: str = "analytic"
    fd_step: float = 1e-4
    jacobian_step: float = 1e-6
    r_cap: float = 1.0
    bisection_tol: float = 1e-3
    lattice_density: int = 9

    def __post_init__(self):
        if self.step <= 0 or self.max_steps < 1:
            raise ConfigError("geodesic step must be positive and max_steps >= 1")
        if self.christoffel_mode not in ("analytic", "fd"):
            raise ConfigError("christoffel_mode must be 'analytic' or 'fd'")
        if not 1e-6 <= self.fd_step <= 1e-3:
            raise ConfigError("finite-difference step must lie in [1e-6, 1e-3]")
        if self.r_cap <= 0 or self.bisection_tol <= 0:
            raise ConfigError("r_cap and bisection_tol must be positive")
        if self.lattice_density < 2:
            raise ConfigError("lattice_density must be at least 2")

    @property
    def n_steps(self) -> int:
        n = int(math.ceil(1.0 / self.step - 1e-12))
        if n > self.max_steps:
            raise ConfigError(f"unit affine range needs {n} steps > max_steps = {self.max_steps}")
        return n


def _is_flat(field: MetricField, cfg: GeodesicConfig) -> bool:
    return cfg.christoffel_mode == "analytic" and isinstance(field, (Minkowski, ConstantMetric))


def _christoffel_from(g, dg):
    ginv = np.linalg.inv(g)
    # T_{n a b} = d_a g_{nb} + d_b g_{na} - d_n g_{ab}
    T = np.einsum("...anb->...nab", dg) + np.einsum("...bna->...nab", dg) - dg
    return 0.5 * np.einsum("...mn,...nab->...mab", ginv, T), ginv


def christoffel(field: MetricField, points: np.ndarray, cfg: GeodesicConfig = GeodesicConfig()) -> np.ndarray:
    """``Gamma^mu_{ab}`` at ``points`` (shape ``(..., 4)``), index order ``[..., mu, a, b]``."""
    points = np.asarray(points, dtype=float)
    t, x = points[..., 0], points[..., 1:]
    g = field.evaluate_batch(t, x)
    dg = field.derivatives_batch(t, x, cfg.christoffel_mode, cfg.fd_step)
    return _christoffel_from(g, dg)[0]


def _accelerations(field, pts, U, cfg):
    """Geodesic accelerations, NaN where the metric is degenerate or has no time direction.

    A geodesic of the Lorentzian manifold cannot pass through such points,
    so integration treats them as leaving the validity region.
    """
    a = np.full_like(U, np.nan)
    t, x = pts[:, 0], pts[:, 1:]
    g = field.evaluate_batch(t, x)
    good = np.linalg.det(g) < 0.0
    if not np.any(good):
        return a
    G, ginv = _christoffel_from(g[good], field.derivatives_batch(t[good], x[good], cfg.christoffel_mode, cfg.fd_step))
    idx = np.flatnonzero(good)[ginv[:, 0, 0] < 0.0]
    G = G[ginv[:, 0, 0] < 0.0]
    a[idx] = -np.einsum("nmab,na,nb->nm", G, U[idx], U[idx])
    return a


def geodesic_offsets(field: MetricField, x, V, cfg: GeodesicConfig = GeodesicConfig(), with_exits: bool = False):
    """Integrate geodesics from ``x`` with velocities ``V`` (``(N, 4)``) over unit affine time.

    Returns ``(D, ok)`` with ``D = exp_x(V) - x`` and a per-geodesic success mask;
    failed rows (domain exit, blow-up) hold NaN. With ``with_exits`` a third
    mask marks rows that failed by reaching a point outside the validity
    region or without a Lorentzian time direction.
    """
    x = np.asarray(x, dtype=float)
    V = np.asarray(V, dtype=float).reshape(-1, 4)
    if _is_flat(field, cfg):
        D, ok = V.copy(), np.ones(len(V), dtype=bool)
        return (D, ok, ~ok) if with_exits else (D, ok)
    n = cfg.n_steps
    h = 1.0 / n
    d = np.zeros_like(V)
    u = V.copy()
    ok = np.ones(len(V), dtype=bool)
    exited = np.zeros(len(V), dtype=bool)

    def accel(dd, uu):
        pts = x + dd
        a = np.full_like(uu, np.nan)
        finite = ok & np.all(np.isfinite(pts), axis=1) & np.all(np.isfinite(uu), axis=1)
        live = finite & field.contains(pts[:, 0], pts[:, 1:])
        if np.any(live):
            with np.errstate(all="ignore"):
                try:
                    a[live] = _accelerations(field, pts[live], uu[live], cfg)
                except (np.linalg.LinAlgError, EvaluationError):
                    pass
        exited[finite & ~np.all(np.isfinite(a), axis=1)] = True
        return a

    with np.errstate(all="ignore"):
        for _ in range(n):
            k1d, k1u = u, accel(d, u)
            k2d, k2u = u + 0.5 * h * k1u, accel(d + 0.5 * h * k1d, u + 0.5 * h * k1u)
            k3d, k3u = u + 0.5 * h * k2u, accel(d + 0.5 * h * k2d, u + 0.5 * h * k2u)
            k4d, k4u = u + h * k3u, accel(d + h * k3d, u + h * k3u)
            d = d + (h / 6.0) * (k1d + 2 * k2d + 2 * k3d + k4d)
            u = u + (h / 6.0) * (k1u + 2 * k2u + 2 * k3u + k4u)
            ok &= np.all(np.isfinite(d), axis=1) & np.all(np.isfinite(u), axis=1)
            d[~ok] = np.nan
            u[~ok] = np.nan
    end = x + d
    inside = field.contains(end[:, 0], end[:, 1:])
    exited |= ok & ~inside
    ok &= inside
    d[~ok] = np.nan
    return (d, ok, exited) if with_exits else (d, ok)


def exponential_map(field: MetricField, x: SpacetimePoint, v, cfg: GeodesicConfig = GeodesicConfig()) -> SpacetimePoint:
    """Endpoint of the geodesic through ``x`` with initial velocity ``v`` at unit affine time."""
    xa = x.as_array()
    v = np.asarray(v, dtype=float).reshape(1, 4)
    if not field.contains(xa[0], xa[1:]):
        raise DomainExitError("base point outside the validity region")
    d, ok, exited = geodesic_offsets(field, xa, v, cfg, with_exits=True)
    if not ok[0]:
        if exited[0]:
            raise DomainExitError("geodesic left the validity region")
        raise BlowupError("geodesic integration produced non-finite values")
    return SpacetimePoint.from_array(xa + d[0])


def orthonormal_frame(g_x) -> np.ndarray:
    """Columns ``e0 = -n / sqrt(-g(n,n))`` (future pointing) and ``E_j (G^{-1/2})_{ji}``."""
    g_x = np.asarray(g_x, dtype=float)
    bf = block_decompose(g_x)
    n = normal_vector(g_x)
    frame = np.zeros((4, 4))
    frame[:, 0] = -n / math.sqrt(-bf.lapse2)
    frame[1:, 1:] = np.linalg.inv(spd_power(bf.spatial, 0.5))
    return frame


def exp_jacobian(field, x, frame, Y, cfg: GeodesicConfig = GeodesicConfig()):
    """Offsets ``exp_x(frame y) - x`` and their Jacobians ``d exp / d y`` by central differences."""
    Y = np.asarray(Y, dtype=float).reshape(-1, 4)
    N = len(Y)
    hj = cfg.jacobian_step
    shifts = np.concatenate([np.zeros((1, 4)), hj * np.eye(4), -hj * np.eye(4)])
    allY = (Y[:, None, :] + shifts[None, :, :]).reshape(-1, 4)
    D, ok = geodesic_offsets(field, x, allY @ frame.T, cfg)
    D = D.reshape(N, 9, 4)
    ok = ok.reshape(N, 9).all(axis=1)
    J = (D[:, 1:5, :] - D[:, 5:9, :]) / (2.0 * hj)  # [N, mu (y-direction), component]
    return D[:, 0, :], np.swapaxes(J, 1, 2), ok


def normal_metric(field, x, frame, Y, cfg: GeodesicConfig = GeodesicConfig()):
    """Metric in normal coordinates ``J^T g(exp_x(y)) J`` and a validity mask."""
    D, J, ok = exp_jacobian(field, x, frame, Y, cfg)
    q = x + D
    g = np.full((len(D), 4, 4), np.nan)
    if np.any(ok):
        gq = field.evaluate_batch(q[ok, 0], q[ok, 1:])
        g[ok] = np.einsum("nai,nab,nbj->nij", J[ok], gq, J[ok])
    return g, q, ok


def cube_lattice(density: int, faces_only: bool = True) -> np.ndarray:
    """Unit-cube sample fractions in ``[-1, 1]^4``; by default only the boundary faces."""
    s = np.linspace(-1.0, 1.0, density)
    pts = np.stack(np.meshgrid(s, s, s, s, indexing="ij"), axis=-1).reshape(-1, 4)
    if faces_only:
        pts = pts[np.max(np.abs(pts), axis=1) == 1.0]
    return pts


def cube_conditions(field, x, frame, Y, cfg: GeodesicConfig = GeodesicConfig()) -> np.ndarray:
    """Per-sample truth of ``g_y(n_y, n_y) < 0`` with ``|det{n_y, E1, E2, E3}| > DET_MIN``.

    In normal coordinates ``det{n_y, E_i}`` and ``g_y(n_y, n_y)`` are both the
    ``(0, 0)`` entry of the inverse metric.
    """
    g, _, ok = normal_metric(field, x, frame, Y, cfg)
    res = np.zeros(len(g), dtype=bool)
    if np.any(ok):
        with np.errstate(all="ignore"):
            try:
                ginv00 = np.linalg.inv(g[ok])[:, 0, 0]
            except np.linalg.LinAlgError:
                ginv00 = np.array([np.linalg.pinv(m)[0, 0] if np.all(np.isfinite(m)) else np.nan for m in g[ok]])
        res[ok] = np.isfinite(ginv00) & (ginv00 < -DET_MIN)
    return res


def find_cube_radius(field: MetricField, x: SpacetimePoint, cfg: GeodesicConfig = GeodesicConfig(),
                     frame=None) -> float:
    """Largest half-width ``r <= r_cap`` (to ``bisection_tol``) passing the cube conditions.

    Each trial radius is tested on the boundary faces of a fixed
    ``lattice_density``-per-axis lattice scaled to the cube.
    """
    xa = x.as_array()
    if frame is None:
        frame = orthonormal_frame(field.evaluate(x))
    unit = cube_lattice(cfg.lattice_density)

    def passes(r):
        return bool(np.all(cube_conditions(field, xa, frame, r * unit, cfg)))

    if passes(cfg.r_cap):
        return cfg.r_cap
    lo, hi = 0.0, cfg.r_cap
    if not passes(cfg.bisection_tol):
        raise NoRegularNeighborhoodError(f"no cube of half-width {cfg.bisection_tol} passes at {x}")
    lo = cfg.bisection_tol
    while hi - lo > cfg.bisection_tol:
        mid = 0.5 * (lo + hi)
        if passes(mid):
            lo = mid
        else:
            hi = mid
    return lo


def tan_rescale(y, r: float) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if np.any(np.abs(y) >= r):
        raise OutOfCubeError("point lies outside the open cube")
    return np.tan(np.pi * y / (2.0 * r))


def atan_rescale(z, r: float) -> np.ndarray:
    return (2.0 * r / np.pi) * np.arctan(np.asarray(z, dtype=float))


def atan_jacobian(z, r: float) -> np.ndarray:
    """Diagonal of ``d y / d z`` for the inverse rescaling."""
    z = np.asarray(z, dtype=float)
    return (2.0 * r / np.pi) / (1.0 + z * z)


class ChartMetric(MetricField):
    """Ambient metric pulled back to chart coordinates ``z`` (all of R^4)."""

    family = "chart"

    def __init__(self, ambient: MetricField, center, frame, r: float, cfg: GeodesicConfig):
        super().__init__(None)
        self.ambient = ambient
        self.center = np.asarray(center, dtype=float)
        self.frame = np.asarray(frame, dtype=float)
        self.r = float(r)
        self.cfg = cfg

    def components(self, t, x):
        t = np.asarray(t, dtype=float)
        z = np.concatenate([t[..., None], np.asarray(x, dtype=float)], axis=-1)
        shape = t.shape
        z = z.reshape(-1, 4)
        y = atan_rescale(z, self.r)
        g, _, ok = normal_metric(self.ambient, self.center, self.frame, y, self.cfg)
        if not np.all(ok):
            raise EvaluationError("pulled-back metric undefined: geodesic integration failed")
        c = atan_jacobian(z, self.r)
        out = g * c[:, :, None] * c[:, None, :]
        return out.reshape(shape + (4, 4))

    def params(self):
        return {"ambient": self.ambient.to_spec(), "center": self.center.tolist(), "r": self.r}


@dataclass
class RegularChart:
    center: SpacetimePoint
    r: float
    frame: np.ndarray
    pulled_metric: ChartMetric
    cfg: GeodesicConfig = field(repr=False, default_factory=GeodesicConfig)

    def origin_metric(self) -> np.ndarray:
        """Pulled metric at ``z = 0`` divided by ``(2r/pi)^2``; Minkowskian by construction."""
        return self.pulled_metric.evaluate(SpacetimePoint(0.0)) / (2.0 * self.r / math.pi) ** 2

    def sample_points(self, fractions=(-0.8, -0.4, 0.0, 0.4, 0.8)) -> np.ndarray:
        """Standard chart sample: ``y`` on a lattice inside the cube, mapped to ``z``."""
        s = np.asarray(fractions) * self.r
        Y = np.stack(np.meshgrid(s, s, s, s, indexing="ij"), axis=-1).reshape(-1, 4)
        return tan_rescale(Y, self.r)

    def check(self, fractions=(-0.8, -0.4, 0.0, 0.4, 0.8)):
        return check_regular(self.pulled_metric, self.sample_points(fractions))

    def preimages(self, Q, newton_tol: float = 1e-10, max_iter: int = 30):
        """Normal coordinates ``y`` with ``exp_x(frame y) = Q`` by Newton iteration."""
        return inverse_exponential(self.pulled_metric.ambient, self.center.as_array(), self.frame, Q,
                                   self.cfg, newton_tol, max_iter)

    def covers(self, Q) -> np.ndarray:
        y, ok = self.preimages(Q)
        inside = np.zeros(len(y), dtype=bool)
        inside[ok] = np.max(np.abs(y[ok]), axis=1) < self.r
        return inside

    def export(self, density: int = 3) -> dict:
        """JSON-ready record with the pulled metric sampled on a ``density^4`` lattice."""
        Z = self.sample_points(np.linspace(-0.8, 0.8, density))
        G = self.pulled_metric.evaluate_points(Z)
        return {
            "center": list(self.center.as_array()),
            "r": self.r,
            "frame": self.frame.tolist(),
            "samples": [{"z": z.tolist(), "g": g.tolist()} for z, g in zip(Z, G)],
        }


def inverse_exponential(field, x, frame, Q, cfg: GeodesicConfig = GeodesicConfig(),
                        tol: float = 1e-10, max_iter: int = 30):
    Q = np.asarray(Q, dtype=float).reshape(-1, 4)
    x = np.asarray(x, dtype=float)
    Y = np.linalg.solve(frame, (Q - x).T).T
    ok = np.ones(len(Q), dtype=bool)
    done = np.zeros(len(Q), dtype=bool)
    for _ in range(max_iter):
        act = ok & ~done
        if not np.any(act):
            break
        D, J, good = exp_jacobian(field, x, frame, Y[act], cfg)
        idx = np.flatnonzero(act)
        ok[idx[~good]] = False
        idx, D, J = idx[good], D[good], J[good]
        res = x + D - Q[idx]
        conv = np.max(np.abs(res), axis=1) < tol
        done[idx[conv]] = True
        upd = ~conv
        if np.any(upd):
            try:
                step = np.linalg.solve(J[upd], res[upd][..., None])[..., 0]
            except np.linalg.LinAlgError:
                ok[idx[upd]] = False
                continue
            Y[idx[upd]] -= step
            ok[idx[upd]] &= np.all(np.isfinite(Y[idx[upd]]), axis=1)
    ok &= done
    return Y, ok


def build_regular_chart(field: MetricField, x: SpacetimePoint, cfg: GeodesicConfig = GeodesicConfig()) -> RegularChart:
    frame = orthonormal_frame(field.evaluate(x))
    r = find_cube_radius(field, x, cfg, frame)
    return RegularChart(x, r, frame, ChartMetric(field, x.as_array(), frame, r, cfg), cfg)


def region_lattice(region, density: int) -> np.ndarray:
    region = np.asarray(region, dtype=float).reshape(4, 2)
    axes = [np.linspace(lo, hi, density) for lo, hi in region]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 4)


@dataclass
class Cover:
    charts: list[RegularChart]
    lattice: np.ndarray
    owner: np.ndarray  # index of the first chart covering each lattice point

    @property
    def coverage(self) -> float:
        return float(np.mean(self.owner >= 0))


def cover_region(field: MetricField, region, cfg: GeodesicConfig = GeodesicConfig(),
                 density: int = 5, max_charts: int = 2000) -> Cover:
    """Greedy finite cover of the lattice points of a coordinate box by regular charts.

    Seeds at the box center, then repeatedly at the uncovered lattice point
    closest to the centroid of the uncovered set (lowest index on ties).
    """
    region = np.asarray(region, dtype=float).reshape(4, 2)
    L = region_lattice(region, density)
    owner = np.full(len(L), -1)
    charts: list[RegularChart] = []
    seed = region.mean(axis=1)
    while True:
        if len(charts) >= max_charts:
            raise CoverFailureError(f"{int(np.sum(owner < 0))} lattice points uncovered after {max_charts} charts")
        chart = build_regular_chart(field, SpacetimePoint.from_array(seed), cfg)
        todo = np.flatnonzero(owner < 0)
        hit = chart.covers(L[todo])
        owner[todo[hit]] = len(charts)
        charts.append(chart)
        todo = np.flatnonzero(owner < 0)
        if len(todo) == 0:
            break
        rest = L[todo]
        dist = np.sum((rest - rest.mean(axis=0)) ** 2, axis=1)
        seed = rest[int(np.argmin(dist))]
    return Cover(charts, L, owner)
