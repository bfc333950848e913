"""Analytic metric families and their JSON description.

Every field evaluates in batch: ``t`` has shape ``S`` and ``x`` has shape
``S + (3,)``, and the result has shape ``S + (4, 4)``. Pointwise evaluation
is the special case ``S = ()``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import ConfigError, EvaluationError

MINKOWSKI = np.diag([-1.0, 1.0, 1.0, 1.0])
SYMMETRY_TOL = 1e-14
FD_STEP = 1e-4


@dataclass(frozen=True)
class SpacetimePoint:
    t: float
    x: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        x = tuple(float(v) for v in self.x)
        if len(x) != 3:
            raise ValueError("spatial part must have three components")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "t", float(self.t))
        if not np.all(np.isfinite((self.t,) + x)):
            raise ValueError("spacetime point has non-finite components")

    @classmethod
    def from_array(cls, y) -> "SpacetimePoint":
        y = np.asarray(y, dtype=float)
        return cls(y[0], tuple(y[1:4]))

    def as_array(self) -> np.ndarray:
        return np.array((self.t,) + self.x)


def _split(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    points = np.asarray(points, dtype=float)
    return points[..., 0], points[..., 1:4]


class MetricField:
    """A smooth map from spacetime points to symmetric 4x4 Lorentzian matrices.

    Subclasses implement :meth:`components`. ``domain`` is an optional
    ``(4, 2)`` coordinate box outside which the field is not trusted.
    """

    family = "abstract"

    def __init__(self, domain=None):
        self.domain = None if domain is None else np.asarray(domain, dtype=float).reshape(4, 2)

    # -- to be provided by families ------------------------------------
    def components(self, t: np.ndarray, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def component_derivatives(self, t, x):
        """Analytic ``d_lambda g_{mu nu}`` with shape ``S + (4, 4, 4)`` or None."""
        return None

    def params(self) -> dict[str, Any]:
        return {}

    # -- shared machinery ----------------------------------------------
    def evaluate_batch(self, t, x) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        g = np.asarray(self.components(t, x), dtype=float)
        if not np.all(np.isfinite(g)):
            raise EvaluationError(f"{self.family} metric produced non-finite entries")
        return 0.5 * (g + np.swapaxes(g, -1, -2))

    def evaluate_points(self, points) -> np.ndarray:
        t, x = _split(points)
        return self.evaluate_batch(t, x)

    def evaluate(self, p: SpacetimePoint) -> np.ndarray:
        return self.evaluate_batch(np.float64(p.t), np.asarray(p.x))

    def derivatives_batch(self, t, x, mode: str = "analytic", h: float = FD_STEP) -> np.ndarray:
        """Coordinate derivatives of the metric, index order ``[..., lam, mu, nu]``."""
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        if mode == "analytic":
            d = self.component_derivatives(t, x)
            if d is not None:
                d = np.asarray(d, dtype=float)
                return 0.5 * (d + np.swapaxes(d, -1, -2))
        out = np.empty(t.shape + (4, 4, 4))
        for lam in range(4):
            if lam == 0:
                gp = self.evaluate_batch(t + h, x)
                gm = self.evaluate_batch(t - h, x)
            else:
                dx = np.zeros(3)
                dx[lam - 1] = h
                gp = self.evaluate_batch(t, x + dx)
                gm = self.evaluate_batch(t, x - dx)
            out[..., lam, :, :] = (gp - gm) / (2.0 * h)
        return out

    def contains(self, t, x) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        ok = np.isfinite(t) & np.all(np.isfinite(x), axis=-1)
        if self.domain is None:
            return ok
        y = np.concatenate([t[..., None], x], axis=-1)
        inside = np.all((y > self.domain[:, 0]) & (y < self.domain[:, 1]), axis=-1)
        return ok & inside

    def to_spec(self) -> dict[str, Any]:
        spec = {"family": self.family, "params": self.params()}
        if self.domain is not None:
            spec["domain"] = self.domain.tolist()
        return spec

    def __repr__(self):
        return f"{type(self).__name__}({self.params()})"


class Minkowski(MetricField):
    family = "minkowski"

    def components(self, t, x):
        return np.broadcast_to(MINKOWSKI, np.shape(t) + (4, 4)).copy()

    def component_derivatives(self, t, x):
        return np.zeros(np.shape(t) + (4, 4, 4))


def _poly_coeffs(c, default: float) -> np.ndarray:
    if c is None:
        return np.array([[default]])
    c = np.asarray(c, dtype=float)
    if c.ndim == 1:
        c = c[:, None]
    if c.ndim != 2 or c.size == 0:
        raise ConfigError("diag_poly coefficients must be a 1D or 2D array")
    return c


class DiagPoly(MetricField):
    """Diagonal metric whose entries are polynomials in ``(t, x1)``.

    Coefficient ``c[i][j]`` multiplies ``t**i * x1**j``; a flat list is a
    polynomial in ``t`` alone.
    """

    family = "diag_poly"
    KEYS = ("g00", "g11", "g22", "g33")

    def __init__(self, g00=None, g11=None, g22=None, g33=None, domain=None):
        super().__init__(domain)
        raw = (g00, g11, g22, g33)
        self._raw = raw
        self.coeffs = [_poly_coeffs(c, d) for c, d in zip(raw, MINKOWSKI.diagonal())]
        self.dt_coeffs = [P.polyder(c, axis=0) if c.shape[0] > 1 else np.zeros((1, 1)) for c in self.coeffs]
        self.dx_coeffs = [P.polyder(c, axis=1) if c.shape[1] > 1 else np.zeros((1, 1)) for c in self.coeffs]

    def components(self, t, x):
        g = np.zeros(np.shape(t) + (4, 4))
        x1 = x[..., 0]
        for mu, c in enumerate(self.coeffs):
            g[..., mu, mu] = P.polyval2d(t, x1, c)
        return g

    def component_derivatives(self, t, x):
        d = np.zeros(np.shape(t) + (4, 4, 4))
        x1 = x[..., 0]
        for mu in range(4):
            d[..., 0, mu, mu] = P.polyval2d(t, x1, self.dt_coeffs[mu])
            d[..., 1, mu, mu] = P.polyval2d(t, x1, self.dx_coeffs[mu])
        return d

    def params(self):
        return {k: (None if c is None else np.asarray(c, dtype=float).tolist()) for k, c in zip(self.KEYS, self._raw) if c is not None}


_SHAPES = {
    "tanh": (np.tanh, lambda s: 1.0 / np.cosh(s) ** 2),
    "bump": (lambda s: np.exp(-s * s), lambda s: -2.0 * s * np.exp(-s * s)),
    "sin": (np.sin, np.cos),
    "const": (np.ones_like, np.zeros_like),
}


class FRW(MetricField):
    """``diag(-1, a^2, a^2, a^2)`` with ``a(t) = 1 + eps * shape((t - t0) / width)``."""

    family = "frw"

    def __init__(self, eps=0.05, shape="tanh", t0=0.0, width=1.0, domain=None):
        super().__init__(domain)
        if shape not in _SHAPES:
            raise ConfigError(f"unknown frw shape {shape!r}; expected one of {sorted(_SHAPES)}")
        if width <= 0:
            raise ConfigError("frw width must be positive")
        self.eps, self.shape, self.t0, self.width = float(eps), shape, float(t0), float(width)

    def scale(self, t):
        s = (np.asarray(t, dtype=float) - self.t0) / self.width
        return 1.0 + self.eps * _SHAPES[self.shape][0](s)

    def scale_rate(self, t):
        s = (np.asarray(t, dtype=float) - self.t0) / self.width
        return self.eps * _SHAPES[self.shape][1](s) / self.width

    def components(self, t, x):
        a2 = self.scale(t) ** 2
        g = np.zeros(np.shape(t) + (4, 4))
        g[..., 0, 0] = -1.0
        for i in (1, 2, 3):
            g[..., i, i] = a2
        return g

    def component_derivatives(self, t, x):
        d = np.zeros(np.shape(t) + (4, 4, 4))
        da2 = 2.0 * self.scale(t) * self.scale_rate(t)
        for i in (1, 2, 3):
            d[..., 0, i, i] = da2
        return d

    def params(self):
        return {"eps": self.eps, "shape": self.shape, "t0": self.t0, "width": self.width}


class WeakField(MetricField):
    """Static linearized field ``diag(-(1 + 2 Phi), (1 - 2 Phi) I)`` with a Gaussian well."""

    family = "weakfield"

    def __init__(self, amplitude=0.01, width=1.0, center=(0.0, 0.0, 0.0), domain=None):
        super().__init__(domain)
        if width <= 0:
            raise ConfigError("weakfield width must be positive")
        self.amplitude, self.width = float(amplitude), float(width)
        self.center = np.asarray(center, dtype=float).reshape(3)

    def potential(self, x):
        r = np.asarray(x, dtype=float) - self.center
        return -self.amplitude * np.exp(-np.sum(r * r, axis=-1) / self.width**2)

    def components(self, t, x):
        phi = np.broadcast_to(self.potential(x), np.shape(t))
        g = np.zeros(np.shape(t) + (4, 4))
        g[..., 0, 0] = -(1.0 + 2.0 * phi)
        for i in (1, 2, 3):
            g[..., i, i] = 1.0 - 2.0 * phi
        return g

    def component_derivatives(self, t, x):
        shape = np.shape(t)
        phi = np.broadcast_to(self.potential(x), shape)
        r = np.broadcast_to(np.asarray(x, dtype=float) - self.center, shape + (3,))
        d = np.zeros(shape + (4, 4, 4))
        for k in range(3):
            dphi = phi * (-2.0 * r[..., k] / self.width**2)
            d[..., k + 1, 0, 0] = -2.0 * dphi
            for i in (1, 2, 3):
                d[..., k + 1, i, i] = -2.0 * dphi
        return d

    def params(self):
        return {"amplitude": self.amplitude, "width": self.width, "center": self.center.tolist()}


class ConstantMetric(MetricField):
    """A fixed symmetric matrix at every point; handy for diagnostics."""

    family = "constant"

    def __init__(self, matrix, domain=None):
        super().__init__(domain)
        self.matrix = np.asarray(matrix, dtype=float).reshape(4, 4)

    def components(self, t, x):
        return np.broadcast_to(self.matrix, np.shape(t) + (4, 4)).copy()

    def component_derivatives(self, t, x):
        return np.zeros(np.shape(t) + (4, 4, 4))

    def params(self):
        return {"matrix": self.matrix.tolist()}


FAMILIES = {cls.family: cls for cls in (Minkowski, DiagPoly, FRW, WeakField, ConstantMetric)}


def metric_from_spec(spec: dict[str, Any]) -> MetricField:
    """Build a metric from ``{"family": ..., "params": {...}, "domain": ...}``."""
    if not isinstance(spec, dict) or "family" not in spec:
        raise ConfigError("metric spec must be an object with a 'family' key")
    family = spec["family"]
    if family not in FAMILIES:
        raise ConfigError(f"unknown metric family {family!r}; expected one of {sorted(FAMILIES)}")
    params = dict(spec.get("params") or {})
    try:
        return FAMILIES[family](**params, domain=spec.get("domain"))
    except TypeError as exc:
        raise ConfigError(f"bad parameters for {family}: {exc}") from exc


def evaluate_metric(field: MetricField, p: SpacetimePoint) -> np.ndarray:
    if not field.contains(p.t, np.asarray(p.x)):
        raise EvaluationError(f"point {p} outside the validity region of {field!r}")
    return field.evaluate(p)
