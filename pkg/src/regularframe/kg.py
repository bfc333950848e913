"""Covariant Klein-Gordon evolution on periodic grids.

For a metric that is block diagonal in ``(t, x)`` the field equation is
evolved in conservative form,

    d_t phi = Pi / B,     d_t Pi = sum_i D_i (A_i D_i phi) - sqrt|g| m^2 phi,

with ``B = sqrt|g| (-g^00)`` and ``A_i = sqrt|g| g^ii``. ``Pi = B d_t phi`` is
the momentum density, so the Klein-Gordon product

    <f, h> = i sum_x (conj(phi_f) Pi_h - phi_h conj(Pi_f)) dV

is conserved exactly by the semi-discrete scheme; only the time integrator
contributes drift. :class:`FieldState` stores the plain time derivative
``pi = d_t phi``; conversion happens at the boundaries of :func:`evolve`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import (
    BlowupError,
    ConfigError,
    NotGloballyHyperbolicHereError,
    SliceError,
    StabilityError,
)
from .metrics import MetricField

RK4_STABILITY = 2.8  # |omega dt| bound on the imaginary axis, below 2*sqrt(2)
BLOCK_TOL = 1e-12


@dataclass(frozen=True)
class GridSpec:
    extent: float
    n: int
    dim: int = 1
    dt: float | None = None
    cfl: float = 0.25

    def __post_init__(self):
        if self.dim not in (1, 3):
            raise ConfigError("dim must be 1 or 3")
        if self.n < 16:
            raise ConfigError("grid needs at least 16 points per axis")
        if self.extent <= 0:
            raise ConfigError("extent must be positive")
        if self.dt is None:
            object.__setattr__(self, "dt", self.cfl * self.h)
        if not 0 < self.dt <= self.cfl * self.h * (1 + 1e-12):
            raise StabilityError(f"dt = {self.dt:.4g} exceeds cfl * h = {self.cfl * self.h:.4g}")

    @property
    def h(self) -> float:
        return 2.0 * self.extent / self.n

    @property
    def volume(self) -> float:
        return (2.0 * self.extent) ** self.dim

    @property
    def cell(self) -> float:
        return self.h**self.dim

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    def axis(self) -> np.ndarray:
        return -self.extent + self.h * np.arange(self.n)

    def points(self) -> np.ndarray:
        """Spatial coordinates with shape ``shape + (3,)``; suppressed axes sit at 0."""
        ax = self.axis()
        out = np.zeros(self.shape + (3,))
        if self.dim == 1:
            out[:, 0] = ax
        else:
            X = np.meshgrid(ax, ax, ax, indexing="ij")
            for i in range(3):
                out[..., i] = X[i]
        return out

    def refine(self, factor: int = 2) -> "GridSpec":
        return GridSpec(self.extent, self.n * factor, self.dim, self.dt / factor, self.cfl)


@dataclass
class FieldState:
    phi: np.ndarray
    pi: np.ndarray
    t: float

    def __post_init__(self):
        self.phi = np.asarray(self.phi, dtype=np.complex128)
        self.pi = np.asarray(self.pi, dtype=np.complex128)
        if self.phi.shape != self.pi.shape:
            raise ValueError("phi and pi must share a shape")
        if not (np.all(np.isfinite(self.phi)) and np.all(np.isfinite(self.pi))):
            raise BlowupError("field state has non-finite entries")

    @classmethod
    def zeros(cls, grid: GridSpec, t: float = 0.0) -> "FieldState":
        z = np.zeros(grid.shape, dtype=np.complex128)
        return cls(z, z.copy(), t)

    def copy(self) -> "FieldState":
        return FieldState(self.phi.copy(), self.pi.copy(), self.t)

    def __add__(self, other):
        if other.t != self.t:
            raise SliceError("states live on different slices")
        return FieldState(self.phi + other.phi, self.pi + other.pi, self.t)

    def __rmul__(self, c):
        return FieldState(c * self.phi, c * self.pi, self.t)


@dataclass
class Coefficients:
    b: np.ndarray        # sqrt|g| (-g^00)
    sqrt_g: np.ndarray   # sqrt|g|
    faces: list          # sqrt|g| g^ii averaged onto faces, one per active axis
    omega_max: float


def coefficients(metric: MetricField, grid: GridSpec, t: float) -> Coefficients:
    x = grid.points()
    g = metric.evaluate_batch(np.full(grid.shape, float(t)), x)
    off = np.abs(g[..., 0, 1:]).max()
    spatial = g[..., 1:, 1:]
    off_spatial = np.abs(spatial - np.einsum("...ii->...i", spatial)[..., None] * np.eye(3)).max()
    scale = max(1.0, float(np.abs(g).max()))
    if off > BLOCK_TOL * scale or off_spatial > BLOCK_TOL * scale:
        raise ConfigError("the grid solver needs a diagonal metric on the grid")
    diag = np.einsum("...ii->...i", g)
    if np.any(diag[..., 0] >= 0.0):
        raise NotGloballyHyperbolicHereError("g_00 >= 0 somewhere on the grid")
    if np.any(diag[..., 1:] <= 0.0):
        raise NotGloballyHyperbolicHereError("spatial metric not positive definite on the grid")
    sqrt_g = np.sqrt(np.abs(np.prod(diag, axis=-1)))
    b = sqrt_g / (-diag[..., 0])
    faces = []
    gershgorin = np.zeros(grid.shape)
    for axis in range(grid.dim):
        a = sqrt_g / diag[..., axis + 1]
        face = 0.5 * (a + np.roll(a, -1, axis))
        faces.append(np.ascontiguousarray(face))
        gershgorin += 2.0 * (face + np.roll(face, 1, axis)) / grid.h**2
    omega_max = float(np.sqrt(np.max(gershgorin / b)))
    return Coefficients(np.ascontiguousarray(b), sqrt_g, faces, omega_max)


class _CoefficientCache:
    """Coefficient evaluations keyed by time; RK4 revisits each stage time."""

    def __init__(self, metric, grid, size=4):
        self.metric, self.grid, self.size = metric, grid, size
        self._store: dict[float, Coefficients] = {}

    def __call__(self, t: float) -> Coefficients:
        c = self._store.get(t)
        if c is None:
            c = coefficients(self.metric, self.grid, t)
            if len(self._store) >= self.size:
                self._store.pop(next(iter(self._store)))
            self._store[t] = c
        return c


def _momentum_rhs(phi, Pi, coef: Coefficients, m: float, grid: GridSpec):
    return kernels.kg_momentum_rhs(phi, Pi, 1.0 / coef.b, coef.sqrt_g * m * m, coef.faces, 1.0 / grid.h**2)


def _check_stability(coef: Coefficients, m: float, dt: float, b_min: float):
    omega = math.sqrt(coef.omega_max**2 + m * m * float(np.max(coef.sqrt_g)) / b_min)
    if omega * abs(dt) > RK4_STABILITY:
        raise StabilityError(f"omega_max * dt = {omega * abs(dt):.3f} exceeds {RK4_STABILITY}")


def kg_rhs(state: FieldState, metric: MetricField, m: float, grid: GridSpec, dt_fd: float = 1e-5):
    """Velocity-form right-hand side ``(d_t phi, d_t^2 phi)``.

    ``d_t B`` comes from a central difference in time with step ``dt_fd``.
    """
    coef = coefficients(metric, grid, state.t)
    _check_stability(coef, m, grid.dt, float(np.min(coef.b)))
    Pi = coef.b * state.pi
    _, dPi = _momentum_rhs(state.phi, Pi, coef, m, grid)
    b_dot = (coefficients(metric, grid, state.t + dt_fd).b - coefficients(metric, grid, state.t - dt_fd).b) / (2 * dt_fd)
    dpi = (dPi - b_dot * state.pi) / coef.b
    if not np.all(np.isfinite(dpi)):
        raise BlowupError("non-finite right-hand side")
    return state.pi.copy(), dpi


def step_count(t0: float, t1: float, dt: float) -> int:
    return max(int(math.ceil(abs(t1 - t0) / dt - 1e-9)), 0)


def evolve(state: FieldState, metric: MetricField, m: float, grid: GridSpec, t_end: float,
           dt: float | None = None) -> FieldState:
    """Classical RK4 from ``state.t`` to ``t_end`` (backwards if ``t_end < state.t``)."""
    dt = grid.dt if dt is None else dt
    nsteps = step_count(state.t, t_end, dt)
    if nsteps == 0:
        return state.copy()
    h = (t_end - state.t) / nsteps
    coef_at = _CoefficientCache(metric, grid)
    c0 = coef_at(state.t)
    b_min = float(np.min(c0.b))
    _check_stability(c0, m, h, b_min)
    phi = state.phi.copy()
    Pi = c0.b * state.pi
    t0 = state.t
    for k in range(nsteps):
        t = t0 + k * h
        ca, cb, cc = coef_at(t), coef_at(t + 0.5 * h), coef_at(t + h)
        k1p, k1q = _momentum_rhs(phi, Pi, ca, m, grid)
        k2p, k2q = _momentum_rhs(phi + 0.5 * h * k1p, Pi + 0.5 * h * k1q, cb, m, grid)
        k3p, k3q = _momentum_rhs(phi + 0.5 * h * k2p, Pi + 0.5 * h * k2q, cb, m, grid)
        k4p, k4q = _momentum_rhs(phi + h * k3p, Pi + h * k3q, cc, m, grid)
        phi = phi + (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        Pi = Pi + (h / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q)
        if not (np.isfinite(phi.real.sum()) and np.isfinite(Pi.real.sum())):
            raise BlowupError(f"solution blew up at t = {t + h:.6g}")
    return FieldState(phi, Pi / coef_at(t_end).b, float(t_end))


def evolve_series(state: FieldState, metric, m, grid, times) -> list[FieldState]:
    """States at each of ``times`` (sorted in the direction of travel), stepping sequentially."""
    out = []
    cur = state
    for t in times:
        cur = evolve(cur, metric, m, grid, t)
        out.append(cur)
    return out


def kg_inner_product(f: FieldState, h: FieldState, metric: MetricField, grid: GridSpec) -> complex:
    if abs(f.t - h.t) > 1e-12 * max(1.0, abs(f.t)):
        raise SliceError(f"states live on different slices: t = {f.t} and t = {h.t}")
    if f.phi.shape != grid.shape or h.phi.shape != grid.shape:
        raise SliceError("state shape does not match the grid")
    b = coefficients(metric, grid, f.t).b
    integrand = np.conj(f.phi) * (b * h.pi) - h.phi * np.conj(b * f.pi)
    return complex(1j * np.sum(integrand.ravel()) * grid.cell)


def kg_norm2(f: FieldState, metric, grid) -> float:
    return kg_inner_product(f, f, metric, grid).real


def conservation_drift(initial: FieldState, metric, m, grid, times) -> float:
    """Largest relative change of ``<f, f>`` over ``times``; zero for a zero field."""
    n0 = kg_inner_product(initial, initial, metric, grid)
    if n0 == 0:
        return 0.0
    drift = 0.0
    for state in evolve_series(initial, metric, m, grid, sorted(times)):
        n = kg_inner_product(state, state, metric, grid)
        drift = max(drift, abs(n - n0) / abs(n0))
    return float(drift)


def l2_distance(a: FieldState, b: FieldState, grid: GridSpec, relative: bool = True) -> float:
    """Discrete L2 distance of ``(phi, pi)`` pairs, relative to ``b`` if requested."""
    d = math.sqrt(float(np.sum(np.abs(a.phi - b.phi) ** 2) + np.sum(np.abs(a.pi - b.pi) ** 2)) * grid.cell)
    if not relative:
        return d
    ref = math.sqrt(float(np.sum(np.abs(b.phi) ** 2) + np.sum(np.abs(b.pi) ** 2)) * grid.cell)
    return d / ref if ref > 0 else d
