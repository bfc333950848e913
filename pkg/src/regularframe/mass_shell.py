"""Mass shell, its invariant measure, and the maps onto flat positive-frequency solutions.

Momentum lattices are the Fourier duals of periodic grids, ``p_k = pi k / L``.
A :class:`MassShellVector` stores ``F(j_m(p_k))``; its squared norm is
``sum |F_k|^2 dp / mu_k`` with ``mu_k = sqrt(m^2 + p_k^2)``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import LatticeError, QuadratureError
from .kg import FieldState, GridSpec

COMMENSURATE_TOL = 1e-9


def synthesis_constant(dim: int) -> float:
    """Overall factor of the synthesis map; makes it an isometry onto the KG product.

    A single plane wave of amplitude ``c dp F / mu`` has KG norm
    ``2 c^2 dp^2 V |F|^2 / mu``; matching ``|F|^2 dp / mu`` with
    ``V dp = (2 pi)^dim`` fixes ``c = (2 pi)^(-dim/2) / sqrt(2)``.
    """
    return (2.0 * math.pi) ** (-dim / 2.0) / math.sqrt(2.0)


def shell_embed(p, m: float) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    p0 = np.sqrt(m * m + np.sum(p * p, axis=-1))
    return np.concatenate([np.asarray(p0)[..., None], p], axis=-1)


def energies(momenta, m: float) -> np.ndarray:
    momenta = np.asarray(momenta, dtype=float)
    return np.sqrt(m * m + np.sum(momenta * momenta, axis=-1))


@dataclass
class MassShellVector:
    m: float
    momenta: np.ndarray   # (K, 3)
    values: np.ndarray    # (K,) complex
    dp: float

    def __post_init__(self):
        self.momenta = np.asarray(self.momenta, dtype=float).reshape(-1, 3)
        self.values = np.asarray(self.values, dtype=np.complex128).reshape(-1)
        if len(self.values) != len(self.momenta):
            raise LatticeError("one value per lattice momentum required")
        if self.m == 0 and np.any(np.all(self.momenta == 0.0, axis=-1)):
            raise LatticeError("massless lattice must exclude p = 0")

    @property
    def weights(self) -> np.ndarray:
        return 1.0 / energies(self.momenta, self.m)

    def inner(self, other: "MassShellVector") -> complex:
        if other.m != self.m or not np.array_equal(other.momenta, self.momenta):
            raise LatticeError("vectors live on different lattices")
        return complex(np.sum(np.conj(self.values) * other.values * self.weights) * self.dp)

    def norm(self) -> float:
        return math.sqrt(max(self.inner(self).real, 0.0))

    def scaled(self, c) -> "MassShellVector":
        return MassShellVector(self.m, self.momenta, c * self.values, self.dp)

    def __add__(self, other):
        if other.m != self.m or not np.array_equal(other.momenta, self.momenta):
            raise LatticeError("vectors live on different lattices")
        return MassShellVector(self.m, self.momenta, self.values + other.values, self.dp)


# ---- measure ------------------------------------------------------------

@dataclass(frozen=True)
class Box:
    lo: tuple[float, float, float]
    hi: tuple[float, float, float]

    @property
    def empty(self) -> bool:
        return any(h <= l for l, h in zip(self.lo, self.hi))


@dataclass(frozen=True)
class Ball:
    radius: float


def shell_measure(region, m: float, tol: float = 1e-8) -> float:
    """``mu_m(j_m(B)) = int_B d^3p / sqrt(m^2 + p^2)`` by adaptive quadrature."""
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            return _shell_measure(region, m, tol)
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(f"quadrature did not converge: {str(exc).splitlines()[0]}") from None


def _shell_measure(region, m, tol):
    if isinstance(region, Ball):
        if region.radius <= 0:
            return 0.0
        val, err = integrate.quad(lambda r: 4.0 * math.pi * r * r / math.sqrt(m * m + r * r),
                                  0.0, region.radius, epsabs=tol, epsrel=0.0, limit=200)
    else:
        if region.empty:
            return 0.0

        def density(p3, p2, p1):
            return 1.0 / math.sqrt(m * m + p1 * p1 + p2 * p2 + p3 * p3)

        (a1, a2, a3), (b1, b2, b3) = region.lo, region.hi
        opts = {"epsabs": tol / 10.0, "epsrel": 0.0, "limit": 200}
        val, err = integrate.nquad(density, [(a3, b3), (a2, b2), (a1, b1)], opts=[opts] * 3)
    if not np.isfinite(val) or err > tol:
        raise QuadratureError(f"quadrature error estimate {err:.3e} exceeds {tol:.1e}")
    return float(val)


# ---- L2(R^3) <-> L2(H_m, mu_m) --------------------------------------------

def l2_norm(values, dp: float) -> float:
    return math.sqrt(float(np.sum(np.abs(values) ** 2)) * dp)


def j_transform(values, momenta, m: float, dp: float) -> MassShellVector:
    """``(J f)(j_m(p)) = (m^2 + p^2)^(1/4) f(p)``; isometric by weight cancellation."""
    momenta = np.asarray(momenta, dtype=float).reshape(-1, 3)
    mu = energies(momenta, m)
    if np.any(mu == 0.0):
        raise LatticeError("weight is singular at p = 0 for m = 0; exclude the origin")
    return MassShellVector(m, momenta, np.sqrt(mu) * np.asarray(values, dtype=np.complex128), dp)


def inverse_j_transform(F: MassShellVector) -> np.ndarray:
    return F.values / np.sqrt(energies(F.momenta, F.m))


# ---- lattices and synthesis -------------------------------------------------

def dual_lattice(grid: GridSpec, m: float) -> tuple[np.ndarray, float]:
    """Grid-dual momenta (``k`` in ``[-n/2, n/2)`` per active axis) and the cell volume."""
    ks = np.arange(-grid.n // 2, grid.n // 2)
    step = math.pi / grid.extent
    if grid.dim == 1:
        momenta = np.zeros((len(ks), 3))
        momenta[:, 0] = ks * step
    else:
        K = np.stack(np.meshgrid(ks, ks, ks, indexing="ij"), axis=-1).reshape(-1, 3)
        momenta = K * step
    if m == 0:
        momenta = momenta[np.any(momenta != 0.0, axis=-1)]
    return momenta, step**grid.dim


def lattice_indices(momenta, grid: GridSpec) -> np.ndarray:
    """Integer dual-lattice indices of ``momenta``; raises if incommensurate."""
    momenta = np.asarray(momenta, dtype=float).reshape(-1, 3)
    k = momenta * grid.extent / math.pi
    kr = np.rint(k)
    if np.any(np.abs(k - kr) > COMMENSURATE_TOL):
        raise LatticeError("momenta are not commensurate with the periodic grid")
    kr = kr.astype(int)
    if grid.dim == 1 and np.any(kr[:, 1:] != 0):
        raise LatticeError("1D grid accepts momenta along the first axis only")
    active = kr[:, : grid.dim]
    if np.any(active < -(grid.n // 2)) or np.any(active >= grid.n - grid.n // 2):
        raise LatticeError("momenta exceed the grid Nyquist range")
    if len({tuple(r) for r in active}) != len(active):
        raise LatticeError("duplicate lattice momenta")
    return active


def synthesize(F: MassShellVector, grid: GridSpec, t: float) -> FieldState:
    """Positive-frequency solution ``c sum_k dp w_k F_k exp(-i(mu_k t - p_k x))`` and its time derivative."""
    idx = lattice_indices(F.momenta, grid)
    mu = energies(F.momenta, F.m)
    c = synthesis_constant(grid.dim)
    coeff = c * F.dp * F.values / mu * np.exp(-1j * mu * t)
    # x_j = -L + j h, so exp(i p_k x_j) = (-1)^k exp(2 pi i k j / n)
    sign = np.where(np.sum(idx, axis=-1) % 2 == 0, 1.0, -1.0)
    D = np.zeros(grid.shape, dtype=np.complex128)
    Dt = np.zeros(grid.shape, dtype=np.complex128)
    pos = tuple((idx % grid.n).T)
    D[pos] = sign * coeff
    Dt[pos] = sign * coeff * (-1j * mu)
    scale = grid.n**grid.dim
    return FieldState(np.fft.ifftn(D) * scale, np.fft.ifftn(Dt) * scale, float(t))


def gaussian_packet(grid: GridSpec, m: float, center=0.0, width=1.0, p0=0.0, amplitude=1.0) -> MassShellVector:
    """``J_m`` of a Gaussian momentum profile; the position-space packet sits at ``center``.

    The underlying ``L2(R^3)`` profile is normalized to ``amplitude``.
    """
    momenta, dp = dual_lattice(grid, m)
    c = np.zeros(3)
    q = np.zeros(3)
    c[: np.size(center)] = np.atleast_1d(center)
    q[: np.size(p0)] = np.atleast_1d(p0)
    d = momenta - q
    f = np.exp(-0.5 * width**2 * np.sum(d * d, axis=-1) - 1j * momenta @ c)
    f *= amplitude / l2_norm(f, dp)
    return j_transform(f, momenta, m, dp)


def mode_vector(grid: GridSpec, m: float, modes) -> MassShellVector:
    """Vector supported on explicit modes ``[{"p": [...], "amp": [re, im]}, ...]``."""
    momenta = np.zeros((len(modes), 3))
    values = np.zeros(len(modes), dtype=np.complex128)
    for i, mode in enumerate(modes):
        p = np.atleast_1d(np.asarray(mode["p"], dtype=float))
        momenta[i, : len(p)] = p
        amp = mode.get("amp", [1.0, 0.0])
        values[i] = complex(amp[0], amp[1] if len(amp) > 1 else 0.0)
    return MassShellVector(m, momenta, values, (math.pi / grid.extent) ** grid.dim)


def packet_from_spec(spec: dict, grid: GridSpec, m: float) -> MassShellVector:
    if "modes" in spec:
        return mode_vector(grid, spec.get("m", m), spec["modes"])
    return gaussian_packet(grid, spec.get("m", m), spec.get("center", 0.0), spec.get("width", 1.0),
                           spec.get("p0", 0.0), spec.get("amplitude", 1.0))
