"""Pointwise Lorentzian linear algebra.

The batched helpers (suffix ``_batch``) never raise on bad points; they
return masks instead, so grid code can decide what to do. The scalar
wrappers enforce the preconditions and raise.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NotGloballyHyperbolicHereError, SignatureError, SingularMetricError
from .metrics import MetricField, SpacetimePoint

DET_TOL = 1e-10


@dataclass(frozen=True)
class BlockForm:
    lapse2: float
    spatial: np.ndarray


@dataclass(frozen=True)
class FrameBasis:
    m0: np.ndarray
    e1: np.ndarray = field(default_factory=lambda: np.eye(4)[1])
    e2: np.ndarray = field(default_factory=lambda: np.eye(4)[2])
    e3: np.ndarray = field(default_factory=lambda: np.eye(4)[3])

    def matrix(self) -> np.ndarray:
        """Frame vectors as columns."""
        return np.column_stack([self.m0, self.e1, self.e2, self.e3])

    def is_independent(self, tol: float = DET_TOL) -> bool:
        return abs(np.linalg.det(self.matrix())) > tol


def normal_vector_batch(g: np.ndarray) -> np.ndarray:
    """``n^mu = (g^{-1})^{mu 0}`` for every matrix in the batch."""
    return np.linalg.inv(g)[..., :, 0]


def normal_vector(g_p) -> np.ndarray:
    g_p = np.asarray(g_p, dtype=float)
    det = np.linalg.det(g_p)
    if not np.isfinite(det) or abs(det) < DET_TOL * max(1.0, np.max(np.abs(g_p))) ** 4:
        raise SingularMetricError(f"metric matrix is singular (det = {det:.3e})")
    try:
        return normal_vector_batch(g_p)
    except np.linalg.LinAlgError as exc:
        raise SingularMetricError(str(exc)) from exc


def frame_matrix(g_p) -> np.ndarray:
    """Columns ``{n, E1, E2, E3}``; the congruence ``M^T g M`` is block diagonal."""
    m = np.eye(4)
    m[:, 0] = normal_vector(g_p)
    return m


def block_decompose_batch(g: np.ndarray):
    """Return ``(lapse2, spatial, spatial_spd)`` for a batch of metrics."""
    n = normal_vector_batch(g)
    lapse2 = np.einsum("...i,...ij,...j->...", n, g, n)
    spatial = g[..., 1:, 1:].copy()
    spd = np.all(np.linalg.eigvalsh(spatial) > 0.0, axis=-1)
    return lapse2, spatial, spd


def block_decompose(g_p) -> BlockForm:
    g_p = np.asarray(g_p, dtype=float)
    n = normal_vector(g_p)
    lapse2 = float(n @ g_p @ n)
    if not lapse2 < 0.0:
        raise NotGloballyHyperbolicHereError(f"g(n, n) = {lapse2:.6g} is not negative")
    spatial = g_p[1:, 1:].copy()
    if np.min(np.linalg.eigvalsh(spatial)) <= 0.0:
        raise SignatureError("spatial block is not positive definite")
    return BlockForm(lapse2, spatial)


def _fix_signs(q: np.ndarray) -> np.ndarray:
    # first component with |v| above noise made positive, per eigenvector column
    mag = np.abs(q)
    idx = np.argmax(mag > 1e-12 * np.max(mag, axis=-2, keepdims=True), axis=-2)
    lead = np.take_along_axis(q, idx[..., None, :], axis=-2)
    return q * np.where(lead < 0, -1.0, 1.0)


def spd_power_batch(G: np.ndarray, s) -> np.ndarray:
    """``G**s`` via the symmetric eigendecomposition, batched over leading axes.

    ``s`` broadcasts against the batch shape. Exponents exactly 0 and 1
    return the identity and ``G`` itself.
    """
    G = np.asarray(G, dtype=float)
    s = np.broadcast_to(np.asarray(s, dtype=float), G.shape[:-2])
    lam, q = np.linalg.eigh(G)
    q = _fix_signs(q)
    powered = np.power(lam, s[..., None])
    out = np.einsum("...ik,...k,...jk->...ij", q, powered, q)
    out = 0.5 * (out + np.swapaxes(out, -1, -2))
    eye = np.broadcast_to(np.eye(G.shape[-1]), G.shape)
    out = np.where((s == 0.0)[..., None, None], eye, out)
    out = np.where((s == 1.0)[..., None, None], G, out)
    return out


def spd_power(G, s: float) -> np.ndarray:
    G = np.asarray(G, dtype=float)
    if not np.allclose(G, G.T, rtol=0.0, atol=1e-14 * max(1.0, np.max(np.abs(G)))):
        raise SignatureError("matrix is not symmetric")
    if np.min(np.linalg.eigvalsh(G)) <= 0.0:
        raise SignatureError("matrix is not positive definite")
    if not 0.0 <= s <= 1.0:
        raise ValueError("exponent must lie in [0, 1]")
    return spd_power_batch(G, s)


def negative_eigen_count(g: np.ndarray) -> np.ndarray:
    return np.sum(np.linalg.eigvalsh(g) < 0.0, axis=-1)


@dataclass
class RegularityReport:
    points: np.ndarray
    lorentzian: np.ndarray
    lapse_negative: np.ndarray
    spatial_spd: np.ndarray
    lapse_margin: np.ndarray

    @property
    def point_pass(self) -> np.ndarray:
        return self.lorentzian & self.lapse_negative & self.spatial_spd

    @property
    def passed(self) -> bool:
        return bool(np.all(self.point_pass))

    def failures(self) -> list[str]:
        reasons = []
        if not np.all(self.lorentzian):
            reasons.append("signature")
        if not np.all(self.lapse_negative):
            reasons.append("lapse2 >= 0")
        if not np.all(self.spatial_spd):
            reasons.append("spatial block not positive definite")
        return reasons

    def summary(self) -> dict:
        return {
            "n_points": int(len(self.points)),
            "passed": self.passed,
            "failures": self.failures(),
            "n_failing": int(np.sum(~self.point_pass)),
            "min_lapse_margin": float(np.min(self.lapse_margin)),
        }


def check_regular_points(g: np.ndarray, points: np.ndarray) -> RegularityReport:
    """Diagnostics from already-evaluated metrics ``g`` at ``points``."""
    lorentzian = negative_eigen_count(g) == 1
    with np.errstate(all="ignore"):
        try:
            lapse2, _, spd = block_decompose_batch(g)
        except np.linalg.LinAlgError:
            lapse2 = np.full(len(g), np.nan)
            spd = np.zeros(len(g), dtype=bool)
    lapse_neg = np.nan_to_num(lapse2, nan=1.0) < 0.0
    return RegularityReport(np.asarray(points), lorentzian, lapse_neg, spd, -np.nan_to_num(lapse2, nan=0.0))


def check_regular(field: MetricField, sample) -> RegularityReport:
    """Per-point regularity diagnostics; the field passes only if every point does.

    ``sample`` is a list of :class:`SpacetimePoint` or an ``(N, 4)`` array.
    """
    if isinstance(sample, (list, tuple)) and sample and isinstance(sample[0], SpacetimePoint):
        pts = np.array([p.as_array() for p in sample])
    else:
        pts = np.asarray(sample, dtype=float).reshape(-1, 4)
    if len(pts) == 0:
        raise ValueError("sample must be nonempty")
    g = field.evaluate_points(pts)
    return check_regular_points(g, pts)
