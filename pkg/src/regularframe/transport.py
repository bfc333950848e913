"""Transport of flat-era positive-frequency data into a curved era.

Data synthesized at ``t_start`` (where the blended metric is Minkowskian) is
evolved under the blended metric to ``t_end`` (where it equals the base
metric). The transport map is certified on a finite packet family: its Gram
matrix before and after, a backward round trip, and linearity.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError
from .interpolation import InterpolatedMetric, TransitionFunction
from .kg import FieldState, GridSpec, evolve, kg_inner_product, l2_distance
from .mass_shell import MassShellVector, gaussian_packet, synthesize
from .metrics import MetricField, Minkowski

BOUNDARY_FRACTION = 1e-8


@dataclass
class TransportScenario:
    base: MetricField
    t1: float
    t2: float
    grid: GridSpec
    m: float
    basis: list[MassShellVector]
    t_start: float
    t_end: float

    def __post_init__(self):
        if not self.t_start <= self.t1 < self.t2 <= self.t_end:
            raise ConfigError("need t_start <= t1 < t2 <= t_end")
        self.transition = TransitionFunction(self.t1, self.t2)
        self.blended = InterpolatedMetric(self.base, self.transition)

    def with_grid(self, grid: GridSpec, basis: list[MassShellVector]) -> "TransportScenario":
        return replace(self, grid=grid, basis=basis)


def packet_family(grid: GridSpec, m: float, k: int = 5, width: float = 1.5,
                  centers=None, momenta=None) -> list[MassShellVector]:
    """``k`` Gaussian packets spread in position and mean momentum."""
    if centers is None:
        centers = np.linspace(-4.0, 4.0, k)
    if momenta is None:
        momenta = np.linspace(-1.0, 1.0, k)
    return [gaussian_packet(grid, m, c, width, p) for c, p in zip(centers, momenta)]


def boundary_ratio(state: FieldState) -> float:
    """Largest field magnitude on the outer cells relative to the peak."""
    a = np.abs(state.phi)
    peak = a.max()
    if peak == 0:
        return 0.0
    edge = max(float(np.take(a, [0, 1, -2, -1], axis=ax).max()) for ax in range(a.ndim))
    return edge / peak


def initial_state(F: MassShellVector, sc: TransportScenario) -> FieldState:
    return synthesize(F, sc.grid, sc.t_start)


def transport_forward(F: MassShellVector, sc: TransportScenario) -> FieldState:
    return evolve(initial_state(F, sc), sc.blended, F.m, sc.grid, sc.t_end)


def transport_state(state: FieldState, sc: TransportScenario, t_target: float | None = None) -> FieldState:
    """Continue evolving an arbitrary slice under the blended metric."""
    return evolve(state, sc.blended, sc.m, sc.grid, sc.t_end if t_target is None else t_target)


def gram(states, metric: MetricField, grid: GridSpec) -> np.ndarray:
    k = len(states)
    out = np.empty((k, k), dtype=np.complex128)
    for i in range(k):
        for j in range(i, k):
            out[i, j] = kg_inner_product(states[i], states[j], metric, grid)
            out[j, i] = np.conj(out[i, j])
    return out


@dataclass
class GramResult:
    before: np.ndarray
    after: np.ndarray
    boundary: float

    @property
    def defect(self) -> float:
        return float(np.max(np.abs(self.before - self.after)))


def gram_matrix(sc: TransportScenario) -> GramResult:
    if len(sc.basis) < 2:
        raise ConfigError("Gram certificate needs at least two basis packets")
    starts = [initial_state(F, sc) for F in sc.basis]
    ends = [evolve(s, sc.blended, sc.m, sc.grid, sc.t_end) for s in starts]
    before = gram(starts, Minkowski(), sc.grid)
    after = gram(ends, sc.base, sc.grid)
    boundary = max(boundary_ratio(s) for s in starts + ends)
    return GramResult(before, after, boundary)


def round_trip(F: MassShellVector, sc: TransportScenario, dt: float | None = None) -> float:
    """Forward to ``t_end`` and back; relative L2 error against the synthesized start."""
    start = initial_state(F, sc)
    fwd = evolve(start, sc.blended, F.m, sc.grid, sc.t_end, dt=dt)
    back = evolve(fwd, sc.blended, F.m, sc.grid, sc.t_start, dt=dt)
    return l2_distance(back, start, sc.grid)


def refinement_study(sc: TransportScenario, levels: int = 3, basis_factory=None) -> list[dict]:
    """Gram defect on ``levels`` grids, doubling ``n`` and halving ``dt`` from ``sc.grid``.

    ``basis_factory(grid)`` rebuilds the packet family on each grid; by default
    the standard :func:`packet_family` with ``len(sc.basis)`` members.
    """
    if basis_factory is None:
        basis_factory = lambda g: packet_family(g, sc.m, k=len(sc.basis))
    rows = []
    grid = sc.grid
    for _ in range(levels):
        res = gram_matrix(sc.with_grid(grid, basis_factory(grid)))
        rows.append({"n": grid.n, "h": grid.h, "dt": grid.dt, "defect": res.defect, "boundary": res.boundary})
        grid = grid.refine(2)
    return rows
