import math

import numpy as np
import pytest

from regularframe.errors import SliceError, StabilityError
from regularframe.kg import (
    FieldState,
    GridSpec,
    conservation_drift,
    evolve,
    kg_inner_product,
    kg_norm2,
    kg_rhs,
    l2_distance,
)
from regularframe.mass_shell import gaussian_packet, synthesize
from regularframe.metrics import FRW, Minkowski

FRW05 = FRW(eps=0.05, shape="tanh", t0=1.0, width=0.5)
TIMES = [0.5, 1.0, 1.5, 2.0]


def packet_state(grid, m=1.0, t=0.0):
    return synthesize(gaussian_packet(grid, m, 0.0, 2.0, 1.0), grid, t)


def plane_wave(grid, k, m, t=0.0):
    p = math.pi * k / grid.extent
    mu = math.sqrt(m * m + p * p)
    x = grid.points()[..., 0]
    phi = np.exp(-1j * (mu * t - p * x))
    return FieldState(phi, -1j * mu * phi, t), p, mu


def test_grid_rejects_large_dt():
    with pytest.raises(StabilityError):
        GridSpec(8.0, 64, dt=0.2)


def test_constant_field_rhs():
    grid = GridSpec(8.0, 32)
    st = FieldState(np.full(grid.shape, 2.0 + 0j), np.zeros(grid.shape), 0.0)
    _, dpi = kg_rhs(st, Minkowski(), 1.5, grid)
    assert np.max(np.abs(dpi + 1.5**2 * 2.0)) < 1e-13


def test_constant_field_rhs_frw():
    grid = GridSpec(8.0, 32)
    st = FieldState(np.full(grid.shape, 1.0 + 0j), np.zeros(grid.shape), 1.0)
    _, dpi = kg_rhs(st, FRW05, 0.7, grid)
    assert np.max(np.abs(dpi + 0.49)) < 1e-12


def test_frw_damping_term():
    grid = GridSpec(8.0, 32)
    st = FieldState(np.zeros(grid.shape), np.ones(grid.shape), 1.0)
    _, dpi = kg_rhs(st, FRW05, 0.0, grid)
    hubble = FRW05.scale_rate(1.0) / FRW05.scale(1.0)
    assert np.max(np.abs(dpi + 3 * hubble)) < 1e-8


def test_plane_wave_discrete_symbol():
    grid = GridSpec(8.0, 64)
    st, p, _ = plane_wave(grid, 3, 1.0)
    _, dpi = kg_rhs(st, Minkowski(), 1.0, grid)
    h = grid.h
    symbol = 4.0 / h**2 * math.sin(p * h / 2) ** 2
    assert np.max(np.abs(dpi + (symbol + 1.0) * st.phi)) < 1e-12
    assert np.max(np.abs(dpi + (p * p + 1.0) * st.phi)) <= p**4 * h**2 / 12 * 1.01


def test_oscillator():
    grid = GridSpec(16.0, 16)
    st = FieldState(np.ones(grid.shape), -1j * np.ones(grid.shape), 0.0)
    out = evolve(st, Minkowski(), 1.0, grid, 1.0, dt=1e-3)
    assert np.max(np.abs(out.phi - np.exp(-1j))) < 1e-8


def test_zero_state_stays_zero():
    grid = GridSpec(8.0, 32)
    out = evolve(FieldState.zeros(grid), FRW05, 1.0, grid, 2.0)
    assert not np.any(out.phi) and not np.any(out.pi)


def test_solution_converges_at_second_order():
    errs = []
    for n in (64, 128, 256):
        grid = GridSpec(16.0, n)
        F = gaussian_packet(grid, 1.0, 0.0, 2.0, 1.0)
        out = evolve(synthesize(F, grid, 0.0), Minkowski(), 1.0, grid, 2.0)
        errs.append(l2_distance(out, synthesize(F, grid, 2.0), grid))
    orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    assert all(1.8 < o < 2.3 for o in orders), orders


def test_backward_evolution_returns():
    grid = GridSpec(16.0, 128)
    st = packet_state(grid)
    back = evolve(evolve(st, FRW05, 1.0, grid, 2.0), FRW05, 1.0, grid, 0.0)
    assert back.t == 0.0
    assert l2_distance(back, st, grid) < 1e-6


def test_inner_product_of_plane_waves():
    grid = GridSpec(8.0, 64)
    f, _, mu = plane_wave(grid, 2, 1.0)
    g, _, _ = plane_wave(grid, 5, 1.0)
    V = grid.volume
    assert kg_inner_product(f, f, Minkowski(), grid) == pytest.approx(2 * mu * V, rel=1e-13)
    assert abs(kg_inner_product(f, g, Minkowski(), grid)) < 1e-12 * V


def test_norm_is_real(rng):
    grid = GridSpec(8.0, 32)
    st = FieldState(rng.standard_normal(32) + 1j * rng.standard_normal(32),
                    rng.standard_normal(32) + 1j * rng.standard_normal(32), 0.0)
    ip = kg_inner_product(st, st, FRW05, grid)
    assert abs(ip.imag) < 1e-12 * abs(ip)


def test_inner_product_is_hermitian(rng):
    grid = GridSpec(8.0, 32)
    a = FieldState(rng.standard_normal(32) + 1j * rng.standard_normal(32), rng.standard_normal(32), 0.0)
    b = FieldState(rng.standard_normal(32), rng.standard_normal(32) + 1j * rng.standard_normal(32), 0.0)
    assert kg_inner_product(a, b, Minkowski(), grid) == pytest.approx(np.conj(kg_inner_product(b, a, Minkowski(), grid)))


def test_slice_mismatch():
    grid = GridSpec(8.0, 32)
    with pytest.raises(SliceError):
        kg_inner_product(FieldState.zeros(grid, 0.0), FieldState.zeros(grid, 1.0), Minkowski(), grid)


def test_minkowski_drift_below_threshold():
    grid = GridSpec(16.0, 256)
    assert conservation_drift(packet_state(grid), Minkowski(), 1.0, grid, TIMES) < 1e-6


def test_frw_drift_small_and_decreasing():
    drifts = []
    for n in (64, 128, 256):
        grid = GridSpec(16.0, n)
        drifts.append(conservation_drift(packet_state(grid), FRW05, 1.0, grid, TIMES))
    assert drifts[-1] < 1e-4
    assert drifts[0] > drifts[1] > drifts[2]


def test_zero_field_drift_is_zero():
    grid = GridSpec(8.0, 32)
    assert conservation_drift(FieldState.zeros(grid), Minkowski(), 1.0, grid, TIMES) == 0.0


def test_three_dimensional_conservation():
    grid = GridSpec(6.0, 16, dim=3)
    F = gaussian_packet(grid, 1.0, (0.0, 0.0, 0.0), 1.5, (0.5, 0.0, 0.0))
    st = synthesize(F, grid, 0.0)
    coarse = conservation_drift(st, FRW05, 1.0, grid, [1.0, 2.0])
    fine_grid = GridSpec(6.0, 16, dim=3, dt=grid.dt / 2)
    fine = conservation_drift(st, FRW05, 1.0, fine_grid, [1.0, 2.0])
    assert coarse < 1e-4
    # only the time integrator breaks conservation: fourth order in dt
    assert coarse / fine > 12.0
    assert kg_norm2(st, Minkowski(), grid) == pytest.approx(F.norm() ** 2, rel=1e-12)
