import os

import numpy as np
import pytest

from regularframe import _kernels_py, kernels

try:
    from regularframe import _kernels
except ImportError:
    _kernels = None

needs_ext = pytest.mark.skipif(_kernels is None, reason="compiled extension not built")


def inputs(shape, rng):
    c = lambda: rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    r = lambda: 1.0 + rng.random(shape)
    return c(), c(), r(), r(), [r() for _ in shape], 3.7


@pytest.mark.parametrize("shape", [(40,), (8, 9, 10)])
def test_fallback_matches_explicit_loop(shape, rng):
    phi, _, _, _, faces, inv_h2 = inputs(shape, rng)
    out = _kernels_py.div_grad(phi, faces, inv_h2)
    ref = np.zeros_like(phi)
    for idx in np.ndindex(*shape):
        acc = 0
        for ax in range(len(shape)):
            up = list(idx); up[ax] = (idx[ax] + 1) % shape[ax]
            dn = list(idx); dn[ax] = (idx[ax] - 1) % shape[ax]
            acc += faces[ax][idx] * (phi[tuple(up)] - phi[idx]) - faces[ax][tuple(dn)] * (phi[idx] - phi[tuple(dn)])
        ref[idx] = acc * inv_h2
    assert np.max(np.abs(out - ref)) < 1e-12


@needs_ext
@pytest.mark.parametrize("shape", [(64,), (12, 12, 12)])
def test_backends_agree(shape, rng):
    args = inputs(shape, rng)
    a = _kernels_py.kg_momentum_rhs(*args)
    b = _kernels.kg_momentum_rhs(*args)
    for x, y in zip(a, b):
        assert np.max(np.abs(x - y)) < 1e-12


def test_conservative_stencil_sums_to_zero(rng):
    phi, _, _, _, faces, inv_h2 = inputs((8, 8, 8), rng)
    assert abs(kernels.div_grad(phi, faces, inv_h2).sum()) < 1e-10


def test_backend_name():
    assert kernels.BACKEND in ("cython", "python")
    forced = os.environ.get("REGULARFRAME_PURE", "") in ("1", "true", "yes")
    assert kernels.BACKEND == ("cython" if _kernels is not None and not forced else "python")


def test_rejects_2d(rng):
    with pytest.raises(ValueError):
        kernels.div_grad(np.zeros((4, 4), complex), [np.ones((4, 4))] * 2, 1.0)
