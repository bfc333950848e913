"""Pure-numpy fallback for the compiled stencils in ``_kernels``."""
import numpy as np


def div_grad(phi, faces, inv_h2):
    phi = np.asarray(phi, dtype=np.complex128)
    if phi.ndim not in (1, 3):
        raise ValueError("only 1D and 3D grids are supported")
    out = np.zeros_like(phi)
    for axis in range(phi.ndim):
        flux = faces[axis] * (np.roll(phi, -1, axis) - phi)
        out += flux - np.roll(flux, 1, axis)
    return out * inv_h2


def kg_momentum_rhs(phi, Pi, inv_b, s_m2, faces, inv_h2):
    """Return ``(Pi / B, div(A grad phi) - sqrt|g| m^2 phi)`` on a periodic grid."""
    return Pi * inv_b, div_grad(phi, faces, inv_h2) - s_m2 * phi
