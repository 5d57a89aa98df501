"""NumPy reference implementations of the hot numerical kernels.

The compiled twin (migcon._cykernels) mirrors this module function for
function with identical arithmetic: same Jacobi preconditioner, same
stopping rule (two-norm of the residual against the right-hand side), same
iteration structure.  Results therefore agree to rounding between backends,
though not bitwise.

Shapes: 1D fields are (n,) float64 arrays, 2D fields are C-contiguous
(nx, ny) float64 arrays.  The Laplacian uses reflected ghost cells, which
encode the no-flux boundary and make every row sum exactly zero.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def lap_1d(f, inv_h2, out=None):
    if out is None:
        out = np.empty_like(f)
    out[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) * inv_h2
    out[0] = (f[1] - f[0]) * inv_h2
    out[-1] = (f[-2] - f[-1]) * inv_h2
    return out


def lap_2d(f, inv_hx2, inv_hy2, out=None):
    if out is None:
        out = np.empty_like(f)
    out[1:-1, :] = (f[2:, :] - 2.0 * f[1:-1, :] + f[:-2, :]) * inv_hx2
    out[0, :] = (f[1, :] - f[0, :]) * inv_hx2
    out[-1, :] = (f[-2, :] - f[-1, :]) * inv_hx2
    out[:, 1:-1] += (f[:, 2:] - 2.0 * f[:, 1:-1] + f[:, :-2]) * inv_hy2
    out[:, 0] += (f[:, 1] - f[:, 0]) * inv_hy2
    out[:, -1] += (f[:, -2] - f[:, -1]) * inv_hy2
    return out


def _pcg(apply_a, b, x0, mdiag, tol, maxiter, project):
    """Preconditioned CG on A x = b, A symmetric positive (semi)definite.

    With project=True the solve runs on the zero-mean subspace: the residual
    is re-centered every iteration and the final iterate is centered, which
    keeps rounding drift out of the constant kernel direction.
    """
    nb = float(np.linalg.norm(b))
    if nb == 0.0:
        return np.zeros_like(b), 0, 0.0
    if x0 is None:
        x = np.zeros_like(b)
        r = b.copy()
    else:
        x = np.array(x0, dtype=np.float64, copy=True)
        r = b - apply_a(x)
    if project:
        r -= r.mean()
    z = r / mdiag
    p = z.copy()
    rz = float(np.vdot(r, z))
    rnorm = float(np.linalg.norm(r))
    it = 0
    while rnorm > tol * nb and it < maxiter:
        ap = apply_a(p)
        pap = float(np.vdot(p, ap))
        if pap <= 0.0:
            break
        step = rz / pap
        x += step * p
        r -= step * ap
        if project:
            r -= r.mean()
        z = r / mdiag
        rz_new = float(np.vdot(r, z))
        p *= rz_new / rz
        p += z
        rz = rz_new
        rnorm = float(np.linalg.norm(r))
        it += 1
    if project:
        x -= x.mean()
    return x, it, rnorm / nb


def cg_spd_1d(diag, dt, inv_h2, rhs, x0, mdiag, tol, maxiter):
    def apply_a(p):
        return diag * p - dt * lap_1d(p, inv_h2)

    return _pcg(apply_a, rhs, x0, mdiag, tol, maxiter, project=False)


def cg_spd_2d(diag, dt, inv_hx2, inv_hy2, rhs, x0, mdiag, tol, maxiter):
    def apply_a(p):
        return diag * p - dt * lap_2d(p, inv_hx2, inv_hy2)

    return _pcg(apply_a, rhs, x0, mdiag, tol, maxiter, project=False)


def cg_poisson_1d(rhs, inv_h2, mdiag, tol, maxiter):
    def apply_a(p):
        return -lap_1d(p, inv_h2)

    return _pcg(apply_a, rhs, None, mdiag, tol, maxiter, project=True)


def cg_poisson_2d(rhs, inv_hx2, inv_hy2, mdiag, tol, maxiter):
    def apply_a(p):
        return -lap_2d(p, inv_hx2, inv_hy2)

    return _pcg(apply_a, rhs, None, mdiag, tol, maxiter, project=True)
