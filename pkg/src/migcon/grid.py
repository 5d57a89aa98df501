"""Cell-centered finite-volume geometry on an interval or a rectangle.

No-flux boundaries are encoded by reflected ghost cells.  That choice makes
the discrete Laplacian symmetric with exactly zero row sums, so constants
lie in its kernel, summation against the cell volumes telescopes to zero,
and the face-based quadratures below are the matching discrete Dirichlet
forms.  Interior faces carry the quadrature weight h * facearea, i.e. one
cell volume per face; boundary faces carry flux zero and are not stored.

Two linear solves are provided: an SPD solve for backward-Euler steps of
the form (diag(d) - dt * L) x = rhs, and a zero-mean Neumann Poisson solve
-L psi = rhs used for the duality (H^-1-type) functional.  Both run
Jacobi-preconditioned conjugate gradients through the selected kernel
backend.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels


class SolverFailure(RuntimeError):
    """An iterative solve stopped short of the requested residual."""

    def __init__(self, message: str, relres: float = float("nan"),
                 iterations: int = -1):
        super().__init__(message)
        self.relres = relres
        self.iterations = iterations


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centered grid on (0, L1) or (0, L1) x (0, L2).

    Parameters
    ----------
    lengths : tuple of float
        Domain extent per axis, all positive.
    cells : tuple of int
        Cell count per axis, all at least 2.
    """

    lengths: tuple[float, ...]
    cells: tuple[int, ...]

    def __post_init__(self):
        if len(self.lengths) != len(self.cells):
            raise ValueError("lengths and cells must have equal rank")
        if len(self.cells) not in (1, 2):
            raise ValueError("only 1D and 2D grids are supported")
        if any(n < 2 for n in self.cells):
            raise ValueError("need at least 2 cells per axis")
        if any(not (length > 0.0) for length in self.lengths):
            raise ValueError("axis lengths must be positive")
        object.__setattr__(self, "lengths", tuple(float(x) for x in self.lengths))
        object.__setattr__(self, "cells", tuple(int(n) for n in self.cells))

    @property
    def dim(self) -> int:
        return len(self.cells)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.cells

    @property
    def size(self) -> int:
        return int(np.prod(self.cells))

    @property
    def h(self) -> tuple[float, ...]:
        return tuple(length / n for length, n in zip(self.lengths, self.cells))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.h))

    @property
    def volume(self) -> float:
        return float(np.prod(self.lengths))

    def centers(self, axis: int = 0) -> np.ndarray:
        h = self.h[axis]
        return (np.arange(self.cells[axis]) + 0.5) * h

    def meshes(self) -> tuple[np.ndarray, ...]:
        """Cell-center coordinate arrays, each shaped like a field."""
        axes = [self.centers(k) for k in range(self.dim)]
        if self.dim == 1:
            return (axes[0],)
        return tuple(np.meshgrid(*axes, indexing="ij"))

    def field(self, values) -> "Field":
        return Field(self, values)

    def full(self, value: float) -> "Field":
        return Field(self, np.full(self.shape, float(value)))

    def zeros(self) -> "Field":
        return Field(self, np.zeros(self.shape))

    def from_function(self, fn) -> "Field":
        return Field(self, fn(*self.meshes()))


class Field:
    """Immutable cell-centered scalar field bound to a grid.

    Values are float64, shaped like the grid, finite everywhere; the
    underlying array is write-locked so downstream code cannot mutate a
    recorded state in place.
    """

    __slots__ = ("grid", "values")

    def __init__(self, grid: Grid, values):
        arr = np.ascontiguousarray(values, dtype=np.float64)
        if arr.shape != grid.shape:
            raise ValueError(f"field shape {arr.shape} does not match grid "
                             f"shape {grid.shape}")
        if not np.isfinite(arr).all():
            raise ValueError("field contains non-finite entries")
        arr.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Field is immutable")

    def copy_values(self) -> np.ndarray:
        return np.array(self.values, copy=True)


@dataclass(frozen=True)
class FaceField:
    """Per-axis interior-face values; boundary faces are identically zero
    (no-flux) and are not stored."""

    grid: Grid
    axes: tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.axes) != self.grid.dim:
            raise ValueError("one face array per axis required")
        for k, arr in enumerate(self.axes):
            expect = list(self.grid.shape)
            expect[k] -= 1
            if arr.shape != tuple(expect):
                raise ValueError(f"axis {k} face array has shape {arr.shape},"
                                 f" expected {tuple(expect)}")


def _check_field(grid: Grid, f: Field, name: str = "field"):
    if f.grid is not grid and f.grid != grid:
        raise ValueError(f"{name} belongs to a different grid")


def laplacian_apply(grid: Grid, f: Field) -> Field:
    """Apply the reflected-ghost Laplacian; exact zero row sums."""
    _check_field(grid, f)
    h = grid.h
    if grid.dim == 1:
        out = kernels.lap_1d(f.values, 1.0 / h[0] ** 2)
    else:
        out = kernels.lap_2d(f.values, 1.0 / h[0] ** 2, 1.0 / h[1] ** 2)
    return Field(grid, out)


def gradient_faces(grid: Grid, f: Field) -> FaceField:
    """Interior-face gradients, (right - left) / h per axis."""
    _check_field(grid, f)
    v = f.values
    axes = []
    for k in range(grid.dim):
        d = np.diff(v, axis=k) / grid.h[k]
        axes.append(d)
    return FaceField(grid, tuple(axes))


def face_average(grid: Grid, f: Field, mode: str = "arithmetic") \
        -> tuple[np.ndarray, ...]:
    """Per-axis interior-face averages of a cell field.

    'arithmetic' is the default; 'harmonic' is used for negative-power
    weights, where it is the conservative choice (the harmonic mean of
    positives never exceeds either neighbor).
    """
    _check_field(grid, f)
    v = f.values
    out = []
    for k in range(grid.dim):
        left = np.take(v, range(0, v.shape[k] - 1), axis=k)
        right = np.take(v, range(1, v.shape[k]), axis=k)
        if mode == "arithmetic":
            out.append(0.5 * (left + right))
        elif mode == "harmonic":
            s = left + right
            with np.errstate(divide="ignore", invalid="ignore"):
                m = np.where(s > 0.0, 2.0 * left * right / np.where(s > 0, s, 1.0), 0.0)
            out.append(m)
        else:
            raise ValueError(f"unknown face average mode {mode!r}")
    return tuple(out)


def integrate(grid: Grid, f: Field) -> float:
    """Midpoint quadrature, exact for cell-averaged data."""
    _check_field(grid, f)
    return float(f.values.sum()) * grid.cell_volume


def inner(grid: Grid, f: Field, g: Field) -> float:
    _check_field(grid, f)
    _check_field(grid, g)
    return float(np.vdot(f.values, g.values)) * grid.cell_volume


def norm_l1(grid: Grid, f: Field) -> float:
    return float(np.abs(f.values).sum()) * grid.cell_volume


def norm_l2(grid: Grid, f: Field) -> float:
    return float(np.sqrt(np.vdot(f.values, f.values) * grid.cell_volume))


def face_weight(grid: Grid) -> float:
    """Quadrature weight per interior face: h * facearea = cell volume."""
    return grid.cell_volume


def dirichlet_form(grid: Grid, f: Field) -> float:
    """Sum over faces of |gradient|^2 times the face weight.

    Equals inner(-L f, f) exactly, by the reflected-ghost construction.
    """
    g = gradient_faces(grid, f)
    return sum(float(np.vdot(a, a)) for a in g.axes) * face_weight(grid)


def _neg_lap_diag(grid: Grid) -> np.ndarray:
    """Diagonal of -L: neighbor count per cell over h^2, axis by axis."""
    def axis_counts(n):
        c = np.full(n, 2.0)
        c[0] = c[-1] = 1.0
        return c

    if grid.dim == 1:
        return axis_counts(grid.cells[0]) / grid.h[0] ** 2
    cx = axis_counts(grid.cells[0]) / grid.h[0] ** 2
    cy = axis_counts(grid.cells[1]) / grid.h[1] ** 2
    return cx[:, None] + cy[None, :]


def solve_spd(grid: Grid, diag: Field, dt: float, rhs: Field,
              tol: float = 1e-10, maxiter: int | None = None,
              x0: Field | np.ndarray | None = None) -> Field:
    """Solve (diag(d) - dt * L) x = rhs with d > 0, dt > 0.

    Jacobi-preconditioned CG; raises SolverFailure if the relative residual
    has not reached tol within maxiter (default 50 * cell count) iterations.
    """
    _check_field(grid, diag, "diag")
    _check_field(grid, rhs, "rhs")
    if not (dt > 0.0):
        raise ValueError("dt must be positive")
    d = diag.values
    if d.min() <= 0.0:
        raise ValueError("diag entries must be strictly positive")
    if maxiter is None:
        maxiter = 50 * grid.size
    mdiag = d + dt * _neg_lap_diag(grid)
    x0v = None
    if x0 is not None:
        x0v = x0.values if isinstance(x0, Field) else np.asarray(x0, dtype=np.float64)
    h = grid.h
    if grid.dim == 1:
        x, it, relres = kernels.cg_spd_1d(d, dt, 1.0 / h[0] ** 2, rhs.values,
                                          x0v, mdiag, tol, maxiter)
    else:
        x, it, relres = kernels.cg_spd_2d(d, dt, 1.0 / h[0] ** 2,
                                          1.0 / h[1] ** 2, rhs.values,
                                          x0v, mdiag, tol, maxiter)
    if relres > tol:
        raise SolverFailure(
            f"SPD solve stalled at relative residual {relres:.3e} "
            f"(tol {tol:.1e}) after {it} iterations", relres, it)
    return Field(grid, x)


def solve_neumann_poisson_zero_mean(grid: Grid, rhs: Field,
                                    tol: float = 1e-10,
                                    maxiter: int | None = None) -> Field:
    """Solve -L psi = rhs with zero-mean psi; rhs must have zero mean.

    The compatibility check accepts |integral(rhs)| up to 1e-12 times the
    L1 norm of rhs.  The iteration projects the residual onto the zero-mean
    subspace every step, so rounding cannot drift into the constant kernel.
    """
    _check_field(grid, rhs, "rhs")
    mass = integrate(grid, rhs)
    scale = norm_l1(grid, rhs)
    if abs(mass) > 1e-12 * scale:
        raise ValueError(f"rhs must have zero mean; integral is {mass:.3e} "
                         f"against L1 norm {scale:.3e}")
    if maxiter is None:
        maxiter = 50 * grid.size
    b = rhs.values - rhs.values.mean()
    mdiag = _neg_lap_diag(grid)
    h = grid.h
    if grid.dim == 1:
        x, it, relres = kernels.cg_poisson_1d(b, 1.0 / h[0] ** 2, mdiag,
                                              tol, maxiter)
    else:
        x, it, relres = kernels.cg_poisson_2d(b, 1.0 / h[0] ** 2,
                                              1.0 / h[1] ** 2, mdiag,
                                              tol, maxiter)
    if relres > tol:
        raise SolverFailure(
            f"Neumann Poisson solve stalled at relative residual "
            f"{relres:.3e} (tol {tol:.1e}) after {it} iterations", relres, it)
    return Field(grid, x)
