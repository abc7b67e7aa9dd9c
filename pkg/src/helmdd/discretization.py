"""Finite-difference discretization of the 2D Helmholtz model problems.

Two model problems on the unit square, -Lap(u) - k^2 u = delta(x-1/2, y-1/2):

* MP1: homogeneous Dirichlet boundary, real indefinite symmetric system on
  the (n-2)^2 interior nodes.
* MP2: Sommerfeld radiation boundary du/dn - i*k*u = 0, complex symmetric
  (non-Hermitian) system on all n^2 nodes.

Both use the standard second-order 5-point stencil with mesh size
h = 1/(n-1).  The Sommerfeld condition is discretized by ghost-point
elimination: a central difference for du/dn combined with the PDE at the
boundary node, which doubles the inward-neighbor coefficient and adds
-2ik/h to the diagonal.  Boundary rows are then scaled by 1/2 (corners by
1/4) so that the assembled matrix is exactly symmetric; this is a row
scaling of the equations and leaves the solution unchanged.

The point source is represented by a load of 1/h^2 at the grid node at
(1/2, 1/2), the nodal-cell approximation of a unit Dirac mass.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

PROBLEMS = ("MP1", "MP2")


class ResonantWavenumberError(ValueError):
    """k^2 coincides with an eigenvalue of the Dirichlet Laplacian."""


@dataclass(frozen=True)
class Grid:
    """Uniform n-by-n node grid on the unit square.

    bc selects which nodes carry unknowns: 'dirichlet' exposes only the
    (n-2)^2 interior nodes, 'sommerfeld' all n^2 nodes.
    """

    n: int
    bc: str

    def __post_init__(self):
        if self.n < 3:
            raise ValueError(f"need n >= 3 grid nodes per dimension, got {self.n}")
        if self.bc not in ("dirichlet", "sommerfeld"):
            raise ValueError(f"unknown boundary condition {self.bc!r}")

    @property
    def h(self) -> float:
        return 1.0 / (self.n - 1)

    @property
    def num_nodes(self) -> int:
        return self.n * self.n

    @property
    def unknown_lo(self) -> int:
        """First node coordinate that is an unknown (per dimension)."""
        return 1 if self.bc == "dirichlet" else 0

    @property
    def unknowns_per_dim(self) -> int:
        return self.n - 2 if self.bc == "dirichlet" else self.n

    @property
    def num_unknowns(self) -> int:
        return self.unknowns_per_dim**2

    def unknown_index(self, ix, iy):
        """Map node coordinates (ix, iy) to the unknown index (row-major in y)."""
        lo = self.unknown_lo
        return (np.asarray(iy) - lo) * self.unknowns_per_dim + (np.asarray(ix) - lo)

    def unknown_coords(self):
        """(x, y) coordinates of every unknown, in unknown-index order."""
        lo = self.unknown_lo
        t = (np.arange(self.unknowns_per_dim) + lo) * self.h
        x, y = np.meshgrid(t, t, indexing="xy")
        return x.ravel(), y.ravel()


@dataclass(frozen=True)
class HelmholtzProblem:
    grid: Grid
    k: float
    problem: str
    A: sp.csr_matrix
    f: np.ndarray


@dataclass(frozen=True)
class RegimeReport:
    """Mesh-resolution products for a (k, h, H) combination.

    kappa_h = k*h and kappa_H = k*H measure nodes per wavelength on the
    fine and coarse grid; pollution_metric = k^3 h^2 tracks the dispersion
    error of the second-order stencil.  Flags are boundary-inclusive.
    """

    kappa_h: float
    kappa_H: float
    pollution_metric: float

    _EPS = 1e-12

    @property
    def kappa_h_ok(self) -> bool:
        return self.kappa_h <= 0.25 + self._EPS

    @property
    def kappa_H_ok(self) -> bool:
        return self.kappa_H <= 1.0 + self._EPS

    @property
    def pollution_ok(self) -> bool:
        return self.pollution_metric <= 1.0 + self._EPS


def regime(k: float, h: float, H: float) -> RegimeReport:
    if k <= 0 or h <= 0 or H <= 0:
        raise ValueError("k, h, H must all be positive")
    return RegimeReport(kappa_h=k * h, kappa_H=k * H, pollution_metric=k**3 * h**2)


def _second_difference_1d(m: int) -> sp.csr_matrix:
    """Tridiagonal (-1, 2, -1) operator of size m (not yet scaled by 1/h^2)."""
    ones = np.ones(m - 1)
    return sp.diags([-ones, 2 * np.ones(m), -ones], [-1, 0, 1], format="csr")


def _sommerfeld_1d(n: int, k: float, h: float) -> sp.csr_matrix:
    """1D ghost-point Sommerfeld operator with symmetrizing 1/2 end-row scale.

    Interior rows are (-1, 2, -1)/h^2; the scaled end rows are
    (1, -1)/h^2 - ik/h on the diagonal.
    """
    T = _second_difference_1d(n).astype(complex).tolil()
    T[0, 0] = 1.0
    T[n - 1, n - 1] = 1.0
    T = (T / h**2).tolil()
    T[0, 0] -= 1j * k / h
    T[n - 1, n - 1] -= 1j * k / h
    return T.tocsr()


def _boundary_weights_1d(n: int) -> np.ndarray:
    w = np.ones(n)
    w[0] = w[-1] = 0.5
    return w


def assemble(grid: Grid, k: float, problem: str) -> HelmholtzProblem:
    """Assemble the system matrix and point-source load vector.

    The 2D operator is built from tensor products of 1D operators, which
    keeps assembly vectorized and makes symmetry structural.
    """
    if problem not in PROBLEMS:
        raise ValueError(f"unknown problem {problem!r}, expected one of {PROBLEMS}")
    if k < 0:
        raise ValueError(f"wavenumber must be nonnegative, got {k}")
    expected_bc = "dirichlet" if problem == "MP1" else "sommerfeld"
    if grid.bc != expected_bc:
        raise ValueError(f"{problem} requires a {expected_bc} grid, got {grid.bc!r}")
    n, h = grid.n, grid.h
    if problem == "MP1":
        if n % 2 == 0:
            raise ValueError("MP1 needs odd n so the source at (1/2, 1/2) is a grid node")
        m = n - 2
        T = _second_difference_1d(m) / h**2
        I = sp.identity(m, format="csr")
        A = sp.kron(T, I) + sp.kron(I, T) - k**2 * sp.identity(m * m)
        f = np.zeros(m * m)
        center = grid.unknown_index((n - 1) // 2, (n - 1) // 2)
        f[center] = 1.0 / h**2
    else:
        T = _sommerfeld_1d(n, k, h)
        W = sp.diags(_boundary_weights_1d(n))
        A = sp.kron(T, W) + sp.kron(W, T) - k**2 * sp.kron(W, W)
        f = np.zeros(n * n, dtype=complex)
        # node nearest (1/2, 1/2); exact center for odd n
        c = (n - 1) // 2
        f[grid.unknown_index(c, c)] = 1.0 / h**2
    A = sp.csr_matrix(A)
    A.sort_indices()
    return HelmholtzProblem(grid=grid, k=k, problem=problem, A=A, f=f)


def analytical_mp1(k: float, point, truncation: int = 400):
    """Truncated eigenfunction expansion of the MP1 solution.

    u(x, y) = sum over m, l of
        4 sin(m pi/2) sin(l pi/2) sin(m pi x) sin(l pi y) / ((m^2+l^2) pi^2 - k^2)

    Only odd (m, l) contribute.  Boundary points return exactly 0.
    """
    x, y = point
    if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
        raise ValueError(f"point {point} outside the closed unit square")
    if x in (0.0, 1.0) or y in (0.0, 1.0):
        return 0.0
    modes = np.arange(1, truncation + 1, 2, dtype=float)
    # sin(m pi / 2) = +1, -1, +1, ... for m = 1, 3, 5, ...
    signs = np.where((modes % 4) == 1, 1.0, -1.0)
    denom = (modes[:, None] ** 2 + modes[None, :] ** 2) * np.pi**2 - k**2
    if np.abs(denom).min() < 1e-12:
        raise ResonantWavenumberError(f"k={k} is resonant within truncation {truncation}")
    sx = signs * np.sin(modes * np.pi * x)
    sy = signs * np.sin(modes * np.pi * y)
    return 4.0 * float(sx @ (1.0 / denom) @ sy)
