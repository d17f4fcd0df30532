"""Brute-force reference computations used to check the closed forms.

Nothing here is fast; everything here is simple enough to trust.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.interpolate import RegularGridInterpolator
from scipy.linalg import solve_banded
from scipy.sparse.linalg import spsolve


@dataclass(frozen=True)
class Grid1D:
    half_width: float
    n_nodes: int = 2001

    def __post_init__(self):
        if self.n_nodes < 101:
            raise ValueError("Grid1D needs at least 101 nodes")
        if not self.half_width > 0:
            raise ValueError("half_width must be positive")

    @property
    def z(self):
        return np.linspace(-self.half_width, self.half_width, self.n_nodes)


@dataclass(frozen=True)
class Grid2D:
    half_width_x: float  # a
    half_width_z: float  # b
    nx: int = 201
    nz: int = 201

    def __post_init__(self):
        if self.nx < 51 or self.nz < 51:
            raise ValueError("Grid2D needs at least 51 nodes per axis")
        if not (self.half_width_x > 0 and self.half_width_z > 0):
            raise ValueError("half widths must be positive")

    @property
    def x(self):
        return np.linspace(-self.half_width_x, self.half_width_x, self.nx)

    @property
    def z(self):
        return np.linspace(-self.half_width_z, self.half_width_z, self.nz)


@dataclass
class Diffusion1DResult:
    flux_ratio: complex
    z: np.ndarray
    field: np.ndarray

    def current_density(self, mu_eff):
        """J_x = (1/mu) dB/dz by second-order differences."""
        return np.gradient(self.field, self.z) / mu_eff


@dataclass
class Diffusion2DResult:
    flux_ratio: complex
    x: np.ndarray
    z: np.ndarray
    field: np.ndarray  # shape (nx, nz)
    residual: float

    def sample(self, points):
        """Bilinear interpolation of the field at (x, z) points."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        re = RegularGridInterpolator((self.x, self.z), self.field.real)(pts)
        im = RegularGridInterpolator((self.x, self.z), self.field.imag)(pts)
        return re + 1j * im

    def current_density(self, mu_eff):
        """(J_x, J_z) = (dB/dz, -dB/dx) / mu on the grid."""
        dbdx, dbdz = np.gradient(self.field, self.x, self.z)
        return dbdz / mu_eff, -dbdx / mu_eff


def fd_diffusion_1d(omega, musigma, grid: Grid1D, return_field=False):
    """Solve B'' = j w mu sigma B on [-h, h] with B(+-h) = 1 and average B.

    Three-point differences, direct tridiagonal solve, trapezoidal mean.
    """
    z = grid.z
    dz = z[1] - z[0]
    n = grid.n_nodes - 2
    k2 = 1j * omega * musigma
    ab = np.zeros((3, n), dtype=complex)
    ab[0, 1:] = 1.0
    ab[1, :] = -2.0 - k2 * dz * dz
    ab[2, :-1] = 1.0
    rhs = np.zeros(n, dtype=complex)
    rhs[0] = rhs[-1] = -1.0
    interior = solve_banded((1, 1), ab, rhs)
    field = np.concatenate([[1.0], interior, [1.0]]).astype(complex)
    assert np.all(np.isfinite(field)), "singular 1-D system"
    ratio = complex(np.trapezoid(field, z) / (2 * grid.half_width))
    if return_field:
        return Diffusion1DResult(ratio, z, field)
    return ratio


def _laplacian_2d(nx, nz, dx, dz, k2):
    ix = sparse.diags([1.0, -2.0, 1.0], [-1, 0, 1], shape=(nx, nx)) / dx**2
    iz = sparse.diags([1.0, -2.0, 1.0], [-1, 0, 1], shape=(nz, nz)) / dz**2
    lap = sparse.kron(ix, sparse.identity(nz)) + sparse.kron(sparse.identity(nx), iz)
    return (lap - k2 * sparse.identity(nx * nz)).tocsc()


def fd_diffusion_2d(omega, musigma, grid: Grid2D, samples=None):
    """Five-point Helmholtz solve on the magnet section, B = 1 on all edges.

    Returns a :class:`Diffusion2DResult` (area mean, full field, relative
    residual) or, when ``samples`` is given, ``(result, values)`` with the
    field interpolated at those (x, z) points.
    """
    x, z = grid.x, grid.z
    dx, dz = x[1] - x[0], z[1] - z[0]
    mx, mz = grid.nx - 2, grid.nz - 2
    k2 = 1j * omega * musigma
    a = _laplacian_2d(mx, mz, dx, dz, k2)
    # boundary value 1 moved to the right-hand side
    rhs = np.zeros((mx, mz), dtype=complex)
    rhs[0, :] -= 1 / dx**2
    rhs[-1, :] -= 1 / dx**2
    rhs[:, 0] -= 1 / dz**2
    rhs[:, -1] -= 1 / dz**2
    rhs = rhs.ravel()
    sol = spsolve(a, rhs)
    residual = float(np.linalg.norm(a @ sol - rhs) / np.linalg.norm(rhs))
    if residual > 1e-12:
        raise ArithmeticError(f"2-D solve residual {residual:.2e} above 1e-12")
    field = np.ones((grid.nx, grid.nz), dtype=complex)
    field[1:-1, 1:-1] = sol.reshape(mx, mz)
    mean = np.trapezoid(np.trapezoid(field, z, axis=1), x)
    area = 4 * grid.half_width_x * grid.half_width_z
    result = Diffusion2DResult(complex(mean / area), x, z, field, residual)
    if samples is None:
        return result
    return result, result.sample(samples)


def quadrature_coil_torque(beta, i_c, spectrum, stack_length, rotor_radius, m0, n_points=10_000):
    """Lorentz torque on the Amperian current sheet by periodic trapezoidal rule."""
    if n_points < 1000:
        raise ValueError("n_points must be >= 1000")
    phi = np.arange(n_points) * (2 * np.pi / n_points)
    br = np.zeros_like(phi)
    for n, kn in spectrum.coefficients.items():
        br += kn * i_c * np.sin(n * phi)
    integrand = stack_length * rotor_radius**2 * m0 * np.cos(phi - beta) * br
    return float(integrand.sum() * (2 * np.pi / n_points))


def numerical_jacobian(rhs, x_bar, u_bar, h=1e-7):
    """Central-difference (A, B) of ``rhs(x, u)``; step h * max(1, |component|)."""
    x_bar = np.asarray(x_bar, dtype=float)
    u_bar = np.asarray(u_bar, dtype=float)
    f0 = np.asarray(rhs(x_bar, u_bar), dtype=float)

    def columns(base, other, first):
        cols = []
        for k in range(len(base)):
            step = h * max(1.0, abs(base[k]))
            up, dn = base.copy(), base.copy()
            up[k] += step
            dn[k] -= step
            if first:
                fu, fd = rhs(up, other), rhs(dn, other)
            else:
                fu, fd = rhs(other, up), rhs(other, dn)
            cols.append((np.asarray(fu) - np.asarray(fd)) / (2 * step))
        return np.array(cols).T.reshape(len(f0), len(base))

    return columns(x_bar, u_bar, True), columns(u_bar, x_bar, False)


def synth_frf(params, kind, omega_grid, noise_level=0.0, seed=0):
    """Exact model response on ``omega_grid`` with optional complex noise.

    ``kind``: ``"mech"`` (current to position), ``"elec-full"`` (voltage
    to current with back-emf) for a ``LumpedElectromech``; ``"elec"`` for
    an ``ElectricalParams``.  Noise is multiplicative,
    H (1 + level (n1 + j n2) / sqrt 2) with n1, n2 standard normal.
    """
    from .dynamics import elec_tf_full, mech_tf
    from .identify import FrfDataset, FrfKind

    omega = np.asarray(omega_grid, dtype=float)
    if np.any(np.diff(omega) <= 0):
        raise ValueError("omega grid must be strictly increasing")
    if kind == "mech":
        h, frf_kind = mech_tf(params).freqresp(omega), FrfKind.MECHANICAL
    elif kind == "elec-full":
        h, frf_kind = elec_tf_full(params).freqresp(omega), FrfKind.ELECTRICAL
    elif kind == "elec":
        h, frf_kind = np.asarray(params.admittance(omega), dtype=complex), FrfKind.ELECTRICAL
    else:
        raise ValueError(f"unknown FRF kind {kind!r}")
    if noise_level:
        rng = np.random.default_rng(seed)
        n = rng.standard_normal((2, len(omega)))
        h = h * (1 + noise_level * (n[0] + 1j * n[1]) / np.sqrt(2))
    return FrfDataset(omega, h, frf_kind)
