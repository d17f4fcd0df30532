"""Eddy currents in the laminations and the magnet.

The 1-D (laminations) and 2-D (magnet) diffusion problems are solved in the
phasor domain, reduced to dimensionless reluctance factors Q_i(jw), Q_m(jw)
(R_e = Rt0 * Q), and folded into the coil admittance

    H_e(jw) = (1 + Q) / (R + jw Lc0 + R Q),   Q = Q_i + Q_m

which is the same as 1 / (R + jw Lc(jw)) with Lc = Lc0 / (1 + Q).

Fields are normalized to a unit boundary flux density (B0 = 1) unless a B0
argument is given.  All functions broadcast over numpy arrays.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import binom

from .config import Config
from .errors import GeometryError

DEFAULT_NMAX = 101
_TANH_CUTOFF = 20.0


class ElectricalModelKind(enum.Enum):
    RL_2DOF = 2
    EDDY_IRON_3DOF = 3
    EDDY_IRON_MAGNET_4DOF = 4

    @property
    def dof(self) -> int:
        return self.value

    @classmethod
    def from_dof(cls, dof: int) -> "ElectricalModelKind":
        try:
            return cls(int(dof))
        except ValueError:
            raise ValueError(f"dof must be 2, 3 or 4, got {dof!r}") from None


@dataclass(frozen=True)
class EddyProducts:
    """Effective permeability times conductivity [s/m^2] of iron and magnet."""

    musigma_iron: float = 0.0
    musigma_magnet: float = 0.0

    def __post_init__(self):
        if self.musigma_iron < 0 or self.musigma_magnet < 0:
            raise ValueError("eddy products must be non-negative")


@dataclass(frozen=True)
class SlabGeometry:
    lamination_half_thickness: float  # d/2
    magnet_half_width: float          # a = wp/2
    magnet_half_length: float         # b = L/2
    lamination_count: int = 1

    def __post_init__(self):
        if min(self.lamination_half_thickness, self.magnet_half_width,
               self.magnet_half_length) <= 0 or self.lamination_count < 1:
            raise GeometryError("slab dimensions must be positive")

    @property
    def lamination_thickness(self) -> float:
        return 2.0 * self.lamination_half_thickness

    @property
    def square_half_width(self) -> float:
        """Half side of the square with the magnet's cross-section area."""
        return math.sqrt(self.magnet_half_width * self.magnet_half_length)

    @classmethod
    def from_config(cls, cfg) -> "SlabGeometry":
        act = cfg.actuator if isinstance(cfg, Config) else cfg
        return cls(act.lamination_thickness / 2, act.pole_width / 2,
                   act.stack_length / 2, act.lamination_count)


@dataclass(frozen=True)
class ComplexResponse:
    """Complex samples on an angular-frequency grid."""

    omega: np.ndarray
    value: np.ndarray

    def __post_init__(self):
        omega = np.atleast_1d(np.asarray(self.omega, dtype=float))
        if np.any(omega < 0):
            raise ValueError("omega must be >= 0")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "value", np.atleast_1d(np.asarray(self.value, dtype=complex)))

    @property
    def mag_db(self):
        with np.errstate(divide="ignore"):
            return 20 * np.log10(np.abs(self.value))

    @property
    def phase_deg(self):
        return np.degrees(np.unwrap(np.angle(self.value)))


def _unwrap0(x):
    return x[()] if isinstance(x, np.ndarray) and x.ndim == 0 else x


def tanh_stable(z):
    """Complex tanh that saturates to sign(Re z) for |Re z| > 20."""
    z = np.asarray(z, dtype=complex)
    big = np.abs(z.real) > _TANH_CUTOFF
    out = np.empty_like(z)
    out[big] = np.sign(z.real[big])
    out[~big] = np.tanh(z[~big])
    return out


def tanhc(z):
    """tanh(z)/z with the removable singularity at 0 filled in."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 1e-4
    out = np.empty_like(z)
    zs = z[small]
    out[small] = 1 - zs**2 / 3 + 2 * zs**4 / 15
    out[~small] = tanh_stable(z[~small]) / z[~small]
    return out


def cosh_ratio(k, x, a):
    """cosh(k x) / cosh(k a) for |x| <= a and Re k >= 0, without overflow."""
    k = np.asarray(k, dtype=complex)
    ax = np.abs(x)
    return np.exp(k * (ax - a)) * (1 + np.exp(-2 * k * ax)) / (1 + np.exp(-2 * k * a))


def sinh_ratio(k, x, a):
    """sinh(k x) / cosh(k a) for |x| <= a and Re k >= 0, without overflow."""
    k = np.asarray(k, dtype=complex)
    ax = np.abs(x)
    return (np.sign(x) * np.exp(k * (ax - a)) * (1 - np.exp(-2 * k * ax))
            / (1 + np.exp(-2 * k * a)))


def diffusion_wavenumber(omega, musigma):
    """Principal root of j*omega*musigma [1/m]; argument +45 deg for omega > 0."""
    omega = np.asarray(omega, dtype=float)
    if np.any(omega < 0) or musigma < 0:
        raise ValueError("omega and musigma must be >= 0")
    return _unwrap0(np.sqrt(1j * omega * musigma))


# -- laminations (1-D) -------------------------------------------------------

def lamination_flux_ratio(omega, musigma_iron, d):
    """Exact flux attenuation phi/phi0 = tanh(alpha d/2)/(alpha d/2)."""
    if d <= 0:
        raise GeometryError("lamination thickness must be positive")
    alpha = diffusion_wavenumber(omega, musigma_iron)
    return _unwrap0(tanhc(alpha * d / 2))


def lamination_field(z, omega, musigma_iron, d, b0=1.0):
    alpha = diffusion_wavenumber(omega, musigma_iron)
    z = np.asarray(z, dtype=float)
    if np.any(np.abs(z) > d / 2 * (1 + 1e-12)):
        raise GeometryError("z outside the lamination")
    return _unwrap0(b0 * cosh_ratio(alpha, z, d / 2))


def lamination_current_density(z, omega, b0, musigma_iron, mu_eff_iron, d):
    """Eddy current density J_x(z) in one lamination [A/m^2]."""
    z = np.asarray(z, dtype=float)
    if np.any(np.abs(z) > d / 2 * (1 + 1e-12)):
        raise GeometryError("z outside the lamination")
    alpha = diffusion_wavenumber(omega, musigma_iron)
    return _unwrap0(b0 * alpha / mu_eff_iron * sinh_ratio(alpha, z, d / 2))


def q_iron(omega, musigma_iron, d):
    """Half-order lamination reluctance factor Q_i = (d/2) sqrt(jw mu sigma)."""
    return _unwrap0(d / 2 * diffusion_wavenumber(omega, musigma_iron))


# -- magnet (2-D) ------------------------------------------------------------

def _check_nmax(n_max):
    if n_max < 1 or n_max % 2 == 0:
        raise ValueError("n_max must be an odd integer >= 1")


def _series_wavenumbers(omega, musigma, a, b, n_max):
    n = np.arange(1, n_max + 1, 2, dtype=float)
    jwms = 1j * np.asarray(omega, dtype=float)[..., None] * musigma
    k1 = np.sqrt((n * np.pi / (2 * b)) ** 2 + jwms)
    k2 = np.sqrt((n * np.pi / (2 * a)) ** 2 + jwms)
    return n, k1, k2


def magnet_field_2d(x, z, omega, musigma_magnet, a, b, n_max=DEFAULT_NMAX):
    """Flux density in the magnet cross-section, normalized to the boundary value.

    On the edges the truncated series converges to 1 with Gibbs ripple of
    order 1/n_max; at the four corners it converges to the edge average 0.
    """
    _check_nmax(n_max)
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    tol = 1 + 1e-12
    if np.any(np.abs(x) > a * tol) or np.any(np.abs(z) > b * tol):
        raise GeometryError("point outside the magnet")
    n, k1, k2 = _series_wavenumbers(float(omega), musigma_magnet, a, b, n_max)
    coef = 4 / (n * np.pi) * np.sin(n * np.pi / 2)
    xs = x[..., None]
    zs = z[..., None]
    terms = coef * (np.cos(n * np.pi * zs / (2 * b)) * cosh_ratio(k1, xs, a)
                    + np.cos(n * np.pi * xs / (2 * a)) * cosh_ratio(k2, zs, b))
    return _unwrap0(terms.sum(axis=-1))


def magnet_flux_ratio_series(omega, musigma_magnet, a, b, n_max=DEFAULT_NMAX):
    """Area-averaged magnet flux phi/phi0 from the truncated double series."""
    _check_nmax(n_max)
    n, k1, k2 = _series_wavenumbers(omega, musigma_magnet, a, b, n_max)
    terms = 8 / (n**2 * np.pi**2) * (tanhc(k1 * a) + tanhc(k2 * b))
    return _unwrap0(terms.sum(axis=-1))


def magnet_current_density(x, z, omega, musigma_magnet, mu_eff_magnet, a, b,
                           n_max=DEFAULT_NMAX, b0=1.0):
    """Eddy current density (J_x, J_z) in the magnet from the differentiated series."""
    _check_nmax(n_max)
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    tol = 1 + 1e-12
    if np.any(np.abs(x) > a * tol) or np.any(np.abs(z) > b * tol):
        raise GeometryError("point outside the magnet")
    n, k1, k2 = _series_wavenumbers(float(omega), musigma_magnet, a, b, n_max)
    coef = 4 / (n * np.pi) * np.sin(n * np.pi / 2)
    xs = x[..., None]
    zs = z[..., None]
    p = n * np.pi / (2 * b)
    q = n * np.pi / (2 * a)
    dbdz = coef * (-p * np.sin(p * zs) * cosh_ratio(k1, xs, a)
                   + np.cos(q * xs) * k2 * sinh_ratio(k2, zs, b))
    dbdx = coef * (np.cos(p * zs) * k1 * sinh_ratio(k1, xs, a)
                   - q * np.sin(q * xs) * cosh_ratio(k2, zs, b))
    jx = b0 / mu_eff_magnet * dbdz.sum(axis=-1)
    jz = -b0 / mu_eff_magnet * dbdx.sum(axis=-1)
    return _unwrap0(jx), _unwrap0(jz)


def q_magnet(omega, musigma_magnet, w):
    """Lumped magnet reluctance factor Q_m (fundamental term, square section)."""
    if w <= 0:
        raise GeometryError("w must be positive")
    omega = np.asarray(omega, dtype=float)
    if np.any(omega < 0) or musigma_magnet < 0:
        raise ValueError("omega and musigma must be >= 0")
    half_pi = math.pi / 2
    root = np.sqrt((half_pi / w) ** 2 + 1j * omega * musigma_magnet)
    # w*root - pi/2 loses digits at low frequency; use the rationalized form
    num = w * 1j * omega * musigma_magnet / (root + half_pi / w)
    return _unwrap0(num / (1 + half_pi))


def magnet_flux_ratio_lumped(omega, musigma_magnet, w):
    return _unwrap0(1 / (1 + q_magnet(omega, musigma_magnet, w)))


# -- coupled circuit -----------------------------------------------------------

def total_q(omega, kind: ElectricalModelKind, products: EddyProducts, slab: SlabGeometry):
    omega = np.asarray(omega, dtype=float)
    q = np.zeros(omega.shape, dtype=complex)
    if kind is not ElectricalModelKind.RL_2DOF:
        q = q + q_iron(omega, products.musigma_iron, slab.lamination_thickness)
    if kind is ElectricalModelKind.EDDY_IRON_MAGNET_4DOF:
        q = q + q_magnet(omega, products.musigma_magnet, slab.square_half_width)
    return _unwrap0(q)


def electrical_admittance(omega, kind, r_total, lc0, products, slab):
    """Coil admittance I/V [S], back-emf excluded."""
    if r_total <= 0 or lc0 <= 0:
        raise ValueError("resistance and inductance must be positive")
    q = total_q(omega, kind, products, slab)
    w = np.asarray(omega, dtype=float)
    return _unwrap0((1 + q) / (r_total + 1j * w * lc0 + r_total * q))


def electrical_admittance_coupled(omega, r_total, lc0, q, turns=100):
    """Same admittance from the 2x2 electric/magnetic circuit solved per frequency."""
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    q = np.broadcast_to(np.asarray(q, dtype=complex), omega.shape)
    rt0 = turns**2 / lc0
    out = np.empty(omega.shape, dtype=complex)
    for i, (w, qi) in enumerate(zip(omega, q)):
        m = np.array([[r_total, 1j * w * turns], [-turns, rt0 * (1 + qi)]])
        current, _flux = np.linalg.solve(m, np.array([1.0, 0.0]))
        out[i] = current
    return out


def inductance_of_frequency(omega, lc0, q):
    """Frequency-dependent inductance Lc0 / (1 + Q) [H]."""
    del omega  # Q is already evaluated at omega
    return _unwrap0(lc0 / (1 + np.asarray(q, dtype=complex)))


@dataclass(frozen=True)
class ElectricalParams:
    """Parameters of one electrical model variant, bound to a slab geometry."""

    kind: ElectricalModelKind
    resistance: float
    lc0: float
    products: EddyProducts
    slab: SlabGeometry

    def __post_init__(self):
        if self.kind is ElectricalModelKind.EDDY_IRON_3DOF and self.products.musigma_magnet:
            raise ValueError("3-DoF model has no magnet eddy term")
        if self.kind is ElectricalModelKind.RL_2DOF and (
                self.products.musigma_iron or self.products.musigma_magnet):
            raise ValueError("RL model has no eddy terms")

    @property
    def dof(self):
        return self.kind.dof

    def q(self, omega):
        return total_q(omega, self.kind, self.products, self.slab)

    def admittance(self, omega):
        return electrical_admittance(omega, self.kind, self.resistance, self.lc0,
                                     self.products, self.slab)

    def inductance(self, omega):
        return inductance_of_frequency(omega, self.lc0, self.q(omega))

    def reluctance(self, omega, turns):
        """Total flux-loop reluctance Rt0 (1 + Q) [1/H]."""
        return _unwrap0(turns**2 / self.lc0 * (1 + np.asarray(self.q(omega))))


# -- fractional-order form -------------------------------------------------------

@dataclass(frozen=True)
class FractionalForm:
    """Q_i(s) = iron_coeff * s^(1/2); Q_m(s) ~ sum_k magnet_coeffs[k] * s^k."""

    iron_coeff: float
    magnet_coeffs: np.ndarray

    def q_iron(self, s):
        return self.iron_coeff * np.sqrt(np.asarray(s, dtype=complex))

    def q_magnet(self, s):
        return np.polynomial.polynomial.polyval(np.asarray(s, dtype=complex), self.magnet_coeffs)

    def q(self, s):
        return self.q_iron(s) + self.q_magnet(s)


def fractional_expansion(products: EddyProducts, slab: SlabGeometry, order=2) -> FractionalForm:
    """Half-order iron term and the Taylor polynomial of Q_m about s = 0.

    Q_m = (pi/2) [sqrt(1 + u) - 1] / (1 + pi/2) with u = s mu sigma (2w/pi)^2,
    expanded with binomial coefficients; valid for |u| < 1.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    w = slab.square_half_width
    u_scale = products.musigma_magnet * (2 * w / math.pi) ** 2
    k = np.arange(order + 1)
    coeffs = (math.pi / 2) / (1 + math.pi / 2) * binom(0.5, k) * u_scale**k
    coeffs[0] = 0.0
    iron = slab.lamination_half_thickness * math.sqrt(products.musigma_iron)
    return FractionalForm(iron, coeffs)
