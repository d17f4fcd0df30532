"""Magnet model, torque and back-emf closed forms, static reluctance network.

Angles are in radians.  ``beta`` is the rotor position measured so that
beta = pi/2 is the maximum-torque-per-ampere position (MTPAP), where the
coil torque peaks and the reluctance (restoration) torque vanishes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .config import MU0, ActuatorConfig, Config, LumpedParams
from .errors import GeometryError


@dataclass(frozen=True)
class MagnetModel:
    """Uniformly magnetized cylindrical rotor magnet."""

    magnetization: float  # M0 [A/m]
    rotor_radius: float   # Rr [m]

    def __post_init__(self):
        if not self.magnetization > 0 or not self.rotor_radius > 0:
            raise GeometryError("magnetization and rotor_radius must be positive")

    @classmethod
    def from_config(cls, cfg: ActuatorConfig) -> "MagnetModel":
        return cls(cfg.magnetization, cfg.rotor_radius)

    @property
    def mmf(self) -> float:
        return pm_mmf(self)


@dataclass(frozen=True)
class FluxPath:
    """Equivalent lengths of the main flux loop and the pole area."""

    magnet_length: float
    airgap_length: float
    iron_length: float
    pole_area: float

    def __post_init__(self):
        for name in ("magnet_length", "airgap_length", "iron_length", "pole_area"):
            if not getattr(self, name) > 0:
                raise GeometryError(f"{name} must be positive")


@dataclass(frozen=True)
class ReluctanceSet:
    airgap: float
    magnet: float
    iron: float
    total: float             # Rg + Rm + Ri
    total_from_inductance: float  # N^2 / Lc0
    mu_eff_iron: float
    mu_eff_magnet: float


@dataclass(frozen=True)
class StatorFieldSpectrum:
    """Radial stator field per ampere, as odd sine harmonics {n: k_n [T/A]}."""

    coefficients: Mapping[int, float] = field(default_factory=dict)

    def __post_init__(self):
        coeffs = dict(self.coefficients)
        for n in coeffs:
            if n < 1 or n % 2 == 0:
                raise GeometryError(f"harmonic {n} is not a positive odd integer")
        if 1 not in coeffs:
            raise GeometryError("fundamental k1 missing from spectrum")
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def k1(self) -> float:
        return self.coefficients[1]

    @classmethod
    def from_torque_constant(cls, kt, stack_length, rotor_radius, magnetization):
        """Fundamental-only spectrum that reproduces a measured torque constant."""
        k1 = kt / (math.pi * stack_length * rotor_radius**2 * magnetization)
        return cls({1: k1})


@dataclass(frozen=True)
class TorqueBackemfModel:
    """Torque and back-emf constants.

    Built either from identified constants or from the permeance variation
    and magnet MMF.  ``kb`` equals ``kt`` by energy conservation.
    """

    kt: float
    krest: float
    lambda0: float
    permeance_mean: float | None = None
    permeance_swing: float | None = None

    @property
    def ks(self) -> float:
        return 2.0 * self.krest

    @property
    def kb(self) -> float:
        return self.kt

    @classmethod
    def from_constants(cls, kt, krest):
        return cls(kt=kt, krest=krest, lambda0=kt)

    @classmethod
    def from_permeances(cls, permeance_mean, permeance_swing, mmf, kt):
        return cls(kt=kt, krest=permeance_swing * mmf**2, lambda0=kt,
                   permeance_mean=permeance_mean, permeance_swing=permeance_swing)

    @classmethod
    def from_params(cls, lumped: LumpedParams):
        return cls.from_constants(lumped.torque_constant, lumped.restoration_torque)

    def coenergy(self, beta, mmf):
        """Magnet co-energy 0.5 Fm^2 P(beta); needs the permeances."""
        if self.permeance_swing is None:
            raise GeometryError("co-energy needs permeance_swing")
        p0 = self.permeance_mean or 0.0
        return 0.5 * mmf**2 * (p0 - self.permeance_swing * np.cos(2 * np.asarray(beta)))

    def torque(self, beta, ic):
        return total_torque(beta, ic, self.kt, self.krest)

    def back_emf(self, omega_r, beta):
        return back_emf(omega_r, beta, self.kb)


def derive_flux_path(cfg: ActuatorConfig) -> FluxPath:
    """Equivalent magnet, air-gap and iron lengths of the main flux loop."""
    rr, wp = cfg.rotor_radius, cfg.pole_width
    lm = math.pi * rr**2 / wp
    lg = cfg.minor_radius + cfg.major_radius - 2.0 * rr
    if lg <= 0:
        raise GeometryError("rotor does not fit the stator bore (air gap <= 0)")
    if cfg.iron_path_length is not None:
        li = cfg.iron_path_length
    else:
        mean_radius = cfg.outer_diameter / 2 - wp / 4
        li = math.pi * mean_radius + (mean_radius - (lm / 2 + lg / 2))
    return FluxPath(lm, lg, li, wp * cfg.stack_length)


def pole_width_from_magnet_length(rotor_radius, magnet_length):
    return math.pi * rotor_radius**2 / magnet_length


def reluctance_set(path: FluxPath, mu_ri, lc0, turns) -> ReluctanceSet:
    if mu_ri < 1:
        raise GeometryError("relative permeability must be >= 1")
    ap = path.pole_area
    rg = path.airgap_length / (MU0 * ap)
    rm = path.magnet_length / (MU0 * ap)
    ri = path.iron_length / (MU0 * mu_ri * ap)
    # Lc0-based approximations of the effective permeabilities
    scale = lc0 / (turns**2 * ap)
    return ReluctanceSet(
        airgap=rg, magnet=rm, iron=ri, total=rg + rm + ri,
        total_from_inductance=turns**2 / lc0,
        mu_eff_iron=path.iron_length * scale,
        mu_eff_magnet=path.magnet_length * scale,
    )


def effective_permeabilities_from_geometry(path: FluxPath, mu_ri):
    """Geometry-only effective permeabilities (iron, magnet) [H/m]."""
    denom = path.iron_length + mu_ri * (path.airgap_length + path.magnet_length)
    return (MU0 * mu_ri * path.iron_length / denom,
            MU0 * mu_ri * path.magnet_length / denom)


def amperian_surface_current(phi, beta, m0):
    """Axial surface current density on the magnet surface [A/m]."""
    return m0 * np.cos(np.asarray(phi) - beta)


def pm_mmf(magnet: MagnetModel) -> float:
    return 2.0 * magnet.rotor_radius * magnet.magnetization


def stator_radial_field(phi, ic, spectrum: StatorFieldSpectrum):
    phi = np.asarray(phi, dtype=float)
    out = np.zeros_like(phi)
    for n, kn in spectrum.coefficients.items():
        out = out + kn * ic * np.sin(n * phi)
    return out


def torque_constant(stack_length, rotor_radius, k1, m0) -> float:
    return math.pi * stack_length * rotor_radius**2 * k1 * m0


def coil_torque(beta, ic, kt):
    return kt * ic * np.sin(beta)


def restoration_torque(beta, krest):
    return krest * np.sin(2 * np.asarray(beta))


def total_torque(beta, ic, kt, krest):
    return coil_torque(beta, ic, kt) + restoration_torque(beta, krest)


def linearized_torque(theta, ic, kt, ks):
    """Small-signal torque about MTPAP, theta = beta - pi/2."""
    return kt * ic - ks * np.asarray(theta)


def flux_linkage(beta, ic, lc0, lambda0):
    return lc0 * ic - lambda0 * np.cos(beta)


def back_emf(omega_r, beta, kb):
    return kb * omega_r * np.sin(beta)


@dataclass(frozen=True)
class DerivedMagnetics:
    path: FluxPath
    reluctances: ReluctanceSet
    magnet: MagnetModel
    mmf: float
    spectrum: StatorFieldSpectrum
    torque: TorqueBackemfModel


def derive_all(cfg: Config) -> DerivedMagnetics:
    """Everything the static model derives from a configuration."""
    act = cfg.actuator
    path = derive_flux_path(act)
    rel = reluctance_set(path, act.iron_rel_permeability, act.low_freq_inductance, act.turns)
    magnet = MagnetModel.from_config(act)
    fm = pm_mmf(magnet)
    kt = cfg.lumped.torque_constant
    spectrum = StatorFieldSpectrum.from_torque_constant(
        kt, act.stack_length, act.rotor_radius, magnet.magnetization)
    krest = cfg.lumped.restoration_torque
    tb = TorqueBackemfModel.from_permeances(None, krest / fm**2, fm, kt)
    return DerivedMagnetics(path, rel, magnet, fm, spectrum, tb)
