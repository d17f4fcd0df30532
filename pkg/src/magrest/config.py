"""Actuator configuration: geometry, materials and lumped constants.

Configuration files are flat ``key = value`` text, one entry per line, ``#``
starts a comment.  Each key is a quantity name followed by a unit suffix,
e.g. ``outer_diameter_mm = 13.716`` or ``outer_diameter_m = 0.013716``.
Values are converted to SI on load; unknown keys are rejected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from importlib import resources
from pathlib import Path

from .errors import ConfigError, GeometryError

MU0 = 4e-7 * math.pi

_LENGTH = {"m": 1.0, "mm": 1e-3}
_UNITS = {
    "length": _LENGTH,
    "conductivity": {"S_per_m": 1.0, "MS_per_m": 1e6},
    "flux_density": {"T": 1.0},
    "count": {"": 1},
    "ratio": {"": 1.0},
    "inductance": {"H": 1.0, "mH": 1e-3, "uH": 1e-6},
    "resistance": {"ohm": 1.0},
    "torque_per_amp": {"Nm_per_A": 1.0, "mNm_per_A": 1e-3},
    "stiffness": {"Nm_per_rad": 1.0, "mNm_per_rad": 1e-3},
    "damping": {"Nms_per_rad": 1.0},
    "inertia": {"kgm2": 1.0},
    "torque": {"Nm": 1.0, "mNm": 1e-3, "uNm": 1e-6},
    "velocity": {"rad_per_s": 1.0},
    "back_emf": {"Vs_per_rad": 1.0, "mVs_per_rad": 1e-3},
    "musigma": {"s_per_m2": 1.0},
}
# SI suffix written when dumping a snapshot
_SI_SUFFIX = {
    "length": "m", "conductivity": "S_per_m", "flux_density": "T", "count": "",
    "ratio": "", "inductance": "H", "resistance": "ohm",
    "torque_per_amp": "Nm_per_A", "stiffness": "Nm_per_rad",
    "damping": "Nms_per_rad", "inertia": "kgm2", "torque": "Nm",
    "velocity": "rad_per_s", "back_emf": "Vs_per_rad", "musigma": "s_per_m2",
}


@dataclass(frozen=True)
class ActuatorConfig:
    """Geometry and material data of the actuator (SI units)."""

    outer_diameter: float
    lamination_thickness: float
    lamination_count: int
    stack_length: float
    pole_width: float
    rotor_radius: float
    minor_radius: float
    major_radius: float
    pm_length: float
    turns: int
    pm_remanence: float
    pm_conductivity: float
    iron_conductivity: float
    iron_rel_permeability: float
    coil_resistance: float
    sense_resistance: float
    low_freq_inductance: float
    iron_path_length: float | None = None  # overrides the half-circle estimate

    def __post_init__(self):
        lengths = ("outer_diameter", "lamination_thickness", "stack_length",
                   "pole_width", "rotor_radius", "minor_radius", "major_radius",
                   "pm_length")
        for name in lengths:
            if not getattr(self, name) > 0:
                raise GeometryError(f"{name} must be positive")
        if self.iron_path_length is not None and not self.iron_path_length > 0:
            raise GeometryError("iron_path_length must be positive")
        if self.turns < 1 or self.lamination_count < 1:
            raise GeometryError("turns and lamination_count must be >= 1")
        if not self.major_radius >= self.minor_radius > self.rotor_radius:
            raise GeometryError("need major_radius >= minor_radius > rotor_radius")
        stack = self.lamination_count * self.lamination_thickness
        if abs(stack - self.stack_length) > 0.05 * self.stack_length:
            raise GeometryError(
                f"lamination stack {stack:.6g} m inconsistent with stack length "
                f"{self.stack_length:.6g} m (>5%)")
        if self.iron_rel_permeability < 1:
            raise GeometryError("iron_rel_permeability must be >= 1")
        for name in ("pm_remanence", "pm_conductivity", "iron_conductivity",
                     "coil_resistance", "sense_resistance", "low_freq_inductance"):
            if getattr(self, name) < 0:
                raise GeometryError(f"{name} must be non-negative")

    @property
    def total_resistance(self) -> float:
        return self.coil_resistance + self.sense_resistance

    @property
    def magnetization(self) -> float:
        """Magnetization of an ideal linear magnet, Br / mu0 [A/m]."""
        return self.pm_remanence / MU0


@dataclass(frozen=True)
class LumpedParams:
    """Electromechanical constants identified on the bench (SI units).

    ``mag_spring`` is the magnetic spring ks = 2 krest; ``total_stiffness``
    and ``total_damping`` include the pre-sliding friction contribution.
    The ``lugre_*`` values are placeholders unless fitted to data.
    """

    torque_constant: float
    mag_spring: float
    total_stiffness: float
    total_damping: float
    inertia: float
    back_emf_constant: float | None = None
    musigma_iron: float | None = None
    musigma_magnet: float | None = None
    lugre_sigma_d: float = 0.0
    lugre_coulomb: float | None = None
    lugre_static: float | None = None
    lugre_stribeck: float | None = None

    def __post_init__(self):
        if self.inertia <= 0:
            raise GeometryError("inertia must be positive")
        for f in fields(self):
            v = getattr(self, f.name)
            if v is not None and v < 0:
                raise GeometryError(f"{f.name} must be non-negative")

    @property
    def restoration_torque(self) -> float:
        return 0.5 * self.mag_spring

    @property
    def kb(self) -> float:
        return self.torque_constant if self.back_emf_constant is None else self.back_emf_constant


@dataclass(frozen=True)
class Config:
    actuator: ActuatorConfig
    lumped: LumpedParams


# key base -> (section, attribute, unit family, required, scale to attribute)
_KEYS = {
    "outer_diameter": ("actuator", "outer_diameter", "length", True, 1.0),
    "lamination_thickness": ("actuator", "lamination_thickness", "length", True, 1.0),
    "lamination_count": ("actuator", "lamination_count", "count", True, 1),
    "stack_length": ("actuator", "stack_length", "length", True, 1.0),
    "pole_width": ("actuator", "pole_width", "length", True, 1.0),
    "rotor_diameter": ("actuator", "rotor_radius", "length", False, 0.5),
    "rotor_radius": ("actuator", "rotor_radius", "length", False, 1.0),
    "minor_radius": ("actuator", "minor_radius", "length", True, 1.0),
    "major_radius": ("actuator", "major_radius", "length", True, 1.0),
    "pm_length": ("actuator", "pm_length", "length", True, 1.0),
    "turns": ("actuator", "turns", "count", True, 1),
    "pm_remanent": ("actuator", "pm_remanence", "flux_density", True, 1.0),
    "pm_conductivity": ("actuator", "pm_conductivity", "conductivity", True, 1.0),
    "iron_conductivity": ("actuator", "iron_conductivity", "conductivity", True, 1.0),
    "iron_rel_permeability": ("actuator", "iron_rel_permeability", "ratio", True, 1.0),
    "resistance": ("actuator", "coil_resistance", "resistance", True, 1.0),
    "sense_resistor": ("actuator", "sense_resistance", "resistance", True, 1.0),
    "inductance": ("actuator", "low_freq_inductance", "inductance", True, 1.0),
    "iron_path_length": ("actuator", "iron_path_length", "length", False, 1.0),
    "torque_constant": ("lumped", "torque_constant", "torque_per_amp", True, 1.0),
    "mag_spring": ("lumped", "mag_spring", "stiffness", False, 1.0),
    "restoration_torque": ("lumped", "mag_spring", "torque", False, 2.0),
    "total_stiffness": ("lumped", "total_stiffness", "stiffness", True, 1.0),
    "total_damping": ("lumped", "total_damping", "damping", True, 1.0),
    "inertia": ("lumped", "inertia", "inertia", True, 1.0),
    "back_emf_constant": ("lumped", "back_emf_constant", "back_emf", False, 1.0),
    "musigma_iron": ("lumped", "musigma_iron", "musigma", False, 1.0),
    "musigma_magnet": ("lumped", "musigma_magnet", "musigma", False, 1.0),
    "lugre_sigma_d": ("lumped", "lugre_sigma_d", "damping", False, 1.0),
    "lugre_coulomb": ("lumped", "lugre_coulomb", "torque", False, 1.0),
    "lugre_static": ("lumped", "lugre_static", "torque", False, 1.0),
    "lugre_stribeck": ("lumped", "lugre_stribeck", "velocity", False, 1.0),
}
# keys that may be given in either of two forms (exactly one required)
_ALTERNATIVES = (("rotor_diameter", "rotor_radius"), ("mag_spring", "restoration_torque"))


def _full_key_table():
    table = {}
    for base, (_, _, family, _, _) in _KEYS.items():
        for suffix, scale in _UNITS[family].items():
            table[f"{base}_{suffix}" if suffix else base] = (base, scale)
    return table


_FULL_KEYS = _full_key_table()


def parse_config(text: str, source: str = "<string>") -> Config:
    """Parse configuration text.  Raises ConfigError with the line number."""
    values = {}
    seen_at = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", line=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _FULL_KEYS:
            raise ConfigError(f"unknown key {key!r}", line=lineno, key=key)
        base, scale = _FULL_KEYS[key]
        if base in seen_at:
            raise ConfigError(f"duplicate key {key!r} (first on line {seen_at[base]})",
                              line=lineno, key=key)
        family = _KEYS[base][2]
        try:
            if family == "count":
                number = int(value)
            else:
                number = float(value) * scale
        except ValueError:
            raise ConfigError(f"bad value {value!r} for {key!r}", line=lineno, key=key) from None
        if family != "count" and not math.isfinite(number):
            raise ConfigError(f"non-finite value for {key!r}", line=lineno, key=key)
        values[base] = number
        seen_at[base] = lineno

    for first, second in _ALTERNATIVES:
        if first in values and second in values:
            raise ConfigError(f"give only one of {first!r} and {second!r}",
                              line=seen_at[second], key=second)
        if first not in values and second not in values:
            raise ConfigError(f"missing required key {first!r} (or {second!r})", key=first)
    for base, (_, _, family, required, _) in _KEYS.items():
        if required and base not in values:
            suffix = _SI_SUFFIX[family]
            name = f"{base}_{suffix}" if suffix else base
            raise ConfigError(f"missing required key {name!r}", key=name)

    sections = {"actuator": {}, "lumped": {}}
    for base, number in values.items():
        section, attr, _, _, factor = _KEYS[base]
        sections[section][attr] = number * factor if factor != 1 else number
    try:
        return Config(ActuatorConfig(**sections["actuator"]),
                      LumpedParams(**sections["lumped"]))
    except GeometryError as exc:
        raise ConfigError(f"{source}: {exc}") from exc


def load_config(path) -> Config:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return parse_config(text, source=str(path))


def table1_config() -> Config:
    """The bundled configuration of the studied prototype."""
    return parse_config(table1_text(), source="tableI.cfg")


def table1_text() -> str:
    return resources.files("magrest").joinpath("data/tableI.cfg").read_text()


def table1_path() -> Path:
    return Path(str(resources.files("magrest").joinpath("data/tableI.cfg")))


def dump_config(cfg: Config) -> str:
    """Serialize to SI-suffixed keys; parsing the result reproduces ``cfg`` exactly."""
    lines = []
    for base, (section, attr, family, _, factor) in _KEYS.items():
        if base in ("rotor_diameter", "restoration_torque"):
            continue
        value = getattr(getattr(cfg, section), attr)
        if value is None:
            continue
        suffix = _SI_SUFFIX[family]
        key = f"{base}_{suffix}" if suffix else base
        lines.append(f"{key} = {value!r}")
    return "\n".join(lines) + "\n"
