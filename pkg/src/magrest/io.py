"""CSV and key-value text formats read and written by the command line."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError

SCHEMAS = {
    "sweep": ("omega_rad_s", "real", "imag", "mag_db", "phase_deg"),
    "trajectory": ("t_s", "beta_rad", "omega_rad_s", "i_c_A"),
    "trajectory_lugre": ("t_s", "beta_rad", "omega_rad_s", "i_c_A", "z_rad"),
    "frf": ("freq_hz", "real", "imag"),
    "frf_polar": ("freq_hz", "mag_db", "phase_deg"),
    "loop": ("t_s", "theta_rad", "torque_Nm"),
    "field_map": ("x_m", "z_m", "real", "imag", "jx_real", "jx_imag", "jz_real", "jz_imag"),
    "residuals": ("freq_hz", "omega_rad_s", "data_real", "data_imag", "model_real",
                  "model_imag", "rel_error"),
}
SCHEMA_VERSION = 1


def hz_to_rad(f):
    return 2 * np.pi * np.asarray(f, dtype=float)


def rad_to_hz(w):
    return np.asarray(w, dtype=float) / (2 * np.pi)


def _fmt(v):
    return f"{float(v):.15g}"


def _open_out(target):
    if hasattr(target, "write"):
        return target, False
    return open(target, "w", newline=""), True


def write_rows(target, header, columns):
    """Write equal-length numeric columns under ``header``."""
    fh, close = _open_out(target)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*columns):
            w.writerow([_fmt(v) for v in row])
    finally:
        if close:
            fh.close()


def write_sweep(target, omega, values):
    values = np.asarray(values, dtype=complex)
    with np.errstate(divide="ignore"):
        mag_db = 20 * np.log10(np.abs(values))
    phase = np.degrees(np.unwrap(np.angle(values)))
    write_rows(target, SCHEMAS["sweep"], (omega, values.real, values.imag, mag_db, phase))


def write_trajectory(target, traj):
    cols = [traj.t, traj.beta, traj.omega_r, traj.i_c]
    schema = "trajectory"
    if traj.z is not None:
        cols.append(traj.z)
        schema = "trajectory_lugre"
    write_rows(target, SCHEMAS[schema], cols)


def write_frf(target, frf):
    write_rows(target, SCHEMAS["frf"], (rad_to_hz(frf.omega), frf.response.real, frf.response.imag))


def write_loop(target, t, theta, torque):
    write_rows(target, SCHEMAS["loop"], (t, theta, torque))


def write_field_map(target, x, z, b, jx, jz):
    b, jx, jz = (np.asarray(v, dtype=complex).ravel() for v in (b, jx, jz))
    write_rows(target, SCHEMAS["field_map"],
               (np.ravel(x), np.ravel(z), b.real, b.imag, jx.real, jx.imag, jz.real, jz.imag))


def write_residuals(target, omega, data, model):
    data = np.asarray(data, dtype=complex)
    model = np.asarray(model, dtype=complex)
    write_rows(target, SCHEMAS["residuals"],
               (rad_to_hz(omega), omega, data.real, data.imag, model.real, model.imag,
                np.abs(model / data - 1)))


def _read_table(source, accepted):
    """Parse a numeric CSV whose header matches one of ``accepted``.

    Returns (schema name, float array).  Errors carry the 1-based line.
    """
    if hasattr(source, "read"):
        text = source.read()
    else:
        try:
            text = Path(source).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read {source}: {exc}") from exc
    rows = list(csv.reader(io.StringIO(text)))
    lines = [(i + 1, r) for i, r in enumerate(rows) if r and any(c.strip() for c in r)]
    if not lines:
        raise ConfigError("empty CSV file")
    head_line, head = lines[0]
    head = tuple(c.strip() for c in head)
    schema = next((name for name in accepted if SCHEMAS[name] == head), None)
    if schema is None:
        wanted = " or ".join(",".join(SCHEMAS[n]) for n in accepted)
        raise ConfigError(f"unrecognized header {','.join(head)!r}, expected {wanted}",
                          line=head_line)
    data = []
    for lineno, row in lines[1:]:
        if len(row) != len(head):
            raise ConfigError(f"expected {len(head)} fields, got {len(row)}", line=lineno)
        try:
            vals = [float(c) for c in row]
        except ValueError:
            raise ConfigError(f"non-numeric field in {','.join(row)!r}", line=lineno) from None
        if not all(math.isfinite(v) for v in vals):
            raise ConfigError("non-finite value", line=lineno)
        data.append(vals)
    if not data:
        raise ConfigError("CSV has a header but no data rows")
    return schema, np.array(data)


def read_frf(source, kind="electrical"):
    """Read ``freq_hz,real,imag`` or ``freq_hz,mag_db,phase_deg`` (auto-detected)."""
    from .identify import FrfDataset

    schema, arr = _read_table(source, ("frf", "frf_polar", "sweep"))
    if schema == "sweep":
        omega = arr[:, 0]
        resp = arr[:, 1] + 1j * arr[:, 2]
    elif schema == "frf":
        omega = hz_to_rad(arr[:, 0])
        resp = arr[:, 1] + 1j * arr[:, 2]
    else:
        omega = hz_to_rad(arr[:, 0])
        resp = 10 ** (arr[:, 1] / 20) * np.exp(1j * np.radians(arr[:, 2]))
    try:
        return FrfDataset(omega, resp, kind)
    except ValueError as exc:
        raise ConfigError(f"invalid FRF data: {exc}") from exc


def read_loop(source):
    """Read ``t_s,theta_rad,torque_Nm``; returns (t, theta, torque)."""
    _, arr = _read_table(source, ("loop",))
    return arr[:, 0], arr[:, 1], arr[:, 2]


def read_trajectory(source):
    _, arr = _read_table(source, ("trajectory", "trajectory_lugre"))
    return arr


def read_sweep(source):
    _, arr = _read_table(source, ("sweep",))
    return arr


# -- key-value reports and manifests ------------------------------------------------

def format_report(items) -> str:
    lines = []
    for key, value in items.items() if isinstance(items, dict) else items:
        if isinstance(value, (bool, np.bool_)):
            value = str(bool(value))
        elif isinstance(value, (float, np.floating)):
            value = repr(float(value))
        elif isinstance(value, np.integer):
            value = int(value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def parse_report(text) -> dict:
    out = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, value = line.partition("=")
        value = value.strip()
        try:
            out[key.strip()] = float(value)
        except ValueError:
            out[key.strip()] = value
    return out


@dataclass
class RunManifest:
    """Everything needed to reproduce one command's outputs."""

    command: str
    config_path: str
    inputs: list = field(default_factory=list)
    outputs: list = field(default_factory=list)
    parameters: dict = field(default_factory=dict)
    config_snapshot: str = ""

    def render(self) -> str:
        from . import __version__

        items = [("command", self.command), ("tool_version", __version__),
                 ("schema_version", SCHEMA_VERSION), ("config_path", self.config_path),
                 ("inputs", ";".join(map(str, self.inputs))),
                 ("outputs", ";".join(map(str, self.outputs)))]
        items += [(f"param.{k}", v) for k, v in self.parameters.items()]
        text = format_report(items)
        if self.config_snapshot:
            text += "# resolved configuration\n"
            text += "".join(f"config.{line}\n" for line in self.config_snapshot.splitlines())
        return text

    def write(self, output_path) -> Path:
        path = Path(str(output_path) + ".manifest")
        path.write_text(self.render())
        return path
