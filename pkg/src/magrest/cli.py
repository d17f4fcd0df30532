"""Command-line interface: ``magrest <command> [options]``.

Exit codes: 0 success, 1 numerical failure (error name printed), 2 bad input
or usage.  Frequencies on the command line are in Hz unless a flag says
otherwise; everything internal is rad/s.
"""

from __future__ import annotations

import argparse
import math
import sys
import warnings
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__, io
from .config import Config, dump_config, load_config, table1_config, table1_path
from .dynamics import (ActuatorODE, Chirp, Drive, LuGreParams, LumpedElectromech, Sine, Step,
                       Zero, elec_tf_full, electrical_time_constant, mech_tf,
                       natural_freq_damping, simulate, undriven_energy)
from .eddy import (EddyProducts, ElectricalModelKind, ElectricalParams, SlabGeometry,
                   lamination_current_density, lamination_field, magnet_current_density,
                   magnet_field_2d)
from .errors import (ConfigError, GeometryError, IdentificationError, MagrestError,
                     NegativeParameterWarning, SimulationError, StiffnessGuardError)
from .geometry_magnetics import derive_all
from .identify import (FrfKind, compare_models, fit_electrical, identify_eddy,
                       identify_mechanical, identify_rl, loop_stiffness)
from .oracle import synth_frf

EXIT_OK, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2
ELEC_MODELS = {"rl": 2, "eddy3": 3, "eddy4": 4}


class UsageError(MagrestError):
    pass


def _config(args) -> tuple[Config, str]:
    if args.config:
        return load_config(args.config), str(args.config)
    return table1_config(), str(table1_path())


def _electrical_params(cfg: Config, dof: int, bare_coil=False) -> ElectricalParams:
    act, lp = cfg.actuator, cfg.lumped
    kind = ElectricalModelKind.from_dof(dof)
    mi = (lp.musigma_iron or 0.0) if dof >= 3 else 0.0
    mm = (lp.musigma_magnet or 0.0) if dof == 4 else 0.0
    if dof >= 3 and lp.musigma_iron is None:
        raise UsageError("configuration has no musigma_iron value")
    if dof == 4 and lp.musigma_magnet is None:
        raise UsageError("configuration has no musigma_magnet value")
    r = act.coil_resistance if bare_coil else act.total_resistance
    return ElectricalParams(kind, r, act.low_freq_inductance, EddyProducts(mi, mm),
                            SlabGeometry.from_config(cfg))


def _freq_grid(args):
    scale = 1.0 if args.rad else 2 * math.pi
    if not (0 < args.fmin < args.fmax):
        raise UsageError("need 0 < fmin < fmax")
    if args.points < 2:
        raise UsageError("need at least 2 points")
    return np.logspace(math.log10(args.fmin * scale), math.log10(args.fmax * scale), args.points)


def _write_with_manifest(path, writer, manifest):
    writer(path)
    manifest.outputs.append(str(path))
    manifest.write(path)


# -- commands -------------------------------------------------------------------------

def cmd_derive(args):
    cfg, cfg_path = _config(args)
    d = derive_all(cfg)
    p = LumpedElectromech.from_config(cfg)
    wn, zeta = natural_freq_damping(p)
    rel = d.reluctances
    report = {
        "magnet_length_m": d.path.magnet_length,
        "airgap_length_m": d.path.airgap_length,
        "iron_length_m": d.path.iron_length,
        "pole_area_m2": d.path.pole_area,
        "magnetization_A_per_m": d.magnet.magnetization,
        "pm_mmf_A": d.mmf,
        "k1_T_per_A": d.spectrum.k1,
        "reluctance_airgap_per_H": rel.airgap,
        "reluctance_magnet_per_H": rel.magnet,
        "reluctance_iron_per_H": rel.iron,
        "reluctance_total_per_H": rel.total,
        "reluctance_total_from_inductance_per_H": rel.total_from_inductance,
        "mu_eff_iron_H_per_m": rel.mu_eff_iron,
        "mu_eff_magnet_H_per_m": rel.mu_eff_magnet,
        "torque_constant_Nm_per_A": p.kt,
        "back_emf_constant_Vs_per_rad": p.kb,
        "restoration_torque_Nm": p.krest,
        "mag_spring_Nm_per_rad": p.ks,
        "friction_stiffness_Nm_per_rad": p.sigma_s,
        "total_stiffness_Nm_per_rad": p.Ks,
        "total_damping_Nms_per_rad": p.Kd,
        "natural_frequency_rad_s": wn,
        "damping_ratio": zeta,
        "electrical_time_constant_s": electrical_time_constant(p),
        "mech_dc_gain_rad_per_A": mech_tf(p).dc_gain,
        "total_resistance_ohm": p.R,
    }
    text = io.format_report(report)
    sys.stdout.write(text)
    if args.snapshot:
        Path(args.snapshot).write_text(dump_config(cfg))
    if args.output:
        manifest = io.RunManifest("derive", cfg_path, config_snapshot=dump_config(cfg))
        _write_with_manifest(args.output, lambda f: Path(f).write_text(text), manifest)
    return EXIT_OK


def cmd_freqresp(args):
    cfg, cfg_path = _config(args)
    omega = _freq_grid(args)
    if args.include_dc:
        omega = np.concatenate([[0.0], omega])
    if args.model in ELEC_MODELS:
        values = _electrical_params(cfg, ELEC_MODELS[args.model], args.bare_coil).admittance(omega)
    else:
        p = LumpedElectromech.from_config(cfg, bare_coil=args.bare_coil)
        tf = mech_tf(p) if args.model == "mech" else elec_tf_full(p)
        values = tf.freqresp(omega)
    manifest = io.RunManifest("freqresp", cfg_path, config_snapshot=dump_config(cfg),
                              parameters={"model": args.model, "fmin": args.fmin,
                                          "fmax": args.fmax, "points": args.points,
                                          "units": "rad/s" if args.rad else "Hz",
                                          "include_dc": args.include_dc,
                                          "bare_coil": args.bare_coil})
    if args.output:
        _write_with_manifest(args.output, lambda f: io.write_sweep(f, omega, values), manifest)
    else:
        io.write_sweep(sys.stdout, omega, values)
    return EXIT_OK


def parse_signal(spec: str, degrees=False):
    """``zero``, ``step:A[:t0]``, ``sine:A:f_hz[:phase]``, ``chirp:A:f0_hz:f1_hz:T``."""
    parts = spec.split(":")
    name, vals = parts[0].lower(), parts[1:]
    try:
        nums = [float(v) for v in vals]
    except ValueError:
        raise UsageError(f"bad numbers in signal {spec!r}") from None
    if name == "zero" and not nums:
        return Zero()
    if name == "step" and len(nums) in (1, 2):
        return Step(*nums)
    if name == "sine" and len(nums) in (2, 3):
        phase = nums[2] if len(nums) == 3 else 0.0
        return Sine(nums[0], 2 * math.pi * nums[1], math.radians(phase) if degrees else phase)
    if name == "chirp" and len(nums) == 4:
        return Chirp(nums[0], 2 * math.pi * nums[1], 2 * math.pi * nums[2], nums[3])
    raise UsageError(f"cannot parse signal {spec!r}")


def cmd_simulate(args):
    cfg, cfg_path = _config(args)
    p = LumpedElectromech.from_config(cfg)
    if args.no_damping:
        p = LumpedElectromech(p.J, 0.0, p.krest, p.kt, p.R, p.Lc0, p.kb, p.sigma_s, 0.0)
    lugre = LuGreParams.from_config(cfg) if args.lugre else None
    if lugre is not None and args.no_damping:
        lugre = LuGreParams(lugre.sigma_s, 0.0, lugre.Fc, lugre.Fs, lugre.vs)
    electrical = "current" if (args.open_coil or args.current_drive) else "voltage"
    drive_sig = Zero() if args.open_coil else parse_signal(args.drive, args.degrees)
    drive = Drive(drive_sig, parse_signal(args.load, args.degrees))
    ode = ActuatorODE(p, lugre, electrical)
    if args.beta0 is None:
        beta0 = math.pi / 2
    else:
        beta0 = math.radians(args.beta0) if args.degrees else args.beta0
    x0 = [beta0, args.omega0, 0.0] + ([0.0] if lugre else [])
    limit = ode.max_dt()
    if args.dt > limit:
        print(f"warning: dt = {args.dt:g} s exceeds the stiffness guard {limit:g} s",
              file=sys.stderr)
        if not args.force:
            raise UsageError("refusing to integrate; reduce --dt or pass --force")
    traj = simulate(ode, x0, drive, dt=args.dt, t_end=args.t_end, decimate=args.decimate,
                    force=args.force)
    summary = {"samples": len(traj), "final_beta_rad": float(traj.beta[-1]),
               "final_omega_rad_s": float(traj.omega_r[-1]), "final_i_c_A": float(traj.i_c[-1])}
    if args.open_coil and p.Kd == 0 and lugre is None:
        e = undriven_energy(traj.beta, traj.omega_r, p)
        summary["energy_drift_rel"] = float(np.max(np.abs(e - e[0])) / abs(e[0]))
    manifest = io.RunManifest("simulate", cfg_path, config_snapshot=dump_config(cfg),
                              parameters={"drive": args.drive, "load": args.load, "dt": args.dt,
                                          "t_end": args.t_end, "decimate": args.decimate,
                                          "lugre": args.lugre, "electrical": electrical,
                                          "no_damping": args.no_damping,
                                          "beta0_rad": beta0, "omega0": args.omega0})
    if args.output:
        _write_with_manifest(args.output, lambda f: io.write_trajectory(f, traj), manifest)
        if args.loop_output:
            torque = p.kt * traj.i_c * np.sin(traj.beta)
            _write_with_manifest(args.loop_output,
                                 lambda f: io.write_loop(f, traj.t, traj.beta - math.pi / 2, torque),
                                 manifest)
        sys.stdout.write(io.format_report(summary))
    else:
        io.write_trajectory(sys.stdout, traj)
    return EXIT_OK


def _elec_report(res, frf):
    model = res.admittance(frf.omega)
    return {"dof": res.dof, "R_ohm": res.R, "Lc0_H": res.Lc0,
            "musigma_iron_s_per_m2": res.musigma_iron,
            "musigma_magnet_s_per_m2": res.musigma_magnet,
            "fit_residual": res.fit_residual, "method": res.method,
            "residual_definition": "rms |H_model/H_data - 1|, complex"}, model


def cmd_identify(args):
    cfg, cfg_path = _config(args)
    manifest = io.RunManifest("identify", cfg_path, inputs=[args.data],
                              config_snapshot=dump_config(cfg),
                              parameters={"kind": args.kind, "dof": args.dof})
    if args.kind == "loop":
        t, theta, torque = io.read_loop(args.data)
        loop = loop_stiffness(theta, torque)
        report = {"slope_Nm_per_rad": loop.slope, "intercept_Nm": loop.intercept,
                  "band_width_Nm": loop.band_width, "samples": len(t)}
        model = None
    elif args.kind == "mech":
        frf = io.read_frf(args.data, FrfKind.MECHANICAL)
        res = identify_mechanical(frf, cfg.lumped.torque_constant)
        report = {"Ks_Nm_per_rad": res.Ks, "J_kgm2": res.J, "omega_n_rad_s": res.omega_n,
                  "zeta": res.zeta, "Kd_Nms_per_rad": res.Kd, "fit_residual": res.fit_residual,
                  "plateau_gain_rad_per_A": res.plateau_gain}
        model = res.transfer_function(cfg.lumped.torque_constant).freqresp(frf.omega)
    else:
        frf = io.read_frf(args.data, FrfKind.ELECTRICAL)
        slab = SlabGeometry.from_config(cfg)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", NegativeParameterWarning)
            if args.dof == 2:
                res = identify_rl(frf) if args.rl_method == "asymptotes" else fit_electrical(frf, 2)
            else:
                res = identify_eddy(frf, args.dof, slab)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
        res = replace(res, slab=slab)
        report, model = _elec_report(res, frf)
        if caught:
            report["warnings"] = "; ".join(str(w.message) for w in caught)
    text = io.format_report(report)
    sys.stdout.write(text)
    if args.output:
        _write_with_manifest(args.output, lambda f: Path(f).write_text(text), manifest)
    if args.residuals and model is not None:
        _write_with_manifest(args.residuals,
                             lambda f: io.write_residuals(f, frf.omega, frf.response, model),
                             manifest)
    return EXIT_OK


def cmd_compare(args):
    cfg, cfg_path = _config(args)
    frf = io.read_frf(args.data, FrfKind.ELECTRICAL)
    omega_eval = 2 * math.pi * args.at_freq_hz
    if not frf.omega[0] <= omega_eval <= frf.omega[-1]:
        raise IdentificationError("OUT_OF_RANGE", "comparison frequency outside the data")
    rows = compare_models(frf, SlabGeometry.from_config(cfg), omega_eval, args.rl_method)
    lines = [f"# phase/magnitude error at {args.at_freq_hz:g} Hz",
             "dof,phase_error_deg,magnitude_error_db,fit_residual,R_ohm,Lc0_H,"
             "musigma_iron_s_per_m2,musigma_magnet_s_per_m2"]
    for r in rows:
        res = r.result
        lines.append(",".join(f"{v:.10g}" if isinstance(v, float) else str(v) for v in (
            r.dof, r.phase_error_deg, r.magnitude_error_db, res.fit_residual, res.R, res.Lc0,
            res.musigma_iron, res.musigma_magnet)))
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if args.output:
        manifest = io.RunManifest("compare", cfg_path, inputs=[args.data],
                                  config_snapshot=dump_config(cfg),
                                  parameters={"at_freq_hz": args.at_freq_hz,
                                              "rl_method": args.rl_method})
        _write_with_manifest(args.output, lambda f: Path(f).write_text(text), manifest)
    return EXIT_OK


def cmd_fields(args):
    cfg, cfg_path = _config(args)
    act, lp = cfg.actuator, cfg.lumped
    d = derive_all(cfg)
    omega = 2 * math.pi * args.freq_hz
    if args.grid < 2:
        raise UsageError("grid needs at least 2 points per axis")
    if args.domain == "lam":
        if lp.musigma_iron is None:
            raise UsageError("configuration has no musigma_iron value")
        dd = act.lamination_thickness
        z = np.linspace(-dd / 2, dd / 2, args.grid)
        x = np.zeros_like(z)
        b = lamination_field(z, omega, lp.musigma_iron, dd)
        jx = lamination_current_density(z, omega, 1.0, lp.musigma_iron,
                                        d.reluctances.mu_eff_iron, dd)
        jz = np.zeros_like(b)
    else:
        if lp.musigma_magnet is None:
            raise UsageError("configuration has no musigma_magnet value")
        a, bb = act.pole_width / 2, act.stack_length / 2
        xg, zg = np.meshgrid(np.linspace(-a, a, args.grid), np.linspace(-bb, bb, args.grid),
                             indexing="ij")
        x, z = xg.ravel(), zg.ravel()
        b = magnet_field_2d(x, z, omega, lp.musigma_magnet, a, bb, args.n_max)
        jx, jz = magnet_current_density(x, z, omega, lp.musigma_magnet,
                                        d.reluctances.mu_eff_magnet, a, bb, args.n_max)
    manifest = io.RunManifest("fields", cfg_path, config_snapshot=dump_config(cfg),
                              parameters={"domain": args.domain, "freq_hz": args.freq_hz,
                                          "grid": args.grid, "n_max": args.n_max})
    if args.output:
        _write_with_manifest(args.output, lambda f: io.write_field_map(f, x, z, b, jx, jz),
                             manifest)
    else:
        io.write_field_map(sys.stdout, x, z, b, jx, jz)
    return EXIT_OK


def cmd_synth(args):
    cfg, cfg_path = _config(args)
    omega = _freq_grid(args)
    if args.model in ELEC_MODELS:
        frf = synth_frf(_electrical_params(cfg, ELEC_MODELS[args.model], args.bare_coil),
                        "elec", omega, args.noise, args.seed)
    else:
        frf = synth_frf(LumpedElectromech.from_config(cfg, bare_coil=args.bare_coil),
                        args.model, omega, args.noise, args.seed)
    manifest = io.RunManifest("synth", cfg_path, config_snapshot=dump_config(cfg),
                              parameters={"model": args.model, "noise": args.noise,
                                          "seed": args.seed, "fmin": args.fmin,
                                          "fmax": args.fmax, "points": args.points})
    if args.output:
        _write_with_manifest(args.output, lambda f: io.write_frf(f, frf), manifest)
    else:
        io.write_frf(sys.stdout, frf)
    return EXIT_OK


# -- parser ---------------------------------------------------------------------------

def _add_grid(sp, fmin, fmax, points):
    sp.add_argument("--fmin", type=float, default=fmin, help="lowest frequency [Hz]")
    sp.add_argument("--fmax", type=float, default=fmax, help="highest frequency [Hz]")
    sp.add_argument("--points", type=int, default=points)
    sp.add_argument("--rad", action="store_true", help="fmin/fmax are in rad/s")
    sp.add_argument("--bare-coil", action="store_true",
                    help="use the coil resistance alone instead of coil + sense resistor")


def build_parser():
    ap = argparse.ArgumentParser(prog="magrest", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", "-c", help="configuration file (default: bundled tableI.cfg)")
        sp.add_argument("--output", "-o", help="output file (a .manifest is written next to it)")

    sp = sub.add_parser("derive", help="derived magnetic and dynamic constants")
    common(sp)
    sp.add_argument("--snapshot", help="write the resolved configuration in SI keys")
    sp.set_defaults(func=cmd_derive)

    sp = sub.add_parser("freqresp", help="frequency-response sweep CSV")
    common(sp)
    sp.add_argument("--model", required=True, choices=["rl", "eddy3", "eddy4", "mech", "elec-full"])
    _add_grid(sp, 1.0, 1e5, 200)
    sp.add_argument("--include-dc", action="store_true", help="prepend an omega = 0 row")
    sp.set_defaults(func=cmd_freqresp)

    sp = sub.add_parser("simulate", help="time-domain simulation of the nonlinear model")
    common(sp)
    sp.add_argument("--drive", default="zero",
                    help="coil voltage (or current with --current-drive): zero | step:A[:t0] | "
                         "sine:A:f_hz[:phase] | chirp:A:f0_hz:f1_hz:T")
    sp.add_argument("--load", default="zero", help="load torque signal, same syntax")
    sp.add_argument("--dt", type=float, required=True)
    sp.add_argument("--t-end", type=float, required=True)
    sp.add_argument("--decimate", type=int, default=1)
    sp.add_argument("--beta0", type=float, default=None,
                    help="initial rotor angle (default: MTPAP, pi/2 rad)")
    sp.add_argument("--omega0", type=float, default=0.0, help="initial speed [rad/s]")
    sp.add_argument("--degrees", action="store_true", help="angles given in degrees")
    sp.add_argument("--lugre", action="store_true", help="simulate LuGre friction")
    sp.add_argument("--current-drive", action="store_true", help="the drive is the coil current")
    sp.add_argument("--open-coil", action="store_true", help="coil current held at zero")
    sp.add_argument("--no-damping", action="store_true", help="remove viscous damping")
    sp.add_argument("--force", action="store_true", help="ignore the stiffness guard")
    sp.add_argument("--loop-output", help="also write (theta, coil torque) loop CSV")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("identify", help="identify parameters from an FRF or loop CSV")
    common(sp)
    sp.add_argument("data", help="FRF CSV (freq_hz,real,imag or freq_hz,mag_db,phase_deg) "
                                 "or loop CSV (t_s,theta_rad,torque_Nm)")
    sp.add_argument("--kind", required=True, choices=["mech", "elec", "loop"])
    sp.add_argument("--dof", type=int, default=4, choices=[2, 3, 4])
    sp.add_argument("--rl-method", default="asymptotes", choices=["asymptotes", "fit"])
    sp.add_argument("--residuals", help="per-frequency residual CSV")
    sp.set_defaults(func=cmd_identify)

    sp = sub.add_parser("compare", help="fit 2/3/4-parameter electrical models and compare")
    common(sp)
    sp.add_argument("data")
    sp.add_argument("--at-freq-hz", type=float, default=20000.0)
    sp.add_argument("--rl-method", default="fit", choices=["asymptotes", "fit"])
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("fields", help="eddy field and current-density map CSV")
    common(sp)
    sp.add_argument("--domain", required=True, choices=["lam", "magnet"])
    sp.add_argument("--freq-hz", type=float, required=True)
    sp.add_argument("--grid", type=int, default=21)
    sp.add_argument("--n-max", type=int, default=101)
    sp.set_defaults(func=cmd_fields)

    sp = sub.add_parser("synth", help="synthetic FRF CSV from the model")
    common(sp)
    sp.add_argument("--model", required=True, choices=["rl", "eddy3", "eddy4", "mech", "elec-full"])
    _add_grid(sp, 1.0, 1e5, 200)
    sp.add_argument("--noise", type=float, default=0.0, help="relative complex noise level")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_synth)
    return ap


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ConfigError, UsageError, GeometryError, StiffnessGuardError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IdentificationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (SimulationError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
