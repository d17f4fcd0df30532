"""Nonlinear and linearized electromechanical model, friction and simulation.

State x = (beta, omega_r, i_c[, z]), input u = (v_c, T_L).  T_L > 0 opposes
motion.  ``z`` is the LuGre bristle deflection, present only when friction
is simulated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import _core
from .config import Config
from .errors import SimulationError, StiffnessGuardError

HALF_PI = 0.5 * math.pi


@dataclass(frozen=True)
class LumpedElectromech:
    """Lumped constants of the actuator (SI).

    ``kd`` and the magnetic spring ``ks = 2 krest`` describe the friction-free
    machine; ``sigma_s``/``sigma_d`` are the linearized pre-sliding friction
    stiffness and damping.  ``Ks``/``Kd`` are the totals seen by the
    small-signal mechanical dynamics.
    """

    J: float
    kd: float
    krest: float
    kt: float
    R: float
    Lc0: float
    kb: float | None = None
    sigma_s: float = 0.0
    sigma_d: float = 0.0

    def __post_init__(self):
        if self.kb is None:
            object.__setattr__(self, "kb", self.kt)
        if not self.J > 0:
            raise ValueError("inertia must be positive")
        if min(self.kd, self.R, self.Lc0, self.sigma_s, self.sigma_d) < 0:
            raise ValueError("damping, resistance, inductance and friction terms must be >= 0")

    @property
    def ks(self) -> float:
        return 2.0 * self.krest

    @property
    def Ks(self) -> float:
        return self.ks + self.sigma_s

    @property
    def Kd(self) -> float:
        return self.kd + self.sigma_d

    @property
    def tau_e(self) -> float:
        return self.Lc0 / self.R

    def frictionless(self) -> "LumpedElectromech":
        return replace(self, sigma_s=0.0, sigma_d=0.0)

    def as_vector(self, lugre: "LuGreParams | None" = None) -> np.ndarray:
        """Parameter layout expected by the integration kernels."""
        if lugre is None:
            fr = (0.0, 0.0, 1.0, 1.0, 1.0)
            damping = self.Kd
        else:
            fr = (lugre.sigma_s, lugre.sigma_d, lugre.Fc, lugre.Fs, lugre.vs)
            damping = self.kd
        return np.array([self.J, damping, self.kt, self.kb, self.krest, self.R, self.Lc0, *fr])

    @classmethod
    def from_config(cls, cfg: Config, bare_coil=False) -> "LumpedElectromech":
        act, lp = cfg.actuator, cfg.lumped
        sigma_s = max(lp.total_stiffness - lp.mag_spring, 0.0)
        sigma_d = lp.lugre_sigma_d
        return cls(
            J=lp.inertia,
            kd=max(lp.total_damping - sigma_d, 0.0),
            krest=lp.restoration_torque,
            kt=lp.torque_constant,
            kb=lp.kb,
            R=act.coil_resistance if bare_coil else act.total_resistance,
            Lc0=act.low_freq_inductance,
            sigma_s=sigma_s,
            sigma_d=sigma_d,
        )


@dataclass(frozen=True)
class StateVector:
    beta: float
    omega_r: float = 0.0
    i_c: float = 0.0
    z: float | None = None

    def as_array(self) -> np.ndarray:
        vals = [self.beta, self.omega_r, self.i_c]
        if self.z is not None:
            vals.append(self.z)
        return np.array(vals, dtype=float)

    @classmethod
    def from_array(cls, x) -> "StateVector":
        x = [float(v) for v in x]
        return cls(*x[:3], z=x[3] if len(x) > 3 else None)


@dataclass(frozen=True)
class LuGreParams:
    sigma_s: float
    sigma_d: float
    Fc: float
    Fs: float
    vs: float

    def __post_init__(self):
        if not (self.Fs >= self.Fc > 0):
            raise ValueError("need Fs >= Fc > 0")
        if not self.vs > 0:
            raise ValueError("Stribeck velocity must be positive")
        if self.sigma_s < 0 or self.sigma_d < 0:
            raise ValueError("bristle stiffness and damping must be >= 0")

    @classmethod
    def from_config(cls, cfg: Config) -> "LuGreParams":
        lp = cfg.lumped
        missing = [n for n in ("lugre_coulomb", "lugre_static", "lugre_stribeck")
                   if getattr(lp, n) is None]
        if missing:
            raise ValueError(f"configuration lacks LuGre values: {', '.join(missing)}")
        return cls(sigma_s=max(lp.total_stiffness - lp.mag_spring, 0.0),
                   sigma_d=lp.lugre_sigma_d, Fc=lp.lugre_coulomb,
                   Fs=lp.lugre_static, vs=lp.lugre_stribeck)


@dataclass(frozen=True)
class TransferFunction:
    """Rational function in s, coefficients in ascending powers."""

    numerator: tuple
    denominator: tuple

    def __post_init__(self):
        num = tuple(float(c) for c in np.atleast_1d(self.numerator))
        den = tuple(float(c) for c in np.atleast_1d(self.denominator))
        while len(den) > 1 and den[-1] == 0:
            den = den[:-1]
        if not any(den):
            raise ValueError("denominator is identically zero")
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "denominator", den)

    def __call__(self, s):
        s = np.asarray(s, dtype=complex)
        P = np.polynomial.polynomial
        return P.polyval(s, self.numerator) / P.polyval(s, self.denominator)

    def freqresp(self, omega):
        return self(1j * np.asarray(omega, dtype=float))

    @property
    def dc_gain(self) -> float:
        return self.numerator[0] / self.denominator[0]

    def poles(self):
        return np.polynomial.polynomial.polyroots(self.denominator)

    def zeros(self):
        return np.polynomial.polynomial.polyroots(self.numerator)


@dataclass(frozen=True)
class LinearModel:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    equilibrium: StateVector

    def freqresp(self, omega, output=0, input=0):
        """Frequency response from input ``input`` to state ``output``."""
        omega = np.atleast_1d(np.asarray(omega, dtype=float))
        n = self.A.shape[0]
        out = np.empty(omega.shape, dtype=complex)
        for k, w in enumerate(omega):
            x = np.linalg.solve(1j * w * np.eye(n) - self.A, self.B[:, input])
            out[k] = x[output]
        return out

    def step_response(self, t, input=0, amplitude=1.0):
        """Exact state response to a step on one input, zero initial state."""
        from scipy.linalg import expm

        t = np.atleast_1d(np.asarray(t, dtype=float))
        b = self.B[:, input] * amplitude
        ainv_b = np.linalg.solve(self.A, b)
        n = self.A.shape[0]
        return np.array([expm(self.A * tk) @ ainv_b - ainv_b for tk in t]).reshape(len(t), n)


@dataclass(frozen=True)
class Equilibrium:
    state: StateVector
    eigenvalues: np.ndarray
    label: str  # "stable", "unstable" or "marginal"


# -- nonlinear model ---------------------------------------------------------------

def nonlinear_rhs(x, u, p: LumpedElectromech, lugre: LuGreParams | None = None):
    """State derivative of the nonlinear model.

    Without ``lugre`` the viscous term uses the total damping Kd.  With
    ``lugre`` a fourth state z is integrated, the bristle damping enters
    through the friction torque and only the bare kd stays viscous.
    """
    if p.Lc0 == 0:
        raise ValueError("Lc0 = 0 makes the electrical dynamics degenerate")
    beta, omega, ic = float(x[0]), float(x[1]), float(x[2])
    vc, tl = float(u[0]), float(u[1])
    s1 = math.sin(beta)
    damping = p.Kd if lugre is None else p.kd
    f2 = (-damping * omega + p.kt * ic * s1 + p.krest * math.sin(2 * beta) - tl) / p.J
    f3 = (-p.R * ic - p.kb * omega * s1 + vc) / p.Lc0
    if lugre is None:
        return np.array([omega, f2, f3])
    z = float(x[3])
    zdot = lugre_rhs(omega, z, lugre)
    fric = lugre.sigma_s * z + lugre.sigma_d * zdot
    return np.array([omega, f2 - fric / p.J, f3, zdot])


def jacobian_at(p: LumpedElectromech, beta: float) -> np.ndarray:
    """Analytic Jacobian of the three-state model at (beta, 0, 0), zero input."""
    return np.array([
        [0.0, 1.0, 0.0],
        [2 * p.krest * math.cos(2 * beta) / p.J, -p.Kd / p.J, p.kt * math.sin(beta) / p.J],
        [0.0, -p.kb * math.sin(beta) / p.Lc0, -p.R / p.Lc0],
    ])


def _label(eigs, tol=1e-12):
    scale = max(1.0, float(np.max(np.abs(eigs))))
    if np.all(eigs.real < -tol * scale):
        return "stable"
    if np.any(eigs.real > tol * scale):
        return "unstable"
    return "marginal"


def equilibria(p: LumpedElectromech) -> list[Equilibrium]:
    """Zero-input equilibria in [0, 2 pi) with eigenvalue-based stability labels."""
    result = []
    for k in range(4):
        beta = k * HALF_PI
        eigs = np.linalg.eigvals(jacobian_at(p, beta))
        result.append(Equilibrium(StateVector(beta, 0.0, 0.0), eigs, _label(eigs)))
    return result


def linearize(p: LumpedElectromech, include_friction=True) -> LinearModel:
    """Small-signal model about MTPAP: states (theta, omega_r, i_c), inputs (v_c, T_L).

    With ``include_friction`` the linearized pre-sliding friction is folded
    into the totals Ks = ks + sigma_s and Kd = kd + sigma_d.
    """
    Ks, Kd = (p.Ks, p.Kd) if include_friction else (p.ks, p.kd)
    A = np.array([
        [0.0, 1.0, 0.0],
        [-Ks / p.J, -Kd / p.J, p.kt / p.J],
        [0.0, -p.kb / p.Lc0, -p.R / p.Lc0],
    ])
    B = np.array([[0.0, 0.0], [0.0, -1.0 / p.J], [1.0 / p.Lc0, 0.0]])
    C = np.array([[1.0, 0.0, 0.0]])
    return LinearModel(A, B, C, StateVector(HALF_PI, 0.0, 0.0))


# -- transfer functions ---------------------------------------------------------------

def mech_tf(p: LumpedElectromech) -> TransferFunction:
    """Current to position, kt / (J s^2 + Kd s + Ks)."""
    return TransferFunction((p.kt,), (p.Ks, p.Kd, p.J))


def natural_freq_damping(p: LumpedElectromech):
    wn = math.sqrt(p.Ks / p.J)
    return wn, p.Kd / (2 * p.J * wn)


def elec_tf_full(p: LumpedElectromech) -> TransferFunction:
    """Voltage to current including back-emf coupling (third order)."""
    L, R, J, Kd, Ks = p.Lc0, p.R, p.J, p.Kd, p.Ks
    return TransferFunction(
        (Ks, Kd, J),
        (R * Ks, R * Kd + L * Ks + p.kt * p.kb, R * J + L * Kd, L * J),
    )


def elec_tf_rl(p: LumpedElectromech) -> TransferFunction:
    return TransferFunction((1.0,), (p.R, p.Lc0))


def electrical_time_constant(p: LumpedElectromech) -> float:
    return p.Lc0 / p.R


# -- LuGre friction ---------------------------------------------------------------------

def stribeck(v, lp: LuGreParams):
    v = np.asarray(v, dtype=float)
    return lp.Fc + (lp.Fs - lp.Fc) * np.exp(-(v / lp.vs) ** 2)


def lugre_rhs(v, z, lp: LuGreParams):
    return v - lp.sigma_s * np.abs(v) * z / stribeck(v, lp)


def lugre_force(v, z, lp: LuGreParams):
    return lp.sigma_s * z + lp.sigma_d * lugre_rhs(v, z, lp)


def lugre_linearized(lp: LuGreParams):
    """Stiffness and damping of the friction about z = 0, v = 0."""
    return lp.sigma_s, lp.sigma_d


def augmented_mech_tf(p: LumpedElectromech, lp: LuGreParams) -> TransferFunction:
    """Mechanical dynamics with the linearized friction added to ks and kd."""
    ss, sd = lugre_linearized(lp)
    return TransferFunction((p.kt,), (p.ks + ss, p.kd + sd, p.J))


# -- drive signals ----------------------------------------------------------------------

class Signal:
    """Time signal evaluated on numpy arrays."""

    def __call__(self, t):
        raise NotImplementedError

    def describe(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class Zero(Signal):
    def __call__(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))

    def describe(self):
        return "zero"


@dataclass(frozen=True)
class Step(Signal):
    amplitude: float
    t0: float = 0.0

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t >= self.t0, self.amplitude, 0.0)

    def describe(self):
        return f"step:{self.amplitude!r}:{self.t0!r}"


@dataclass(frozen=True)
class Sine(Signal):
    amplitude: float
    omega: float  # rad/s
    phase: float = 0.0

    def __call__(self, t):
        return self.amplitude * np.sin(self.omega * np.asarray(t, dtype=float) + self.phase)

    def describe(self):
        return f"sine:{self.amplitude!r}:{self.omega!r}rad/s:{self.phase!r}"


@dataclass(frozen=True)
class Chirp(Signal):
    """Linear sweep from omega0 to omega1 over ``duration``, zero afterwards."""

    amplitude: float
    omega0: float
    omega1: float
    duration: float

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        rate = (self.omega1 - self.omega0) / self.duration
        phase = self.omega0 * t + 0.5 * rate * t**2
        return np.where((t >= 0) & (t <= self.duration), self.amplitude * np.sin(phase), 0.0)

    def describe(self):
        return f"chirp:{self.amplitude!r}:{self.omega0!r}:{self.omega1!r}:{self.duration!r}"


@dataclass(frozen=True)
class Drive:
    """Inputs: coil voltage (or coil current in current mode) and load torque."""

    input: Signal = field(default_factory=Zero)
    load: Signal = field(default_factory=Zero)


# -- simulation ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ActuatorODE:
    """The nonlinear actuator model prepared for the fast integrator.

    ``electrical='current'`` treats the drive input as the coil current
    (ideal current source), removing the electrical dynamics.
    """

    params: LumpedElectromech
    lugre: LuGreParams | None = None
    electrical: str = "voltage"

    def __post_init__(self):
        if self.electrical not in ("voltage", "current"):
            raise ValueError("electrical must be 'voltage' or 'current'")
        if self.electrical == "voltage" and self.params.Lc0 == 0:
            raise ValueError("Lc0 = 0 makes the electrical dynamics degenerate")

    @property
    def n_state(self):
        return 4 if self.lugre is not None else 3

    def max_dt(self) -> float:
        """Largest step the stiffness guard accepts."""
        p = self.params
        stiff = p.ks + (self.lugre.sigma_s if self.lugre is not None else 0.0)
        limits = []
        if stiff > 0:
            limits.append(math.sqrt(p.J / stiff))
        if self.electrical == "voltage":
            limits.append(p.tau_e)
        return min(limits) / 5 if limits else math.inf

    def rhs(self, t, x, u):
        p = self.params
        if self.electrical == "current":
            x = np.array(x, dtype=float)
            x[2] = u[0]
            d = nonlinear_rhs(x, (0.0, u[1]), p, self.lugre)
            d[2] = 0.0
            return d
        return nonlinear_rhs(x, u, p, self.lugre)


@dataclass
class Trajectory:
    t: np.ndarray
    x: np.ndarray

    @property
    def beta(self):
        return self.x[:, 0]

    @property
    def omega_r(self):
        return self.x[:, 1]

    @property
    def i_c(self):
        return self.x[:, 2]

    @property
    def z(self):
        return self.x[:, 3] if self.x.shape[1] > 3 else None

    def __len__(self):
        return len(self.t)


def _rk4_generic(rhs, x0, u1, u2, dt, n_steps, decimate):
    x = np.array(x0, dtype=float)
    rows = [x.copy()]
    for k in range(n_steps):
        t, j = k * dt, 2 * k
        k1 = np.asarray(rhs(t, x, (u1[j], u2[j])))
        k2 = np.asarray(rhs(t + dt / 2, x + dt / 2 * k1, (u1[j + 1], u2[j + 1])))
        k3 = np.asarray(rhs(t + dt / 2, x + dt / 2 * k2, (u1[j + 1], u2[j + 1])))
        k4 = np.asarray(rhs(t + dt, x + dt * k3, (u1[j + 2], u2[j + 2])))
        x = x + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(x)):
            raise SimulationError(f"non-finite state at step {k + 1}: {x}", step=k + 1, state=x)
        if (k + 1) % decimate == 0:
            rows.append(x.copy())
    return np.array(rows)


def simulate(model: ActuatorODE | Callable, x0, drive: Drive | None = None, *, dt, t_end,
             decimate=1, force=False, backend=None) -> Trajectory:
    """Fixed-step classical RK4 integration.

    ``model`` is an :class:`ActuatorODE` (fast kernel path) or any callable
    ``rhs(t, x, u) -> dx/dt`` with ``u = (u1, u2)``.  A step larger than
    the model's stiffness guard raises unless ``force`` is set.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    if decimate < 1:
        raise ValueError("decimate must be >= 1")
    drive = drive or Drive()
    n_steps = int(round(t_end / dt))
    if n_steps < 1:
        raise ValueError("t_end must cover at least one step")
    x0 = np.asarray(x0.as_array() if isinstance(x0, StateVector) else x0, dtype=float)
    t_half = np.arange(2 * n_steps + 1) * (dt / 2)
    u1 = np.ascontiguousarray(drive.input(t_half), dtype=float)
    u2 = np.ascontiguousarray(drive.load(t_half), dtype=float)

    if not isinstance(model, ActuatorODE):
        states = _rk4_generic(model, x0, u1, u2, dt, n_steps, decimate)
        return Trajectory(np.arange(len(states)) * dt * decimate, states)

    limit = model.max_dt()
    if dt > limit and not force:
        raise StiffnessGuardError(f"dt = {dt:g} s exceeds the stiffness guard {limit:g} s")
    if len(x0) < model.n_state:
        x0 = np.concatenate([x0, np.zeros(model.n_state - len(x0))])
    kernel = _core.backends()[backend] if backend else _core.rk4_actuator
    states, fail, last = kernel(
        x0[:model.n_state], u1, u2, float(dt), n_steps, model.params.as_vector(model.lugre),
        int(model.lugre is not None), int(model.electrical == "current"), int(decimate))
    if fail >= 0:
        raise SimulationError(f"non-finite state at step {fail}: {last}", step=fail, state=last)
    return Trajectory(np.arange(len(states)) * dt * decimate, np.asarray(states))


def undriven_energy(beta, omega_r, p: LumpedElectromech):
    """Conserved quantity of the undamped, open-coil model."""
    return 0.5 * p.J * np.asarray(omega_r) ** 2 + 0.5 * p.krest * np.cos(2 * np.asarray(beta))
