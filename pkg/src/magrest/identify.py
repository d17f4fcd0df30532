"""Parameter extraction from frequency responses and hysteresis loops.

Mechanical: plateau gives Ks, the -40 dB/dec mass line gives J, the
resonance peak gives the damping ratio.  Electrical: plateau and -20 dB/dec
line give R and L for the RL model; the eddy models are fitted by complex
least squares on the relative error H_model / H_data - 1.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import least_squares

from .eddy import (EddyProducts, ElectricalModelKind, ElectricalParams, SlabGeometry,
                   electrical_admittance)
from .errors import IdentificationError, NegativeParameterWarning

MIN_POINTS = 8
SLOPE_BAND_DB = 2.0     # tolerance on detected asymptote slopes [dB/dec]
SECANT_DECADES = 0.1    # width of the centred secant used for local slopes
BOUND_TOL = 1e-6        # eddy unknown at or below this counts as on its bound


class FrfKind(enum.Enum):
    MECHANICAL = "mechanical"   # position / current [rad/A]
    ELECTRICAL = "electrical"   # current / voltage [S]


@dataclass
class FrfDataset:
    omega: np.ndarray
    response: np.ndarray
    kind: FrfKind = FrfKind.ELECTRICAL
    excitation_amplitude: float | None = None

    def __post_init__(self):
        self.omega = np.asarray(self.omega, dtype=float).ravel()
        self.response = np.asarray(self.response, dtype=complex).ravel()
        if self.omega.shape != self.response.shape:
            raise ValueError("omega and response lengths differ")
        if np.any(self.omega <= 0):
            raise ValueError("frequencies must be positive")
        if np.any(np.diff(self.omega) <= 0):
            raise ValueError("frequencies must be strictly increasing")
        self.kind = FrfKind(self.kind)

    def __len__(self):
        return len(self.omega)

    @property
    def mag_db(self):
        return 20 * np.log10(np.abs(self.response))

    @property
    def phase_deg(self):
        return np.degrees(np.unwrap(np.angle(self.response)))

    def scaled(self, factor) -> "FrfDataset":
        return FrfDataset(self.omega, self.response * factor, self.kind, self.excitation_amplitude)

    def require_points(self, n=MIN_POINTS):
        if len(self) < n:
            raise ValueError(f"need at least {n} FRF points, got {len(self)}")


@dataclass(frozen=True)
class MechIdentResult:
    Ks: float
    J: float
    omega_n: float
    zeta: float
    Kd: float
    fit_residual: float
    plateau_gain: float = math.nan
    mass_frequency: float = math.nan

    def transfer_function(self, kt):
        from .dynamics import TransferFunction
        return TransferFunction((kt,), (self.Ks, self.Kd, self.J))


@dataclass(frozen=True)
class ElecIdentResult:
    R: float
    Lc0: float
    dof: int
    musigma_iron: float = 0.0
    musigma_magnet: float = 0.0
    fit_residual: float = math.nan
    slab: SlabGeometry | None = None
    method: str = "asymptotes"
    n_evaluations: int = 0

    def params(self, slab: SlabGeometry | None = None) -> ElectricalParams:
        slab = slab or self.slab
        if slab is None:
            if self.dof != 2:
                raise ValueError("an eddy model needs a slab geometry")
            slab = SlabGeometry(1.0, 1.0, 1.0)
        return ElectricalParams(ElectricalModelKind.from_dof(self.dof), self.R, self.Lc0,
                                EddyProducts(self.musigma_iron, self.musigma_magnet), slab)

    def admittance(self, omega):
        return self.params().admittance(omega)


@dataclass
class HysteresisLoop:
    theta: np.ndarray
    torque: np.ndarray
    slope: float
    intercept: float
    band_width: float

    @property
    def samples(self):
        return list(zip(self.theta, self.torque))


# -- slope detection ---------------------------------------------------------------

def local_slopes_db(omega, mag_db, width=SECANT_DECADES):
    """Centred-secant slope of magnitude in dB per decade at every sample.

    The secant spans ``width`` decades, end values interpolated linearly in
    log-frequency; points too close to the edges get NaN.
    """
    lw = np.log10(omega)
    half = width / 2
    lo, hi = lw - half, lw + half
    ok = (lo >= lw[0]) & (hi <= lw[-1])
    out = np.full(lw.shape, np.nan)
    out[ok] = (np.interp(hi[ok], lw, mag_db) - np.interp(lo[ok], lw, mag_db)) / width
    return out


def _plateau(frf: FrfDataset):
    """Median |H| over flat points of the lowest decade."""
    slopes = local_slopes_db(frf.omega, frf.mag_db)
    decade = frf.omega <= 10 * frf.omega[0]
    flat = decade & (np.abs(slopes) <= SLOPE_BAND_DB)
    if np.count_nonzero(flat) < 3:
        raise IdentificationError("NO_PLATEAU", "no flat region in the lowest decade")
    return float(np.median(np.abs(frf.response[flat])))


def _asymptote_points(frf: FrfDataset, target_db, code):
    """Indices on the ``target_db`` slope, restricted to its top half decade."""
    slopes = local_slopes_db(frf.omega, frf.mag_db)
    hits = np.flatnonzero(np.abs(slopes - target_db) <= SLOPE_BAND_DB)
    if hits.size < 3:
        raise IdentificationError(code, f"no {target_db:+.0f} dB/dec region found")
    top = frf.omega[hits[-1]]
    sel = hits[frf.omega[hits] >= top / math.sqrt(10)]
    return sel


# -- mechanical ---------------------------------------------------------------------

def golden_section(f, lo, hi, tol=1e-10, max_iter=200):
    """Minimize a unimodal scalar function on [lo, hi]."""
    inv_phi = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if abs(b - a) <= tol * max(1.0, abs(c) + abs(d)):
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    return (a + b) / 2


def identify_mechanical(frf: FrfDataset, kt) -> MechIdentResult:
    """Ks, J, damping ratio and Kd from a current-to-position FRF."""
    frf.require_points()
    if frf.kind is not FrfKind.MECHANICAL:
        raise ValueError("identify_mechanical needs a mechanical FRF")
    g0 = _plateau(frf)
    ks = kt / g0
    sel = _asymptote_points(frf, -40.0, "NO_MASS_ASYMPTOTE")
    j_est = kt / (frf.omega[sel] ** 2 * np.abs(frf.response[sel]))
    inertia = float(np.median(j_est))
    wn = math.sqrt(ks / inertia)

    mag = np.abs(frf.response)
    k_peak = int(np.argmax(mag))
    if k_peak == 0 or k_peak == len(mag) - 1 or mag[k_peak] <= 1.05 * g0:
        raise IdentificationError("NO_RESONANCE", "no interior resonance peak")
    peak_data = mag[k_peak]
    w = frf.omega

    def peak_model(zeta):
        h = kt / (ks - inertia * w**2 + 2j * zeta * inertia * wn * w)
        return float(np.max(np.abs(h)))

    zeta = golden_section(lambda z: abs(peak_model(z) - peak_data), 1e-6, 2.0)
    kd = 2 * inertia * wn * zeta
    model = kt / (ks - inertia * w**2 + 1j * kd * w)
    resid = float(np.sqrt(np.mean(np.abs(model / frf.response - 1) ** 2)))
    return MechIdentResult(ks, inertia, wn, zeta, kd, resid, g0, float(frf.omega[sel[-1]]))


# -- electrical -----------------------------------------------------------------------

def _relative_residual(h_model, h_data):
    return np.sqrt(np.mean(np.abs(h_model / h_data - 1) ** 2))


def identify_rl(frf: FrfDataset) -> ElecIdentResult:
    """R from the DC plateau, L from the -20 dB/dec region."""
    frf.require_points()
    if frf.kind is not FrfKind.ELECTRICAL:
        raise ValueError("identify_rl needs an electrical FRF")
    r = 1.0 / _plateau(frf)
    sel = _asymptote_points(frf, -20.0, "NO_INDUCTIVE_ASYMPTOTE")
    ind = float(np.median(1.0 / (frf.omega[sel] * np.abs(frf.response[sel]))))
    model = 1.0 / (r + 1j * frf.omega * ind)
    return ElecIdentResult(r, ind, 2, fit_residual=float(_relative_residual(model, frf.response)),
                           method="asymptotes")


def _rl_start(frf: FrfDataset):
    try:
        res = identify_rl(frf)
        return res.R, res.Lc0
    except IdentificationError:
        # fall back on the lowest and highest samples
        r = 1.0 / abs(frf.response[0])
        ind = abs(1.0 / frf.response[-1]) / frf.omega[-1]
        return r, ind


def fit_electrical(frf: FrfDataset, dof: int, slab: SlabGeometry | None = None,
                   start=None, ftol=1e-10, max_nfev=10_000) -> ElecIdentResult:
    """Complex least-squares fit of the 2-, 3- or 4-parameter admittance.

    Minimizes sum |H_model / H_data - 1|^2 over the samples.  The iron term
    is parametrized by sqrt(mu sigma) and the magnet term by mu sigma, both
    bounded below by zero.
    """
    frf.require_points()
    kind = ElectricalModelKind.from_dof(dof)
    if dof > 2 and slab is None:
        raise ValueError("an eddy model needs a slab geometry")
    if start is None:
        r0, l0 = _rl_start(frf)
        start = (r0, l0, 0.0, 0.0)
    r0, l0, mi0, mm0 = (list(start) + [0.0, 0.0])[:4]
    si0 = math.sqrt(max(mi0, 0.0))
    w, h = frf.omega, frf.response
    slab_ = slab or SlabGeometry(1.0, 1.0, 1.0)

    # scaled unknowns: R/r0, L/l0, sqrt(mu sigma_i), mu sigma_m
    def unpack(p):
        r, ind = p[0] * r0, p[1] * l0
        mi = p[2] ** 2 if dof >= 3 else 0.0
        mm = p[3] if dof == 4 else 0.0
        return r, ind, mi, mm

    def residual(p):
        r, ind, mi, mm = unpack(p)
        model = electrical_admittance(w, kind, r, ind, EddyProducts(mi, mm), slab_)
        e = model / h - 1
        return np.concatenate([e.real, e.imag])

    n_par = dof
    x0 = np.array([1.0, 1.0, si0, max(mm0, 0.0)])[:n_par]
    lower = np.array([1e-9, 1e-9, 0.0, 0.0])[:n_par]
    x0 = np.maximum(x0, lower)
    sol = least_squares(residual, x0, bounds=(lower, np.inf), method="trf",
                        ftol=ftol, xtol=1e-14, gtol=1e-14, max_nfev=max_nfev,
                        x_scale="jac")
    if sol.status == 0:
        raise IdentificationError("NONCONVERGENCE",
                                  f"no convergence within {max_nfev} evaluations")
    names = ["R", "Lc0", "musigma_iron", "musigma_magnet"]
    for k in range(2, n_par):
        # eddy unknowns are O(1) in these units; 1e-6 means pinned at zero
        if sol.active_mask[k] != 0 or sol.x[k] <= BOUND_TOL:
            warnings.warn(f"NEGATIVE_PARAM: {names[k]} projected to 0", NegativeParameterWarning,
                          stacklevel=2)
    r, ind, mi, mm = unpack(sol.x)
    resid = float(np.sqrt(np.mean(sol.fun**2) * 2))
    return ElecIdentResult(r, ind, dof, mi, mm, resid, slab, method="complex-least-squares",
                           n_evaluations=int(sol.nfev))


def identify_eddy(frf: FrfDataset, dof: int, slab: SlabGeometry) -> ElecIdentResult:
    """Fit the 3- or 4-parameter eddy model, starting from the RL estimate.

    The 4-parameter fit also restarts from the 3-parameter optimum and keeps
    the better of the two, so its residual never exceeds the nested model's.
    """
    if dof not in (3, 4):
        raise ValueError("identify_eddy handles dof 3 or 4")
    if frf.kind is not FrfKind.ELECTRICAL:
        raise ValueError("identify_eddy needs an electrical FRF")
    best = fit_electrical(frf, dof, slab)
    if dof == 4:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NegativeParameterWarning)
            nested = fit_electrical(frf, 3, slab)
        if nested.fit_residual < best.fit_residual:
            alt = fit_electrical(frf, 4, slab, start=(nested.R, nested.Lc0, nested.musigma_iron, 0.0))
            if alt.fit_residual < best.fit_residual:
                best = alt
    return best


# -- comparison ---------------------------------------------------------------------------

def _phase_at(source, omega):
    if isinstance(source, FrfDataset):
        lo, hi = source.omega[0], source.omega[-1]
        if not (lo <= omega <= hi):
            raise IdentificationError(
                "OUT_OF_RANGE", f"omega {omega:g} rad/s outside data range [{lo:g}, {hi:g}]")
        return float(np.interp(math.log10(omega), np.log10(source.omega), source.phase_deg))
    if hasattr(source, "admittance"):
        value = source.admittance(np.array([omega]))
    elif callable(getattr(source, "freqresp", None)):
        value = source.freqresp(np.array([omega]))
    else:
        raise TypeError(f"cannot evaluate {type(source).__name__}")
    return float(np.degrees(np.angle(np.asarray(value).ravel()[0])))


def phase_error_at(model, data, omega) -> float:
    """|arg model - arg data| in degrees at ``omega`` [rad/s].

    Either side may be a dataset (phase interpolated linearly in log
    frequency) or an evaluable model.
    """
    diff = _phase_at(model, omega) - _phase_at(data, omega)
    return abs((diff + 180.0) % 360.0 - 180.0)


@dataclass
class ComparisonRow:
    dof: int
    result: ElecIdentResult
    phase_error_deg: float
    magnitude_error_db: float


def compare_models(frf: FrfDataset, slab: SlabGeometry, omega_eval, rl_method="fit"):
    """Fit the 2/3/4-parameter electrical models and score them at ``omega_eval``.

    ``rl_method='fit'`` uses complex least squares for the RL model (nested
    with the eddy fits); ``'asymptotes'`` uses the plateau / slope procedure.
    """
    rows = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NegativeParameterWarning)
        rl = identify_rl(frf) if rl_method == "asymptotes" else fit_electrical(frf, 2)
        fits = [rl, identify_eddy(frf, 3, slab), identify_eddy(frf, 4, slab)]
    lw = np.log10(frf.omega)
    mag_data = float(np.interp(math.log10(omega_eval), lw, frf.mag_db))
    for res in fits:
        if res.slab is None and res.dof == 2:
            res = replace(res, slab=slab)
        mag_model = 20 * math.log10(abs(res.admittance(np.array([omega_eval]))[0]))
        rows.append(ComparisonRow(res.dof, res, phase_error_at(res, frf, omega_eval),
                                  abs(mag_model - mag_data)))
    return rows


# -- hysteresis loops -----------------------------------------------------------------------

def _count_cycles(theta):
    centred = np.asarray(theta) - np.mean(theta)
    signs = np.sign(centred[centred != 0])
    return np.count_nonzero(np.diff(signs)) / 2


def loop_stiffness(theta, torque) -> HysteresisLoop:
    """Total-least-squares line through a (theta, torque) loop.

    The fit is done in SI units as given.  ``band_width`` is the spread of
    torque about the line.
    """
    theta = np.asarray(theta, dtype=float)
    torque = np.asarray(torque, dtype=float)
    if theta.shape != torque.shape or theta.size < MIN_POINTS or _count_cycles(theta) < 1:
        raise IdentificationError("INSUFFICIENT_CYCLE", "need at least one full cycle of samples")
    tm, qm = theta.mean(), torque.mean()
    pts = np.column_stack([theta - tm, torque - qm])
    _, _, vt = np.linalg.svd(pts, full_matrices=False)
    direction = vt[0]
    if direction[0] == 0:
        raise IdentificationError("INSUFFICIENT_CYCLE", "loop has no angular extent")
    slope = float(direction[1] / direction[0])
    intercept = float(qm - slope * tm)
    resid = torque - (slope * theta + intercept)
    return HysteresisLoop(theta, torque, slope, intercept, float(resid.max() - resid.min()))
