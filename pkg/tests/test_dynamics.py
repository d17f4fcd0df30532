import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from magrest.dynamics import (
    ActuatorODE, Chirp, Drive, LinearModel, LuGreParams, LumpedElectromech, Sine, StateVector, Step,
    TransferFunction, Zero, augmented_mech_tf, elec_tf_full, elec_tf_rl, electrical_time_constant,
    equilibria, jacobian_at, linearize, lugre_force, lugre_rhs, mech_tf, natural_freq_damping,
    nonlinear_rhs, simulate, stribeck, undriven_energy)
from magrest.errors import SimulationError, StiffnessGuardError
from magrest.oracle import numerical_jacobian

HALF_PI = math.pi / 2


def random_params(rng):
    """Log-uniform draws a decade either side of the prototype values."""
    def lu(v):
        return v * 10 ** rng.uniform(-1, 1)
    return LumpedElectromech(J=lu(1.65e-9), kd=lu(4.49e-7), krest=lu(3.18e-4), kt=lu(1.906e-3),
                             R=lu(1.86), Lc0=lu(2.8e-4), kb=lu(1.906e-3))


def test_from_config(params, cfg):
    assert params.ks == pytest.approx(0.636e-3)
    assert params.Ks == pytest.approx(1.3e-3)
    assert params.Kd == pytest.approx(cfg.lumped.total_damping)
    assert params.R == pytest.approx(1.86)
    assert LumpedElectromech.from_config(cfg, bare_coil=True).R == pytest.approx(cfg.actuator.coil_resistance)
    assert params.frictionless().Ks == params.ks


def test_parameter_validation():
    with pytest.raises(ValueError):
        LumpedElectromech(J=0, kd=0, krest=0, kt=1, R=1, Lc0=1)
    with pytest.raises(ValueError):
        LumpedElectromech(J=1, kd=-1, krest=0, kt=1, R=1, Lc0=1)
    with pytest.raises(ValueError):
        LuGreParams(1.0, 0.0, Fc=2.0, Fs=1.0, vs=1.0)
    with pytest.raises(ValueError):
        LuGreParams(1.0, 0.0, Fc=1.0, Fs=2.0, vs=0.0)


def test_state_vector_round_trip():
    s = StateVector(1.0, 2.0, 3.0, 4.0)
    assert StateVector.from_array(s.as_array()) == s
    assert len(StateVector(1.0).as_array()) == 3


def test_natural_frequency_and_gains(params):
    wn, zeta = natural_freq_damping(params)
    assert wn == pytest.approx(887.6, abs=0.5)
    assert zeta == pytest.approx(0.15329, rel=1e-4)
    assert mech_tf(params).dc_gain == pytest.approx(1.466, abs=0.005)
    assert electrical_time_constant(params) * 1e6 == pytest.approx(150.5, abs=0.5)
    assert elec_tf_rl(params).dc_gain == pytest.approx(1 / 1.86)


def test_equilibria(params):
    eq = equilibria(params)
    assert [e.state.beta for e in eq] == pytest.approx([0, HALF_PI, math.pi, 3 * HALF_PI])
    assert [e.label for e in eq] == ["unstable", "stable", "unstable", "stable"]
    for e in eq:
        np.testing.assert_allclose(nonlinear_rhs(e.state.as_array(), (0, 0), params), 0,
                                   atol=1e-12 * params.krest / params.J)
    np.testing.assert_allclose(np.sort(eq[0].eigenvalues.real), [-6642.9, -771.6, 499.5], atol=0.1)


def test_jacobian_matches_central_differences():
    rng = np.random.default_rng(0)
    for _ in range(20):
        p = random_params(rng)
        for beta in (0.0, HALF_PI, math.pi, 3 * HALF_PI):
            a_num, b_num = numerical_jacobian(lambda x, u: nonlinear_rhs(x, u, p),
                                              np.array([beta, 0.0, 0.0]), np.zeros(2))
            a = jacobian_at(p, beta)
            assert np.max(np.abs(a_num - a)) < 1e-6 * np.max(np.abs(a))
        lin = linearize(p)
        np.testing.assert_allclose(lin.A, jacobian_at(p, HALF_PI), rtol=1e-15, atol=1e-300)
        a_num, b_num = numerical_jacobian(lambda x, u: nonlinear_rhs(x, u, p),
                                          np.array([HALF_PI, 0.0, 0.0]), np.zeros(2))
        assert np.max(np.abs(b_num - lin.B)) < 1e-6 * np.max(np.abs(lin.B))


def test_linearize_includes_friction(params):
    lin = linearize(params)
    assert lin.A[1, 0] == pytest.approx(-params.Ks / params.J)
    assert linearize(params, include_friction=False).A[1, 0] == pytest.approx(-params.ks / params.J)


def test_tf_matches_state_space(params):
    w = np.logspace(0, 6, 60)
    lin = linearize(params)
    # current to position: drive the current state through B = kt/J column
    mech_ss = LinearModel(lin.A[:2, :2], np.array([[0.0], [params.kt / params.J]]), lin.C[:, :2],
                          lin.equilibrium)
    np.testing.assert_allclose(mech_ss.freqresp(w), mech_tf(params).freqresp(w), rtol=1e-9)
    np.testing.assert_allclose(lin.freqresp(w, output=2, input=0), elec_tf_full(params).freqresp(w),
                               rtol=1e-9)
    # load torque to position sees the back-emf loading of the shorted coil
    s = 1j * w
    coil = params.R + params.Lc0 * s
    mech = params.J * s**2 + params.Kd * s + params.Ks
    np.testing.assert_allclose(lin.freqresp(w, output=0, input=1),
                               -coil / (mech * coil + params.kt * params.kb * s), rtol=1e-9)


def test_anti_resonance(params):
    # back-emf coupling puts a dip in the voltage-to-current magnitude near wn
    wn, _ = natural_freq_damping(params)
    w = np.linspace(0.5 * wn, 1.5 * wn, 2001)
    mag = np.abs(elec_tf_full(params).freqresp(w))
    k = np.argmin(mag)
    assert 0 < k < len(w) - 1
    assert w[k] == pytest.approx(wn, rel=0.02)
    assert mag[k] < 0.9 / params.R
    np.testing.assert_allclose(sorted(np.abs(elec_tf_full(params).zeros())), [wn, wn], rtol=1e-9)


def test_transfer_function_basics():
    tf = TransferFunction((1.0, 0.0), (2.0, 3.0, 0.0))
    assert tf.denominator == (2.0, 3.0)
    assert tf(0.0) == 0.5
    with pytest.raises(ValueError):
        TransferFunction((1.0,), (0.0, 0.0))


def test_step_response_matches_expm(params):
    p = params.frictionless()
    lin = linearize(p)
    amp = 1e-3
    dt, t_end = 1e-6, 0.01
    traj = simulate(ActuatorODE(p), [HALF_PI, 0, 0], Drive(Step(amp)), dt=dt, t_end=t_end, decimate=10)
    exact = lin.step_response(traj.t, input=0, amplitude=amp)
    for k, offset in ((0, HALF_PI), (2, 0.0)):
        err = np.max(np.abs(traj.x[:, k] - offset - exact[:, k]))
        assert err < 1e-3 * np.max(np.abs(exact[:, k]))


def _energy_run(params, beta0, periods=100):
    p = replace(params, kd=0.0, sigma_s=0.0, sigma_d=0.0)
    period = 2 * math.pi / math.sqrt(p.ks / p.J)
    traj = simulate(ActuatorODE(p, electrical="current"), [beta0, 0, 0], dt=period / 1000,
                    t_end=periods * period, decimate=100)
    e = undriven_energy(traj.beta, traj.omega_r, p)
    swing = undriven_energy(HALF_PI, 0.0, p) - undriven_energy(beta0, 0.0, p)
    return np.max(np.abs(e - e[0])) / abs(swing)


def test_energy_conservation(params):
    assert _energy_run(params, HALF_PI + 0.3) < 1e-6


@given(beta0=st.floats(HALF_PI - 1.2, HALF_PI + 1.2).filter(lambda b: abs(b - HALF_PI) > 1e-3))
def test_energy_conservation_property(params, beta0):
    assert _energy_run(params, beta0, periods=5) < 1e-6


def test_damping_dissipates(params):
    traj = simulate(ActuatorODE(params, electrical="current"), [HALF_PI + 0.3, 0, 0],
                    dt=1e-5, t_end=0.05)
    e = undriven_energy(traj.beta, traj.omega_r, params)
    assert np.all(np.diff(e) <= 1e-18)
    assert abs(traj.beta[-1] - HALF_PI) < 1e-3


def test_stiffness_guard(params, lugre):
    model = ActuatorODE(params)
    limit = model.max_dt()
    assert limit == pytest.approx(params.tau_e / 5)
    assert ActuatorODE(params, electrical="current").max_dt() == pytest.approx(
        math.sqrt(params.J / params.ks) / 5)
    assert ActuatorODE(params, lugre, electrical="current").max_dt() == pytest.approx(
        math.sqrt(params.J / params.Ks) / 5)
    with pytest.raises(StiffnessGuardError):
        simulate(model, [HALF_PI, 0, 0], dt=2 * limit, t_end=1e-3)
    simulate(model, [HALF_PI, 0, 0], dt=2 * limit, t_end=1e-3, force=True)


def test_divergence_raises(params):
    with pytest.raises(SimulationError) as exc:
        simulate(ActuatorODE(params), [HALF_PI, 0, 0], dt=1e-2, t_end=5.0, force=True)
    assert exc.value.step > 0


def test_simulate_validation(params):
    with pytest.raises(ValueError):
        simulate(ActuatorODE(params), [HALF_PI, 0, 0], dt=0.0, t_end=1.0)
    with pytest.raises(ValueError):
        simulate(ActuatorODE(params), [HALF_PI, 0, 0], dt=1e-6, t_end=1.0, decimate=0)
    with pytest.raises(ValueError):
        ActuatorODE(params, electrical="magic")


def test_generic_callable_path():
    # x' = -x integrates to exp(-t)
    traj = simulate(lambda t, x, u: -x, [1.0], dt=1e-2, t_end=1.0)
    assert traj.x[-1, 0] == pytest.approx(math.exp(-1), rel=1e-9)


def test_signals():
    t = np.array([0.0, 0.5, 1.0, 2.0])
    np.testing.assert_array_equal(Zero()(t), 0)
    np.testing.assert_array_equal(Step(2.0, 1.0)(t), [0, 0, 2, 2])
    assert Sine(1.0, math.pi)(0.5) == pytest.approx(1.0)
    assert Chirp(1.0, 1.0, 2.0, 1.0)(2.0) == 0
    assert "step" in Step(1.0).describe()


# -- friction ---------------------------------------------------------------------------

def test_stribeck_limits(lugre):
    assert stribeck(0.0, lugre) == pytest.approx(lugre.Fs)
    assert stribeck(100 * lugre.vs, lugre) == pytest.approx(lugre.Fc)


def _steady_force(lp, v):
    rate = lp.sigma_s * abs(v) / stribeck(v, lp)
    traj = simulate(lambda t, x, u: np.array([lugre_rhs(v, x[0], lp)]), [0.0],
                    dt=0.01 / rate, t_end=25 / rate)
    return lugre_force(v, traj.x[-1, 0], lp)


@pytest.mark.parametrize("factor", [0.1, 1.0, 10.0, -1.0])
def test_steady_sliding_force(lugre, factor):
    lp = replace(lugre, sigma_d=1e-6)
    v = factor * lp.vs
    assert _steady_force(lp, v) == pytest.approx(stribeck(v, lp) * math.copysign(1, v), rel=1e-3)


@given(amp=st.floats(0.01, 10.0), omega=st.floats(0.1, 100.0), z0=st.floats(-1.0, 1.0))
def test_bristle_state_bounded(lugre, amp, omega, z0):
    bound = lugre.Fs / lugre.sigma_s
    z0 *= bound
    rhs = lambda t, x, u: np.array([lugre_rhs(amp * lugre.vs * math.sin(omega * t), x[0], lugre)])
    dt = min(0.01 / omega, 0.1 * lugre.Fc / (lugre.sigma_s * amp * lugre.vs))
    traj = simulate(rhs, [z0], dt=dt, t_end=min(200 * dt, 2 * math.pi / omega))
    assert np.max(np.abs(traj.x)) <= bound * (1 + 1e-9)


def test_augmented_tf(params, lugre):
    tf = augmented_mech_tf(params.frictionless(), lugre)
    np.testing.assert_allclose(tf.denominator, mech_tf(params).denominator, rtol=1e-12)


def test_lugre_reduces_to_linear_friction_at_small_motion(params, lugre):
    # z ~ theta for tiny excursions, so the LuGre run tracks the linear Ks model
    amp = 1e-6
    p = params
    lin = LumpedElectromech(J=p.J, kd=p.kd, krest=p.krest, kt=p.kt, R=p.R, Lc0=p.Lc0)
    with_friction = simulate(ActuatorODE(p, lugre, electrical="current"), [HALF_PI, 0, 0, 0],
                             Drive(Step(amp)), dt=1e-5, t_end=0.12)
    theta_final = with_friction.beta[-1] - HALF_PI
    assert theta_final == pytest.approx(p.kt * amp / p.Ks, rel=1e-3)
    plain = simulate(ActuatorODE(lin, electrical="current"), [HALF_PI, 0, 0], Drive(Step(amp)),
                     dt=1e-5, t_end=0.05)
    assert plain.beta[-1] - HALF_PI == pytest.approx(p.kt * amp / p.ks, rel=1e-3)
