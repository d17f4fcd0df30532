import math

import numpy as np
import pytest

from magrest.dynamics import jacobian_at, nonlinear_rhs
from magrest.eddy import (ElectricalModelKind, ElectricalParams, EddyProducts,
                          magnet_current_density, magnet_field_2d, magnet_flux_ratio_series)
from magrest.geometry_magnetics import StatorFieldSpectrum, coil_torque, torque_constant
from magrest.identify import phase_error_at
from magrest.oracle import (Grid1D, Grid2D, fd_diffusion_1d, fd_diffusion_2d, numerical_jacobian,
                            quadrature_coil_torque, synth_frf)

from conftest import FIT_LC0, FIT_MUSIGMA_IRON, FIT_MUSIGMA_MAGNET, FIT_R

D = 0.35e-3


@pytest.fixture(scope="module")
def box(slab):
    return slab.magnet_half_width, slab.magnet_half_length


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid1D(1.0, 50)
    with pytest.raises(ValueError):
        Grid2D(1.0, 1.0, 201, 31)
    with pytest.raises(ValueError):
        Grid1D(0.0)


@pytest.mark.parametrize("x", [0.1, 1.0, 5.0])
def test_fd_1d_self_convergence(x):
    w = (x / (D / 2)) ** 2 / FIT_MUSIGMA_IRON
    coarse = fd_diffusion_1d(w, FIT_MUSIGMA_IRON, Grid1D(D / 2, 1001))
    fine = fd_diffusion_1d(w, FIT_MUSIGMA_IRON, Grid1D(D / 2, 2001))
    assert abs(coarse / fine - 1) < 1e-4


def test_fd_1d_dc_is_uniform():
    res = fd_diffusion_1d(0.0, FIT_MUSIGMA_IRON, Grid1D(D / 2), return_field=True)
    np.testing.assert_allclose(res.field, 1.0, atol=1e-12)
    assert res.flux_ratio == pytest.approx(1.0)


def test_fd_2d_self_convergence(box):
    a, b = box
    w = 10 / (FIT_MUSIGMA_MAGNET * a * b)
    coarse = fd_diffusion_2d(w, FIT_MUSIGMA_MAGNET, Grid2D(a, b, 101, 101)).flux_ratio
    fine = fd_diffusion_2d(w, FIT_MUSIGMA_MAGNET, Grid2D(a, b)).flux_ratio
    assert abs(coarse / fine - 1) < 1e-3


def test_fd_2d_symmetry_and_residual(box):
    a, b = box
    res = fd_diffusion_2d(3 / (FIT_MUSIGMA_MAGNET * a * b), FIT_MUSIGMA_MAGNET, Grid2D(a, b, 81, 61))
    assert res.residual < 1e-12
    np.testing.assert_allclose(res.field, res.field[::-1, :], atol=1e-12)
    np.testing.assert_allclose(res.field, res.field[:, ::-1], atol=1e-12)


@pytest.mark.parametrize("p", [0.05, 1.0, 30.0])
def test_fd_2d_agrees_with_series(box, p):
    a, b = box
    w = p / (FIT_MUSIGMA_MAGNET * a * b)
    pts = [(fx * a, fz * b) for fx in (-0.5, 0, 0.5) for fz in (-0.5, 0, 0.5)]
    res, vals = fd_diffusion_2d(w, FIT_MUSIGMA_MAGNET, Grid2D(a, b), samples=pts)
    assert abs(res.flux_ratio / magnet_flux_ratio_series(w, FIT_MUSIGMA_MAGNET, a, b) - 1) < 0.02
    for (x, z), v in zip(pts, vals):
        assert abs(v / magnet_field_2d(x, z, w, FIT_MUSIGMA_MAGNET, a, b) - 1) < 0.02


def test_fd_2d_current_density(box):
    a, b = box
    w = 10 / (FIT_MUSIGMA_MAGNET * a * b)
    mu = 1.05 * 4e-7 * math.pi
    res = fd_diffusion_2d(w, FIT_MUSIGMA_MAGNET, Grid2D(a, b))
    jx, jz = res.current_density(mu)
    i, k = 150, 40  # an interior node away from the symmetry lines
    ax, az = magnet_current_density(res.x[i], res.z[k], w, FIT_MUSIGMA_MAGNET, mu, a, b)
    scale = np.max(np.abs(jx))
    assert abs(jx[i, k] - ax) < 0.02 * scale
    assert abs(jz[i, k] - az) < 0.02 * scale


def test_quadrature_torque_matches_closed_form(cfg):
    act = cfg.actuator
    spectrum = StatorFieldSpectrum({1: 2e-3, 3: 5e-4, 5: -1e-4})
    kt = torque_constant(act.stack_length, act.rotor_radius, spectrum.k1, act.magnetization)
    for beta in np.linspace(0, 2 * math.pi, 13):
        for ic in (-0.5, 0.2, 1.0):
            q = quadrature_coil_torque(beta, ic, spectrum, act.stack_length, act.rotor_radius,
                                       act.magnetization)
            assert q == pytest.approx(coil_torque(beta, ic, kt), abs=1e-12 * kt)
    with pytest.raises(ValueError):
        quadrature_coil_torque(0.0, 1.0, spectrum, 1.0, 1.0, 1.0, n_points=10)


def test_numerical_jacobian_second_order(params):
    x_bar = np.array([math.pi / 2, 0.0, 0.0])
    exact = jacobian_at(params, math.pi / 2)
    rhs = lambda x, u: nonlinear_rhs(x, u, params)
    errs = []
    for h in (1e-2, 1e-3):
        a, b = numerical_jacobian(rhs, x_bar, np.zeros(2), h=h)
        errs.append(np.max(np.abs(a - exact)) / np.max(np.abs(exact)))
        np.testing.assert_allclose(b, [[0, 0], [0, -1 / params.J], [1 / params.Lc0, 0]], rtol=1e-9)
    assert errs[1] < errs[0] / 50


def test_synth_determinism(params, mech_grid):
    a = synth_frf(params, "mech", mech_grid, 0.01, seed=4)
    b = synth_frf(params, "mech", mech_grid, 0.01, seed=4)
    c = synth_frf(params, "mech", mech_grid, 0.01, seed=5)
    clean = synth_frf(params, "mech", mech_grid)
    np.testing.assert_array_equal(a.response, b.response)
    assert not np.array_equal(a.response, c.response)
    rel = np.abs(a.response / clean.response - 1)
    assert 0.005 < np.sqrt(np.mean(rel**2)) < 0.015
    with pytest.raises(ValueError):
        synth_frf(params, "bogus", mech_grid)
    with pytest.raises(ValueError):
        synth_frf(params, "mech", mech_grid[::-1])


def test_rl_vs_eddy_phase_gap_at_20khz(slab, fitted4):
    rl = ElectricalParams(ElectricalModelKind.RL_2DOF, FIT_R, FIT_LC0, EddyProducts(), slab)
    w = 2 * math.pi * 20e3
    gap = phase_error_at(rl, fitted4, w)
    assert gap == pytest.approx(15.0, abs=3.0)
