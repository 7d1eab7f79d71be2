import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from sgsim import (
    SimParams,
    adiabatic_wavefunction,
    asymmetry_maps,
    coherent_state_wavefunction,
    field_frame,
    local_frame_components,
    pseudo_adiabatic_wavefunction,
    spin_flip_probability,
    symmetrized_inner,
    symmetrized_wavefunction,
    wigner_d_half,
)
from sgsim.approximations import APPROXIMATIONS
from sgsim.basis import make_grid
from sgsim.observables import RunPair

REF = SimParams(0.5, 4.0, 4.0)
IX = np.array([[0, 1], [1, 0]]) / 2
IZ = np.array([[1, 0], [0, -1]]) / 2


def gaussian(p):
    x = make_grid(p)
    X, Z = np.meshgrid(x, x, indexing="ij")
    return np.exp(-(X**2 + Z**2) / 2) / math.sqrt(math.pi)


def test_field_frame_points():
    p = REF
    f = field_frame(0.0, 0.0, p)
    assert (float(f.rho), float(f.beta)) == (4.0, 0.0)
    f = field_frame(4.0, -4.0, p)
    assert float(f.rho) == pytest.approx(4.0) and float(f.beta) == pytest.approx(math.pi / 2)
    f = field_frame(0.0, -4.0, p)
    assert (float(f.rho), float(f.beta)) == (0.0, 0.0)
    f = field_frame(-0.0, -6.0, p)
    assert float(f.beta) == pytest.approx(math.pi)


def test_wigner_d_special_angles():
    assert np.allclose(wigner_d_half(0.0), np.eye(2))
    d = wigner_d_half(math.pi)
    assert np.allclose(np.diag(d), 0, atol=1e-15)
    assert np.allclose(np.abs(d[[0, 1], [1, 0]]), 1)


@given(beta=st.floats(-math.pi, math.pi))
@settings(max_examples=50)
def test_wigner_d_is_rotation(beta):
    d = wigner_d_half(beta)
    assert np.allclose(d.T @ d, np.eye(2), atol=1e-14)
    assert np.linalg.det(d) == pytest.approx(1.0)


@pytest.mark.parametrize("point", [(0.3, -0.2), (1.7, 0.4), (-2.1, 1.5), (0.0, -2.5)])
def test_adiabatic_spin_matrix_is_exp_of_local_field(point):
    """<m|exp(i t S rho I_B)|m0> from expm of I_B = I_z cos(beta) - I_x sin(beta)."""
    x, z = point
    t = 0.8
    frame = field_frame(x, z, REF)
    rho, beta = float(frame.rho), float(frame.beta)
    IB = IZ * math.cos(beta) - IX * math.sin(beta)
    U = expm(1j * t * REF.S * rho * IB)
    d = wigner_d_half(beta)
    for j0 in range(2):
        for j in range(2):
            got = sum(d[n, j] * np.exp(1j * (0.5 - n) * rho * REF.S * t) * d[n, j0] for n in range(2))
            assert got == pytest.approx(U[j, j0], abs=1e-14)


def test_adiabatic_at_t0_is_initial_gaussian():
    for m0, comp in ((0.5, "up"), (-0.5, "down")):
        s = adiabatic_wavefunction(REF, 0.0, m0)
        assert np.max(np.abs(getattr(s, comp) - gaussian(REF))) < 1e-15
        other = s.down if comp == "up" else s.up
        assert np.max(np.abs(other)) < 1e-15


def test_adiabatic_density_frozen():
    dens = [np.abs(s.up) ** 2 + np.abs(s.down) ** 2 for s in (adiabatic_wavefunction(REF, t, 0.5) for t in (0, 0.4, 1))]
    assert np.max(np.abs(dens[1] - dens[0])) < 1e-14
    assert np.max(np.abs(dens[2] - dens[0])) < 1e-14


def test_adiabatic_flip_near_semiclassical():
    flip = spin_flip_probability(adiabatic_wavefunction(REF, 1.0, 0.5), 0.5)
    assert flip == pytest.approx(0.0156, rel=0.2)


def test_pseudo_adiabatic_equals_adiabatic_without_kinetic():
    p = REF.replace(A=0.0)
    a = adiabatic_wavefunction(p, 1.0, 0.5)
    b = pseudo_adiabatic_wavefunction(p, 1.0, 0.5)
    assert np.max(np.abs(a.up - b.up)) < 1e-15 and np.max(np.abs(a.down - b.down)) < 1e-15


def test_pseudo_adiabatic_envelope_widens():
    s = pseudo_adiabatic_wavefunction(REF, 1.0, 0.5)
    dens = np.abs(s.up) ** 2 + np.abs(s.down) ** 2
    X, _ = s.mesh()
    var = np.sum(dens * X**2) / np.sum(dens)
    assert math.sqrt(2 * var) == pytest.approx(math.sqrt(1 + REF.A**2), abs=1e-6)
    assert s.norm() == pytest.approx(1.0, abs=1e-6)


def test_coherent_state_limits():
    g0 = coherent_state_wavefunction(REF, 0.0, 0.5)
    assert np.max(np.abs(g0.up - gaussian(REF))) < 1e-12
    assert np.max(np.abs(g0.down)) < 1e-12
    p = REF.replace(A=1e-7)
    cs = coherent_state_wavefunction(p, 1.0, 0.5)
    ad = adiabatic_wavefunction(p, 1.0, 0.5)
    assert np.max(np.abs(cs.up - ad.up)) < 1e-6
    assert np.max(np.abs(cs.down - ad.down)) < 1e-6


def test_symmetrized_without_kinetic_is_adiabatic():
    p = REF.replace(A=0.0)
    a = adiabatic_wavefunction(p, 1.0, -0.5)
    s = symmetrized_wavefunction(p, 1.0, -0.5)
    assert np.max(np.abs(a.up - s.up)) < 1e-12 and np.max(np.abs(a.down - s.down)) < 1e-12


@pytest.mark.parametrize("name", list(APPROXIMATIONS))
def test_norm_at_t1(name):
    s = APPROXIMATIONS[name](REF, 1.0, 0.5)
    assert s.norm() == pytest.approx(1.0, abs=1e-5 if name == "coherent_state" else 1e-6)


def local_populations(state, params):
    plus, minus = local_frame_components(state, params)
    return np.array([np.sum(np.abs(plus) ** 2), np.sum(np.abs(minus) ** 2)]) * state.cell_area


def spread_populations(params, t, m0, width, shift=0.0):
    """I_B populations of the spin-independent envelope: weight d[n, m0]^2.

    ``shift`` > 0 drops the disk rho < shift * |n| * 2 for the n = -1/2
    component, the part of the envelope an outward radial displacement
    never samples.
    """
    x = make_grid(params)
    X, Z = np.meshgrid(x, x, indexing="ij")
    dens = np.exp(-(X**2 + Z**2) / abs(width) ** 2) / (math.pi * abs(width) ** 2)
    frame = field_frame(X, Z, params)
    d = wigner_d_half(frame.beta)
    j0 = 0 if m0 > 0 else 1
    pops = []
    for n in range(2):
        keep = frame.rho >= shift if n == 1 else True
        pops.append(np.sum(np.where(keep, dens, 0.0) * d[n, j0] ** 2))
    return np.array(pops) * (x[1] - x[0]) ** 2


@pytest.mark.parametrize("m0", [0.5, -0.5])
def test_adiabatic_conserves_local_projection(m0):
    ref = local_populations(adiabatic_wavefunction(REF, 0.0, m0), REF)
    for t in (0.3, 1.0):
        assert np.max(np.abs(local_populations(adiabatic_wavefunction(REF, t, m0), REF) - ref)) < 1e-8


@pytest.mark.parametrize("m0", [0.5, -0.5])
@pytest.mark.parametrize("t", [0.5, 1.0])
def test_spread_approximations_keep_envelope_projection(m0, t):
    """The spin-dependent factors never move weight between I_B components."""
    width = abs(1 + 1j * REF.A * t)
    expect = spread_populations(REF, t, m0, width)
    got = local_populations(pseudo_adiabatic_wavefunction(REF, t, m0), REF)
    assert np.max(np.abs(got - expect)) < 1e-8
    got = local_populations(coherent_state_wavefunction(REF, t, m0), REF)
    cut = spread_populations(REF, t, m0, width, shift=REF.A * REF.S * t**2 / 4)
    # the disk edge sits next to the sqrt(rho_n / rho) singularity; grid-limited
    assert np.max(np.abs(got - cut)) < 1e-6
    half = abs(1 + 0.5j * REF.A * t)
    got = local_populations(symmetrized_inner(REF, t, m0), REF)
    assert np.max(np.abs(got - spread_populations(REF, t, m0, half))) < 1e-6


@pytest.mark.parametrize("name", list(APPROXIMATIONS))
def test_flip_amplitudes_exchange_symmetric(name):
    fn = APPROXIMATIONS[name]
    up = fn(REF, 1.0, 0.5)
    down = fn(REF, 1.0, -0.5)
    assert np.max(np.abs(np.abs(up.down) - np.abs(down.up))) < 1e-8
    assert spin_flip_probability(up, 0.5) == pytest.approx(spin_flip_probability(down, -0.5), abs=1e-6)


@pytest.mark.parametrize(
    "fn", [adiabatic_wavefunction, pseudo_adiabatic_wavefunction, coherent_state_wavefunction, symmetrized_inner]
)
def test_no_y_asymmetry_after_interaction(fn):
    _, ay, _ = asymmetry_maps(RunPair(fn(REF, 1.0, 0.5), fn(REF, 1.0, -0.5)))
    assert np.max(np.abs(ay)) < 1e-8


def test_symmetrized_outer_free_step_creates_y_asymmetry():
    _, ay, _ = asymmetry_maps(RunPair(symmetrized_wavefunction(REF, 1.0, 0.5), symmetrized_wavefunction(REF, 1.0, -0.5)))
    assert np.max(np.abs(ay)) > 1e-3
