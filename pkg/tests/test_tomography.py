import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sgsim import (
    AsymmetryBasis,
    DegenerateBasisError,
    PolarizationVector,
    SimParams,
    ValidationError,
    exact_pair,
    predicted_density,
    reconstruct_polarization,
)


@pytest.fixture(scope="module")
def basis(ref_drifted):
    return AsymmetryBasis.from_pair(ref_drifted)


def unit_ball(draw_vec):
    v = np.asarray(draw_vec, float)
    n = np.linalg.norm(v)
    return v / n * min(n, 1.0) if n > 1 else v


def test_unpolarised_and_z_polarised(basis):
    assert np.array_equal(predicted_density(basis, (0, 0, 0)), basis.p0)
    assert np.allclose(predicted_density(basis, (0, 0, 1)), basis.p0 + basis.az / 2, atol=0)


def test_density_nonnegative_and_normalized(basis, rng):
    for _ in range(20):
        p = rng.normal(size=3)
        p *= rng.uniform() / np.linalg.norm(p)
        dens = predicted_density(basis, p)
        assert dens.min() > -1e-9
        assert dens.sum() * basis.cell_area == pytest.approx(1.0, abs=1e-4)


def test_rejects_overlong_polarisation(basis):
    with pytest.raises(ValidationError):
        predicted_density(basis, (0.8, 0.0, 0.8))


def test_recovers_z_polarisation(basis):
    fit = reconstruct_polarization(predicted_density(basis, (0, 0, 1)), basis)
    assert np.max(np.abs(fit.p.as_array() - [0, 0, 1])) < 1e-8
    assert fit.condition < 1e8 and not fit.unphysical


def test_round_trip_hundred_random_vectors(basis):
    gen = np.random.default_rng(7)
    worst = 0.0
    for _ in range(100):
        p = gen.normal(size=3)
        p *= gen.uniform() ** (1 / 3) / np.linalg.norm(p)
        fit = reconstruct_polarization(predicted_density(basis, p), basis)
        worst = max(worst, np.max(np.abs(fit.p.as_array() - p)))
    assert worst < 1e-8


@given(px=st.floats(-0.57, 0.57), py=st.floats(-0.57, 0.57), pz=st.floats(-0.57, 0.57))
@settings(max_examples=25, deadline=None)
def test_round_trip_property(basis, px, py, pz):
    fit = reconstruct_polarization(predicted_density(basis, (px, py, pz)), basis)
    assert np.allclose(fit.p.as_array(), [px, py, pz], atol=1e-8)


def test_noisy_reconstruction(basis):
    target = np.array([0.6, 0.0, 0.8])
    gen = np.random.default_rng(11)
    for _ in range(5):
        observed = predicted_density(basis, target) + 1e-3 * basis.p0.max() * gen.standard_normal(basis.p0.shape)
        fit = reconstruct_polarization(observed, basis)
        assert np.max(np.abs(fit.p.as_array() - target)) < 0.05


def test_unnormalized_map_fits_scale(basis):
    p = np.array([0.2, -0.3, 0.5])
    fit = reconstruct_polarization(7.0 * predicted_density(basis, p), basis)
    assert fit.scale == pytest.approx(7.0, rel=1e-10)
    assert np.allclose(fit.p.as_array(), p, atol=1e-8)


def test_textbook_basis_is_degenerate():
    p = SimParams(0.5, 4.0, 4.0, textbook_mode=True)
    pair = exact_pair(p, drift=True)
    tb = AsymmetryBasis.from_pair(pair)
    assert not tb.ax.any() and not tb.ay.any()
    observed = tb.p0 + 0.5 * 0.7 * np.abs(tb.az)  # any signal: x/y carry no information
    with pytest.raises(DegenerateBasisError, match="p_x, p_y"):
        reconstruct_polarization(observed, tb)


def test_shape_mismatch(basis):
    with pytest.raises(ValidationError):
        reconstruct_polarization(np.zeros((4, 4)), basis)


def px_standard_error(b: AsymmetryBasis) -> float:
    design = np.column_stack([0.5 * m.ravel() for m in b.maps()])
    cov = np.linalg.inv(design.T @ design)
    return 1e-3 * b.p0.max() * np.sqrt(cov[0, 0])


@pytest.mark.slow
def test_px_error_grows_with_z0():
    errors = []
    for z0 in (3.0, 4.0, 8.0):
        pair = exact_pair(SimParams(0.5, 4.0, z0), drift=True)
        errors.append(px_standard_error(AsymmetryBasis.from_pair(pair)))
    assert errors[0] < errors[1] < errors[2]


def test_polarization_vector_helpers():
    v = PolarizationVector.from_array([0.0, 0.6, 0.8])
    assert v.magnitude == pytest.approx(1.0)
    assert list(v.as_array()) == [0.0, 0.6, 0.8]
