import cmath
import logging
import math

import numpy as np
import pytest

from barrier_analyzer import Provenance, RectangularBarrier, larmor_times_rect, transmission_probability_rect
from larmor_errors import ConfigurationError, ConvergenceError, DomainError
from physical_units import MICROMETER, NANOKELVIN, Scales, energy_from_temperature, get_particle, to_dimensionless
from spinor_scattering import (
    PotentialProfile,
    ProfileKind,
    SpinBranch,
    WeakFieldConfig,
    gaussian_profile,
    larmor_times_numeric,
    raw_larmor_times,
    rectangular_profile,
    richardson_extrapolate,
    spin_amplitudes,
    tabulated_profile,
    transmission,
)

ENERGY_GRID = [round(0.05 * i, 2) for i in range(1, 20)]
OPACITY_GRID = [0.5, 1.0, 2.0, 5.0, 10.0, 20.0]


def rect_for(energy, lam):
    barrier = RectangularBarrier.from_opacity(1.0, energy, lam)
    return barrier, rectangular_profile(1.0, barrier.length)


def lab_sigma():
    scales = Scales.from_energy(energy_from_temperature(135 * NANOKELVIN), get_particle("rb87"))
    return to_dimensionless(1.3 * MICROMETER, "length", scales)


def test_free_propagation_phase():
    result = transmission(rectangular_profile(0.0, 3.0), 0.5)
    assert result.log_magnitude == pytest.approx(0.0, abs=1e-12)
    assert abs(result.t - cmath.exp(3j)) < 1e-12
    assert abs(result.reflection) < 1e-12


def test_profile_validation():
    with pytest.raises(DomainError):
        PotentialProfile(ProfileKind.TABULATED, np.array([0.0, 1.0, 1.0]), np.array([1.0, 1.0]), (0.0, 1.0))
    with pytest.raises(DomainError):
        PotentialProfile(ProfileKind.TABULATED, np.array([0.0, 1.0]), np.array([1.0, 1.0]), (0.0, 1.0))
    with pytest.raises(DomainError):
        rectangular_profile(1.0, 2.0, field_region=(1.0, 3.0))
    with pytest.raises(DomainError):
        rectangular_profile(-1.0, 2.0)
    with pytest.raises(DomainError):
        transmission(rectangular_profile(1.0, 2.0), 0.0)


@pytest.mark.parametrize("energy", [0.1, 0.5, 0.9, 1.7])
@pytest.mark.parametrize("width", [0.5, 2.0, 10.0])
def test_single_segment_matches_textbook_transmission(energy, width):
    result = transmission(rectangular_profile(1.0, width), energy)
    expected = transmission_probability_rect(RectangularBarrier(1.0, width), energy)
    assert result.probability == pytest.approx(expected, rel=1e-10)


def test_flux_conservation_on_rectangular_grid():
    for energy in ENERGY_GRID:
        for lam in OPACITY_GRID:
            _, profile = rect_for(energy, lam)
            assert abs(transmission(profile, energy).flux_residual) <= 1e-10


def test_numeric_larmor_times_match_closed_forms():
    for energy in ENERGY_GRID:
        for lam in OPACITY_GRID:
            barrier, profile = rect_for(energy, lam)
            numeric = larmor_times_numeric(profile, energy)
            exact = larmor_times_rect(barrier, energy)
            assert numeric.provenance is Provenance.NUMERIC
            assert numeric.tau_y == pytest.approx(exact.tau_y, rel=1e-6), (energy, lam)
            assert numeric.tau_z == pytest.approx(exact.tau_z, rel=1e-6), (energy, lam)


@pytest.mark.parametrize("energy", [1.05, 1.25, 1.6, 2.0, 2.5, 3.0])
@pytest.mark.parametrize("width", [0.5, 2.0, 5.0])
def test_numeric_times_above_the_barrier(energy, width):
    barrier = RectangularBarrier(1.0, width)
    numeric = larmor_times_numeric(rectangular_profile(1.0, width), energy)
    exact = larmor_times_rect(barrier, energy)
    assert numeric.tau_y == pytest.approx(exact.tau_y, rel=1e-6, abs=1e-9)
    assert numeric.tau_z == pytest.approx(exact.tau_z, rel=1e-6, abs=1e-9)


def test_opaque_profile_keeps_finite_log_magnitude():
    barrier, profile = rect_for(0.5, 300.0)
    result = transmission(profile, 0.5)
    assert math.isfinite(result.log_magnitude)
    assert result.log_magnitude == pytest.approx(
        0.5 * math.log(transmission_probability_rect(barrier, 0.5)), rel=1e-10)
    numeric = larmor_times_numeric(profile, 0.5)
    assert math.isfinite(numeric.tau_y) and math.isfinite(numeric.tau_z)


def test_richardson_removes_even_error_terms():
    h = 0.1
    values = [1.0 + (h / 2 ** i) ** 2 + (h / 2 ** i) ** 4 for i in range(3)]
    estimates = richardson_extrapolate(values)
    assert len(estimates) == 3
    assert estimates[-1] == pytest.approx(1.0, abs=1e-12)
    assert abs(estimates[1] - 1.0) < abs(estimates[0] - 1.0)


def test_raw_times_error_is_quadratic_in_field():
    barrier, profile = rect_for(0.5, 2.0)
    exact = larmor_times_rect(barrier, 0.5)
    omega = 5e-3 * 0.5
    coarse = raw_larmor_times(profile, 0.5, omega)
    fine = raw_larmor_times(profile, 0.5, omega / 2)
    ratio = (coarse[0] - exact.tau_y) / (fine[0] - exact.tau_y)
    assert 3.0 < ratio < 5.0


def test_spin_branches_are_labelled():
    _, profile = rect_for(0.5, 2.0)
    plus, minus = spin_amplitudes(profile, 0.5, 1e-4)
    assert plus.spin_branch is SpinBranch.PLUS and minus.spin_branch is SpinBranch.MINUS
    assert plus.probability > minus.probability


def test_feeble_field_condition_enforced():
    with pytest.raises(ConfigurationError):
        WeakFieldConfig(omega_L_base=1.0).base_frequency(0.5)
    with pytest.raises(ConfigurationError):
        WeakFieldConfig(richardson_levels=0)
    assert WeakFieldConfig().base_frequency(0.5) == pytest.approx(5e-5)


def test_non_convergent_extrapolation_raises():
    _, profile = rect_for(0.5, 2.0)
    config = WeakFieldConfig(omega_L_base=4.9e-3, richardson_levels=2, tolerance=1e-14)
    with pytest.raises(ConvergenceError) as info:
        larmor_times_numeric(profile, 0.5, config)
    assert len(info.value.sequence) == 2


def test_pure_precession_without_barrier():
    width = 4.0
    times = larmor_times_numeric(rectangular_profile(0.0, width), 0.5)
    assert times.tau_y == pytest.approx(width / math.sqrt(2 * 0.5), rel=1e-6)
    assert abs(times.tau_z) < 1e-6 * times.tau_y


def test_energy_on_segment_height_is_nudged(caplog):
    with caplog.at_level(logging.WARNING, logger="spinor_scattering"):
        result = transmission(rectangular_profile(0.5, 2.0), 0.5)
    assert result.perturbed
    assert math.isfinite(result.log_magnitude)
    assert "nudging" in caplog.text
    expected = transmission_probability_rect(RectangularBarrier(0.5, 2.0), 0.5)
    assert result.probability == pytest.approx(expected, rel=1e-6)


def test_field_region_splits_segments():
    profile = gaussian_profile(1.0, 2.0, segments=100, field_region=(-1.05, 1.05))
    widths, heights = profile.shifted_segments(0.25)
    assert widths.sum() == pytest.approx(profile.support[1] - profile.support[0])
    edges = profile.support[0] + np.concatenate(([0.0], np.cumsum(widths)))
    mids = 0.5 * (edges[:-1] + edges[1:])
    unshifted = np.array([profile.heights[min(int(np.searchsorted(profile.edges, m, side="right")) - 1, 99)]
                          for m in mids])
    inside = (mids > -1.05) & (mids < 1.05)
    np.testing.assert_allclose(heights[inside], unshifted[inside] + 0.25)
    np.testing.assert_allclose(heights[~inside], unshifted[~inside])


def test_gaussian_profile_shape():
    profile = gaussian_profile(2.0, 1.5, support_multiplier=5.0, segments=64)
    assert profile.segments == 64
    assert profile.value_at(0.0) == pytest.approx(2.0)
    edge = profile.support[1]
    assert profile.value_at(edge) <= 2.0 * math.exp(-12.5) * (1 + 1e-12)
    assert profile.value_at(edge + 1.0) == 0.0
    assert np.all(profile.heights > 0)


def test_gaussian_grid_too_coarse():
    with pytest.raises(ConfigurationError):
        gaussian_profile(1.0, 1.0, segments=15)


@pytest.mark.parametrize("segments", [500, 2000, 4000])
def test_gaussian_flux_conservation(segments):
    profile = gaussian_profile(1.0, lab_sigma(), segments=segments)
    assert abs(transmission(profile, 0.5).flux_residual) <= 1e-10


@pytest.mark.slow
def test_gaussian_grid_refinement():
    sigma = lab_sigma()
    coarse = transmission(gaussian_profile(1.0, sigma, segments=2000), 0.5).probability
    fine = transmission(gaussian_profile(1.0, sigma, segments=4000), 0.5).probability
    assert abs(coarse - fine) <= 1e-8


def test_tabulated_profile_uses_segment_means():
    profile = tabulated_profile([0.0, 1.0, 3.0], [0.0, 1.0, 0.0])
    np.testing.assert_allclose(profile.heights, [0.5, 0.5])
    assert profile.field_region == (0.0, 3.0)
    with pytest.raises(DomainError):
        tabulated_profile([0.0, 2.0, 1.0], [0.0, 1.0, 0.0])
