import math

import pytest
from scipy import constants

from larmor_errors import ConfigurationError, DomainError, SingularityError
from physical_units import (
    MICROMETER,
    NANOKELVIN,
    SI,
    Scales,
    UnitSystem,
    classical_time,
    energy_from_temperature,
    get_particle,
    temperature_from_energy,
    to_dimensionless,
    to_physical,
)


@pytest.fixture
def rb_scales():
    return Scales.from_energy(energy_from_temperature(135 * NANOKELVIN), get_particle("rb87"))


def test_constants_match_codata():
    assert SI.hbar == pytest.approx(constants.hbar, rel=1e-9)
    assert SI.boltzmann == pytest.approx(constants.k, rel=1e-12)
    assert SI.atomic_mass_unit == pytest.approx(constants.atomic_mass, rel=1e-8)


def test_unit_system_rejects_non_positive_constants():
    with pytest.raises(DomainError):
        UnitSystem(hbar=0.0)


def test_particle_lookup():
    assert get_particle("RB87").label == "rb87"
    with pytest.raises(ConfigurationError):
        get_particle("xe129")


def test_rb87_natural_scales(rb_scales):
    assert rb_scales.length_scale == pytest.approx(0.2033e-6, rel=2e-3)
    assert rb_scales.time_scale == pytest.approx(5.658e-5, rel=1e-3)
    assert to_dimensionless(1.3 * MICROMETER, "length", rb_scales) == pytest.approx(6.394, rel=2e-3)


def test_conversion_round_trip(rb_scales):
    for quantity in ("energy", "length", "time", "frequency", "mass"):
        value = 3.7 * rb_scales.scale_of(quantity)
        assert to_dimensionless(value, quantity, rb_scales) == pytest.approx(3.7, rel=1e-14)
        assert to_physical(3.7, quantity, rb_scales) == pytest.approx(value, rel=1e-14)


@pytest.mark.parametrize("quantity", ["energy", "length", "time", "frequency", "mass"])
@pytest.mark.parametrize("value", [1e-40, 2.5e-31, 1.3e-6, 7.0e-3, 42.0])
def test_round_trip_is_exact_to_rounding(rb_scales, quantity, value):
    back = to_physical(to_dimensionless(value, quantity, rb_scales), quantity, rb_scales)
    assert back == pytest.approx(value, rel=1e-14, abs=0.0)


def test_unknown_quantity(rb_scales):
    with pytest.raises(ConfigurationError):
        rb_scales.scale_of("charge")


def test_temperature_energy_conversion():
    energy = energy_from_temperature(135e-9)
    assert energy == pytest.approx(1.863876e-30, rel=1e-6)
    assert temperature_from_energy(energy) == pytest.approx(135e-9)
    with pytest.raises(DomainError):
        energy_from_temperature(-1.0)


def test_free_traversal_time_of_rb87():
    rb = get_particle("rb87")
    energy = energy_from_temperature(135 * NANOKELVIN)
    tau = classical_time(rb, 1.3 * MICROMETER, 0.0, energy)
    assert tau == pytest.approx(0.256e-3, rel=5e-3)


def test_classical_time_errors():
    rb = get_particle("rb87")
    with pytest.raises(SingularityError):
        classical_time(rb, 1e-6, 1e-30, 1e-30)
    with pytest.raises(DomainError):
        classical_time(rb, 0.0, 1e-30, 0.0)


@pytest.fixture
def rb_barrier():
    return get_particle("rb87"), energy_from_temperature(135 * NANOKELVIN)


def test_classical_time_scales_with_inverse_root_of_gap(rb_barrier):
    rb, v0 = rb_barrier
    narrow = classical_time(rb, 1.3 * MICROMETER, v0, 0.5 * v0)
    wide = classical_time(rb, 1.3 * MICROMETER, v0, 0.0)
    assert narrow / wide == pytest.approx(math.sqrt(2.0), rel=1e-12)


@pytest.mark.parametrize("factor", [0.5, 2.0, 7.0])
def test_classical_time_is_linear_in_length(rb_barrier, factor):
    rb, v0 = rb_barrier
    base = classical_time(rb, 1.3 * MICROMETER, v0, 0.25 * v0)
    scaled = classical_time(rb, factor * 1.3 * MICROMETER, v0, 0.25 * v0)
    assert scaled == pytest.approx(factor * base, rel=1e-12)


def test_classical_time_depends_on_gap_magnitude_only(rb_barrier):
    rb, v0 = rb_barrier
    below = classical_time(rb, 1.3 * MICROMETER, v0, 0.0)
    above = classical_time(rb, 1.3 * MICROMETER, v0, 2.0 * v0)
    assert above == pytest.approx(below, rel=1e-12)
