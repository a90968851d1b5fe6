"""
Physical constants, particle presets and the natural-unit system.

Every numerical module works with hbar = m = V0 = 1; conversion to
laboratory units (nK, um, ms) happens only at the I/O boundary.
"""

import math
from dataclasses import dataclass, field
from typing import Dict

from larmor_errors import ConfigurationError, DomainError, SingularityError

# Lab-unit prefixes
NANOKELVIN = 1e-9
MICROMETER = 1e-6
MILLISECOND = 1e-3

CONSTANTS_VERSION = "CODATA 2022 (hbar, k_B exact; u = 1.66053906892e-27 kg)"


@dataclass(frozen=True)
class UnitSystem:
    """SI values of the constants used by the package, fixed at build time."""

    hbar: float = 1.054571817e-34            # J s
    boltzmann: float = 1.380649e-23          # J / K
    atomic_mass_unit: float = 1.66053906892e-27  # kg

    def __post_init__(self):
        for name in ("hbar", "boltzmann", "atomic_mass_unit"):
            if not getattr(self, name) > 0:
                raise DomainError(f"Constant {name} must be strictly positive")


SI = UnitSystem()


@dataclass(frozen=True)
class ParticleSpec:
    """A massive particle identified by a short label."""

    mass: float
    label: str

    def __post_init__(self):
        if not self.mass > 0:
            raise DomainError(f"Particle '{self.label}' must have positive mass")


RB87_MASS_U = 86.909180

PARTICLES: Dict[str, ParticleSpec] = {
    "rb87": ParticleSpec(mass=RB87_MASS_U * SI.atomic_mass_unit, label="rb87"),
}


def get_particle(label: str) -> ParticleSpec:
    """
    Look up a built-in particle preset.

    Args:
        label: Preset name, case-insensitive

    Returns:
        The matching ParticleSpec

    Raises:
        ConfigurationError: If no preset has that name
    """
    try:
        return PARTICLES[label.lower()]
    except KeyError:
        raise ConfigurationError(
            f"Unknown particle '{label}'. Available: {', '.join(sorted(PARTICLES))}"
        )


@dataclass(frozen=True)
class Scales:
    """
    Conversion factors between SI and natural units.

    The natural units set hbar, the particle mass and the energy scale
    (normally the barrier height V0) to one, which fixes the length scale
    to hbar / sqrt(m E_s) and the time scale to hbar / E_s.
    """

    energy_scale: float
    length_scale: float
    time_scale: float
    mass_scale: float
    units: UnitSystem = field(default=SI)

    def __post_init__(self):
        for name in ("energy_scale", "length_scale", "time_scale", "mass_scale"):
            if not getattr(self, name) > 0:
                raise DomainError(f"Scale {name} must be strictly positive")

    @classmethod
    def from_energy(cls, energy_scale: float, particle: ParticleSpec,
                    units: UnitSystem = SI) -> "Scales":
        """
        Derive the natural-unit scales for a particle and an energy scale.

        Args:
            energy_scale: Energy in joules that becomes 1 (typically V0)
            particle: Particle whose mass becomes 1
            units: Constants to use

        Returns:
            Scales instance
        """
        if not energy_scale > 0:
            raise DomainError("Energy scale must be strictly positive")
        return cls(
            energy_scale=energy_scale,
            length_scale=units.hbar / math.sqrt(particle.mass * energy_scale),
            time_scale=units.hbar / energy_scale,
            mass_scale=particle.mass,
            units=units,
        )

    def scale_of(self, quantity: str) -> float:
        """Return the SI size of one natural unit of the given quantity."""
        factors = {
            "energy": self.energy_scale,
            "length": self.length_scale,
            "time": self.time_scale,
            "frequency": 1.0 / self.time_scale,
            "mass": self.mass_scale,
        }
        try:
            return factors[quantity]
        except KeyError:
            raise ConfigurationError(
                f"Unknown quantity '{quantity}'. Supported: {', '.join(factors)}"
            )


def to_dimensionless(value: float, quantity: str, scales: Scales) -> float:
    """Convert an SI value of ``quantity`` into natural units."""
    return value / scales.scale_of(quantity)


def to_physical(value: float, quantity: str, scales: Scales) -> float:
    """Convert a natural-unit value of ``quantity`` back into SI."""
    return value * scales.scale_of(quantity)


def energy_from_temperature(temperature: float, units: UnitSystem = SI) -> float:
    """
    Convert a temperature-equivalent energy (E = k_B T) to joules.

    Args:
        temperature: Temperature in kelvin

    Returns:
        Energy in joules

    Raises:
        DomainError: If the temperature is negative
    """
    if temperature < 0:
        raise DomainError(f"Temperature must be non-negative, got {temperature} K")
    return units.boltzmann * temperature


def temperature_from_energy(energy: float, units: UnitSystem = SI) -> float:
    """Inverse of energy_from_temperature."""
    if energy < 0:
        raise DomainError(f"Energy must be non-negative, got {energy} J")
    return energy / units.boltzmann


def classical_time(particle: ParticleSpec, length: float, v0: float, energy: float) -> float:
    """
    Time for a classical particle with effective energy |V0 - E| to cross a length.

    Args:
        particle: Particle (mass in kg)
        length: Distance in metres
        v0: Barrier height in joules
        energy: Particle energy in joules

    Returns:
        Traversal time in seconds

    Raises:
        DomainError: If the length is not positive
        SingularityError: If E equals V0 (kinematic divergence)
    """
    if not length > 0:
        raise DomainError(f"Length must be positive, got {length}")
    gap = abs(v0 - energy)
    if gap == 0:
        raise SingularityError("Classical traversal time diverges at E = V0")
    return particle.mass * length / math.sqrt(2.0 * particle.mass * gap)
