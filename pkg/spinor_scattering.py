"""
Stationary 1D scattering of a spin-1/2 particle through a magnetized barrier.

Inside the field region the two spin projections along the field see the
potential shifted by -/+ hbar*omega_L/2. Each projection is solved with a
piecewise-constant transfer matrix; the Larmor times are read off the
transmitted spinor and extrapolated to omega_L -> 0.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from barrier_analyzer import LarmorTimes, Provenance
from larmor_errors import (
    ConfigurationError,
    ConvergenceError,
    DomainError,
    NumericalInstabilityError,
)
from tunneling_times import moments_from_amplitudes

logger = logging.getLogger(__name__)

FEEBLE_FIELD_LIMIT = 1e-2
ENERGY_NUDGE = 1e-12
MIN_GAUSSIAN_SEGMENTS = 16


class ProfileKind(str, Enum):
    RECTANGULAR = "rectangular"
    GAUSSIAN = "gaussian"
    TABULATED = "tabulated"


class SpinBranch(str, Enum):
    PLUS = "plus"
    MINUS = "minus"


@dataclass(frozen=True, eq=False)
class PotentialProfile:
    """
    Piecewise-constant potential V(y) with a magnetized sub-interval.

    ``edges`` holds the N+1 segment boundaries and ``heights`` the N segment
    values. Outside [edges[0], edges[-1]] the potential is zero.
    """

    kind: ProfileKind
    edges: np.ndarray
    heights: np.ndarray
    field_region: Tuple[float, float]
    parameters: Dict[str, float] = field(default_factory=dict)
    mass: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        edges = np.array(self.edges, dtype=float)
        heights = np.array(self.heights, dtype=float)
        if edges.ndim != 1 or heights.ndim != 1 or len(heights) < 1:
            raise DomainError("Profile needs at least one segment")
        if len(edges) != len(heights) + 1:
            raise DomainError("Profile needs exactly one more edge than heights")
        if not (np.all(np.isfinite(edges)) and np.all(np.isfinite(heights))):
            raise DomainError("Profile edges and heights must be finite")
        if np.any(np.diff(edges) <= 0):
            raise DomainError("Profile edges must be strictly increasing")
        a, b = (float(v) for v in self.field_region)
        slack = 1e-12 * (edges[-1] - edges[0])
        if not (a < b and a >= edges[0] - slack and b <= edges[-1] + slack):
            raise DomainError(
                f"Field region [{a}, {b}] must be a non-empty part of the support "
                f"[{edges[0]}, {edges[-1]}]"
            )
        if not (self.mass > 0 and self.hbar > 0):
            raise DomainError("Mass and hbar must be positive")
        edges.setflags(write=False)
        heights.setflags(write=False)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "heights", heights)
        object.__setattr__(self, "field_region", (max(a, edges[0]), min(b, edges[-1])))
        object.__setattr__(self, "kind", ProfileKind(self.kind))

    @property
    def segments(self) -> int:
        return len(self.heights)

    @property
    def support(self) -> Tuple[float, float]:
        return float(self.edges[0]), float(self.edges[-1])

    def value_at(self, y: float) -> float:
        """Value of the underlying continuous potential at y."""
        lo, hi = self.support
        if y < lo or y > hi:
            return 0.0
        if self.kind is ProfileKind.GAUSSIAN:
            sigma = self.parameters["sigma"]
            centre = self.parameters.get("center", 0.0)
            return self.parameters["peak"] * math.exp(-((y - centre) ** 2) / (2.0 * sigma ** 2))
        index = min(int(np.searchsorted(self.edges, y, side="right")) - 1, self.segments - 1)
        return float(self.heights[index])

    def shifted_segments(self, shift: float) -> Tuple[np.ndarray, np.ndarray]:
        """
        Segment widths and heights with ``shift`` added inside the field region.

        The field-region endpoints are inserted as extra boundaries so the
        shift never straddles a segment.
        """
        a, b = self.field_region
        breaks = np.union1d(self.edges, [a, b])
        widths = np.diff(breaks)
        keep = widths > 0
        mids = 0.5 * (breaks[:-1] + breaks[1:])
        index = np.clip(np.searchsorted(self.edges, mids, side="right") - 1, 0, self.segments - 1)
        heights = self.heights[index] + shift * ((mids >= a) & (mids <= b))
        return widths[keep], heights[keep]


@dataclass(frozen=True)
class TransmissionAmplitude:
    """
    Transmission amplitude stored as log-magnitude and phase.

    The amplitude of an opaque barrier underflows long before its logarithm
    does, so ``log_magnitude`` is the primary quantity.
    """

    log_magnitude: float
    phase: float
    reflection: complex
    energy: float
    spin_branch: Optional[SpinBranch] = None
    omega_L: float = 0.0
    perturbed: bool = False

    @property
    def t(self) -> complex:
        return complex(math.exp(self.log_magnitude) * np.exp(1j * self.phase))

    @property
    def probability(self) -> float:
        return math.exp(2.0 * self.log_magnitude)

    @property
    def flux_residual(self) -> float:
        """|t|**2 + |r|**2 - 1."""
        return self.probability + abs(self.reflection) ** 2 - 1.0


@dataclass(frozen=True)
class WeakFieldConfig:
    """
    Larmor-frequency ladder for the omega_L -> 0 extrapolation.

    ``omega_L_base`` may be left unset, in which case it follows from
    hbar*omega_L = feebleness_ratio * E.
    """

    omega_L_base: Optional[float] = None
    richardson_levels: int = 3
    feebleness_ratio: float = 1e-4
    tolerance: float = 1e-6

    def __post_init__(self):
        if self.richardson_levels < 1:
            raise ConfigurationError("richardson_levels must be at least 1")
        if not self.feebleness_ratio > 0:
            raise ConfigurationError("feebleness_ratio must be positive")

    def base_frequency(self, energy: float, hbar: float = 1.0) -> float:
        """Starting Larmor frequency; enforces the feeble-field condition."""
        omega = self.omega_L_base if self.omega_L_base is not None else self.feebleness_ratio * energy / hbar
        if not omega > 0:
            raise ConfigurationError("Larmor frequency must be positive")
        if not hbar * omega < FEEBLE_FIELD_LIMIT * energy:
            raise ConfigurationError(
                f"hbar*omega_L = {hbar * omega:.3g} violates the feeble-field condition "
                f"(< {FEEBLE_FIELD_LIMIT:g} E = {FEEBLE_FIELD_LIMIT * energy:.3g})"
            )
        return omega


def rectangular_profile(height: float, width: float,
                        field_region: Optional[Tuple[float, float]] = None,
                        mass: float = 1.0, hbar: float = 1.0) -> PotentialProfile:
    """
    Single-segment barrier on [0, width].

    A zero height is allowed: the profile then describes pure precession in
    a field region without any barrier.
    """
    if height < 0 or not width > 0:
        raise DomainError("Rectangular profile needs height >= 0 and width > 0")
    return PotentialProfile(
        kind=ProfileKind.RECTANGULAR,
        edges=np.array([0.0, width]),
        heights=np.array([height]),
        field_region=field_region or (0.0, width),
        parameters={'height': height, 'width': width},
        mass=mass,
        hbar=hbar,
    )


def gaussian_profile(peak: float, width: float, support_multiplier: float = 5.0,
                     segments: int = 2000,
                     field_region: Optional[Tuple[float, float]] = None,
                     center: float = 0.0, mass: float = 1.0,
                     hbar: float = 1.0) -> PotentialProfile:
    """
    Gaussian barrier peak * exp(-(y - center)**2 / (2 width**2)) sampled at segment midpoints.

    Args:
        peak: Peak energy (> 0)
        width: Standard deviation sigma (> 0)
        support_multiplier: Half-width of the support in units of sigma
        segments: Number of piecewise-constant segments (>= 16)
        field_region: Magnetized interval; defaults to the whole support

    Returns:
        PotentialProfile
    """
    if not (peak > 0 and width > 0 and support_multiplier > 0):
        raise DomainError("Gaussian profile needs positive peak, width and support multiplier")
    if segments < MIN_GAUSSIAN_SEGMENTS:
        raise ConfigurationError(
            f"{segments} segments is too coarse for a Gaussian barrier (minimum {MIN_GAUSSIAN_SEGMENTS})"
        )
    half = support_multiplier * width
    edges = np.linspace(center - half, center + half, segments + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    heights = peak * np.exp(-((mids - center) ** 2) / (2.0 * width ** 2))
    return PotentialProfile(
        kind=ProfileKind.GAUSSIAN,
        edges=edges,
        heights=heights,
        field_region=field_region or (float(edges[0]), float(edges[-1])),
        parameters={'peak': peak, 'sigma': width, 'center': center,
                    'support_multiplier': support_multiplier},
        mass=mass,
        hbar=hbar,
    )


def tabulated_profile(y: Sequence[float], values: Sequence[float],
                      field_region: Optional[Tuple[float, float]] = None,
                      mass: float = 1.0, hbar: float = 1.0) -> PotentialProfile:
    """
    Profile from sampled (y, V) nodes; each pair of neighbours becomes a segment at their mean value.
    """
    y = np.asarray(y, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(y) < 2 or len(y) != len(values):
        raise DomainError("Tabulated profile needs at least two (y, V) nodes of equal length")
    if np.any(np.diff(y) <= 0):
        raise DomainError("Tabulated profile positions must be strictly increasing")
    return PotentialProfile(
        kind=ProfileKind.TABULATED,
        edges=y,
        heights=0.5 * (values[:-1] + values[1:]),
        field_region=field_region or (float(y[0]), float(y[-1])),
        parameters={'nodes': float(len(y))},
        mass=mass,
        hbar=hbar,
    )


def transmission(profile: PotentialProfile, energy: float,
                 spin_shift: float = 0.0) -> TransmissionAmplitude:
    """
    Transmission and reflection amplitudes of V(y) + spin_shift inside the field region.

    The transfer matrix is compounded segment by segment. Every propagation
    factor is split into exp(|Im k| d) times a bounded matrix; the exponent
    goes into a running log-scale and the matrix is renormalized after each
    step, so opaque barriers never overflow.

    Args:
        profile: Potential profile
        energy: Kinetic energy in the leads (> 0)
        spin_shift: Energy added to V inside the field region

    Returns:
        TransmissionAmplitude (t referenced to the support edges)

    Raises:
        DomainError: If E <= 0
        NumericalInstabilityError: If a non-finite value appears
    """
    if not energy > 0:
        raise DomainError(f"Energy must be positive, got {energy}")
    widths, heights = profile.shifted_segments(spin_shift)
    potentials = np.concatenate(([0.0], heights, [0.0]))

    perturbed = bool(np.any(potentials == energy))
    if perturbed:
        logger.warning("E = %.12g coincides with a segment height; nudging by %g relative",
                       energy, ENERGY_NUDGE)
        energy = energy * (1.0 + ENERGY_NUDGE)

    k = np.sqrt(2.0 * profile.mass * (energy - potentials) + 0j) / profile.hbar
    rho = (k[1:] / k[:-1]).tolist()
    k_seg = k[1:-1]
    growth = np.abs(k_seg.imag) * widths
    forward = np.exp(1j * k_seg * widths - growth).tolist()
    backward = np.exp(-1j * k_seg * widths - growth).tolist()
    growth = growth.tolist()

    # M maps right-lead coefficients onto left-lead coefficients: (A0, B0) = e^log_scale M (AR, BR)
    p, q = 1.0 + rho[0], 1.0 - rho[0]
    m00, m01, m10, m11 = 0.5 * p, 0.5 * q, 0.5 * q, 0.5 * p
    log_scale = 0.0
    for j in range(len(widths)):
        a, b = m00 * backward[j], m01 * forward[j]
        c, d = m10 * backward[j], m11 * forward[j]
        p, q = 1.0 + rho[j + 1], 1.0 - rho[j + 1]
        m00, m01 = 0.5 * (a * p + b * q), 0.5 * (a * q + b * p)
        m10, m11 = 0.5 * (c * p + d * q), 0.5 * (c * q + d * p)
        norm = max(abs(m00), abs(m01), abs(m10), abs(m11))
        if not (math.isfinite(norm) and norm > 0):
            raise NumericalInstabilityError("transfer matrix became non-finite or singular", segment=j)
        m00, m01, m10, m11 = m00 / norm, m01 / norm, m10 / norm, m11 / norm
        log_scale += growth[j] + math.log(norm)

    if m00 == 0:
        raise NumericalInstabilityError("vanishing transfer-matrix pivot", segment=len(widths) - 1)
    log_magnitude = -log_scale - math.log(abs(m00))
    if not math.isfinite(log_magnitude):
        raise NumericalInstabilityError("non-finite transmission magnitude", segment=len(widths) - 1)
    return TransmissionAmplitude(
        log_magnitude=log_magnitude,
        phase=-math.atan2(m00.imag, m00.real),
        reflection=complex(m10 / m00),
        energy=energy,
        perturbed=perturbed,
    )


def spin_amplitudes(profile: PotentialProfile, energy: float,
                    omega_L: float) -> Tuple[TransmissionAmplitude, TransmissionAmplitude]:
    """Amplitudes for the spin-up (V - hbar w/2) and spin-down (V + hbar w/2) projections."""
    half_split = 0.5 * profile.hbar * omega_L
    plus = transmission(profile, energy, -half_split)
    minus = transmission(profile, energy, +half_split)
    return (
        TransmissionAmplitude(plus.log_magnitude, plus.phase, plus.reflection, plus.energy,
                              SpinBranch.PLUS, omega_L, plus.perturbed),
        TransmissionAmplitude(minus.log_magnitude, minus.phase, minus.reflection, minus.energy,
                              SpinBranch.MINUS, omega_L, minus.perturbed),
    )


def raw_larmor_times(profile: PotentialProfile, energy: float,
                     omega_L: float) -> Tuple[float, float]:
    """
    Un-extrapolated (tau_y, tau_z) = (<S_y>, <S_z>) / ((hbar/2) omega_L) at one finite field.

    Both amplitudes are rescaled by their common magnitude before the
    moments are formed, which leaves the normalized moments unchanged and
    keeps opaque barriers out of underflow.
    """
    plus, minus = spin_amplitudes(profile, energy, omega_L)
    reference = max(plus.log_magnitude, minus.log_magnitude)
    t_plus = math.exp(plus.log_magnitude - reference) * np.exp(1j * plus.phase)
    t_minus = math.exp(minus.log_magnitude - reference) * np.exp(1j * minus.phase)
    moments = moments_from_amplitudes(complex(t_plus), complex(t_minus), omega_L=omega_L)
    return moments.sy / omega_L, moments.sz / omega_L


def richardson_extrapolate(values: Sequence[float], order: int = 2,
                           ratio: float = 2.0) -> List[float]:
    """
    Diagonal of the Richardson tableau.

    Args:
        values: Estimates at step sizes h, h/ratio, h/ratio**2, ...
        order: Power of the leading error term
        ratio: Step reduction factor between entries

    Returns:
        Successively improved estimates; the last one uses every value
    """
    tableau = [float(v) for v in values]
    diagonal = [tableau[0]]
    for j in range(1, len(tableau)):
        factor = ratio ** (order * j)
        for i in range(len(tableau) - 1, j - 1, -1):
            tableau[i] = (factor * tableau[i] - tableau[i - 1]) / (factor - 1.0)
        diagonal.append(tableau[j])
    return diagonal


def larmor_times_numeric(profile: PotentialProfile, energy: float,
                         config: Optional[WeakFieldConfig] = None) -> LarmorTimes:
    """
    Larmor times of an arbitrary profile from spin-split scattering.

    The raw times at omega_L, omega_L/2, ... carry O(omega_L**2) errors and
    are Richardson-extrapolated to omega_L -> 0.

    Args:
        profile: Potential profile with its field region
        energy: Particle energy
        config: Larmor-frequency ladder

    Returns:
        LarmorTimes with numeric provenance

    Raises:
        ConvergenceError: If the last two extrapolated estimates disagree by
            more than config.tolerance relative to the larger time
    """
    config = config or WeakFieldConfig()
    omega = config.base_frequency(energy, profile.hbar)
    ladder = [omega / 2 ** level for level in range(config.richardson_levels)]
    raw = [raw_larmor_times(profile, energy, w) for w in ladder]
    tau_y_seq = richardson_extrapolate([r[0] for r in raw])
    tau_z_seq = richardson_extrapolate([r[1] for r in raw])

    if len(ladder) > 1:
        reference = max(abs(tau_y_seq[-1]), abs(tau_z_seq[-1]))
        for name, seq in (("tau_y", tau_y_seq), ("tau_z", tau_z_seq)):
            if abs(seq[-1] - seq[-2]) > config.tolerance * reference:
                raise ConvergenceError(f"{name} did not converge as omega_L -> 0", seq)
    logger.debug("E=%.6g omega_L=%.3g tau_y=%s tau_z=%s", energy, omega, tau_y_seq, tau_z_seq)
    return LarmorTimes(tau_y=tau_y_seq[-1], tau_z=tau_z_seq[-1], provenance=Provenance.NUMERIC)
