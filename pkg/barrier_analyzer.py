"""
Closed-form Larmor precession times for a rectangular potential barrier.

All quantities are in the barrier's own units (by default hbar = m = 1 and
energies measured in the same unit as V0). The raw textbook expressions
overflow for opaque barriers and lose every digit at E = V0, so the
evaluation is split into branches:

- tunneling (E < V0): the formulas with exp(2 lambda) factored out
- asymptotic (lambda > ASYMPTOTIC_OPACITY): leading exponential terms only
- oscillatory (E > V0): analytic continuation sinh(lambda) -> i sin(|lambda|)
- series (|V0 - E| / V0 < SERIES_WINDOW): rewritten in lambda**2, which is
  an entire function of V0 - E, with Taylor series for the small pieces
"""

import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Any, Dict, NamedTuple, Optional, Tuple

import numpy as np

from larmor_errors import DomainError, SingularityError

logger = logging.getLogger(__name__)

SERIES_WINDOW = 1e-6
ASYMPTOTIC_OPACITY = 350.0
_SERIES_RADIUS = 0.5
_SERIES_TERMS = 14


class Provenance(str, Enum):
    ANALYTIC = "analytic"
    NUMERIC = "numeric"
    MEASURED = "measured"


class Branch(str, Enum):
    TUNNELING = "tunneling"
    ASYMPTOTIC = "asymptotic"
    OSCILLATORY = "oscillatory"
    SERIES = "series"


class LimitRegime(str, Enum):
    LOW_BARRIER = "low"
    HIGH_BARRIER = "high"
    THICK_BARRIER = "thick"
    CLASSICAL = "classical"


@dataclass(frozen=True)
class RectangularBarrier:
    """Barrier of height v0 on [0, length] for a particle of the given mass."""

    v0: float
    length: float
    mass: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if not self.v0 > 0:
            raise DomainError(f"Barrier height must be positive, got {self.v0}")
        if not self.length > 0:
            raise DomainError(f"Barrier width must be positive, got {self.length}")
        if not (self.mass > 0 and self.hbar > 0):
            raise DomainError("Mass and hbar must be positive")

    @property
    def opacity_coefficient(self) -> float:
        """The factor a with lambda**2 = a (V0 - E)."""
        return 2.0 * self.mass * self.length ** 2 / self.hbar ** 2

    def with_hbar(self, hbar: float) -> "RectangularBarrier":
        """Same barrier with a rescaled Planck constant (classical-limit sweeps)."""
        return replace(self, hbar=hbar)

    @classmethod
    def from_opacity(cls, v0: float, energy: float, opacity: float,
                     mass: float = 1.0, hbar: float = 1.0) -> "RectangularBarrier":
        """Build the barrier whose opacity at ``energy`` equals ``opacity``."""
        if not 0 < energy < v0:
            raise DomainError("Opacity is only defined for 0 < E < V0")
        length = opacity * hbar / math.sqrt(2.0 * mass * (v0 - energy))
        return cls(v0=v0, length=length, mass=mass, hbar=hbar)


@dataclass(frozen=True)
class Opacity:
    """
    Barrier opacity at one energy.

    In the tunneling regime ``value`` is lambda > 0. Above the barrier the
    opacity is imaginary; ``value`` then holds |lambda| and ``oscillatory``
    is set.
    """

    value: float
    oscillatory: bool = False

    @property
    def squared(self) -> float:
        """lambda**2 with its sign (negative above the barrier)."""
        return -self.value ** 2 if self.oscillatory else self.value ** 2


@dataclass(frozen=True)
class LarmorTimes:
    """The two Larmor clock readings for one energy point."""

    tau_y: float
    tau_z: float
    provenance: Provenance = Provenance.ANALYTIC


class OpaqueLimits(NamedTuple):
    att_b: float
    att_s: float
    att_f: float


class RegimeLimits(NamedTuple):
    tau_y: float
    tau_z: float
    att_b: float
    att_s: float
    att_f: float


def _check_energy(energy: float):
    if not energy > 0:
        raise DomainError(f"Energy must be positive, got {energy}")


def opacity(barrier: RectangularBarrier, energy: float) -> Opacity:
    """
    Barrier opacity lambda = L sqrt(2 m (V0 - E)) / hbar.

    Args:
        barrier: Rectangular barrier
        energy: Particle energy

    Returns:
        Opacity; flagged oscillatory when E > V0
    """
    _check_energy(energy)
    gap = barrier.v0 - energy
    value = barrier.length * math.sqrt(2.0 * barrier.mass * abs(gap)) / barrier.hbar
    return Opacity(value=value, oscillatory=gap < 0)


def select_branch(barrier: RectangularBarrier, energy: float) -> Branch:
    """Pick the evaluation branch for (barrier, E)."""
    _check_energy(energy)
    gap = barrier.v0 - energy
    if abs(gap) < SERIES_WINDOW * barrier.v0:
        return Branch.SERIES
    if gap < 0:
        return Branch.OSCILLATORY
    if opacity(barrier, energy).value > ASYMPTOTIC_OPACITY:
        return Branch.ASYMPTOTIC
    return Branch.TUNNELING


# Entire functions of x = lambda**2 used by the series branch

def _sinhc(x: float) -> float:
    """sinh(sqrt(x)) / sqrt(x), continued to x < 0 as sin(sqrt(-x)) / sqrt(-x)."""
    if abs(x) < _SERIES_RADIUS:
        return sum(x ** n / math.factorial(2 * n + 1) for n in range(_SERIES_TERMS))
    r = math.sqrt(abs(x))
    return float(np.sinh(r) / r) if x > 0 else math.sin(r) / r


def _coshc(x: float) -> float:
    r = math.sqrt(abs(x))
    return float(np.cosh(r)) if x > 0 else math.cos(r)


def _sinhc_excess(y: float) -> float:
    """(sinhc(y) - 1) / y."""
    if abs(y) < _SERIES_RADIUS:
        return sum(y ** (n - 1) / math.factorial(2 * n + 1) for n in range(1, _SERIES_TERMS + 1))
    return (_sinhc(y) - 1.0) / y


def _cosh_sinh_gap(x: float) -> float:
    """(cosh(sqrt x) - sinhc(x)) / x."""
    if abs(x) < _SERIES_RADIUS:
        return sum(
            x ** (n - 1) * 2 * n / math.factorial(2 * n + 1) for n in range(1, _SERIES_TERMS + 1)
        )
    return (_coshc(x) - _sinhc(x)) / x


def series_form_times(barrier: RectangularBarrier, energy: float) -> Tuple[float, float]:
    """
    Larmor times from the lambda**2 form, regular at E = V0.

    Valid for any E > 0 as long as lambda**2 does not overflow; the
    dispatcher only uses it inside the E = V0 window.
    """
    v0, e, a = barrier.v0, energy, barrier.opacity_coefficient
    x = a * (v0 - e)
    s = _sinhc(x)
    denominator = 4.0 * e + v0 ** 2 * a * s ** 2
    tau_y = barrier.length * math.sqrt(2.0 * barrier.mass * e) * (
        2.0 + 4.0 * a * v0 * _sinhc_excess(4.0 * x)
    ) / denominator
    tau_z = 0.5 * barrier.hbar * v0 * a * s * (2.0 * s + a * v0 * _cosh_sinh_gap(x)) / denominator
    return tau_y, tau_z


def stable_form_times(barrier: RectangularBarrier, energy: float) -> Tuple[float, float]:
    """Tunneling-regime times with exp(2 lambda) divided out of numerator and denominator."""
    v0, e, hbar = barrier.v0, energy, barrier.hbar
    gap = v0 - e
    lam = opacity(barrier, e).value
    with np.errstate(over="raise"):
        q = float(np.exp(-2.0 * lam))
        one_minus_q = float(-np.expm1(-2.0 * lam))
        one_minus_q2 = float(-np.expm1(-4.0 * lam))
    denominator = 4.0 * e * gap * q + v0 ** 2 * one_minus_q ** 2 / 4.0
    tau_y = 0.5 * hbar * math.sqrt(e / gap) * (
        2.0 * lam * (v0 - 2.0 * e) * q + v0 * one_minus_q2 / 2.0
    ) / denominator
    tau_z = 0.25 * hbar * (v0 / gap) * (
        2.0 * (v0 - 2.0 * e) * one_minus_q ** 2 / 4.0 + v0 * lam * one_minus_q2 / 2.0
    ) / denominator
    return tau_y, tau_z


def asymptotic_form_times(barrier: RectangularBarrier, energy: float) -> Tuple[float, float]:
    """Opaque-barrier times with every exp(-2 lambda) correction dropped."""
    v0, e, hbar = barrier.v0, energy, barrier.hbar
    gap = v0 - e
    lam = opacity(barrier, e).value
    tau_y = (hbar / v0) * math.sqrt(e / gap)
    tau_z = (hbar / gap) * ((v0 - 2.0 * e) / (2.0 * v0) + lam / 2.0)
    return tau_y, tau_z


def oscillatory_form_times(barrier: RectangularBarrier, energy: float) -> Tuple[float, float]:
    """Above-barrier times obtained by continuing lambda to i|lambda|."""
    v0, e, hbar = barrier.v0, energy, barrier.hbar
    excess = e - v0
    mu = opacity(barrier, e).value
    sin_mu = math.sin(mu)
    denominator = 4.0 * e * excess + v0 ** 2 * sin_mu ** 2
    tau_y = 0.5 * hbar * math.sqrt(e / excess) * (
        2.0 * mu * (2.0 * e - v0) - v0 * math.sin(2.0 * mu)
    ) / denominator
    tau_z = 0.25 * hbar * (v0 / excess) * (
        2.0 * (2.0 * e - v0) * sin_mu ** 2 - v0 * mu * math.sin(2.0 * mu)
    ) / denominator
    return tau_y, tau_z


_EVALUATORS = {
    Branch.TUNNELING: stable_form_times,
    Branch.ASYMPTOTIC: asymptotic_form_times,
    Branch.OSCILLATORY: oscillatory_form_times,
    Branch.SERIES: series_form_times,
}


def larmor_times_rect(barrier: RectangularBarrier, energy: float) -> LarmorTimes:
    """
    Both Larmor times of a rectangular barrier at one energy.

    Args:
        barrier: Rectangular barrier
        energy: Particle energy (> 0)

    Returns:
        LarmorTimes with analytic provenance
    """
    branch = select_branch(barrier, energy)
    tau_y, tau_z = _EVALUATORS[branch](barrier, energy)
    logger.debug("E=%.6g V0=%.6g branch=%s tau_y=%.9g tau_z=%.9g",
                 energy, barrier.v0, branch.value, tau_y, tau_z)
    return LarmorTimes(tau_y=tau_y, tau_z=tau_z, provenance=Provenance.ANALYTIC)


def tau_y_rect(barrier: RectangularBarrier, energy: float) -> float:
    """In-plane precession time tau_y."""
    return larmor_times_rect(barrier, energy).tau_y


def tau_z_rect(barrier: RectangularBarrier, energy: float) -> float:
    """Field-aligned polarization time tau_z."""
    return larmor_times_rect(barrier, energy).tau_z


def transmission_probability_rect(barrier: RectangularBarrier, energy: float) -> float:
    """
    Textbook transmission probability |t|**2 of the rectangular barrier.

    Uses the same branch split as the Larmor times, so it neither
    overflows for opaque barriers nor degenerates at E = V0.
    """
    branch = select_branch(barrier, energy)
    v0, e = barrier.v0, energy
    if branch is Branch.SERIES:
        a = barrier.opacity_coefficient
        s = _sinhc(a * (v0 - e))
        return 4.0 * e / (4.0 * e + v0 ** 2 * a * s ** 2)
    lam = opacity(barrier, e).value
    if branch is Branch.OSCILLATORY:
        excess = e - v0
        return 4.0 * e * excess / (4.0 * e * excess + v0 ** 2 * math.sin(lam) ** 2)
    gap = v0 - e
    q = float(np.exp(-2.0 * lam))
    one_minus_q = float(-np.expm1(-2.0 * lam))
    return 4.0 * e * gap * q / (4.0 * e * gap * q + v0 ** 2 * one_minus_q ** 2 / 4.0)


def classical_time_natural(barrier: RectangularBarrier, energy: float,
                           v0: Optional[float] = None) -> float:
    """
    Classical traversal time m L / sqrt(2 m |V0 - E|) in barrier units.

    Args:
        barrier: Supplies L, m (and V0 unless overridden)
        energy: Particle energy
        v0: Height to use instead of barrier.v0 (0 gives the free-flight time)

    Raises:
        SingularityError: If E equals the height
    """
    height = barrier.v0 if v0 is None else v0
    gap = abs(height - energy)
    if gap == 0:
        raise SingularityError("Classical traversal time diverges at E = V0")
    return barrier.mass * barrier.length / math.sqrt(2.0 * barrier.mass * gap)


def opaque_limits(barrier: RectangularBarrier, energy: float) -> OpaqueLimits:
    """
    lambda -> infinity limits of the three tunneling-time candidates.

    Returns:
        OpaqueLimits(att_b, att_s, att_f) built from tau_c(V0, E) and tau_c(0, E)
    """
    _check_energy(energy)
    if energy >= barrier.v0:
        raise DomainError("Opaque limits require 0 < E < V0")
    tau_barrier = classical_time_natural(barrier, energy)
    tau_free = classical_time_natural(barrier, energy, v0=0.0)
    att_s = (barrier.hbar / barrier.v0) * tau_barrier / tau_free
    att_b = math.hypot(att_s, tau_barrier)
    att_f = att_s + barrier.v0 * tau_barrier * tau_free / barrier.hbar
    return OpaqueLimits(att_b=att_b, att_s=att_s, att_f=att_f)


def table1_regime(regime: LimitRegime, barrier: RectangularBarrier, energy: float,
                  hbar_eff: Optional[float] = None) -> RegimeLimits:
    """
    Limit values of (tau_y, tau_z, ATT_B, ATT_S, ATT_F) in one asymptotic regime.

    Infinite entries are returned as math.inf by construction, never as an
    overflowed evaluation.

    Args:
        regime: low-barrier, high-barrier, thick-barrier or classical
        barrier: Barrier supplying V0, L, m
        energy: Particle energy (ignored by the high-barrier row, which sets E = 0)
        hbar_eff: Optional rescaled Planck constant

    Returns:
        RegimeLimits
    """
    regime = LimitRegime(regime)
    if hbar_eff is not None:
        barrier = barrier.with_hbar(hbar_eff)
    _check_energy(energy)

    if regime is LimitRegime.LOW_BARRIER:
        tau = classical_time_natural(barrier, energy, v0=0.0)
        return RegimeLimits(tau, 0.0, tau, tau, tau)
    if regime is LimitRegime.HIGH_BARRIER:
        tau = classical_time_natural(barrier, 0.0)
        return RegimeLimits(0.0, tau, tau, 0.0, math.inf)
    if regime is LimitRegime.THICK_BARRIER:
        att_s = opaque_limits(barrier, energy).att_s
        return RegimeLimits(att_s, math.inf, math.inf, att_s, math.inf)
    tau = classical_time_natural(barrier, energy)
    return RegimeLimits(0.0, tau, tau, 0.0, math.inf)


def summarize_point(barrier: RectangularBarrier, energy: float) -> Dict[str, Any]:
    """
    Collect every analytic quantity for one energy point.

    Returns:
        Dictionary with opacity, transmission, tau_y, tau_z, the classical
        times (None where singular) and the branch used
    """
    times = larmor_times_rect(barrier, energy)
    lam = opacity(barrier, energy)
    try:
        tau_c = classical_time_natural(barrier, energy)
    except SingularityError:
        tau_c = None
    return {
        'opacity': lam.value,
        'oscillatory': lam.oscillatory,
        'branch': select_branch(barrier, energy).value,
        'transmission': transmission_probability_rect(barrier, energy),
        'tau_y': times.tau_y,
        'tau_z': times.tau_z,
        'tau_c': tau_c,
        'tau_c_free': classical_time_natural(barrier, energy, v0=0.0),
    }
