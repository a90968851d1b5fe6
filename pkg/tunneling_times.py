"""
Spin moments of the transmitted ensemble and the three tunneling-time candidates.

Moments are expressed in units of hbar/2 and variances in (hbar/2)**2, so a
pure spinor has <S_i**2> = 1 and var_i = 1 - s_i**2. Times and frequencies
use whatever units the caller's Larmor times use (hbar/V0 and V0/hbar in the
natural system).

- ATT_B: quadrature sum sqrt(tau_y**2 + tau_z**2)
- ATT_S: the in-plane time tau_y alone
- ATT_F: fluctuation-induced time tau_y + tau_z**2 / tau_y
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Tuple

from barrier_analyzer import LarmorTimes
from larmor_errors import DegenerateMomentsError, DomainError

logger = logging.getLogger(__name__)

BLOCH_SLACK = 1e-12
UNCERTAINTY_SLACK = 1e-12


@dataclass(frozen=True)
class SpinMoments:
    """Mean spin components and in-plane variances of the transmitted spinor."""

    sx: float
    sy: float
    sz: float
    var_x: float
    var_y: float
    omega_L: float = 0.0

    @property
    def bloch_norm(self) -> float:
        return math.sqrt(self.sx ** 2 + self.sy ** 2 + self.sz ** 2)


@dataclass(frozen=True)
class AttTriple:
    """ATT_B, ATT_S and ATT_F for one energy point; infinities are math.inf."""

    att_b: float
    att_s: float
    att_f: float

    def as_dict(self) -> Dict[str, float]:
        return {'att_b': self.att_b, 'att_s': self.att_s, 'att_f': self.att_f}


@dataclass(frozen=True)
class FanoFactor:
    """Variance-to-mean ratio of one spin component, in units of hbar/2."""

    value: float
    component: str


def moments_from_amplitudes(t_plus: complex, t_minus: complex,
                            omega_L: float = 0.0) -> SpinMoments:
    """
    Spin moments of the transmitted spinor (t_plus, t_minus) / sqrt(N).

    The incident spin points along +x; t_plus and t_minus are the
    transmission amplitudes of the spin-up and spin-down projections along
    the field (z) axis.

    Args:
        t_plus: Amplitude of the projection that sees V - hbar*omega_L/2
        t_minus: Amplitude of the projection that sees V + hbar*omega_L/2
        omega_L: Larmor frequency the amplitudes were computed at

    Returns:
        SpinMoments with sx, sy, sz in units of hbar/2

    Raises:
        DegenerateMomentsError: If both amplitudes vanish
    """
    norm = abs(t_plus) ** 2 + abs(t_minus) ** 2
    if not norm > 0:
        raise DegenerateMomentsError("Both spin amplitudes vanish; nothing is transmitted")
    cross = t_plus.conjugate() * t_minus
    sx = 2.0 * cross.real / norm
    # spin-up sees the lower barrier and accumulates more phase: sy > 0
    sy = -2.0 * cross.imag / norm
    sz = (abs(t_plus) ** 2 - abs(t_minus) ** 2) / norm
    moments = SpinMoments(sx=sx, sy=sy, sz=sz, var_x=1.0 - sx ** 2,
                          var_y=1.0 - sy ** 2, omega_L=omega_L)
    if moments.bloch_norm > 1.0 + BLOCH_SLACK:
        logger.warning("Bloch vector length %.15g exceeds one", moments.bloch_norm)
    return moments


def variances_weak_field(times: LarmorTimes, omega_L: float) -> Tuple[float, float]:
    """
    Feeble-field variances (var_x, var_y) in units of (hbar/2)**2.

    var_x = omega_L**2 (tau_y**2 + tau_z**2), var_y = 1 - omega_L**2 tau_y**2.
    """
    w2 = omega_L ** 2
    return w2 * (times.tau_y ** 2 + times.tau_z ** 2), 1.0 - w2 * times.tau_y ** 2


def moments_weak_field(times: LarmorTimes, omega_L: float) -> SpinMoments:
    """
    Closed-form moment set of a feeble field to second order in omega_L.

    Only the second-order variances are kept, so the Bloch vector of this
    set may exceed unit length by O(omega_L**2).
    """
    var_x, var_y = variances_weak_field(times, omega_L)
    return SpinMoments(
        sx=1.0,
        sy=omega_L * times.tau_y,
        sz=omega_L * times.tau_z,
        var_x=var_x,
        var_y=var_y,
        omega_L=omega_L,
    )


def uncertainty_check(moments: SpinMoments) -> Tuple[float, float, bool]:
    """
    Robertson relation for the in-plane components.

    Returns:
        (lhs, rhs, satisfied) with lhs = var_x var_y and rhs = sz**2, both
        in units of (hbar/2)**4; satisfied when lhs >= rhs - 1e-12
    """
    lhs = moments.var_x * moments.var_y
    rhs = moments.sz ** 2
    return lhs, rhs, lhs >= rhs - UNCERTAINTY_SLACK


def att_b(times: LarmorTimes) -> float:
    return math.hypot(times.tau_y, times.tau_z)


def att_s(times: LarmorTimes) -> float:
    return times.tau_y


def att_f_closed(times: LarmorTimes) -> float:
    """
    ATT_F = tau_y + tau_z**2 / tau_y.

    Raises:
        DomainError: If tau_y < 0, which only a broken sign convention produces
    """
    tau_y, tau_z = times.tau_y, times.tau_z
    if tau_y < 0:
        raise DomainError(f"ATT_F needs tau_y >= 0, got {tau_y}")
    if tau_y == 0:
        return math.inf if tau_z != 0 else 0.0
    return tau_y + tau_z ** 2 / tau_y


def att_f_from_moments(moments: SpinMoments) -> float:
    """
    ATT_F as the product of the x and y Fano factors over the Larmor frequency.

    Each Fano factor is normalized by hbar/2, which in moment units reads
    (var_x / sx) (var_y / sy) / omega_L.

    Raises:
        DegenerateMomentsError: If sy is not positive or omega_L is zero
        DomainError: If sx is zero, where the x Fano factor is undefined
    """
    if not moments.omega_L > 0:
        raise DegenerateMomentsError("ATT_F from moments needs a positive Larmor frequency")
    if not moments.sy > 0:
        raise DegenerateMomentsError(f"No in-plane precession signal (sy = {moments.sy})")
    fano_x = fano(moments.var_x, moments.sx, "x").value
    fano_y = fano(moments.var_y, moments.sy, "y").value
    return fano_x * fano_y / moments.omega_L


def fano(variance: float, mean: float, component: str = "x") -> FanoFactor:
    """
    Fano factor variance / mean.

    Raises:
        DomainError: If the mean is zero
    """
    if mean == 0:
        raise DomainError(f"Fano factor of S_{component} undefined for zero mean")
    return FanoFactor(value=variance / mean, component=component)


def att_triple(times: LarmorTimes) -> AttTriple:
    return AttTriple(att_b=att_b(times), att_s=att_s(times), att_f=att_f_closed(times))


def traversal_speeds(width: float, triple: AttTriple) -> Dict[str, float]:
    """
    Effective crossing speeds width / ATT for each candidate.

    An infinite time gives speed 0 and a zero time gives math.inf.
    """
    speeds = {}
    for name, value in triple.as_dict().items():
        if math.isinf(value):
            speeds[name] = 0.0
        elif value == 0:
            speeds[name] = math.inf
        else:
            speeds[name] = width / value
    return speeds
