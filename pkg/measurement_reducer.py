"""
Reduction of measured precession times to tunneling-time candidates.

Each measured (tau_y, tau_z) pair becomes ATT_B, ATT_S and ATT_F with
first-order propagated errors. A Monte-Carlo propagation through the same
formula is available as a cross-check of the linearization.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import pandas as pd
from scipy.stats import truncnorm
from uncertainties import correlated_values, ufloat, umath

from larmor_errors import DomainError

logger = logging.getLogger(__name__)

DIVERGENT_REGIME = "divergent-regime"
NONLINEAR_ERROR = "nonlinear-error"
# beyond this relative error on tau_y the linearized sigma_F is unreliable
LINEARIZATION_LIMIT = 0.1
REDUCTION_COLUMNS = ("e_over_v0", "att_f_ms", "sigma_f_ms", "att_b_ms", "sigma_b_ms",
                     "att_s_ms", "sigma_s_ms", "flags")


@dataclass(frozen=True)
class MeasurementRow:
    """One measured energy point; times in ms, covariance in ms**2."""

    e_over_v0: float
    tau_y: float
    sigma_y: float
    tau_z: float
    sigma_z: float
    cov_yz: float = 0.0
    line: Optional[int] = None


@dataclass
class AttRow:
    """Reduced tunneling times for one measurement row; sigma_f is None when ATT_F diverges."""

    e_over_v0: float
    att_f: float
    sigma_f: Optional[float]
    att_b: float
    sigma_b: float
    att_s: float
    sigma_s: float
    flags: List[str] = field(default_factory=list)
    sigma_f_mc: Optional[float] = None


def _measured_pair(row: MeasurementRow):
    if row.cov_yz == 0:
        return ufloat(row.tau_y, row.sigma_y), ufloat(row.tau_z, row.sigma_z)
    covariance = [[row.sigma_y ** 2, row.cov_yz], [row.cov_yz, row.sigma_z ** 2]]
    return tuple(correlated_values([row.tau_y, row.tau_z], covariance))


def reduce_row(row: MeasurementRow) -> AttRow:
    """
    Propagate one row through ATT_B, ATT_S and ATT_F to first order.

    A row with tau_y <= 0 is kept: it is flagged divergent-regime and its
    ATT_F reported as math.inf without an error.
    """
    tau_y, tau_z = _measured_pair(row)
    flags = []

    att_s = tau_y
    if row.tau_y == 0 and row.tau_z == 0:
        # sqrt is not differentiable at the origin
        att_b = ufloat(0.0, math.hypot(row.sigma_y, row.sigma_z))
    else:
        att_b = umath.sqrt(tau_y ** 2 + tau_z ** 2)
    if row.tau_y <= 0:
        flags.append(DIVERGENT_REGIME)
        logger.warning("E/V0=%g: tau_y = %g <= 0, ATT_F reported as inf", row.e_over_v0, row.tau_y)
        att_f_value, sigma_f = math.inf, None
    else:
        att_f = tau_y + tau_z ** 2 / tau_y
        att_f_value, sigma_f = att_f.nominal_value, att_f.std_dev
        if row.sigma_y / row.tau_y > LINEARIZATION_LIMIT:
            flags.append(NONLINEAR_ERROR)

    return AttRow(
        e_over_v0=row.e_over_v0,
        att_f=att_f_value,
        sigma_f=sigma_f,
        att_b=att_b.nominal_value,
        sigma_b=att_b.std_dev,
        att_s=att_s.nominal_value,
        sigma_s=att_s.std_dev,
        flags=flags,
    )


def reduce_measurements(rows: List[MeasurementRow]) -> List[AttRow]:
    """
    Reduce measured precession times to ATT rows, one per input row and in order.

    sigma_F**2 = (1 - z**2/y**2)**2 sigma_y**2 + (2z/y)**2 sigma_z**2
                 + 2 (1 - z**2/y**2)(2z/y) cov_yz
    """
    reduced = [reduce_row(row) for row in rows]
    flagged = sum(1 for r in reduced if r.flags)
    logger.info("Reduced %d rows (%d flagged)", len(reduced), flagged)
    return reduced


def monte_carlo_sigma(row: MeasurementRow, samples: int = 1_000_000,
                      seed: Optional[int] = None) -> float:
    """
    Standard deviation of ATT_F from Gaussian resampling of (tau_y, tau_z).

    tau_y is truncated to positive values. Uncorrelated rows draw tau_y from
    scipy's truncated normal; correlated rows reject non-positive tau_y from
    a bivariate normal until enough samples are kept.

    Raises:
        DomainError: If tau_y <= 0 (no positive mass to sample)
    """
    if row.tau_y <= 0:
        raise DomainError(f"Monte-Carlo propagation needs tau_y > 0, got {row.tau_y}")
    rng = np.random.default_rng(seed)

    if row.cov_yz == 0:
        if row.sigma_y > 0:
            lower = (0.0 - row.tau_y) / row.sigma_y
            tau_y = truncnorm.rvs(lower, np.inf, loc=row.tau_y, scale=row.sigma_y,
                                  size=samples, random_state=rng)
        else:
            tau_y = np.full(samples, row.tau_y)
        tau_z = rng.normal(row.tau_z, row.sigma_z, size=samples)
    else:
        mean = [row.tau_y, row.tau_z]
        covariance = [[row.sigma_y ** 2, row.cov_yz], [row.cov_yz, row.sigma_z ** 2]]
        kept = []
        remaining = samples
        while remaining > 0:
            draw = rng.multivariate_normal(mean, covariance, size=int(remaining * 1.1) + 16)
            draw = draw[draw[:, 0] > 0][:remaining]
            kept.append(draw)
            remaining -= len(draw)
        pairs = np.concatenate(kept)
        tau_y, tau_z = pairs[:, 0], pairs[:, 1]

    att_f = tau_y + tau_z ** 2 / tau_y
    return float(np.std(att_f, ddof=1))


def reduction_frame(reduced: List[AttRow]) -> pd.DataFrame:
    """Tabulate reduced rows with ms column names; a missing sigma becomes NaN (an empty cell)."""
    columns = list(REDUCTION_COLUMNS)
    if any(r.sigma_f_mc is not None for r in reduced):
        columns.append('sigma_f_mc_ms')
    records = []
    for r in reduced:
        record = {
            'e_over_v0': r.e_over_v0,
            'att_f_ms': r.att_f,
            'sigma_f_ms': r.sigma_f if r.sigma_f is not None else np.nan,
            'att_b_ms': r.att_b,
            'sigma_b_ms': r.sigma_b,
            'att_s_ms': r.att_s,
            'sigma_s_ms': r.sigma_s,
            'flags': ';'.join(r.flags),
        }
        if r.sigma_f_mc is not None:
            record['sigma_f_mc_ms'] = r.sigma_f_mc
        records.append(record)
    return pd.DataFrame(records, columns=columns)


def measurements_frame(rows: List[MeasurementRow]) -> pd.DataFrame:
    """Inverse of the CSV schema read by file_parsers.parse_measurements."""
    frame = pd.DataFrame({
        'e_over_v0': [r.e_over_v0 for r in rows],
        'tau_y_ms': [r.tau_y for r in rows],
        'tau_y_err_ms': [r.sigma_y for r in rows],
        'tau_z_ms': [r.tau_z for r in rows],
        'tau_z_err_ms': [r.sigma_z for r in rows],
    })
    if any(r.cov_yz != 0 for r in rows):
        frame['cov_yz_ms2'] = [r.cov_yz for r in rows]
    return frame
