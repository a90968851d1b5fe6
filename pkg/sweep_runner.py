"""
Parameter sweeps over E/V0 or L/L0 and CSV/JSON emission of the resulting tables.
"""

import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from functools import partial
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from barrier_analyzer import (
    RectangularBarrier,
    classical_time_natural,
    larmor_times_rect,
    transmission_probability_rect,
)
from larmor_errors import ConfigurationError, DomainError, SingularityError
from physical_units import (
    MICROMETER,
    MILLISECOND,
    NANOKELVIN,
    Scales,
    energy_from_temperature,
    get_particle,
    to_dimensionless,
    to_physical,
)
from spinor_scattering import (
    WeakFieldConfig,
    gaussian_profile,
    larmor_times_numeric,
    rectangular_profile,
    transmission,
)
from tunneling_times import att_triple

logger = logging.getLogger(__name__)

BARRIERS = ("rect", "gauss")
AXES = {"e": "e_over_v0", "L": "l_over_l0"}
ENGINES = ("analytic", "numeric")
# width -> Gaussian standard deviation
WIDTH_CONVENTIONS = {
    "sigma": 1.0,
    "fwhm": 1.0 / (2.0 * math.sqrt(2.0 * math.log(2.0))),
    "waist": 0.5,
}
TIME_COLUMNS = ("tau_y", "tau_z", "att_b", "att_s", "att_f", "tau_c", "tau_c_free")


@dataclass(frozen=True)
class SweepSpec:
    """
    One sweep: barrier, lab parameters, axis and engine.

    On the 'L' axis the width is axis_value * width_um and the energy is
    energy_ratio * V0; on the 'e' axis the width is width_um and the axis
    value is E/V0.
    """

    barrier: str = "rect"
    v0_nK: float = 135.0
    width_um: float = 1.3
    width_convention: str = "sigma"
    particle: str = "rb87"
    axis: str = "e"
    start: float = 0.05
    stop: float = 2.0
    points: int = 40
    engine: str = "analytic"
    natural_units: bool = False
    energy_ratio: float = 0.5
    segments: int = 2000
    support_multiplier: float = 5.0
    feebleness_ratio: float = 1e-4
    richardson_levels: int = 3

    def validate(self):
        if self.barrier not in BARRIERS:
            raise ConfigurationError(f"Unknown barrier '{self.barrier}'. Choose from {', '.join(BARRIERS)}")
        if self.axis not in AXES:
            raise ConfigurationError(f"Unknown axis '{self.axis}'. Choose from {', '.join(AXES)}")
        if self.engine not in ENGINES:
            raise ConfigurationError(f"Unknown engine '{self.engine}'. Choose from {', '.join(ENGINES)}")
        if self.width_convention not in WIDTH_CONVENTIONS:
            raise ConfigurationError(f"Unknown width convention '{self.width_convention}'")
        if self.engine == "analytic" and self.barrier != "rect":
            raise ConfigurationError("The analytic engine only handles rectangular barriers")
        if not (self.v0_nK > 0 and self.width_um > 0):
            raise ConfigurationError("--v0-nK and --width-um must be positive")
        if self.points < 1:
            raise ConfigurationError("--points must be at least 1")
        if not (0 < self.start <= self.stop):
            raise ConfigurationError("Sweep range must satisfy 0 < from <= to")
        if self.axis == "L" and not self.energy_ratio > 0:
            raise ConfigurationError("Energy ratio for a width sweep must be positive")
        get_particle(self.particle)

    @property
    def axis_column(self) -> str:
        return AXES[self.axis]

    def axis_values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.points)

    def scales(self) -> Scales:
        v0 = energy_from_temperature(self.v0_nK * NANOKELVIN)
        return Scales.from_energy(v0, get_particle(self.particle))


def _time_unit(spec: SweepSpec, scales: Scales, value: float) -> float:
    if spec.natural_units or not math.isfinite(value):
        return value
    return to_physical(value, "time", scales) / MILLISECOND


def evaluate_point(spec: SweepSpec, axis_value: float) -> Dict[str, Any]:
    """
    All table columns for one axis value.

    tau_c is NaN at E = V0, where the classical time diverges.
    """
    scales = spec.scales()
    width = to_dimensionless(spec.width_um * MICROMETER, "length", scales)
    if spec.axis == "L":
        width *= axis_value
        energy = spec.energy_ratio
    else:
        energy = axis_value

    # tau_c always uses the nominal width of the barrier
    nominal = RectangularBarrier(v0=1.0, length=width)
    if spec.engine == "analytic":
        times = larmor_times_rect(nominal, energy)
        probability = transmission_probability_rect(nominal, energy)
    else:
        if spec.barrier == "rect":
            profile = rectangular_profile(1.0, width)
        else:
            sigma = width * WIDTH_CONVENTIONS[spec.width_convention]
            profile = gaussian_profile(1.0, sigma, spec.support_multiplier, spec.segments)
        config = WeakFieldConfig(richardson_levels=spec.richardson_levels,
                                 feebleness_ratio=spec.feebleness_ratio)
        times = larmor_times_numeric(profile, energy, config)
        probability = transmission(profile, energy).probability

    try:
        tau_c = classical_time_natural(nominal, energy)
    except SingularityError:
        tau_c = math.nan
    triple = att_triple(times)
    row = {
        spec.axis_column: float(axis_value),
        'tau_y': times.tau_y,
        'tau_z': times.tau_z,
        'att_b': triple.att_b,
        'att_s': triple.att_s,
        'att_f': triple.att_f,
        'tau_c': tau_c,
        'tau_c_free': classical_time_natural(nominal, energy, v0=0.0),
    }
    suffix = "" if spec.natural_units else "_ms"
    table_row = {spec.axis_column: row.pop(spec.axis_column)}
    for name, value in row.items():
        table_row[name + suffix] = _time_unit(spec, scales, value)
    table_row['transmission'] = probability
    return table_row


def sweep(spec: SweepSpec, workers: int = 1) -> pd.DataFrame:
    """
    Evaluate a sweep into a table ordered by axis value.

    Args:
        spec: Sweep specification
        workers: Process-pool size; 1 evaluates in this process

    Returns:
        DataFrame with the axis column, the Larmor and ATT times, tau_c,
        tau_c_free (ms, or hbar/V0 with natural units) and the transmission
    """
    spec.validate()
    values = spec.axis_values()
    logger.info("Sweeping %s from %g to %g (%d points, %s engine, %s barrier)",
                spec.axis_column, spec.start, spec.stop, spec.points, spec.engine, spec.barrier)

    if workers <= 1 or len(values) == 1:
        rows = [evaluate_point(spec, v) for v in values]
    else:
        rows = []
        task = partial(evaluate_point, spec)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(task, float(v)) for v in values]
            for future in as_completed(futures):
                rows.append(future.result())

    table = pd.DataFrame.from_records(rows)
    return table.sort_values(spec.axis_column, kind="stable").reset_index(drop=True)


def growth_exponent(axis_values: Sequence[float], times: Sequence[float]) -> float:
    """
    Least-squares slope of log(time) against log(axis value).

    Raises:
        DomainError: If any value is non-positive or non-finite, or fewer than two points
    """
    x = np.asarray(axis_values, dtype=float)
    y = np.asarray(times, dtype=float)
    if len(x) < 2 or len(x) != len(y):
        raise DomainError("Growth exponent needs at least two matching points")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y)) and np.all(x > 0) and np.all(y > 0)):
        raise DomainError("Growth exponent needs positive finite values")
    slope, _ = np.polyfit(np.log(x), np.log(y), 1)
    return float(slope)


def _json_value(value):
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return None
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return float(f"{value:.9g}")
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def table_records(table: pd.DataFrame) -> List[Dict[str, Any]]:
    """Rows as JSON-ready dicts: infinities become the string 'inf' and NaN becomes null."""
    return [
        {column: _json_value(value) for column, value in record.items()}
        for record in table.to_dict(orient="records")
    ]


def emit(table: pd.DataFrame, path: Optional[str] = None, file_format: str = "csv"):
    """
    Write a table as CSV or JSON with 9 significant digits.

    NaN is written as an empty CSV cell (or JSON null); +inf as 'inf'.

    Args:
        table: Table to write
        path: Output path; None or '-' writes to stdout
        file_format: 'csv' or 'json'
    """
    if file_format not in ("csv", "json"):
        raise ConfigurationError(f"Unsupported output format '{file_format}'. Supported: csv, json")
    to_stdout = path is None or path == "-"
    if file_format == "csv":
        text = table.to_csv(index=False, float_format="%.9g", na_rep="", lineterminator="\n")
    else:
        text = json.dumps(table_records(table), indent=2) + "\n"

    if to_stdout:
        sys.stdout.write(text)
    else:
        try:
            with open(path, "w", encoding="utf-8", newline="") as file:
                file.write(text)
        except OSError as e:
            raise ConfigurationError(f"Cannot write {path}: {e.strerror or e}")
        logger.info("Wrote %d rows to %s", len(table), path)
