import json
import logging
import math
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from larmor_errors import ParseError
from measurement_reducer import MeasurementRow
from physical_units import MICROMETER, NANOKELVIN, Scales, energy_from_temperature, to_dimensionless
from spinor_scattering import PotentialProfile, tabulated_profile

logger = logging.getLogger(__name__)

# Input column -> MeasurementRow field
MEASUREMENT_COLUMNS = {
    'e_over_v0': 'e_over_v0',
    'tau_y_ms': 'tau_y',
    'tau_y_err_ms': 'sigma_y',
    'tau_z_ms': 'tau_z',
    'tau_z_err_ms': 'sigma_z',
}
OPTIONAL_COLUMNS = {'cov_yz_ms2': 'cov_yz'}
PROFILE_COLUMNS = ('y_um', 'v_nK')


def _data_line_numbers(file_path: str) -> List[int]:
    """1-based line numbers of the header and every data row (comments and blanks skipped)."""
    numbers = []
    with open(file_path, 'r', encoding='utf-8') as file:
        for number, line in enumerate(file, start=1):
            stripped = line.strip()
            if stripped and not stripped.startswith('#'):
                numbers.append(number)
    return numbers


def _read_csv_strict(file_path: str, required, optional=()) -> Tuple[pd.DataFrame, List[int]]:
    """Read a CSV as strings and check its header against the schema."""
    try:
        frame = pd.read_csv(file_path, comment='#', dtype=str, skip_blank_lines=True,
                            skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise ParseError(f"{file_path} is empty", line=1)
    except pd.errors.ParserError as e:
        raise ParseError(f"Malformed CSV: {e}")
    except OSError as e:
        raise ParseError(f"Cannot read {file_path}: {e.strerror or e}")
    lines = _data_line_numbers(file_path)
    header_line = lines[0] if lines else 1
    frame.columns = [str(c).strip() for c in frame.columns]

    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise ParseError(f"Missing column(s): {', '.join(missing)}", line=header_line)
    unknown = [c for c in frame.columns if c not in required and c not in optional]
    if unknown:
        raise ParseError(f"Unexpected column(s): {', '.join(unknown)}", line=header_line)
    return frame, lines[1:]


def _numeric_cell(raw, column: str, line: Optional[int], default: Optional[float] = None) -> float:
    if raw is None or (isinstance(raw, float) and math.isnan(raw)) or str(raw).strip() == '':
        if default is not None:
            return default
        raise ParseError(f"Empty cell in column '{column}'", line=line)
    try:
        value = float(str(raw).strip())
    except ValueError:
        raise ParseError(f"Non-numeric value {raw!r} in column '{column}'", line=line)
    if not math.isfinite(value):
        raise ParseError(f"Non-finite value {raw!r} in column '{column}'", line=line)
    return value


def _build_row(record: Dict, line: Optional[int]) -> MeasurementRow:
    values = {}
    for column, field_name in MEASUREMENT_COLUMNS.items():
        values[field_name] = _numeric_cell(record.get(column), column, line)
    for column, field_name in OPTIONAL_COLUMNS.items():
        values[field_name] = _numeric_cell(record.get(column), column, line, default=0.0)

    if values['sigma_y'] < 0 or values['sigma_z'] < 0:
        raise ParseError("Negative standard error", line=line)
    bound = values['sigma_y'] * values['sigma_z']
    if abs(values['cov_yz']) > bound * (1.0 + 1e-9):
        raise ParseError(
            f"|cov_yz| = {abs(values['cov_yz']):.6g} exceeds sigma_y * sigma_z = {bound:.6g}",
            line=line,
        )
    if values['tau_y'] <= 0:
        logger.warning("line %s: tau_y = %g <= 0; row will be flagged", line, values['tau_y'])
    return MeasurementRow(line=line, **values)


class MeasurementParser:
    """Parses measured precession times (CSV or JSON) into MeasurementRow objects."""

    def __init__(self):
        self.supported_types = {
            'csv': self._parse_csv,
            'json': self._parse_json,
        }

    def parse_file(self, file_path: str, file_format: Optional[str] = None) -> List[MeasurementRow]:
        """
        Parse a measurement table.

        Args:
            file_path: Path to the file to parse
            file_format: 'csv' or 'json'; inferred from the extension when omitted

        Returns:
            One MeasurementRow per data row, in file order

        Raises:
            ParseError: On a missing column, non-numeric cell or negative error
        """
        if file_format is None:
            return self._parse_by_extension(file_path)
        if file_format not in self.supported_types:
            raise ParseError(f"Unsupported format '{file_format}'. Supported: CSV, JSON")
        return self.supported_types[file_format](file_path)

    def _parse_csv(self, file_path: str) -> List[MeasurementRow]:
        frame, lines = _read_csv_strict(file_path, MEASUREMENT_COLUMNS, OPTIONAL_COLUMNS)
        rows = [
            _build_row(record, lines[i] if i < len(lines) else None)
            for i, record in enumerate(frame.to_dict(orient='records'))
        ]
        logger.info("Parsed %d measurement rows from %s", len(rows), file_path)
        return rows

    def _parse_json(self, file_path: str) -> List[MeasurementRow]:
        try:
            with open(file_path, 'r', encoding='utf-8') as file:
                records = json.load(file)
        except json.JSONDecodeError as e:
            raise ParseError(f"Invalid JSON: {e.msg}", line=e.lineno)
        except OSError as e:
            raise ParseError(f"Cannot read {file_path}: {e.strerror or e}")
        if not isinstance(records, list):
            raise ParseError("JSON measurements must be an array of objects")

        rows = []
        for index, record in enumerate(records, start=1):
            if not isinstance(record, dict):
                raise ParseError(f"record {index}: expected an object")
            missing = [c for c in MEASUREMENT_COLUMNS if c not in record]
            if missing:
                raise ParseError(f"record {index}: missing key(s) {', '.join(missing)}")
            try:
                rows.append(_build_row(record, None))
            except ParseError as e:
                raise ParseError(f"record {index}: {e}")
        logger.info("Parsed %d measurement rows from %s", len(rows), file_path)
        return rows

    def _parse_by_extension(self, file_path: str) -> List[MeasurementRow]:
        """Determine parsing method by file extension."""
        if not self.is_supported_file(file_path):
            raise ParseError("Unsupported file type. Supported formats: CSV, JSON")
        extension = file_path.lower().rsplit('.', 1)[-1]
        return self.supported_types[extension](file_path)

    def is_supported_file(self, filename: str) -> bool:
        return filename.lower().endswith(('.csv', '.json'))


def parse_measurements(path: str, file_format: Optional[str] = None) -> List[MeasurementRow]:
    return MeasurementParser().parse_file(path, file_format)


def parse_profile(path: str, scales: Scales,
                  field_region_um: Optional[tuple] = None) -> PotentialProfile:
    """
    Read a tabulated barrier (columns y_um, v_nK) into a natural-unit profile.

    Args:
        path: CSV file
        scales: Natural-unit scales (length and energy)
        field_region_um: Magnetized interval in micrometres; defaults to the whole table

    Returns:
        PotentialProfile of kind TABULATED
    """
    frame, lines = _read_csv_strict(path, PROFILE_COLUMNS)
    y, v = [], []
    for i, record in enumerate(frame.to_dict(orient='records')):
        line = lines[i] if i < len(lines) else None
        y.append(_numeric_cell(record['y_um'], 'y_um', line))
        v.append(_numeric_cell(record['v_nK'], 'v_nK', line))
        if len(y) > 1 and y[-1] <= y[-2]:
            raise ParseError("y_um must be strictly increasing", line=line)
    if len(y) < 2:
        raise ParseError("A tabulated profile needs at least two rows")

    y_nat = np.array([to_dimensionless(val * MICROMETER, 'length', scales) for val in y])
    v_nat = np.array([
        np.sign(val) * to_dimensionless(energy_from_temperature(abs(val) * NANOKELVIN, scales.units),
                                        'energy', scales)
        for val in v
    ])
    field_region = None
    if field_region_um is not None:
        field_region = tuple(to_dimensionless(val * MICROMETER, 'length', scales)
                             for val in field_region_um)
    return tabulated_profile(y_nat, v_nat, field_region=field_region,
                             mass=1.0, hbar=1.0)
