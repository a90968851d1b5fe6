"""
Command-line entry point for the Larmor clock toolkit.

Subcommands: analytic, sweep, reduce, limits, version. Tables go to stdout
(or --out); status lines and logs go to stderr.
"""

import argparse
import json
import logging
import os
import sys
from typing import Any, Dict, List, Optional

import pandas as pd

from barrier_analyzer import LimitRegime, RectangularBarrier, larmor_times_rect, summarize_point, table1_regime
from file_parsers import parse_measurements
from larmor_config import get_settings
from larmor_errors import DomainError, LarmorClockError
from measurement_reducer import monte_carlo_sigma, reduce_measurements, reduction_frame
from physical_units import (
    CONSTANTS_VERSION,
    MICROMETER,
    MILLISECOND,
    NANOKELVIN,
    Scales,
    energy_from_temperature,
    get_particle,
    to_dimensionless,
    to_physical,
)
from sweep_runner import AXES, BARRIERS, ENGINES, WIDTH_CONVENTIONS, SweepSpec, emit, growth_exponent, sweep, table_records
from tunneling_times import AttTriple, att_triple, fano, moments_weak_field, traversal_speeds

__version__ = "0.1.0"

DEFAULT_MEASUREMENTS = "synthetic_precession_times.csv"

logger = logging.getLogger(__name__)


def status(message: str):
    """Print a user-facing status line to stderr."""
    print(message, file=sys.stderr)


def _lab_scales(args) -> Scales:
    v0 = energy_from_temperature(args.v0_nK * NANOKELVIN)
    return Scales.from_energy(v0, get_particle(args.particle))


def _time_out(value: float, scales: Scales, natural: bool) -> float:
    if natural or value is None:
        return value
    return to_physical(value, "time", scales) / MILLISECOND


def show_analytic_point(args) -> int:
    """Every analytic quantity of a rectangular barrier at one energy."""
    settings = get_settings()
    scales = _lab_scales(args)
    energy = args.e_over_v0
    if args.opacity is not None:
        barrier = RectangularBarrier.from_opacity(1.0, energy, args.opacity)
    else:
        barrier = RectangularBarrier(v0=1.0, length=to_dimensionless(args.width_um * MICROMETER, "length", scales))

    summary = summarize_point(barrier, energy)
    times = larmor_times_rect(barrier, energy)
    triple = att_triple(times)
    moments = moments_weak_field(times, settings.feebleness_ratio * energy)
    try:
        fano_x = fano(moments.var_x, moments.sx, "x").value
        fano_y = fano(moments.var_y, moments.sy, "y").value
    except DomainError:
        fano_x = fano_y = None

    natural = args.natural_units
    suffix = "" if natural else "_ms"
    width_out = barrier.length if natural else to_physical(barrier.length, "length", scales) / MICROMETER
    triple_out = AttTriple(**{k: _time_out(v, scales, natural) for k, v in triple.as_dict().items()})
    speeds = traversal_speeds(width_out, triple_out)

    result: Dict[str, Any] = {
        'e_over_v0': energy,
        'width' if natural else 'width_um': width_out,
        'opacity': summary['opacity'],
        'branch': summary['branch'],
        'transmission': summary['transmission'],
    }
    for name in ('tau_y', 'tau_z', 'tau_c', 'tau_c_free'):
        result[name + suffix] = _time_out(summary[name], scales, natural)
    for name, value in triple_out.as_dict().items():
        result[name + suffix] = value
    result['fano_x'] = fano_x
    result['fano_y'] = fano_y
    speed_suffix = "" if natural else "_mm_s"
    for name, value in speeds.items():
        result[f"speed_{name}{speed_suffix}"] = value

    if args.format == "json":
        print(json.dumps(table_records(pd.DataFrame([result]))[0], indent=2))
    else:
        for key, value in result.items():
            print(f"{key} = {value:.9g}" if isinstance(value, float) else f"{key} = {value}")
    return 0


def run_sweep(args) -> int:
    settings = get_settings()
    spec = SweepSpec(
        barrier=args.barrier,
        v0_nK=args.v0_nK,
        width_um=args.width_um,
        width_convention=args.width_convention,
        particle=args.particle,
        axis=args.axis,
        start=args.start,
        stop=args.stop,
        points=args.points,
        engine=args.engine,
        natural_units=args.natural_units,
        energy_ratio=args.energy_ratio,
        segments=args.segments or settings.grid_segments,
        support_multiplier=settings.support_multiplier,
        feebleness_ratio=settings.feebleness_ratio,
        richardson_levels=settings.richardson_levels,
    )
    table = sweep(spec, workers=args.workers or settings.workers)
    emit(table, args.out, args.format)
    if args.out:
        status(f"✅ Wrote {len(table)} rows to {args.out}")

    if args.fit_exponent:
        column = args.fit_exponent + ("" if spec.natural_units else "_ms")
        if column not in table.columns:
            raise DomainError(f"No column '{column}' to fit")
        exponent = growth_exponent(table[spec.axis_column], table[column])
        status(f"📈 Growth exponent of {column} vs {spec.axis_column}: {exponent:.4f}")
    return 0


def run_reduce(args) -> int:
    settings = get_settings()
    source = args.input or os.path.join(settings.data_dir, DEFAULT_MEASUREMENTS)
    rows = parse_measurements(source, args.input_format)
    reduced = reduce_measurements(rows)
    if args.monte_carlo is not None:
        samples = args.monte_carlo or settings.mc_samples
        for row, att in zip(rows, reduced):
            if row.tau_y > 0:
                att.sigma_f_mc = monte_carlo_sigma(row, samples, args.seed)
    table = reduction_frame(reduced)
    emit(table, args.out, args.format)

    flagged = [att for att in reduced if att.flags]
    if flagged:
        status(f"⚠️ {len(flagged)} of {len(reduced)} rows flagged")
    if args.out:
        status(f"✅ Wrote {len(table)} rows to {args.out}")
    return 0


def show_limits(args) -> int:
    """The asymptotic-regime values of the five times for one barrier."""
    scales = _lab_scales(args)
    barrier = RectangularBarrier(v0=1.0, length=to_dimensionless(args.width_um * MICROMETER, "length", scales))
    hbar_eff = 1.0 / args.hbar_scale if args.hbar_scale else None
    limits = table1_regime(LimitRegime(args.regime), barrier, args.e_over_v0, hbar_eff=hbar_eff)

    suffix = "" if args.natural_units else "_ms"
    record = {'regime': args.regime}
    for name, value in limits._asdict().items():
        record[name + suffix] = _time_out(value, scales, args.natural_units)
    emit(pd.DataFrame([record]), args.out, args.format)
    return 0


def show_version(args) -> int:
    print(f"larmor-clock {__version__}")
    print(f"constants: {CONSTANTS_VERSION}")
    return 0


def _add_lab_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("--v0-nK", dest="v0_nK", type=float, default=135.0, help="Barrier height in nK")
    parser.add_argument("--width-um", dest="width_um", type=float, default=1.3, help="Barrier width in um")
    parser.add_argument("--particle", default="rb87")
    parser.add_argument("--natural-units", action="store_true", help="Report times in hbar/V0")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="larmor-clock", description="Larmor clock tunneling times")
    sub = parser.add_subparsers(dest="command", required=True)

    analytic = sub.add_parser("analytic", help="All analytic quantities at one energy")
    _add_lab_arguments(analytic)
    analytic.add_argument("--e-over-v0", dest="e_over_v0", type=float, default=0.5)
    analytic.add_argument("--opacity", type=float, default=None,
                          help="Set the width from the opacity at this energy instead of --width-um")
    analytic.add_argument("--format", choices=("text", "json"), default="text")
    analytic.set_defaults(handler=show_analytic_point)

    sweep_cmd = sub.add_parser("sweep", help="Sweep over E/V0 or L/L0")
    _add_lab_arguments(sweep_cmd)
    sweep_cmd.add_argument("--barrier", choices=BARRIERS, default="rect")
    sweep_cmd.add_argument("--width-convention", dest="width_convention",
                           choices=sorted(WIDTH_CONVENTIONS), default="sigma")
    sweep_cmd.add_argument("--axis", choices=sorted(AXES), default="e")
    sweep_cmd.add_argument("--from", dest="start", type=float, default=0.05)
    sweep_cmd.add_argument("--to", dest="stop", type=float, default=2.0)
    sweep_cmd.add_argument("--points", type=int, default=40)
    sweep_cmd.add_argument("--engine", choices=ENGINES, default="analytic")
    sweep_cmd.add_argument("--energy-ratio", dest="energy_ratio", type=float, default=0.5,
                           help="E/V0 held fixed on the L axis")
    sweep_cmd.add_argument("--segments", type=int, default=None, help="Gaussian grid size")
    sweep_cmd.add_argument("--workers", type=int, default=None)
    sweep_cmd.add_argument("--fit-exponent", dest="fit_exponent", default=None,
                           choices=("tau_y", "tau_z", "att_b", "att_s", "att_f"),
                           help="Report the log-log slope of this column against the axis")
    sweep_cmd.add_argument("--out", default=None)
    sweep_cmd.add_argument("--format", choices=("csv", "json"), default="csv")
    sweep_cmd.set_defaults(handler=run_sweep)

    reduce_cmd = sub.add_parser("reduce", help="Reduce measured tau_y, tau_z to ATT rows")
    reduce_cmd.add_argument("--input", default=None,
                            help=f"Measurement table; defaults to {DEFAULT_MEASUREMENTS} in LARMOR_DATA_DIR")
    reduce_cmd.add_argument("--input-format", dest="input_format", choices=("csv", "json"), default=None)
    reduce_cmd.add_argument("--out", default=None)
    reduce_cmd.add_argument("--format", choices=("csv", "json"), default="csv")
    reduce_cmd.add_argument("--monte-carlo", dest="monte_carlo", type=int, nargs="?", const=0,
                            default=None, metavar="N",
                            help="Add a Monte-Carlo sigma_F column (N samples per row, default LARMOR_MC_SAMPLES)")
    reduce_cmd.add_argument("--seed", type=int, default=None)
    reduce_cmd.set_defaults(handler=run_reduce)

    limits = sub.add_parser("limits", help="Asymptotic regime values")
    _add_lab_arguments(limits)
    limits.add_argument("--regime", choices=[r.value for r in LimitRegime], required=True)
    limits.add_argument("--e-over-v0", dest="e_over_v0", type=float, default=0.5)
    limits.add_argument("--hbar-scale", dest="hbar_scale", type=float, default=None,
                        help="Divide hbar by this factor (classical regime)")
    limits.add_argument("--out", default=None)
    limits.add_argument("--format", choices=("csv", "json"), default="csv")
    limits.set_defaults(handler=show_limits)

    version = sub.add_parser("version", help="Package and constants version")
    version.set_defaults(handler=show_version)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = get_settings()
        logging.basicConfig(
            level=settings.log_level,
            format="%(asctime)s %(levelname)s %(name)s: %(message)s",
            stream=sys.stderr,
        )
        return args.handler(args)
    except LarmorClockError as e:
        logger.debug("Command failed", exc_info=True)
        status(f"❌ {type(e).__name__}: {e}")
        return e.exit_code


if __name__ == "__main__":
    raise SystemExit(main())
