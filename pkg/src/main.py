"""
main.py - Command line entry point for the anomalous-reflector link simulator.

Reproduces the measurement campaign of a 26 GHz anomalous reflector:
- Angular sweep of the Rx on a 7 m arc (55 to 85 deg)
- Frequency sweep from 24.5 to 27.5 GHz
- LoS reference and power-difference correction tables
- Correction of existing result files
- Full report with a rendered scene view

Usage:
    python main.py sweep-angle     [--config FILE] [--panel {48,96}] [--max-order {0,3}] [--coherent] [--out DIR]
    python main.py sweep-frequency [--config FILE] [--panel {48,96}] [--max-order {0,3}] [--coherent] [--out DIR]
    python main.py los-ref         [--config FILE] --measurements FILE [--out DIR]
    python main.py correct         [--config FILE] --results FILE [--corrections FILE] [--out DIR]
    python main.py report          [--config FILE] [--panel {48,96}] [--max-order {0,3}] [--out DIR]

Environment:
    ARS_TRACE_THREADS  - Cap on worker threads for sweeps
    ARS_LOG_LEVEL      - Logging level (DEBUG, INFO, WARNING, ...)

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical failure.
"""

import argparse
import logging
import os
import sys

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from constants import (
    DEFAULT_LOG_LEVEL, LOG_FORMAT, LOG_LEVEL_ENV, EXIT_OK, EXIT_DATA,
    EXIT_NUMERICAL, CORRECTED_SUFFIX,
)
from errors import ARSimError

logger = logging.getLogger("main")

VERBS = ("sweep-angle", "sweep-frequency", "los-ref", "correct", "report")


def print_banner():
    """Print startup banner."""
    banner = r"""
    ╔══════════════════════════════════════════════════════════════════╗
    ║                                                                  ║
    ║      ▄▀█ █▀█   █░░ █ █▄░█ █▄▀   █▀ █ █▀▄▀█                        ║
    ║      █▀█ █▀▄   █▄▄ █ █░▀█ █░█   ▄█ █ █░▀░█                        ║
    ║                                                                  ║
    ║         Anomalous Reflector Link Simulator                       ║
    ║                                                                  ║
    ╚══════════════════════════════════════════════════════════════════╝
    """
    print(banner)


def setup_logging():
    level = os.environ.get(LOG_LEVEL_ENV, DEFAULT_LOG_LEVEL).upper()
    logging.basicConfig(level=getattr(logging, level, logging.INFO), format=LOG_FORMAT)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="arsim", description="Anomalous-reflector assisted link simulator",
    )
    parser.add_argument("verb", choices=VERBS)
    parser.add_argument("--config", help="Run configuration (JSON)")
    parser.add_argument("--panel", type=int, choices=[48, 96], help="Panel size override")
    parser.add_argument("--max-order", type=int, choices=[0, 3], help="Reflection order override")
    parser.add_argument("--coherent", action="store_true", default=None,
                        help="Sum multipath amplitudes coherently")
    parser.add_argument("--out", default="results", help="Output directory")
    parser.add_argument("--measurements", help="Measurement records (los-ref)")
    parser.add_argument("--results", help="Result CSV to correct (correct)")
    parser.add_argument("--corrections", help="Correction table override")
    parser.add_argument("--quiet", action="store_true", help="Skip the banner")
    return parser


def load_config(args):
    from fileio import RunConfig, parse_config

    config = parse_config(args.config) if args.config else RunConfig()
    overrides = {
        "panel": args.panel,
        "max_order": args.max_order,
        "coherent": args.coherent,
    }
    if args.corrections:
        overrides["corrections"] = os.path.abspath(args.corrections)
    return config.updated(**overrides)


# ============================================================================
# VERBS
# ============================================================================

def cmd_sweep_angle(config, args):
    from experiments import run_angular_sweep, emit_report

    results = run_angular_sweep(config)
    return emit_report(results, args.out, "angular_sweep", axis="angle")


def cmd_sweep_frequency(config, args):
    from experiments import run_frequency_sweep, emit_report

    results = run_frequency_sweep(config)
    return emit_report(results, args.out, "frequency_sweep", axis="frequency")


def cmd_los_ref(config, args):
    from errors import ConfigError
    from experiments import run_los_reference
    from fileio import parse_measurements, write_correction_table, write_results_csv

    if not args.measurements:
        raise ConfigError("los-ref needs --measurements")
    reference = run_los_reference(config, parse_measurements(args.measurements))
    os.makedirs(args.out, exist_ok=True)
    theory_path = os.path.join(args.out, "los_reference.csv")
    table_path = os.path.join(args.out, "corrections.csv")
    write_results_csv([(f, a, "los", p) for f, a, p in reference.theory], theory_path)
    write_correction_table(reference.table, table_path)
    return [theory_path, table_path]


def cmd_correct(config, args):
    from errors import ConfigError
    from experiments import apply_corrections, results_from_rows, result_rows
    from fileio import read_correction_table, read_results_csv, write_results_csv

    if not args.results:
        raise ConfigError("correct needs --results")
    if config.corrections is None:
        raise ConfigError("correct needs a correction table (--corrections or config)")
    table = read_correction_table(config.resolve("corrections"))
    rows = [r for r in read_results_csv(args.results) if not r[2].endswith(CORRECTED_SUFFIX)]
    corrected = apply_corrections(results_from_rows(rows), table)
    os.makedirs(args.out, exist_ok=True)
    stem = os.path.splitext(os.path.basename(args.results))[0]
    out_path = os.path.join(args.out, f"{stem}_corrected.csv")
    write_results_csv(result_rows(corrected), out_path)
    return [out_path]


def cmd_report(config, args):
    from constants import DESIGN_ANGLE_DEG, DESIGN_FREQUENCY_HZ, GHZ
    from experiments import (
        Experiment, run_angular_sweep, run_frequency_sweep, steered_band, emit_report,
    )
    from raytracer import reflect_paths
    from renderer import render_scene

    written = emit_report(run_angular_sweep(config), args.out, "angular_sweep", axis="angle")
    written += emit_report(run_frequency_sweep(config), args.out, "frequency_sweep", axis="frequency")

    band = steered_band(config)
    edge = " (reaches the sweep edge)" if band.open_low or band.open_high else ""
    print(f"[i] Steered band: {band.low_ghz:.2f} - {band.high_ghz:.2f} GHz "
          f"({band.width_ghz:.2f} GHz){edge}")

    experiment = Experiment(config)
    rx = experiment.rx_position(DESIGN_ANGLE_DEG)
    paths = reflect_paths(experiment.scene, experiment.tx_position, experiment.ar_position,
                          config.max_order, DESIGN_FREQUENCY_HZ)
    paths += reflect_paths(experiment.scene, experiment.ar_position, rx,
                           config.max_order, DESIGN_FREQUENCY_HZ)
    image = os.path.join(args.out, "scene.png")
    render_scene(
        experiment.scene, image,
        markers=[
            (experiment.tx_position, "tx", "Tx"),
            (experiment.ar_position, "ar", "AR"),
            (rx, "rx", f"Rx {DESIGN_ANGLE_DEG:g} deg"),
        ],
        paths=paths,
    )
    logger.info("rendered %d paths at %.1f GHz", len(paths), DESIGN_FREQUENCY_HZ / GHZ)
    return written + [image]


COMMANDS = {
    "sweep-angle": cmd_sweep_angle,
    "sweep-frequency": cmd_sweep_frequency,
    "los-ref": cmd_los_ref,
    "correct": cmd_correct,
    "report": cmd_report,
}


def main(argv=None):
    """Main entry point; returns the process exit code."""
    args = build_parser().parse_args(argv)
    setup_logging()

    if not args.quiet:
        print_banner()
    print(f"\n[i] Verb: {args.verb}")
    print(f"[i] Python: {sys.version.split()[0]}")

    try:
        config = load_config(args)
        print(f"[i] Panel: {config.panel}x{config.panel}  max order: {config.max_order}  "
              f"{'coherent' if config.coherent else 'incoherent'}")
        written = COMMANDS[args.verb](config, args)
    except ARSimError as e:
        print(f"[!] {type(e).__name__}: {e}")
        return e.exit_code
    except OSError as e:
        print(f"[!] I/O error: {e}")
        return EXIT_DATA
    except (FloatingPointError, OverflowError, ZeroDivisionError) as e:
        print(f"[!] Numerical failure: {e}")
        return EXIT_NUMERICAL

    for path in written:
        print(f"[✓] {path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
