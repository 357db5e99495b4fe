"""
experiments.py - Experiment runners reproducing the measurement campaign.

Features:
- Angular sweep over Rx positions on the receive arc
- Frequency sweep at fixed Rx angles
- LoS reference runs and correction-table construction
- Corrections applied to result sets
- Steered-band estimate when the Rx tracks the beam
- CSV and gnuplot-ready report emission

Sweep points are evaluated concurrently and returned in config order.
"""

import logging
import math
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from constants import (
    GHZ, BASE_PANEL, EXTRA_ANGLE_96_DEG, TRACE_THREADS_ENV, DESIGN_ORDER,
    STEERED_BAND_DROP_DB, CORRECTED_SUFFIX, FLOAT_FORMAT, PANEL_EFFICIENCY,
)
from errors import ConfigError, DataError, CorrectionLookupError
from antenna import AntennaNode, ARNode, HornPattern
from fileio import (
    read_link_params, read_correction_table, read_pattern, write_results_csv,
)
from linkbudget import (
    BistaticGeometry, CorrectionTable, bistatic_sigma_ideal, received_power_method1,
    received_power_method2, chain_terminal, los_reference, power_difference,
    apply_correction, evm_estimate,
)
from pattern import make_panel, tile_panel, reflector_patterns, grating_angles
from raytracer import simulate_ar_link
from scene import load_scene
from units import linear_to_db

logger = logging.getLogger(__name__)


def trace_threads():
    """Worker count, capped by ARS_TRACE_THREADS when set."""
    default = min(8, os.cpu_count() or 1)
    raw = os.environ.get(TRACE_THREADS_ENV)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{TRACE_THREADS_ENV} must be an integer, got {raw!r}") from None
    if value < 1:
        raise ConfigError(f"{TRACE_THREADS_ENV} must be >= 1, got {value}")
    return value


@dataclass
class ExperimentResult:
    """Received power per method (dBm) at one (frequency, angle)."""

    freq_ghz: float
    angle_deg: float
    powers: dict = field(default_factory=dict)
    evm: object = None

    @property
    def methods(self):
        return list(self.powers)

    def rows(self):
        for method, p_dbm in self.powers.items():
            yield (self.freq_ghz, self.angle_deg, method, p_dbm)


@dataclass
class LosReference:
    """LoS theory per (frequency, angle) and the correction table it yields."""

    theory: list
    table: CorrectionTable = None


@dataclass
class SteeredBand:
    frequencies_ghz: list
    angles_deg: list
    gains_db: list
    low_ghz: float
    high_ghz: float
    open_low: bool = False
    open_high: bool = False

    @property
    def width_ghz(self):
        return self.high_ghz - self.low_ghz


class Experiment:
    """
    Shared state of one configured campaign: scene, panel, nodes, tables.

    Args:
        config: RunConfig
    """

    def __init__(self, config):
        self.config = config
        self.scene = load_scene(config.resolve("scene"))
        base = make_panel(BASE_PANEL)
        self.panel = base if config.panel == BASE_PANEL else tile_panel(base, 2, 2)
        self.element = config.element
        if config.element_pattern is not None:
            self.element = read_pattern(
                config.resolve("element_pattern"), base.supercell.design_frequency, "raw",
            )
        self.table = None
        if config.corrections is not None:
            self.table = read_correction_table(config.resolve("corrections"))

        self.ar_position = self.scene.anchor("ar")
        self.ar_normal = self.scene.anchor("ar", "normal")
        self.ar_gradient = self.scene.anchor("ar", "gradient_axis")
        self.tx_position = self.scene.anchor("tx")
        arc = self.scene.anchors.get("rx_arc", {})
        self.rx_radius = float(arc.get("radius", 0.0))
        self.rx_height = float(arc.get("height", self.ar_position[2]))
        if self.rx_radius <= 0:
            raise DataError("scene anchors must define rx_arc.radius > 0")
        self._base_params = read_link_params(
            config.resolve("link_params"), base.supercell.design_frequency,
        )
        self._imported = {}
        self._lock = threading.Lock()

    # ------------------------------------------------------------------
    # Geometry and nodes
    # ------------------------------------------------------------------

    def rx_position(self, angle_deg):
        a = math.radians(angle_deg)
        n = self.ar_normal / np.linalg.norm(self.ar_normal)
        g = self.ar_gradient / np.linalg.norm(self.ar_gradient)
        pos = self.ar_position + self.rx_radius * (math.cos(a) * n + math.sin(a) * g)
        pos[2] = self.rx_height
        return pos

    def link_params(self, f_hz, angle_deg):
        return self._base_params.with_(
            f_hz=f_hz,
            r1_m=float(np.linalg.norm(self.tx_position - self.ar_position)),
            r2_m=float(np.linalg.norm(self.rx_position(angle_deg) - self.ar_position)),
        )

    def patterns(self, f_hz):
        """(rx_pattern, tx_pattern) at f_hz, synthesized or imported."""
        cfg = self.config
        if cfg.rx_pattern is None:
            return reflector_patterns(self.panel, float(f_hz), self.element)
        ghz = f"{f_hz / GHZ:g}"
        rx_path = cfg.resolve("rx_pattern").replace("{ghz}", ghz)
        tx_path = cfg.resolve("tx_pattern").replace("{ghz}", ghz)
        with self._lock:
            if ghz not in self._imported:
                if "{ghz}" not in cfg.rx_pattern:
                    logger.warning("imported reflector patterns are used unchanged at %s GHz", ghz)
                self._imported[ghz] = (read_pattern(rx_path, f_hz), read_pattern(tx_path, f_hz))
            return self._imported[ghz]

    def ar_node(self, f_hz):
        rx_pattern, tx_pattern = self.patterns(f_hz)
        return ARNode(
            self.ar_position, self.ar_normal, self.ar_gradient,
            rx_pattern, tx_pattern, PANEL_EFFICIENCY,
        )

    def tx_node(self):
        return AntennaNode.facing(
            self.tx_position, self.ar_position,
            pattern=HornPattern(peak_dbi=self._base_params.g_t_db), name="Tx",
        )

    def rx_node(self, angle_deg):
        return AntennaNode.facing(
            self.rx_position(angle_deg), self.ar_position,
            pattern=HornPattern(peak_dbi=self._base_params.g_r_db), name="Rx",
        )

    def orders(self):
        return [0] if self.config.max_order == 0 else [0, self.config.max_order]

    # ------------------------------------------------------------------
    # Evaluation
    # ------------------------------------------------------------------

    def evaluate(self, f_ghz, angle_deg):
        """All configured methods at one (frequency, Rx angle)."""
        f_hz = f_ghz * GHZ
        params = self.link_params(f_hz, angle_deg)
        ar = self.ar_node(f_hz)
        tx = self.tx_node()
        rx = self.rx_node(angle_deg)

        theta_i = ar.observation_angle(self.tx_position)
        sigma = bistatic_sigma_ideal(BistaticGeometry(theta_i, angle_deg, self.panel.area), f_hz)
        powers = {"method1": chain_terminal(received_power_method1(params, sigma), params)}

        g_rx = linear_to_db(ar.receive_gain(self.tx_position - self.ar_position))
        g_tx = linear_to_db(ar.transmit_gain(rx.position - self.ar_position))
        powers["method2"] = chain_terminal(received_power_method2(params, g_rx, g_tx), params)

        for order in self.orders():
            powers[f"raytrace{order}"] = simulate_ar_link(
                self.scene, tx, ar, rx, f_hz, order, params, self.config.coherent,
            )
        result = ExperimentResult(f_ghz, angle_deg, powers)
        if self.table is not None:
            result = apply_corrections([result], self.table)[0]
        result.evm = self.estimate_evm(result)
        return result

    def estimate_evm(self, result):
        waveform = self.config.waveform_kind
        if not self.config.evm or waveform.modulation is None:
            return None
        method = f"raytrace{self.orders()[-1]}"
        p_dbm = result.powers.get(method + CORRECTED_SUFFIX, result.powers[method])
        return evm_estimate(p_dbm, waveform.bandwidth_hz, self.config.noise_figure_db, waveform.modulation)

    def run(self, frequencies_ghz, angles_deg):
        points = [(float(f), float(a)) for f in frequencies_ghz for a in angles_deg]
        workers = trace_threads()
        logger.info(
            "evaluating %d points (%dx%d panel, max order %d) on %d thread(s)",
            len(points), self.panel.nx, self.panel.ny, self.config.max_order, workers,
        )
        with ThreadPoolExecutor(max_workers=workers) as pool:
            # Patterns first, so each frequency is synthesized once.
            list(pool.map(self.patterns, sorted({f * GHZ for f, _ in points})))
            return list(pool.map(lambda p: self.evaluate(*p), points))


# ============================================================================
# RUNNERS
# ============================================================================

def run_angular_sweep(config):
    """Every carrier frequency at every configured Rx angle on the arc."""
    experiment = Experiment(config)
    return experiment.run(config.frequencies_ghz, config.angles_deg)


def frequency_sweep_angles(config):
    angles = [float(a) for a in config.sweep_angles_deg]
    if config.panel != BASE_PANEL and EXTRA_ANGLE_96_DEG not in angles:
        angles = sorted(angles + [EXTRA_ANGLE_96_DEG])
    return angles


def run_frequency_sweep(config):
    """Every sweep frequency at the fixed Rx angles (62.5 deg added for 96x96)."""
    experiment = Experiment(config)
    return experiment.run(config.sweep_frequencies_ghz, frequency_sweep_angles(config))


def run_los_reference(config, measurements=None):
    """
    Friis LoS reference over the true Tx-Rx chord for each Rx position.

    With measurements, P_diff = P_theory - P_m is collected into a
    CorrectionTable (only records of the configured waveform are used).
    """
    experiment = Experiment(config)
    if measurements is None:
        points = [(float(f), float(a)) for f in config.frequencies_ghz for a in config.angles_deg]
        measured = {}
    else:
        waveform = config.waveform_kind
        chosen = [m for m in measurements if m.waveform == waveform]
        if not chosen:
            raise DataError(f"no measurements for waveform {waveform.value}")
        points = [(m.freq_ghz, m.angle_deg) for m in chosen]
        measured = {(m.freq_ghz, m.angle_deg): m.p_m_dbm for m in chosen}

    theory = []
    table = CorrectionTable() if measurements is not None else None
    for f_ghz, angle in points:
        r3 = float(np.linalg.norm(experiment.tx_position - experiment.rx_position(angle)))
        params = experiment.link_params(f_ghz * GHZ, angle)
        p_theory = los_reference(params, r3)
        theory.append((f_ghz, angle, p_theory))
        if table is not None:
            table.set(f_ghz, angle, power_difference(p_theory, measured[(f_ghz, angle)]))
    return LosReference(theory, table)


def apply_corrections(results, table):
    """Add <method>_corrected entries wherever the table has the point."""
    corrected = []
    for result in results:
        powers = {m: p for m, p in result.powers.items() if not m.endswith(CORRECTED_SUFFIX)}
        extra = {}
        for method, p_dbm in powers.items():
            try:
                extra[method + CORRECTED_SUFFIX] = apply_correction(
                    p_dbm, table, result.freq_ghz * GHZ, result.angle_deg,
                )
            except CorrectionLookupError:
                logger.warning(
                    "no correction for %.2f GHz at %.1f deg; left uncorrected",
                    result.freq_ghz, result.angle_deg,
                )
                break
        corrected.append(ExperimentResult(
            result.freq_ghz, result.angle_deg, {**powers, **extra}, result.evm,
        ))
    return corrected


def results_from_rows(rows):
    """Group (freq, angle, method, p) rows back into results, keeping order."""
    grouped = {}
    for f_ghz, angle, method, p_dbm in rows:
        key = (f_ghz, angle)
        if key not in grouped:
            grouped[key] = ExperimentResult(f_ghz, angle)
        grouped[key].powers[method] = p_dbm
    return list(grouped.values())


def steered_band(config, drop_db=STEERED_BAND_DROP_DB):
    """
    Contiguous band around the strongest tracked beam where the gain stays
    within drop_db of that peak. open_low / open_high flag a band cut off
    by the sweep range rather than by the gain drop.
    """
    experiment = Experiment(config)
    sc = experiment.panel.supercell
    freqs = [float(f) for f in config.sweep_frequencies_ghz]
    angles, gains = [], []
    for f_ghz in freqs:
        orders = dict(grating_angles(0.0, sc.period_d, f_ghz * GHZ))
        if DESIGN_ORDER not in orders:
            angles.append(float("nan"))
            gains.append(-math.inf)
            continue
        angle = orders[DESIGN_ORDER]
        ar = experiment.ar_node(f_ghz * GHZ)
        gain = ar.transmit_gain(experiment.rx_position(angle) - experiment.ar_position)
        angles.append(angle)
        gains.append(linear_to_db(gain) if gain > 0 else -math.inf)

    ref = int(np.argmax(gains))
    limit = gains[ref] - drop_db
    lo = hi = ref
    while lo > 0 and gains[lo - 1] >= limit:
        lo -= 1
    while hi < len(freqs) - 1 and gains[hi + 1] >= limit:
        hi += 1
    band = SteeredBand(freqs, angles, gains, freqs[lo], freqs[hi],
                       open_low=lo == 0, open_high=hi == len(freqs) - 1)
    if band.open_low or band.open_high:
        logger.warning(
            "steered band %.2f-%.2f GHz reaches the sweep edge; widen the sweep for its true width",
            band.low_ghz, band.high_ghz,
        )
    return band


# ============================================================================
# REPORTS
# ============================================================================

def result_rows(results):
    return [row for result in results for row in result.rows()]


def write_gnuplot(results, path, axis="angle"):
    """One data block per (method, fixed coordinate); blocks split by two blank lines."""
    methods = []
    for result in results:
        for method in result.powers:
            if method not in methods:
                methods.append(method)
    if axis == "angle":
        fixed = sorted({r.freq_ghz for r in results})
    else:
        fixed = sorted({r.angle_deg for r in results})

    fmt = FLOAT_FORMAT
    blocks = []
    for method in methods:
        for value in fixed:
            if axis == "angle":
                label = f"# method={method} freq_ghz={fmt % value}"
                points = [(r.angle_deg, r.powers[method]) for r in results
                          if r.freq_ghz == value and method in r.powers]
            else:
                label = f"# method={method} angle_deg={fmt % value}"
                points = [(r.freq_ghz, r.powers[method]) for r in results
                          if r.angle_deg == value and method in r.powers]
            if points:
                lines = [label] + [f"{fmt % x} {fmt % p}" for x, p in sorted(points)]
                blocks.append("\n".join(lines) + "\n")
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("\n\n".join(blocks))


def emit_report(results, out_dir, name="angular_sweep", axis="angle"):
    """
    Write <name>.csv, <name>.dat and, when estimated, <name>_evm.csv.

    Returns:
        List of written paths
    """
    if not results:
        raise DataError("no results to report")
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, f"{name}.csv")
    dat_path = os.path.join(out_dir, f"{name}.dat")
    write_results_csv(result_rows(results), csv_path)
    write_gnuplot(results, dat_path, axis)
    written = [csv_path, dat_path]

    with_evm = [r for r in results if r.evm is not None]
    if with_evm:
        evm_path = os.path.join(out_dir, f"{name}_evm.csv")
        frame = pd.DataFrame({
            "freq_ghz": [r.freq_ghz for r in with_evm],
            "angle_deg": [r.angle_deg for r in with_evm],
            "modulation": [r.evm.modulation for r in with_evm],
            "snr_db": [r.evm.snr_db for r in with_evm],
            "evm_percent": [r.evm.evm_percent for r in with_evm],
            "passed": [int(r.evm.passed) for r in with_evm],
        })
        frame.to_csv(evm_path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        written.append(evm_path)
    logger.info("wrote %s", ", ".join(os.path.basename(p) for p in written))
    return written
