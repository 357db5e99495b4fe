"""
fileio.py - Readers and writers for every on-disk format.

Handles:
- Run configuration (strict JSON)
- Measurement records and correction tables (CSV)
- Result tables (CSV, 4-decimal fixed formatting)
- Radiation pattern tables
- Link parameter tables

All text is UTF-8 with LF line endings; angles are degrees on disk.
"""

import json
import logging
import math
import os
from dataclasses import dataclass, field, fields
from enum import Enum

import numpy as np
import pandas as pd

from constants import (
    DATA_DIR, DEFAULT_RUN_CONFIG, WAVEFORMS, ELEMENT_MODELS, PANEL_SIZES,
    MAX_REFLECTION_ORDER, FLOAT_FORMAT, RESULT_COLUMNS, CORRECTION_COLUMNS,
    PATTERN_COLUMNS, MEASUREMENT_COLUMNS, LINK_PARAM_COLUMNS, PATTERN_FLOOR_DB,
)
from errors import ConfigError, ParseError
from linkbudget import CorrectionTable, LinkParams
from pattern import RadiationPattern
from units import hz_of

logger = logging.getLogger(__name__)


# ============================================================================
# TABLE HELPERS
# ============================================================================

def _read_table(path, columns, optional=()):
    """Read a headed CSV as strings; header must list the required columns."""
    try:
        frame = pd.read_csv(
            path, dtype=str, keep_default_na=False, skipinitialspace=True,
            encoding="utf-8",
        )
    except pd.errors.EmptyDataError:
        raise ParseError(path, 1, "missing header line") from None
    except pd.errors.ParserError as e:
        raise ParseError(path, None, str(e)) from None
    frame.columns = [c.strip() for c in frame.columns]
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise ParseError(path, 1, f"header lacks column(s) {', '.join(missing)}")
    extra = [c for c in frame.columns if c not in columns and c not in optional]
    if extra:
        raise ParseError(path, 1, f"unexpected column(s) {', '.join(extra)}")
    return frame


def _rows(frame):
    """Yield (line number, row) pairs; the header is line 1."""
    for i, row in enumerate(frame.itertuples(index=False)):
        yield i + 2, row._asdict()


def _number(text, path, line, column):
    try:
        value = float(str(text).strip())
    except ValueError:
        raise ParseError(path, line, f"{column}: {text!r} is not a number") from None
    if not math.isfinite(value):
        raise ParseError(path, line, f"{column}: non-finite value {text!r}")
    return value


def _write_frame(frame, path):
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n", encoding="utf-8")


# ============================================================================
# MEASUREMENTS
# ============================================================================

class Waveform(str, Enum):
    MODULATED_16QAM_400MHZ = "modulated-16QAM-400MHz"
    MODULATED_64QAM_100MHZ = "modulated-64QAM-100MHz"
    CONTINUOUS_WAVE = "continuous-wave"

    @property
    def modulation(self):
        return WAVEFORMS[self.value][0]

    @property
    def bandwidth_hz(self):
        return WAVEFORMS[self.value][1]


@dataclass(frozen=True)
class MeasurementRecord:
    """Measured received power at one (frequency, angle, waveform)."""

    freq_ghz: float
    angle_deg: float
    waveform: Waveform
    p_m_dbm: float
    evm_percent: float = None

    def __post_init__(self):
        if self.evm_percent is not None and not 0.0 < self.evm_percent <= 100.0:
            raise ValueError(f"EVM must lie in (0, 100], got {self.evm_percent}")

    @property
    def key(self):
        return (round(self.freq_ghz, 6), round(self.angle_deg, 6), self.waveform)


def parse_measurements(path):
    """Typed measurement records; duplicate (f, angle, waveform) keys are rejected."""
    frame = _read_table(path, MEASUREMENT_COLUMNS[:4], optional=MEASUREMENT_COLUMNS[4:])
    records = []
    seen = {}
    for line, row in _rows(frame):
        try:
            waveform = Waveform(row["waveform"].strip())
        except ValueError:
            raise ParseError(path, line, f"unknown waveform {row['waveform']!r}") from None
        evm_text = str(row.get("evm_percent", "")).strip()
        evm = _number(evm_text, path, line, "evm_percent") if evm_text else None
        try:
            record = MeasurementRecord(
                _number(row["freq_ghz"], path, line, "freq_ghz"),
                _number(row["angle_deg"], path, line, "angle_deg"),
                waveform,
                _number(row["p_m_dbm"], path, line, "p_m_dbm"),
                evm,
            )
        except ValueError as e:
            raise ParseError(path, line, str(e)) from None
        if record.key in seen:
            raise ParseError(path, line, f"duplicate measurement (first on line {seen[record.key]})")
        seen[record.key] = line
        records.append(record)
    logger.debug("parsed %d measurement records from %s", len(records), path)
    return records


def write_measurements(records, path):
    frame = pd.DataFrame(
        {
            "freq_ghz": [r.freq_ghz for r in records],
            "angle_deg": [r.angle_deg for r in records],
            "waveform": [r.waveform.value for r in records],
            "p_m_dbm": [r.p_m_dbm for r in records],
            "evm_percent": [np.nan if r.evm_percent is None else r.evm_percent for r in records],
        },
        columns=MEASUREMENT_COLUMNS,
    )
    _write_frame(frame, path)


# ============================================================================
# CORRECTION TABLES
# ============================================================================

def read_correction_table(path):
    frame = _read_table(path, CORRECTION_COLUMNS)
    table = CorrectionTable()
    for line, row in _rows(frame):
        f_ghz = _number(row["freq_ghz"], path, line, "freq_ghz")
        angle = _number(row["angle_deg"], path, line, "angle_deg")
        if (f_ghz, angle) in table:
            raise ParseError(path, line, f"duplicate entry ({f_ghz} GHz, {angle} deg)")
        table.set(f_ghz, angle, _number(row["p_diff_db"], path, line, "p_diff_db"))
    return table


def write_correction_table(table, path):
    items = table.items()
    frame = pd.DataFrame(
        {
            "freq_ghz": [f for (f, _), _ in items],
            "angle_deg": [a for (_, a), _ in items],
            "p_diff_db": [v for _, v in items],
        },
        columns=CORRECTION_COLUMNS,
    )
    _write_frame(frame, path)


# ============================================================================
# RESULTS
# ============================================================================

def write_results_csv(rows, path):
    """Rows of (freq_ghz, angle_deg, method, p_dbm) in the given order."""
    frame = pd.DataFrame(list(rows), columns=RESULT_COLUMNS)
    frame = frame.astype({"freq_ghz": float, "angle_deg": float, "p_dbm": float})
    _write_frame(frame, path)


def read_results_csv(path):
    frame = _read_table(path, RESULT_COLUMNS)
    rows = []
    for line, row in _rows(frame):
        rows.append((
            _number(row["freq_ghz"], path, line, "freq_ghz"),
            _number(row["angle_deg"], path, line, "angle_deg"),
            row["method"].strip(),
            _number(row["p_dbm"], path, line, "p_dbm"),
        ))
    return rows


# ============================================================================
# PATTERNS
# ============================================================================

def read_pattern(path, f, normalization="directivity-scaled"):
    """
    Pattern table with one row per (theta, phi), theta-major.

    Args:
        path: File to read
        f: Frequency the pattern belongs to
        normalization: Tag for the loaded values
    """
    frame = _read_table(path, PATTERN_COLUMNS)
    if frame.empty:
        raise ParseError(path, 2, "pattern has no samples")
    data = frame[PATTERN_COLUMNS].apply(pd.to_numeric, errors="coerce").to_numpy(dtype=float)
    bad = np.flatnonzero(~np.isfinite(data).all(axis=1))
    if bad.size:
        raise ParseError(path, int(bad[0]) + 2, "non-numeric or non-finite sample")
    theta = np.unique(data[:, 0])
    phi = np.unique(data[:, 1])
    if theta.size * phi.size != len(data):
        raise ParseError(path, None, "samples do not form a regular (theta, phi) grid")
    grid_theta, grid_phi = np.meshgrid(theta, phi, indexing="ij")
    bad = np.flatnonzero((data[:, 0] != grid_theta.ravel()) | (data[:, 1] != grid_phi.ravel()))
    if bad.size:
        raise ParseError(path, int(bad[0]) + 2, "rows are not in theta-major order")
    amplitude = np.sqrt(10.0 ** (data[:, 2] / 10.0))
    values = amplitude * np.exp(1j * np.radians(data[:, 3]))
    return RadiationPattern(
        hz_of(f), theta, phi, values.reshape(theta.size, phi.size), normalization,
    )


def write_pattern(pattern, path):
    """Write a pattern table; values are rescaled to directivity so gain_dBi holds dBi."""
    if pattern.normalization != "directivity-scaled":
        pattern = pattern.directivity_scaled()
    grid_theta, grid_phi = np.meshgrid(pattern.theta_deg, pattern.phi_deg, indexing="ij")
    power = pattern.power.ravel()
    floor = 10.0 ** (PATTERN_FLOOR_DB / 10.0)
    frame = pd.DataFrame(
        {
            "theta_deg": grid_theta.ravel(),
            "phi_deg": grid_phi.ravel(),
            "gain_dBi": 10.0 * np.log10(np.maximum(power, floor)),
            "phase_deg": np.degrees(np.angle(pattern.values.ravel())),
        },
        columns=PATTERN_COLUMNS,
    )
    _write_frame(frame, path)


# ============================================================================
# LINK PARAMETERS
# ============================================================================

LINK_SYMBOLS = {
    "P_t": ("p_t_dbm", "dBm"),
    "G_t": ("g_t_db", "dB"),
    "G_r": ("g_r_db", "dB"),
    "L_t": ("l_t_db", "dB"),
    "G_a": ("g_a_db", "dB"),
    "R_1": ("r1_m", "m"),
    "R_2": ("r2_m", "m"),
}


def read_link_params(path, f):
    """Link parameter table (symbol, value, unit) at carrier frequency f."""
    frame = _read_table(path, LINK_PARAM_COLUMNS)
    values = {}
    for line, row in _rows(frame):
        symbol = row["symbol"].strip()
        if symbol not in LINK_SYMBOLS:
            raise ParseError(path, line, f"unknown symbol {symbol!r}")
        name, unit = LINK_SYMBOLS[symbol]
        if row["unit"].strip() != unit:
            raise ParseError(path, line, f"{symbol} must be given in {unit}")
        if name in values:
            raise ParseError(path, line, f"duplicate symbol {symbol}")
        values[name] = _number(row["value"], path, line, "value")
    missing = [s for s, (name, _) in LINK_SYMBOLS.items() if name not in values]
    if missing:
        raise ParseError(path, None, f"missing symbol(s) {', '.join(missing)}")
    return LinkParams(f_hz=hz_of(f), **values)


def write_link_params(params, path):
    frame = pd.DataFrame(
        {
            "symbol": list(LINK_SYMBOLS),
            "value": [float(getattr(params, name)) for name, _ in LINK_SYMBOLS.values()],
            "unit": [unit for _, unit in LINK_SYMBOLS.values()],
        },
        columns=LINK_PARAM_COLUMNS,
    )
    _write_frame(frame, path)


# ============================================================================
# RUN CONFIGURATION
# ============================================================================

@dataclass
class RunConfig:
    """
    One experiment manifest.

    File paths are resolved against the config file's directory first,
    then the shipped data directory.
    """

    panel: int = DEFAULT_RUN_CONFIG["panel"]
    angles_deg: list = field(default_factory=lambda: list(DEFAULT_RUN_CONFIG["angles_deg"]))
    frequencies_ghz: list = field(default_factory=lambda: list(DEFAULT_RUN_CONFIG["frequencies_ghz"]))
    sweep_frequencies_ghz: list = field(
        default_factory=lambda: list(DEFAULT_RUN_CONFIG["sweep_frequencies_ghz"]))
    sweep_angles_deg: list = field(default_factory=lambda: list(DEFAULT_RUN_CONFIG["sweep_angles_deg"]))
    max_order: int = DEFAULT_RUN_CONFIG["max_order"]
    coherent: bool = DEFAULT_RUN_CONFIG["coherent"]
    element: str = DEFAULT_RUN_CONFIG["element"]
    waveform: str = DEFAULT_RUN_CONFIG["waveform"]
    noise_figure_db: float = DEFAULT_RUN_CONFIG["noise_figure_db"]
    evm: bool = DEFAULT_RUN_CONFIG["evm"]
    scene: str = DEFAULT_RUN_CONFIG["scene"]
    link_params: str = DEFAULT_RUN_CONFIG["link_params"]
    corrections: str = DEFAULT_RUN_CONFIG["corrections"]
    rx_pattern: str = DEFAULT_RUN_CONFIG["rx_pattern"]
    tx_pattern: str = DEFAULT_RUN_CONFIG["tx_pattern"]
    element_pattern: str = DEFAULT_RUN_CONFIG["element_pattern"]
    source_dir: str = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        self.validate()

    @classmethod
    def keys(cls):
        return [f.name for f in fields(cls) if f.name != "source_dir"]

    def validate(self):
        if self.panel not in PANEL_SIZES:
            raise ConfigError(f"panel must be one of {sorted(PANEL_SIZES)}, got {self.panel!r}")
        for name in ("angles_deg", "frequencies_ghz", "sweep_frequencies_ghz", "sweep_angles_deg"):
            values = getattr(self, name)
            if not isinstance(values, list) or not values:
                raise ConfigError(f"{name} must be a non-empty list")
            for v in values:
                if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                    raise ConfigError(f"{name} holds a non-numeric value {v!r}")
            if name.endswith("_ghz") and min(values) <= 0:
                raise ConfigError(f"{name} must be positive")
            if name.endswith("_deg") and max(abs(v) for v in values) >= 90:
                raise ConfigError(f"{name} must lie strictly between -90 and 90 deg")
        if isinstance(self.max_order, bool) or self.max_order not in range(MAX_REFLECTION_ORDER + 1):
            raise ConfigError(f"max_order must lie in 0..{MAX_REFLECTION_ORDER}, got {self.max_order!r}")
        if not isinstance(self.coherent, bool) or not isinstance(self.evm, bool):
            raise ConfigError("coherent and evm must be true or false")
        if self.element not in ELEMENT_MODELS:
            raise ConfigError(f"element must be one of {ELEMENT_MODELS}, got {self.element!r}")
        if self.waveform not in WAVEFORMS:
            raise ConfigError(f"waveform must be one of {sorted(WAVEFORMS)}, got {self.waveform!r}")
        if not isinstance(self.noise_figure_db, (int, float)) or not math.isfinite(self.noise_figure_db):
            raise ConfigError("noise_figure_db must be a finite number")
        for name in ("scene", "link_params"):
            if not isinstance(getattr(self, name), str):
                raise ConfigError(f"{name} must be a file name")
        for name in ("corrections", "rx_pattern", "tx_pattern", "element_pattern"):
            if getattr(self, name) is not None and not isinstance(getattr(self, name), str):
                raise ConfigError(f"{name} must be a file name or null")
        if (self.rx_pattern is None) != (self.tx_pattern is None):
            raise ConfigError("rx_pattern and tx_pattern must be given together")

    def to_dict(self):
        return {name: getattr(self, name) for name in self.keys()}

    def updated(self, **overrides):
        data = self.to_dict()
        data.update({k: v for k, v in overrides.items() if v is not None})
        return RunConfig(source_dir=self.source_dir, **data)

    def resolve(self, name):
        """Absolute path for a file reference, or None."""
        value = getattr(self, name)
        if value is None:
            return None
        if os.path.isabs(value):
            return value
        if self.source_dir:
            local = os.path.join(self.source_dir, value)
            if os.path.exists(local):
                return local
        return os.path.join(DATA_DIR, value)

    @property
    def waveform_kind(self):
        return Waveform(self.waveform)


def config_from_dict(data, source_dir=None):
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    unknown = sorted(set(data) - set(RunConfig.keys()))
    if unknown:
        raise ConfigError(f"unknown configuration key(s): {', '.join(unknown)}")
    return RunConfig(source_dir=source_dir, **data)


def parse_config(path):
    """Strict JSON run configuration; unknown keys are rejected."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}:{e.lineno}: {e.msg}") from None
    except OSError as e:
        raise ConfigError(f"cannot read configuration {path}: {e.strerror}") from None
    return config_from_dict(data, os.path.dirname(os.path.abspath(path)))


def dump_config(config):
    return json.dumps(config.to_dict(), indent=2) + "\n"


def write_config(config, path):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(dump_config(config))
