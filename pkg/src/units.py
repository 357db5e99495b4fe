"""
units.py - Scalar value types and unit conversions.

Provides:
- Frequency, PowerLevel, GainDb and Angle value types
- Wavelength from frequency
- dB <-> linear (power convention) and dBm <-> watts conversions

Powers stay in dBm and gains in dB; linear values only appear inside
formulas.
"""

import math
from dataclasses import dataclass

import numpy as np

from constants import SPEED_OF_LIGHT, GHZ
from errors import DomainError


@dataclass(frozen=True)
class Frequency:
    """Carrier frequency in hertz."""

    hz: float

    def __post_init__(self):
        if not (self.hz > 0 and math.isfinite(self.hz)):
            raise DomainError(f"frequency must be positive, got {self.hz!r} Hz")

    @classmethod
    def from_ghz(cls, ghz):
        return cls(float(ghz) * GHZ)

    @property
    def ghz(self):
        return self.hz / GHZ

    @property
    def wavelength(self):
        return SPEED_OF_LIGHT / self.hz

    def __float__(self):
        return float(self.hz)


@dataclass(frozen=True)
class PowerLevel:
    """Power in dBm."""

    dbm: float

    @classmethod
    def from_watts(cls, watts):
        return cls(watts_to_dbm(watts))

    @property
    def watts(self):
        return dbm_to_watts(self.dbm)

    def __float__(self):
        return float(self.dbm)


@dataclass(frozen=True)
class GainDb:
    """Gain (or loss, when negative) in dB."""

    db: float

    @classmethod
    def from_linear(cls, ratio):
        return cls(linear_to_db(ratio))

    @property
    def linear(self):
        return db_to_linear(self.db)

    def __float__(self):
        return float(self.db)


@dataclass(frozen=True)
class Angle:
    """
    Angle in degrees from the reflector normal, in the plane of incidence.

    Positive angles lie on the side of the design reflection (+65 deg).
    """

    deg: float

    @property
    def rad(self):
        return math.radians(self.deg)

    @property
    def is_propagating(self):
        return -90.0 < self.deg < 90.0

    def require_propagating(self):
        if not self.is_propagating:
            raise DomainError(f"angle {self.deg} deg is not a propagating direction")
        return self

    def __float__(self):
        return float(self.deg)


def hz_of(f):
    """Accept a Frequency or a bare number of hertz."""
    if isinstance(f, Frequency):
        return f.hz
    return Frequency(float(f)).hz


def deg_of(angle):
    return angle.deg if isinstance(angle, Angle) else float(angle)


def wavelength_of(f):
    """Free-space wavelength in meters, c / f."""
    return SPEED_OF_LIGHT / hz_of(f)


def db_to_linear(x_db):
    if np.ndim(x_db):
        return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)
    return 10.0 ** (float(x_db) / 10.0)


def linear_to_db(x):
    """10 log10(x) for positive power ratios."""
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError(f"linear value must be positive, got {x!r}")
    if np.ndim(x):
        return 10.0 * np.log10(arr)
    return 10.0 * math.log10(float(x))


def db_linear_convert(x, direction):
    """
    Convert between dB and linear power ratios.

    Args:
        x: Value to convert
        direction: "to_linear" (dB -> ratio) or "to_db" (ratio -> dB)
    """
    if direction == "to_linear":
        return db_to_linear(x)
    if direction == "to_db":
        return linear_to_db(x)
    raise DomainError(f"unknown conversion direction {direction!r}")


def dbm_to_watts(p_dbm):
    return db_to_linear(p_dbm) * 1e-3


def watts_to_dbm(p_w):
    """Watts to dBm; zero power maps to -inf."""
    if np.ndim(p_w):
        return linear_to_db(np.asarray(p_w, dtype=float) * 1e3)
    if float(p_w) == 0.0:
        return -math.inf
    return linear_to_db(float(p_w) * 1e3)
