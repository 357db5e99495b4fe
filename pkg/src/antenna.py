"""
antenna.py - Antenna and reflector nodes placed in a scene.

Features:
- Analytic horn pattern (parabolic-in-dB main lobe with a floor)
- Isotropic reference pattern
- AntennaNode: position, boresight, pattern, vertical polarization
- ARNode: reflector with separate receive and transmit patterns
"""

import math
from dataclasses import dataclass

import numpy as np

from constants import HORN_PEAK_DBI, HORN_HPBW_DEG, HORN_FLOOR_DB, PANEL_EFFICIENCY
from errors import DomainError
from units import db_to_linear

WORLD_UP = np.array([0.0, 0.0, 1.0])


def _unit(vector, what="vector"):
    v = np.asarray(vector, dtype=float)
    norm = np.linalg.norm(v)
    if norm == 0:
        raise DomainError(f"{what} must be non-zero")
    return v / norm


@dataclass(frozen=True)
class HornPattern:
    """
    Gain peak_dbi - 12 (alpha / hpbw)^2 dB at off-axis angle alpha, floored.

    Args:
        peak_dbi: Boresight gain
        hpbw_deg: Half-power beamwidth
        floor_db: Floor relative to the peak (negative)
    """

    peak_dbi: float = HORN_PEAK_DBI
    hpbw_deg: float = HORN_HPBW_DEG
    floor_db: float = HORN_FLOOR_DB

    def gain_db(self, off_axis_deg):
        rolloff = -12.0 * (off_axis_deg / self.hpbw_deg) ** 2
        return self.peak_dbi + max(rolloff, self.floor_db)

    def gain_linear(self, u, v, w):
        off_axis = math.degrees(math.acos(max(-1.0, min(1.0, w))))
        return db_to_linear(self.gain_db(off_axis))


class IsotropicPattern:
    """Unit gain in every direction."""

    def gain_linear(self, u, v, w):
        return 1.0


class AntennaNode:
    """
    A terminal antenna.

    Args:
        position: (x, y, z) in meters
        boresight: Direction the main beam points to
        pattern: Object with gain_linear(u, v, w) in the antenna frame
        polarization: "V" (vertical) only
        name: Label used in logs and renders
    """

    def __init__(self, position, boresight=(1.0, 0.0, 0.0), pattern=None,
                 polarization="V", name="antenna"):
        self.position = np.asarray(position, dtype=float)
        self.boresight = _unit(boresight, "boresight")
        self.pattern = pattern if pattern is not None else HornPattern()
        self.polarization = polarization
        self.name = name

        # Local frame: w along boresight, v towards world-up
        up = WORLD_UP - (WORLD_UP @ self.boresight) * self.boresight
        if np.linalg.norm(up) < 1e-9:
            up = np.array([1.0, 0.0, 0.0]) - self.boresight[0] * self.boresight
        self._v_axis = _unit(up)
        self._u_axis = np.cross(self._v_axis, self.boresight)

    @classmethod
    def facing(cls, position, target, **kwargs):
        """Node whose boresight points at target."""
        position = np.asarray(position, dtype=float)
        return cls(position, np.asarray(target, dtype=float) - position, **kwargs)

    def local(self, direction):
        d = _unit(direction, "direction")
        return float(d @ self._u_axis), float(d @ self._v_axis), float(d @ self.boresight)

    def gain(self, direction):
        return self.pattern.gain_linear(*self.local(direction))

    def transmit_gain(self, direction):
        return self.gain(direction)

    def receive_gain(self, direction):
        return self.gain(direction)

    def __repr__(self):
        return f"AntennaNode({self.name!r}, position={self.position.tolist()})"


class ARNode:
    """
    Anomalous reflector embedded as a re-radiating antenna.

    Args:
        position: Panel center
        normal: Outward surface normal (panel local z)
        gradient_axis: Phase-gradient direction (panel local x)
        rx_pattern: Response towards sources (beam at 0 deg for design incidence)
        tx_pattern: Anomalous scattering pattern under normal incidence
        e_cd: Panel efficiency applied to both patterns
    """

    def __init__(self, position, normal, gradient_axis, rx_pattern, tx_pattern,
                 e_cd=PANEL_EFFICIENCY, name="AR"):
        if rx_pattern.frequency != tx_pattern.frequency:
            raise DomainError("reflector patterns must share one frequency")
        if rx_pattern.normalization != tx_pattern.normalization:
            raise DomainError("reflector patterns must share one normalization")
        self.position = np.asarray(position, dtype=float)
        self.normal = _unit(normal, "normal")
        x_axis = np.asarray(gradient_axis, dtype=float)
        x_axis = x_axis - (x_axis @ self.normal) * self.normal
        self.x_axis = _unit(x_axis, "gradient axis")
        self.y_axis = np.cross(self.normal, self.x_axis)
        self.rx_pattern = rx_pattern
        self.tx_pattern = tx_pattern
        self.e_cd = e_cd
        self.name = name

    @property
    def frequency(self):
        return self.tx_pattern.frequency

    def local(self, direction):
        d = _unit(direction, "direction")
        return float(d @ self.x_axis), float(d @ self.y_axis), float(d @ self.normal)

    def receive_gain(self, direction):
        return self.e_cd * self.rx_pattern.gain_linear(*self.local(direction))

    def transmit_gain(self, direction):
        return self.e_cd * self.tx_pattern.gain_linear(*self.local(direction))

    def observation_angle(self, point):
        """Signed in-plane angle (deg) of a point seen from the panel."""
        u, _, w = self.local(np.asarray(point, dtype=float) - self.position)
        return math.degrees(math.atan2(u, w))

    def __repr__(self):
        return f"ARNode({self.name!r}, position={self.position.tolist()})"
