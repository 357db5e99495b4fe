"""
linkbudget.py - Received-power models for reflector-assisted links.

Features:
- Ideal bistatic cross-section of an anomalous reflector
- Radar-equation (method 1) and cascaded-gain (method 2) received power
- Cross-section <-> gain-product conversion linking the two methods
- Terminal chain (cable loss, amplifier), LoS Friis reference
- Measurement correction table and EVM estimate from SNR
"""

import logging
import math
from dataclasses import dataclass, field, replace

from constants import (
    GHZ, THERMAL_NOISE_DBM_HZ, NOISE_FIGURE_DB, EVM_LIMITS_PERCENT,
)
from errors import CorrectionLookupError, DataError, DomainError
from units import (
    Angle, hz_of, deg_of, wavelength_of, db_to_linear, linear_to_db,
    dbm_to_watts, watts_to_dbm,
)

logger = logging.getLogger(__name__)

FOUR_PI = 4.0 * math.pi


@dataclass(frozen=True)
class LinkParams:
    """
    Link budget terms.

    Args:
        p_t_dbm: Transmit power
        g_t_db, g_r_db: Tx and Rx horn gains
        l_t_db: Cable loss, stored positive and always subtracted
        g_a_db: Receive amplifier gain
        r1_m: Tx to reflector distance
        r2_m: Reflector to Rx distance
        f_hz: Carrier frequency
    """

    p_t_dbm: float
    g_t_db: float
    g_r_db: float
    l_t_db: float
    g_a_db: float
    r1_m: float
    r2_m: float
    f_hz: float

    def __post_init__(self):
        if not (self.r1_m > 0 and self.r2_m > 0):
            raise DomainError(f"hop distances must be positive, got {self.r1_m}, {self.r2_m}")
        hz_of(self.f_hz)

    @property
    def wavelength(self):
        return wavelength_of(self.f_hz)

    def with_(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True)
class BistaticGeometry:
    """Incidence and observation angles (degrees) and reflector area (m^2)."""

    theta_i: float
    theta_r: float
    area: float

    def __post_init__(self):
        Angle(self.theta_i).require_propagating()
        Angle(self.theta_r).require_propagating()
        if not self.area > 0:
            raise DomainError(f"panel area must be positive, got {self.area}")


def _key(f_ghz, angle_deg):
    return (round(float(f_ghz), 6), round(float(angle_deg), 6))


@dataclass
class CorrectionTable:
    """Power differences (dB) keyed exactly by (frequency GHz, angle deg)."""

    entries: dict = field(default_factory=dict)

    def __post_init__(self):
        entries = {}
        for (f_ghz, angle), p_diff in self.entries.items():
            value = float(p_diff)
            if not math.isfinite(value):
                raise DataError(f"non-finite P_diff at ({f_ghz} GHz, {angle} deg)")
            entries[_key(f_ghz, angle)] = value
        self.entries = entries

    def __len__(self):
        return len(self.entries)

    def __contains__(self, key):
        return _key(*key) in self.entries

    def set(self, f_ghz, angle_deg, p_diff_db):
        if not math.isfinite(p_diff_db):
            raise DataError(f"non-finite P_diff at ({f_ghz} GHz, {angle_deg} deg)")
        self.entries[_key(f_ghz, angle_deg)] = float(p_diff_db)

    def lookup(self, f_ghz, angle_deg):
        try:
            return self.entries[_key(f_ghz, angle_deg)]
        except KeyError:
            raise CorrectionLookupError(
                f"no correction for {f_ghz} GHz at {angle_deg} deg"
            ) from None

    def items(self):
        """Entries sorted by frequency, then angle."""
        return sorted(self.entries.items())

    @property
    def frequencies_ghz(self):
        return sorted({f for f, _ in self.entries})

    @property
    def angles_deg(self):
        return sorted({a for _, a in self.entries})


# ============================================================================
# BISTATIC CROSS-SECTION AND THE TWO METHODS
# ============================================================================

def bistatic_sigma_ideal(geom, f):
    """sigma = 4 pi A^2 cos(theta_i) cos(theta_r) / lambda^2."""
    lam = wavelength_of(f)
    ci = math.cos(math.radians(geom.theta_i))
    cr = math.cos(math.radians(geom.theta_r))
    return FOUR_PI * geom.area ** 2 * ci * cr / lam ** 2


def received_power_method1(p, sigma):
    """Bistatic radar equation with the reflector's cross-section, in dBm."""
    if sigma < 0:
        raise DomainError(f"cross-section must be non-negative, got {sigma}")
    lam = p.wavelength
    linear = (
        db_to_linear(p.g_t_db) * db_to_linear(p.g_r_db) * sigma * lam ** 2
        / (FOUR_PI ** 3 * p.r1_m ** 2 * p.r2_m ** 2)
    )
    return watts_to_dbm(dbm_to_watts(p.p_t_dbm) * linear)


def received_power_method2(p, g_rx_db, g_tx_db):
    """Cascade of two Friis hops through the reflector's receive and transmit gains, in dBm."""
    if not (math.isfinite(g_rx_db) and math.isfinite(g_tx_db)):
        raise DomainError("reflector gains must be finite")
    lam = p.wavelength
    linear = (
        db_to_linear(p.g_t_db) * db_to_linear(g_rx_db) * db_to_linear(g_tx_db)
        * db_to_linear(p.g_r_db) * lam ** 4
        / (FOUR_PI ** 4 * (p.r1_m * p.r2_m) ** 2)
    )
    return watts_to_dbm(dbm_to_watts(p.p_t_dbm) * linear)


def sigma_gain_convert(value, f, direction):
    """
    Relate the bistatic cross-section to the reflector gain product.

    G_rx * G_tx = 4 pi sigma / lambda^2 (both linear).

    Args:
        value: sigma in m^2 ("to_gain") or linear gain product ("to_sigma")
        f: Frequency
        direction: "to_gain" or "to_sigma"
    """
    if not value > 0:
        raise DomainError(f"value must be positive, got {value}")
    lam = wavelength_of(f)
    if direction == "to_gain":
        return FOUR_PI * value / lam ** 2
    if direction == "to_sigma":
        return value * lam ** 2 / FOUR_PI
    raise DomainError(f"unknown direction {direction!r}")


def chain_terminal(p_dbm, p):
    """P_r = P - L_t + G_a."""
    return p_dbm - p.l_t_db + p.g_a_db


def free_space_loss_db(distance_m, f):
    return -20.0 * math.log10(wavelength_of(f) / (FOUR_PI * distance_m))


def los_reference(p, r3_m):
    """Friis LoS received power over R_3 through the same terminal chain, in dBm."""
    if not r3_m > 0:
        raise DomainError(f"R_3 must be positive, got {r3_m}")
    friis = p.p_t_dbm + p.g_t_db + p.g_r_db - free_space_loss_db(r3_m, p.f_hz)
    return chain_terminal(friis, p)


def power_difference(p_theory_dbm, p_m_dbm):
    return p_theory_dbm - p_m_dbm


def apply_correction(p_r_dbm, table, f, angle):
    """P_correct = P_r - P_diff(f, angle); no interpolation between entries."""
    return p_r_dbm - table.lookup(hz_of(f) / GHZ, deg_of(angle))


# ============================================================================
# EVM
# ============================================================================

@dataclass(frozen=True)
class EvmEstimate:
    evm_percent: float
    snr_db: float
    noise_floor_dbm: float
    limit_percent: float
    modulation: str

    @property
    def passed(self):
        return self.evm_percent <= self.limit_percent


def noise_floor_dbm(bandwidth_hz, noise_figure_db=NOISE_FIGURE_DB):
    if not bandwidth_hz > 0:
        raise DomainError(f"bandwidth must be positive, got {bandwidth_hz}")
    return THERMAL_NOISE_DBM_HZ + 10.0 * math.log10(bandwidth_hz) + noise_figure_db


def evm_estimate(p_r_dbm, bandwidth_hz, noise_figure_db=NOISE_FIGURE_DB, modulation="16QAM"):
    """
    RMS EVM from SNR alone, EVM% = 100 / sqrt(SNR).

    Returns:
        EvmEstimate; passed compares against the modulation's limit
    """
    if modulation not in EVM_LIMITS_PERCENT:
        raise DomainError(
            f"unknown modulation {modulation!r}; choose from {sorted(EVM_LIMITS_PERCENT)}"
        )
    n_dbm = noise_floor_dbm(bandwidth_hz, noise_figure_db)
    snr_db = p_r_dbm - n_dbm
    evm = 100.0 / math.sqrt(db_to_linear(snr_db))
    return EvmEstimate(evm, snr_db, n_dbm, EVM_LIMITS_PERCENT[modulation], modulation)


def sigma_from_gains(g_rx_db, g_tx_db, f):
    """Cross-section equivalent to a pair of reflector gains (dB)."""
    return sigma_gain_convert(db_to_linear(g_rx_db + g_tx_db), f, "to_sigma")


def gains_from_sigma_db(sigma, f):
    """Linear gain product of sigma expressed in dB."""
    return linear_to_db(sigma_gain_convert(sigma, f, "to_gain"))
