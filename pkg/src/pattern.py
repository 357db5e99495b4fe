"""
pattern.py - Finite-panel scattering pattern synthesis.

Features:
- Supercell design from the Floquet grating condition
- Quantized linear phase-gradient profiles
- Array factor of (tiled) panels, with optional oblique illumination
- Pattern synthesis on a signed-theta / half-range-phi grid
- Directivity, gain, HPBW and peak direction
- Grating-order angles and Fraunhofer distance

Local panel frame: x is the phase-gradient axis, y the second panel axis,
z the surface normal. A direction (theta, phi) has u = sin(theta) cos(phi),
v = sin(theta) sin(phi), w = cos(theta); theta is signed in [-90, 90] and
phi covers [0, 180), so phi = 0 is the plane of incidence.
"""

import logging
import math
from dataclasses import dataclass, replace
from functools import cached_property, lru_cache

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.integrate import trapezoid
from scipy.interpolate import RegularGridInterpolator

from constants import (
    THETA_STEP_DEG, PHI_STEP_DEG, HPBW_LEVEL_DB, DESIGN_ORDER,
    DESIGN_ANGLE_DEG, DESIGN_FREQUENCY_HZ, SUPERCELL_ELEMENTS,
    QUANTIZATION_BITS, PANEL_SIZES, PANEL_EFFICIENCY, ELEMENT_MODELS,
)
from errors import DomainError, PatternError
from units import Angle, hz_of, deg_of, wavelength_of

logger = logging.getLogger(__name__)

NORMALIZATIONS = ("raw", "peak-normalized", "directivity-scaled")
TWO_PI = 2.0 * math.pi


# ============================================================================
# GEOMETRY
# ============================================================================

@dataclass(frozen=True)
class SupercellSpec:
    """
    Periodic group of unit cells whose phase gradient sets the beam.

    Args:
        n_elements: Unit cells per supercell
        period_d: Supercell period in meters
        element_period: Unit-cell pitch in meters (period_d / n_elements)
        design_frequency: Design frequency in Hz
        design_angle: Maximum deflection angle in degrees
        quantization_bits: Phase resolution of the reactive loads
    """

    n_elements: int
    period_d: float
    element_period: float
    design_frequency: float
    design_angle: float
    quantization_bits: int

    def __post_init__(self):
        if abs(self.element_period * self.n_elements - self.period_d) > 1e-12:
            raise DomainError("element_period * n_elements must equal period_d")


@dataclass(frozen=True)
class PanelSpec:
    """Rectangular panel of nx by ny unit cells with a 1-D gradient along x."""

    supercell: SupercellSpec
    nx: int
    ny: int

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise DomainError(f"panel needs at least one cell, got {self.nx}x{self.ny}")
        if self.nx % self.supercell.n_elements:
            raise DomainError(
                f"nx={self.nx} is not a multiple of the supercell size "
                f"{self.supercell.n_elements}"
            )

    @property
    def dx(self):
        return self.supercell.element_period

    @property
    def dy(self):
        return self.supercell.element_period

    @property
    def side_x(self):
        return self.nx * self.dx

    @property
    def side_y(self):
        return self.ny * self.dy

    @property
    def area(self):
        return self.side_x * self.side_y

    @property
    def x_positions(self):
        """Element positions along the gradient, measured from the panel edge."""
        return np.arange(self.nx) * self.dx


@dataclass(frozen=True)
class PhaseProfile:
    """Per-column reflection phases in radians; bits is None when continuous."""

    phases: tuple
    bits: int = None

    @property
    def array(self):
        return np.asarray(self.phases, dtype=float)

    def __len__(self):
        return len(self.phases)


def design_supercell(design_angle, f0, n_elements=SUPERCELL_ELEMENTS, bits=QUANTIZATION_BITS):
    """
    Supercell whose fourth Floquet order leaves at the design angle.

    Returns:
        SupercellSpec with period_d = 4 lambda0 / |sin(design_angle)|
    """
    angle = deg_of(design_angle)
    if n_elements < 2:
        raise DomainError(f"a supercell needs at least 2 elements, got {n_elements}")
    s = abs(math.sin(math.radians(angle)))
    if s < 1e-12:
        raise DomainError("design angle 0 deg gives an infinite supercell period")
    period = DESIGN_ORDER * wavelength_of(f0) / s
    return SupercellSpec(
        n_elements=n_elements,
        period_d=period,
        element_period=period / n_elements,
        design_frequency=hz_of(f0),
        design_angle=angle,
        quantization_bits=bits,
    )


def make_panel(size=48, design_angle=DESIGN_ANGLE_DEG, f0=DESIGN_FREQUENCY_HZ,
               bits=QUANTIZATION_BITS):
    """Panel of one of the built sizes (48 or 96 cells per side)."""
    if size not in PANEL_SIZES:
        raise DomainError(f"unknown panel size {size}; choose from {sorted(PANEL_SIZES)}")
    nx, ny = PANEL_SIZES[size]
    return PanelSpec(design_supercell(design_angle, f0, bits=bits), nx, ny)


def tile_panel(panel, mx, my):
    """Seamless mx by my tiling of identical panels."""
    if mx < 1 or my < 1:
        raise DomainError(f"tiling factors must be >= 1, got ({mx}, {my})")
    return replace(panel, nx=panel.nx * mx, ny=panel.ny * my)


def fraunhofer_distance(aperture_extent, f):
    """Far-field boundary 2 D^2 / lambda for an aperture of side D."""
    if aperture_extent <= 0:
        raise DomainError(f"aperture extent must be positive, got {aperture_extent}")
    return 2.0 * aperture_extent ** 2 / wavelength_of(f)


def grating_angles(theta_i, d, f):
    """All propagating Floquet orders as (n, angle in degrees), sorted by n."""
    if d <= 0:
        raise DomainError(f"period must be positive, got {d}")
    s = math.sin(math.radians(deg_of(theta_i)))
    ratio = wavelength_of(f) / d
    n_min = math.ceil((-1.0 - s) / ratio - 1e-9)
    n_max = math.floor((1.0 - s) / ratio + 1e-9)
    orders = []
    for n in range(n_min, n_max + 1):
        arg = s + n * ratio
        if abs(arg) > 1.0 + 1e-12:
            continue
        orders.append((n, math.degrees(math.asin(max(-1.0, min(1.0, arg))))))
    return orders


# ============================================================================
# PHASE PROFILE AND ARRAY FACTOR
# ============================================================================

def quantize_phase(phi, bits):
    """Round phases (wrapped to [0, 2pi)) to the nearest of 2**bits levels."""
    step = TWO_PI / (2 ** bits)
    wrapped = np.mod(np.asarray(phi, dtype=float), TWO_PI)
    # Round half away from zero; wrapped phases are non-negative.
    levels = np.floor(wrapped / step + 0.5)
    return np.mod(levels * step, TWO_PI)


def phase_profile(panel, theta_i, theta_r, f0, bits=None, continuous=False):
    """
    Linear reflection-phase gradient steering theta_i into theta_r at f0.

    Args:
        panel: PanelSpec the profile is laid on
        theta_i: Incidence angle in degrees
        theta_r: Reflection angle in degrees
        f0: Frequency the gradient is computed at
        bits: Quantization bits, defaults to the supercell's
        continuous: Skip quantization
    """
    ti = Angle(deg_of(theta_i)).require_propagating()
    tr = Angle(deg_of(theta_r)).require_propagating()
    k0 = TWO_PI / wavelength_of(f0)
    phi = -k0 * (math.sin(tr.rad) - math.sin(ti.rad)) * panel.x_positions
    if continuous:
        return PhaseProfile(tuple(np.mod(phi, TWO_PI).tolist()), None)
    b = panel.supercell.quantization_bits if bits is None else bits
    return PhaseProfile(tuple(quantize_phase(phi, b).tolist()), b)


def design_profile(panel):
    """Quantized profile for normal incidence into the design angle."""
    sc = panel.supercell
    return phase_profile(panel, 0.0, sc.design_angle, sc.design_frequency)


def array_factor_uv(panel, profile, u, v, f, theta_i=0.0):
    """
    Array factor at direction cosines (u, v), summed in element order.

    Columns carry the profile phase plus the illumination phase
    -k sin(theta_i) x_m; rows along y are uniformly excited.
    """
    if len(profile) != panel.nx:
        raise DomainError(f"profile has {len(profile)} phases for {panel.nx} columns")
    k = TWO_PI / wavelength_of(f)
    x = panel.x_positions
    weights = np.exp(1j * (profile.array - k * math.sin(math.radians(deg_of(theta_i))) * x))
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    af_x = npoly.polyval(np.exp(1j * k * panel.dx * u), weights)
    af_y = npoly.polyval(np.exp(1j * k * panel.dy * v), np.ones(panel.ny, dtype=complex))
    return af_x * af_y


def array_factor(panel, profile, theta_obs, f, theta_i=0.0):
    """Array factor in the plane of incidence (phi = 0) at theta_obs degrees."""
    theta = np.radians(np.asarray(theta_obs, dtype=float))
    af = array_factor_uv(panel, profile, np.sin(theta), np.zeros_like(theta), f, theta_i)
    return complex(af) if np.ndim(af) == 0 else af


def tile_factor(panel, mx, my, u, v, f, theta_i=0.0):
    """Factor relating the base panel's array factor to its mx by my tiling."""
    k = TWO_PI / wavelength_of(f)
    s_i = math.sin(math.radians(deg_of(theta_i)))
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    t_x = npoly.polyval(np.exp(1j * k * panel.side_x * (u - s_i)), np.ones(mx, dtype=complex))
    t_y = npoly.polyval(np.exp(1j * k * panel.side_y * v), np.ones(my, dtype=complex))
    return t_x * t_y


# ============================================================================
# RADIATION PATTERN
# ============================================================================

@dataclass(frozen=True, eq=False)
class RadiationPattern:
    """
    Complex far-field amplitude on a regular (theta, phi) grid.

    Args:
        frequency: Frequency in Hz
        theta_deg: Strictly increasing signed theta samples
        phi_deg: Strictly increasing phi samples; [0.0] for a single cut
        values: Complex amplitudes, shape (len(theta_deg), len(phi_deg))
        normalization: "raw", "peak-normalized" or "directivity-scaled"
    """

    frequency: float
    theta_deg: np.ndarray
    phi_deg: np.ndarray
    values: np.ndarray
    normalization: str = "raw"

    def __post_init__(self):
        theta = np.asarray(self.theta_deg, dtype=float)
        phi = np.asarray(self.phi_deg, dtype=float)
        values = np.asarray(self.values, dtype=complex)
        object.__setattr__(self, "theta_deg", theta)
        object.__setattr__(self, "phi_deg", phi)
        object.__setattr__(self, "values", values)
        hz_of(self.frequency)
        if theta.ndim != 1 or theta.size < 2 or np.any(np.diff(theta) <= 0):
            raise PatternError("theta grid must be strictly increasing")
        if phi.ndim != 1 or phi.size < 1 or np.any(np.diff(phi) <= 0):
            raise PatternError("phi grid must be strictly increasing")
        if values.shape != (theta.size, phi.size):
            raise PatternError(
                f"values shape {values.shape} does not match grid "
                f"({theta.size}, {phi.size})"
            )
        if self.normalization not in NORMALIZATIONS:
            raise PatternError(f"unknown normalization {self.normalization!r}")

    @property
    def power(self):
        return np.abs(self.values) ** 2

    @property
    def is_3d(self):
        return self.phi_deg.size > 1

    @property
    def covers_visible_range(self):
        return self.theta_deg[0] <= -90.0 + 1e-9 and self.theta_deg[-1] >= 90.0 - 1e-9

    @property
    def has_phi_closure(self):
        """True when phi = 180 can be wrapped onto (-theta, phi = 0)."""
        return (
            self.is_3d
            and abs(self.phi_deg[0]) < 1e-9
            and self.phi_deg[-1] < 180.0
            and np.allclose(self.theta_deg, -self.theta_deg[::-1], atol=1e-9)
        )

    def cut_index(self, phi_deg=0.0):
        matches = np.flatnonzero(np.isclose(self.phi_deg, phi_deg, atol=1e-9))
        if matches.size == 0:
            raise PatternError(f"pattern has no cut at phi = {phi_deg} deg")
        return int(matches[0])

    def cut(self, phi_deg=0.0):
        """(theta_deg, power) along one phi cut."""
        return self.theta_deg, self.power[:, self.cut_index(phi_deg)]

    def with_values(self, values, normalization):
        return replace(self, values=values, normalization=normalization)

    def peak_normalized(self):
        peak = np.max(np.abs(self.values))
        if peak == 0:
            raise DomainError("cannot normalize an all-zero pattern")
        return self.with_values(self.values / peak, "peak-normalized")

    def directivity_scaled(self):
        """Rescale so that |F|^2 equals the directivity D(theta, phi)."""
        scale = 4.0 * math.pi / radiated_power(self)
        return self.with_values(self.values * math.sqrt(scale), "directivity-scaled")

    def _extended(self, field):
        if self.has_phi_closure:
            phi = np.append(self.phi_deg, 180.0)
            return phi, np.hstack([field, field[::-1, :1]])
        return self.phi_deg, field

    @cached_property
    def _power_interpolator(self):
        phi, power = self._extended(self.power)
        if phi.size == 1:
            return None
        return RegularGridInterpolator(
            (self.theta_deg, phi), power, bounds_error=False, fill_value=None
        )

    @cached_property
    def _field_interpolators(self):
        phi, field = self._extended(self.values)
        if phi.size == 1:
            return None
        return (
            RegularGridInterpolator((self.theta_deg, phi), field.real, bounds_error=False, fill_value=None),
            RegularGridInterpolator((self.theta_deg, phi), field.imag, bounds_error=False, fill_value=None),
        )

    def gain_at(self, theta_deg, phi_deg=0.0):
        """Power |F|^2 at (theta, phi), bilinear in power between samples."""
        theta = np.asarray(theta_deg, dtype=float)
        phi = np.broadcast_to(np.asarray(phi_deg, dtype=float), theta.shape)
        interp = self._power_interpolator
        if interp is None:
            out = np.interp(theta, self.theta_deg, self.power[:, 0])
        else:
            out = interp(np.stack([theta, phi], axis=-1))
        out = np.reshape(out, theta.shape)
        return float(out) if theta.ndim == 0 else out

    def sample(self, theta_deg, phi_deg):
        """
        Complex amplitude at (theta, phi).

        A single cut is read with signed theta on its own plane; off the cut
        each direction takes the value at the same polar angle on its side of
        the plane normal to the cut.
        """
        theta = np.asarray(theta_deg, dtype=float)
        phi = np.broadcast_to(np.asarray(phi_deg, dtype=float), theta.shape)
        interps = self._field_interpolators
        if interps is None:
            col = self.values[:, 0]
            side = np.cos(np.radians(phi - self.phi_deg[0]))
            t = np.where(side >= 0.0, theta, -theta)
            out = np.interp(t, self.theta_deg, col.real) + 1j * np.interp(t, self.theta_deg, col.imag)
        else:
            pts = np.stack([theta, phi], axis=-1)
            out = interps[0](pts) + 1j * interps[1](pts)
        out = np.reshape(out, theta.shape)
        return complex(out) if theta.ndim == 0 else out

    def gain_linear(self, u, v, w):
        """|F|^2 toward a local direction; zero behind the panel (w <= 0)."""
        if w <= 0.0:
            return 0.0
        if not self.is_3d:
            return self.gain_at(math.degrees(math.atan2(u, w)))
        theta, phi = direction_to_grid(u, v, w)
        return self.gain_at(theta, phi)


def direction_to_grid(u, v, w):
    """Map local direction cosines to the signed (theta, phi) grid convention."""
    theta = math.degrees(math.acos(max(-1.0, min(1.0, w))))
    phi = math.degrees(math.atan2(v, u))
    if phi < 0.0:
        phi += 180.0
        theta = -theta
    if phi >= 180.0:
        phi -= 180.0
        theta = -theta
    return theta, phi


# ============================================================================
# SYNTHESIS
# ============================================================================

def angular_grid(theta_step_deg=THETA_STEP_DEG, phi_step_deg=PHI_STEP_DEG, cut_only=False):
    """Signed theta in [-90, 90] and phi in [0, 180) (or the phi = 0 cut)."""
    n_theta = int(round(180.0 / theta_step_deg)) + 1
    theta = np.linspace(-90.0, 90.0, n_theta)
    if cut_only:
        return theta, np.array([0.0])
    n_phi = int(round(180.0 / phi_step_deg))
    return theta, np.arange(n_phi) * (180.0 / n_phi)


def element_amplitude(element, theta_deg, phi_deg):
    """
    Embedded element amplitude on a grid.

    element is "isotropic", "cosine" (cos taper in the vertical plane,
    uniform across the plane of incidence) or an imported RadiationPattern.
    """
    th = np.radians(theta_deg)
    ph = np.radians(phi_deg)
    if isinstance(element, RadiationPattern):
        if not element.covers_visible_range:
            raise PatternError("element pattern must cover theta from -90 to 90 deg")
        return element.sample(theta_deg, phi_deg)
    if element == "isotropic":
        return np.ones(np.broadcast(th, ph).shape, dtype=complex)
    if element == "cosine":
        v = np.sin(th) * np.sin(ph)
        return np.sqrt(np.clip(1.0 - v ** 2, 0.0, None)).astype(complex)
    raise PatternError(f"unknown element model {element!r}; choose from {ELEMENT_MODELS}")


def synthesize_pattern(panel, element_pattern, f, profile=None, theta_i=0.0,
                       theta_step_deg=THETA_STEP_DEG, phi_step_deg=PHI_STEP_DEG,
                       cut_only=False):
    """
    Element pattern times array factor over the front half-space.

    Args:
        panel: PanelSpec
        element_pattern: "cosine", "isotropic" or a RadiationPattern
        f: Frequency of evaluation
        profile: PhaseProfile, defaults to the quantized design profile
        theta_i: Illumination angle in degrees
        cut_only: Only evaluate the phi = 0 plane of incidence

    Returns:
        RadiationPattern tagged "raw"
    """
    if profile is None:
        profile = design_profile(panel)
    theta, phi = angular_grid(theta_step_deg, phi_step_deg, cut_only)
    th_grid, ph_grid = np.meshgrid(theta, phi, indexing="ij")
    th = np.radians(th_grid)
    ph = np.radians(ph_grid)
    u = np.sin(th) * np.cos(ph)
    v = np.sin(th) * np.sin(ph)
    values = element_amplitude(element_pattern, th_grid, ph_grid)
    values = values * array_factor_uv(panel, profile, u, v, f, theta_i)
    logger.debug(
        "synthesized %dx%d pattern at %.3f GHz on %s grid",
        panel.nx, panel.ny, hz_of(f) / 1e9, values.shape,
    )
    return RadiationPattern(hz_of(f), theta, phi, values, "raw")


@lru_cache(maxsize=64)
def reflector_patterns(panel, f, element="cosine"):
    """
    The two patterns a reflector node needs at one frequency.

    Returns:
        (rx_pattern, tx_pattern), directivity-scaled. tx_pattern is the
        design-profile response to normal incidence (beam at the design
        angle at f0); rx_pattern is the response to incidence from minus
        the design angle (beam at 0 deg at f0).
    """
    profile = design_profile(panel)
    design = panel.supercell.design_angle
    tx = synthesize_pattern(panel, element, f, profile, theta_i=0.0)
    rx = synthesize_pattern(panel, element, f, profile, theta_i=-design)
    return rx.directivity_scaled(), tx.directivity_scaled()


# ============================================================================
# FIGURES OF MERIT
# ============================================================================

def radiated_power(pattern):
    """Integral of |F|^2 over the front half-space (trapezoidal, radians)."""
    if not pattern.covers_visible_range:
        raise PatternError("pattern must cover theta from -90 to 90 deg")
    theta = np.radians(pattern.theta_deg)
    weight = np.abs(np.sin(theta))
    if not pattern.is_3d:
        # Axisymmetric estimate from a single cut.
        total = math.pi * trapezoid(pattern.power[:, 0] * weight, theta)
    else:
        if not pattern.has_phi_closure:
            raise PatternError("3-D pattern must use signed theta and phi in [0, 180)")
        phi_deg, power = pattern._extended(pattern.power)
        inner = trapezoid(power * weight[:, None], np.radians(phi_deg), axis=1)
        total = trapezoid(inner, theta)
    if not total > 0:
        raise DomainError("pattern radiates no power")
    return float(total)


def directivity(pattern):
    """Peak directivity in dBi, zero radiation behind the panel."""
    peak = float(np.max(pattern.power))
    if peak == 0:
        raise DomainError("directivity of an all-zero pattern is undefined")
    return 10.0 * math.log10(4.0 * math.pi * peak / radiated_power(pattern))


def gain_from_directivity(d_dbi, e_cd=PANEL_EFFICIENCY):
    """G = e_cd * D, in dB."""
    if not 0.0 < e_cd <= 1.0:
        raise DomainError(f"efficiency must lie in (0, 1], got {e_cd}")
    if e_cd == 1.0:
        return float(d_dbi)
    return float(d_dbi) + 10.0 * math.log10(e_cd)


def peak_angle(pattern, cut_phi=0.0):
    theta, power = pattern.cut(cut_phi)
    return float(theta[int(np.argmax(power))])


def hpbw(pattern, cut_phi=0.0):
    """Width in degrees between the -3 dB crossings around the cut's peak."""
    theta, power = pattern.cut(cut_phi)
    i_peak = int(np.argmax(power))
    if power[i_peak] == 0:
        raise PatternError("cut carries no power")
    rel = power / power[i_peak]
    level = 10.0 ** (HPBW_LEVEL_DB / 10.0)

    def crossing(step):
        i = i_peak
        while 0 <= i + step < rel.size:
            j = i + step
            if rel[j] <= level:
                return theta[j] + (level - rel[j]) / (rel[i] - rel[j]) * (theta[i] - theta[j])
            i = j
        raise PatternError("the -3 dB level is not crossed within the cut")

    return float(crossing(1) - crossing(-1))
