"""
scene.py - Planar-facet propagation environment.

Handles:
- Materials with the two-parameter conductivity model sigma(f) = a * f_GHz ** b
- Convex planar facets (containment, segment intersection, mirroring)
- Scene loading, validation and saving (JSON)
- Line-of-sight checks and Fresnel reflection coefficients
"""

import json
import logging
import math
import os
from dataclasses import dataclass, field

import numpy as np

from constants import (
    GHZ, VACUUM_PERMITTIVITY, ENDPOINT_TOLERANCE_M, COPLANAR_TOLERANCE_M,
    POLARIZATIONS, MATERIALS,
)
from errors import GeometryError, ParseError, DomainError
from units import hz_of

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Material:
    """
    Facet material.

    Args:
        name: Identifier referenced by facets
        eps_r: Real relative permittivity
        sigma_a, sigma_b: Conductivity sigma(f) = sigma_a * f_GHz ** sigma_b in S/m
        absorber: Perfect absorber (no reflection, still opaque)
    """

    name: str
    eps_r: float = 1.0
    sigma_a: float = 0.0
    sigma_b: float = 0.0
    absorber: bool = False

    def __post_init__(self):
        if self.eps_r < 1.0:
            raise GeometryError(f"material {self.name!r}: eps_r must be >= 1")
        if self.sigma_a < 0.0:
            raise GeometryError(f"material {self.name!r}: conductivity must be >= 0")

    def conductivity(self, f):
        return self.sigma_a * (hz_of(f) / GHZ) ** self.sigma_b

    def permittivity(self, f):
        """Complex relative permittivity eps_r - j sigma / (2 pi f eps_0)."""
        f_hz = hz_of(f)
        return complex(self.eps_r, -self.conductivity(f_hz) / (2.0 * math.pi * f_hz * VACUUM_PERMITTIVITY))

    def to_dict(self):
        return {
            "name": self.name,
            "eps_r": float(self.eps_r),
            "sigma_a": float(self.sigma_a),
            "sigma_b": float(self.sigma_b),
            "absorber": bool(self.absorber),
        }


class Facet:
    """
    Convex planar polygon.

    Args:
        facet_id: Unique identifier, used for deterministic path ordering
        vertices: (n, 3) array in meters, n >= 3, in boundary order
        material: Material name
    """

    def __init__(self, facet_id, vertices, material):
        self.id = str(facet_id)
        self.material = material
        self.vertices = np.asarray(vertices, dtype=float)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 3 or len(self.vertices) < 3:
            raise GeometryError(f"facet {self.id!r} needs at least 3 vertices of (x, y, z)")

        # Newell normal
        v = self.vertices
        nxt = np.roll(v, -1, axis=0)
        normal = np.array([
            np.sum((v[:, 1] - nxt[:, 1]) * (v[:, 2] + nxt[:, 2])),
            np.sum((v[:, 2] - nxt[:, 2]) * (v[:, 0] + nxt[:, 0])),
            np.sum((v[:, 0] - nxt[:, 0]) * (v[:, 1] + nxt[:, 1])),
        ])
        norm = np.linalg.norm(normal)
        if norm < 1e-12:
            raise GeometryError(f"facet {self.id!r} is degenerate (zero area)")
        self.normal = normal / norm
        self.centroid = v.mean(axis=0)
        self.offset = float(self.normal @ self.centroid)

        off_plane = np.abs(v @ self.normal - self.offset)
        if np.max(off_plane) > COPLANAR_TOLERANCE_M:
            raise GeometryError(
                f"facet {self.id!r} is not planar "
                f"(vertex off plane by {np.max(off_plane):.3g} m)"
            )
        self._edges = nxt - v

    def __repr__(self):
        return f"Facet({self.id!r}, {len(self.vertices)} vertices, {self.material!r})"

    def signed_distance(self, point):
        return float(self.normal @ point - self.offset)

    def mirror(self, point):
        """Image of a point in the facet's plane."""
        return point - 2.0 * self.signed_distance(point) * self.normal

    def contains(self, point, tol=1e-9):
        """True if an in-plane point lies inside (or on the border of) the polygon."""
        rel = point - self.vertices
        cross = np.cross(self._edges, rel) @ self.normal
        return bool(np.all(cross >= -tol) or np.all(cross <= tol))

    def intersect(self, a, b):
        """
        Crossing of segment a-b with the facet.

        Returns:
            (t, point) with 0 < t < 1, or None
        """
        d = b - a
        denom = float(self.normal @ d)
        if abs(denom) < 1e-15:
            return None
        t = (self.offset - float(self.normal @ a)) / denom
        if not 0.0 < t < 1.0:
            return None
        point = a + t * d
        if not self.contains(point):
            return None
        return t, point

    def to_dict(self):
        return {
            "id": self.id,
            "material": self.material,
            "vertices": [[float(c) for c in vertex] for vertex in self.vertices],
        }


@dataclass
class Scene:
    """Immutable-after-load set of facets, materials and named anchors."""

    facets: list = field(default_factory=list)
    materials: dict = field(default_factory=dict)
    anchors: dict = field(default_factory=dict)
    name: str = "scene"

    def __post_init__(self):
        seen = set()
        for facet in self.facets:
            if facet.id in seen:
                raise GeometryError(f"duplicate facet id {facet.id!r}")
            seen.add(facet.id)
            if facet.material not in self.materials:
                raise GeometryError(f"facet {facet.id!r} uses unknown material {facet.material!r}")
        self.facets = tuple(self.facets)

    def material_of(self, facet):
        return self.materials[facet.material]

    @property
    def reflective_facets(self):
        return tuple(f for f in self.facets if not self.materials[f.material].absorber)

    def anchor(self, name, key="position"):
        try:
            return np.asarray(self.anchors[name][key], dtype=float)
        except KeyError:
            raise GeometryError(f"scene has no anchor {name}.{key}") from None

    def with_facets(self, extra):
        return Scene(list(self.facets) + list(extra), dict(self.materials), dict(self.anchors), self.name)

    def to_dict(self):
        return {
            "name": self.name,
            "materials": [m.to_dict() for m in self.materials.values()],
            "facets": [f.to_dict() for f in self.facets],
            "anchors": self.anchors,
        }


# ============================================================================
# FILE I/O
# ============================================================================

def _material_from(entry, source):
    try:
        known = MATERIALS.get(entry["name"], {})
        return Material(
            name=entry["name"],
            eps_r=float(entry.get("eps_r", known.get("eps_r", 1.0))),
            sigma_a=float(entry.get("sigma_a", known.get("sigma_a", 0.0))),
            sigma_b=float(entry.get("sigma_b", known.get("sigma_b", 0.0))),
            absorber=bool(entry.get("absorber", False)),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise GeometryError(f"{source}: invalid material entry {entry!r}: {e}") from None


def scene_from_dict(data, source="<scene>"):
    """Build and validate a Scene from parsed JSON."""
    if not isinstance(data, dict):
        raise GeometryError(f"{source}: top level must be an object")
    materials = {}
    for entry in data.get("materials", []):
        material = _material_from(entry, source)
        materials[material.name] = material
    facets = []
    for i, entry in enumerate(data.get("facets", [])):
        try:
            facets.append(Facet(entry.get("id", f"f{i}"), entry["vertices"], entry["material"]))
        except (KeyError, TypeError, ValueError) as e:
            raise GeometryError(f"{source}: facet #{i} malformed: {e}") from None
    return Scene(facets, materials, data.get("anchors", {}), data.get("name", "scene"))


def load_scene(path):
    """Load a JSON scene file; parse errors carry the line number."""
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(path, e.lineno, e.msg) from None
    scene = scene_from_dict(data, os.path.basename(path))
    logger.info("loaded scene %r: %d facets, %d materials", scene.name, len(scene.facets), len(scene.materials))
    return scene


def dump_scene(scene):
    return json.dumps(scene.to_dict(), indent=2) + "\n"


def save_scene(scene, path):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(dump_scene(scene))


# ============================================================================
# VISIBILITY AND REFLECTION
# ============================================================================

def los_clear(scene, a, b):
    """True iff segment a-b crosses no facet away from its endpoints."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    length = float(np.linalg.norm(b - a))
    if length == 0.0:
        raise DomainError("line-of-sight endpoints coincide")
    lo = ENDPOINT_TOLERANCE_M / length
    hi = 1.0 - lo
    for facet in scene.facets:
        hit = facet.intersect(a, b)
        if hit is not None and lo < hit[0] < hi:
            return False
    return True


def fresnel_coefficient(material, incidence_deg, f, polarization="TE"):
    """
    Fresnel reflection coefficient from air onto a lossy half-space.

    Args:
        material: Material
        incidence_deg: Angle from the surface normal, 0 <= angle < 90
        f: Frequency
        polarization: "TE" (E perpendicular to the plane of incidence) or "TM"
    """
    if polarization not in POLARIZATIONS:
        raise DomainError(f"polarization must be one of {POLARIZATIONS}, got {polarization!r}")
    if not 0.0 <= incidence_deg <= 90.0:
        raise DomainError(f"incidence angle must lie in [0, 90], got {incidence_deg}")
    if material.absorber:
        return 0j
    eps = material.permittivity(f)
    cos_t = math.cos(math.radians(incidence_deg))
    sin2 = math.sin(math.radians(incidence_deg)) ** 2
    root = np.sqrt(complex(eps - sin2))
    if polarization == "TE":
        return complex((cos_t - root) / (cos_t + root))
    return complex((eps * cos_t - root) / (eps * cos_t + root))


def effective_reflection(material, direction, normal, f, field_axis=(0.0, 0.0, 1.0)):
    """
    Reflection of a linearly polarized ray, mixing TE and TM by field projection.

    The power reflectivity is |G_TE|^2 w + |G_TM|^2 (1 - w), where w is the
    squared projection of the field on the TE direction; the phase follows
    the dominant component.
    """
    if material.absorber:
        return 0j
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    n = np.asarray(normal, dtype=float)
    cos_i = min(1.0, abs(float(d @ n)))
    angle = math.degrees(math.acos(cos_i))
    g_te = fresnel_coefficient(material, angle, f, "TE")
    g_tm = fresnel_coefficient(material, angle, f, "TM")

    s_perp = np.cross(d, n)
    s_norm = np.linalg.norm(s_perp)
    e = np.asarray(field_axis, dtype=float)
    e = e - (e @ d) * d
    e_norm = np.linalg.norm(e)
    if s_norm < 1e-12 or e_norm < 1e-12:
        w = 1.0
    else:
        w = float((e / e_norm) @ (s_perp / s_norm)) ** 2
    magnitude = math.sqrt(abs(g_te) ** 2 * w + abs(g_tm) ** 2 * (1.0 - w))
    dominant = g_te if w >= 0.5 else g_tm
    phase = dominant / abs(dominant) if dominant != 0 else 1.0
    return complex(magnitude * phase)
