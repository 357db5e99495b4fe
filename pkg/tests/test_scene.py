"""Facets, scene files, visibility and Fresnel reflection."""

import json
import math
import os

import numpy as np
import pytest

from errors import DomainError, GeometryError, ParseError
from scene import (
    Facet, Material, Scene, dump_scene, effective_reflection, fresnel_coefficient,
    load_scene, los_clear, save_scene, scene_from_dict,
)

F0 = 26e9


def test_facet_normal_and_mirror():
    floor = Facet("floor", [[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]], "concrete")
    np.testing.assert_allclose(floor.normal, [0, 0, 1])
    np.testing.assert_allclose(floor.mirror(np.array([0.3, 0.4, 2.0])), [0.3, 0.4, -2.0])
    assert floor.signed_distance(np.array([5.0, 5.0, -1.5])) == pytest.approx(-1.5)


def test_facet_containment_and_intersection():
    wall = Facet("wall", [[2, -1, 0], [2, 1, 0], [2, 1, 3], [2, -1, 3]], "concrete")
    assert wall.contains(np.array([2.0, 0.0, 1.5]))
    assert not wall.contains(np.array([2.0, 1.5, 1.5]))
    t, point = wall.intersect(np.array([0.0, 0.0, 1.0]), np.array([4.0, 0.0, 1.0]))
    assert t == pytest.approx(0.5)
    np.testing.assert_allclose(point, [2.0, 0.0, 1.0])
    assert wall.intersect(np.array([0.0, 0.0, 1.0]), np.array([1.0, 0.0, 1.0])) is None
    assert wall.intersect(np.array([0.0, 5.0, 1.0]), np.array([4.0, 5.0, 1.0])) is None


def test_facet_validation():
    with pytest.raises(GeometryError):
        Facet("line", [[0, 0, 0], [1, 0, 0]], "concrete")
    with pytest.raises(GeometryError):
        Facet("flat", [[0, 0, 0], [1, 0, 0], [2, 0, 0]], "concrete")
    with pytest.raises(GeometryError):
        Facet("bent", [[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0.5]], "concrete")


def test_scene_validation(concrete):
    floor = Facet("floor", [[0, 0, 0], [1, 0, 0], [1, 1, 0]], "concrete")
    with pytest.raises(GeometryError):
        Scene([floor, floor], {"concrete": concrete})
    with pytest.raises(GeometryError):
        Scene([floor], {})
    with pytest.raises(GeometryError):
        Scene([floor], {"concrete": concrete}).anchor("tx")


def test_material_validation():
    with pytest.raises(GeometryError):
        Material("vacuum-ish", eps_r=0.5)
    with pytest.raises(GeometryError):
        Material("odd", sigma_a=-1.0)


def test_material_conductivity_model(concrete):
    assert concrete.conductivity(F0) == pytest.approx(0.0326 * 26 ** 0.8095)
    eps = concrete.permittivity(F0)
    assert eps.real == pytest.approx(5.31)
    assert eps.imag == pytest.approx(-0.3150, abs=1e-3)


def test_named_material_takes_library_values():
    scene = scene_from_dict({
        "materials": [{"name": "concrete"}, {"name": "concrete-wet", "eps_r": 9.0}],
        "facets": [],
    })
    assert scene.materials["concrete"].eps_r == pytest.approx(5.31)
    assert scene.materials["concrete"].sigma_b == pytest.approx(0.8095)
    assert scene.materials["concrete-wet"].sigma_a == 0.0


def test_shipped_scene(data_dir):
    scene = load_scene(os.path.join(data_dir, "auditorium.scene"))
    assert scene.name == "auditorium"
    assert len(scene.facets) == 7
    assert len(scene.reflective_facets) == 6
    np.testing.assert_allclose(scene.anchor("ar"), [0.0, 0.0, 1.5])
    np.testing.assert_allclose(scene.anchor("tx"), [5.5, 0.0, 1.5])
    assert scene.anchors["rx_arc"]["radius"] == 7.0
    screen = next(f for f in scene.facets if f.id == "absorber")
    width = np.linalg.norm(screen.vertices[0] - screen.vertices[1])
    assert width == pytest.approx(2.0, abs=1e-3)


def test_shipped_scene_round_trips_byte_exact(data_dir, tmp_path):
    path = os.path.join(data_dir, "auditorium.scene")
    with open(path, encoding="utf-8") as f:
        original = f.read()
    scene = load_scene(path)
    assert dump_scene(scene) == original
    out = tmp_path / "copy.scene"
    save_scene(scene, out)
    assert out.read_text(encoding="utf-8") == original


def test_absorber_blocks_direct_link_only(data_dir):
    scene = load_scene(os.path.join(data_dir, "auditorium.scene"))
    ar, tx = scene.anchor("ar"), scene.anchor("tx")
    assert los_clear(scene, tx, ar)
    for angle in (55, 60, 65, 70, 75, 80, 85):
        a = math.radians(angle)
        rx = np.array([7 * math.cos(a), 7 * math.sin(a), 1.5])
        assert not los_clear(scene, tx, rx)
        assert los_clear(scene, ar, rx)


def test_scene_parse_error_carries_line(tmp_path):
    bad = tmp_path / "broken.scene"
    bad.write_text('{\n  "name": "x",\n  "facets": [,]\n}\n', encoding="utf-8")
    with pytest.raises(ParseError) as info:
        load_scene(bad)
    assert info.value.line == 3


def test_scene_from_dict_rejects_malformed_facet():
    data = {"materials": [{"name": "m"}], "facets": [{"id": "a", "material": "m"}]}
    with pytest.raises(GeometryError):
        scene_from_dict(data)
    with pytest.raises(GeometryError):
        scene_from_dict(json.loads("[]"))


def test_los_clear(blocked_scene, origin):
    assert not los_clear(blocked_scene, origin, np.array([2.0, 0.0, 0.0]))
    assert los_clear(blocked_scene, origin, np.array([0.0, 2.0, 0.0]))
    # Endpoints on the facet itself do not count as blocked.
    assert los_clear(blocked_scene, origin, np.array([1.0, 0.0, 0.0]))
    with pytest.raises(DomainError):
        los_clear(blocked_scene, origin, origin)


def test_fresnel_normal_and_grazing(concrete):
    te = fresnel_coefficient(concrete, 0.0, F0, "TE")
    tm = fresnel_coefficient(concrete, 0.0, F0, "TM")
    assert abs(te) == pytest.approx(0.395, abs=2e-3)
    assert abs(tm) == pytest.approx(abs(te))
    assert tm == pytest.approx(-te)
    assert fresnel_coefficient(concrete, 90.0, F0, "TE") == pytest.approx(-1.0)


def test_fresnel_domain(concrete):
    with pytest.raises(DomainError):
        fresnel_coefficient(concrete, 95.0, F0)
    with pytest.raises(DomainError):
        fresnel_coefficient(concrete, 30.0, F0, "circular")
    assert fresnel_coefficient(Material("foam", absorber=True), 30.0, F0) == 0j


def test_effective_reflection_selects_polarization(concrete):
    wall_normal = np.array([1.0, 0.0, 0.0])
    horizontal = np.array([-1.0, 1.0, 0.0])
    te = fresnel_coefficient(concrete, 45.0, F0, "TE")
    assert effective_reflection(concrete, horizontal, wall_normal, F0) == pytest.approx(te)

    floor_normal = np.array([0.0, 0.0, 1.0])
    downward = np.array([1.0, 0.0, -1.0])
    tm = fresnel_coefficient(concrete, 45.0, F0, "TM")
    assert effective_reflection(concrete, downward, floor_normal, F0) == pytest.approx(tm)
