"""Image-method path enumeration and hop power."""

import math
import os

import numpy as np
import pytest

from antenna import AntennaNode, ARNode, IsotropicPattern
from errors import DomainError
from linkbudget import free_space_loss_db
from pattern import RadiationPattern, angular_grid
from raytracer import HopPower, PropagationPath, hop_power, reflect_paths, simulate_ar_link
from scene import Facet, Scene, load_scene

F0 = 26e9


def isotropic(position, target, name):
    return AntennaNode.facing(position, target, pattern=IsotropicPattern(), name=name)


def test_first_order_floor_bounce(slab_scene):
    a = np.array([0.0, 0.0, 1.0])
    b = np.array([2.0, 0.0, 1.0])
    paths = reflect_paths(slab_scene, a, b, max_order=1)
    assert [p.facet_ids for p in paths] == [(), ("ceiling",), ("floor",)]
    floor = paths[2]
    np.testing.assert_allclose(floor.points[1], [1.0, 0.0, 0.0])
    assert floor.length == pytest.approx(2 * math.sqrt(2))
    assert paths[0].length == pytest.approx(2.0)
    # Ceiling at z = 3: image at z = 5.
    assert paths[1].length == pytest.approx(math.sqrt(4 + 16))


def test_second_order_alternates_facets(slab_scene):
    a = np.array([0.0, 0.0, 1.0])
    b = np.array([4.0, 0.0, 1.0])
    paths = reflect_paths(slab_scene, a, b, max_order=2)
    second = [p for p in paths if p.order == 2]
    assert [p.facet_ids for p in second] == [("ceiling", "floor"), ("floor", "ceiling")]
    for path in second:
        assert path.length == pytest.approx(math.sqrt(16 + 36))
    assert [p.order for p in paths] == sorted(p.order for p in paths)


def test_max_order_zero_is_direct_only(slab_scene):
    paths = reflect_paths(slab_scene, [0.0, 0.0, 1.0], [2.0, 0.0, 1.0], max_order=0)
    assert len(paths) == 1 and paths[0].order == 0


def test_max_order_range(slab_scene):
    with pytest.raises(DomainError):
        reflect_paths(slab_scene, [0, 0, 1], [1, 0, 1], max_order=4)
    with pytest.raises(DomainError):
        reflect_paths(slab_scene, [0, 0, 1], [1, 0, 1], max_order=-1)


def test_absorber_occludes_without_reflecting(blocked_scene):
    a = np.array([0.0, 0.0, 0.0])
    assert reflect_paths(blocked_scene, a, np.array([2.0, 0.0, 0.0]), max_order=3) == []
    # Same side of the screen: direct path only, the screen never reflects.
    paths = reflect_paths(blocked_scene, a, np.array([0.0, 0.5, 0.0]), max_order=3)
    assert [p.order for p in paths] == [0]


def test_reflection_coefficients_with_frequency(slab_scene):
    a, b = [0.0, 0.0, 1.0], [2.0, 0.0, 1.0]
    ideal = reflect_paths(slab_scene, a, b, 1)
    assert all(p.amplitude_factor == 1 for p in ideal)
    # A lossless eps_r = 1 "metal" placeholder reflects nothing at oblique incidence.
    lossy = reflect_paths(slab_scene, a, b, 1, f=F0)
    assert abs(lossy[2].amplitude_factor) == pytest.approx(0.0, abs=1e-12)


def test_path_helpers():
    path = PropagationPath((np.zeros(3), np.array([1.0, 1.0, 0.0]), np.array([2.0, 0.0, 0.0])),
                           ("wall",), (0.5j,))
    np.testing.assert_allclose(path.departure, np.array([1.0, 1.0, 0.0]) / math.sqrt(2))
    np.testing.assert_allclose(path.arrival, np.array([-1.0, 1.0, 0.0]) / math.sqrt(2))
    back = path.reversed()
    np.testing.assert_allclose(back.points[0], [2.0, 0.0, 0.0])
    assert back.length == pytest.approx(path.length)
    assert path.sort_key() == (1, ("wall",))


def test_direct_hop_is_friis(blocked_scene):
    a = np.array([0.0, 0.0, 0.0])
    b = np.array([0.0, 3.0, 0.0])
    tx, rx = isotropic(a, b, "a"), isotropic(b, a, "b")
    hop = hop_power(tx, rx, reflect_paths(blocked_scene, a, b, 0), F0)
    assert hop.n_paths == 1
    assert hop.dbm == pytest.approx(-free_space_loss_db(3.0, F0))


def test_coherent_single_path_matches_incoherent(blocked_scene):
    a, b = np.zeros(3), np.array([0.0, 3.0, 0.0])
    tx, rx = isotropic(a, b, "a"), isotropic(b, a, "b")
    paths = reflect_paths(blocked_scene, a, b, 0)
    assert hop_power(tx, rx, paths, F0, coherent=True).power_w == pytest.approx(
        hop_power(tx, rx, paths, F0).power_w)


def test_coherent_sum_is_bounded(slab_scene):
    a, b = np.array([0.0, 0.0, 1.0]), np.array([2.0, 0.0, 1.0])
    tx, rx = isotropic(a, b, "a"), isotropic(b, a, "b")
    paths = reflect_paths(slab_scene, a, b, 1)
    incoherent = hop_power(tx, rx, paths, F0).power_w
    coherent = hop_power(tx, rx, paths, F0, coherent=True).power_w
    amplitudes = [math.sqrt(hop_power(tx, rx, [p], F0).power_w) for p in paths]
    assert 0.0 <= coherent <= sum(amplitudes) ** 2 * (1 + 1e-12)
    assert incoherent == pytest.approx(sum(x ** 2 for x in amplitudes))


def test_hop_without_paths_is_zero(caplog):
    tx = isotropic(np.zeros(3), np.ones(3), "a")
    rx = isotropic(np.ones(3), np.zeros(3), "b")
    with caplog.at_level("WARNING"):
        hop = hop_power(tx, rx, [], F0)
    assert hop == HopPower(0.0, 0)
    assert hop.dbm == -math.inf
    assert "no propagation path" in caplog.text


def flat_reflector(f_hz):
    theta, phi = angular_grid(5.0, 30.0)
    flat = RadiationPattern(f_hz, theta, phi, np.ones((theta.size, phi.size)), "directivity-scaled")
    return ARNode([0, 0, 0], [1, 0, 0], [0, 1, 0], flat, flat, e_cd=1.0)


def test_ar_link_is_product_of_hops(campaign_params):
    empty = Scene([], {}, {}, "empty")
    ar = flat_reflector(F0)
    a = math.radians(65)
    tx = isotropic([5.5, 0.0, 0.0], ar.position, "tx")
    rx = isotropic([7 * math.cos(a), 7 * math.sin(a), 0.0], ar.position, "rx")
    bare = simulate_ar_link(empty, tx, ar, rx, F0, 0)
    assert bare == pytest.approx(-free_space_loss_db(5.5, F0) - free_space_loss_db(7.0, F0))
    chained = simulate_ar_link(empty, tx, ar, rx, F0, 0, campaign_params)
    assert chained == pytest.approx(bare + 6.0 - 2.5 + 19.9)


def test_ar_link_rejects_other_frequency():
    empty = Scene([], {}, {}, "empty")
    ar = flat_reflector(F0)
    tx = isotropic([5.5, 0.0, 0.0], ar.position, "tx")
    rx = isotropic([0.0, 7.0, 0.0], ar.position, "rx")
    with pytest.raises(DomainError):
        simulate_ar_link(empty, tx, ar, rx, 25e9, 0)


# ============================================================================
# SHIPPED AUDITORIUM
# ============================================================================

@pytest.fixture(scope="module")
def auditorium():
    from constants import DATA_DIR
    return load_scene(os.path.join(DATA_DIR, "auditorium.scene"))


def test_first_order_bounces_match_mirror_images(auditorium):
    tx = auditorium.anchor("tx")
    ar = auditorium.anchor("ar")
    facets = {facet.id: facet for facet in auditorium.facets}
    first = [p for p in reflect_paths(auditorium, tx, ar, 1) if p.order == 1]
    assert {p.facet_ids[0] for p in first} >= {"floor", "ceiling"}
    for path in first:
        v = facets[path.facet_ids[0]].vertices
        n = np.cross(v[1] - v[0], v[2] - v[0])
        n /= np.linalg.norm(n)
        image = ar - 2.0 * ((ar - v[0]) @ n) * n
        t = ((v[0] - tx) @ n) / ((image - tx) @ n)
        np.testing.assert_allclose(path.points[1], tx + t * (image - tx), rtol=0, atol=1e-9)


def test_hop_power_is_reciprocal(auditorium):
    a = auditorium.anchor("tx")
    b = auditorium.anchor("ar") + np.array([2.0, 3.0, 0.0])
    paths = reflect_paths(auditorium, a, b, 2, F0)
    assert len(reflect_paths(auditorium, b, a, 2, F0)) == len(paths)
    tx = AntennaNode.facing(a, b, name="tx")
    rx = isotropic(b, a, "rx")
    back = [p.reversed() for p in paths]
    # Coherent sums see path lengths summed in the other order, a last-bit phase change.
    for coherent, rel in ((False, 1e-12), (True, 1e-9)):
        forward = hop_power(tx, rx, paths, F0, coherent).power_w
        reverse = hop_power(rx, tx, back, F0, coherent).power_w
        assert reverse == pytest.approx(forward, rel=rel)


def test_added_absorber_never_adds_paths(auditorium):
    tx = auditorium.anchor("tx")
    ar = auditorium.anchor("ar")
    before = reflect_paths(auditorium, tx, ar, 2)
    screen = Facet("screen", [[3, -1, 0.5], [3, 1, 0.5], [3, 1, 2.5], [3, -1, 2.5]], "absorber")
    after = reflect_paths(auditorium.with_facets([screen]), tx, ar, 2)
    assert len(after) < len(before)
    assert all(p.order > 0 for p in after)
    assert {p.facet_ids for p in after} <= {p.facet_ids for p in before}


def test_incoherent_hop_is_bounded_by_free_space(auditorium):
    a = auditorium.anchor("tx")
    b = auditorium.anchor("ar")
    tx, rx = isotropic(a, b, "tx"), isotropic(b, a, "rx")
    paths = reflect_paths(auditorium, a, b, 2, F0)
    bound = sum(10 ** (-free_space_loss_db(p.length, F0) / 10) * 1e-3 for p in paths)
    assert hop_power(tx, rx, paths, F0).power_w <= bound * (1 + 1e-12)
