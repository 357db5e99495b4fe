"""
raytracer.py - Image-method ray tracer with an embedded reflector node.

Features:
- Exhaustive specular path enumeration up to third order
- Facet containment and occlusion checks per segment
- Per-hop received power (incoherent by default, coherent optional)
- Tx -> reflector -> Rx cascade using the reflector's two patterns
"""

import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np

from constants import MAX_REFLECTION_ORDER
from errors import DomainError, NumericalError
from scene import los_clear, effective_reflection
from units import hz_of, wavelength_of, dbm_to_watts, watts_to_dbm
from linkbudget import chain_terminal

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PropagationPath:
    """
    Ordered interaction points from source to target.

    Args:
        points: Source, bounce points, target (each a length-3 array)
        facet_ids: Facet hit at each bounce
        coefficients: Complex reflection coefficient at each bounce
    """

    points: tuple
    facet_ids: tuple = ()
    coefficients: tuple = ()

    @property
    def order(self):
        return len(self.facet_ids)

    @property
    def segment_lengths(self):
        return tuple(
            float(np.linalg.norm(b - a)) for a, b in zip(self.points[:-1], self.points[1:])
        )

    @property
    def length(self):
        return sum(self.segment_lengths)

    @property
    def amplitude_factor(self):
        factor = 1.0 + 0j
        for gamma in self.coefficients:
            factor *= gamma
        return factor

    @property
    def departure(self):
        """Unit direction leaving the source."""
        d = self.points[1] - self.points[0]
        return d / np.linalg.norm(d)

    @property
    def arrival(self):
        """Unit direction from the target back along the last segment."""
        d = self.points[-2] - self.points[-1]
        return d / np.linalg.norm(d)

    def reversed(self):
        return PropagationPath(
            tuple(reversed(self.points)),
            tuple(reversed(self.facet_ids)),
            tuple(reversed(self.coefficients)),
        )

    def sort_key(self):
        return (self.order, self.facet_ids)


def _sequences(facets, order):
    """Facet index sequences of the given length without immediate repeats."""
    for seq in itertools.product(range(len(facets)), repeat=order):
        if all(seq[i] != seq[i + 1] for i in range(order - 1)):
            yield seq


def _trace_sequence(scene, facets, seq, a, b):
    images = [a]
    for idx in seq:
        facet = facets[idx]
        if abs(facet.signed_distance(images[-1])) < 1e-12:
            return None
        images.append(facet.mirror(images[-1]))

    # Walk back from the target towards each image in turn
    points = [b]
    target = b
    for depth in range(len(seq), 0, -1):
        facet = facets[seq[depth - 1]]
        hit = facet.intersect(images[depth], target)
        if hit is None:
            return None
        target = hit[1]
        points.append(target)
    points.append(a)
    points.reverse()

    for p, q in zip(points[:-1], points[1:]):
        if np.linalg.norm(q - p) < 1e-9 or not los_clear(scene, p, q):
            return None
    return points


def reflect_paths(scene, a, b, max_order=MAX_REFLECTION_ORDER, f=None):
    """
    All specular paths from a to b with at most max_order bounces.

    Paths are ordered by bounce count, then by facet ids. Absorbing facets
    never reflect but still occlude. Without f the reflection coefficients
    are left at 1.

    Returns:
        list of PropagationPath
    """
    if not 0 <= max_order <= MAX_REFLECTION_ORDER:
        raise DomainError(f"max_order must lie in 0..{MAX_REFLECTION_ORDER}, got {max_order}")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    paths = []
    if los_clear(scene, a, b):
        paths.append(PropagationPath((a, b)))

    facets = scene.reflective_facets
    for order in range(1, max_order + 1):
        for seq in _sequences(facets, order):
            points = _trace_sequence(scene, facets, seq, a, b)
            if points is None:
                continue
            if f is not None:
                coefficients = tuple(
                    effective_reflection(
                        scene.material_of(facets[idx]), points[i + 1] - points[i],
                        facets[idx].normal, f,
                    )
                    for i, idx in enumerate(seq)
                )
            else:
                coefficients = (1.0 + 0j,) * order
            paths.append(PropagationPath(
                tuple(points), tuple(facets[idx].id for idx in seq), coefficients,
            ))

    paths.sort(key=PropagationPath.sort_key)
    logger.debug("traced %d paths (max order %d)", len(paths), max_order)
    return paths


@dataclass(frozen=True)
class HopPower:
    """Received power of one hop and the number of contributing paths."""

    power_w: float
    n_paths: int

    @property
    def dbm(self):
        return watts_to_dbm(self.power_w)


def hop_power(tx, rx, paths, f, coherent=False, p_t_dbm=0.0):
    """
    Received power over a set of paths between two nodes.

    Each path contributes P_t G_tx(departure) G_rx(arrival) (lambda / 4 pi L)^2
    times its reflection losses. Incoherent mode adds powers; coherent mode
    adds amplitudes with phase exp(-j k L).

    Returns:
        HopPower; zero power (flagged in the log) when paths is empty
    """
    if not paths:
        logger.warning("no propagation path between %r and %r", tx, rx)
        return HopPower(0.0, 0)
    lam = wavelength_of(f)
    k = 2.0 * math.pi / lam
    p_t = dbm_to_watts(p_t_dbm)
    total_power = 0.0
    total_field = 0j
    for path in paths:
        length = path.length
        gains = tx.transmit_gain(path.departure) * rx.receive_gain(path.arrival)
        amplitude = math.sqrt(p_t * gains) * lam / (4.0 * math.pi * length) * path.amplitude_factor
        if coherent:
            total_field += amplitude * complex(math.cos(k * length), -math.sin(k * length))
        else:
            total_power += abs(amplitude) ** 2
    power = abs(total_field) ** 2 if coherent else total_power
    if not math.isfinite(power):
        raise NumericalError("non-finite hop power")
    return HopPower(power, len(paths))


def simulate_ar_link(scene, tx, ar, rx, f, max_order, params=None, coherent=False):
    """
    Received power (dBm) of the Tx -> reflector -> Rx cascade.

    Every pair of a Tx->reflector path and a reflector->Rx path contributes;
    the sum factorizes into the product of the two hop powers. The direct
    Tx->Rx link is not included. With params, P_t and the terminal chain
    (-L_t + G_a) are applied; otherwise P_t is 0 dBm and no chain.
    """
    if abs(ar.frequency - hz_of(f)) > 1e-6 * hz_of(f):
        raise DomainError(
            f"reflector patterns are for {ar.frequency / 1e9:.3f} GHz, "
            f"link is at {hz_of(f) / 1e9:.3f} GHz"
        )
    first = reflect_paths(scene, tx.position, ar.position, max_order, f)
    second = reflect_paths(scene, ar.position, rx.position, max_order, f)
    hop1 = hop_power(tx, ar, first, f, coherent)
    hop2 = hop_power(ar, rx, second, f, coherent)

    p_t_dbm = params.p_t_dbm if params is not None else 0.0
    # Each hop was evaluated for 1 mW; the product is per mW squared.
    power_w = dbm_to_watts(p_t_dbm) * (hop1.power_w / 1e-3) * (hop2.power_w / 1e-3)
    p_dbm = watts_to_dbm(power_w)
    if params is not None:
        p_dbm = chain_terminal(p_dbm, params)
    logger.debug(
        "AR link at %.3f GHz: %d + %d paths -> %.4f dBm",
        hz_of(f) / 1e9, hop1.n_paths, hop2.n_paths, p_dbm,
    )
    return p_dbm
