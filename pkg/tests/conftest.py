"""
Shared fixtures for the simulator test suite.

The package uses a flat src/ layout with bare-name imports, so src/ is put
on sys.path before any test module imports it.
"""

import os
import sys

import numpy as np
import pytest

SRC_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "src")
if SRC_DIR not in sys.path:
    sys.path.insert(0, SRC_DIR)

from constants import DATA_DIR  # noqa: E402
from linkbudget import LinkParams  # noqa: E402
from scene import Facet, Material, Scene  # noqa: E402


@pytest.fixture
def data_dir():
    return DATA_DIR


@pytest.fixture
def campaign_params():
    """Link budget of the 26 GHz campaign (Rx on the design direction)."""
    return LinkParams(
        p_t_dbm=6.0, g_t_db=18.0, g_r_db=18.0, l_t_db=2.5, g_a_db=19.9,
        r1_m=5.5, r2_m=7.0, f_hz=26e9,
    )


@pytest.fixture
def concrete():
    return Material("concrete", eps_r=5.31, sigma_a=0.0326, sigma_b=0.8095)


@pytest.fixture
def slab_scene():
    """Floor at z = 0 and ceiling at z = 3, 20 m on a side, perfectly reflecting."""
    metal = Material("metal")
    floor = Facet("floor", [[-10, -10, 0], [10, -10, 0], [10, 10, 0], [-10, 10, 0]], "metal")
    ceiling = Facet("ceiling", [[-10, -10, 3], [-10, 10, 3], [10, 10, 3], [10, -10, 3]], "metal")
    return Scene([floor, ceiling], {"metal": metal}, {}, "slab")


@pytest.fixture
def blocked_scene():
    """Single absorbing screen standing across the x axis at x = 1."""
    absorber = Material("absorber", absorber=True)
    screen = Facet("screen", [[1, -1, -1], [1, 1, -1], [1, 1, 1], [1, -1, 1]], "absorber")
    return Scene([screen], {"absorber": absorber}, {}, "screen")


@pytest.fixture
def origin():
    return np.zeros(3)
