import math

import numpy as np
import pytest
from hypothesis import settings

from risbeam.channel import (
    SPEED_OF_LIGHT,
    AntennaModel,
    DirectPath,
    Node,
    RisPlacement,
    Scatterer,
    Scenario,
)
from risbeam.geometry import PhaseStateSet, RisGeometry, direction

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

CARRIER = 5.8e9
LAM = SPEED_OF_LIGHT / CARRIER


def make_scenario(rows=4, cols=6, tx=(3.0, 0.5, 0.2), rx=(2.0, -1.0, 0.1), states=None, direct=False,
                  direct_db=0.0, scatterers=(), sigma=0.0, tx_power=0.0, antenna=None, seed=0,
                  element_gain_db=0.0, exponent=0.5):
    """Small surface at the origin facing +x (local frame == world frame up to the centre offset)."""
    geom = RisGeometry.half_wavelength(rows, cols, LAM)
    ris = RisPlacement((0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (0.0, 0.0, 1.0), geom,
                       states or PhaseStateSet.continuous(), element_gain_db, exponent)
    ant = antenna or AntennaModel.isotropic()
    return Scenario(CARRIER, Node(tx, ant), Node(rx, ant), ris, DirectPath(direct, direct_db),
                    tuple(Scatterer(p, a) for p, a in scatterers), sigma, tx_power, seed, "test")


def far_scenario(rows, cols, rx_angle, tx_angle=(math.pi / 2, 0.0), d_tx=300.0, d_rx=300.0, states=None):
    """Line-of-sight far-field geometry; angles are local (zenith, azimuth)."""
    geom = RisGeometry.half_wavelength(rows, cols, LAM)
    ris = RisPlacement((0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (0.0, 0.0, 1.0), geom,
                       states or PhaseStateSet.continuous())
    tx = Node(tuple(d_tx * direction(*tx_angle)))
    rx = Node(tuple(d_rx * direction(*rx_angle)))
    return Scenario(CARRIER, tx, rx, ris, DirectPath(False), (), 0.0, 0.0, 0, "far")


@pytest.fixture
def small_scenario():
    return make_scenario()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter, config):
    lines = getattr(config, "_acceptance_lines", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
