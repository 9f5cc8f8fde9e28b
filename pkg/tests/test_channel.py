import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import CARRIER, LAM, make_scenario
from risbeam.channel import (
    NO_SIGNAL_DBM,
    SHIPPED,
    AntennaModel,
    ScenarioError,
    SimulatedOracle,
    amplitude_to_dbm,
    element_cascade_gain,
    element_gains,
    link,
    load_scenario,
    no_ris_power,
    optimal_phase_profile,
    received_power,
    scenario_from_dict,
    scenario_to_dict,
)
from risbeam.geometry import PhaseProfile, PhaseStateSet


def test_single_element_matches_hand_formula():
    sc = make_scenario(1, 1, tx=(4.0, 0.0, 0.0), rx=(3.0, 3.0, 0.0), tx_power=10.0)
    dt, dr = 4.0, math.hypot(3.0, 3.0)
    cos_ref = 3.0 / dr
    k = 2 * math.pi / LAM
    g = LAM / (4 * math.pi * dt * dr) * math.sqrt(cos_ref) * np.exp(-1j * k * (dt + dr))
    assert np.isclose(element_cascade_gain(sc, 0, 0), g, rtol=1e-12)
    p = received_power(sc, PhaseProfile.uniform(sc.geometry))
    assert math.isclose(p, 10.0 + 20 * math.log10(abs(g)), abs_tol=1e-9)


def test_direct_path_is_free_space_loss():
    # textbook form: FSPL(dB) = 20 log10(d) + 20 log10(f) - 147.55
    sc = make_scenario(1, 1, tx=(3.0, 5.0, 0.0), rx=(3.0, -5.0, 0.0), direct=True, direct_db=7.0)
    fspl = 20 * math.log10(10.0) + 20 * math.log10(CARRIER) - 147.55
    assert math.isclose(no_ris_power(sc), -fspl - 7.0, abs_tol=0.01)


def test_element_gain_scaling():
    a = make_scenario(2, 2)
    b = make_scenario(2, 2, element_gain_db=-20.0)
    assert np.allclose(element_gains(b), element_gains(a) * 0.1)


def test_horn_pattern():
    h = AntennaModel.horn(17.1)
    hp = math.sqrt(41253.0 / 10 ** 1.71)
    assert math.isclose(h.beamwidth_3db_deg, hp)
    assert h.gain_db(0.0) == 17.1
    assert math.isclose(h.gain_db(hp / 2), 17.1 - 3.0)
    assert math.isclose(h.gain_db(170.0), 17.1 - 20.0)
    assert AntennaModel.isotropic().gain_db(45.0) == 0.0
    with pytest.raises(ValueError):
        AntennaModel("directional", 10.0, None)
    with pytest.raises(ValueError):
        AntennaModel("isotropic", 3.0)


def test_directional_boresight_adds_gain():
    iso = make_scenario(1, 1, tx=(4.0, 0.0, 0.0), rx=(3.0, 1.0, 0.0))
    horn = iso.with_antennas(AntennaModel.horn(14.8), AntennaModel.horn(14.8))
    prof = PhaseProfile.uniform(iso.geometry)
    assert math.isclose(received_power(horn, prof) - received_power(iso, prof), 29.6, abs_tol=1e-9)


def test_elements_behind_the_surface_contribute_nothing():
    sc = make_scenario(2, 2, tx=(-3.0, 0.0, 0.0), rx=(2.0, 1.0, 0.0))
    assert np.all(element_gains(sc) == 0)
    assert received_power(sc, PhaseProfile.uniform(sc.geometry)) == NO_SIGNAL_DBM


@given(st.floats(0.5, 8.0), st.floats(-1.2, 1.2), st.floats(0.5, 8.0), st.floats(-1.2, 1.2), st.floats(-3, 3))
def test_reciprocity(r1, a1, r2, a2, phase):
    tx = (r1 * math.cos(a1), r1 * math.sin(a1), 0.3)
    rx = (r2 * math.cos(a2), r2 * math.sin(a2), -0.2)
    sc = make_scenario(3, 4, tx=tx, rx=rx, direct=True, scatterers=[((2.0, 2.0, 1.0), 0.3)])
    rng = np.random.default_rng(int(abs(phase) * 1000))
    prof = PhaseProfile(np.exp(1j * rng.uniform(-np.pi, np.pi, (3, 4))), sc.geometry)
    assert math.isclose(received_power(sc, prof), received_power(sc.swapped(), prof), abs_tol=1e-9)


@given(st.integers(0, 2**31))
def test_optimal_profile_dominates_random_profiles(seed):
    rng = np.random.default_rng(seed)
    tx = tuple(rng.uniform([1, -3, -1], [6, 3, 1]))
    rx = tuple(rng.uniform([1, -3, -1], [6, 3, 1]))
    sc = make_scenario(4, 5, tx=tx, rx=rx)
    best = received_power(sc, optimal_phase_profile(sc))
    gains = element_gains(sc)
    assert math.isclose(best, 20 * math.log10(np.abs(gains).sum()), abs_tol=1e-9)
    for _ in range(5):
        prof = PhaseProfile(np.exp(1j * rng.uniform(-np.pi, np.pi, (4, 5))), sc.geometry)
        assert received_power(sc, prof) <= best + 1e-9


def test_optimal_profile_with_background():
    sc = make_scenario(3, 3, direct=True, scatterers=[((1.0, 2.0, 0.5), 0.5)])
    lk = link(sc)
    best = received_power(sc, optimal_phase_profile(sc, include_background=True))
    assert math.isclose(best, 20 * math.log10(abs(lk.background) + np.abs(lk.gains).sum()), abs_tol=1e-9)
    assert best >= received_power(sc, optimal_phase_profile(sc)) - 1e-9


def test_amplitude_floor():
    assert amplitude_to_dbm(0.0, 10.0) == NO_SIGNAL_DBM
    assert amplitude_to_dbm(1e-30, 0.0) == NO_SIGNAL_DBM
    with pytest.raises(ValueError):
        amplitude_to_dbm(float("inf"), 0.0)


def test_degenerate_geometry():
    sc = make_scenario(1, 1, tx=(0.0, 0.0, 0.0))
    with pytest.raises(ValueError, match="degenerate"):
        element_gains(sc)
    with pytest.raises(IndexError):
        element_cascade_gain(make_scenario(2, 2), 2, 0)


def test_oracle_counts_and_noise_is_seeded():
    sc = make_scenario(2, 2, sigma=1.0)
    prof = PhaseProfile.uniform(sc.geometry)
    a = SimulatedOracle(sc, 7)
    b = SimulatedOracle(sc, 7)
    pa = [a.query(prof) for _ in range(5)]
    assert pa == [b.query(prof) for _ in range(5)]
    assert a.count == 5 and len(set(pa)) == 5
    a.reset(7)
    assert a.count == 0 and a.query(prof) == pa[0]
    clean = received_power(sc, prof)
    assert abs(np.mean(pa) - clean) < 3.0


def test_noiseless_oracle_is_exact():
    sc = make_scenario(2, 3)
    prof = PhaseProfile.uniform(sc.geometry)
    assert SimulatedOracle(sc).query(prof) == received_power(sc, prof)


def test_profile_shape_mismatch():
    sc = make_scenario(2, 3)
    other = make_scenario(3, 2)
    with pytest.raises(ValueError, match="does not match"):
        SimulatedOracle(sc).query(PhaseProfile.uniform(other.geometry))


@pytest.mark.parametrize("name", SHIPPED)
def test_shipped_scenarios_load_and_round_trip(name):
    sc = load_scenario(name)
    assert sc.name == name
    again = scenario_from_dict(json.loads(json.dumps(scenario_to_dict(sc))), name)
    prof = PhaseProfile.uniform(sc.geometry, sc.ris.phase_states.state_zero())
    assert received_power(again, prof) == received_power(sc, prof)


def test_shipped_panel_shapes():
    assert (load_scenario("office").geometry.rows_z, load_scenario("office").geometry.cols_y) == (20, 55)
    nf = load_scenario("nearfield26")
    assert (nf.geometry.rows_z, nf.geometry.cols_y) == (16, 16)
    assert nf.ris.phase_states == PhaseStateSet.one_bit()


def _doc():
    return scenario_to_dict(make_scenario(2, 2))


@pytest.mark.parametrize("mutate,key", [
    (lambda d: d.update(bogus=1), "bogus"),
    (lambda d: d["tx"].update(extra=1), "tx.extra"),
    (lambda d: d["ris"]["geometry"].update(rows_z=0), "ris.geometry"),
    (lambda d: d.pop("carrier_hz"), "carrier_hz"),
    (lambda d: d.update(noise_sigma_db=-1), "noise_sigma_db"),
])
def test_scenario_errors_name_the_key(mutate, key):
    d = _doc()
    mutate(d)
    with pytest.raises(ScenarioError) as ei:
        scenario_from_dict(d)
    assert ei.value.key.startswith(key)


def test_load_missing_file(tmp_path):
    with pytest.raises((ScenarioError, FileNotFoundError, ValueError)):
        load_scenario(tmp_path / "nope.json")
