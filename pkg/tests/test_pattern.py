import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from risbeam.geometry import (
    PhaseProfile,
    PhaseStateSet,
    RisGeometry,
    profile_from_vector,
    quantize_profile,
    steering_vector,
)
from risbeam.pattern import (
    CutSpec,
    PatternError,
    array_factor,
    compute_cut,
    compute_grid,
    extract_metrics,
    is_resolvable,
    scan_range,
    uniform_aperture_beamwidth_deg,
)


def ula_af(n, d_over_lam, phi):
    """Closed-form normalized array factor of an n-element uniform line at broadside."""
    psi = 2 * math.pi * d_over_lam * np.sin(phi)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.abs(np.sin(n * psi / 2) / (n * np.sin(psi / 2)))
    return np.where(np.abs(np.sin(psi / 2)) < 1e-12, 1.0, out)


def steer(geom, phi_deg, theta_deg=90.0):
    return profile_from_vector(steering_vector(geom, math.radians(theta_deg), math.radians(phi_deg)))


@pytest.mark.parametrize("n,d", [(8, 0.5), (17, 0.5), (10, 0.3)])
def test_uniform_line_matches_closed_form(n, d):
    g = RisGeometry(1, n, d, d, 1.0)
    pat = compute_cut(g, PhaseProfile.uniform(g), element_factor=False)
    ref = ula_af(n, d, np.radians(pat.angles_deg))
    with np.errstate(divide="ignore"):
        ref_db = np.maximum(20 * np.log10(ref), -300.0)
    mask = ref_db > -60
    assert np.allclose(pat.gain_db[mask], ref_db[mask], atol=1e-9)


def test_array_factor_scalar_and_array():
    g = RisGeometry.half_wavelength(3, 4, 1.0)
    prof = PhaseProfile.uniform(g)
    assert array_factor(g, prof, math.pi / 2, 0.0, element_factor=False) == pytest.approx(12.0)
    out = array_factor(g, prof, np.array([math.pi / 2, 1.0]), 0.0)
    assert out.shape == (2,)


def test_coherent_peak_magnitude():
    g = RisGeometry.half_wavelength(4, 16, 1.0)
    prof = steer(g, 25.0)
    val = array_factor(g, prof, math.pi / 2, math.radians(25.0), element_factor=False)
    assert abs(val) == pytest.approx(64.0)


def test_incidence_shifts_specular_lobe():
    g = RisGeometry.half_wavelength(1, 20, 1.0)
    inc = (math.pi / 2, math.radians(-20.0))
    pat = compute_cut(g, PhaseProfile.uniform(g), incidence=inc, element_factor=False)
    assert extract_metrics(pat).peak_angle_deg == pytest.approx(-20.0, abs=0.1)


def test_element_factor_rolls_off_with_angle():
    g = RisGeometry.half_wavelength(1, 1, 1.0)
    prof = PhaseProfile.uniform(g)
    v = abs(array_factor(g, prof, math.pi / 2, math.radians(60.0)))
    assert v == pytest.approx(math.sqrt(0.5))
    assert abs(array_factor(g, prof, math.pi / 2, math.radians(60.0), exponent=1.0)) == pytest.approx(0.5)


def test_broadside_metrics_55_line():
    g = RisGeometry.half_wavelength(1, 55, 1.0)
    m = extract_metrics(compute_cut(g, PhaseProfile.uniform(g), step_deg=0.01, element_factor=False))
    assert m.peak_angle_deg == pytest.approx(0.0, abs=0.01)
    assert m.beamwidth_3db_deg == pytest.approx(uniform_aperture_beamwidth_deg(55, 0.5, 1.0), rel=0.01)
    assert m.sidelobe_level_db == pytest.approx(-13.26, abs=0.1)


@given(st.floats(-60, 60))
def test_steered_peak_tracks_command(cmd):
    g = RisGeometry.half_wavelength(4, 24, 1.0)
    m = extract_metrics(compute_cut(g, steer(g, cmd), element_factor=False))
    assert abs(m.peak_angle_deg - cmd) <= 0.1


def test_zenith_cut():
    g = RisGeometry.half_wavelength(20, 2, 1.0)
    pat = compute_cut(g, steer(g, 0.0, theta_deg=70.0), CutSpec("zenith", 0.0, 1.0, 179.0), element_factor=False)
    assert extract_metrics(pat).peak_angle_deg == pytest.approx(70.0, abs=0.1)


def test_one_bit_pattern_has_image_lobe():
    # 1-bit quantization mirrors the main lobe into the symmetric direction
    g = RisGeometry.half_wavelength(1, 32, 1.0)
    prof = quantize_profile(steer(g, 30.0), PhaseStateSet.one_bit())
    pat = compute_cut(g, prof, element_factor=False)
    i = int(np.argmin(np.abs(pat.angles_deg + 30.0)))
    assert pat.gain_db[i - 5:i + 6].max() > -1.0


def test_resolvable_and_scan_range():
    g = RisGeometry.half_wavelength(1, 55, 1.0)
    pats = {c: compute_cut(g, steer(g, c)) for c in (-80.0, 0.0, 80.0)}
    assert all(is_resolvable(p, c) for c, p in pats.items())
    assert scan_range(pats) == 160.0
    flat = RisGeometry.half_wavelength(1, 1, 1.0)
    assert not is_resolvable(compute_cut(flat, PhaseProfile.uniform(flat), element_factor=False), 0.0)


def test_errors():
    g = RisGeometry.half_wavelength(1, 4, 1.0)
    prof = PhaseProfile.uniform(g)
    with pytest.raises(PatternError):
        compute_cut(g, prof, step_deg=0.5)
    with pytest.raises(PatternError):
        CutSpec("azimuth", 90.0, 10.0, 10.0)
    with pytest.raises(PatternError):
        compute_cut(g, PhaseProfile.uniform(g, 0.0))
    with pytest.raises(ValueError):
        CutSpec("diagonal")


def test_grid_normalized():
    g = RisGeometry.half_wavelength(4, 4, 1.0)
    out = compute_grid(g, steer(g, 20.0), np.arange(60, 121, 1.0), np.arange(-60, 61, 1.0),
                       element_factor=False)
    assert out.shape == (61, 121) and out.max() == 0.0
    i, j = np.unravel_index(np.argmax(out), out.shape)
    assert (60 + i, -60 + j) == (90, 20)


def test_csv():
    g = RisGeometry.half_wavelength(1, 4, 1.0)
    lines = compute_cut(g, PhaseProfile.uniform(g), CutSpec("azimuth", 90, -1, 1)).to_csv().splitlines()
    assert lines[0] == "angle_deg,gain_db" and len(lines) == 22
    assert lines[11] == "0.0000,0.0000"
