"""Cavity response, resonance fitting, and intracavity amplitudes."""

import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nimcavity import cavity, coupling, mie
from nimcavity.constants import C_LIGHT, MIRROR_REFLECTIVITY, wavenumber
from nimcavity.hgmodes import (
    CavityGeometry,
    ReducedFieldPair,
    mirror_matrix,
    mode_geometry,
    propagation_matrix,
)

LAM = 770e-9

# frozen from an independent minimal reimplementation of the transfer
# chain (raw 2x2 arrays, brentq on the one-way phase, closed-form Airy
# transmission), evaluated before this module existed
L_RES = 1.244029280850e-05          # root of (one-way phase) = 32 pi
FSR_RES = 3.8703754013e-07          # pi / (k - dGouy/dL) at L_RES
FWHM_AIRY = 7.414159619e-10         # half-max crossings of the closed form
FINESSE_AIRY = 522.024828           # FSR_RES / FWHM_AIRY
FINESSE_EMPTY_FIT = 522.0264        # Lorentzian fit of the Airy profile
AIRY_QUARTER_FSR = 1.810811589e-05  # transmitted fraction, L_RES + FSR/4
AIRY_HALF_FSR = 9.054243980e-06     # Airy minimum, L_RES + FSR/2
PHOTONS_EMPTY = 21.3824658742       # at the default 0.4 uW incident power
# 65 nm perpendicular wire at z0 = lam/4 (antinode region)
L_RES_65A = 1.2430440175e-05
FINESSE_65A = 69.846
REFLECT_65A = 0.750119415917
TRANSMIT_65A = 0.017916875766
LOSS_65A = 0.231963708317
BUILDUP_65A = 3.10573209
PHOTONS_65A = 0.38304246
# 10 nm parallel wire
FINESSE_10N = 521.792               # wire at the central node
SHIFT_10A = -0.9572e-9              # resonance shift at z0 = lam/4
FINESSE_10A = 384.587


@pytest.fixture(scope="module")
def geo():
    return CavityGeometry()


@pytest.fixture(scope="module")
def l_res(geo):
    return cavity.resonance_estimate(geo)


def build_pair(geo, radius, x0, z0, pol):
    mode = mode_geometry(geo)
    fwd = coupling.nanowire_rt_coefficients(
        mie.NanowireSpec(radius=radius, position=(x0, z0)), mode, geo, pol)
    mirrored = coupling.nanowire_rt_coefficients(
        mie.NanowireSpec(radius=radius, position=(x0, -z0)), mode, geo, pol)
    return fwd, coupling.extend_by_symmetry(mirrored, geo).backward


@pytest.fixture(scope="module")
def pair_65_antinode(geo):
    return build_pair(geo, 65e-9, 0.0, LAM / 4, "perp")


@pytest.fixture(scope="module")
def pair_10_node(geo):
    return build_pair(geo, 10e-9, 0.0, 0.0, "par")


def airy_transmittance(length):
    """Closed-form Airy fraction from raw formulas (independent path)."""
    g = 1.0 - length / 28e-6
    z_r = 0.5 * length * math.sqrt((1.0 + g) / (1.0 - g))
    delta = wavenumber() * length - 2.0 * math.atan(0.5 * length / z_r)
    t_m = 1.0 - MIRROR_REFLECTIVITY
    return t_m ** 2 / (t_m ** 2
                       + 4.0 * MIRROR_REFLECTIVITY * math.sin(delta) ** 2)


def test_resonance_estimate_is_phase_root(geo, l_res):
    assert l_res == pytest.approx(L_RES, rel=1e-11)
    assert cavity.one_way_phase(geo, l_res) == pytest.approx(
        32 * math.pi, rel=1e-12)
    # headline numbers: L_cav ~ 12.440 um for the N = 32 mode
    assert abs(l_res - 12.440e-6) < 0.001e-6


def test_free_spectral_range_conventions(geo, l_res):
    fsr = cavity.free_spectral_range(geo, l_res)
    assert fsr == pytest.approx(FSR_RES, rel=1e-9)
    # cross-oracle: hand-derived dGouy/dL = 1/(u (2 Rc - L)) with
    # u = sqrt(L / (2 Rc - L))
    r_c = 28e-6
    u = math.sqrt(l_res / (2 * r_c - l_res))
    analytic = math.pi / (wavenumber() - 1.0 / (u * (2 * r_c - l_res)))
    assert fsr == pytest.approx(analytic, rel=1e-9)
    # spacing of adjacent phase roots agrees with the local derivative
    l_next = cavity.resonance_estimate(geo, order=33)
    assert l_next - l_res == pytest.approx(fsr, rel=1e-3)
    # the physical spacing exceeds lam/2 by the Gouy stretch (about half
    # a percent here), while the round-trip phase advances by exactly pi
    stretch = (l_next - l_res) / (LAM / 2) - 1.0
    assert 0.002 < stretch < 0.01


def test_adjacent_resonances_through_fit_pipeline(geo, l_res):
    res32 = cavity.find_resonance(geo)
    res33 = cavity.find_resonance(geo, window=cavity.resonance_estimate(
        geo, order=33))
    phase_spacing = (cavity.one_way_phase(geo, res33.resonant_length)
                     - cavity.one_way_phase(geo, res32.resonant_length))
    # on the phase axis the free spectral range maps to lam/2 exactly
    assert phase_spacing / wavenumber() == pytest.approx(LAM / 2, rel=1e-3)
    assert res33.resonant_length - res32.resonant_length == pytest.approx(
        cavity.free_spectral_range(geo, l_res), rel=1e-3)


def test_empty_response_matches_closed_form(geo, l_res):
    rng = np.random.default_rng(11)
    for length in l_res + (rng.random(25) - 0.5) * 2 * FSR_RES:
        resp = cavity.cavity_response(geo, cavity_length=length)
        assert resp.transmittance == pytest.approx(
            airy_transmittance(length), rel=1e-9)
        assert resp.loss <= 1e-12
        assert resp.polarization == "par"
    on_res = cavity.cavity_response(geo, cavity_length=l_res)
    assert on_res.transmittance == pytest.approx(1.0, abs=1e-9)
    assert on_res.reflectance < 1e-12
    quarter = cavity.cavity_response(geo, cavity_length=l_res + FSR_RES / 4)
    assert quarter.transmittance == pytest.approx(AIRY_QUARTER_FSR, rel=1e-9)
    # Airy minimum T^2 / ((1 - R)^2 + 4 R) at half-FSR detuning
    t_m = 1.0 - MIRROR_REFLECTIVITY
    minimum = cavity.cavity_response(geo, cavity_length=l_res + FSR_RES / 2)
    assert minimum.transmittance == pytest.approx(AIRY_HALF_FSR, rel=1e-9)
    assert minimum.transmittance == pytest.approx(
        t_m ** 2 / (t_m ** 2 + 4 * MIRROR_REFLECTIVITY), rel=1e-6)


def test_reciprocity_of_empty_cavity(geo, l_res):
    for detuning in (0.0, 0.13e-9, 97e-9, -55e-9):
        left = cavity.cavity_response(geo, cavity_length=l_res + detuning)
        right = cavity.cavity_response(geo, cavity_length=l_res + detuning,
                                       pump_side="right")
        assert right.transmittance == pytest.approx(
            left.transmittance, abs=1e-12)
        assert right.reflectance == pytest.approx(
            left.reflectance, abs=1e-12)


def test_response_input_validation(geo, pair_65_antinode):
    with pytest.raises(ValueError, match="pump_side"):
        cavity.cavity_response(geo, pump_side="top")
    with pytest.raises(ValueError, match="polarization"):
        cavity.cavity_response(geo, polarization="diagonal")
    with pytest.raises(TypeError, match="forward, backward"):
        cavity.cavity_response(geo, pair_65_antinode[0])
    with pytest.raises(ValueError, match="does not match"):
        cavity.cavity_response(geo, pair_65_antinode, polarization="par")
    far_pair = tuple(dataclasses.replace(c, position=(0.0, 7e-6))
                     for c in pair_65_antinode)
    with pytest.raises(ValueError, match="outside the cavity"):
        cavity.cavity_response(geo, far_pair)


@settings(max_examples=40, deadline=None)
@given(detuning=st.floats(min_value=-0.5, max_value=0.5))
def test_energy_budget_with_wire(geo, pair_65_antinode, detuning):
    length = L_RES + detuning * FSR_RES
    resp = cavity.cavity_response(geo, pair_65_antinode, length)
    assert 0.0 <= resp.reflectance <= 1.0
    assert 0.0 <= resp.transmittance <= 1.0
    assert 0.0 <= resp.loss <= 1.0
    total = resp.reflectance + resp.transmittance + resp.loss
    assert abs(total - 1.0) <= 1e-9


def test_find_resonance_empty(geo, l_res):
    res = cavity.find_resonance(geo)
    assert abs(res.resonant_length - L_RES) < 1e-13
    assert res.finesse == pytest.approx(FINESSE_EMPTY_FIT, rel=1e-4)
    assert abs(res.finesse - 522.0) < 1.0
    assert res.linewidth_length == pytest.approx(FWHM_AIRY, rel=1e-4)
    assert res.fit_quality < 1e-6
    # declared relations between the result fields
    assert res.finesse == pytest.approx(
        res.free_spectral_range / res.linewidth_length, rel=1e-12)
    assert res.linewidth_angular == pytest.approx(
        2 * math.pi * (C_LIGHT / (2 * res.resonant_length)) / res.finesse,
        rel=1e-12)
    # seeding by a scalar window center lands on the same resonance
    seeded = cavity.find_resonance(geo, window=l_res + 0.05 * FSR_RES)
    assert seeded.resonant_length == pytest.approx(
        res.resonant_length, abs=1e-13)


def test_lorentzian_fit_recovers_synthetic_airy_width(geo):
    # fit-method validation on synthetic data from the closed form
    lengths = L_RES + np.linspace(-5 * FWHM_AIRY, 5 * FWHM_AIRY, 201)
    data = np.array([airy_transmittance(x) for x in lengths])
    guess = (1.0, L_RES, FWHM_AIRY, 0.0)
    from scipy.optimize import curve_fit
    params, _ = curve_fit(cavity._lorentzian, lengths, data, p0=guess)
    assert abs(params[2]) == pytest.approx(FWHM_AIRY, rel=5e-3)
    # and through the public pipeline against the same frozen width
    res = cavity.find_resonance(geo)
    assert res.linewidth_length == pytest.approx(FWHM_AIRY, rel=5e-3)


def test_wire_at_node_leaves_resonance_untouched(geo, l_res, pair_10_node):
    res = cavity.find_resonance(geo, pair_10_node)
    assert abs(res.resonant_length - l_res) < 5e-12
    assert res.finesse == pytest.approx(FINESSE_10N, rel=1e-4)
    empty = cavity.empty_cavity_finesse(geo)
    assert abs(res.finesse - empty) / empty < 1e-3


def test_small_wire_at_antinode_shifts_dispersively(geo, l_res):
    pair = build_pair(geo, 10e-9, 0.0, LAM / 4, "par")
    res = cavity.find_resonance(geo, pair)
    assert res.resonant_length - l_res == pytest.approx(SHIFT_10A, rel=1e-3)
    assert res.finesse == pytest.approx(FINESSE_10A, rel=1e-3)
    # a 10 nm wire never halves the finesse
    assert res.finesse > cavity.empty_cavity_finesse(geo) / 2


def test_thick_wire_at_antinode_strong_dip(geo, l_res, pair_65_antinode):
    res = cavity.find_resonance(geo, pair_65_antinode)
    assert res.resonant_length == pytest.approx(L_RES_65A, abs=5e-13)
    assert res.finesse == pytest.approx(FINESSE_65A, rel=1e-3)
    shift = res.resonant_length - l_res
    assert 3e-9 < -shift < 30e-9
    assert res.finesse < cavity.empty_cavity_finesse(geo) / 2
    resp = cavity.cavity_response(geo, pair_65_antinode,
                                  res.resonant_length)
    assert resp.transmittance == pytest.approx(TRANSMIT_65A, rel=1e-6)
    assert resp.reflectance == pytest.approx(REFLECT_65A, rel=1e-6)
    assert resp.loss == pytest.approx(LOSS_65A, rel=1e-6)
    assert resp.transmittance < 0.05
    assert resp.loss > 0.1


def test_find_resonance_error_reporting(geo, l_res):
    with pytest.raises(ValueError, match="low < high"):
        cavity.find_resonance(geo, window=(l_res, l_res - 1e-9))
    with pytest.raises(RuntimeError, match="no transmission peak"):
        cavity.find_resonance(geo, window=(l_res + 0.1 * FSR_RES,
                                           l_res + 0.45 * FSR_RES))
    with pytest.raises(RuntimeError, match="transmission peaks"):
        cavity.find_resonance(geo, window=(l_res - 1.3 * FSR_RES,
                                           l_res + 1.3 * FSR_RES))
    with pytest.raises(RuntimeError, match="residual"):
        cavity.find_resonance(geo, max_residual=1e-12)


def test_resonance_result_validation():
    with pytest.raises(ValueError, match="finesse"):
        cavity.ResonanceResult(resonant_length=12e-6, finesse=-1.0,
                               linewidth_length=1e-9,
                               linewidth_angular=1e11, fit_quality=0.0,
                               free_spectral_range=385e-9)
    with pytest.raises(ValueError, match="linewidth_length"):
        cavity.ResonanceResult(resonant_length=12e-6, finesse=500.0,
                               linewidth_length=math.nan,
                               linewidth_angular=1e11, fit_quality=0.0,
                               free_spectral_range=385e-9)


def test_intracavity_amplitudes_empty(geo, l_res):
    amps = cavity.intracavity_amplitudes(geo, cavity_length=l_res)
    t_m = 1.0 - MIRROR_REFLECTIVITY
    # resonant build-up T / (1 - R)^2 for the forward wave
    assert abs(amps.a_plus) ** 2 == pytest.approx(
        t_m / (1.0 - MIRROR_REFLECTIVITY) ** 2, rel=0.01)
    assert amps.a_plus == amps.b_plus and amps.a_minus == amps.b_minus
    assert amps.a_minus / amps.a_plus == pytest.approx(
        -math.sqrt(MIRROR_REFLECTIVITY), abs=1e-9)
    # counter-propagating amplitudes interfere to a node at the center
    node = abs(amps.a_plus + amps.a_minus) ** 2
    antinode = abs(amps.a_plus - amps.a_minus) ** 2
    assert node / antinode < 1e-5
    photons = cavity.photon_number(geo, amps)
    assert photons == pytest.approx(PHOTONS_EMPTY, rel=1e-9)
    assert cavity.photon_number(geo, amps, power=2 * cavity.INCIDENT_POWER) \
        == pytest.approx(2 * photons, rel=1e-12)
    with pytest.raises(ValueError, match="power"):
        cavity.photon_number(geo, amps, power=-1e-6)


def test_intracavity_amplitudes_with_wire(geo, pair_65_antinode):
    amps = cavity.intracavity_amplitudes(geo, pair_65_antinode, L_RES_65A)
    assert abs(amps.a_plus) ** 2 == pytest.approx(BUILDUP_65A, rel=1e-6)
    assert cavity.photon_number(geo, amps) == pytest.approx(
        PHOTONS_65A, rel=1e-6)
    assert amps.a_plus != amps.b_plus
    assert amps.wire_plane == pair_65_antinode[0].position[1]
    # propagating the B pair to the right mirror must reproduce the
    # outgoing transmission with nothing entering from the right
    resp = cavity.cavity_response(geo, pair_65_antinode, L_RES_65A)
    mode = mode_geometry(dataclasses.replace(geo, length=L_RES_65A))
    outside = mirror_matrix(geo.reflectivity_right, geo.eta_right).apply(
        propagation_matrix(0.0, L_RES_65A / 2, mode).apply(
            ReducedFieldPair(amps.b_plus, amps.b_minus)))
    assert abs(outside.backward) < 1e-12
    assert outside.forward == pytest.approx(resp.c_t, abs=1e-12)


def test_photon_number_continuous_across_node(geo, l_res):
    counts = []
    for z0 in np.linspace(-15e-9, 15e-9, 7):
        pair = build_pair(geo, 65e-9, 0.0, float(z0), "perp")
        amps = cavity.intracavity_amplitudes(geo, pair, l_res)
        counts.append(cavity.photon_number(geo, amps))
    counts = np.array(counts)
    assert np.all(np.isfinite(counts)) and np.all(counts > 0.0)
    assert np.abs(np.diff(counts)).max() < 0.08
    # the detuned buildup peaks where the wire sits on the node
    assert np.argmax(counts) in (2, 3, 4)
