"""Plane-wave expansions: sampling, reconstruction, polarization bookkeeping."""

import math

import numpy as np
import pytest

from nimcavity.constants import DELTA_K, WAVELENGTH, wavenumber
from nimcavity.hgmodes import CavityGeometry, mode_geometry
from nimcavity.planewave import (
    PlaneWaveComponent,
    plane_wave_expansion_2d,
    plane_wave_expansion_3d,
    reconstruct_field,
    reconstruct_scalar,
    transverse_envelope,
)

# (w0/(2 pi)^{3/2}) dk^2 and (sqrt(w0)/(2 pi)^{3/4}) dk at the default
# geometry (w0 = 1.678084821033 um, dk = 0.75 rad/um), frozen by direct
# evaluation
AMP3D_CENTER = 5.993308501506e+04
AMP2D_CENTER = 2.448123465331e+02


@pytest.fixture(scope="module")
def mode():
    return mode_geometry(CavityGeometry())


def test_components_3d_basic(mode):
    comps = plane_wave_expansion_3d(mode, "perp")
    assert len(comps) == 81
    k = mode.wavenumber
    center = max(comps, key=lambda c: abs(c.amplitude))
    assert np.allclose(center.wavevector, [0.0, 0.0, k], rtol=1e-12)
    assert center.amplitude == pytest.approx(AMP3D_CENTER, rel=1e-11)
    for c in comps:
        assert np.linalg.norm(c.wavevector) == pytest.approx(k, rel=1e-12)
    phi, xi = center.incidence
    assert phi == pytest.approx(0.0, abs=1e-12)
    assert xi == pytest.approx(math.pi / 2, rel=1e-12)


def test_polarization_orthogonal_and_unit(mode):
    for pol in ("par", "perp"):
        for c in plane_wave_expansion_3d(mode, pol):
            assert abs(c.polarization_vector @ c.wavevector) \
                < 1e-12 * mode.wavenumber
            assert np.linalg.norm(c.polarization_vector) \
                == pytest.approx(1.0, rel=1e-12)


def test_scalar_reconstruction_in_rayleigh_volume(mode):
    comps = plane_wave_expansion_3d(mode, "par")
    rng = np.random.default_rng(99)
    z = rng.uniform(-mode.rayleigh_length, mode.rayleigh_length, 50)
    w_z = mode.beam_radius(z)
    r_t = np.sqrt(rng.uniform(0, 1, 50)) * w_z
    th = rng.uniform(0, 2 * np.pi, 50)
    pts = np.stack([r_t * np.cos(th), r_t * np.sin(th), z], axis=-1)
    rec = reconstruct_scalar(comps, pts)

    w0, z_r, k = mode.waist, mode.rayleigh_length, mode.wavenumber
    x, y = pts[:, 0], pts[:, 1]
    r2 = x * x + y * y
    ref = math.sqrt(2 / (math.pi * w0 ** 2)) * (w0 / w_z) \
        * np.exp(-r2 / w_z ** 2) \
        * np.exp(1j * (k * z - np.arctan(z / z_r)
                       + k * r2 * z / (2 * (z_r ** 2 + z ** 2))))
    assert (np.abs(rec - ref) / np.abs(ref)).max() < 0.01


def test_parseval_3d(mode):
    comps = plane_wave_expansion_3d(mode, "perp")
    total = sum(abs(c.amplitude) ** 2 for c in comps)
    assert (2 * np.pi) ** 2 * total / DELTA_K ** 2 \
        == pytest.approx(1.0, rel=0.01)


def test_vector_reconstruction_on_axis(mode):
    # per-wave polarization tilt reduces the dominant component by
    # O(divergence^2) ~ 0.5%; other components vanish on axis by symmetry
    origin = np.zeros(3)
    scalar = reconstruct_scalar(plane_wave_expansion_3d(mode, "perp"), origin)
    for pol, axis in (("perp", np.array([1.0, 0, 0])),
                      ("par", np.array([0, -1.0, 0]))):
        vec = reconstruct_field(plane_wave_expansion_3d(mode, pol), origin)
        dominant = vec @ axis
        assert dominant == pytest.approx(scalar, rel=0.01)
        assert np.abs(vec - dominant * axis).max() < 1e-12 * abs(scalar)


def test_sampling_validation(mode):
    with pytest.raises(ValueError):
        plane_wave_expansion_3d(mode, "perp", n_terms_per_axis=8)
    with pytest.raises(ValueError):
        plane_wave_expansion_3d(mode, "perp", n_terms_per_axis=-3)
    with pytest.raises(ValueError):
        plane_wave_expansion_3d(mode, "perp", delta_k=0.0)
    # 4 dk reaches beyond |k| = 2 pi / lambda
    with pytest.raises(ValueError, match="shell"):
        plane_wave_expansion_3d(mode, "perp", delta_k=2.1e6)
    with pytest.raises(ValueError, match="shell"):
        plane_wave_expansion_2d(mode, "perp", +1, delta_k=2.1e6)
    with pytest.raises(ValueError):
        plane_wave_expansion_2d(mode, "perp", direction=0)
    with pytest.raises(ValueError):
        plane_wave_expansion_2d(mode, "linear", +1)


def test_build_self_check_rejects_coarse_sampling(mode):
    with pytest.raises(RuntimeError, match="self-test"):
        plane_wave_expansion_3d(mode, "perp", n_terms_per_axis=3,
                                delta_k=1.9e6)


def test_component_invariants_enforced():
    k = wavenumber(WAVELENGTH)
    with pytest.raises(ValueError, match="unit"):
        PlaneWaveComponent(1.0, np.array([0, 0, k]),
                           np.array([2.0, 0, 0]), (0.0, math.pi / 2))
    with pytest.raises(ValueError, match="orthogonal"):
        PlaneWaveComponent(1.0, np.array([0, 0, k]),
                           np.array([0, 0, 1.0]), (0.0, math.pi / 2))
    with pytest.raises(ValueError, match="sigma"):
        PlaneWaveComponent(1.0, np.array([0, 0, k]),
                           np.array([1.0, 0, 0]), (0.0, math.pi / 2),
                           sigma=0.0)


def test_2d_axial_components(mode):
    k = mode.wavenumber
    fwd = plane_wave_expansion_2d(mode, "perp", +1)
    bwd = plane_wave_expansion_2d(mode, "perp", -1)
    assert len(fwd) == len(bwd) == 9
    f0 = max(fwd, key=lambda c: abs(c.amplitude))
    b0 = max(bwd, key=lambda c: abs(c.amplitude))
    assert np.allclose(f0.wavevector, [0, 0, k], rtol=1e-12)
    assert np.allclose(b0.wavevector, [0, 0, -k], rtol=1e-12)
    assert f0.amplitude == pytest.approx(AMP2D_CENTER, rel=1e-11)
    assert f0.incidence[0] == pytest.approx(0.0, abs=1e-12)
    assert b0.incidence[0] == pytest.approx(math.pi, rel=1e-12)
    # counter-propagating axial waves share +e_x
    assert np.allclose(f0.polarization_vector, [1.0, 0, 0], atol=1e-15)
    assert np.allclose(b0.polarization_vector, [1.0, 0, 0], atol=1e-15)
    assert f0.sigma == 1.0 and b0.sigma == -1.0


def test_2d_mirrored_polarization_match(mode):
    # forward and backward waves with mirrored wavevectors carry the
    # same perpendicular polarization vector (sigma bookkeeping)
    fwd = plane_wave_expansion_2d(mode, "perp", +1)
    bwd = plane_wave_expansion_2d(mode, "perp", -1)
    for cf, cb in zip(fwd, bwd):
        assert np.allclose(cf.wavevector, -cb.wavevector, rtol=1e-12)
        assert np.allclose(cf.polarization_vector, cb.polarization_vector,
                           atol=1e-14)
    for c in plane_wave_expansion_2d(mode, "par", +1) \
            + plane_wave_expansion_2d(mode, "par", -1):
        assert np.allclose(c.polarization_vector, [0, -1.0, 0], atol=0)
        assert c.sigma == 1.0


def test_2d_waist_plane_reconstruction(mode):
    comps = plane_wave_expansion_2d(mode, "par", +1)
    w0 = mode.waist
    x = np.linspace(-1.2 * w0, 1.2 * w0, 7)
    y = np.linspace(-w0, w0, 7)
    gx, gy = np.meshgrid(x, y, indexing="ij")
    pts = np.stack([gx, np.zeros_like(gx), np.zeros_like(gx)], axis=-1)
    rec = reconstruct_scalar(comps, pts) * transverse_envelope(mode, gy)
    ref = math.sqrt(2 / (math.pi * w0 ** 2)) \
        * np.exp(-(gx ** 2 + gy ** 2) / w0 ** 2)
    assert np.abs(rec - ref).max() < 2e-3 * ref.max()


def test_2d_on_axis_cylindrical_beam_law(mode):
    # the in-plane sum follows the 2D Gaussian-beam law: amplitude
    # (w0/w)^(1/2) and half the Gouy phase of the 3D beam
    comps = plane_wave_expansion_2d(mode, "par", +1)
    z = np.linspace(-mode.rayleigh_length, mode.rayleigh_length, 21)
    pts = np.stack([np.zeros_like(z), np.zeros_like(z), z], axis=-1)
    rec = reconstruct_scalar(comps, pts)
    w0, z_r, k = mode.waist, mode.rayleigh_length, mode.wavenumber
    ref = (2 / (math.pi * w0 ** 2)) ** 0.25 \
        * (1 + (z / z_r) ** 2) ** -0.25 \
        * np.exp(1j * (k * z - 0.5 * np.arctan(z / z_r)))
    assert (np.abs(rec - ref) / np.abs(ref)).max() < 5e-3


def test_envelope_normalization(mode):
    y = np.linspace(-8 * mode.waist, 8 * mode.waist, 4001)
    f = transverse_envelope(mode, y)
    assert np.trapezoid(f * f, y) == pytest.approx(1.0, abs=1e-9)
    wide = transverse_envelope(mode, y, width=2.5 * mode.waist)
    assert np.trapezoid(wide * wide, y) == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(ValueError):
        transverse_envelope(mode, 0.0, width=-1e-6)
