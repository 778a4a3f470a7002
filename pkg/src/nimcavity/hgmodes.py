"""Hermite-Gaussian mode algebra for a symmetric spherical-mirror cavity.

Beams propagate along +/-z with scalar profile

    E(r) = rho(r) exp(+/- i phi(r))
    rho  = A0 (w0/w) exp(-r_perp^2/w^2) H_nx(sqrt(2) x/w) H_ny(sqrt(2) y/w)
    phi  = k z - (1 + nx + ny) Psi(z) + k r_perp^2 / (2 R(z))

where w(z) = w0 sqrt(1 + (z/z_R)^2), Psi(z) = arctan(z/z_R) is the Gouy
phase, R(z) = z_R^2/z + z the wavefront curvature radius and H_n the
physicists' Hermite polynomials (time convention e^{-i omega t}).  The
normalization A0 gives a unit scalar product <E|E> = integral |E|^2 d^2r
on any transverse plane; planar normalization is valid because the mode
stays much narrower than the mirrors.

Polarization lies in the (xy) plane and follows the nanowire-axis
labels shared with :mod:`nimcavity.mie`: "par" means e_P = -e_y (field
along the wire axis), "perp" means e_P = +e_x.

Propagation inside the cavity is tracked through the reduced field pair
(F+, F-) at a plane z, F(+/-) = A(+/-) exp(+/- i phi0(z)) with
phi0(z) = k z - (1 + nx + ny) Psi(z).  Free propagation and mirror
reflections act on the pair as 2x2 transfer matrices of unit
determinant; mirrors carry an eta = +/-1 reflection phase choice.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.polynomial.hermite import hermval

from .constants import (
    CAVITY_LENGTH,
    ETA_LEFT,
    ETA_RIGHT,
    LONGITUDINAL_ORDER,
    MIRROR_CURVATURE,
    MIRROR_DIAMETER,
    MIRROR_REFLECTIVITY,
    WAVELENGTH,
)

POLARIZATIONS = ("par", "perp")


def polarization_axis(polarization):
    """Unit polarization vector: "par" -> -e_y, "perp" -> +e_x."""
    if polarization == "par":
        return np.array([0.0, -1.0, 0.0])
    if polarization == "perp":
        return np.array([1.0, 0.0, 0.0])
    raise ValueError(f"polarization must be one of {POLARIZATIONS}, "
                     f"got {polarization!r}")


@dataclass(frozen=True)
class CavityGeometry:
    """Symmetric two-mirror cavity parameters.

    Mirrors are spherical caps of curvature radius ``mirror_curvature``
    and transverse size ``mirror_transverse_size`` located at z =
    -length/2 (left) and +length/2 (right), treated as lossless beam
    splitters of intensity reflectivity R and transmission 1 - R.
    ``eta_left``/``eta_right`` pick the +/-1 reflection phases; the
    defaults put a node of the resonant field at the cavity center.
    """

    length: float = CAVITY_LENGTH
    mirror_curvature: float = MIRROR_CURVATURE
    mirror_transverse_size: float = MIRROR_DIAMETER
    reflectivity_left: float = MIRROR_REFLECTIVITY
    reflectivity_right: float = MIRROR_REFLECTIVITY
    wavelength: float = WAVELENGTH
    longitudinal_order: int = LONGITUDINAL_ORDER
    eta_left: float = ETA_LEFT
    eta_right: float = ETA_RIGHT

    def __post_init__(self):
        if not (np.isfinite(self.length) and self.length > 0):
            raise ValueError("cavity length must be positive and finite")
        if not (np.isfinite(self.mirror_curvature) and self.mirror_curvature > 0):
            raise ValueError("mirror curvature radius must be positive")
        if not (np.isfinite(self.wavelength) and self.wavelength > 0):
            raise ValueError("wavelength must be positive")
        g = self.stability
        if not 0.0 < g < 1.0:
            raise ValueError(f"unstable cavity: g = 1 - L/R_c = {g:.6g} "
                             "is outside (0, 1)")
        for name in ("reflectivity_left", "reflectivity_right"):
            refl = getattr(self, name)
            if not 0.0 <= refl < 1.0:
                raise ValueError(f"{name} must lie in [0, 1); a unit-"
                                 "reflectivity mirror is singular")
        for name in ("eta_left", "eta_right"):
            if getattr(self, name) not in (-1.0, 1.0):
                raise ValueError(f"{name} must be +1 or -1")

    @property
    def stability(self):
        """Stability parameter g = 1 - L/R_c of the symmetric cavity."""
        return 1.0 - self.length / self.mirror_curvature


@dataclass(frozen=True)
class ModeGeometry:
    """Gaussian mode geometry: waist w0 and Rayleigh length z_R.

    The wavelength is implied, lambda = pi w0^2 / z_R.
    """

    waist: float
    rayleigh_length: float

    @property
    def wavelength(self):
        return math.pi * self.waist ** 2 / self.rayleigh_length

    @property
    def wavenumber(self):
        return 2.0 * self.rayleigh_length / self.waist ** 2

    def beam_radius(self, z):
        """Transverse 1/e field radius w(z)."""
        z = np.asarray(z, dtype=float)
        return self.waist * np.sqrt(1.0 + (z / self.rayleigh_length) ** 2)

    def gouy_phase(self, z):
        """Gouy phase Psi(z) = arctan(z/z_R), odd in z."""
        return np.arctan(np.asarray(z, dtype=float) / self.rayleigh_length)

    def curvature_radius(self, z):
        """Wavefront curvature radius R(z) = z_R^2/z + z (infinite at z = 0)."""
        z = np.asarray(z, dtype=float)
        with np.errstate(divide="ignore"):
            return self.rayleigh_length ** 2 / z + z

    def reduced_phase(self, z, nx=0, ny=0):
        """Reduced-field phase phi0(z) = k z - (1 + nx + ny) Psi(z)."""
        return self.wavenumber * np.asarray(z, dtype=float) \
            - (1 + nx + ny) * self.gouy_phase(z)


def mode_geometry(cavity):
    """Mode geometry imposed by a stable symmetric cavity.

    The Rayleigh length is z_R = (L/2) sqrt((1+g)/(1-g)) with
    g = 1 - L/R_c, and the waist follows from w0^2 = z_R lambda / pi.
    """
    g = cavity.stability
    z_r = 0.5 * cavity.length * math.sqrt((1.0 + g) / (1.0 - g))
    return ModeGeometry(waist=math.sqrt(z_r * cavity.wavelength / math.pi),
                        rayleigh_length=z_r)


def _normalization(mode, nx, ny):
    # <E|E> = 1 on a transverse plane, in closed form
    return math.sqrt(2.0 / (math.pi * mode.waist ** 2)) \
        / math.sqrt(2.0 ** (nx + ny) * math.factorial(nx) * math.factorial(ny))


def _check_mode_indices(nx, ny):
    for n in (nx, ny):
        if not isinstance(n, (int, np.integer)) or n < 0:
            raise ValueError("mode indices nx, ny must be integers >= 0")


def _check_direction(direction):
    if direction not in (-1, 1):
        raise ValueError("direction must be +1 or -1")


def hg_scalar(mode, nx, ny, points, direction=1):
    """Scalar Hermite-Gaussian field at Cartesian points, shape (..., 3).

    Returns the complex amplitude of the (nx, ny) mode propagating
    along +z (direction=+1, phase e^{+i phi}) or -z (direction=-1,
    phase e^{-i phi}), normalized to unit planar scalar product.
    """
    _check_mode_indices(nx, ny)
    _check_direction(direction)
    pts = np.asarray(points, dtype=float)
    if pts.shape[-1] != 3:
        raise ValueError("points must have a trailing axis of size 3")
    x, y, z = pts[..., 0], pts[..., 1], pts[..., 2]

    z_r = mode.rayleigh_length
    w = mode.beam_radius(z)
    r2 = x * x + y * y
    hx = hermval(math.sqrt(2.0) * x / w, [0.0] * nx + [1.0])
    hy = hermval(math.sqrt(2.0) * y / w, [0.0] * ny + [1.0])
    rho = _normalization(mode, nx, ny) * (mode.waist / w) \
        * np.exp(-r2 / (w * w)) * hx * hy

    # k r^2 / (2 R(z)) written as k r^2 z / (2 (z_R^2 + z^2)): no pole at z = 0
    k = mode.wavenumber
    phase = k * z - (1 + nx + ny) * mode.gouy_phase(z) \
        + k * r2 * z / (2.0 * (z_r * z_r + z * z))
    return rho * np.exp(1j * direction * phase)


def hg_field(mode, nx, ny, points, direction=1, polarization="perp"):
    """Vector Hermite-Gaussian field: hg_scalar times the polarization axis."""
    e_p = polarization_axis(polarization)
    return hg_scalar(mode, nx, ny, points, direction)[..., np.newaxis] * e_p


class ReducedFieldPair(NamedTuple):
    """Forward/backward reduced field amplitudes (F+, F-) at a plane z."""

    forward: complex
    backward: complex


@dataclass(frozen=True, eq=False)
class TransferMatrix2:
    """2x2 complex transfer matrix acting on reduced field pairs."""

    m: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.m, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError("transfer matrix must be 2x2")
        object.__setattr__(self, "m", m)

    @classmethod
    def identity(cls):
        return cls(np.eye(2))

    def __matmul__(self, other):
        return TransferMatrix2(self.m @ other.m)

    @property
    def det(self):
        return self.m[0, 0] * self.m[1, 1] - self.m[0, 1] * self.m[1, 0]

    def apply(self, pair):
        f = self.m[0, 0] * pair.forward + self.m[0, 1] * pair.backward
        b = self.m[1, 0] * pair.forward + self.m[1, 1] * pair.backward
        return ReducedFieldPair(f, b)


def propagation_matrix(z1, z2, mode, nx=0, ny=0):
    """Free propagation of (F+, F-) from plane z1 to plane z2.

    Diagonal matrix diag(e^{+i d}, e^{-i d}) with
    d = phi0(z2) - phi0(z1); matrices compose as a one-parameter group.
    """
    _check_mode_indices(nx, ny)
    d = mode.reduced_phase(z2, nx, ny) - mode.reduced_phase(z1, nx, ny)
    return TransferMatrix2(np.diag([np.exp(1j * d), np.exp(-1j * d)]))


def mirror_matrix(reflectivity, eta):
    """Mirror beam-splitter transfer matrix (1/t) [[1, eta r], [eta r, 1]].

    r = sqrt(R), t = sqrt(1 - R); the determinant is 1 for any R and
    either eta = +/-1 phase choice.
    """
    if not 0.0 <= reflectivity < 1.0:
        raise ValueError("mirror reflectivity must lie in [0, 1); a unit-"
                         "reflectivity mirror gives a singular matrix")
    if eta not in (-1.0, 1.0):
        raise ValueError("eta must be +1 or -1")
    r = math.sqrt(reflectivity)
    t = math.sqrt(1.0 - reflectivity)
    return TransferMatrix2(np.array([[1.0, eta * r], [eta * r, 1.0]]) / t)
