"""Optical force on the wire from the intracavity light field.

The resonant field at the wire is a finite sum of plane waves: the
two-dimensional expansion of the fundamental mode, one set per
propagation direction, weighted by the sub-cavity amplitudes A+
(forward) and B- (backward) referenced to the z = 0 plane.  For plane
waves on an infinite dielectric cylinder the cycle-averaged force has
a closed form: the Maxwell stress tensor integrated around the wire
reduces to a bilinear sum over the cylindrical partial waves of each
ordered pair of components.  Summing the closed form over all pairs
gives the transverse force with no field quadrature at all; the tests
check it against a direct stress-tensor integration on a circle.

One ordered pair (j1, j2) contributes the complex number

    F~ = P K a1 a2 s1 s2 exp(-i Phi)
         sum_l Lam_l Im[conj(D_l) D_{l+1} exp(-i (l+1/2)(phi1 - phi2))]

whose parts are the force components, Fx = Im F~ and Fz = Re F~ (so a
self pair, j1 = j2, gives pure radiation pressure along its own
propagation direction).  a_j = |E_j| and psi_j = arg E_j are taken
from the dimensionless component amplitudes at the origin, phi_j is
the incidence angle around the wire axis, and

    Phi = psi1 - psi2 + (kappa1 - kappa2) . r0 + (phi1 + phi2) / 2

evaluates the interference phase at the wire position r0 = (x0, z0).
s_j is the hemisphere sign that maps the lab-fixed transverse axes
onto the frame attached to each wave: +1 always for the parallel
polarization (the field points along the wire either way) and
sign(k_z) for the perpendicular one, whose amplitudes are referenced
to the fixed +e_x axis.  The expansion components already carry this
sign as their ``sigma`` attribute.

The kernels depend only on the wire and the wavelength.  With
rho = k R, m the relative refractive index, and J/H evaluated at
m rho inside and rho outside:

    par :  D_l = k (J_l H'_l - m J'_l H_l),
           Lam_l = J_l J_{l+1} / (|D_l|^2 |D_{l+1}|^2)
    perp:  D_l = k (J'_l H_l - m J_l H'_l),
           Lam_l = (l (l+1) / rho^2 J_l J_{l+1} + J'_l J'_{l+1})
                   / (|D_l|^2 |D_{l+1}|^2)

These D_l are (up to sign) the resonance denominators of the single
cylinder scattering coefficients, which the tests pin down.  The
scale K = 4 (n^2 - 1) / (pi c R) together with the incident power P
carried by the mode makes F~ come out in newtons: the amplitudes are
normalized so |E|^2 integrates to one across the mode, so P K a1 a2
times the Lam D D length-squared factor has units N.

Total-force evaluations lock the cavity (or accept an explicit
length), mirror the scan conventions of the response maps, and expose
the curl of the force field, whose nonzero values measure how far the
standing-wave force pattern is from a potential landscape.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import bessel
from .cavity import find_resonance, intracavity_amplitudes, photon_number
from .constants import (C_LIGHT, DELTA_K, ETA_FIBER, INPUT_POWER, L_MAX,
                        LONGITUDINAL_ORDER, N_EXPANSION_TERMS, T_INPUT,
                        WAVELENGTH, wavenumber)
from .hgmodes import POLARIZATIONS, mode_geometry
from .mie import NanowireSpec
from .optomech import MapAxis, MapGrid, _tracked_fit, coupling_strength, \
    wire_pair
from .planewave import plane_wave_expansion_2d

SHELL_RTOL = 1e-6          # |kappa| vs k agreement required of a component
PLANE_RTOL = 1e-9          # tolerated out-of-plane wavevector fraction


def hemisphere_sign(wavevector, polarization):
    """Sign mapping a lab-referenced amplitude onto the wave frame.

    Parallel fields point along the wire for either propagation
    direction: the sign is +1.  Perpendicular amplitudes are
    referenced to the fixed +e_x axis, which coincides with the
    frame-attached polarization of a wave moving toward +z and is
    opposite for one moving toward -z: the sign is sign(k_z).  A
    perpendicular wave with k_z = 0 has no hemisphere and is rejected.
    """
    if polarization not in POLARIZATIONS:
        raise ValueError(f"unknown polarization {polarization!r}")
    if polarization == "par":
        return 1.0
    kz = float(np.asarray(wavevector, dtype=float).reshape(3)[2])
    if kz == 0.0:
        raise ValueError("hemisphere sign of a perpendicular wave is "
                         "undefined for k_z = 0")
    return math.copysign(1.0, kz)


@dataclass(frozen=True)
class ForceKernels:
    """Wire-and-wavelength part of the pair force, cached per spec.

    ``lam`` holds Lam_l for l = 0..l_max and ``dvals`` the partial-wave
    denominators D_l for l = 0..l_max+1 (the sum couples neighbouring
    orders).  ``prefactor`` is K = 4 (n^2 - 1) / (pi c R), zero for a
    vacuum wire or a zero radius.
    """

    radius: float
    refractive_index: float
    wavelength: float
    polarization: str
    l_max: int
    prefactor: float
    lam: np.ndarray
    dvals: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.lam, dtype=float)
        dvals = np.asarray(self.dvals, dtype=complex)
        if lam.shape != (self.l_max + 1,):
            raise ValueError(f"lam must have shape ({self.l_max + 1},)")
        if dvals.shape != (self.l_max + 2,):
            raise ValueError(f"dvals must have shape ({self.l_max + 2},)")
        if not (np.all(np.isfinite(lam)) and np.all(np.isfinite(dvals))):
            raise ValueError("kernel tables must be finite")
        lam.flags.writeable = False
        dvals.flags.writeable = False
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "dvals", dvals)

    @property
    def wavenumber(self):
        return wavenumber(self.wavelength)

    def hemisphere_sign(self, wavevector):
        return hemisphere_sign(wavevector, self.polarization)


@lru_cache(maxsize=128)
def _kernel_tables(radius, index, wavelength, polarization, l_max):
    if radius == 0.0:
        return 0.0, np.zeros(l_max + 1), np.zeros(l_max + 2, dtype=complex)
    k = wavenumber(wavelength)
    rho = k * radius
    count = l_max + 1
    j_in = bessel.jn_table(count, index * rho)
    jp_in = bessel.deriv_table(j_in, index * rho)
    h_out = bessel.hn_table(count, rho)
    hp_out = bessel.deriv_table(h_out, rho)
    if polarization == "par":
        dvals = k * (j_in * hp_out - index * jp_in * h_out)
        numerator = j_in[:-1] * j_in[1:]
    else:
        dvals = k * (jp_in * h_out - index * j_in * hp_out)
        orders = np.arange(count, dtype=float)
        numerator = (orders * (orders + 1.0) / rho ** 2
                     * j_in[:-1] * j_in[1:]
                     + jp_in[:-1] * jp_in[1:])
    weight = np.abs(dvals) ** 2
    lam = numerator / (weight[:-1] * weight[1:])
    prefactor = 4.0 * (index ** 2 - 1.0) / (math.pi * C_LIGHT * radius)
    return prefactor, lam, dvals


def force_kernels(spec, wavelength, polarization, l_max=L_MAX):
    """Pair-force kernel tables for one wire, wavelength, polarization.

    The heavy Bessel work is cached on the scalar key, so repeated
    calls for the same wire are free.
    """
    if polarization not in POLARIZATIONS:
        raise ValueError(f"unknown polarization {polarization!r}")
    if not (np.isfinite(wavelength) and wavelength > 0):
        raise ValueError("wavelength must be positive")
    if l_max < 1:
        raise ValueError("l_max must be >= 1; the pair sum couples "
                         "neighbouring azimuthal orders")
    prefactor, lam, dvals = _kernel_tables(
        float(spec.radius), float(spec.refractive_index), float(wavelength),
        polarization, int(l_max))
    return ForceKernels(radius=float(spec.radius),
                        refractive_index=float(spec.refractive_index),
                        wavelength=float(wavelength),
                        polarization=polarization, l_max=int(l_max),
                        prefactor=prefactor, lam=lam, dvals=dvals)


@dataclass(frozen=True)
class PairForceTerm:
    """Contribution of one ordered component pair to the force.

    ``value`` is the complex combination F~; its imaginary and real
    parts are the transverse force components in newtons.
    """

    j1: int
    j2: int
    value: complex

    @property
    def fx(self):
        return self.value.imag

    @property
    def fz(self):
        return self.value.real


def _require_on_shell(kernels, component):
    kv = np.asarray(component.wavevector, dtype=float).reshape(3)
    k = kernels.wavenumber
    if abs(kv[1]) > PLANE_RTOL * k:
        raise ValueError("pair force needs in-plane components (k_y = 0)")
    if abs(math.hypot(kv[0], kv[2]) - k) > SHELL_RTOL * k:
        raise ValueError("component wavevector is off the kernel shell; "
                         "wavelengths do not match")
    return kv


def pair_force(kernels, comp1, comp2, *, position=(0.0, 0.0),
               incident_power=1.0, indices=(0, 0)):
    """Force term of one ordered component pair at a wire position.

    ``incident_power`` is the power P carried by the expanded mode
    (the default gives the force per watt).  The self pair
    (comp1 is comp2) is the radiation pressure of that component.
    """
    kv1 = _require_on_shell(kernels, comp1)
    kv2 = _require_on_shell(kernels, comp2)
    if incident_power < 0.0:
        raise ValueError("incident power must be nonnegative")
    x0, z0 = (float(position[0]), float(position[1]))
    phi1 = float(comp1.incidence[0])
    phi2 = float(comp2.incidence[0])
    psi1 = np.angle(comp1.amplitude)
    psi2 = np.angle(comp2.amplitude)
    big_phi = (psi1 - psi2 + (kv1[0] - kv2[0]) * x0 + (kv1[2] - kv2[2]) * z0
               + 0.5 * (phi1 + phi2))
    cross = np.conj(kernels.dvals[:-1]) * kernels.dvals[1:]
    orders = np.arange(kernels.l_max + 1) + 0.5
    series = kernels.lam @ np.imag(
        cross * np.exp(-1j * orders * (phi1 - phi2)))
    value = (incident_power * kernels.prefactor
             * abs(comp1.amplitude) * abs(comp2.amplitude)
             * comp1.sigma * comp2.sigma
             * np.exp(-1j * big_phi) * series)
    return PairForceTerm(j1=int(indices[0]), j2=int(indices[1]),
                         value=complex(value))


@dataclass(frozen=True)
class ForceVector:
    """Transverse optical force on the wire, in newtons."""

    fx: float
    fz: float
    position: tuple
    input_power: float
    polarization: str
    cavity_length: float

    def __post_init__(self):
        if not (np.isfinite(self.fx) and np.isfinite(self.fz)):
            raise ValueError("force components must be finite")
        object.__setattr__(self, "position",
                           (float(self.position[0]), float(self.position[1])))


def _component_arrays(components, weight):
    amp = np.array([c.amplitude for c in components], dtype=complex) * weight
    phi = np.array([c.incidence[0] for c in components], dtype=float)
    kx = np.array([c.wavevector[0] for c in components], dtype=float)
    kz = np.array([c.wavevector[2] for c in components], dtype=float)
    sig = np.array([c.sigma for c in components], dtype=float)
    return amp, phi, kx, kz, sig


def _pair_sum(kernels, amp, phi, kx, kz, sig, x0, z0, incident_power):
    """Vectorized double sum of the pair force over all components."""
    mag = np.abs(amp)
    psi = np.angle(amp)
    dphi = phi[:, None] - phi[None, :]
    big_phi = (psi[:, None] - psi[None, :]
               + (kx[:, None] - kx[None, :]) * x0
               + (kz[:, None] - kz[None, :]) * z0
               + 0.5 * (phi[:, None] + phi[None, :]))
    cross = np.conj(kernels.dvals[:-1]) * kernels.dvals[1:]
    orders = np.arange(kernels.l_max + 1) + 0.5
    series = np.imag(cross[None, None, :]
                     * np.exp(-1j * orders * dphi[:, :, None])) @ kernels.lam
    terms = (incident_power * kernels.prefactor
             * (mag[:, None] * mag[None, :])
             * (sig[:, None] * sig[None, :])
             * np.exp(-1j * big_phi) * series)
    return complex(terms.sum())


def force_from_amplitudes(cavity, spec, position, amplitudes, *,
                          input_power=INPUT_POWER,
                          n_terms=N_EXPANSION_TERMS, delta_k=DELTA_K,
                          l_max=L_MAX, check=False):
    """Force at ``position`` for given sub-cavity amplitudes.

    The expansion components of the mode at the amplitudes' cavity
    length are weighted by A+ (forward set) and B- (backward set) and
    fed through the pair sum.  ``input_power`` is the laser power at
    the injection fiber; the power reaching the mode carries the fiber
    and input coupling factors.
    """
    if input_power < 0.0:
        raise ValueError("input power must be nonnegative")
    pol = amplitudes.polarization
    geometry = dataclasses.replace(cavity, length=amplitudes.cavity_length)
    mode = mode_geometry(geometry)
    forward = plane_wave_expansion_2d(mode, pol, 1, n_terms=n_terms,
                                      delta_k=delta_k, check=check)
    backward = plane_wave_expansion_2d(mode, pol, -1, n_terms=n_terms,
                                       delta_k=delta_k, check=check)
    stacks = [_component_arrays(forward, amplitudes.a_plus),
              _component_arrays(backward, amplitudes.b_minus)]
    amp, phi, kx, kz, sig = (np.concatenate(parts)
                             for parts in zip(*stacks))
    kernels = force_kernels(spec, cavity.wavelength, pol, l_max=l_max)
    incident = ETA_FIBER * T_INPUT * float(input_power)
    x0, z0 = (float(position[0]), float(position[1]))
    value = _pair_sum(kernels, amp, phi, kx, kz, sig, x0, z0, incident)
    return ForceVector(fx=value.imag, fz=value.real, position=(x0, z0),
                       input_power=float(input_power), polarization=pol,
                       cavity_length=amplitudes.cavity_length)


def total_force(cavity, spec, polarization, position, *, cavity_length=None,
                input_power=INPUT_POWER, pump_side="left", database=None,
                method="approx", n_terms=N_EXPANSION_TERMS, delta_k=DELTA_K,
                l_max=L_MAX):
    """Optical force on the wire at one position, cavity locked.

    With ``cavity_length`` None the cavity is first tuned to the
    resonance of the loaded system (the locked convention used by the
    response maps); passing a length evaluates the force at that
    detuned length instead.
    """
    pair = wire_pair(cavity, spec.radius,
                     (float(position[0]), float(position[1])), polarization,
                     database=database, method=method)
    if cavity_length is None:
        cavity_length = find_resonance(cavity, pair).resonant_length
    amplitudes = intracavity_amplitudes(cavity, pair,
                                        cavity_length=cavity_length,
                                        pump_side=pump_side)
    return force_from_amplitudes(cavity, spec, position, amplitudes,
                                 input_power=input_power, n_terms=n_terms,
                                 delta_k=delta_k, l_max=l_max)


def curl_map(force_x, force_z, x_values, z_values, flags=None):
    """y-curl of the transverse force field on an (x0, z0) grid.

    Central differences inside the grid, one-sided at its edges.
    Cells flagged False are set to NaN first, so the curl is NaN
    wherever its stencil would touch an untrusted cell.
    """
    fx = np.array(force_x, dtype=float)
    fz = np.array(force_z, dtype=float)
    x_values = np.asarray(x_values, dtype=float)
    z_values = np.asarray(z_values, dtype=float)
    if fx.shape != fz.shape or fx.shape != (x_values.size, z_values.size):
        raise ValueError("force arrays must both have shape "
                         "(len(x_values), len(z_values))")
    if x_values.size < 2 or z_values.size < 2:
        raise ValueError("need at least two nodes per axis for the curl")
    if flags is not None:
        bad = ~np.asarray(flags, dtype=bool)
        if bad.shape != fx.shape:
            raise ValueError("flags must match the force grid shape")
        fx[bad] = np.nan
        fz[bad] = np.nan
    dfx_dz = np.gradient(fx, z_values, axis=1)
    dfz_dx = np.gradient(fz, x_values, axis=0)
    return dfx_dz - dfz_dx


def force_map(cavity, spec, polarization, *, x_values=None, z_values=None,
              input_power=INPUT_POWER, pump_side="left", database=None,
              method="approx", n_terms=N_EXPANSION_TERMS, delta_k=DELTA_K,
              l_max=L_MAX):
    """Locked-cavity force field over wire positions, with its curl.

    Same grid defaults and tracked resonance seeding as the response
    maps; unresolvable pixels are flagged False and excluded from the
    curl.  Payloads: force components, curl, photon count, locked
    length, fit quality.
    """
    if polarization not in POLARIZATIONS:
        raise ValueError(f"unknown polarization {polarization!r}")
    if x_values is None:
        x_values = np.arange(-60, 61) * 50e-9
    if z_values is None:
        z_values = np.arange(-8, 9) * 50e-9
    x_values = np.asarray(x_values, dtype=float)
    z_values = np.asarray(z_values, dtype=float)
    empty = find_resonance(cavity)
    incident = ETA_FIBER * T_INPUT * float(input_power)

    n_x, n_z = x_values.size, z_values.size
    names = ("force_x", "force_z", "photon_count", "resonant_length",
             "fit_quality")
    payloads = {name: np.full((n_x, n_z), np.nan) for name in names}
    flags = np.zeros((n_x, n_z), dtype=bool)

    row_seed = None
    for ix, x0 in enumerate(x_values):
        seed = row_seed
        row_seed = None
        for iz, z0 in enumerate(z_values):
            position = (float(x0), float(z0))
            pair = wire_pair(cavity, spec.radius, position, polarization,
                             database=database, method=method)
            try:
                res = _tracked_fit(cavity, pair, seed)
            except RuntimeError:
                continue
            seed = res.resonant_length
            if row_seed is None:
                row_seed = res.resonant_length
            amplitudes = intracavity_amplitudes(
                cavity, pair, cavity_length=res.resonant_length,
                pump_side=pump_side)
            vec = force_from_amplitudes(cavity, spec, position, amplitudes,
                                        input_power=input_power,
                                        n_terms=n_terms, delta_k=delta_k,
                                        l_max=l_max)
            flags[ix, iz] = True
            payloads["force_x"][ix, iz] = vec.fx
            payloads["force_z"][ix, iz] = vec.fz
            payloads["photon_count"][ix, iz] = photon_number(
                cavity, amplitudes, power=incident)
            payloads["resonant_length"][ix, iz] = res.resonant_length
            payloads["fit_quality"][ix, iz] = res.fit_quality
    payloads["curl"] = curl_map(payloads["force_x"], payloads["force_z"],
                                x_values, z_values, flags=flags)

    metadata = {
        "map": "force_xz",
        "radius": spec.radius,
        "polarization": polarization,
        "method": method if database is None
        else database.metadata.get("method", method),
        "wavelength": cavity.wavelength,
        "input_power": float(input_power),
        "incident_power": incident,
        "pump_side": pump_side,
        "empty_resonant_length": empty.resonant_length,
        "empty_finesse": empty.finesse,
    }
    return MapGrid(axes=(MapAxis("x0", x_values), MapAxis("z0", z_values)),
                   payloads=payloads, flags=flags, metadata=metadata)


def force_vs_radius_per_photon(cavity, radii, polarization="perp", *,
                               z_values=None, input_power=INPUT_POWER,
                               pump_side="left", database=None,
                               method="approx", n_terms=N_EXPANSION_TERMS,
                               delta_k=DELTA_K, l_max=L_MAX):
    """Axial force per photon against wire radius, on the cavity axis.

    For every radius the wire scans one standing-wave period on axis
    (x0 = 0) with the cavity locked per point.  The force is reported
    both raw and per intracavity photon (photon number taken from the
    declared sub-cavity energy normalization), next to the cavity pull
    G_z derived from the same locked-length profile, so force-based
    and shift-based views of the coupling can be compared row by row.
    """
    if polarization not in POLARIZATIONS:
        raise ValueError(f"unknown polarization {polarization!r}")
    radii = np.asarray(radii, dtype=float)
    if radii.ndim != 1 or radii.size < 1:
        raise ValueError("radii must be a 1-d array")
    lam = cavity.wavelength
    if z_values is None:
        z_values = np.linspace(-0.25 * lam, 0.25 * lam, 25)
    z_values = np.asarray(z_values, dtype=float)
    incident = ETA_FIBER * T_INPUT * float(input_power)

    n_r, n_z = radii.size, z_values.size
    names = ("force_x", "force_z", "force_per_photon", "photon_count",
             "coupling_gradient", "resonant_length", "fit_quality")
    payloads = {name: np.full((n_r, n_z), np.nan) for name in names}
    flags = np.zeros((n_r, n_z), dtype=bool)

    for ir, radius in enumerate(radii):
        spec_r = NanowireSpec(radius=float(radius))
        seed = None
        for iz, z0 in enumerate(z_values):
            position = (0.0, float(z0))
            pair = wire_pair(cavity, float(radius), position, polarization,
                             database=database, method=method)
            try:
                res = _tracked_fit(cavity, pair, seed)
            except RuntimeError:
                continue
            seed = res.resonant_length
            amplitudes = intracavity_amplitudes(
                cavity, pair, cavity_length=res.resonant_length,
                pump_side=pump_side)
            vec = force_from_amplitudes(cavity, spec_r, position, amplitudes,
                                        input_power=input_power,
                                        n_terms=n_terms, delta_k=delta_k,
                                        l_max=l_max)
            photons = photon_number(cavity, amplitudes, power=incident)
            flags[ir, iz] = True
            payloads["force_x"][ir, iz] = vec.fx
            payloads["force_z"][ir, iz] = vec.fz
            payloads["force_per_photon"][ir, iz] = \
                vec.fz / photons if photons > 0.0 else np.nan
            payloads["photon_count"][ir, iz] = photons
            payloads["resonant_length"][ir, iz] = res.resonant_length
            payloads["fit_quality"][ir, iz] = res.fit_quality
        if n_z >= 2:
            payloads["coupling_gradient"][ir] = coupling_strength(
                z_values, payloads["resonant_length"][ir],
                order=LONGITUDINAL_ORDER, wavelength=lam, flags=flags[ir])

    metadata = {
        "map": "force_per_photon",
        "polarization": polarization,
        "method": method if database is None
        else database.metadata.get("method", method),
        "wavelength": lam,
        "input_power": float(input_power),
        "incident_power": incident,
        "pump_side": pump_side,
        "longitudinal_order": LONGITUDINAL_ORDER,
    }
    return MapGrid(axes=(MapAxis("radius", radii), MapAxis("z0", z_values)),
                   payloads=payloads, flags=flags, metadata=metadata)
