"""Fabry-Perot response of the wire-loaded cavity and resonance fitting.

The cavity is a chain of 2x2 transfer matrices acting on the reduced
field pair (F+, F-): a lossless beam-splitter matrix per mirror, the
wire scattering matrix at its plane z0, and diagonal reduced-phase
propagation in between,

    M = M_mirror,R  P(z0 -> L/2)  M_wire  P(-L/2 -> z0)  M_mirror,L.

Pumping from the left with no field entering from the right, the
outgoing amplitudes are c_r = -M21/M22 and c_t = det M / M22, and the
scattered fraction follows from energy conservation.  The mode geometry
is recomputed for every scanned length, so the one-way phase includes
the length-dependent Gouy term.  Wire coefficient pairs are taken as
given (they are computed once for the nominal geometry; over a scan of
a fraction of the free spectral range their drift is negligible).

Resonances are located by a coarse transmission scan, refined around
the peak, and fitted with a Lorentzian (amplitude, center, width,
offset).  The finesse is the ratio of the local resonance spacing to
the fitted width, which equals the round-trip-phase definition
pi / FWHM_phase; in length units the spacing exceeds half a wavelength
by the Gouy stretch (0.53 percent here), which the fit accounts for.

The intracavity amplitudes referenced to the z = 0 plane follow by
propagating the outgoing seed through the left mirror ((1, c_r) for a
left pump, (0, c_t) for a right one): the A pair describes the field
between the left mirror and the wire, the B pair additionally crosses
the wire matrix and describes the field between the wire and the
right mirror.  The photon number uses the declared normalization
energy / (hbar omega) with the energy P_inc (|F+|^2 + |F-|^2) dz / c
accumulated over each sub-cavity.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, curve_fit

from .constants import (C_LIGHT, ETA_FIBER, HBAR, INPUT_POWER, T_INPUT,
                        wavenumber)
from .coupling import PASSIVITY_TOL, nanowire_transfer_matrix
from .hgmodes import (POLARIZATIONS, ReducedFieldPair, mirror_matrix,
                      mode_geometry, propagation_matrix)

# power reaching the cavity: injected power reduced by the laser-fiber
# and fiber-cavity coupling efficiencies
INCIDENT_POWER = ETA_FIBER * T_INPUT * INPUT_POWER

PUMP_SIDES = ("left", "right")


@dataclass(frozen=True)
class CavityResponse:
    """Outgoing amplitudes and intensity budget at one cavity length."""

    c_r: complex
    c_t: complex
    reflectance: float
    transmittance: float
    loss: float
    cavity_length: float
    polarization: str

    def __post_init__(self):
        for name in ("reflectance", "transmittance", "loss"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} = {value:.3e} is outside [0, 1]")
        budget = self.reflectance + self.transmittance + self.loss
        if abs(budget - 1.0) > 1e-9:
            raise ValueError(f"intensity budget sums to {budget!r}, not 1")


@dataclass(frozen=True)
class ResonanceResult:
    """Fitted resonance: position, linewidth, finesse, fit residual."""

    resonant_length: float
    finesse: float
    linewidth_length: float
    linewidth_angular: float
    fit_quality: float
    free_spectral_range: float

    def __post_init__(self):
        for name in ("resonant_length", "finesse", "linewidth_length",
                     "linewidth_angular", "free_spectral_range"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ValueError(f"{name} must be finite and positive, "
                                 f"got {value!r}")


@dataclass(frozen=True)
class IntracavityAmplitudes:
    """Reduced field amplitudes of the two sub-cavities at z = 0.

    The A pair extrapolates the field between the left mirror and the
    wire plane to z = 0; the B pair does the same for the field between
    the wire plane and the right mirror.  Without a wire they coincide.
    """

    a_plus: complex
    a_minus: complex
    b_plus: complex
    b_minus: complex
    wire_plane: float
    cavity_length: float
    polarization: str


def _scan_mode(cavity, length):
    """Mode geometry with the cavity rescaled to a scanned length."""
    if length == cavity.length:
        return mode_geometry(cavity)
    return mode_geometry(dataclasses.replace(cavity, length=length))


def _resolve_pair(coeffs, polarization):
    """Normalize the wire-coefficient argument and pick the polarization."""
    if coeffs is None:
        pol = "par" if polarization is None else polarization
        if pol not in POLARIZATIONS:
            raise ValueError(f"unknown polarization {pol!r}")
        return None, pol
    try:
        forward, backward = coeffs
    except (TypeError, ValueError):
        raise TypeError(
            "wire coefficients must be a (forward, backward) pair; build "
            "the backward set from the mirrored position with "
            "coupling.extend_by_symmetry") from None
    if polarization is not None and polarization != forward.polarization:
        raise ValueError(f"requested polarization {polarization!r} does not "
                         f"match the coefficient pair "
                         f"({forward.polarization!r})")
    return (forward, backward), forward.polarization


def _chain_matrix(cavity, pair, length, wire=None):
    """Composed transfer matrix from outside the left mirror to outside
    the right mirror; ``wire`` may carry a prebuilt wire matrix."""
    mode = _scan_mode(cavity, length)
    left = mirror_matrix(cavity.reflectivity_left, cavity.eta_left)
    right = mirror_matrix(cavity.reflectivity_right, cavity.eta_right)
    half = 0.5 * length
    if pair is None:
        return right @ propagation_matrix(-half, half, mode) @ left
    z0 = pair[0].position[1]
    if not -half < z0 < half:
        raise ValueError(f"wire plane z0 = {z0:.3e} m lies outside the "
                         f"cavity of length {length:.3e} m")
    if wire is None:
        wire = nanowire_transfer_matrix(*pair)
    return (right @ propagation_matrix(z0, half, mode) @ wire
            @ propagation_matrix(-half, z0, mode) @ left)


def _solve_outgoing(matrix, pump_side):
    """Outgoing (c_r, c_t) for a unit drive on the chosen side."""
    m = matrix.m
    if abs(m[1, 1]) < 1e-12 * max(float(np.abs(m).max()), 1.0):
        raise RuntimeError("singular transfer chain (blocked cavity): the "
                           "outgoing fields are not determined")
    if pump_side == "left":
        return -m[1, 0] / m[1, 1], matrix.det / m[1, 1]
    return m[0, 1] / m[1, 1], 1.0 / m[1, 1]


def cavity_response(cavity, coeffs=None, cavity_length=None,
                    polarization=None, pump_side="left"):
    """Reflection, transmission, and loss of the (wire-loaded) cavity.

    ``coeffs`` is None for the empty cavity or a (forward, backward)
    pair of scatter coefficient sets for the wire plane.  The length
    defaults to the nominal cavity length.  ``pump_side`` selects which
    mirror the unit drive enters through; the default matches the
    left-pump convention used everywhere else.
    """
    if pump_side not in PUMP_SIDES:
        raise ValueError(f"pump_side must be one of {PUMP_SIDES}")
    length = cavity.length if cavity_length is None else float(cavity_length)
    pair, pol = _resolve_pair(coeffs, polarization)
    matrix = _chain_matrix(cavity, pair, length)
    c_r, c_t = _solve_outgoing(matrix, pump_side)
    reflectance = abs(c_r) ** 2
    transmittance = abs(c_t) ** 2
    loss = 1.0 - reflectance - transmittance
    if loss < -PASSIVITY_TOL:
        raise ValueError(f"outgoing intensity exceeds the drive by "
                         f"{-loss:.3e}; the wire coefficient pair is not "
                         f"passive once the cavity buildup amplifies it")
    # rounding can push a lossless budget past unity by a few ulp
    return CavityResponse(c_r=c_r, c_t=c_t,
                          reflectance=min(reflectance, 1.0),
                          transmittance=min(transmittance, 1.0),
                          loss=max(loss, 0.0),
                          cavity_length=length, polarization=pol)


def one_way_phase(cavity, length=None):
    """Reduced phase accumulated across the cavity, k L minus the Gouy
    term; resonances of the fundamental sit at integer multiples of pi."""
    length = cavity.length if length is None else float(length)
    mode = _scan_mode(cavity, length)
    half = 0.5 * length
    return mode.reduced_phase(half) - mode.reduced_phase(-half)


def empty_cavity_finesse(cavity):
    """Closed-form finesse pi sqrt(r) / (1 - r) of the bare resonator,
    with r the round-trip amplitude factor sqrt(R_L R_R)."""
    r_trip = math.sqrt(cavity.reflectivity_left * cavity.reflectivity_right)
    return math.pi * math.sqrt(r_trip) / (1.0 - r_trip)


def resonance_estimate(cavity, order=None):
    """Length at which the one-way phase equals ``order`` times pi.

    This is the exact resonant length of the empty cavity and the
    natural window center for a wire-loaded resonance search.
    """
    order = cavity.longitudinal_order if order is None else int(order)
    if order < 1:
        raise ValueError("longitudinal order must be a positive integer")
    lo = order * cavity.wavelength / 2
    hi = min(lo + cavity.wavelength,
             2.0 * cavity.mirror_curvature * (1.0 - 1e-9))
    target = order * math.pi
    return brentq(lambda L: one_way_phase(cavity, L) - target, lo, hi,
                  xtol=1e-16, rtol=8.9e-16)


def free_spectral_range(cavity, length=None):
    """Local spacing of adjacent resonant lengths, pi / (k - dG/dL).

    G(L) is the one-way Gouy phase; its length derivative stretches the
    spacing slightly beyond half a wavelength (0.53 percent at the
    reference geometry).  The derivative is taken numerically at a step
    of 1e-4 of the length, far below any scale of G.
    """
    length = cavity.length if length is None else float(length)
    k = 2.0 * math.pi / cavity.wavelength

    def gouy(L):
        return k * L - one_way_phase(cavity, L)

    h = 1e-4 * length
    slope = (gouy(length + h) - gouy(length - h)) / (2.0 * h)
    return math.pi / (k - slope)


def _lorentzian(x, amplitude, center, width, offset):
    half = 0.5 * width
    return amplitude * half ** 2 / ((x - center) ** 2 + half ** 2) + offset


def _transmission_samples(cavity, pair, lengths, pump_side="left"):
    """Transmitted intensity fraction at each length of a scan."""
    wire = None if pair is None else nanowire_transfer_matrix(*pair)
    out = np.empty(len(lengths))
    for i, length in enumerate(lengths):
        matrix = _chain_matrix(cavity, pair, float(length), wire=wire)
        out[i] = abs(_solve_outgoing(matrix, pump_side)[1]) ** 2
    return out


def find_resonance(cavity, coeffs=None, window=None, polarization=None, *,
                   max_residual=0.02):
    """Locate one transmission resonance and fit its Lorentzian profile.

    ``window`` is a (low, high) length interval expected to contain
    exactly one transmission peak; a bare number is taken as the window
    center (for seeding from a neighboring map pixel) and None centers
    the window on the empty-cavity resonance.  The default half-width
    is 0.3 free spectral ranges.  The scan runs at FSR/2000, zooming
    in on the peak when the coarse grid straddles it with too few
    samples; the refinement then runs at a twentieth of the estimated
    width over five widths to either side, and the fit adds a flat
    offset for the far-detuned background.  Raises if no peak or more
    than one peak lies inside the window, or if the relative rms fit
    residual exceeds ``max_residual``.
    """
    pair, _pol = _resolve_pair(coeffs, polarization)
    if window is None or np.isscalar(window):
        center = resonance_estimate(cavity) if window is None \
            else float(window)
        half = 0.3 * free_spectral_range(cavity, center)
        low, high = center - half, center + half
    else:
        low, high = (float(w) for w in window)
        if not low < high:
            raise ValueError("scan window must satisfy low < high")
    step = free_spectral_range(cavity, 0.5 * (low + high)) / 2000.0
    lengths = np.linspace(low, high, int(np.ceil((high - low) / step)) + 1)
    curve = _transmission_samples(cavity, pair, lengths)

    peak = int(np.argmax(curve))
    if peak in (0, curve.size - 1):
        raise RuntimeError(
            f"no transmission peak inside [{low:.9e}, {high:.9e}] m; seed "
            f"the window closer to the resonance")
    interior = (curve[1:-1] > curve[:-2]) & (curve[1:-1] >= curve[2:])
    significant = np.flatnonzero(interior) + 1
    significant = significant[curve[significant] >= 0.25 * curve[peak]]
    if significant.size > 1:
        positions = ", ".join(f"{lengths[i]:.9e}" for i in significant)
        raise RuntimeError(f"scan window contains {significant.size} "
                           f"transmission peaks (at {positions} m); narrow "
                           f"the window to isolate one")

    floor = float(curve.min())

    def _walk_width(grid, values, top):
        half_max = floor + 0.5 * (values[top] - floor)
        left = top
        while left > 0 and values[left] > half_max:
            left -= 1
        right = top
        while right < values.size - 1 and values[right] > half_max:
            right += 1
        if values[left] > half_max or values[right] > half_max:
            raise RuntimeError("transmission peak is not resolved inside "
                               "the window (no half-maximum crossing); "
                               "widen the window")
        return left, right, grid[right] - grid[left]

    left, right, width_est = _walk_width(lengths, curve, peak)
    if right - left < 8:
        # the coarse grid straddles the line with too few samples (a
        # narrow, lightly perturbed resonance); rescan the peak at a
        # step that resolves the narrowest line this cavity can show
        narrowest = free_spectral_range(cavity, lengths[peak]) \
            / empty_cavity_finesse(cavity)
        half_span = max(3.0 * step, width_est)
        fine_step = max(narrowest / 8.0, half_span / 2000.0)
        count = int(np.ceil(2.0 * half_span / fine_step))
        zoom = np.linspace(max(low, lengths[peak] - half_span),
                           min(high, lengths[peak] + half_span), count + 1)
        zoom_curve = _transmission_samples(cavity, pair, zoom)
        lengths, curve = zoom, zoom_curve
        peak = int(np.argmax(curve))
        left, right, width_est = _walk_width(lengths, curve, peak)

    fit_low = max(low, lengths[peak] - 5.0 * width_est)
    fit_high = min(high, lengths[peak] + 5.0 * width_est)
    count = max(int(np.ceil((fit_high - fit_low) / (width_est / 20.0))), 40)
    fit_lengths = np.linspace(fit_low, fit_high, count + 1)
    fit_curve = _transmission_samples(cavity, pair, fit_lengths)
    guess = (float(fit_curve.max() - fit_curve.min()),
             float(fit_lengths[np.argmax(fit_curve)]), width_est,
             float(fit_curve.min()))
    params, _cov = curve_fit(_lorentzian, fit_lengths, fit_curve, p0=guess)
    amplitude, center_fit, width_fit, _offset = params
    width_fit = abs(float(width_fit))
    residual = float(np.sqrt(np.mean(
        (_lorentzian(fit_lengths, *params) - fit_curve) ** 2)) / amplitude)
    if residual > max_residual:
        raise RuntimeError(f"Lorentzian fit residual {residual:.2e} exceeds "
                           f"{max_residual:.2e}; the window may contain a "
                           f"distorted or truncated profile")
    if not low < center_fit < high:
        raise RuntimeError("fitted resonance center escaped the scan window")

    fsr = free_spectral_range(cavity, center_fit)
    finesse = fsr / width_fit
    ceiling = empty_cavity_finesse(cavity) * 1.01
    if finesse > ceiling:
        raise RuntimeError(f"fitted finesse {finesse:.1f} exceeds the "
                           f"empty-cavity bound {ceiling:.1f}; the fit is "
                           f"not trustworthy")
    kappa = 2.0 * math.pi * (C_LIGHT / (2.0 * center_fit)) / finesse
    return ResonanceResult(resonant_length=float(center_fit),
                           finesse=float(finesse),
                           linewidth_length=width_fit,
                           linewidth_angular=float(kappa),
                           fit_quality=residual,
                           free_spectral_range=float(fsr))


def intracavity_amplitudes(cavity, coeffs=None, cavity_length=None,
                           polarization=None, pump_side="left"):
    """Sub-cavity field amplitudes (A and B pairs) referenced to z = 0.

    The chain is seeded outside the left mirror with the solved
    outgoing fields of the chosen drive: (1, c_r) for the left pump,
    (0, c_t) for the right one.  Either seed is crossed through the
    mirror and propagated to the reference plane; the B pair
    additionally crosses the wire matrix at its plane.
    """
    response = cavity_response(cavity, coeffs, cavity_length, polarization,
                               pump_side)
    length = response.cavity_length
    pair, pol = _resolve_pair(coeffs, polarization)
    mode = _scan_mode(cavity, length)
    half = 0.5 * length
    left = mirror_matrix(cavity.reflectivity_left, cavity.eta_left)
    seed = (ReducedFieldPair(1.0, response.c_r) if pump_side == "left"
            else ReducedFieldPair(0.0, response.c_t))
    inside = left.apply(seed)
    a_pair = propagation_matrix(-half, 0.0, mode).apply(inside)
    if pair is None:
        z0 = 0.0
        b_pair = a_pair
    else:
        z0 = pair[0].position[1]
        wire = nanowire_transfer_matrix(*pair)
        at_wire = propagation_matrix(-half, z0, mode).apply(inside)
        b_pair = propagation_matrix(z0, 0.0, mode).apply(
            wire.apply(at_wire))
    return IntracavityAmplitudes(
        a_plus=a_pair.forward, a_minus=a_pair.backward,
        b_plus=b_pair.forward, b_minus=b_pair.backward,
        wire_plane=z0, cavity_length=length, polarization=pol)


def photon_number(cavity, amplitudes, power=None):
    """Intracavity photon number for a given incident power.

    Declared normalization: the energy of the two counter-propagating
    reduced fields integrated over their sub-cavities,
    P (|F+|^2 + |F-|^2) dz / c, divided by the photon energy.  For the
    empty resonant cavity this is P_inc (2 T / (1 - R)^2) L / (hbar
    omega c) up to the mirror-loss factor.
    """
    power = INCIDENT_POWER if power is None else float(power)
    if power < 0.0:
        raise ValueError("incident power must be nonnegative")
    half = 0.5 * amplitudes.cavity_length
    z0 = amplitudes.wire_plane
    left_part = (abs(amplitudes.a_plus) ** 2
                 + abs(amplitudes.a_minus) ** 2) * (half + z0)
    right_part = (abs(amplitudes.b_plus) ** 2
                  + abs(amplitudes.b_minus) ** 2) * (half - z0)
    omega = C_LIGHT * wavenumber(cavity.wavelength)
    return power * (left_part + right_part) / (HBAR * omega * C_LIGHT)
