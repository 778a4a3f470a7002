"""Optomechanical analysis built on top of the cavity solver.

Turns resonance data into the quantities an experiment cares about:

* LZ maps: transmission/loss panels versus (wire plane z0, cavity
  length), with a fitted resonance row per z0 (shift, finesse, local
  linewidth).  Columns whose fit fails are flagged, not fatal.
* Locked XZ maps: per wire position (x0, z0), the response at the
  tracked resonant length, as if the cavity were locked on the peak.
* Frequency-pull profiles G = (4 pi c / N lambda^2) dL_res/dr0 from
  resonant-length profiles, the shift-versus-radius map with its two
  ridge lines (max |G| and max G^2/kappa per radius), and single-photon
  figures of merit (g0, cooperativities, displacement and thermal
  spreads) from the mechanical mode of the wire.

Map columns are tracked: each fit seeds the next column's scan window,
so the resonance is followed through level shifts much larger than the
linewidth without ever jumping by a free spectral range.
"""

import dataclasses
import math

import numpy as np

from . import mie
from .cavity import cavity_response, find_resonance
from .constants import (
    C_LIGHT,
    DENSITY,
    FREQ_CONSTANT,
    HBAR,
    K_BOLTZMANN,
    LONGITUDINAL_ORDER,
    QUALITY_FACTOR,
    WAVELENGTH,
)
from .coupling import extend_by_symmetry, nanowire_rt_coefficients
from .hgmodes import POLARIZATIONS, mode_geometry


@dataclasses.dataclass(frozen=True)
class MechanicalMode:
    """Fundamental flexural mode of a singly clamped wire."""

    frequency: float        # rad/s
    effective_mass: float   # kg
    zero_point_spread: float  # m
    quality_factor: float

    def __post_init__(self):
        for name in ("frequency", "effective_mass", "zero_point_spread",
                     "quality_factor"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ValueError(f"{name} must be finite and positive, "
                                 f"got {value!r}")


@dataclasses.dataclass(frozen=True)
class OptomechFigures:
    """Single-photon figures of merit at one operating point."""

    frequency_gradient: float         # cavity pull, rad/s per m
    single_photon_coupling: float     # g0, rad/s
    single_photon_displacement: float  # static wire displacement, m
    static_force: float               # single-photon force, N
    thermal_spread: float             # rms thermal excursion, m
    static_cooperativity: float
    dynamic_cooperativity: float
    temperature: float                # K

    def __post_init__(self):
        for name in ("static_cooperativity", "dynamic_cooperativity",
                     "thermal_spread"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0.0):
                raise ValueError(f"{name} must be finite and nonnegative, "
                                 f"got {value!r}")


@dataclasses.dataclass(frozen=True)
class MapAxis:
    """One scan axis of a map: a name and its node values."""

    name: str
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size < 1:
            raise ValueError(f"axis {self.name!r} needs a 1-d value array")
        if values.size > 1 and np.any(np.diff(values) <= 0):
            raise ValueError(f"axis {self.name!r} values must be strictly "
                             "increasing")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.values.size


@dataclasses.dataclass(frozen=True)
class MapGrid:
    """Scan result container: axes, payload arrays, per-cell fit flags.

    Payload arrays either span the full grid or only the leading axes
    (per-row summaries such as ridge positions).  ``flags`` marks which
    fit cells are trustworthy; failed cells hold NaN in the payloads.
    """

    axes: tuple
    payloads: dict
    flags: np.ndarray
    metadata: dict

    def __post_init__(self):
        axes = tuple(self.axes)
        if not axes or not all(isinstance(ax, MapAxis) for ax in axes):
            raise ValueError("axes must be a non-empty tuple of MapAxis")
        sizes = tuple(len(ax) for ax in axes)
        allowed = {sizes[:k] for k in range(1, len(sizes) + 1)}
        payloads = {}
        for name, arr in dict(self.payloads).items():
            arr = np.asarray(arr)
            if arr.shape not in allowed:
                raise ValueError(f"payload {name!r} has shape {arr.shape}; "
                                 f"expected one of {sorted(allowed)}")
            arr.flags.writeable = False
            payloads[name] = arr
        flags = np.asarray(self.flags, dtype=bool)
        if flags.shape not in allowed:
            raise ValueError(f"flags have shape {flags.shape}; expected one "
                             f"of {sorted(allowed)}")
        flags.flags.writeable = False
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "payloads", payloads)
        object.__setattr__(self, "flags", flags)
        object.__setattr__(self, "metadata", dict(self.metadata))

    @property
    def shape(self):
        return tuple(len(ax) for ax in self.axes)


def mechanical_mode(spec, quality_factor=QUALITY_FACTOR):
    """Closed-form fundamental mode of the wire described by ``spec``.

    The frequency follows the clamped-beam scaling f = kappa R / L^2
    with kappa = 3126 Hz m, the effective mass is a fourth of the wire
    mass, and the zero-point spread is sqrt(hbar / 2 M Omega).
    """
    if spec.length <= 0.0:
        raise ValueError("mechanical mode needs the wire length; set "
                         "NanowireSpec.length")
    if spec.radius <= 0.0:
        raise ValueError("mechanical mode needs a positive wire radius")
    frequency = 2.0 * math.pi * FREQ_CONSTANT * spec.radius / spec.length ** 2
    mass = DENSITY * math.pi * spec.radius ** 2 * spec.length / 4.0
    spread = math.sqrt(HBAR / (2.0 * mass * frequency))
    return MechanicalMode(frequency=frequency, effective_mass=mass,
                          zero_point_spread=spread,
                          quality_factor=quality_factor)


def single_photon_figures(mode, frequency_gradient, cavity_linewidth,
                          temperature=300.0):
    """Figures of merit for one photon coupled to one mechanical mode.

    ``frequency_gradient`` is the cavity pull G (rad/s per m) at the
    chosen wire position and ``cavity_linewidth`` the kappa fitted at
    that same position; keeping the two consistent is the caller's job
    (the best-G and best-cooperativity positions differ in general).
    """
    if not (math.isfinite(cavity_linewidth) and cavity_linewidth > 0.0):
        raise ValueError("cavity_linewidth must be finite and positive")
    if not (math.isfinite(temperature) and temperature >= 0.0):
        raise ValueError("temperature must be finite and nonnegative")
    g0 = frequency_gradient * mode.zero_point_spread
    displacement = 2.0 * (g0 / mode.frequency) * mode.zero_point_spread
    thermal = math.sqrt(K_BOLTZMANN * temperature
                        / (mode.effective_mass * mode.frequency ** 2))
    static = 2.0 * g0 ** 2 / (cavity_linewidth * mode.frequency)
    damping = mode.frequency / mode.quality_factor
    dynamic = 2.0 * g0 ** 2 / (cavity_linewidth * damping)
    force = -HBAR * g0 / mode.zero_point_spread
    return OptomechFigures(frequency_gradient=frequency_gradient,
                           single_photon_coupling=g0,
                           single_photon_displacement=displacement,
                           static_force=force,
                           thermal_spread=thermal,
                           static_cooperativity=static,
                           dynamic_cooperativity=dynamic,
                           temperature=temperature)


def coupling_strength(positions, resonant_lengths, *,
                      order=LONGITUDINAL_ORDER, wavelength=WAVELENGTH,
                      flags=None):
    """Cavity pull G along a resonant-length profile.

    Converts the slope of L_res against wire position (longitudinal or
    transverse) into a frequency gradient via G = (4 pi c / N lambda^2)
    dL/dr0, using central differences inside the profile and one-sided
    ones at its ends.  Cells flagged False, and their neighbours whose
    difference stencil would touch them, come out NaN.
    """
    positions = np.asarray(positions, dtype=float)
    lengths = np.asarray(resonant_lengths, dtype=float)
    if positions.ndim != 1 or positions.shape != lengths.shape:
        raise ValueError("positions and resonant_lengths must be matching "
                         "1-d arrays")
    if positions.size < 2:
        raise ValueError("need at least two positions to differentiate")
    if np.any(np.diff(positions) <= 0):
        raise ValueError("positions must be strictly increasing")
    prefactor = 4.0 * math.pi * C_LIGHT / (order * wavelength ** 2)
    gradient = prefactor * np.gradient(lengths, positions)
    if flags is not None:
        bad = ~np.asarray(flags, dtype=bool)
        if bad.shape != positions.shape:
            raise ValueError("flags must match the profile shape")
        gradient[bad] = np.nan
        gradient[:-1][bad[1:]] = np.nan
        gradient[1:][bad[:-1]] = np.nan
    return gradient


def wire_pair(cavity, radius, position, polarization, database=None,
              method="approx"):
    """Forward/backward coefficient pair at a physical wire position.

    The backward coefficients follow from the forward ones at the
    mirrored plane -z0.  With a ``database`` the pair is interpolated
    from the tabulated period and relabeled to the physical position;
    otherwise both members are computed directly.
    """
    x0, z0 = (float(position[0]), float(position[1]))
    if database is not None:
        forward = database.query(radius, x0, z0, polarization)
        mirrored = database.query(radius, x0, -z0, polarization)
        backward = extend_by_symmetry(mirrored, cavity).backward
        forward = dataclasses.replace(forward, position=(x0, z0))
        backward = dataclasses.replace(backward, position=(x0, z0))
        return forward, backward
    mode = mode_geometry(cavity)
    forward = nanowire_rt_coefficients(
        mie.NanowireSpec(radius=radius, position=(x0, z0)),
        mode, cavity, polarization, method=method)
    mirrored = nanowire_rt_coefficients(
        mie.NanowireSpec(radius=radius, position=(x0, -z0)),
        mode, cavity, polarization, method=method)
    return forward, extend_by_symmetry(mirrored, cavity).backward


def _tracked_fit(cavity, pair, seed):
    """find_resonance seeded by the last good fit, or the empty cavity."""
    window = None if seed is None else seed
    return find_resonance(cavity, pair, window=window)


def _default_z_values(wavelength, step):
    """One reduced period [-lambda/4, lambda/4], endpoint inclusive."""
    count = max(int(round(0.5 * wavelength / step)), 1)
    return np.linspace(-0.25 * wavelength, 0.25 * wavelength, count + 1)


def lz_map(cavity, spec, polarization, *, z_values=None, z_step=5e-9,
           length_values=None, length_points=241, database=None,
           method="approx"):
    """Transmission/loss panels against (wire plane, cavity length).

    For every z0 the resonance is fitted (tracking the previous
    column); the panels sample the response on a fixed length axis
    around the empty-cavity resonance so the wandering resonance line
    is visible in absolute terms.  Fit failures flag the column False
    and leave NaN in its summary row.
    """
    if polarization not in POLARIZATIONS:
        raise ValueError(f"unknown polarization {polarization!r}")
    lam = cavity.wavelength
    if z_values is None:
        z_values = _default_z_values(lam, z_step)
    z_values = np.asarray(z_values, dtype=float)
    empty = find_resonance(cavity)
    if length_values is None:
        half = 0.3 * empty.free_spectral_range
        length_values = np.linspace(empty.resonant_length - half,
                                    empty.resonant_length + half,
                                    length_points)
    length_values = np.asarray(length_values, dtype=float)
    x0 = float(spec.position[0])

    n_z, n_l = z_values.size, length_values.size
    trans = np.empty((n_z, n_l))
    loss = np.empty((n_z, n_l))
    rows = {name: np.full(n_z, np.nan) for name in
            ("resonant_length", "shift", "finesse", "linewidth_angular",
             "peak_transmittance", "resonant_loss", "fit_quality")}
    flags = np.zeros(n_z, dtype=bool)

    seed = None
    for iz, z0 in enumerate(z_values):
        pair = wire_pair(cavity, spec.radius, (x0, float(z0)), polarization,
                         database=database, method=method)
        for il, length in enumerate(length_values):
            resp = cavity_response(cavity, pair, float(length))
            trans[iz, il] = resp.transmittance
            loss[iz, il] = resp.loss
        try:
            res = _tracked_fit(cavity, pair, seed)
        except RuntimeError:
            continue
        seed = res.resonant_length
        flags[iz] = True
        rows["resonant_length"][iz] = res.resonant_length
        rows["shift"][iz] = res.resonant_length - empty.resonant_length
        rows["finesse"][iz] = res.finesse
        rows["linewidth_angular"][iz] = res.linewidth_angular
        rows["fit_quality"][iz] = res.fit_quality
        peak = cavity_response(cavity, pair, res.resonant_length)
        rows["peak_transmittance"][iz] = peak.transmittance
        rows["resonant_loss"][iz] = peak.loss

    payloads = {"transmittance": trans, "loss": loss, **rows}
    metadata = {
        "map": "lz",
        "radius": spec.radius,
        "polarization": polarization,
        "x0": x0,
        "method": method if database is None
        else database.metadata.get("method", method),
        "wavelength": lam,
        "empty_resonant_length": empty.resonant_length,
        "empty_finesse": empty.finesse,
    }
    return MapGrid(axes=(MapAxis("z0", z_values),
                         MapAxis("length", length_values)),
                   payloads=payloads, flags=flags, metadata=metadata)


def _parabolic_peak(positions, values):
    """Position of the maximum, refined by a three-point parabola."""
    values = np.asarray(values, dtype=float)
    if np.all(np.isnan(values)):
        return math.nan
    i = int(np.nanargmax(values))
    if 0 < i < values.size - 1 \
            and np.isfinite(values[i - 1]) and np.isfinite(values[i + 1]):
        denom = values[i - 1] - 2.0 * values[i] + values[i + 1]
        if denom < 0.0:
            offset = 0.5 * (values[i - 1] - values[i + 1]) / denom
            offset = min(max(offset, -1.0), 1.0)
            half_span = 0.5 * (positions[i + 1] - positions[i - 1])
            return float(positions[i] + offset * half_span)
    return float(positions[i])


def shift_map_vs_radius(cavity, radii, polarization, *, z_step=2e-9,
                        database=None, method="approx"):
    """Resonant shift against (radius, z0) with its two ridge lines.

    Rows scan one reduced period per radius; per radius the map also
    reports where |G| and where G^2/kappa are largest (refined by a
    parabola around the best node), the two ridges that identify the
    best pull and best cooperativity positions.
    """
    if polarization not in POLARIZATIONS:
        raise ValueError(f"unknown polarization {polarization!r}")
    radii = np.asarray(sorted(float(r) for r in np.atleast_1d(radii)))
    if radii.size == 0 or radii[0] <= 0.0:
        raise ValueError("radii must be positive")
    z_values = _default_z_values(cavity.wavelength, z_step)
    empty = find_resonance(cavity)

    n_r, n_z = radii.size, z_values.size
    shift = np.full((n_r, n_z), np.nan)
    finesse = np.full((n_r, n_z), np.nan)
    linewidth = np.full((n_r, n_z), np.nan)
    quality = np.full((n_r, n_z), np.nan)
    flags = np.zeros((n_r, n_z), dtype=bool)
    gradient = np.full((n_r, n_z), np.nan)
    ridge_gradient = np.full(n_r, np.nan)
    ridge_cooperativity = np.full(n_r, np.nan)

    for ir, radius in enumerate(radii):
        seed = None
        lengths = np.full(n_z, np.nan)
        for iz, z0 in enumerate(z_values):
            pair = wire_pair(cavity, radius, (0.0, float(z0)), polarization,
                             database=database, method=method)
            try:
                res = _tracked_fit(cavity, pair, seed)
            except RuntimeError:
                continue
            seed = res.resonant_length
            flags[ir, iz] = True
            lengths[iz] = res.resonant_length
            shift[ir, iz] = res.resonant_length - empty.resonant_length
            finesse[ir, iz] = res.finesse
            linewidth[ir, iz] = res.linewidth_angular
            quality[ir, iz] = res.fit_quality
        if np.count_nonzero(flags[ir]) >= 2:
            gradient[ir] = coupling_strength(
                z_values, np.where(flags[ir], lengths, np.nan),
                wavelength=cavity.wavelength, flags=flags[ir])
            ridge_gradient[ir] = _parabolic_peak(
                z_values, np.abs(gradient[ir]))
            ridge_cooperativity[ir] = _parabolic_peak(
                z_values, gradient[ir] ** 2 / linewidth[ir])

    payloads = {"shift": shift, "finesse": finesse,
                "linewidth_angular": linewidth, "fit_quality": quality,
                "coupling_gradient": gradient,
                "ridge_gradient": ridge_gradient,
                "ridge_cooperativity": ridge_cooperativity}
    metadata = {
        "map": "shift_vs_radius",
        "polarization": polarization,
        "method": method if database is None
        else database.metadata.get("method", method),
        "wavelength": cavity.wavelength,
        "empty_resonant_length": empty.resonant_length,
        "empty_finesse": empty.finesse,
    }
    return MapGrid(axes=(MapAxis("radius", radii), MapAxis("z0", z_values)),
                   payloads=payloads, flags=flags, metadata=metadata)


def xz_locked_map(cavity, spec, polarization, *, x_values=None,
                  z_values=None, database=None, method="approx"):
    """Resonant response over wire positions, cavity locked per pixel.

    Every pixel re-finds the resonance (seeded along the row, rows
    seeded from the previous row's first good pixel) and reports the
    response at that locked length.  Unresolvable pixels are flagged.
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

    n_x, n_z = x_values.size, z_values.size
    names = ("resonant_length", "shift", "finesse", "transmittance",
             "loss", "fit_quality")
    payloads = {name: np.full((n_x, n_z), np.nan) for name in names}
    flags = np.zeros((n_x, n_z), dtype=bool)

    row_seed = None
    for ix, x0 in enumerate(x_values):
        seed = row_seed
        row_seed = None
        for iz, z0 in enumerate(z_values):
            pair = wire_pair(cavity, spec.radius, (float(x0), float(z0)),
                             polarization, database=database, method=method)
            try:
                res = _tracked_fit(cavity, pair, seed)
            except RuntimeError:
                continue
            seed = res.resonant_length
            if row_seed is None:
                row_seed = res.resonant_length
            flags[ix, iz] = True
            resp = cavity_response(cavity, pair, res.resonant_length)
            payloads["resonant_length"][ix, iz] = res.resonant_length
            payloads["shift"][ix, iz] = \
                res.resonant_length - empty.resonant_length
            payloads["finesse"][ix, iz] = res.finesse
            payloads["transmittance"][ix, iz] = resp.transmittance
            payloads["loss"][ix, iz] = resp.loss
            payloads["fit_quality"][ix, iz] = res.fit_quality

    metadata = {
        "map": "xz_locked",
        "radius": spec.radius,
        "polarization": polarization,
        "method": method if database is None
        else database.metadata.get("method", method),
        "wavelength": cavity.wavelength,
        "empty_resonant_length": empty.resonant_length,
        "empty_finesse": empty.finesse,
    }
    return MapGrid(axes=(MapAxis("x0", x_values), MapAxis("z0", z_values)),
                   payloads=payloads, flags=flags, metadata=metadata)
