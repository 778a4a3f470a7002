"""Plane-wave scattering by an infinite lossless dielectric cylinder.

The cylinder axis is e_y.  In-plane polar coordinates follow the
left-handed convention used throughout this package:

    x - x0 = r sin(phi),  z - z0 = -r cos(phi)
    e_r   = ( sin(phi), 0, -cos(phi))
    e_phi = ( cos(phi), 0,  sin(phi))

so phi = 0 points toward -z (the reflection side) and phi = pi toward
+z (transmission).  A plane wave arriving at in-plane incidence angle
phi_i travels along k_i = k(-sin(phi_i), 0, cos(phi_i)); its pilot
polarization vectors are e_P(par) = -e_y and e_P(perp) = e_phi(phi_i).
Time dependence is exp(-i w t), so B = -(i/w) curl E.

``direct_frame_angle`` converts the angle above to the standard
math-convention polar angle (measured from +x toward +z) for
cross-checks against textbook results.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import bessel
from .constants import (
    C_LIGHT,
    L_MAX,
    MU_0,
    RADIUS_SOFT_LIMIT,
    REFRACTIVE_INDEX,
    wavenumber,
)

FIELD_MODES = ("scattered", "incident", "total", "internal")


@dataclass(frozen=True)
class NanowireSpec:
    """Geometry and material of the nanowire.

    ``length`` only matters for the mechanical-mode calculations;
    ``position`` is the (x0, z0) location of the wire axis in cavity
    coordinates.
    """

    radius: float
    refractive_index: float = REFRACTIVE_INDEX
    length: float = 0.0
    position: tuple = (0.0, 0.0)

    def __post_init__(self):
        if not np.isfinite(self.radius) or self.radius < 0:
            raise ValueError(f"radius must be finite and >= 0, got {self.radius}")
        if not np.isfinite(self.refractive_index) or self.refractive_index < 1:
            raise ValueError("refractive_index must be real and >= 1 (lossless)")
        if self.radius > RADIUS_SOFT_LIMIT:
            warnings.warn(
                f"radius {self.radius * 1e9:.0f} nm exceeds the "
                f"{RADIUS_SOFT_LIMIT * 1e9:.0f} nm bound where the default "
                "truncation order is validated",
                stacklevel=2,
            )


@dataclass(frozen=True)
class MieCoefficients:
    """Scattering (b_par, a_perp) and internal (f_par, g_perp) coefficients.

    Arrays are indexed by order l = 0..l_max; negative orders follow
    from parity (coefficients are even in l) via :meth:`full`.
    """

    l_max: int
    wavelength: float
    spec: NanowireSpec
    b_par: np.ndarray
    a_perp: np.ndarray
    f_par: np.ndarray
    g_perp: np.ndarray

    @property
    def orders(self):
        return np.arange(-self.l_max, self.l_max + 1)

    def full(self, family):
        """Coefficients over l = -l_max..l_max for one family name."""
        arr = getattr(self, family)
        return np.concatenate([arr[1:][::-1], arr])

    def scattering(self, polarization):
        _check_pol(polarization)
        return self.b_par if polarization == "par" else self.a_perp

    def internal(self, polarization):
        _check_pol(polarization)
        return self.f_par if polarization == "par" else self.g_perp


@dataclass(frozen=True)
class CrossSections1D:
    """Per-unit-length cross-sections split by angular window (meters)."""

    sigma_R: float
    sigma_T: float
    sigma_scat: float
    collection_half_angle: float


def _check_pol(polarization):
    if polarization not in ("par", "perp"):
        raise ValueError(f"polarization must be 'par' or 'perp', got {polarization!r}")


def modal_cross_section(coeffs, polarization):
    """Total scattering cross-section from the closed-form modal sum."""
    c = coeffs.scattering(polarization)
    k = wavenumber(coeffs.wavelength)
    return (4.0 / k) * (np.abs(c[0]) ** 2 + 2.0 * np.sum(np.abs(c[1:]) ** 2))


def mie_coefficients(spec, wavelength, l_max=None, convergence_check=True):
    """Solve the cylinder boundary conditions for all coefficient families.

    The convergence self-check compares the closed-form cross-section
    at l_max against l_max + 3 and warns when the relative change
    exceeds 1e-6.
    """
    if l_max is None:
        l_max = L_MAX
    if l_max < 0:
        raise ValueError("l_max must be >= 0")
    if not np.isfinite(wavelength) or wavelength <= 0:
        raise ValueError(f"wavelength must be positive, got {wavelength}")

    n = spec.refractive_index
    k = wavenumber(wavelength)
    zeros = np.zeros(l_max + 1, dtype=complex)
    if spec.radius == 0.0:
        return MieCoefficients(l_max, wavelength, spec, zeros, zeros.copy(),
                               zeros.copy(), zeros.copy())

    def families(lm):
        rho = k * spec.radius
        nrho = n * rho
        lm_t = max(lm, 1)
        J = bessel.jn_table(lm_t, rho)[: lm + 1]
        Jp = bessel.deriv_table(bessel.jn_table(lm_t, rho), rho)[: lm + 1]
        Jn = bessel.jn_table(lm_t, nrho)[: lm + 1]
        Jnp = bessel.deriv_table(bessel.jn_table(lm_t, nrho), nrho)[: lm + 1]
        H = bessel.hn_table(lm_t, rho)[: lm + 1]
        Hp = bessel.deriv_table(bessel.hn_table(lm_t, rho), rho)[: lm + 1]
        b = (Jn * Jp - n * Jnp * J) / (Jn * Hp - n * Jnp * H)
        a = (n * Jn * Jp - Jnp * J) / (n * Jn * Hp - Jnp * H)
        f = (J - b * H) / (n * Jn)
        g = (J - a * H) / (n ** 2 * Jn)
        return b, a, f, g

    b, a, f, g = families(l_max)
    for arr in (b, a, f, g):
        if not np.all(np.isfinite(arr)):
            raise FloatingPointError(
                "special-function evaluation produced non-finite coefficients"
            )
    coeffs = MieCoefficients(l_max, wavelength, spec, b, a, f, g)

    if convergence_check and spec.radius > 0 and n > 1:
        b3, a3 = families(l_max + 3)[:2]
        for c_lo, c_hi, name in ((b, b3, "par"), (a, a3, "perp")):
            lo = (4 / k) * (np.abs(c_lo[0]) ** 2 + 2 * np.sum(np.abs(c_lo[1:]) ** 2))
            hi = (4 / k) * (np.abs(c_hi[0]) ** 2 + 2 * np.sum(np.abs(c_hi[1:]) ** 2))
            if lo > 0 and abs(hi - lo) / hi > 1e-6:
                warnings.warn(
                    f"l_max={l_max} not converged for {name} cross-section "
                    f"(rel change {abs(hi - lo) / hi:.2e} when adding 3 orders)",
                    stacklevel=2,
                )
    return coeffs


def _sym(arr, parity_sign=1.0):
    """Extend an order-0..l table to -l..l with J_{-l} = (-1)^l J_l parity."""
    lmax = arr.shape[0] - 1
    ls = np.arange(1, lmax + 1)
    neg = arr[1:] * (parity_sign * (-1.0) ** ls)[:, None] if arr.ndim > 1 else \
        arr[1:] * (parity_sign * (-1.0) ** ls)
    return np.concatenate([neg[::-1], arr])


def scattered_field(coeffs, incidence_angle, polarization, r, phi,
                    mode="scattered", amplitude=1.0):
    """E and B of the cylinder wave at points (r, phi), Cartesian components.

    ``mode`` selects which part of the solution is evaluated:
    "scattered" (default) and "total" require r >= radius, "internal"
    requires r <= radius, "incident" is valid anywhere.  Fields are per
    unit incident amplitude (scaled by ``amplitude``), in the frame
    documented at module level.
    """
    _check_pol(polarization)
    if mode not in FIELD_MODES:
        raise ValueError(f"mode must be one of {FIELD_MODES}, got {mode!r}")
    r = np.asarray(r, dtype=float)
    phi = np.asarray(phi, dtype=float)
    r, phi = np.broadcast_arrays(r, phi)
    shape = r.shape
    r = r.reshape(-1)
    phi = phi.reshape(-1)

    R = coeffs.spec.radius
    if mode in ("scattered", "total") and np.any(r < R * (1 - 1e-12)):
        raise ValueError(f"mode={mode!r} requires r >= radius; "
                         "request 'internal' for points inside")
    if mode == "internal" and np.any(r > R * (1 + 1e-12)):
        raise ValueError("mode='internal' requires r <= radius")

    lmax = coeffs.l_max
    n = coeffs.spec.refractive_index
    k = wavenumber(coeffs.wavelength)
    c = C_LIGHT
    ls = np.arange(-lmax, lmax + 1)
    # incident-projection prefactor per order
    El = amplitude * (-1j) ** ls * np.exp(-1j * ls * incidence_angle) / k

    E = np.zeros((r.size, 3), dtype=complex)
    B = np.zeros((r.size, 3), dtype=complex)
    if r.size == 0:
        return E.reshape(shape + (3,)), B.reshape(shape + (3,))

    lmax_t = max(lmax, 1)
    if mode == "internal":
        km = n * k
        x = km * np.maximum(r, 1e-300)
        Jt = bessel.jn_table(lmax_t, x)
        Z = _sym(Jt[: lmax + 1])
        Zp = _sym(bessel.deriv_table(Jt, x)[: lmax + 1])
    else:
        km = k
        x = km * np.maximum(r, 1e-300)
        Jt = bessel.jn_table(lmax_t, x)
        J = _sym(Jt[: lmax + 1])
        Jp = _sym(bessel.deriv_table(Jt, x)[: lmax + 1])
        if mode != "incident":
            Ht = bessel.hn_table(lmax_t, x)
            H = _sym(Ht[: lmax + 1])
            Hp = _sym(bessel.deriv_table(Ht, x)[: lmax + 1])
        csc = coeffs.full("b_par" if polarization == "par" else "a_perp")

    eil = np.exp(1j * phi[:, None] * ls[None, :])

    def accumulate(pref_N, pref_M, Z, Zp):
        # N harmonic: E_y-like, N = -km Z e^{il phi} e_y
        # M harmonic: M = km ( i l Z/(km r) e_r - Z' e_phi ) e^{il phi}
        Ey = (pref_N * (-km) * Z.T * eil).sum(1) if pref_N is not None else 0.0
        if pref_M is not None:
            Mr = (pref_M * (km * 1j * ls) * (Z.T / x[:, None]) * eil).sum(1)
            Mphi = (pref_M * (-km) * Zp.T * eil).sum(1)
        else:
            Mr = Mphi = 0.0
        return Ey, Mr, Mphi

    # each polarization uses N for one field and M for the other
    Er = Ephi = Ey = 0.0
    Br = Bphi = By = 0.0
    if polarization == "par":
        # E = sum El c N ;  B = -(i n_m / c) sum El c M  (n_m = 1 outside)
        if mode == "internal":
            pre = El * coeffs.full("f_par")
            Ey, Br_, Bphi_ = accumulate(pre, pre * (-1j * n / c), Z, Zp)
            Br, Bphi = Br_, Bphi_
        else:
            pre_inc = El if mode in ("incident", "total") else None
            pre_sc = -El * csc if mode in ("scattered", "total") else None
            if pre_inc is not None:
                Ey1, Br1, Bphi1 = accumulate(pre_inc, pre_inc * (-1j / c), J, Jp)
                Ey = Ey + Ey1; Br = Br + Br1; Bphi = Bphi + Bphi1
            if pre_sc is not None:
                Ey2, Br2, Bphi2 = accumulate(pre_sc, pre_sc * (-1j / c), H, Hp)
                Ey = Ey + Ey2; Br = Br + Br2; Bphi = Bphi + Bphi2
    else:
        # E = -i sum El c M ;  B = -(n_m / c) sum El c N
        if mode == "internal":
            pre = El * coeffs.full("g_perp")
            By_, Er_, Ephi_ = accumulate(pre * (-n / c), pre * (-1j), Z, Zp)
            By, Er, Ephi = By_, Er_, Ephi_
        else:
            pre_inc = El if mode in ("incident", "total") else None
            pre_sc = El * csc if mode in ("scattered", "total") else None
            if pre_inc is not None:
                By1, Er1, Ephi1 = accumulate(pre_inc * (-1.0 / c), pre_inc * (-1j), J, Jp)
                By = By + By1; Er = Er + Er1; Ephi = Ephi + Ephi1
            if pre_sc is not None:
                By2, Er2, Ephi2 = accumulate(pre_sc * (1.0 / c), pre_sc * (1j), H, Hp)
                By = By + By2; Er = Er + Er2; Ephi = Ephi + Ephi2

    sphi = np.sin(phi)
    cphi = np.cos(phi)
    E[:, 0] = Er * sphi + Ephi * cphi
    E[:, 1] = Ey
    E[:, 2] = -Er * cphi + Ephi * sphi
    B[:, 0] = Br * sphi + Bphi * cphi
    B[:, 1] = By
    B[:, 2] = -Br * cphi + Bphi * sphi
    return E.reshape(shape + (3,)), B.reshape(shape + (3,))


def emission_diagram(coeffs, polarization, incidence_angle=0.0, r=1e-3):
    """Angular density d(sigma)/d(phi) of scattered power in the far field.

    Evaluated from the exact fields (Hankel functions, no asymptotic
    shortcut) on a circle of radius ``r``; returns a callable of phi.
    """
    _check_pol(polarization)
    if r < 100 * coeffs.wavelength:
        raise ValueError("far-field radius too small (need r >> wavelength)")

    def diagram(phi):
        phi = np.asarray(phi, dtype=float)
        E, B = scattered_field(coeffs, incidence_angle, polarization,
                               np.full(phi.shape, r), phi, mode="scattered")
        S = 0.5 / MU_0 * np.real(np.cross(E, np.conj(B)))
        s_r = S[..., 0] * np.sin(phi) - S[..., 2] * np.cos(phi)
        # incident intensity for unit amplitude: 1 / (2 mu0 c)
        return r * s_r * (2 * MU_0 * C_LIGHT)

    return diagram


def cross_sections_1d(coeffs, polarization, collection_half_angle,
                      incidence_angle=0.0, r=1e-3, quad_order=64):
    """Reflection/transmission/scatter split of the angular cross-section.

    Windows: reflection around phi = 0, transmission around phi = pi,
    scatter on the two complementary arcs; Gauss-Legendre quadrature on
    each window so the three pieces exactly partition the circle.
    """
    th = float(collection_half_angle)
    if not 0 < th < np.pi / 2:
        raise ValueError("collection_half_angle must be in (0, pi/2)")
    diagram = emission_diagram(coeffs, polarization, incidence_angle, r)
    nodes, weights = np.polynomial.legendre.leggauss(quad_order)

    def window(a, b):
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        return half * np.sum(weights * diagram(mid + half * nodes))

    sigma_R = window(-th, th)
    sigma_T = window(np.pi - th, np.pi + th)
    sigma_scat = window(th, np.pi - th) + window(np.pi + th, 2 * np.pi - th)
    return CrossSections1D(sigma_R, sigma_T, sigma_scat, th)


def direct_frame_angle(phi):
    """Standard polar angle (from +x toward +z) of the point at angle phi.

    The package measures phi from the -z direction toward -x (see the
    module docstring); textbook cylinder results usually measure from
    +x toward +z.  Both describe the same physical point.
    """
    return np.mod(np.asarray(phi) - np.pi / 2, 2 * np.pi)


# ---------------------------------------------------------------------------
# glancing (out-of-plane) incidence, used by the exact coupling method
# ---------------------------------------------------------------------------

def incidence_angles(wavevector):
    """(phi, xi) of a wavevector: k = k(-sin xi sin phi, -cos xi, sin xi cos phi)."""
    kv = np.asarray(wavevector, dtype=float)
    k = np.linalg.norm(kv)
    cos_xi = -kv[1] / k
    xi = np.arccos(np.clip(cos_xi, -1.0, 1.0))
    phi = np.arctan2(-kv[0], kv[2])
    return phi, xi


def polarization_vector(wavevector, polarization):
    """Exact unit polarization vector for a plane wave of the beam family.

    par: in the plane containing the wavevector and the wire axis;
    perp: orthogonal to that plane.  Both reduce to the in-plane pilot
    vectors (-e_y and e_phi) at normal incidence.
    """
    _check_pol(polarization)
    phi, xi = incidence_angles(wavevector)
    if polarization == "par":
        return np.array([np.cos(xi) * np.sin(phi),
                         -np.sin(xi),
                         -np.cos(xi) * np.cos(phi)])
    return np.array([np.cos(phi), 0.0, np.sin(phi)])


def _oblique_system(l, R, n, k, h):
    """4x4 boundary-condition matrix and the incident-column pair.

    Unknowns (sE, sB, cE, cB): scattered and internal amplitudes of the
    axial fields E_y, B_y.  Returns (M, vJ) where the RHS for incident
    axial amplitudes (Ey0, By0) at order l is -(Ey0 * vJ_E + By0 * vJ_B)
    assembled by the caller.
    """
    q = np.sqrt(k * k - h * h)
    q1 = np.sqrt(n * n * k * k - h * h)
    w = C_LIGHT * k
    la = abs(l)
    sgn = (-1.0) ** la if l < 0 else 1.0

    xq, xq1 = q * R, q1 * R
    lm = max(la, 1)
    Jq = bessel.jn_table(lm, xq)
    Hq = bessel.hn_table(lm, xq)
    Jq1 = bessel.jn_table(lm, xq1)
    J = sgn * Jq[la]
    Jp = sgn * bessel.deriv_table(Jq, xq)[la]
    H = sgn * Hq[la]
    Hp = sgn * bessel.deriv_table(Hq, xq)[la]
    J1 = sgn * Jq1[la]
    J1p = sgn * bessel.deriv_table(Jq1, xq1)[la]

    ilh = 1j * l * h / R
    q2, q12 = q * q, q1 * q1
    # rows: continuity of E_y, B_y, E_psi, B_psi; cols: sE, sB, cE, cB
    M = np.array([
        [H, 0, -J1, 0],
        [0, H, 0, -J1],
        [ilh / q2 * H, -w * q / q2 * Hp, -ilh / q12 * J1, w * q1 / q12 * J1p],
        [w / C_LIGHT ** 2 * q / q2 * Hp, ilh / q2 * H,
         -w * n * n / C_LIGHT ** 2 * q1 / q12 * J1p, -ilh / q12 * J1],
    ], dtype=complex)
    vE = np.array([J, 0, ilh / q2 * J, w / C_LIGHT ** 2 * q / q2 * Jp],
                  dtype=complex)
    vB = np.array([0, J, -w * q / q2 * Jp, ilh / q2 * J], dtype=complex)
    return M, vE, vB


def oblique_scattered_field(spec, wavelength, wavevector, amplitude,
                            polarization, points, l_max=None, mode="scattered"):
    """Scattered E field for a plane wave with an out-of-plane wavevector.

    ``points`` are (N, 3) Cartesian positions relative to the wire
    axis; ``amplitude`` multiplies the unit polarization vector of the
    requested family (see :func:`polarization_vector`).  Only the E
    field is returned (the mode projections need nothing else).
    ``mode`` may be "scattered" or "incident"; the latter evaluates the
    multipole expansion of the incoming wave itself, which is useful as
    a self-test of the transverse-component algebra.
    """
    _check_pol(polarization)
    if mode not in ("scattered", "incident"):
        raise ValueError("mode must be 'scattered' or 'incident'")
    if l_max is None:
        l_max = L_MAX
    n = spec.refractive_index
    k = wavenumber(wavelength)
    kv = np.asarray(wavevector, dtype=float)
    if abs(np.linalg.norm(kv) - k) > 1e-6 * k:
        raise ValueError("wavevector magnitude does not match the wavelength")
    h = kv[1]
    q = np.sqrt(k * k - h * h)
    if q < 1e-6 * k:
        raise ValueError("wave parallel to the wire axis is not supported")

    e_pol = polarization_vector(kv, polarization)
    E_y0 = amplitude * e_pol[1]
    B_y0 = amplitude * np.cross(kv, e_pol)[1] / (C_LIGHT * k)

    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    r = np.hypot(pts[:, 0], pts[:, 2])
    psi = np.arctan2(pts[:, 0], pts[:, 2])  # from e_z toward e_x
    psi_k = np.arctan2(kv[0], kv[2])
    y = pts[:, 1]

    w = C_LIGHT * k
    q2 = q * q
    x = q * np.maximum(r, 1e-300)
    lmax_t = max(l_max, 1)
    if mode == "scattered":
        Zt = bessel.hn_table(lmax_t, x)
    else:
        Zt = bessel.jn_table(lmax_t, x).astype(complex)
    Zpt = bessel.deriv_table(Zt, x)

    E = np.zeros((pts.shape[0], 3), dtype=complex)
    Er = np.zeros(pts.shape[0], dtype=complex)
    Epsi = np.zeros_like(Er)
    Ey = np.zeros_like(Er)
    for l in range(-l_max, l_max + 1):
        drive = 1j ** l * np.exp(-1j * l * psi_k)
        if mode == "scattered":
            M, vE, vB = _oblique_system(l, spec.radius, n, k, h)
            rhs = -(E_y0 * vE + B_y0 * vB) * drive
            sE, sB = np.linalg.solve(M, rhs)[:2]
        else:
            sE, sB = E_y0 * drive, B_y0 * drive
        la = abs(l)
        sgn = (-1.0) ** la if l < 0 else 1.0
        Z = sgn * Zt[la]
        Zp = sgn * Zpt[la]
        phase = np.exp(1j * l * psi)
        Ey += sE * Z * phase
        Er += (1j / q2) * (h * q * sE * Zp + 1j * w * l * sB * Z / r) * phase
        Epsi += (1j / q2) * (1j * l * h / r * sE * Z - w * q * sB * Zp) * phase

    axial = np.exp(1j * h * y)
    cpsi, spsi = np.cos(psi), np.sin(psi)
    E[:, 0] = (Er * spsi + Epsi * cpsi) * axial
    E[:, 1] = Ey * axial
    E[:, 2] = (Er * cpsi - Epsi * spsi) * axial
    return E.reshape(np.asarray(points).shape)
