"""Physical constants and default experimental parameters.

All values are SI. The defaults describe the fiber microcavity and SiC
nanowires this package models; every one of them can be overridden through
the config layer, these are just the reference operating point.
"""
from __future__ import annotations

import math

# fundamental constants (CODATA, exact where SI-defined)
C_LIGHT = 299_792_458.0            # m/s
MU_0 = 4e-7 * math.pi              # H/m (classical convention, consistent set)
EPS_0 = 1.0 / (MU_0 * C_LIGHT**2)  # F/m
HBAR = 1.054_571_817e-34           # J s
K_BOLTZMANN = 1.380_649e-23        # J/K

# default optical setup
WAVELENGTH = 770e-9                # m, pump laser
CAVITY_LENGTH = 12e-6              # m, nominal (resonance sits near 12.44 um)
MIRROR_CURVATURE = 28e-6           # m, both mirrors
MIRROR_DIAMETER = 12e-6            # m, transverse mirror size
MIRROR_REFLECTIVITY = 0.994        # intensity, both mirrors
LONGITUDINAL_ORDER = 32            # operating longitudinal mode number
ETA_LEFT = -1.0                    # beam-splitter phase choices
ETA_RIGHT = +1.0
NUMERICAL_APERTURE = 0.15          # fiber collection NA

# default nanowire material (SiC)
REFRACTIVE_INDEX = 2.61            # lossless, real
DENSITY = 3210.0                   # kg/m^3
FREQ_CONSTANT = 3126.0             # Hz m; fundamental mode: f = FREQ_CONSTANT*R/L^2
QUALITY_FACTOR = 1e5               # mechanical Q

# power budget for force calculations
INPUT_POWER = 1e-6                 # W at the injection fiber
ETA_FIBER = 0.8                    # laser -> fiber coupling
T_INPUT = 0.5                      # fiber mode -> cavity mode coupling

# numerical defaults
L_MAX = 5                          # azimuthal truncation of cylindrical sums
N_EXPANSION_TERMS = 9              # plane-wave components per axis
DELTA_K = 0.75e6                   # 1/m, plane-wave sampling step
RADIUS_SOFT_LIMIT = 300e-9         # m, validity bound tied to L_MAX


def wavenumber(wavelength: float = WAVELENGTH) -> float:
    """Angular wavenumber k = 2*pi/wavelength."""
    return 2.0 * math.pi / wavelength
