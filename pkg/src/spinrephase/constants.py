"""Physical constants (SI, CODATA 2018) and rubidium-87 reference values."""

import math

K_B = 1.380649e-23  # Boltzmann constant, J/K (exact)
HBAR = 1.054571817e-34  # reduced Planck constant, J s
BOHR_RADIUS = 5.29177210903e-11  # m

# 87Rb: 86.909180527 u
RB87_MASS = 1.44316060e-25  # kg

# Intrastate / interstate s-wave scattering lengths for the |F=1,mF=-1>,
# |F=2,mF=+1> pair of 87Rb, in Bohr radii.  They differ by < 5%; the
# cross-channel value a01 sets both the exchange rate and the elastic
# collision rate used here.
RB87_A00 = 100.4 * BOHR_RADIUS  # m, documentation only
RB87_A11 = 95.7 * BOHR_RADIUS  # m, documentation only
RB87_A01 = 98.1 * BOHR_RADIUS  # m

# Magnetic field where the differential Zeeman shift of the clock
# transition is first-order insensitive, gauss.  Documentation only: the
# inhomogeneity scale is a direct model input, never derived from B.
RB87_MAGIC_FIELD_G = 3.228917

TWO_PI = 2.0 * math.pi
