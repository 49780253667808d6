"""Physical constants and unit conversions."""

# Boltzmann constant, exact by the 2019 SI redefinition (J/K).
K_B = 1.380649e-23

# Helium-4 atomic mass (kg).
HELIUM_MASS = 6.6465e-27

# 1 mbar in Pa.  Millibar is accepted/emitted only at interface
# boundaries; everything internal is SI.
MBAR = 100.0


def mbar_to_pa(p_mbar):
    return p_mbar * MBAR


def pa_to_mbar(p_pa):
    return p_pa / MBAR
