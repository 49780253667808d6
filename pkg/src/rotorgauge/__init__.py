"""Numerical laboratory for a Meissner-levitated spinning-rotor pressure gauge.

The package covers the full measurement chain of a cryogenic micromagnet
rotor: closed-form gas-drag physics, the dimensionless gyromagnetic
precession model, stochastic spin-down simulation, frequency tracking and
decay fitting, and Cramer-Rao precision bounds for the inferred pressure.
SI units are used internally; millibar appears only at interfaces
(1 mbar = 100 Pa).
"""

from rotorgauge.constants import K_B, HELIUM_MASS, MBAR, mbar_to_pa, pa_to_mbar
from rotorgauge.core import (
    MagnetSpec,
    GasSpec,
    GaugeSpec,
    TrapField,
    BreakingSpec,
    mean_velocity,
    gas_damping_coefficient,
    decay_rate,
    pressure_from_decay,
    gauge_pressure,
    cold_pressure,
    gauge_factor,
    quality_factor,
    breaking_limit,
    stress_at,
    tangential_kinematics,
    spinning_threshold,
)
from rotorgauge.errors import (
    RotorError,
    DomainError,
    ConfigError,
    DataError,
    NumericalError,
    NoDetectionError,
    MolecularFlowWarning,
    LinearizationWarning,
)

__version__ = "0.1.0"
