"""Rotor, gas, and trap parameter types plus the closed-form gas physics.

Implements the free-molecular drag model of the spinning-rotor gauge: the
Maxwell-Boltzmann mean speed, the drag torque coefficient, the exponential
frequency-decay rate and its inverse (pressure readout), the cold/room
gauge-pressure mapping, the rotor quality factor, and the centrifugal
breaking limit.  All functions are pure and operate on SI quantities.
"""

import math
import warnings
from dataclasses import dataclass

from rotorgauge.constants import K_B, HELIUM_MASS, MBAR
from rotorgauge.errors import DomainError, MolecularFlowWarning

# Above this cold-side pressure (Pa; 1e-4 mbar) the constant-factor
# gauge mapping stops being a good approximation.
MOLECULAR_FLOW_LIMIT = 1e-4 * MBAR


@dataclass(frozen=True)
class MagnetSpec:
    """Geometry and material of the spherical rotor.

    Parameters
    ----------
    radius : float
        Sphere radius (m).
    density : float
        Mass density (kg/m^3).
    moment : float, optional
        Magnetic moment (A m^2), needed only for spin-up threshold
        and gyromagnetic conversions.
    """

    radius: float
    density: float
    moment: float | None = None

    def __post_init__(self):
        if not self.radius > 0:
            raise DomainError(f"radius must be positive, got {self.radius}")
        if not self.density > 0:
            raise DomainError(f"density must be positive, got {self.density}")
        if self.moment is not None and not self.moment > 0:
            raise DomainError(f"moment must be positive, got {self.moment}")

    @property
    def mass(self):
        """Sphere mass m = (4 pi / 3) rho R^3 (kg)."""
        return (4.0 * math.pi / 3.0) * self.density * self.radius**3

    @property
    def inertia(self):
        """Isotropic moment of inertia I = (2/5) m R^2 (kg m^2)."""
        return 0.4 * self.mass * self.radius**2


@dataclass(frozen=True)
class GasSpec:
    """Gas species mass and temperature at the rotor location."""

    molecular_mass: float
    temperature: float

    def __post_init__(self):
        if not self.molecular_mass > 0:
            raise DomainError(
                f"molecular mass must be positive, got {self.molecular_mass}"
            )
        if not self.temperature > 0:
            raise DomainError(f"temperature must be positive, got {self.temperature}")

    @classmethod
    def helium(cls, temperature=4.2):
        return cls(molecular_mass=HELIUM_MASS, temperature=temperature)


@dataclass(frozen=True)
class GaugeSpec:
    """Room-temperature reference gauge parameters.

    ``sensitivity`` is the gas correction of the reference gauge relative
    to its air calibration (5.9 for helium on a Penning gauge).
    """

    room_temperature: float = 295.0
    sensitivity: float = 5.9

    def __post_init__(self):
        if not self.room_temperature > 0:
            raise DomainError(
                f"room temperature must be positive, got {self.room_temperature}"
            )
        if not self.sensitivity > 0:
            raise DomainError(f"sensitivity must be positive, got {self.sensitivity}")


@dataclass(frozen=True)
class TrapField:
    """Residual horizontal field breaking the azimuthal symmetry."""

    field: float = 0.0
    field_angle: float = 0.0
    libration_frequency: float = 0.0

    def __post_init__(self):
        if self.field < 0:
            raise DomainError(f"field magnitude must be >= 0, got {self.field}")
        if self.libration_frequency < 0:
            raise DomainError(
                f"libration frequency must be >= 0, got {self.libration_frequency}"
            )


@dataclass(frozen=True)
class BreakingSpec:
    """Centrifugal disintegration parameters.

    The central stress of a spinning sphere is K rho Omega^2 R^2 with
    geometric factor K; the sphere breaks when it reaches
    ``stress_limit``.
    """

    stress_limit: float
    geometry_factor: float = 0.398

    def __post_init__(self):
        if not self.stress_limit > 0:
            raise DomainError(f"stress limit must be positive, got {self.stress_limit}")
        if not self.geometry_factor > 0:
            raise DomainError(
                f"geometry factor must be positive, got {self.geometry_factor}"
            )

    @classmethod
    def from_anchor(cls, radius, frequency, density, geometry_factor=0.398):
        """Calibrate the stress limit from a known disintegration event.

        Parameters
        ----------
        radius, frequency, density : float
            Radius (m), rotation frequency at breakup (Hz), and density
            (kg/m^3) of the reference sphere.
        """
        omega = 2.0 * math.pi * frequency
        stress = geometry_factor * density * omega**2 * radius**2
        return cls(stress_limit=stress, geometry_factor=geometry_factor)


def mean_velocity(gas):
    """Maxwell-Boltzmann mean speed sqrt(8 k_B T / (pi M_g)) in m/s."""
    return math.sqrt(8.0 * K_B * gas.temperature / (math.pi * gas.molecular_mass))


def gas_damping_coefficient(magnet, gas, pressure):
    """Free-molecular drag torque coefficient Gamma = 16 R^4 P / (3 vbar).

    Units: N m s.  Valid only in the molecular-flow regime.
    """
    if pressure < 0:
        raise DomainError(f"pressure must be >= 0, got {pressure}")
    return 16.0 * magnet.radius**4 * pressure / (3.0 * mean_velocity(gas))


def decay_rate(magnet, gas, pressure):
    """Frequency decay rate gamma = (10/pi) P / (rho vbar R) in 1/s.

    Identical to gas_damping_coefficient / inertia.
    """
    if pressure < 0:
        raise DomainError(f"pressure must be >= 0, got {pressure}")
    return (10.0 / math.pi) * pressure / (
        magnet.density * mean_velocity(gas) * magnet.radius
    )


def pressure_from_decay(magnet, gas, rate):
    """Invert the decay-rate relation: pressure (Pa) from gamma (1/s)."""
    if rate < 0:
        raise DomainError(f"decay rate must be >= 0, got {rate}")
    return rate * magnet.density * mean_velocity(gas) * magnet.radius * math.pi / 10.0


def gauge_factor(gauge, gas):
    """Linear factor mapping cold pressure to gauge reading, Pg = factor * P."""
    return (1.0 / gauge.sensitivity) * math.sqrt(
        gauge.room_temperature / gas.temperature
    )


def gauge_pressure(gauge, gas, pressure):
    """Room-temperature gauge reading Pg (Pa) for cold pressure P (Pa).

    Combines the gauge gas-sensitivity correction with the thermomolecular
    ratio sqrt(T / T_room).  Warns when the reading leaves the
    molecular-flow range where the constant factor holds.
    """
    reading = gauge_factor(gauge, gas) * pressure
    if reading > MOLECULAR_FLOW_LIMIT:
        warnings.warn(
            f"gauge pressure {reading:.3g} Pa exceeds the molecular-flow "
            f"limit {MOLECULAR_FLOW_LIMIT:.3g} Pa; constant-factor mapping "
            "is unreliable here",
            MolecularFlowWarning,
            stacklevel=2,
        )
    return reading


def cold_pressure(gauge, gas, reading):
    """Invert gauge_pressure: cold pressure P (Pa) from a gauge reading (Pa)."""
    return reading / gauge_factor(gauge, gas)


def quality_factor(frequency, rate):
    """Rotor quality factor Q = pi f / gamma.

    2 pi times the number of rotations for the rotational energy to decay
    by 1/e.
    """
    if not frequency > 0:
        raise DomainError(f"frequency must be positive, got {frequency}")
    if not rate > 0:
        raise DomainError(f"decay rate must be positive for a finite Q, got {rate}")
    return math.pi * frequency / rate


def stress_at(magnet, spec, omega):
    """Central stress K rho Omega^2 R^2 (Pa) at angular velocity omega."""
    return spec.geometry_factor * magnet.density * omega**2 * magnet.radius**2


def breaking_limit(magnet, spec):
    """Maximum angular velocity (rad/s) before centrifugal disintegration.

    Omega_max = (1/R) sqrt(sigma_max / (K rho)); scales as 1/R, so the
    limiting tangential velocity is radius-independent.
    """
    return math.sqrt(
        spec.stress_limit / (spec.geometry_factor * magnet.density)
    ) / magnet.radius


def tangential_kinematics(magnet, frequency):
    """Surface tangential speed and centripetal acceleration at frequency f.

    Returns
    -------
    (float, float)
        v = 2 pi f R (m/s) and a = (2 pi f)^2 R (m/s^2).
    """
    if frequency < 0:
        raise DomainError(f"frequency must be >= 0, got {frequency}")
    omega = 2.0 * math.pi * frequency
    return omega * magnet.radius, omega**2 * magnet.radius


def spinning_threshold(magnet, trap):
    """Energy barrier mu B0 (J) that libration must overcome to spin."""
    if magnet.moment is None:
        raise DomainError("magnet has no magnetic moment configured")
    return magnet.moment * trap.field
