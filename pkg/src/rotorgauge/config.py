"""Experiment configuration: JSON schema, validation, and object assembly.

A single versioned JSON document carries every parameter group; unknown
keys are rejected so typos fail loudly.  Units are spelled out in the
field names.
"""

import json
import os
from dataclasses import dataclass, field

import jsonschema

from rotorgauge.constants import HELIUM_MASS
from rotorgauge.core import BreakingSpec, GasSpec, GaugeSpec, MagnetSpec, TrapField
from rotorgauge.errors import ConfigError, DomainError
from rotorgauge.precession import GyroParams
from rotorgauge.spindown import OUParams, StateSpaceModel

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["version"],
    "properties": {
        "version": {"const": 1},
        "seed": {"type": "integer", "minimum": 0},
        "magnet": {
            "type": "object",
            "additionalProperties": False,
            "required": ["radius_m", "density_kg_m3"],
            "properties": {
                "radius_m": {"type": "number", "exclusiveMinimum": 0},
                "density_kg_m3": {"type": "number", "exclusiveMinimum": 0},
                "moment_a_m2": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "gas": {
            "type": "object",
            "additionalProperties": False,
            "required": ["temperature_k"],
            "properties": {
                "species": {"enum": ["helium"]},
                "molecular_mass_kg": {"type": "number", "exclusiveMinimum": 0},
                "temperature_k": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "gauge": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "room_temperature_k": {"type": "number", "exclusiveMinimum": 0},
                "sensitivity": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "trap": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "field_t": {"type": "number", "minimum": 0},
                "field_angle_rad": {"type": "number"},
                "libration_frequency_hz": {"type": "number", "minimum": 0},
            },
        },
        "breaking": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "geometry_factor": {"type": "number", "exclusiveMinimum": 0},
                "stress_limit_pa": {"type": "number", "exclusiveMinimum": 0},
                "anchor": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["radius_m", "frequency_hz", "density_kg_m3"],
                    "properties": {
                        "radius_m": {"type": "number", "exclusiveMinimum": 0},
                        "frequency_hz": {"type": "number", "exclusiveMinimum": 0},
                        "density_kg_m3": {"type": "number", "exclusiveMinimum": 0},
                    },
                },
            },
        },
        "gyro": {
            "type": "object",
            "additionalProperties": False,
            "required": ["epsilon"],
            "properties": {
                "epsilon": {"type": "number", "minimum": 0},
                "omega0": {
                    "type": "array",
                    "items": {"type": "number"},
                    "minItems": 3,
                    "maxItems": 3,
                },
                "e0": {
                    "type": "array",
                    "items": {"type": "number"},
                    "minItems": 3,
                    "maxItems": 3,
                },
                "t_end": {"type": "number", "minimum": 0},
                "rtol": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "ou": {
            "type": "object",
            "additionalProperties": False,
            "required": ["damping_rate_per_s", "nominal_spin_rad_per_s"],
            "properties": {
                "damping_rate_per_s": {"type": "number", "minimum": 0},
                "nominal_spin_rad_per_s": {"type": "number", "exclusiveMinimum": 0},
                "temperature_k": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "state_space": {
            "type": "object",
            "additionalProperties": False,
            "required": ["step_s", "n_samples"],
            "properties": {
                "step_s": {"type": "number", "exclusiveMinimum": 0},
                "n_samples": {"type": "integer", "minimum": 2},
                "noise_sigma": {"type": "number", "minimum": 0},
            },
        },
        "squid": {
            "type": "object",
            "additionalProperties": False,
            "required": ["sample_rate_hz", "duration_s"],
            "properties": {
                "amplitude": {"type": "number", "minimum": 0},
                "phase0_rad": {"type": "number"},
                "noise_sigma": {"type": "number", "minimum": 0},
                "sample_rate_hz": {"type": "number", "exclusiveMinimum": 0},
                "duration_s": {"type": "number", "minimum": 0},
            },
        },
        "reference": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "frequency_hz": {"type": "number", "exclusiveMinimum": 0},
                "damping_rate_per_s": {"type": "number", "exclusiveMinimum": 0},
                "pressure_mbar": {"type": "number", "minimum": 0},
            },
        },
    },
}


@dataclass
class ExperimentConfig:
    """Validated configuration with assembled parameter objects."""

    raw: dict
    magnet: MagnetSpec | None = None
    gas: GasSpec | None = None
    gauge: GaugeSpec = field(default_factory=GaugeSpec)
    trap: TrapField | None = None
    breaking: BreakingSpec | None = None
    gyro_params: GyroParams | None = None
    state_space: StateSpaceModel | None = None
    seed: int = 0

    @property
    def gyro(self):
        return self.raw.get("gyro", {})

    @property
    def squid(self):
        return self.raw.get("squid", {})

    @property
    def reference(self):
        return self.raw.get("reference", {})

    def ou_params(self):
        """Assemble OUParams, requiring magnet, gas/ou temperature, and ou."""
        ou = self.raw.get("ou")
        if ou is None:
            raise ConfigError("configuration has no 'ou' section")
        if self.magnet is None:
            raise ConfigError("'ou' section requires a 'magnet' section")
        temperature = ou.get("temperature_k")
        if temperature is None:
            if self.gas is None:
                raise ConfigError("'ou' needs temperature_k or a 'gas' section")
            temperature = self.gas.temperature
        return OUParams(
            inertia=self.magnet.inertia,
            damping_rate=ou["damping_rate_per_s"],
            temperature=temperature,
            nominal_spin=ou["nominal_spin_rad_per_s"],
        )


def _gas_from(section):
    mass = section.get("molecular_mass_kg")
    if mass is None:
        if section.get("species") != "helium":
            raise ConfigError("gas needs molecular_mass_kg or species 'helium'")
        mass = HELIUM_MASS
    return GasSpec(molecular_mass=mass, temperature=section["temperature_k"])


def _breaking_from(section):
    anchor = section.get("anchor")
    if anchor is not None:
        if "stress_limit_pa" in section:
            raise ConfigError("breaking: give either stress_limit_pa or anchor, not both")
        return BreakingSpec.from_anchor(
            radius=anchor["radius_m"],
            frequency=anchor["frequency_hz"],
            density=anchor["density_kg_m3"],
            geometry_factor=section.get("geometry_factor", 0.398),
        )
    if "stress_limit_pa" not in section:
        raise ConfigError("breaking needs stress_limit_pa or an anchor")
    return BreakingSpec(
        stress_limit=section["stress_limit_pa"],
        geometry_factor=section.get("geometry_factor", 0.398),
    )


def parse_config(document):
    """Validate a parsed JSON document and build the typed configuration."""
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(document), key=lambda e: list(e.absolute_path))
    if errors:
        first = errors[0]
        path = "/".join(str(p) for p in first.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at '{path}': {first.message}")
    try:
        cfg = ExperimentConfig(raw=document)
        if "magnet" in document:
            m = document["magnet"]
            cfg.magnet = MagnetSpec(
                radius=m["radius_m"],
                density=m["density_kg_m3"],
                moment=m.get("moment_a_m2"),
            )
        if "gas" in document:
            cfg.gas = _gas_from(document["gas"])
        if "gauge" in document:
            g = document["gauge"]
            cfg.gauge = GaugeSpec(
                room_temperature=g.get("room_temperature_k", 295.0),
                sensitivity=g.get("sensitivity", 5.9),
            )
        if "trap" in document:
            t = document["trap"]
            cfg.trap = TrapField(
                field=t.get("field_t", 0.0),
                field_angle=t.get("field_angle_rad", 0.0),
                libration_frequency=t.get("libration_frequency_hz", 0.0),
            )
        if "breaking" in document:
            cfg.breaking = _breaking_from(document["breaking"])
        if "gyro" in document:
            cfg.gyro_params = GyroParams(epsilon=document["gyro"]["epsilon"])
        if "state_space" in document:
            s = document["state_space"]
            cfg.state_space = StateSpaceModel(
                step=s["step_s"],
                n_samples=s["n_samples"],
                noise_sigma=s.get("noise_sigma", 0.0),
            )
    except DomainError as exc:
        raise ConfigError(f"config rejected: {exc}") from exc
    cfg.seed = document.get("seed", _env_seed())
    return cfg


def load_config(path):
    """Load, validate, and assemble a configuration file."""
    try:
        with open(path) as fh:
            document = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from exc
    return parse_config(document)


def _env_seed():
    value = os.environ.get("ROTOR_SEED")
    if value is None:
        return 0
    try:
        return int(value)
    except ValueError as exc:
        raise ConfigError(f"ROTOR_SEED must be an integer, got {value!r}") from exc
