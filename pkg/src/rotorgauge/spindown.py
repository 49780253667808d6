"""Stochastic spin-down simulation and synthetic readout signals.

The mean motion is an exponential frequency decay; thermal torque noise
enters the log-frequency state as a random walk with intensity set by
fluctuation-dissipation.  The module produces the discrete log-frequency
samples consumed by the estimation and bound modules, and a raw synthetic
phase-sensitive readout signal for end-to-end tracking tests.  Random
numbers come from numpy's seeded PCG64 generator; seeds are recorded in
trace metadata so every simulation is bit-reproducible.
"""

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from rotorgauge.constants import K_B
from rotorgauge.errors import DataError, DomainError, LinearizationWarning

# Fractional frequency fluctuation above which the ln-linearization of
# the Langevin dynamics is no longer trustworthy.
LINEARIZATION_LIMIT = 0.1


@dataclass(frozen=True)
class OUParams:
    """Physical parameters of the thermally driven spin-down.

    The derived process-noise intensity Q = 2 gamma k_B T / (I omega0^2)
    and the one-sided torque PSD S_N = 4 k_B T I gamma are recomputed on
    access, never stored.
    """

    inertia: float
    damping_rate: float
    temperature: float
    nominal_spin: float

    def __post_init__(self):
        if not self.inertia > 0:
            raise DomainError(f"inertia must be positive, got {self.inertia}")
        if self.damping_rate < 0:
            raise DomainError(f"damping rate must be >= 0, got {self.damping_rate}")
        if not self.temperature > 0:
            raise DomainError(f"temperature must be positive, got {self.temperature}")
        if not self.nominal_spin > 0:
            raise DomainError(f"nominal spin must be positive, got {self.nominal_spin}")

    @property
    def process_noise_intensity(self):
        """Log-frequency random-walk intensity Q (1/s)."""
        return 2.0 * self.damping_rate * K_B * self.temperature / (
            self.inertia * self.nominal_spin**2
        )

    @property
    def torque_psd(self):
        """One-sided thermal torque PSD S_N = 4 k_B T I gamma (N^2 m^2 / Hz)."""
        return 4.0 * K_B * self.temperature * self.inertia * self.damping_rate


@dataclass(frozen=True)
class StateSpaceModel:
    """Sampling grid and readout noise of the discrete measurement model."""

    step: float
    n_samples: int
    noise_sigma: float = 0.0

    def __post_init__(self):
        if not self.step > 0:
            raise DomainError(f"sample step must be positive, got {self.step}")
        if self.n_samples < 2:
            raise DomainError(f"need at least 2 samples, got {self.n_samples}")
        if self.noise_sigma < 0:
            raise DomainError(f"noise sigma must be >= 0, got {self.noise_sigma}")

    @property
    def duration(self):
        """Total measurement duration t_m = N Delta (s)."""
        return self.n_samples * self.step

    @property
    def rate(self):
        """Sampling rate 1 / Delta (Hz)."""
        return 1.0 / self.step

    @property
    def times(self):
        return np.arange(self.n_samples) * self.step


@dataclass
class SpinDownTrace:
    """Time series of (time, frequency) samples with provenance metadata."""

    times: np.ndarray
    frequencies: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.frequencies = np.asarray(self.frequencies, dtype=float)
        if self.times.shape != self.frequencies.shape:
            raise DataError("times and frequencies must have matching shapes")
        if self.times.size > 1 and not np.all(np.diff(self.times) > 0):
            raise DataError("trace times must be strictly increasing")
        if np.any(self.frequencies <= 0):
            raise DataError("trace frequencies must be positive")

    @property
    def log_frequencies(self):
        return np.log(self.frequencies)

    def to_csv(self, path, sidecar=False):
        np.savetxt(
            path,
            np.column_stack([self.times, self.frequencies]),
            fmt="%.17g",
            delimiter=",",
            header="t_s,f_hz",
            comments="",
        )
        if sidecar:
            with open(str(path) + ".json", "w") as fh:
                json.dump(self.metadata, fh, indent=2, sort_keys=True)
                fh.write("\n")

    @classmethod
    def from_csv(cls, path):
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        if data.size == 0:
            raise DataError(f"empty trace file {path}")
        if data.shape[1] != 2:
            raise DataError(f"expected 2 columns in trace CSV, got {data.shape[1]}")
        return cls(times=data[:, 0], frequencies=data[:, 1])


@dataclass
class SquidTrace:
    """Uniformly sampled synthetic flux-sensor output y(t)."""

    values: np.ndarray
    sample_rate: float
    amplitude: float
    phase0: float = 0.0
    noise_sigma: float = 0.0
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if not self.sample_rate > 0:
            raise DomainError(f"sample rate must be positive, got {self.sample_rate}")

    @property
    def times(self):
        return np.arange(self.values.size) / self.sample_rate

    @property
    def duration(self):
        return self.values.size / self.sample_rate

    def to_csv(self, path):
        np.savetxt(
            path,
            np.column_stack([self.times, self.values]),
            fmt="%.17g",
            delimiter=",",
            header="t_s,y",
            comments="",
        )

    @classmethod
    def from_csv(cls, path):
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        if data.shape[0] < 2 or data.shape[1] != 2:
            raise DataError(f"expected >= 2 rows and 2 columns in {path}")
        dt = np.diff(data[:, 0])
        if not np.allclose(dt, dt[0], rtol=1e-6):
            raise DataError("signal CSV must be uniformly sampled")
        values = data[:, 1]
        return cls(values=values, sample_rate=1.0 / dt[0],
                   amplitude=float(np.max(np.abs(values))) if values.size else 0.0)


def mean_decay(omega0, rate, t):
    """Mean angular velocity Omega0 exp(-gamma t); t may be an array."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("time must be >= 0")
    return omega0 * np.exp(-rate * t)


def phase_trajectory(theta0, omega0, tau, t):
    """Accumulated phase theta0 + Omega0 tau (1 - exp(-t/tau)) (rad)."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("time must be >= 0")
    return theta0 + omega0 * tau * (-np.expm1(-t / tau))


def process_noise_intensity(params):
    """Process-noise intensity Q with a two-path consistency check.

    Evaluates both Q = 2 gamma k_B T / (I omega0^2) and the torque-PSD
    route S_N / (2 I^2 omega0^2); the two are algebraically identical and
    are verified to agree to 1e-12 relative.
    """
    q = params.process_noise_intensity
    via_psd = params.torque_psd / (2.0 * params.inertia**2 * params.nominal_spin**2)
    if q > 0 and abs(via_psd / q - 1.0) > 1e-12:
        raise DomainError("inconsistent process-noise parameterization")
    return q


def simulate_ou_spindown(params, model, seed):
    """Simulate the discrete log-frequency state-space model.

    x_{k+1} = x_k - gamma Delta + w_k with w_k ~ N(0, Q Delta), observed
    as z_k = x_k + v_k with v_k ~ N(0, sigma_v^2).  This is the exact
    linear-Gaussian update of the linearized Langevin dynamics, free of
    step-size bias.  Deterministic for a given seed.
    """
    rng = np.random.default_rng(seed)
    q = params.process_noise_intensity
    gamma = params.damping_rate
    n = model.n_samples
    dt = model.step

    fluctuation = 3.0 * math.sqrt(q * model.duration) + 3.0 * model.noise_sigma
    if fluctuation > LINEARIZATION_LIMIT:
        warnings.warn(
            f"expected log-frequency fluctuation {fluctuation:.3g} exceeds "
            f"{LINEARIZATION_LIMIT}; ln-linearization may be invalid",
            LinearizationWarning,
            stacklevel=2,
        )

    x0 = math.log(params.nominal_spin / (2.0 * math.pi))
    steps = -gamma * dt + rng.normal(0.0, math.sqrt(q * dt), n - 1)
    x = x0 + np.concatenate([[0.0], np.cumsum(steps)])
    z = x + (rng.normal(0.0, model.noise_sigma, n) if model.noise_sigma > 0 else 0.0)
    return SpinDownTrace(
        times=model.times,
        frequencies=np.exp(z),
        metadata={
            "seed": int(seed),
            "gamma": gamma,
            "omega0": params.nominal_spin,
            "Q": q,
            "sigma_v": model.noise_sigma,
            "dt": dt,
            "n_samples": n,
        },
    )


def synth_squid_signal(omega0, damping_rate, amplitude, phase0, noise_sigma,
                       sample_rate, duration, seed=0):
    """Synthesize y(t) = A sin(theta(t)) + n(t) for an exponential spin-down.

    The instantaneous frequency of the noiseless signal equals the mean
    decay divided by 2 pi at every time.  Raises on sample rates that
    would alias the initial (highest) frequency.
    """
    f_max = omega0 / (2.0 * math.pi)
    if sample_rate <= 2.0 * f_max:
        raise DomainError(
            f"sample rate {sample_rate} Hz aliases the initial frequency "
            f"{f_max} Hz; need > {2.0 * f_max} Hz"
        )
    n = int(round(duration * sample_rate))
    t = np.arange(n) / sample_rate
    if damping_rate > 0:
        theta = phase_trajectory(phase0, omega0, 1.0 / damping_rate, t)
    else:
        theta = phase0 + omega0 * t
    values = amplitude * np.sin(theta)
    if noise_sigma > 0:
        rng = np.random.default_rng(seed)
        values = values + rng.normal(0.0, noise_sigma, n)
    return SquidTrace(
        values=values,
        sample_rate=sample_rate,
        amplitude=amplitude,
        phase0=phase0,
        noise_sigma=noise_sigma,
        metadata={
            "seed": int(seed),
            "gamma": damping_rate,
            "omega0": omega0,
            "sigma_n": noise_sigma,
            "sample_rate": sample_rate,
            "n_samples": n,
        },
    )
