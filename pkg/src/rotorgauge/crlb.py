"""Fisher-information bounds for the spin-down decay rate and pressure.

Builds the dense covariance of the log-frequency samples (random-walk
process noise plus white readout noise), evaluates the exact Cramer-Rao
lower bound for gamma with the intercept treated as a nuisance parameter,
and exposes the two closed-form limiting regimes together with the
pressure-sensitivity floors they imply.  All quadratic forms go through a
symmetric positive-definite factorization; the covariance is never
inverted explicitly.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from rotorgauge.constants import K_B
from rotorgauge.errors import DomainError, NumericalError

# Dense-bound size cap: the exact bound is O(N^3); beyond this the
# closed-form limits should be used instead.
MAX_DENSE_SAMPLES = 10_000

# Relative regularization applied to sigma_v^2 = 0 models, whose first
# sample is otherwise noiseless and makes the covariance singular.
SINGULAR_REGULARIZATION = 1e-9


@dataclass
class CovarianceModel:
    """Dense covariance of the stacked log-frequency measurements.

    Sigma_ij = Q Delta min(i, j) + sigma_v^2 delta_ij.  ``regularized``
    marks models whose zero readout noise was replaced by a small
    multiple of Q Delta to keep Sigma positive definite.
    """

    sigma: np.ndarray
    times: np.ndarray
    process_intensity: float
    noise_variance: float
    regularized: bool = False


def build_covariance(model, process_intensity):
    """Exact sample covariance for a state-space model and intensity Q.

    Row and column 0 carry no process contribution (min(0, j) = 0), so a
    model with sigma_v = 0 is singular; such models are regularized with
    sigma_v^2 = 1e-9 Q Delta and flagged.
    """
    if process_intensity < 0:
        raise DomainError(f"process intensity must be >= 0, got {process_intensity}")
    if model.n_samples > MAX_DENSE_SAMPLES:
        raise DomainError(
            f"dense bound capped at {MAX_DENSE_SAMPLES} samples "
            f"(got {model.n_samples}); use the closed-form limits"
        )
    q_dt = process_intensity * model.step
    var = model.noise_sigma**2
    regularized = False
    if var == 0.0:
        if q_dt == 0.0:
            raise DomainError("model with sigma_v = 0 and Q = 0 is singular")
        var = SINGULAR_REGULARIZATION * q_dt
        regularized = True
    idx = np.arange(model.n_samples)
    sigma = q_dt * np.minimum.outer(idx, idx).astype(float)
    sigma[idx, idx] += var
    return CovarianceModel(
        sigma=sigma,
        times=model.times,
        process_intensity=process_intensity,
        noise_variance=var,
        regularized=regularized,
    )


def exact_crlb_gamma(cov):
    """Exact variance lower bound for gamma, nuisance intercept eliminated.

    Var(gamma_hat) >= 1 / (t' Sigma^-1 t - (1' Sigma^-1 t)^2 / (1' Sigma^-1 1)),
    the Schur complement of the joint (intercept, slope) information.
    """
    sigma = cov.sigma
    t = cov.times
    ones = np.ones_like(t)
    try:
        factor = cho_factor(sigma, lower=True, check_finite=False)
    except LinAlgError as exc:
        cond = np.linalg.cond(sigma)
        raise NumericalError(
            f"covariance factorization failed (condition estimate {cond:.3g})"
        ) from exc
    sol_t = cho_solve(factor, t, check_finite=False)
    sol_1 = cho_solve(factor, ones, check_finite=False)
    info = t @ sol_t - (ones @ sol_t) ** 2 / (ones @ sol_1)
    if info <= 0:
        raise NumericalError(f"non-positive Fisher information {info}")
    return 1.0 / info


def readout_limited_bound(model):
    """Readout-noise-dominated bound 12 sigma_v^2 / (r t_m^3)."""
    return 12.0 * model.noise_sigma**2 / (model.rate * model.duration**3)


def process_limited_bound(process_intensity, duration):
    """Torque-noise-dominated bound Q / t_m, attained by the increment MLE."""
    if not duration > 0:
        raise DomainError(f"duration must be positive, got {duration}")
    if process_intensity < 0:
        raise DomainError(f"process intensity must be >= 0, got {process_intensity}")
    return process_intensity / duration


@dataclass
class SensitivityReport:
    """Pressure-precision floors for one measurement configuration."""

    exact_var: float
    readout_var: float
    process_var: float
    sigma_p: float
    sigma_p_per_rthz: float
    regime: str

    def to_dict(self):
        return {
            "exact_var_per_s2": self.exact_var,
            "readout_var_per_s2": self.readout_var,
            "process_var_per_s2": self.process_var,
            "sigma_p_pa": self.sigma_p,
            "sigma_p_pa_per_rthz": self.sigma_p_per_rthz,
            "regime": self.regime,
        }


def pressure_sensitivity(gamma_per_pressure, variance, duration):
    """Map a gamma-variance bound to pressure precision.

    Returns (sigma_P, sigma_P sqrt(t_m)): the absolute floor in Pa for
    the given duration and its per-root-hertz normalization (the two
    coincide numerically at t_m = 1 s).
    """
    if not gamma_per_pressure > 0:
        raise DomainError(
            f"damping-per-pressure must be positive, got {gamma_per_pressure}"
        )
    sigma_p = math.sqrt(variance) / gamma_per_pressure
    return sigma_p, sigma_p * math.sqrt(duration)


def sensitivity_floors(gamma_per_pressure, model, process_intensity,
                       include_exact=True):
    """Full bound report: exact and limiting variances plus pressure floors.

    The overall floor is the larger of the readout and process floors;
    ``regime`` names the dominant one (comparing sigma_v^2 against
    Q t_m).
    """
    readout = readout_limited_bound(model)
    process = process_limited_bound(process_intensity, model.duration)
    if include_exact:
        exact = exact_crlb_gamma(build_covariance(model, process_intensity))
    else:
        exact = max(readout, process)
    sigma_p, per_rthz = pressure_sensitivity(
        gamma_per_pressure, max(readout, process), model.duration
    )
    regime = (
        "readout"
        if model.noise_sigma**2 >= process_intensity * model.duration
        else "process"
    )
    return SensitivityReport(
        exact_var=exact,
        readout_var=readout,
        process_var=process,
        sigma_p=sigma_p,
        sigma_p_per_rthz=per_rthz,
        regime=regime,
    )


def relative_pressure_uncertainty(temperature, inertia, nominal_spin,
                                  gamma_per_pressure, pressure, duration):
    """Process-floor relative precision sqrt(2 k_B T / (I w0^2 gamma_P P t_m)).

    Equal to sigma_gamma / gamma since pressure is linear in gamma; scales
    as 1 / sqrt(P t_m).
    """
    if not pressure > 0 or not duration > 0:
        raise DomainError("pressure and duration must be positive")
    return math.sqrt(
        2.0 * K_B * temperature
        / (inertia * nominal_spin**2 * gamma_per_pressure * pressure * duration)
    )
