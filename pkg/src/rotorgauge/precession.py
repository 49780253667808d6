"""Dimensionless gyromagnetic rigid-body model of the levitated rotor.

The magnet is described by its angular velocity vector Omega and the unit
vector e along the magnetic moment, with time measured in units of the
inverse libration angular frequency.  The image-field torque
(e_z . e)(e_z x e) couples to the gyromagnetic term through the single
small parameter epsilon, producing fast spinning superposed with slow
precession of the spin plane and bounded nutation of the polar angle.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import IntegrationWarning, quad, solve_ivp
from scipy.optimize import brentq, minimize_scalar

from rotorgauge.errors import DataError, DomainError, NumericalError
from rotorgauge.spectral import band_peak, refine_peak, windowed_periodogram

_EZ = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class GyroParams:
    """Gyromagnetic coupling strength and optional dimensional anchors.

    ``epsilon`` is the ratio of the Einstein-de Haas frequency
    mu / (|gyromagnetic ratio| I) to the scaling (libration) angular
    frequency.  The dimensional frequencies are optional and only used to
    convert dimensionless results to Hz.
    """

    epsilon: float
    einstein_de_haas_frequency: float | None = None
    scaling_frequency: float | None = None

    def __post_init__(self):
        if self.epsilon < 0:
            raise DomainError(f"epsilon must be >= 0, got {self.epsilon}")
        if self.einstein_de_haas_frequency is not None and self.scaling_frequency:
            implied = self.einstein_de_haas_frequency / self.scaling_frequency
            if abs(implied - self.epsilon) > 1e-9 * max(self.epsilon, 1e-300):
                raise DomainError(
                    f"epsilon {self.epsilon} inconsistent with "
                    f"einstein_de_haas_frequency / scaling_frequency = {implied}"
                )


@dataclass
class GyroState:
    """Dimensionless angular velocity and moment direction at time t."""

    omega: np.ndarray
    e: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.omega = np.asarray(self.omega, dtype=float)
        self.e = np.asarray(self.e, dtype=float)
        if self.omega.shape != (3,) or self.e.shape != (3,):
            raise DomainError("omega and e must be 3-vectors")
        norm = np.linalg.norm(self.e)
        if abs(norm - 1.0) > 1e-6:
            raise DomainError(f"|e| = {norm} is not a unit vector")
        self.e = self.e / norm

    @property
    def polar_angle(self):
        """Angle between the moment and the vertical axis (rad)."""
        return math.acos(np.clip(self.e[2], -1.0, 1.0))


@dataclass
class Trajectory:
    """Uniformly sampled integration output.

    ``omega`` and ``e`` have shape (n, 3); ``e`` is renormalized at every
    sample.
    """

    t: np.ndarray
    omega: np.ndarray
    e: np.ndarray
    params: GyroParams
    rtol: float = 1e-9
    atol: float = 1e-12
    initial: GyroState | None = field(default=None, repr=False)

    @property
    def spin_projection(self):
        """Conserved projection Omega . e at every sample."""
        return np.einsum("ij,ij->i", self.omega, self.e)

    @property
    def energy(self):
        """Conserved energy (1/2)|Omega|^2 + (1/2) e_z^2 at every sample."""
        return 0.5 * np.einsum("ij,ij->i", self.omega, self.omega) + 0.5 * self.e[:, 2] ** 2

    def state_at(self, index):
        return GyroState(self.omega[index].copy(), self.e[index].copy(), float(self.t[index]))

    def to_csv(self, path):
        data = np.column_stack([self.t, self.omega, self.e])
        np.savetxt(
            path,
            data,
            fmt="%.17g",
            delimiter=",",
            header="t,omega_x,omega_y,omega_z,e_x,e_y,e_z",
            comments="",
        )

    @classmethod
    def from_csv(cls, path, params=None):
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        if data.shape[1] != 7:
            raise DataError(f"expected 7 columns in trajectory CSV, got {data.shape[1]}")
        return cls(
            t=data[:, 0],
            omega=data[:, 1:4],
            e=data[:, 4:7],
            params=params if params is not None else GyroParams(epsilon=0.0),
        )


@dataclass
class ModeSpectrum:
    """Slow (precession) and fast (spinning) spectral peaks of a trajectory.

    Frequencies are in cycles per unit of the trajectory's time variable.
    ``slow_frequency`` is None when no slow peak rises above the floor.
    """

    fast_frequency: float
    fast_amplitude: float
    slow_frequency: float | None = None
    slow_amplitude: float = 0.0

    def __post_init__(self):
        if self.slow_frequency is not None and not self.slow_frequency < self.fast_frequency:
            raise NumericalError(
                f"slow frequency {self.slow_frequency} not below fast "
                f"frequency {self.fast_frequency}"
            )

    @property
    def fast_period(self):
        return 1.0 / self.fast_frequency

    @property
    def slow_period(self):
        return None if self.slow_frequency is None else 1.0 / self.slow_frequency


def derivatives(state, params, drag=0.0):
    """Time derivatives (dOmega/dt, de/dt) of the explicit equations.

    de/dt = Omega x e and
    dOmega/dt = epsilon (Omega x e) + (e_z . e)(e_z x e) - drag * Omega,
    the form obtained by eliminating the implicit gyromagnetic term.  The
    viscous ``drag`` hook is off by default; its influence is negligible
    in the experimental regime.
    """
    omega_cross_e = np.cross(state.omega, state.e)
    domega = (
        params.epsilon * omega_cross_e
        + state.e[2] * np.cross(_EZ, state.e)
        - drag * state.omega
    )
    return domega, omega_cross_e


def _rhs(params, drag):
    eps = params.epsilon

    def rhs(t, y):
        omega, e = y[:3], y[3:]
        oxe = np.cross(omega, e)
        domega = eps * oxe + e[2] * np.cross(_EZ, e) - drag * omega
        return np.concatenate([domega, oxe])

    return rhs


def integrate(initial, params, t_end, rtol=1e-9, atol=1e-12, n_samples=None, drag=0.0):
    """Integrate the gyromagnetic equations to a uniformly sampled Trajectory.

    Uses an adaptive high-order explicit Runge-Kutta scheme (DOP853) with
    dense output; the moment direction is renormalized at every output
    sample.  ``t_end`` may be smaller than the initial time to integrate
    backwards; the returned grid is always increasing.

    Parameters
    ----------
    n_samples : int, optional
        Number of output samples.  Defaults to 16 per fast rotation
        period, clipped to [256, 2_000_000].
    """
    if not rtol > 0:
        raise DomainError(f"rtol must be positive, got {rtol}")
    t0 = initial.t
    if t_end == t0:
        t = np.array([t0])
        return Trajectory(
            t, initial.omega[None, :].copy(), initial.e[None, :].copy(),
            params, rtol, atol, initial,
        )
    if n_samples is None:
        spin = max(np.linalg.norm(initial.omega), 1.0)
        n_samples = int(abs(t_end - t0) * spin / (2.0 * math.pi) * 16)
        n_samples = min(max(n_samples, 256), 2_000_000)
    t_eval = np.linspace(t0, t_end, n_samples)
    y0 = np.concatenate([initial.omega, initial.e])
    sol = solve_ivp(
        _rhs(params, drag),
        (t0, t_end),
        y0,
        method="DOP853",
        rtol=rtol,
        atol=atol,
        t_eval=t_eval,
        dense_output=False,
    )
    if not sol.success:
        raise NumericalError(f"integration failed: {sol.message}")
    t = sol.t
    omega = sol.y[:3].T.copy()
    e = sol.y[3:].T.copy()
    e /= np.linalg.norm(e, axis=1)[:, None]
    if t_end < t0:
        t, omega, e = t[::-1].copy(), omega[::-1].copy(), e[::-1].copy()
    return Trajectory(t, omega, e, params, rtol, atol, initial)


def conserved_quantities(state):
    """Spin projection Omega . e and energy (1/2)|Omega|^2 + (1/2) e_z^2."""
    spin = float(np.dot(state.omega, state.e))
    energy = 0.5 * float(np.dot(state.omega, state.omega)) + 0.5 * state.e[2] ** 2
    return spin, energy


def effective_potential(theta, omega0, epsilon):
    """Effective polar-angle potential governing the nutation motion.

    U = (eps^2 + Omega0^2 + 2 eps Omega0 cos th) / (2 sin^2 th)
        + cos^2(th) / 2, singular at the poles.
    """
    s = math.sin(theta)
    if theta <= 0 or theta >= math.pi or s == 0.0:
        raise DomainError(f"polar angle {theta} outside the open interval (0, pi)")
    c = math.cos(theta)
    return 0.5 * (epsilon**2 + omega0**2 + 2.0 * epsilon * omega0 * c) / s**2 + 0.5 * c**2


def potential_minimum(omega0, epsilon):
    """Location and value of the effective-potential minimum."""
    res = minimize_scalar(
        lambda th: effective_potential(th, omega0, epsilon),
        bounds=(1e-9, math.pi - 1e-9),
        method="bounded",
        options={"xatol": 1e-13},
    )
    return float(res.x), float(res.fun)


def turning_points(energy, omega0, epsilon):
    """Nutation turning angles where the effective potential equals ``energy``.

    Returns the two roots bracketing the potential minimum, each located
    by bisection to 1e-10 in angle.
    """
    theta_min, u_min = potential_minimum(omega0, epsilon)
    if energy < u_min:
        raise DomainError(
            f"energy {energy} below the potential minimum {u_min}; no oscillation"
        )
    if energy == u_min:
        return theta_min, theta_min

    def f(th):
        return effective_potential(th, omega0, epsilon) - energy

    lo = brentq(f, 1e-9, theta_min, xtol=1e-10)
    hi = brentq(f, theta_min, math.pi - 1e-9, xtol=1e-10)
    return lo, hi


def nutation_period(energy, omega0, epsilon):
    """Nutation period by quadrature of the turning-point integral.

    T = integral over [th1, th2] of sqrt(2 / (E - U(th))) dth.  The
    inverse-square-root endpoint singularities are removed by the
    substitution th = mid + half * sin(u) before applying adaptive
    quadrature.
    """
    th1, th2 = turning_points(energy, omega0, epsilon)
    if th1 == th2:
        # Degenerate orbit: harmonic small-oscillation limit.
        h = 1e-6
        upp = (
            effective_potential(th1 + h, omega0, epsilon)
            - 2.0 * energy
            + effective_potential(th1 - h, omega0, epsilon)
        ) / h**2
        return 2.0 * math.pi / math.sqrt(upp)
    mid = 0.5 * (th1 + th2)
    half = 0.5 * (th2 - th1)

    def integrand(u):
        th = mid + half * math.sin(u)
        gap = energy - effective_potential(th, omega0, epsilon)
        if gap <= 0:
            return 0.0
        return math.sqrt(2.0 / gap) * half * math.cos(u)

    with warnings.catch_warnings():
        # near-degenerate orbits hit roundoff before epsrel; the explicit
        # err/value check below decides whether the result is usable
        warnings.simplefilter("ignore", IntegrationWarning)
        value, err = quad(integrand, -math.pi / 2, math.pi / 2, limit=200, epsrel=1e-9)
    if not math.isfinite(value) or (value > 0 and err / value > 1e-6):
        raise NumericalError(f"period quadrature unreliable: T={value}, err={err}")
    return value


def _uniform_dt(traj):
    dt = np.diff(traj.t)
    if dt.size == 0 or not np.allclose(dt, dt[0], rtol=1e-9):
        raise DataError("mode spectrum requires a uniform time grid")
    return float(dt[0])


def mode_spectrum(traj, min_slow_periods=5, pad_factor=8):
    """Extract the fast (spinning) and slow (precession) spectral peaks.

    The fast peak is read from the moment component e_x, which rotates at
    the spin rate; the slow peak from Omega_x, where the precession of the
    spin plane appears directly.  Raises DataError when the trajectory is
    too short to resolve the detected slow mode.
    """
    dt = _uniform_dt(traj)
    duration = traj.t[-1] - traj.t[0]
    f_floor = 3.0 / duration  # keep clear of the DC leakage lobe

    freqs, mag_e, _ = windowed_periodogram(traj.e[:, 0] - traj.e[:, 0].mean(), dt,
                                           pad_factor=pad_factor)
    k_fast = band_peak(freqs, mag_e, f_lo=f_floor)
    if k_fast is None:
        raise DataError("no fast spectral peak found")
    f_fast, a_fast = refine_peak(freqs, mag_e, k_fast)

    freqs_o, mag_o, _ = windowed_periodogram(traj.omega[:, 0] - traj.omega[:, 0].mean(),
                                             dt, pad_factor=pad_factor)
    k_slow = band_peak(freqs_o, mag_o, f_lo=f_floor, f_hi=f_fast / 2.0)
    if k_slow is not None:
        band = mag_o[(freqs_o > f_floor) & (freqs_o < f_fast / 2.0)]
        floor = max(5.0 * np.median(band), 1e-6 * a_fast)
        if mag_o[k_slow] < floor:
            k_slow = None
    if k_slow is None:
        return ModeSpectrum(fast_frequency=f_fast, fast_amplitude=a_fast)

    f_slow, a_slow = refine_peak(freqs_o, mag_o, k_slow)
    if duration * f_slow < min_slow_periods:
        raise DataError(
            f"slow mode at frequency {f_slow:.4g} needs a duration of at "
            f"least {min_slow_periods / f_slow:.4g} time units to resolve "
            f"{min_slow_periods} periods; trajectory covers {duration:.4g}"
        )
    return ModeSpectrum(
        fast_frequency=f_fast,
        fast_amplitude=a_fast,
        slow_frequency=f_slow,
        slow_amplitude=a_slow,
    )


def slow_mode_phase_shift(traj, spectrum=None):
    """Phase lag (rad) between the slow oscillations of Omega_x and Omega_y.

    A shift of pi/2 evidences precession of the spinning plane.
    """
    if spectrum is None:
        spectrum = mode_spectrum(traj)
    if spectrum.slow_frequency is None:
        raise DataError("trajectory has no detectable slow mode")
    dt = _uniform_dt(traj)
    n = traj.t.size
    w = np.hanning(n)
    nfft = 8 * n
    freqs = np.fft.rfftfreq(nfft, dt)
    k = int(np.argmin(np.abs(freqs - spectrum.slow_frequency)))
    fx = np.fft.rfft((traj.omega[:, 0] - traj.omega[:, 0].mean()) * w, nfft)[k]
    fy = np.fft.rfft((traj.omega[:, 1] - traj.omega[:, 1].mean()) * w, nfft)[k]
    shift = np.angle(fy / fx)
    return abs(float(shift))


def precession_prediction(spin_frequency, libration_frequency):
    """Slow precession frequency 0.5 f_beta^2 / f_s implied by the model."""
    if not spin_frequency > 0:
        raise DomainError(f"spin frequency must be positive, got {spin_frequency}")
    return 0.5 * libration_frequency**2 / spin_frequency


def period_sweep(omega0_values, epsilon=1e-3, n_slow_periods=15, rtol=1e-9):
    """Integrate and extract (omega0, fast period, slow period) rows.

    Each trajectory starts from Omega = (0, 0, omega0), e = (1, 0, 0) and
    covers ``n_slow_periods`` of the expected precession period, which
    grows linearly with omega0.
    """
    rows = []
    for omega0 in omega0_values:
        expected_slow = 4.0 * math.pi * omega0
        t_end = n_slow_periods * expected_slow
        traj = integrate(
            GyroState(np.array([0.0, 0.0, float(omega0)]), np.array([1.0, 0.0, 0.0])),
            GyroParams(epsilon=epsilon),
            t_end,
            rtol=rtol,
        )
        spec = mode_spectrum(traj, min_slow_periods=min(5, n_slow_periods))
        if spec.slow_frequency is None:
            raise DataError(f"no slow mode detected for omega0 = {omega0}")
        rows.append((float(omega0), spec.fast_period, spec.slow_period))
    return rows


def fit_period_law(rows):
    """Least-squares fit ln(T_slow) = log_c - alpha ln(T_fast).

    Returns (log_c, alpha) from sweep rows produced by period_sweep.
    """
    rows = np.asarray(rows, dtype=float)
    if rows.shape[0] < 2:
        raise DataError("period-law fit needs at least two sweep rows")
    design = np.column_stack([np.ones(rows.shape[0]), -np.log(rows[:, 1])])
    coef, *_ = np.linalg.lstsq(design, np.log(rows[:, 2]), rcond=None)
    return float(coef[0]), float(coef[1])
