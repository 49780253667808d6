"""Measurement pipeline: frequency tracking, decay fits, pressure inference.

Instantaneous frequency is read off as the maximum of a zero-padded
windowed periodogram with quadratic sub-bin interpolation, which is the
maximum-likelihood estimate for a single tone in white noise.  Decay
fitting is linear regression on ln(f) versus time, matching the
log-frequency observable of the stochastic model, so the estimator's
variance can be compared directly against the exact bound.
"""

import math
from dataclasses import dataclass

import numpy as np

from rotorgauge.constants import MBAR
from rotorgauge.core import gauge_factor, pressure_from_decay
from rotorgauge.errors import DataError, DomainError, NoDetectionError
from rotorgauge.spectral import refine_peak, windowed_periodogram
from rotorgauge.spindown import SpinDownTrace

# Samples below this frequency (Hz) are excluded from decay fits by
# default: near ~100 Hz the free rotation hands over to librational
# trapping, which the exponential model does not describe.
LIBRATION_FLOOR = 200.0


@dataclass
class DecayFit:
    """Result of an exponential spin-down fit in the log domain."""

    frequency0: float
    rate: float
    rate_stderr: float
    log_intercept_stderr: float
    residual_rms: float
    window: tuple
    n_points: int

    def to_dict(self):
        return {
            "gamma_per_s": self.rate,
            "gamma_stderr_per_s": self.rate_stderr,
            "f0_hz": self.frequency0,
            "window_s": list(self.window),
            "n_points": self.n_points,
            "residual_rms": self.residual_rms,
        }


@dataclass
class PressureFit:
    """Linear fit gamma = slope * Pg + intercept, all in SI (Pa, 1/s)."""

    slope: float
    intercept: float
    slope_stderr: float
    intercept_stderr: float
    n_points: int

    @property
    def residual_pressure(self):
        """Residual gauge pressure -intercept / slope (Pa)."""
        return -self.intercept / self.slope

    @property
    def slope_per_mbar(self):
        """Slope in the interface unit (s mbar)^-1."""
        return self.slope * MBAR

    def gamma_over_pressure(self, factor):
        """Damping per cold pressure, slope times the gauge factor (1/(s Pa))."""
        return self.slope * factor

    def to_dict(self):
        return {
            "A_per_s_mbar": self.slope_per_mbar,
            "B_per_s": self.intercept,
            "P_res_mbar": self.residual_pressure / MBAR,
            "stderr_A_per_s_mbar": self.slope_stderr * MBAR,
            "stderr_B_per_s": self.intercept_stderr,
            "n_points": self.n_points,
        }


@dataclass
class PressureInference:
    """Pressure readout chained from a decay fit."""

    pressure: float
    pressure_stderr: float
    gauge_pressure: float
    gauge_pressure_stderr: float

    def to_dict(self):
        return {
            "p_pa": self.pressure,
            "p_mbar": self.pressure / MBAR,
            "p_stderr_pa": self.pressure_stderr,
            "pg_pa": self.gauge_pressure,
            "pg_mbar": self.gauge_pressure / MBAR,
            "pg_stderr_pa": self.gauge_pressure_stderr,
        }


def periodogram_peak(segment, sample_rate, window="hann", pad_factor=8,
                     min_peak_ratio=5.0):
    """Frequency and amplitude of the dominant tone in a signal segment.

    The segment is windowed, zero-padded by ``pad_factor``, and the peak
    bin refined by quadratic interpolation of the log magnitude.  Raises
    NoDetectionError when the peak does not exceed ``min_peak_ratio``
    times the median spectral magnitude.
    """
    segment = np.asarray(segment, dtype=float)
    if segment.size < 16:
        raise DataError(f"segment too short: {segment.size} samples, need >= 16")
    freqs, mag, gain = windowed_periodogram(segment, 1.0 / sample_rate,
                                            window=window, pad_factor=pad_factor)
    k = int(np.argmax(mag[1:])) + 1  # skip DC
    floor = np.median(mag)
    if floor > 0 and mag[k] / floor < min_peak_ratio:
        raise NoDetectionError(
            f"peak/median ratio {mag[k] / floor:.2f} below threshold {min_peak_ratio}"
        )
    if floor == 0 and mag[k] == 0:
        raise NoDetectionError("empty spectrum")
    freq, peak_mag = refine_peak(freqs, mag, k)
    amplitude = 2.0 * peak_mag / (segment.size * gain)
    return freq, amplitude


def track_spindown(squid, window_seconds, hop_seconds=None, pad_factor=8,
                   min_peak_ratio=5.0, adaptive=True, max_refinements=6):
    """Track the instantaneous frequency of a spin-down signal.

    Slides a window across the signal, estimating one (center time, peak
    frequency) sample per hop; windows with no detectable peak are
    skipped.  When ``adaptive`` is set, the window is halved until the
    frequency drift within one window stays below one interpolated bin.
    """
    if hop_seconds is None:
        hop_seconds = window_seconds
    win = window_seconds
    for _ in range(max_refinements + 1):
        times, freqs = _track_once(squid, win, hop_seconds, pad_factor,
                                   min_peak_ratio)
        if not adaptive or len(times) < 3:
            break
        interp_bin = squid.sample_rate / (int(win * squid.sample_rate) * pad_factor)
        drift = np.max(np.abs(np.diff(freqs))) / hop_seconds * win
        if drift <= interp_bin and win >= 32 / squid.sample_rate:
            break
        new_win = win / 2.0
        if int(new_win * squid.sample_rate) < 16:
            break
        win = new_win
    if len(times) == 0:
        raise NoDetectionError("no window produced a detectable peak")
    return SpinDownTrace(
        times=np.asarray(times),
        frequencies=np.asarray(freqs),
        metadata={"window_s": win, "hop_s": hop_seconds, "pad_factor": pad_factor},
    )


def _track_once(squid, window_seconds, hop_seconds, pad_factor, min_peak_ratio):
    n_win = int(window_seconds * squid.sample_rate)
    if n_win < 16:
        raise DataError(
            f"window of {window_seconds} s holds only {n_win} samples, need >= 16"
        )
    n_hop = max(int(hop_seconds * squid.sample_rate), 1)
    times, freqs = [], []
    for start in range(0, squid.values.size - n_win + 1, n_hop):
        segment = squid.values[start:start + n_win]
        try:
            f, _ = periodogram_peak(segment, squid.sample_rate,
                                    pad_factor=pad_factor,
                                    min_peak_ratio=min_peak_ratio)
        except NoDetectionError:
            continue
        times.append((start + 0.5 * n_win) / squid.sample_rate)
        freqs.append(f)
    return times, freqs


def fit_exponential_decay(trace, t_start=None, t_end=None,
                          min_frequency=LIBRATION_FLOOR, weights=None):
    """Fit gamma by weighted least squares of ln(f) against time.

    Samples outside [t_start, t_end] or below ``min_frequency`` are
    excluded.  Uniform weights match the white-measurement-noise model;
    per-point weights may be supplied for heteroscedastic data.
    """
    t = trace.times
    f = trace.frequencies
    mask = np.ones(t.size, dtype=bool)
    if t_start is not None:
        mask &= t >= t_start
    if t_end is not None:
        mask &= t <= t_end
    mask &= f > min_frequency
    if weights is not None:
        weights = np.asarray(weights, dtype=float)
        if weights.shape != t.shape:
            raise DataError("weights must match the trace length")
        w = weights[mask]
    else:
        w = np.ones(int(mask.sum()))
    t, f = t[mask], f[mask]
    if t.size < 3:
        raise DataError(f"need >= 3 usable samples in the fit window, got {t.size}")
    if np.ptp(t) == 0:
        raise DataError("degenerate fit window: all samples at the same time")

    x = np.log(f)
    wsum = w.sum()
    t_bar = np.dot(w, t) / wsum
    x_bar = np.dot(w, x) / wsum
    s_tt = np.dot(w, (t - t_bar) ** 2)
    if s_tt == 0:
        raise DataError("rank-deficient design: no time spread under the weights")
    slope = np.dot(w, (t - t_bar) * (x - x_bar)) / s_tt
    intercept = x_bar - slope * t_bar
    resid = x - (intercept + slope * t)
    dof = max(t.size - 2, 1)
    s2 = np.dot(w, resid**2) / dof
    slope_var = s2 / s_tt
    intercept_var = s2 * (1.0 / wsum + t_bar**2 / s_tt)
    return DecayFit(
        frequency0=float(np.exp(intercept)),
        rate=float(-slope),
        rate_stderr=float(np.sqrt(slope_var)),
        log_intercept_stderr=float(np.sqrt(intercept_var)),
        residual_rms=float(np.sqrt(np.dot(w, resid**2) / wsum)),
        window=(float(t[0]), float(t[-1])),
        n_points=int(t.size),
    )


def fit_gamma_vs_pressure(gauge_pressures, rates):
    """Ordinary least squares of decay rate against gauge pressure (SI).

    Parameters are (Pg, gamma) pairs in Pa and 1/s; the returned fit
    exposes the interface-unit slope and the residual pressure.
    """
    pg = np.asarray(gauge_pressures, dtype=float)
    g = np.asarray(rates, dtype=float)
    if pg.shape != g.shape:
        raise DataError("pressure and rate arrays must have equal lengths")
    if pg.size < 2 or np.ptp(pg) == 0:
        raise DataError("need >= 2 distinct gauge pressures for a linear fit")
    p_bar = pg.mean()
    g_bar = g.mean()
    s_pp = np.sum((pg - p_bar) ** 2)
    slope = np.sum((pg - p_bar) * (g - g_bar)) / s_pp
    intercept = g_bar - slope * p_bar
    resid = g - (intercept + slope * pg)
    dof = max(pg.size - 2, 1)
    s2 = np.sum(resid**2) / dof
    return PressureFit(
        slope=float(slope),
        intercept=float(intercept),
        slope_stderr=float(np.sqrt(s2 / s_pp)),
        intercept_stderr=float(np.sqrt(s2 * (1.0 / pg.size + p_bar**2 / s_pp))),
        n_points=int(pg.size),
    )


def infer_pressure(fit, magnet, gas, gauge, gamma_per_pa=None):
    """Chain a decay fit into cold and gauge-equivalent pressures.

    By default the theoretical free-molecular relation converts gamma to
    pressure; ``gamma_per_pa`` substitutes an empirically calibrated
    damping-per-pressure constant (1/(s Pa)).  Uncertainties are
    propagated linearly from the gamma standard error.
    """
    rate = fit.rate
    if rate < 0:
        raise DomainError(f"fitted decay rate is negative: {rate}")
    if gamma_per_pa is not None:
        pressure = rate / gamma_per_pa
        stderr = fit.rate_stderr / gamma_per_pa
    else:
        pressure = pressure_from_decay(magnet, gas, rate)
        stderr = pressure_from_decay(magnet, gas, fit.rate_stderr) if fit.rate_stderr else 0.0
    factor = gauge_factor(gauge, gas)
    return PressureInference(
        pressure=pressure,
        pressure_stderr=stderr,
        gauge_pressure=factor * pressure,
        gauge_pressure_stderr=factor * stderr,
    )
