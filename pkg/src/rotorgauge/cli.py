"""Command-line entry point: ``rotor physics|simulate|estimate|crlb``.

Every command is deterministic given its configuration and seed; numeric
output fields carry explicit units in their names.  Exit codes: 0
success, 2 configuration error, 3 data error, 4 numerical error.
"""

import functools
import json
import math
import sys

import click
import numpy as np

from rotorgauge import core
from rotorgauge import crlb as crlb_mod
from rotorgauge import estimation, precession, spindown
from rotorgauge.config import load_config
from rotorgauge.constants import MBAR
from rotorgauge.errors import (
    ConfigError,
    DataError,
    DomainError,
    NumericalError,
    RotorError,
)

_EXIT_CODES = [
    (ConfigError, 2),
    (DomainError, 2),
    (DataError, 3),
    (NumericalError, 4),
    (RotorError, 4),
]


def _handle_errors(func):
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except RotorError as exc:
            for cls, code in _EXIT_CODES:
                if isinstance(exc, cls):
                    click.echo(f"error: {exc}", err=True)
                    sys.exit(code)
            raise

    return wrapper


def _emit(payload, output):
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if output is None:
        click.echo(text, nl=False)
    else:
        with open(output, "w") as fh:
            fh.write(text)


def _write_csv(path, header, rows):
    data = np.asarray(rows, dtype=float)
    if data.size == 0:
        data = data.reshape(0, len(header.split(",")))
    np.savetxt(path, data, fmt="%.17g", delimiter=",", header=header, comments="")


@click.group()
def rotor():
    """Levitated spinning-rotor pressure-gauge laboratory."""


# ---------------------------------------------------------------------------
# physics


@rotor.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--output", type=click.Path(), default=None)
@_handle_errors
def physics(config_path, output):
    """Report the derived closed-form quantities for a configuration."""
    cfg = load_config(config_path)
    report = {}
    if cfg.gas is not None:
        report["mean_velocity_m_per_s"] = core.mean_velocity(cfg.gas)
        report["gauge_factor"] = core.gauge_factor(cfg.gauge, cfg.gas)
    if cfg.magnet is not None:
        report["mass_kg"] = cfg.magnet.mass
        report["inertia_kg_m2"] = cfg.magnet.inertia
    if cfg.magnet is not None and cfg.gas is not None:
        report["gamma_per_p_per_s_mbar"] = core.decay_rate(cfg.magnet, cfg.gas, 1.0) * MBAR
    ref = cfg.reference
    if "frequency_hz" in ref and "damping_rate_per_s" in ref:
        report["quality_factor"] = core.quality_factor(
            ref["frequency_hz"], ref["damping_rate_per_s"]
        )
        report["tau_s"] = 1.0 / ref["damping_rate_per_s"]
    if cfg.magnet is not None and "frequency_hz" in ref:
        speed, accel = core.tangential_kinematics(cfg.magnet, ref["frequency_hz"])
        report["tangential_speed_m_per_s"] = speed
        report["tangential_acceleration_m_per_s2"] = accel
    if cfg.magnet is not None and cfg.breaking is not None:
        omega_max = core.breaking_limit(cfg.magnet, cfg.breaking)
        report["omega_max_rad_per_s"] = omega_max
        report["f_max_hz"] = omega_max / (2.0 * math.pi)
        report["stress_limit_pa"] = cfg.breaking.stress_limit
    if cfg.magnet is not None and cfg.magnet.moment is not None and cfg.trap is not None:
        report["spinning_threshold_j"] = core.spinning_threshold(cfg.magnet, cfg.trap)
    _emit(report, output)


# ---------------------------------------------------------------------------
# simulate


@rotor.group()
def simulate():
    """Run deterministic or seeded simulations to CSV."""


@simulate.command("precession")
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--t-end", type=float, default=None, help="Override the config duration.")
@click.option("--output", required=True, type=click.Path())
@click.option("--sweep", default=None,
              help="Comma-separated omega0 values; writes a period-sweep CSV instead.")
@click.option("--figure", type=click.Path(), default=None)
@_handle_errors
def simulate_precession(config_path, t_end, output, sweep, figure):
    """Integrate the gyromagnetic model; CSV columns t,omega_*,e_*."""
    cfg = load_config(config_path)
    if cfg.gyro_params is None:
        raise ConfigError("configuration has no 'gyro' section")
    gyro = cfg.gyro
    if sweep is not None:
        values = [float(v) for v in sweep.split(",") if v.strip()]
        rows = precession.period_sweep(values, epsilon=cfg.gyro_params.epsilon,
                                       rtol=gyro.get("rtol", 1e-9))
        _write_csv(output, "omega0,T_s,T_l", rows)
        if figure:
            from rotorgauge import plots

            plots.period_sweep_figure(rows, figure)
        return
    duration = t_end if t_end is not None else gyro.get("t_end")
    if duration is None:
        raise ConfigError("no t_end given (config gyro.t_end or --t-end)")
    if duration == 0:
        _write_csv(output, "t,omega_x,omega_y,omega_z,e_x,e_y,e_z", [])
        return
    state = precession.GyroState(
        np.asarray(gyro.get("omega0", [0.0, 0.0, 1.0]), dtype=float),
        np.asarray(gyro.get("e0", [1.0, 0.0, 0.0]), dtype=float),
    )
    traj = precession.integrate(state, cfg.gyro_params, duration,
                                rtol=gyro.get("rtol", 1e-9))
    traj.to_csv(output)
    if figure:
        from rotorgauge import plots

        plots.trajectory_figure(traj, figure)


@simulate.command("spindown")
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--seed", type=int, default=None, help="Override the config seed.")
@click.option("--output", required=True, type=click.Path())
@click.option("--figure", type=click.Path(), default=None)
@_handle_errors
def simulate_spindown(config_path, seed, output, figure):
    """Simulate the stochastic log-frequency spin-down; CSV t_s,f_hz."""
    cfg = load_config(config_path)
    if cfg.state_space is None:
        raise ConfigError("configuration has no 'state_space' section")
    params = cfg.ou_params()
    trace = spindown.simulate_ou_spindown(
        params, cfg.state_space, cfg.seed if seed is None else seed
    )
    trace.to_csv(output, sidecar=True)
    if figure:
        from rotorgauge import plots

        plots.spindown_figure(trace, figure)


@simulate.command("squid")
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--seed", type=int, default=None)
@click.option("--output", required=True, type=click.Path())
@_handle_errors
def simulate_squid(config_path, seed, output):
    """Synthesize the raw readout signal; CSV t_s,y."""
    cfg = load_config(config_path)
    squid_cfg = cfg.squid
    if not squid_cfg:
        raise ConfigError("configuration has no 'squid' section")
    ou = cfg.raw.get("ou")
    if ou is None:
        raise ConfigError("'squid' simulation needs the 'ou' section for the decay")
    trace = spindown.synth_squid_signal(
        omega0=ou["nominal_spin_rad_per_s"],
        damping_rate=ou["damping_rate_per_s"],
        amplitude=squid_cfg.get("amplitude", 1.0),
        phase0=squid_cfg.get("phase0_rad", 0.0),
        noise_sigma=squid_cfg.get("noise_sigma", 0.0),
        sample_rate=squid_cfg["sample_rate_hz"],
        duration=squid_cfg["duration_s"],
        seed=cfg.seed if seed is None else seed,
    )
    trace.to_csv(output)


# ---------------------------------------------------------------------------
# estimate


@rotor.group()
def estimate():
    """Frequency tracking, decay fits, and pressure inference."""


@estimate.command("track")
@click.option("--input", "input_path", required=True, type=click.Path())
@click.option("--window", type=float, required=True, help="Window length (s).")
@click.option("--hop", type=float, default=None, help="Hop between windows (s).")
@click.option("--output", required=True, type=click.Path())
@_handle_errors
def estimate_track(input_path, window, hop, output):
    """Track the spectral peak of a readout CSV into a spin-down trace."""
    squid = spindown.SquidTrace.from_csv(input_path)
    trace = estimation.track_spindown(squid, window, hop)
    trace.to_csv(output)


@estimate.command("fit-decay")
@click.option("--input", "input_path", required=True, type=click.Path())
@click.option("--t-start", type=float, default=None)
@click.option("--t-end", type=float, default=None)
@click.option("--min-freq", type=float, default=estimation.LIBRATION_FLOOR)
@click.option("--output", type=click.Path(), default=None)
@_handle_errors
def estimate_fit_decay(input_path, t_start, t_end, min_freq, output):
    """Fit an exponential decay to a trace CSV; JSON report."""
    trace = spindown.SpinDownTrace.from_csv(input_path)
    fit = estimation.fit_exponential_decay(trace, t_start=t_start, t_end=t_end,
                                           min_frequency=min_freq)
    _emit(fit.to_dict(), output)


@estimate.command("fit-pressure")
@click.option("--input", "input_path", required=True, type=click.Path(),
              help="CSV with header pg_mbar,gamma_per_s.")
@click.option("--output", type=click.Path(), default=None)
@_handle_errors
def estimate_fit_pressure(input_path, output):
    """Linear fit of decay rate against gauge pressure; JSON report."""
    data = np.loadtxt(input_path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != 2:
        raise DataError(f"expected 2 columns (pg_mbar,gamma_per_s), got {data.shape[1]}")
    fit = estimation.fit_gamma_vs_pressure(data[:, 0] * MBAR, data[:, 1])
    _emit(fit.to_dict(), output)


@estimate.command("infer-pressure")
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--input", "input_path", type=click.Path(), default=None,
              help="Trace CSV to fit; alternatively give --gamma-per-s.")
@click.option("--gamma-per-s", type=float, default=None)
@click.option("--gamma-per-p", type=float, default=None,
              help="Empirical damping per cold pressure, (s mbar)^-1.")
@click.option("--t-start", type=float, default=None)
@click.option("--t-end", type=float, default=None)
@click.option("--min-freq", type=float, default=estimation.LIBRATION_FLOOR)
@click.option("--output", type=click.Path(), default=None)
@_handle_errors
def estimate_infer_pressure(config_path, input_path, gamma_per_s, gamma_per_p,
                            t_start, t_end, min_freq, output):
    """Chain a decay rate into cold and gauge pressures; JSON report."""
    cfg = load_config(config_path)
    if cfg.magnet is None or cfg.gas is None:
        raise ConfigError("infer-pressure needs 'magnet' and 'gas' sections")
    if (input_path is None) == (gamma_per_s is None):
        raise ConfigError("give exactly one of --input or --gamma-per-s")
    if input_path is not None:
        trace = spindown.SpinDownTrace.from_csv(input_path)
        fit = estimation.fit_exponential_decay(trace, t_start=t_start, t_end=t_end,
                                               min_frequency=min_freq)
    else:
        fit = estimation.DecayFit(
            frequency0=0.0, rate=gamma_per_s, rate_stderr=0.0,
            log_intercept_stderr=0.0, residual_rms=0.0, window=(0.0, 0.0),
            n_points=0,
        )
    gamma_per_pa = None if gamma_per_p is None else gamma_per_p / MBAR
    inference = estimation.infer_pressure(fit, cfg.magnet, cfg.gas, cfg.gauge,
                                          gamma_per_pa=gamma_per_pa)
    payload = inference.to_dict()
    payload["gamma_per_s"] = fit.rate
    _emit(payload, output)


# ---------------------------------------------------------------------------
# crlb


def _bound_inputs(cfg):
    if cfg.state_space is None:
        raise ConfigError("configuration has no 'state_space' section")
    params = cfg.ou_params()
    gamma_per_pa = None
    if cfg.magnet is not None and cfg.gas is not None:
        gamma_per_pa = core.decay_rate(cfg.magnet, cfg.gas, 1.0)
    return params, gamma_per_pa


@rotor.command("crlb")
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--sweep", type=click.Choice(["tm", "pressure"]), default=None)
@click.option("--values", default=None,
              help="Comma-separated sweep values (t_m in s, or pressure in mbar).")
@click.option("--output", type=click.Path(), default=None)
@click.option("--figure", type=click.Path(), default=None)
@_handle_errors
def crlb_command(config_path, sweep, values, output, figure):
    """Exact and limiting decay-rate bounds plus pressure floors."""
    cfg = load_config(config_path)
    params, gamma_per_pa = _bound_inputs(cfg)
    model = cfg.state_space
    q = params.process_noise_intensity
    if sweep is None:
        if gamma_per_pa is None:
            raise ConfigError("pressure floors need 'magnet' and 'gas' sections")
        report = crlb_mod.sensitivity_floors(
            gamma_per_pa, model, q,
            include_exact=model.n_samples <= crlb_mod.MAX_DENSE_SAMPLES,
        )
        _emit(report.to_dict(), output)
        return
    if values is None:
        raise ConfigError("--sweep requires --values")
    if output is None:
        raise ConfigError("--sweep requires --output for the CSV")
    points = [float(v) for v in values.split(",") if v.strip()]
    rows = []
    if sweep == "tm":
        for t_m in points:
            n = max(int(round(t_m / model.step)), 2)
            m = spindown.StateSpaceModel(model.step, n, model.noise_sigma)
            exact = crlb_mod.exact_crlb_gamma(crlb_mod.build_covariance(m, q))
            rows.append([m.duration, exact, crlb_mod.readout_limited_bound(m),
                         crlb_mod.process_limited_bound(q, m.duration)])
        header = "tm_s,exact_var,readout_var,process_var"
        x_label = "measurement duration (s)"
    else:
        if gamma_per_pa is None:
            raise ConfigError("a pressure sweep needs 'magnet' and 'gas' sections")
        for p_mbar in points:
            gamma = gamma_per_pa * p_mbar * MBAR
            p = spindown.OUParams(params.inertia, gamma, params.temperature,
                                  params.nominal_spin)
            qq = p.process_noise_intensity
            exact = crlb_mod.exact_crlb_gamma(crlb_mod.build_covariance(model, qq))
            rows.append([p_mbar, exact, crlb_mod.readout_limited_bound(model),
                         crlb_mod.process_limited_bound(qq, model.duration)])
        header = "p_mbar,exact_var,readout_var,process_var"
        x_label = "pressure (mbar)"
    _write_csv(output, header, rows)
    if figure:
        from rotorgauge import plots

        plots.crlb_sweep_figure(rows, x_label, figure)


def main():
    rotor(prog_name="rotor")


if __name__ == "__main__":
    main()
