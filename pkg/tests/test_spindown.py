import math

import numpy as np
import pytest

from rotorgauge.constants import K_B
from rotorgauge.errors import DataError, DomainError, LinearizationWarning
from rotorgauge.spindown import (
    OUParams,
    SpinDownTrace,
    SquidTrace,
    StateSpaceModel,
    mean_decay,
    phase_trajectory,
    process_noise_intensity,
    simulate_ou_spindown,
    synth_squid_signal,
)

INERTIA_24UM = 9.912017629868528e-20  # 24 um sphere at 7430 kg/m^3


def reference_params(damping_rate=9.3e-3, temperature=4.2, nominal_spin=2 * math.pi * 5000.0):
    return OUParams(
        inertia=INERTIA_24UM,
        damping_rate=damping_rate,
        temperature=temperature,
        nominal_spin=nominal_spin,
    )


class TestParams:
    def test_validation(self):
        with pytest.raises(DomainError):
            OUParams(inertia=0.0, damping_rate=1e-3, temperature=4.2, nominal_spin=1.0)
        with pytest.raises(DomainError):
            OUParams(inertia=1e-19, damping_rate=-1e-3, temperature=4.2, nominal_spin=1.0)
        with pytest.raises(DomainError):
            StateSpaceModel(step=0.5, n_samples=1)

    def test_model_grid(self):
        model = StateSpaceModel(step=0.5, n_samples=120, noise_sigma=1e-4)
        assert model.duration == pytest.approx(60.0, rel=1e-12)
        assert model.rate == pytest.approx(2.0, rel=1e-12)
        assert np.allclose(model.times, 0.5 * np.arange(120))

    def test_process_noise_two_paths_agree(self):
        params = reference_params()
        q = process_noise_intensity(params)
        direct = (
            2.0 * params.damping_rate * K_B * params.temperature
            / (params.inertia * params.nominal_spin**2)
        )
        assert q == pytest.approx(direct, rel=1e-12)

    def test_process_noise_scalings(self):
        base = reference_params()
        no_damping = reference_params(damping_rate=0.0)
        assert no_damping.process_noise_intensity == 0.0
        doubled_spin = reference_params(nominal_spin=2 * base.nominal_spin)
        assert doubled_spin.process_noise_intensity == pytest.approx(
            base.process_noise_intensity / 4.0, rel=1e-12
        )

    def test_torque_psd(self):
        params = reference_params()
        expected = 4.0 * K_B * 4.2 * INERTIA_24UM * 9.3e-3
        assert params.torque_psd == pytest.approx(expected, rel=1e-12)


class TestMeanMotion:
    def test_half_life(self):
        # gamma = 9.3e-3 1/s halves the frequency in ~74.5 s
        omega0 = 2 * math.pi * 5000.0
        t_half = math.log(2.0) / 9.3e-3
        assert t_half == pytest.approx(74.5, rel=0.01)
        assert mean_decay(omega0, 9.3e-3, t_half) == pytest.approx(
            omega0 / 2.0, rel=1e-12
        )

    def test_one_over_e_time_lowest_pressure(self):
        # gamma = 4.75e-7 1/s -> tau = 24.4 days
        tau_days = 1.0 / 4.75e-7 / 86400.0
        assert tau_days == pytest.approx(24.4, rel=0.01)

    def test_phase_trajectory_endpoints(self):
        theta = phase_trajectory(1.5, 100.0, 10.0, 0.0)
        assert theta == pytest.approx(1.5, rel=1e-12)
        assert phase_trajectory(0.0, 100.0, 10.0, 1e6) == pytest.approx(
            1000.0, rel=1e-9
        )

    def test_phase_derivative_is_mean_decay(self):
        tau = 1.0 / 9.3e-3
        omega0 = 2 * math.pi * 5000.0
        t = np.array([0.5 * tau, tau, 2.0 * tau])
        h = 1e-4 * tau
        dtheta = (
            phase_trajectory(0.3, omega0, tau, t + h)
            - phase_trajectory(0.3, omega0, tau, t - h)
        ) / (2 * h)
        assert np.allclose(dtheta, mean_decay(omega0, 9.3e-3, t), rtol=1e-7)

    def test_negative_time_rejected(self):
        with pytest.raises(DomainError):
            mean_decay(1.0, 1e-3, -1.0)
        with pytest.raises(DomainError):
            phase_trajectory(0.0, 1.0, 10.0, -1.0)


class TestSimulation:
    def test_noiseless_limit_is_exact_exponential(self):
        # vanishing temperature kills the process noise; the log-frequency
        # then decays exactly linearly
        params = reference_params(temperature=1e-30)
        model = StateSpaceModel(step=0.5, n_samples=200)
        trace = simulate_ou_spindown(params, model, seed=1)
        expected = 5000.0 * np.exp(-9.3e-3 * trace.times)
        assert np.allclose(trace.frequencies, expected, rtol=1e-9)

    def test_reproducible_for_fixed_seed(self):
        params = reference_params()
        model = StateSpaceModel(step=0.5, n_samples=120, noise_sigma=1e-4)
        a = simulate_ou_spindown(params, model, seed=42)
        b = simulate_ou_spindown(params, model, seed=42)
        assert np.array_equal(a.frequencies, b.frequencies)
        c = simulate_ou_spindown(params, model, seed=43)
        assert not np.array_equal(a.frequencies, c.frequencies)

    def test_metadata_records_provenance(self):
        params = reference_params()
        model = StateSpaceModel(step=0.5, n_samples=120, noise_sigma=1e-4)
        trace = simulate_ou_spindown(params, model, seed=7)
        assert trace.metadata["seed"] == 7
        assert trace.metadata["gamma"] == 9.3e-3
        assert trace.metadata["sigma_v"] == 1e-4
        assert trace.metadata["n_samples"] == 120

    def test_increment_statistics(self):
        # ensemble mean and variance of the total log-frequency drop match
        # -gamma t and Q t
        gamma = 1e-5
        # small inertia inflates Q so the statistics resolve quickly
        params = OUParams(inertia=1e-26, damping_rate=gamma, temperature=4.2,
                          nominal_spin=100.0)
        model = StateSpaceModel(step=0.1, n_samples=50)
        q = params.process_noise_intensity
        span = (model.n_samples - 1) * model.step
        drops = np.empty(10_000)
        for i in range(drops.size):
            x = np.log(simulate_ou_spindown(params, model, seed=i).frequencies)
            drops[i] = x[-1] - x[0]
        n = drops.size
        mean_se = math.sqrt(q * span / n)
        assert abs(drops.mean() + gamma * span) < 4.0 * mean_se
        var = drops.var(ddof=1)
        var_se = q * span * math.sqrt(2.0 / (n - 1))
        assert abs(var - q * span) < 4.0 * var_se

    def test_linearization_warning(self):
        params = OUParams(inertia=1e-26, damping_rate=1e-2, temperature=300.0,
                          nominal_spin=100.0)
        model = StateSpaceModel(step=1.0, n_samples=1000)
        with pytest.warns(LinearizationWarning):
            simulate_ou_spindown(params, model, seed=0)


class TestTraces:
    def test_trace_validation(self):
        with pytest.raises(DataError):
            SpinDownTrace(times=[0.0, 1.0], frequencies=[100.0])
        with pytest.raises(DataError):
            SpinDownTrace(times=[0.0, 0.0], frequencies=[100.0, 90.0])
        with pytest.raises(DataError):
            SpinDownTrace(times=[0.0, 1.0], frequencies=[100.0, -1.0])

    def test_csv_round_trip_and_sidecar(self, tmp_path):
        params = reference_params()
        model = StateSpaceModel(step=0.5, n_samples=120, noise_sigma=1e-4)
        trace = simulate_ou_spindown(params, model, seed=5)
        path = tmp_path / "trace.csv"
        trace.to_csv(path, sidecar=True)
        loaded = SpinDownTrace.from_csv(path)
        assert np.array_equal(loaded.times, trace.times)
        assert np.array_equal(loaded.frequencies, trace.frequencies)
        sidecar = (tmp_path / "trace.csv.json").read_text()
        assert '"seed": 5' in sidecar

    def test_csv_bytes_reproducible(self, tmp_path):
        params = reference_params()
        model = StateSpaceModel(step=0.5, n_samples=120, noise_sigma=1e-4)
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        simulate_ou_spindown(params, model, seed=9).to_csv(p1)
        simulate_ou_spindown(params, model, seed=9).to_csv(p2)
        assert p1.read_bytes() == p2.read_bytes()


class TestSquidSignal:
    def test_noiseless_signal_is_chirped_sinusoid(self):
        trace = synth_squid_signal(
            omega0=2 * math.pi * 100.0, damping_rate=0.05, amplitude=0.7,
            phase0=0.4, noise_sigma=0.0, sample_rate=2000.0, duration=2.0,
        )
        theta = phase_trajectory(0.4, 2 * math.pi * 100.0, 20.0, trace.times)
        assert np.allclose(trace.values, 0.7 * np.sin(theta), atol=1e-12)

    def test_zero_damping_is_pure_tone(self):
        trace = synth_squid_signal(
            omega0=2 * math.pi * 100.0, damping_rate=0.0, amplitude=1.0,
            phase0=0.0, noise_sigma=0.0, sample_rate=2000.0, duration=1.0,
        )
        assert np.allclose(trace.values,
                           np.sin(2 * math.pi * 100.0 * trace.times), atol=1e-12)

    def test_aliasing_rejected(self):
        with pytest.raises(DomainError):
            synth_squid_signal(
                omega0=2 * math.pi * 1200.0, damping_rate=0.0, amplitude=1.0,
                phase0=0.0, noise_sigma=0.0, sample_rate=2000.0, duration=1.0,
            )

    def test_noise_reproducible(self):
        kwargs = dict(omega0=2 * math.pi * 100.0, damping_rate=0.01, amplitude=1.0,
                      phase0=0.0, noise_sigma=0.3, sample_rate=2000.0, duration=1.0)
        a = synth_squid_signal(seed=11, **kwargs)
        b = synth_squid_signal(seed=11, **kwargs)
        assert np.array_equal(a.values, b.values)

    def test_csv_round_trip(self, tmp_path):
        trace = synth_squid_signal(
            omega0=2 * math.pi * 100.0, damping_rate=0.01, amplitude=1.0,
            phase0=0.0, noise_sigma=0.1, sample_rate=2000.0, duration=1.0, seed=3,
        )
        path = tmp_path / "squid.csv"
        trace.to_csv(path)
        loaded = SquidTrace.from_csv(path)
        assert loaded.sample_rate == pytest.approx(2000.0, rel=1e-9)
        assert np.array_equal(loaded.values, trace.values)
