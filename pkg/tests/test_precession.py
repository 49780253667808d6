import math

import numpy as np
import pytest

from rotorgauge.errors import DataError, DomainError
from rotorgauge.precession import (
    GyroParams,
    GyroState,
    Trajectory,
    conserved_quantities,
    derivatives,
    effective_potential,
    fit_period_law,
    integrate,
    mode_spectrum,
    nutation_period,
    potential_minimum,
    precession_prediction,
    slow_mode_phase_shift,
    turning_points,
)


def figure_state():
    """Initial condition of the reference nutation trajectory."""
    return GyroState(np.array([0.0, 0.4, 5.0]), np.array([1.0, 0.0, 0.0]))


FIGURE_PARAMS = GyroParams(epsilon=1e-3)
FIGURE_ENERGY = 0.5 * (0.4**2 + 5.0**2)  # e_z = 0 initially


class TestStateAndParams:
    def test_negative_epsilon_rejected(self):
        with pytest.raises(DomainError):
            GyroParams(epsilon=-1e-3)

    def test_dimensional_anchor_consistency(self):
        GyroParams(epsilon=1e-3, einstein_de_haas_frequency=0.4, scaling_frequency=400.0)
        with pytest.raises(DomainError):
            GyroParams(epsilon=2e-3, einstein_de_haas_frequency=0.4,
                       scaling_frequency=400.0)

    def test_unit_vector_enforced(self):
        with pytest.raises(DomainError):
            GyroState(np.zeros(3), np.array([1.0, 1.0, 0.0]))

    def test_polar_angle(self):
        s = GyroState(np.zeros(3), np.array([0.0, 0.0, 1.0]))
        assert s.polar_angle == pytest.approx(0.0, abs=1e-12)
        assert figure_state().polar_angle == pytest.approx(math.pi / 2, rel=1e-12)


class TestDerivatives:
    def test_spin_about_moment_axis(self):
        # Omega parallel to e and e on the vertical axis: full equilibrium
        state = GyroState(np.array([0.0, 0.0, 3.0]), np.array([0.0, 0.0, 1.0]))
        domega, de = derivatives(state, FIGURE_PARAMS)
        assert np.allclose(de, 0.0, atol=1e-15)
        assert np.allclose(domega, 0.0, atol=1e-15)

    def test_equatorial_moment_feels_no_torque(self):
        # e_z . e = 0 kills the image torque; only the epsilon term acts
        state = figure_state()
        domega, de = derivatives(state, FIGURE_PARAMS)
        oxe = np.cross(state.omega, state.e)
        assert np.allclose(de, oxe, atol=1e-15)
        assert np.allclose(domega, 1e-3 * oxe, atol=1e-15)

    def test_matches_finite_difference_of_flow(self):
        h = 1e-4
        traj = integrate(figure_state(), FIGURE_PARAMS, 2 * h, rtol=1e-12,
                         atol=1e-14, n_samples=3)
        mid = traj.state_at(1)
        domega, de = derivatives(mid, FIGURE_PARAMS)
        fd_omega = (traj.omega[2] - traj.omega[0]) / (2 * h)
        fd_e = (traj.e[2] - traj.e[0]) / (2 * h)
        assert np.allclose(fd_omega, domega, atol=1e-6)
        assert np.allclose(fd_e, de, atol=1e-6)


class TestIntegration:
    def test_free_rotation_is_exact(self):
        # epsilon = 0, e in the equatorial plane, Omega vertical: e rotates
        # uniformly and Omega stays fixed
        state = GyroState(np.array([0.0, 0.0, 3.0]), np.array([1.0, 0.0, 0.0]))
        traj = integrate(state, GyroParams(epsilon=0.0), 10.0, rtol=1e-11)
        assert np.allclose(traj.omega, [0.0, 0.0, 3.0], atol=1e-9)
        expected = np.column_stack(
            [np.cos(3.0 * traj.t), np.sin(3.0 * traj.t), np.zeros_like(traj.t)]
        )
        assert np.allclose(traj.e, expected, atol=1e-8)

    def test_conservation_over_thousand_fast_periods(self):
        state = figure_state()
        t_end = 1000.0 * 2.0 * math.pi / 5.0
        traj = integrate(state, FIGURE_PARAMS, t_end, rtol=1e-10, atol=1e-13)
        spin0, energy0 = conserved_quantities(state)
        assert np.max(np.abs(traj.spin_projection - spin0)) < 1e-8
        assert np.max(np.abs(traj.energy - energy0)) < 1e-6
        assert np.max(np.abs(np.linalg.norm(traj.e, axis=1) - 1.0)) < 1e-9

    def test_time_reversal(self):
        state = figure_state()
        fwd = integrate(state, FIGURE_PARAMS, 50.0, rtol=1e-11, atol=1e-13)
        back = integrate(fwd.state_at(-1), FIGURE_PARAMS, 0.0, rtol=1e-11, atol=1e-13)
        assert np.allclose(back.omega[0], state.omega, atol=1e-6)
        assert np.allclose(back.e[0], state.e, atol=1e-6)

    def test_zero_duration(self):
        traj = integrate(figure_state(), FIGURE_PARAMS, 0.0)
        assert traj.t.shape == (1,)
        assert np.allclose(traj.omega[0], [0.0, 0.4, 5.0])

    def test_csv_round_trip(self, tmp_path):
        traj = integrate(figure_state(), FIGURE_PARAMS, 1.0, n_samples=300)
        path = tmp_path / "traj.csv"
        traj.to_csv(path)
        loaded = Trajectory.from_csv(path, params=FIGURE_PARAMS)
        assert np.array_equal(loaded.t, traj.t)
        assert np.array_equal(loaded.omega, traj.omega)
        assert np.array_equal(loaded.e, traj.e)


class TestEffectivePotential:
    def test_equatorial_value(self):
        # at theta = pi/2 both the cosine cross term and cos^2 vanish
        u = effective_potential(math.pi / 2, omega0=5.0, epsilon=1e-3)
        assert u == pytest.approx(0.5 * (1e-6 + 25.0), rel=1e-12)

    def test_pole_rejected(self):
        with pytest.raises(DomainError):
            effective_potential(0.0, 5.0, 1e-3)
        with pytest.raises(DomainError):
            effective_potential(math.pi, 5.0, 1e-3)

    def test_minimum_is_stationary(self):
        theta_min, u_min = potential_minimum(5.0, 1e-3)
        h = 1e-6
        grad = (
            effective_potential(theta_min + h, 5.0, 1e-3)
            - effective_potential(theta_min - h, 5.0, 1e-3)
        ) / (2 * h)
        assert abs(grad) < 1e-5
        assert u_min <= effective_potential(theta_min + 0.01, 5.0, 1e-3)
        assert u_min <= effective_potential(theta_min - 0.01, 5.0, 1e-3)

    def test_turning_points_bracket_figure_energy(self):
        th1, th2 = turning_points(FIGURE_ENERGY, 5.0, 1e-3)
        for th in (th1, th2):
            assert effective_potential(th, 5.0, 1e-3) == pytest.approx(
                FIGURE_ENERGY, abs=1e-7
            )
        theta_min, _ = potential_minimum(5.0, 1e-3)
        assert th1 < theta_min < th2

    def test_energy_below_minimum_rejected(self):
        _, u_min = potential_minimum(5.0, 1e-3)
        with pytest.raises(DomainError):
            turning_points(u_min - 1e-3, 5.0, 1e-3)


class TestNutationPeriod:
    def test_figure_orbit_period(self):
        # reference nutation period 1.23 scaled time units
        period = nutation_period(FIGURE_ENERGY, 5.0, 1e-3)
        assert period == pytest.approx(1.23, rel=0.01)
        # frozen quadrature value for regression
        assert period == pytest.approx(1.2286754656, rel=1e-8)

    def test_harmonic_limit(self):
        theta_min, u_min = potential_minimum(5.0, 1e-3)
        h = 1e-5
        upp = (
            effective_potential(theta_min + h, 5.0, 1e-3)
            - 2.0 * u_min
            + effective_potential(theta_min - h, 5.0, 1e-3)
        ) / h**2
        harmonic = 2.0 * math.pi / math.sqrt(upp)
        # degenerate orbit exactly at the minimum
        assert nutation_period(u_min, 5.0, 1e-3) == pytest.approx(harmonic, rel=1e-4)
        # small-amplitude orbit approaches the same period
        near = nutation_period(u_min + 1e-4, 5.0, 1e-3)
        assert near == pytest.approx(harmonic, rel=1e-3)

    def test_matches_spectral_estimate(self):
        # the polar-angle oscillation of the integrated orbit has the
        # quadrature period
        traj = integrate(figure_state(), FIGURE_PARAMS, 60.0, rtol=1e-10)
        ez = traj.e[:, 2]
        from rotorgauge.spectral import band_peak, refine_peak, windowed_periodogram

        freqs, mag, _ = windowed_periodogram(ez - ez.mean(), traj.t[1] - traj.t[0])
        k = band_peak(freqs, mag, f_lo=3.0 / 60.0)
        f_nut, _ = refine_peak(freqs, mag, k)
        assert 1.0 / f_nut == pytest.approx(nutation_period(FIGURE_ENERGY, 5.0, 1e-3),
                                            rel=0.01)


class TestModeSpectrum:
    def test_fast_and_slow_peaks(self):
        omega0 = 3.0
        traj = integrate(
            GyroState(np.array([0.0, 0.0, omega0]), np.array([1.0, 0.0, 0.0])),
            FIGURE_PARAMS,
            15 * 4.0 * math.pi * omega0,
        )
        spec = mode_spectrum(traj)
        assert spec.fast_frequency == pytest.approx(omega0 / (2 * math.pi), rel=1e-4)
        assert spec.slow_frequency is not None
        # slow-fast product approaches 1/2 in scaled units
        product = (2 * math.pi) ** 2 * spec.fast_frequency * spec.slow_frequency
        assert product == pytest.approx(0.5, rel=0.1)

    def test_no_slow_mode_without_coupling(self):
        traj = integrate(
            GyroState(np.array([0.0, 0.0, 3.0]), np.array([1.0, 0.0, 0.0])),
            GyroParams(epsilon=0.0),
            200.0,
        )
        spec = mode_spectrum(traj)
        assert spec.slow_frequency is None
        assert spec.slow_period is None

    def test_unresolved_slow_mode_names_needed_duration(self):
        omega0 = 3.0
        traj = integrate(
            GyroState(np.array([0.0, 0.0, omega0]), np.array([1.0, 0.0, 0.0])),
            FIGURE_PARAMS,
            1.5 * 4.0 * math.pi * omega0,
        )
        with pytest.raises(DataError, match="duration"):
            mode_spectrum(traj)

    def test_quarter_turn_phase_shift(self):
        omega0 = 3.0
        traj = integrate(
            GyroState(np.array([0.0, 0.0, omega0]), np.array([1.0, 0.0, 0.0])),
            FIGURE_PARAMS,
            15 * 4.0 * math.pi * omega0,
        )
        shift = slow_mode_phase_shift(traj)
        assert shift == pytest.approx(math.pi / 2, abs=0.1)


class TestPrediction:
    def test_slow_frequency_formula(self):
        # f_l f_s = f_beta^2 / 2 exactly, by construction
        f_beta, f_s = 392.0, 1000.0
        f_l = precession_prediction(f_s, f_beta)
        assert f_l * f_s == pytest.approx(0.5 * f_beta**2, rel=1e-12)

    def test_scales_inversely_with_spin(self):
        assert precession_prediction(2000.0, 392.0) == pytest.approx(
            0.5 * precession_prediction(1000.0, 392.0), rel=1e-12
        )

    def test_crossing_point(self):
        # slow and fast frequencies meet at f_s = f_beta / sqrt(2)
        f_beta = 392.0
        f_cross = f_beta / math.sqrt(2.0)
        assert precession_prediction(f_cross, f_beta) == pytest.approx(
            f_cross, rel=1e-12
        )

    def test_zero_spin_rejected(self):
        with pytest.raises(DomainError):
            precession_prediction(0.0, 392.0)


class TestPeriodLaw:
    def test_fit_recovers_exact_power_law(self):
        t_fast = np.array([0.5, 1.0, 2.0, 4.0])
        t_slow = 79.4 * t_fast ** (-0.96)
        rows = np.column_stack([1.0 / t_fast, t_fast, t_slow])
        log_c, alpha = fit_period_law(rows)
        assert alpha == pytest.approx(0.96, rel=1e-10)
        assert math.exp(log_c) == pytest.approx(79.4, rel=1e-10)

    def test_too_few_rows(self):
        with pytest.raises(DataError):
            fit_period_law([(1.0, 1.0, 1.0)])
