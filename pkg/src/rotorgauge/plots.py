"""Matplotlib figure rendering for the CLI report paths.

Figures are a convenience layer on top of the delimited outputs; the CSV
and JSON files remain the canonical, byte-reproducible artifacts.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def spindown_figure(trace, path, fit=None):
    """Frequency-versus-time plot of a spin-down trace, optional fit overlay."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.semilogy(trace.times, trace.frequencies, ".", ms=3, label="tracked frequency")
    if fit is not None:
        t = np.linspace(trace.times[0], trace.times[-1], 400)
        ax.semilogy(t, fit.frequency0 * np.exp(-fit.rate * t), "r-",
                    label=f"exponential fit, gamma = {fit.rate:.3g} 1/s")
    ax.set_xlabel("time (s)")
    ax.set_ylabel("frequency (Hz)")
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def trajectory_figure(traj, path):
    """Angular velocity components and conserved energy of a trajectory."""
    fig, axes = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    axes[0].plot(traj.t, traj.omega[:, 0], lw=0.6, label=r"$\Omega_x$")
    axes[0].plot(traj.t, traj.omega[:, 1], lw=0.6, label=r"$\Omega_y$")
    axes[0].set_ylabel("angular velocity (scaled)")
    axes[0].legend(loc="upper right")
    energy = traj.energy
    axes[1].plot(traj.t, energy - energy[0], lw=0.8)
    axes[1].set_ylabel("energy drift")
    axes[1].set_xlabel("time (scaled)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def period_sweep_figure(rows, path):
    """Log-log slow versus fast period with the fitted power law."""
    rows = np.asarray(rows, dtype=float)
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.loglog(rows[:, 1], rows[:, 2], "o", label="extracted periods")
    design = np.column_stack([np.ones(rows.shape[0]), -np.log(rows[:, 1])])
    coef, *_ = np.linalg.lstsq(design, np.log(rows[:, 2]), rcond=None)
    ts = np.linspace(rows[:, 1].min(), rows[:, 1].max(), 100)
    ax.loglog(ts, np.exp(coef[0]) * ts ** (-coef[1]), "r-",
              label=f"fit: alpha = {coef[1]:.3f}")
    ax.set_xlabel("fast (spinning) period")
    ax.set_ylabel("slow (precession) period")
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def crlb_sweep_figure(rows, x_label, path):
    """Bound variances against the swept variable, log-log."""
    rows = np.asarray(rows, dtype=float)
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    ax.loglog(rows[:, 0], rows[:, 1], "k-", label="exact bound")
    ax.loglog(rows[:, 0], rows[:, 2], "--", label="readout limit")
    ax.loglog(rows[:, 0], rows[:, 3], ":", label="process limit")
    ax.set_xlabel(x_label)
    ax.set_ylabel("Var(gamma) bound (1/s^2)")
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
