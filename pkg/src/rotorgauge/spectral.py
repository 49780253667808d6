"""Shared windowed-periodogram machinery with sub-bin peak refinement."""

import numpy as np

_WINDOWS = {
    "hann": np.hanning,
    "hamming": np.hamming,
    "blackman": np.blackman,
    "rect": np.ones,
}


def windowed_periodogram(x, dt, window="hann", pad_factor=8):
    """Magnitude spectrum of a zero-padded, windowed real signal.

    Returns
    -------
    freqs : ndarray
        Frequency grid (cycles per unit of ``dt``).
    mag : ndarray
        Magnitude of the one-sided DFT of the windowed signal.
    gain : float
        Coherent gain of the window (mean of the window samples), for
        amplitude recovery.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    w = _WINDOWS[window](n)
    nfft = pad_factor * n
    mag = np.abs(np.fft.rfft(x * w, nfft))
    freqs = np.fft.rfftfreq(nfft, dt)
    return freqs, mag, w.mean()


def refine_peak(freqs, mag, index):
    """Quadratic interpolation of a spectral peak on log magnitude.

    Fits a parabola through the log magnitudes of the peak bin and its two
    neighbours, returning the interpolated frequency and magnitude.  Falls
    back to the raw bin at the spectrum edges or when the parabola
    degenerates.
    """
    k = int(index)
    if k <= 0 or k >= mag.size - 1:
        return freqs[k], mag[k]
    tiny = np.finfo(float).tiny
    a = np.log(mag[k - 1] + tiny)
    b = np.log(mag[k] + tiny)
    c = np.log(mag[k + 1] + tiny)
    denom = a - 2.0 * b + c
    if denom >= 0:
        return freqs[k], mag[k]
    shift = 0.5 * (a - c) / denom
    df = freqs[1] - freqs[0]
    peak_log = b - 0.25 * (a - c) * shift
    return freqs[k] + shift * df, float(np.exp(peak_log))


def band_peak(freqs, mag, f_lo=0.0, f_hi=None):
    """Index of the largest magnitude within [f_lo, f_hi]; None if empty."""
    mask = freqs > f_lo
    if f_hi is not None:
        mask &= freqs < f_hi
    idx = np.nonzero(mask)[0]
    if idx.size == 0:
        return None
    return idx[np.argmax(mag[idx])]
