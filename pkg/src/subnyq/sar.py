"""Range-Doppler SAR imaging with range cell migration correction done
directly on range Fourier coefficients.

Conventions: raw data d[n, m] (range bin n, azimuth position m); Fourier
coefficients D_m[l] = sum_n d[n, m] exp(-j 2 pi l n / N) stored in FFT
order; Doppler bins k are signed (fftfreq order).  Range bins are counted
from zero range so that the migration at Doppler k is n a k^2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SarGeometry:
    velocity_v: float
    pri_T: float
    positions_M: int
    wavelength: float
    range_cell: float = 1.0

    def __post_init__(self):
        if self.velocity_v == 0 or self.pri_T <= 0 or self.positions_M < 1:
            raise ValueError("need nonzero velocity, positive PRI and M >= 1")
        if self.wavelength <= 0 or self.range_cell <= 0:
            raise ValueError("wavelength and range cell must be positive")

    @property
    def spacing(self) -> float:
        """Along-track distance between positions, |v| T."""
        return abs(self.velocity_v) * self.pri_T

    @property
    def scale_a(self) -> float:
        return self.wavelength**2 / (8 * self.spacing**2 * self.positions_M**2)

    def doppler_bins(self) -> np.ndarray:
        M = self.positions_M
        return np.fft.fftfreq(M, 1.0 / M)

    def chirp_rate(self, n) -> np.ndarray:
        """K_a[n] = 2 M^2 (vT)^2 / (lambda R_n) in Doppler bins^2."""
        R = np.asarray(n, dtype=float) * self.range_cell
        if np.any(R == 0):
            raise ValueError("zero range has no azimuth chirp")
        return 2 * self.positions_M**2 * self.spacing**2 / (self.wavelength * R)


def desk_geometry(M: int = 32, a: float = 2.44e-4) -> SarGeometry:
    """Unit-PRI geometry with lambda equal to the range cell and scale a."""
    lam = 0.03
    vT = lam / (M * np.sqrt(8 * a))
    return SarGeometry(vT, 1.0, M, lam, range_cell=lam)


def gaussian_pulse_spectrum(N: int, frac: float = 0.8) -> np.ndarray:
    """Gaussian-windowed flat spectrum over the central ``frac`` of the band."""
    f = np.fft.fftfreq(N, 1.0 / N)
    H = np.exp(-0.5 * (f / (0.3 * N)) ** 2)
    H[np.abs(f) > frac * N / 2] = 0.0
    return H.astype(complex)


def simulate_point_targets(geom: SarGeometry, N: int, targets, pulse_H: np.ndarray) -> np.ndarray:
    """Raw Fourier coefficients D[l, m] of point targets.

    ``targets`` holds (range_bin, azimuth_position, amplitude); each echo
    follows the exact hyperbolic range history with unit beam pattern.
    """
    M = geom.positions_M
    l = np.fft.fftfreq(N, 1.0 / N)
    m = np.arange(M)
    D = np.zeros((N, M), dtype=complex)
    for n0, m0, amp in targets:
        R0 = n0 * geom.range_cell
        R = np.sqrt(R0**2 + (geom.spacing * (m - m0)) ** 2)
        nm = R / geom.range_cell
        D += amp * (pulse_H[:, None] * np.exp(-2j * np.pi * np.outer(l, nm) / N)
                    * np.exp(-4j * np.pi * R / geom.wavelength)[None, :])
    return D


def to_time(D: np.ndarray) -> np.ndarray:
    return np.fft.ifft(D, axis=0)


def to_fourier(d: np.ndarray) -> np.ndarray:
    return np.fft.fft(d, axis=0)


def range_compress(raw: np.ndarray, pulse: np.ndarray, domain: str = "time",
                   Ts: float = 1.0) -> np.ndarray:
    """Matched filter in range.

    ``domain="time"``: raw is d[n, m] and pulse is h[n]; circular correlation
    scaled by Ts.  ``domain="fourier"``: raw is D[l, m], pulse is H[l] and
    the result is Ts D[l, m] conj(H[l]).
    """
    raw = np.asarray(raw, dtype=complex)
    pulse = np.asarray(pulse, dtype=complex)
    if raw.shape[0] != pulse.shape[0]:
        raise ValueError(f"pulse length {pulse.shape[0]} does not match {raw.shape[0]} range bins")
    if domain == "fourier":
        return Ts * raw * pulse.conj()[:, None]
    if domain != "time":
        raise ValueError(f"unknown domain {domain!r}")
    Hc = np.fft.fft(pulse).conj()
    return Ts * np.fft.ifft(np.fft.fft(raw, axis=0) * Hc[:, None], axis=0)


def azimuth_dft(s: np.ndarray) -> np.ndarray:
    return np.fft.fft(s, axis=1)


def azimuth_idft(S: np.ndarray) -> np.ndarray:
    return np.fft.ifft(S, axis=1)


def _dirichlet(x: np.ndarray, N: int) -> np.ndarray:
    """sum_{n<N} exp(j 2 pi n x / N) for real x."""
    x = np.asarray(x, dtype=float)
    den = np.sin(np.pi * x / N)
    near = np.abs(den) < 1e-12
    safe = np.where(near, 1.0, den)
    val = np.exp(1j * np.pi * (N - 1) * x / N) * np.sin(np.pi * x) / safe
    # x a multiple of N: every term equals exp(j 2 pi n x / N)
    lim = N * np.exp(1j * np.pi * (N - 1) * np.round(x / N))
    return np.where(near, lim, val)


def rcmc_kernel(N: int, scale: float, l: int, n: np.ndarray) -> np.ndarray:
    """Weights of input coefficients n (signed) for output coefficient l."""
    return _dirichlet(scale * np.asarray(n) - l, N) / N


def rcmc_fourier(S_fourier: np.ndarray, geom: SarGeometry, half_width_W: int = 10) -> np.ndarray:
    """Migration correction on range Fourier coefficients S_k[l] (N x M).

    Output coefficient l at Doppler k combines the 2W+1 input coefficients
    centred on round(l / (1 + a k^2)), slid inward at the band edges so the
    window always holds min(2W + 1, N) coefficients.
    """
    if half_width_W < 1:
        raise ValueError("W must be >= 1")
    S_fourier = np.asarray(S_fourier, dtype=complex)
    N, M = S_fourier.shape
    if M != geom.positions_M:
        raise ValueError("azimuth size does not match the geometry")
    sig = np.fft.fftfreq(N, 1.0 / N).astype(int)
    lo, hi = -(N // 2), N - N // 2 - 1
    C = np.zeros_like(S_fourier)
    width = min(2 * half_width_W + 1, N)
    for j, k in enumerate(geom.doppler_bins()):
        s = 1 + geom.scale_a * k**2
        for l in sig:
            start = min(max(int(np.round(l / s)) - half_width_W, lo), hi + 1 - width)
            n = np.arange(start, start + width)
            C[l % N, j] = np.dot(rcmc_kernel(N, s, l, n), S_fourier[n % N, j])
    return C


def rcmc_interp(S: np.ndarray, geom: SarGeometry) -> np.ndarray:
    """Oracle: C[n, k] = S[n (1 + a k^2), k] by periodic band-limited interpolation."""
    S = np.asarray(S, dtype=complex)
    N, M = S.shape
    if M != geom.positions_M:
        raise ValueError("azimuth size does not match the geometry")
    l = np.fft.fftfreq(N, 1.0 / N)
    n = np.arange(N)
    out = np.empty_like(S)
    spec = np.fft.fft(S, axis=0)
    for j, k in enumerate(geom.doppler_bins()):
        x = n * (1 + geom.scale_a * k**2)
        E = np.exp(2j * np.pi * np.outer(x, l) / N) / N
        out[:, j] = E @ spec[:, j]
    return out


def azimuth_compress_and_image(C: np.ndarray, Ka) -> np.ndarray:
    """Y[n, k] = C[n, k] exp(-j pi k^2 / K_a[n]); image = inverse azimuth DFT."""
    C = np.asarray(C, dtype=complex)
    N, M = C.shape
    Ka = np.broadcast_to(np.asarray(Ka, dtype=float), (N,))
    if np.any(Ka == 0):
        raise ValueError("zero azimuth chirp rate")
    k = np.fft.fftfreq(M, 1.0 / M)
    Y = C * np.exp(-1j * np.pi * np.outer(1.0 / Ka, k**2))
    return azimuth_idft(Y)


def _safe_chirp(geom: SarGeometry, N: int) -> np.ndarray:
    n = np.arange(N, dtype=float)
    n[0] = 0.5
    return geom.chirp_rate(n)


def rda_time(raw_time: np.ndarray, pulse_time: np.ndarray, geom: SarGeometry) -> np.ndarray:
    """Classic pipeline: time-domain matched filter, interpolation RCMC."""
    s = range_compress(raw_time, pulse_time, "time")
    C = rcmc_interp(azimuth_dft(s), geom)
    return azimuth_compress_and_image(C, _safe_chirp(geom, s.shape[0]))


def rda_fourier(D: np.ndarray, pulse_H: np.ndarray, geom: SarGeometry, W: int = 10,
                keep: np.ndarray | None = None) -> np.ndarray:
    """Pipeline that never leaves the range Fourier domain until imaging.

    ``keep`` is an optional boolean mask over range coefficients; the rest
    are treated as not acquired.
    """
    Dt = range_compress(D, pulse_H, "fourier")
    if keep is not None:
        Dt = Dt * np.asarray(keep, dtype=float)[:, None]
    S = azimuth_dft(Dt)
    C = np.fft.ifft(rcmc_fourier(S, geom, W), axis=0)
    return azimuth_compress_and_image(C, _safe_chirp(geom, D.shape[0]))


def multiband_mask(N: int, fraction: float, bands: int = 4, support=None) -> np.ndarray:
    """Contiguous runs covering ``fraction`` of the N coefficients.

    Runs are spread evenly over ``support`` (signed indices, default all).
    """
    if not 0 < fraction <= 1:
        raise ValueError("fraction must be in (0, 1]")
    sig = np.fft.fftfreq(N, 1.0 / N).astype(int)
    pool = np.sort(sig if support is None else np.asarray(support, dtype=int))
    width = max(1, int(round(fraction * N / bands)))
    starts = np.linspace(0, len(pool) - width, bands).round().astype(int)
    mask = np.zeros(N, dtype=bool)
    for s0 in starts:
        mask[pool[s0:s0 + width] % N] = True
    return mask


def image_peak(img: np.ndarray) -> tuple[int, int]:
    n, m = np.unravel_index(np.argmax(np.abs(img)), img.shape)
    return int(n), int(m)
