"""Doppler focusing and GLRT-gated delay-Doppler OMP."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .pursuit import kron_omp
from .results import RecoveryResult
from .scene import RadarConfig
from .xampling import FrequencyIndexSet, XampledData, partial_fourier

H_FLOOR_REL = 1e-8


@dataclass
class FocusedMatrix:
    """Focused, spectrum-normalised coefficients psi[k, u].

    Column u corresponds to Doppler ``focus_grid[u]`` (rad/s).  On the grid,
    psi = F_kappa @ X with X[n, u] the amplitude of the target in delay bin
    n and Doppler bin u.
    """

    psi: np.ndarray
    focus_grid: np.ndarray
    kappa: FrequencyIndexSet
    cfg: RadarConfig


def focus_grid(cfg: RadarConfig) -> np.ndarray:
    """Doppler bins -pi/tau + 2 pi u / (P tau), u = 0..P-1, in rad/s."""
    return cfg.doppler_on_grid(np.arange(cfg.pulses_P))


def doppler_focus(data: XampledData, cfg: RadarConfig | None = None) -> FocusedMatrix:
    cfg = cfg or data.cfg_ref
    if cfg is None:
        raise ValueError("a radar config is needed to normalise by H[k]")
    P, tau = data.P, cfg.pri_tau
    k = data.kappa.indices_kappa
    H = cfg.pulse_spectrum_H[k]
    floor = H_FLOOR_REL * np.max(np.abs(cfg.pulse_spectrum_H))
    weak = np.flatnonzero(np.abs(H) < floor)
    if weak.size:
        raise ValueError(f"pulse spectrum below floor at kappa index {int(k[weak[0]])}")
    # sum_p c_p e^{j nu_u p tau} with nu_u p tau = -pi p + 2 pi u p / P
    alt = np.where(np.arange(P) % 2, -1.0, 1.0)
    summed = np.fft.ifft(data.coeffs * alt, axis=1) * P
    psi = summed * (tau / (P * H))[:, None]
    return FocusedMatrix(psi, focus_grid(cfg.replace(pulses_P=P)), data.kappa, cfg)


def focusing_gain(nu, nu_l: float, P: int, tau: float) -> np.ndarray:
    """|sum_p exp(j (nu - nu_l) p tau)|."""
    nu = np.atleast_1d(np.asarray(nu, dtype=float))
    p = np.arange(P)
    return np.abs(np.exp(1j * np.outer(nu - nu_l, p) * tau).sum(axis=1))


def focused_noise_var(cfg: RadarConfig, sigma_n2: float, kappa=None) -> float:
    """Mean noise variance of a focused entry, tau sigma_n^2 / (P |H[k]|^2)."""
    k = np.arange(cfg.nyquist_bins_N) if kappa is None else \
        np.asarray(getattr(kappa, "indices_kappa", kappa))
    H2 = np.abs(cfg.pulse_spectrum_H[k]) ** 2
    return float(np.mean(cfg.pri_tau * sigma_n2 / (cfg.pulses_P * H2)))


def glrt_threshold(PT: float, sigma2: float, FR_measure: float, N: int,
                   Pfa: float) -> float:
    """Per-test threshold giving family-wise false-alarm ``Pfa`` over N tests.

    The tail law is chi-square with two degrees of freedom and
    noncentrality rho = PT / (sigma2 |F_R|).
    """
    if not 0 < Pfa < 1:
        raise ValueError("Pfa must lie strictly between 0 and 1")
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive")
    if N < 1 or FR_measure <= 0:
        raise ValueError("N and |F_R| must be positive")
    q = -np.expm1(np.log1p(-Pfa) / N)      # 1 - (1 - Pfa)^(1/N)
    rho = PT / (sigma2 * FR_measure)
    if rho == 0:
        return float(-2.0 * np.log(q))
    return float(stats.ncx2.isf(q, 2, rho))


def omp_delay_doppler(psi: FocusedMatrix, gamma: float, sigma2: float,
                      max_iter: int | None = None, L_expected: int = 0) -> RecoveryResult:
    """Greedy delay-Doppler recovery from a focused matrix.

    Atoms are columns of F_kappa placed in a single Doppler column; the
    gate statistic is |f^H r|^2 / (sigma2 ||f||^2).  Amplitudes are refit
    jointly by least squares after each selection.
    """
    cfg = psi.cfg
    N = cfg.nyquist_bins_N
    if max_iter is None:
        max_iter = 2 * L_expected + 5
    F = partial_fourier(psi.kappa, N)
    res = kron_omp(psi.psi, F, None, max_iter=max_iter, gamma=gamma, sigma2=sigma2)
    return annotate_temporal(res, cfg, psi.focus_grid)


def annotate_temporal(res: RecoveryResult, cfg: RadarConfig,
                      grid: np.ndarray | None = None) -> RecoveryResult:
    """Fill delay (s) and Doppler (rad/s) estimates from grid indices."""
    grid = focus_grid(cfg) if grid is None else grid
    r = np.array([s[0] for s in res.support], dtype=int)
    u = np.array([s[1] for s in res.support], dtype=int)
    res.delays = cfg.delay_cell * r
    res.dopplers = grid[u] if u.size else np.zeros(0)
    return res


def recover_temporal(data: XampledData, sigma_n2: float = 0.0, Pfa: float = 1e-6,
                     max_iter: int | None = None, L_expected: int = 0) -> RecoveryResult:
    """Focus then recover; noiseless data uses a zero gate and a residual stop."""
    cfg = data.cfg_ref
    fm = doppler_focus(data)
    if sigma_n2 > 0:
        s2 = focused_noise_var(cfg, sigma_n2, data.kappa)
        FR = data.K / cfg.pri_tau
        gamma = glrt_threshold(cfg.total_power_PT, sigma_n2, FR,
                               cfg.nyquist_bins_N * data.P, Pfa)
    else:
        s2, gamma = 1.0, 0.0
    return omp_delay_doppler(fm, gamma, s2, max_iter, L_expected)
