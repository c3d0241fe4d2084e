"""Extended Ziv-Zakai delay bounds for wideband and multiband radars."""

from __future__ import annotations

import numpy as np
from scipy.special import gamma as gamma_fn
from scipy.special import gammainc
from scipy.stats import norm


def lower_gamma(a: float, x):
    """Unnormalised lower incomplete gamma, int_0^x t^(a-1) e^-t dt."""
    return gammainc(a, x) * gamma_fn(a)


def uniform_prior_var(tau: float) -> float:
    return tau**2 / 12.0


def rms_bandwidth_sq(bands) -> float:
    """Second moment about zero of a flat spectrum over (lo, hi) bands."""
    num = sum((hi**3 - lo**3) / 3 for lo, hi in bands)
    den = sum(hi - lo for lo, hi in bands)
    return num / den


def band_moment_sq(centre: float, width: float) -> float:
    """f_i^2 + B_i^2 / 12 for a flat band."""
    return centre**2 + width**2 / 12.0


def ezb_wideband(snr, F_rms_sq: float, prior_var: float):
    snr = np.asarray(snr, dtype=float)
    if np.any(snr <= 0) or F_rms_sq <= 0:
        raise ValueError("SNR and rms bandwidth must be positive")
    return prior_var * 2 * norm.sf(np.sqrt(snr / 2)) + lower_gamma(1.5, snr / 4) / (snr * F_rms_sq)


def ezb_multiband(snr_total, subbands, prior_var: float):
    """subbands: iterable of (SNR_i, F_i^2); SNR_i may be arrays over a sweep."""
    snr_total = np.asarray(snr_total, dtype=float)
    if np.any(snr_total <= 0):
        raise ValueError("SNR must be positive")
    denom = 0.0
    for snr_i, f2 in subbands:
        if np.any(np.asarray(snr_i) <= 0) or f2 <= 0:
            raise ValueError("subband SNR and rms bandwidth must be positive")
        denom = denom + np.asarray(snr_i, dtype=float) * f2
    return (prior_var * 2 * norm.sf(np.sqrt(snr_total / 2))
            + lower_gamma(1.5, snr_total / 4) / denom)


def ezb(snr_total, subbands, prior_var: float, F_rms_sq: float, snr_wideband=None):
    """(EZB_R, EZB_CRr) pair.

    ``snr_wideband`` is the conventional radar's SNR (defaults to
    ``snr_total``); ``F_rms_sq`` is its squared rms bandwidth.
    """
    snr_w = snr_total if snr_wideband is None else snr_wideband
    return ezb_wideband(snr_w, F_rms_sq, prior_var), ezb_multiband(snr_total, subbands, prior_var)


def equal_power_subbands(snr_wideband, bands, Bh: float):
    """Concentrate the wideband power into ``bands``.

    Returns (SNR~, [(SNR_i, F_i^2)]) with SNR~ = SNR / (sum B_i / B_h) and
    SNR_i = SNR~ B_i / sum B_i.
    """
    widths = np.array([hi - lo for lo, hi in bands])
    frac = widths.sum() / Bh
    snr_t = np.asarray(snr_wideband, dtype=float) / frac
    sub = [(snr_t * b / widths.sum(), band_moment_sq((lo + hi) / 2, b))
           for (lo, hi), b in zip(bands, widths)]
    return snr_t, sub
