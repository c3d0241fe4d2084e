"""Reference solvers: exhaustive sparse search and the Nyquist-rate chain."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, islice
from math import comb

import numpy as np

from .scene import RadarConfig, TargetScene, synthesize_fourier

MAX_COMBINATIONS = 10**6


class BudgetExceeded(ValueError):
    pass


@dataclass
class SparseSolution:
    support: tuple[int, ...]
    coeffs: np.ndarray
    residual: float


def brute_force_sparse(y: np.ndarray, dictionary_op: np.ndarray, L: int,
                       max_combinations: int = MAX_COMBINATIONS, chunk: int = 4096,
                       tie_rtol: float = 1e-9) -> SparseSolution:
    """Exhaustive least squares over every L-column support of the dictionary.

    ``y`` may be a vector or a matrix of jointly sparse columns.  Supports
    are visited in lexicographic order and a later support replaces the
    incumbent only when its residual is smaller by more than
    ``tie_rtol * ||y||^2``, so ties resolve to the lexicographically first.
    """
    A = np.asarray(dictionary_op, dtype=complex)
    Y = np.asarray(y, dtype=complex)
    if Y.ndim == 1:
        Y = Y[:, None]
    n_atoms = A.shape[1]
    if A.shape[0] != Y.shape[0]:
        raise ValueError("dictionary rows must match the measurement length")
    if not 1 <= L <= n_atoms:
        raise ValueError(f"need 1 <= L <= {n_atoms}")
    total = comb(n_atoms, L)
    if total > max_combinations:
        raise BudgetExceeded(f"{total} supports exceed the budget of {max_combinations}")

    G = A.conj().T @ A
    B = A.conj().T @ Y
    energy = float(np.sum(np.abs(Y) ** 2))
    tol = tie_rtol * max(energy, 1e-300)
    best_r, best_s = np.inf, None
    it = combinations(range(n_atoms), L)
    while True:
        block = np.array(list(islice(it, chunk)), dtype=int)
        if block.size == 0:
            break
        Gs = G[block[:, :, None], block[:, None, :]]
        Bs = B[block]
        try:
            X = np.linalg.solve(Gs, Bs)
            res = energy - np.real(np.einsum("cij,cij->c", Bs.conj(), X))
            res[~np.isfinite(res)] = np.inf
        except np.linalg.LinAlgError:
            res = np.array([_residual_lstsq(A, Y, s) for s in block])
        i = int(np.argmin(res))
        if res[i] < best_r - tol:
            best_r, best_s = float(res[i]), tuple(int(v) for v in block[i])
    coeffs = np.linalg.lstsq(A[:, best_s], Y, rcond=None)[0]
    if np.asarray(y).ndim == 1:
        coeffs = coeffs[:, 0]
    return SparseSolution(best_s, coeffs, max(best_r, 0.0))


def _residual_lstsq(A, Y, s):
    x = np.linalg.lstsq(A[:, s], Y, rcond=None)[0]
    return float(np.sum(np.abs(Y - A[:, s] @ x) ** 2))


@dataclass
class NyquistMap:
    power: np.ndarray           # N x P, |map|^2
    noise_power: float          # mean |map|^2 per cell under noise only
    detections: list[tuple[int, int]]


def nyquist_reference(cfg: RadarConfig, scene: TargetScene, seed: int = 0,
                      Pfa: float = 1e-6, n_peaks: int | None = None,
                      local_max: bool = False) -> NyquistMap:
    """Matched filter on every pulse, slow-time DFT, threshold detection.

    Cells are reported when their power exceeds the noise level times
    -ln(Pfa / (N P)); noiseless scenes use a threshold of 1e-6 of the
    strongest cell.  ``local_max`` additionally requires a circular 3x3
    local maximum, which suppresses sidelobes of off-grid targets but also
    merges targets in adjacent cells.  ``n_peaks`` keeps at most that many
    strongest detections.
    """
    N, P, tau = cfg.nyquist_bins_N, cfg.pulses_P, cfg.pri_tau
    data = synthesize_fourier(cfg, scene, np.arange(N), seed)
    H = cfg.pulse_spectrum_H
    x = np.fft.ifft(data.coeffs * H.conj()[:, None], axis=0)        # delay x pulse
    alt = np.where(np.arange(P) % 2, -1.0, 1.0)
    m = np.fft.ifft(x * alt, axis=1) * P                              # Doppler bins -pi/tau + 2 pi u/(P tau)
    power = np.abs(m) ** 2
    s2 = scene.noise_var_sigma_n2
    noise = float(np.sum(np.abs(H) ** 2) * s2 * P / (N**2 * tau))
    if s2 > 0:
        thr = noise * -np.log(Pfa / (N * P))
    else:
        thr = 1e-6 * power.max() if power.max() > 0 else np.inf
    peak = np.ones_like(power, dtype=bool)
    for dr in (-1, 0, 1) if local_max else ():
        for du in (-1, 0, 1):
            if dr or du:
                peak &= power >= np.roll(np.roll(power, dr, 0), du, 1)
    cells = np.argwhere(peak & (power > thr))
    order = np.argsort(-power[cells[:, 0], cells[:, 1]], kind="stable")
    dets = [(int(r), int(u)) for r, u in cells[order]]
    if n_peaks is not None:
        dets = dets[:n_peaks]
    return NyquistMap(power, noise, dets)
