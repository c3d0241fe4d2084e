"""Modulated wideband converter: sensing matrix, CTF frame and support recovery.

Slices are indexed by column n = 0..N-1; column n holds X(f + l_n f_p) for
f in [-f_s/2, f_s/2] with l_n = n + 1 - ceil(N/2).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ..scene import rng_stream

EIG_REL_TOL = 1e-6


@dataclass(frozen=True)
class MWCConfig:
    channels_M: int
    period_fp: float
    sample_rate_fs: float
    nyquist_fNyq: float
    seed: int = 0
    expansion_q: int = 1

    def __post_init__(self):
        if self.sample_rate_fs < self.period_fp:
            raise ValueError("f_s must be at least f_p")
        if self.channels_M < 1 or self.expansion_q < 1:
            raise ValueError("need at least one channel")

    @property
    def slices_N(self) -> int:
        return int(2 * np.ceil((self.nyquist_fNyq + self.sample_rate_fs) / (2 * self.period_fp)))

    @property
    def virtual_channels(self) -> int:
        return self.channels_M * self.expansion_q

    @property
    def total_rate(self) -> float:
        return self.channels_M * self.sample_rate_fs

    @property
    def rate_fraction(self) -> float:
        return self.total_rate / self.nyquist_fNyq

    @property
    def half(self) -> int:
        return int(np.ceil(self.slices_N / 2))

    def harmonic(self, n) -> np.ndarray:
        """Harmonic index l of slice column n."""
        return np.asarray(n) + 1 - self.half

    def slice_centre(self, n) -> np.ndarray:
        return self.harmonic(n) * self.period_fp

    @cached_property
    def chips(self) -> np.ndarray:
        """Seeded +-1 mixing sequences, M x (chips per period)."""
        rng = rng_stream(self.seed, 21)
        L = self.slices_N * self.expansion_q + 1
        return rng.choice([-1.0, 1.0], size=(self.channels_M, L))

    def mixing_coeffs(self, l) -> np.ndarray:
        """Fourier series coefficients c_{i,l} of the piecewise-constant sequences."""
        l = np.atleast_1d(np.asarray(l))
        s = self.chips
        Lc = s.shape[1]
        n = np.arange(Lc)
        dft = s @ np.exp(-2j * np.pi * np.outer(n, l) / Lc) / Lc
        # rectangular chip shape
        shape = np.exp(-1j * np.pi * l / Lc) * np.sinc(l / Lc)
        return dft * shape

    @cached_property
    def sensing_matrix(self) -> np.ndarray:
        """A[i, n] = c_{i, -l_n}; with expansion, virtual rows c_{i, -(l_n + j)}."""
        l = self.harmonic(np.arange(self.slices_N))
        q = self.expansion_q
        shifts = np.arange(q) - (q - 1) // 2
        rows = [self.mixing_coeffs(-(l + j)) for j in shifts]
        A = np.stack(rows, axis=1).reshape(self.channels_M * q, self.slices_N)
        return A


def mwc_sample(signal_slices: np.ndarray, cfg: MWCConfig) -> np.ndarray:
    """z(f) = A x(f) for every processed frequency bin."""
    x = np.asarray(signal_slices, dtype=complex)
    if x.ndim != 2 or x.shape[0] != cfg.slices_N:
        raise ValueError(f"expected {cfg.slices_N} slices, got shape {x.shape}")
    return cfg.sensing_matrix @ x


def slice_signal(spectrum, cfg: MWCConfig, n_bins: int = 64) -> np.ndarray:
    """Sample a spectrum callable X(f) on the slice grid (N x n_bins)."""
    f = (np.arange(n_bins) + 0.5) / n_bins * cfg.sample_rate_fs - cfg.sample_rate_fs / 2
    centres = cfg.slice_centre(np.arange(cfg.slices_N))
    return spectrum(centres[:, None] + f[None, :])


def multiband_spectrum(bands, rng: np.random.Generator, n_terms: int = 4,
                       power: float = 1.0):
    """Random smooth complex spectrum supported on the given (lo, hi) bands.

    Each band carries a sum of ``n_terms`` random complex exponentials in f,
    so a band spanning several slices contributes full rank to the frame.
    """
    params = []
    for lo, hi in bands:
        amps = np.sqrt(power / 2) * (rng.standard_normal(n_terms)
                                     + 1j * rng.standard_normal(n_terms))
        rates = rng.uniform(-3, 3, n_terms) / max(hi - lo, 1e-30)
        params.append((lo, hi, amps, rates))

    def X(f):
        f = np.asarray(f, dtype=float)
        out = np.zeros(f.shape, dtype=complex)
        for lo, hi, amps, rates in params:
            inside = (f >= lo) & (f <= hi)
            ph = np.exp(2j * np.pi * f[..., None] * rates)
            out += inside * (ph @ amps)
        return out

    return X


def ctf_frame(z_samples: np.ndarray, rel_tol: float = EIG_REL_TOL) -> np.ndarray:
    """Frame V with V V^H = Q = sum_f z(f) z(f)^H, keeping significant eigenvalues."""
    z = np.asarray(z_samples, dtype=complex)
    Q = z @ z.conj().T
    lam, U = np.linalg.eigh(Q)
    if lam.max() <= 0:
        raise ValueError("empty frame: all-zero measurements")
    keep = lam >= rel_tol * lam.max()
    return U[:, keep] * np.sqrt(lam[keep])


def radar_slice_support(FR_bands, cfg: MWCConfig, two_sided: bool = False) -> list[int]:
    """Slice columns touched by the radar bands.

    Column n is included when |(n+1) - f_c/f_p - ceil(N/2)| < (f_s + B)/(2 f_p)
    for some band with centre f_c and width B.  ``two_sided`` adds the
    mirror image -f_c of every band (real-valued transmissions).
    """
    N, half = cfg.slices_N, cfg.half
    S = set()
    for lo, hi in FR_bands:
        if lo < -cfg.nyquist_fNyq / 2 - 1e-9 or hi > cfg.nyquist_fNyq / 2 + 1e-9 or hi <= lo:
            raise ValueError(f"band ({lo}, {hi}) outside the Nyquist range")
        fc, B = (lo + hi) / 2, hi - lo
        centres = [fc, -fc] if two_sided else [fc]
        for c in centres:
            n = np.arange(1, N + 1)
            hit = np.abs(n - c / cfg.period_fp - half) < (cfg.sample_rate_fs + B) / (2 * cfg.period_fp)
            S.update((n[hit] - 1).tolist())
    return sorted(S)


def _refit(A, V, support):
    As = A[:, support]
    U = np.linalg.lstsq(As, V, rcond=None)[0]
    return U, V - As @ U


def _rank_aware_score(A, R, support, tol):
    """Correlation of each column, projected off the current support, with the
    orthonormalised residual span (rank-aware order-recursive selection)."""
    u, sv, _ = np.linalg.svd(R, full_matrices=False)
    U = u[:, sv > max(tol, 1e-12 * sv[0])]
    Ap = A
    if support:
        Q_s = np.linalg.qr(A[:, support])[0]
        Ap = A - Q_s @ (Q_s.conj().T @ A)
    norms = np.linalg.norm(Ap, axis=0)
    ok = norms > 1e-10 * np.linalg.norm(A, axis=0).max()
    score = np.zeros(A.shape[1])
    score[ok] = np.linalg.norm(U.conj().T @ Ap[:, ok], axis=0) / norms[ok]
    return score


def support_recover_known(V: np.ndarray, A: np.ndarray, S_R, max_support: int | None = None,
                          rtol: float = 1e-8) -> list[int]:
    """Greedy MMV recovery of V = A U, started from the known support S_R.

    Returns the communication support S_C (disjoint from S_R).  Iterations
    stop when the residual falls below ``rtol`` times the frame norm.
    """
    V = np.asarray(V, dtype=complex)
    M, N = A.shape
    support = [int(s) for s in S_R]
    if len(support) >= M:
        raise ValueError("known support must be smaller than the channel count")
    cap = M - 1 if max_support is None else min(max_support, M - 1)
    v_norm = np.linalg.norm(V)
    R = V if not support else _refit(A, V, support)[1]
    last = np.linalg.norm(R)
    while last > rtol * v_norm:
        if len(support) >= cap:
            raise RuntimeError(f"support exceeded {cap} slices before the residual vanished")
        score = _rank_aware_score(A, R, support, rtol * v_norm)
        score[support] = -1.0
        support.append(int(np.argmax(score)))
        _, R = _refit(A, V, support)
        now = np.linalg.norm(R)
        if now >= last * (1 - 1e-12):
            raise RuntimeError("residual did not decrease")
        last = now
    known = set(int(s) for s in S_R)
    return sorted(s for s in support if s not in known)


def reconstruct_slices(z: np.ndarray, A: np.ndarray, support) -> np.ndarray:
    """x_S = pinv(A_S) z, zero outside the support."""
    support = sorted(int(s) for s in support)
    x = np.zeros((A.shape[1], z.shape[1]), dtype=complex)
    if support:
        x[support] = np.linalg.pinv(A[:, support]) @ z
    return x


def slices_to_bands(S_C, cfg: MWCConfig) -> list[tuple[float, float]]:
    """Occupied communication bands: union of |f - l_n f_p| <= f_p/2 over S_C."""
    edges = sorted((c - cfg.period_fp / 2, c + cfg.period_fp / 2)
                   for c in cfg.slice_centre(np.asarray(sorted(S_C), dtype=int)))
    merged: list[list[float]] = []
    for lo, hi in edges:
        if merged and lo <= merged[-1][1] + 1e-9 * cfg.period_fp:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return [(float(a), float(b)) for a, b in merged]
