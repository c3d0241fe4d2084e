"""Sub-Nyquist Fourier-coefficient acquisition.

Three index-set schemes are supported (direct random tones, the lowest K
tones, and M disjoint runs of consecutive tones).  The analog front end is
modelled ideally: a Xampler returns exactly the DFT coefficients in kappa.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .scene import RadarConfig, rng_stream

SCHEMES = ("direct", "lowpass", "multiband")
_MAGIC = b"SNYQ"
_VERSION = 1


@dataclass(frozen=True)
class FrequencyIndexSet:
    indices_kappa: np.ndarray
    scheme: str = "direct"
    group_count_M_bands: int = 1
    N: int | None = None

    def __post_init__(self):
        idx = np.unique(np.asarray(self.indices_kappa, dtype=int))
        if len(idx) != len(np.asarray(self.indices_kappa)):
            raise ValueError("kappa indices must be unique")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if idx.size and idx.min() < 0:
            raise ValueError("kappa indices must be nonnegative")
        if self.N is not None and idx.size and idx.max() >= self.N:
            raise ValueError(f"kappa index {idx.max()} outside [0, {self.N - 1}]")
        object.__setattr__(self, "indices_kappa", idx)

    @property
    def K(self) -> int:
        return len(self.indices_kappa)

    def runs(self) -> list[tuple[int, int]]:
        """Maximal runs of consecutive indices as (start, length)."""
        idx = self.indices_kappa
        if idx.size == 0:
            return []
        breaks = np.flatnonzero(np.diff(idx) != 1) + 1
        return [(int(g[0]), len(g)) for g in np.split(idx, breaks)]

    def subset(self, other: "FrequencyIndexSet") -> np.ndarray:
        """Row positions of ``other``'s indices inside this set."""
        pos = np.searchsorted(self.indices_kappa, other.indices_kappa)
        if np.any(pos >= self.K) or np.any(self.indices_kappa[np.minimum(pos, self.K - 1)]
                                           != other.indices_kappa):
            raise ValueError("not a subset")
        return pos


@dataclass
class XampledData:
    coeffs: np.ndarray
    kappa: FrequencyIndexSet
    cfg_ref: RadarConfig | None = None

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.ndim != 2 or self.coeffs.shape[0] != self.kappa.K:
            raise ValueError("coefficient matrix must be K x P with K = |kappa|")

    @property
    def K(self) -> int:
        return self.coeffs.shape[0]

    @property
    def P(self) -> int:
        return self.coeffs.shape[1]

    def restrict(self, sub: FrequencyIndexSet) -> "XampledData":
        return XampledData(self.coeffs[self.kappa.subset(sub)], sub, self.cfg_ref)


def partial_fourier(kappa, N: int) -> np.ndarray:
    """Rows of the N-point DFT matrix, F[i, n] = exp(-j 2 pi kappa_i n / N)."""
    k = np.asarray(getattr(kappa, "indices_kappa", kappa))
    return np.exp(-2j * np.pi * np.outer(k, np.arange(N)) / N)


def mutual_coherence(D: np.ndarray) -> float:
    """max_{i != j} |<d_i, d_j>| / (|d_i| |d_j|)."""
    Dn = D / np.linalg.norm(D, axis=0, keepdims=True)
    G = np.abs(Dn.conj().T @ Dn)
    np.fill_diagonal(G, 0.0)
    return float(G.max())


def select_kappa(cfg_or_N, K: int, scheme: str = "direct", rng_seed: int = 0,
                 M_bands: int = 4, candidates: int = 1) -> FrequencyIndexSet:
    """Choose K Fourier indices out of N.

    ``candidates > 1`` draws that many random sets and keeps the one with
    the lowest mutual coherence of the partial DFT (lowpass ignores it).
    """
    N = cfg_or_N.nyquist_bins_N if isinstance(cfg_or_N, RadarConfig) else int(cfg_or_N)
    if not 1 <= K <= N:
        raise ValueError(f"need 1 <= K <= N, got K={K}, N={N}")
    if scheme == "lowpass":
        return FrequencyIndexSet(np.arange(K), "lowpass", 1, N)
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    if scheme == "multiband" and (M_bands < 1 or K % M_bands):
        raise ValueError(f"M_bands={M_bands} must divide K={K}")

    rng = rng_stream(rng_seed, 7)
    best, best_mu = None, np.inf
    for _ in range(max(1, candidates)):
        if scheme == "direct":
            idx = np.sort(rng.choice(N, size=K, replace=False))
            ks = FrequencyIndexSet(idx, "direct", 1, N)
        else:
            ks = _multiband(N, K, M_bands, rng)
        if candidates <= 1:
            return ks
        mu = mutual_coherence(partial_fourier(ks, N))
        if mu < best_mu:
            best, best_mu = ks, mu
    return best


def _multiband(N: int, K: int, M: int, rng: np.random.Generator) -> FrequencyIndexSet:
    width = K // M
    for _ in range(100):
        starts = np.sort(rng.choice(N - width + 1, size=M, replace=False))
        if np.all(np.diff(starts) >= width):
            idx = (starts[:, None] + np.arange(width)).ravel()
            return FrequencyIndexSet(idx, "multiband", M, N)
    raise RuntimeError(f"could not place {M} disjoint runs of {width} in {N} bins")


def xample(time_frames: np.ndarray, kappa: FrequencyIndexSet,
           cfg: RadarConfig | None = None) -> XampledData:
    """Fourier coefficients of Nyquist-rate frames restricted to kappa.

    ``time_frames`` holds one aligned frame per row; coefficients follow the
    ``fft(frame) / n_samples`` normalisation used by ``synthesize_time``.
    """
    frames = np.atleast_2d(np.asarray(time_frames, dtype=complex))
    ns = frames.shape[1]
    N = kappa.N if kappa.N is not None else (cfg.nyquist_bins_N if cfg else ns)
    if cfg is not None:
        if cfg.nyquist_bins_N != N:
            raise ValueError("kappa grid size does not match config")
        if frames.shape[0] != cfg.pulses_P:
            raise ValueError(f"expected {cfg.pulses_P} frames, got {frames.shape[0]}")
    if ns < N:
        raise ValueError(f"frame length {ns} shorter than the Nyquist grid {N}")
    spec = np.fft.fft(frames, axis=1) / ns
    return XampledData(spec[:, kappa.indices_kappa].T, kappa, cfg)


def bin_frequencies(cfg: RadarConfig) -> np.ndarray:
    """Signed centre frequency (Hz) of each DFT bin k = 0..N-1."""
    N = cfg.nyquist_bins_N
    df = cfg.bandwidth_Bh / N
    k = np.arange(N)
    return ((k + N // 2) % N - N // 2 + 0.5) * df


def kappa_from_bands(bands, cfg: RadarConfig) -> FrequencyIndexSet:
    """Bins whose centre lies inside one of the (lo, hi) bands.

    Bin k holds frequency floor(f / B_h * N) mod N, so negative
    frequencies land in the upper half of 0..N-1.
    """
    f = bin_frequencies(cfg)
    mask = np.zeros(len(f), dtype=bool)
    for lo, hi in bands:
        mask |= (f >= lo) & (f < hi)
    return FrequencyIndexSet(np.flatnonzero(mask), "multiband", max(1, len(bands)),
                             cfg.nyquist_bins_N)


def fold_band(lo: float, hi: float, fs: float) -> list[tuple[float, float]]:
    """Image of [lo, hi] on the circle [0, fs) after sampling at fs."""
    if hi - lo >= fs:
        return [(0.0, fs)]
    a = lo % fs
    b = a + (hi - lo)
    if b <= fs:
        return [(a, b)]
    return [(a, fs), (0.0, b - fs)]


def check_coset_alias_free(band_edges, sub_rate_fs: float) -> bool:
    """True iff the bands stay pairwise disjoint after folding modulo fs.

    Exact duplicates are accepted and reported as aliased; partially
    overlapping input bands are rejected.
    """
    bands = [tuple(map(float, b)) for b in band_edges]
    for lo, hi in bands:
        if not hi > lo:
            raise ValueError(f"empty band ({lo}, {hi})")
    order = sorted(bands)
    for (lo1, hi1), (lo2, hi2) in zip(order, order[1:]):
        if (lo1, hi1) == (lo2, hi2):
            return False
        if lo2 < hi1:
            raise ValueError(f"input bands overlap: ({lo1}, {hi1}) and ({lo2}, {hi2})")
    images = [fold_band(lo, hi, sub_rate_fs) for lo, hi in bands]
    for i in range(len(images)):
        for lo, hi in bands[i:i + 1]:
            if hi - lo >= sub_rate_fs:
                return False
        for j in range(i + 1, len(images)):
            for a1, b1 in images[i]:
                for a2, b2 in images[j]:
                    if max(a1, a2) < min(b1, b2):
                        return False
    return True


# -- binary container -------------------------------------------------------

def save_xampled(path, data: XampledData) -> Path:
    """Write the binary container and a JSON sidecar (``<path>.json``).

    Layout: magic ``SNYQ``, u16 version, u32 N, u32 P, u32 K, u8 scheme id,
    u8 band count, then K little-endian int32 indices and K*P interleaved
    little-endian complex64 values in row-major (k, p) order.
    """
    path = Path(path)
    kap = data.kappa
    N = kap.N if kap.N is not None else (data.cfg_ref.nyquist_bins_N if data.cfg_ref else 0)
    head = struct.pack("<4sHIIIBB", _MAGIC, _VERSION, N, data.P, data.K,
                       SCHEMES.index(kap.scheme), kap.group_count_M_bands)
    body = kap.indices_kappa.astype("<i4").tobytes()
    body += data.coeffs.astype("<c8").tobytes(order="C")
    path.write_bytes(head + body)
    side = {"N": N, "P": data.P, "K": data.K, "scheme": kap.scheme,
            "M_bands": kap.group_count_M_bands, "kappa": kap.indices_kappa.tolist()}
    if data.cfg_ref is not None:
        c = data.cfg_ref
        side["cfg"] = {"pri_tau": c.pri_tau, "pulses_P": c.pulses_P,
                       "bandwidth_Bh": c.bandwidth_Bh, "carrier_fc": c.carrier_fc,
                       "total_power_PT": c.total_power_PT}
    Path(str(path) + ".json").write_text(json.dumps(side, indent=1))
    return path


def load_xampled(path) -> XampledData:
    raw = Path(path).read_bytes()
    hsize = struct.calcsize("<4sHIIIBB")
    magic, ver, N, P, K, sid, mb = struct.unpack("<4sHIIIBB", raw[:hsize])
    if magic != _MAGIC:
        raise ValueError("not a Xampled-data container")
    if ver != _VERSION:
        raise ValueError(f"unsupported container version {ver}")
    off = hsize
    idx = np.frombuffer(raw, "<i4", K, off).astype(int)
    off += 4 * K
    coeffs = np.frombuffer(raw, "<c8", K * P, off).reshape(K, P).astype(complex)
    cfg = None
    side = Path(str(path) + ".json")
    if side.exists():
        meta = json.loads(side.read_text())
        if "cfg" in meta:
            cfg = RadarConfig(**meta["cfg"])
    kap = FrequencyIndexSet(idx, SCHEMES[sid], mb, N or None)
    return XampledData(coeffs, kap, cfg)
