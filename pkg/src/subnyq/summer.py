"""Sub-Nyquist collocated MIMO radar with thinned arrays.

Array positions are in wavelengths and the steering phase of transmitter m
and receiver q is beta_mq = xi_m + zeta_q.  Grids: delay tau s/(TN),
sine-azimuth -1 + 2r/(TR), Doppler -1/(2 tau) + u/(P tau) in Hz.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .metrics import MatchReport, match_detections  # noqa: F401  (re-export)
from .pursuit import kron_omp
from .results import RecoveryResult
from .scene import RadarConfig, Target, TargetScene, rng_stream


@dataclass(frozen=True)
class ArrayGeometry:
    tx_positions: tuple[float, ...]
    rx_positions: tuple[float, ...]
    virtual_T: int
    virtual_R: int

    def __post_init__(self):
        object.__setattr__(self, "tx_positions", tuple(float(x) for x in self.tx_positions))
        object.__setattr__(self, "rx_positions", tuple(float(x) for x in self.rx_positions))
        if self.M > self.virtual_T or self.Q > self.virtual_R:
            raise ValueError("more elements than the virtual array allows")
        Z = self.aperture
        for x in self.tx_positions + self.rx_positions:
            if not -1e-9 <= x <= Z + 1e-9:
                raise ValueError(f"element at {x} outside the aperture [0, {Z}]")

    @property
    def M(self) -> int:
        return len(self.tx_positions)

    @property
    def Q(self) -> int:
        return len(self.rx_positions)

    @property
    def aperture(self) -> float:
        return self.virtual_T * self.virtual_R / 2

    def beta(self) -> np.ndarray:
        """M x Q matrix xi_m + zeta_q."""
        return np.add.outer(np.asarray(self.tx_positions), np.asarray(self.rx_positions))


def ula_geometry(T: int, R: int) -> ArrayGeometry:
    """Classic virtual ULA: receivers at q/2, transmitters at m R/2."""
    return ArrayGeometry(tuple(m * R / 2 for m in range(T)), tuple(q / 2 for q in range(R)), T, R)


def random_geometry(M: int, Q: int, T: int, R: int, seed: int = 0) -> ArrayGeometry:
    """M transmitters and Q receivers uniformly at random over the aperture TR/2."""
    rng = rng_stream(seed, 51)
    Z = T * R / 2
    tx = np.sort(rng.uniform(0, Z, M))
    rx = np.sort(rng.uniform(0, Z, Q))
    return ArrayGeometry(tuple(tx), tuple(rx), T, R)


@dataclass(frozen=True)
class MimoConfig:
    cfg: RadarConfig
    geometry: ArrayGeometry
    carrier_index: tuple[int, ...]
    K: int
    kappa: tuple[int, ...]

    def __post_init__(self):
        g = self.geometry
        if len(self.carrier_index) != g.M:
            raise ValueError("need one carrier per transmitter")
        if len(set(self.carrier_index)) != g.M:
            raise ValueError("FDM carriers must be distinct")
        N = self.cfg.nyquist_bins_N
        if self.K > N or len(self.kappa) != self.K:
            raise ValueError("need K = |kappa| <= N")
        if min(self.kappa) < -(N // 2) or max(self.kappa) > N - N // 2 - 1:
            raise ValueError("kappa must lie in [-N/2, N/2 - 1]")

    @property
    def per_tx_carriers_fm(self) -> np.ndarray:
        """Baseband carrier of each transmitter, f_m = c_m B_h."""
        return np.asarray(self.carrier_index) * self.cfg.bandwidth_Bh

    @property
    def T(self) -> int:
        return self.geometry.virtual_T

    @property
    def R(self) -> int:
        return self.geometry.virtual_R

    @property
    def TN(self) -> int:
        return self.T * self.cfg.nyquist_bins_N

    @property
    def TR(self) -> int:
        return self.T * self.R

    def delay_grid(self) -> np.ndarray:
        return self.cfg.pri_tau * np.arange(self.TN) / self.TN

    def azimuth_grid(self) -> np.ndarray:
        return -1 + 2 * np.arange(self.TR) / self.TR

    def doppler_grid(self) -> np.ndarray:
        tau, P = self.cfg.pri_tau, self.cfg.pulses_P
        return -1 / (2 * tau) + np.arange(P) / (P * tau)


def make_mimo(cfg: RadarConfig, geometry: ArrayGeometry, K: int, seed: int = 0,
              carriers: str = "random") -> MimoConfig:
    """Draw kappa (K of the N centred indices) and the FDM carrier indices.

    Index sets whose pairwise differences share a common factor alias the
    delay grid and are redrawn.
    """
    rng = rng_stream(seed, 52)
    N = cfg.nyquist_bins_N
    for _ in range(1000):
        kap = np.sort(rng.choice(N, size=K, replace=False)) - N // 2
        if K == 1 or np.gcd.reduce(np.diff(kap)) == 1:
            break
    else:
        raise RuntimeError("no alias-free kappa found")
    if carriers == "ordered":
        c = tuple(range(geometry.M))
    else:
        c = tuple(int(x) for x in rng.choice(geometry.virtual_T, size=geometry.M, replace=False))
    return MimoConfig(cfg, geometry, c, K, tuple(int(k) for k in kap))


MODES = {
    1: dict(M=8, Q=10, T=8, R=10, layout="ula"),
    2: dict(M=8, Q=10, T=8, R=10, layout="random"),
    3: dict(M=4, Q=5, T=8, R=10, layout="random"),
    4: dict(M=8, Q=10, T=20, R=20, layout="random"),
}


def mode_geometry(mode: int, seed: int = 0) -> ArrayGeometry:
    """Named array presets (1: 8x10 ULA; 2: 8x10 random; 3: 4x5 random; 4: 8x10 over 20x20)."""
    p = MODES[mode]
    if p["layout"] == "ula":
        return ula_geometry(p["T"], p["R"])
    return random_geometry(p["M"], p["Q"], p["T"], p["R"], seed)


def _sine_azimuth(t: Target) -> float:
    v = float(np.sin(t.azimuth_theta_l))
    if not -np.pi / 2 <= t.azimuth_theta_l < np.pi / 2:
        raise ValueError(f"azimuth {t.azimuth_theta_l} outside [-pi/2, pi/2)")
    return v


def synthesize_mimo(cfgM: MimoConfig, scene: TargetScene, seed: int = 0) -> np.ndarray:
    """Normalised channel coefficients y[m, q, p, k].

    Dopplers are taken from ``Target.doppler_nu_l`` (rad/s) and converted to
    Hz; noise is complex white with variance ``scene.noise_var_sigma_n2``.
    """
    cfg, g = cfgM.cfg, cfgM.geometry
    tau, P = cfg.pri_tau, cfg.pulses_P
    kap = np.asarray(cfgM.kappa)
    fm = cfgM.per_tx_carriers_fm
    beta = g.beta()
    y = np.zeros((g.M, g.Q, P, cfgM.K), dtype=complex)
    p = np.arange(P)
    for t in scene.targets:
        th = _sine_azimuth(t)
        fd = t.doppler_nu_l / (2 * np.pi)
        sp = np.exp(2j * np.pi * beta * th)                                  # M x Q
        dl = np.exp(-2j * np.pi * np.add.outer(fm * tau, kap) * t.delay_tau_l / tau)  # M x K
        dp = np.exp(2j * np.pi * fd * p * tau)                                # P
        y += t.amplitude_alpha_l * (sp[:, :, None, None] * dp[None, None, :, None]
                                    * dl[:, None, None, :])
    s2 = scene.noise_var_sigma_n2
    if s2 > 0:
        rng = rng_stream(seed, 1)
        y += np.sqrt(s2 / 2) * (rng.standard_normal(y.shape) + 1j * rng.standard_normal(y.shape))
    return y


def build_dictionaries(cfgM: MimoConfig):
    """Per-transmitter range (K x TN) and azimuth (Q x TR) dictionaries."""
    g = cfgM.geometry
    kap = np.asarray(cfgM.kappa)
    n = np.arange(cfgM.TN)
    c = np.asarray(cfgM.carrier_index)
    grid = cfgM.azimuth_grid()
    A, B = [], []
    for m in range(g.M):
        A.append(np.exp(-2j * np.pi * np.outer(kap, n) / cfgM.TN)
                 * np.exp(-2j * np.pi * c[m] * n / cfgM.T)[None, :])
        beta_m = g.beta()[m]
        B.append(np.exp(-2j * np.pi * np.outer(beta_m, grid)))
    return A, B


def stacked_dictionary(cfgM: MimoConfig) -> np.ndarray:
    """Rows (m, q, k), columns r TN + s: conj(B^m)[q, r] A^m[k, s]."""
    A, B = build_dictionaries(cfgM)
    blocks = [np.kron(Bm.conj(), Am) for Am, Bm in zip(A, B)]
    return np.concatenate(blocks, axis=0)


def doppler_steering(cfgM: MimoConfig) -> np.ndarray:
    """D2[u, p] = exp(j 2 pi f_u p tau)."""
    tau, P = cfgM.cfg.pri_tau, cfgM.cfg.pulses_P
    return np.exp(2j * np.pi * np.outer(cfgM.doppler_grid(), np.arange(P)) * tau)


def measurement_matrix(y: np.ndarray) -> np.ndarray:
    """Stack y[m, q, p, k] into rows (m, q, k) by columns p."""
    M, Q, P, K = y.shape
    return np.transpose(y, (0, 1, 3, 2)).reshape(M * Q * K, P)


def omp3d(y: np.ndarray, cfgM: MimoConfig, L_max: int, gamma: float = 0.0,
          sigma2: float = 1.0, D1: np.ndarray | None = None) -> RecoveryResult:
    """Joint range-azimuth-Doppler OMP.  Support entries are (s, r, u)."""
    if D1 is None:
        D1 = stacked_dictionary(cfgM)
    Y = measurement_matrix(y)
    res = kron_omp(Y, D1, doppler_steering(cfgM), max_iter=L_max, gamma=gamma, sigma2=sigma2)
    TN = cfgM.TN
    triples = [(i % TN, i // TN, u) for i, u in res.support]
    res.support = triples
    s = np.array([t[0] for t in triples], dtype=int)
    r = np.array([t[1] for t in triples], dtype=int)
    u = np.array([t[2] for t in triples], dtype=int)
    res.delays = cfgM.cfg.pri_tau * s / TN
    res.azimuths = -1 + 2 * r / cfgM.TR
    res.dopplers = cfgM.doppler_grid()[u] if u.size else np.zeros(0)
    return res


def grid_target(cfgM: MimoConfig, s: int, r: int, u: int, alpha: complex = 1.0) -> Target:
    """Target on the (delay, sine-azimuth, Doppler) grid."""
    tau = cfgM.cfg.pri_tau
    theta = float(np.arcsin(-1 + 2 * r / cfgM.TR))
    fd = cfgM.doppler_grid()[u]
    return Target(tau * s / cfgM.TN, 2 * np.pi * fd, alpha, theta)


def random_grid_scene(cfgM: MimoConfig, L: int, rng: np.random.Generator,
                      noise_var: float = 0.0, min_az_sep: int = 0):
    """L distinct on-grid targets; returns (scene, truth [(s, r, u)])."""
    cells: list[tuple[int, int, int]] = []
    while len(cells) < L:
        c = (int(rng.integers(cfgM.TN)), int(rng.integers(cfgM.TR)),
             int(rng.integers(cfgM.cfg.pulses_P)))
        if c in cells or any(abs(c[1] - o[1]) < min_az_sep for o in cells):
            continue
        cells.append(c)
    targets = tuple(grid_target(cfgM, *c, np.exp(1j * rng.uniform(0, 2 * np.pi))
                                * rng.uniform(0.5, 1.0)) for c in cells)
    return TargetScene(targets, noise_var_sigma_n2=noise_var), cells
