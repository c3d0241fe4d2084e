"""Radar configuration, target scenes and echo synthesis.

Echoes are produced either directly as Fourier-series coefficients of the
aligned pulse frames or as Nyquist-rate time samples.  Delays are in
seconds, Dopplers in rad/s and frequencies in Hz throughout.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

C_LIGHT = 3e8

# stream ids for the per-seed generator family
_STREAM_CLUTTER = 0
_STREAM_NOISE = 1
_STREAM_AUX = 2


def rng_stream(seed: int, stream: int) -> np.random.Generator:
    """Counter-based generator for one independent stream of ``seed``."""
    ss = np.random.SeedSequence([int(seed), int(stream)])
    return np.random.Generator(np.random.Philox(ss))


def flat_spectrum(n_bins: int, pri: float, total_power: float) -> np.ndarray:
    """Flat pulse spectrum with ``sum |H|^2 / tau == P_T``."""
    return np.full(n_bins, np.sqrt(total_power * pri / n_bins), dtype=complex)


def raised_cosine_spectrum(n_bins: int, pri: float, total_power: float,
                           rolloff: float = 0.25) -> np.ndarray:
    """Raised-cosine magnitude over the bin grid, centred on the band.

    The taper applies to the outer ``rolloff`` fraction of the band and the
    result is scaled to the same total power as :func:`flat_spectrum`.
    The edge bins keep a small nonzero floor so focusing never divides by 0.
    """
    if not 0.0 <= rolloff <= 1.0:
        raise ValueError("rolloff must lie in [0, 1]")
    k = np.arange(n_bins)
    # distance from band centre in units of half-bandwidth
    x = np.abs((k + 0.5) / n_bins - 0.5) * 2.0
    edge = 1.0 - rolloff
    mag = np.ones(n_bins)
    if rolloff > 0:
        taper = x > edge
        mag[taper] = 0.5 * (1 + np.cos(np.pi * (x[taper] - edge) / rolloff))
    mag = np.maximum(mag, 1e-3)
    mag *= np.sqrt(total_power * pri / np.sum(mag**2))
    return mag.astype(complex)


@dataclass(frozen=True)
class RadarConfig:
    pri_tau: float
    pulses_P: int
    bandwidth_Bh: float
    carrier_fc: float = 10e9
    total_power_PT: float = 1.0
    pulse_spectrum_H: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.pri_tau <= 0:
            raise ValueError("PRI must be positive")
        if self.bandwidth_Bh <= 0:
            raise ValueError("bandwidth must be positive")
        if self.pulses_P < 1:
            raise ValueError("need at least one pulse")
        n = self.nyquist_bins_N
        if n < 1:
            raise ValueError("tau * B_h must round to at least one bin")
        if self.pulse_spectrum_H is None:
            H = flat_spectrum(n, self.pri_tau, self.total_power_PT)
        else:
            H = np.asarray(self.pulse_spectrum_H, dtype=complex)
            if H.shape != (n,):
                raise ValueError(f"pulse spectrum must have {n} bins, got {H.shape}")
        object.__setattr__(self, "pulse_spectrum_H", H)

    @property
    def nyquist_bins_N(self) -> int:
        return int(round(self.pri_tau * self.bandwidth_Bh))

    @property
    def wavelength(self) -> float:
        return C_LIGHT / self.carrier_fc

    @property
    def delay_cell(self) -> float:
        return self.pri_tau / self.nyquist_bins_N

    @property
    def doppler_cell(self) -> float:
        """Doppler grid spacing in rad/s."""
        return 2 * np.pi / (self.pulses_P * self.pri_tau)

    def transmit_power(self) -> float:
        return float(np.sum(np.abs(self.pulse_spectrum_H) ** 2) / self.pri_tau)

    def delay_on_grid(self, r: int) -> float:
        return self.delay_cell * r

    def doppler_on_grid(self, u: int) -> float:
        """Doppler (rad/s) of focusing bin ``u``: -pi/tau + 2 pi u/(P tau)."""
        return -np.pi / self.pri_tau + self.doppler_cell * u

    def replace(self, **changes) -> "RadarConfig":
        fields = dict(pri_tau=self.pri_tau, pulses_P=self.pulses_P,
                      bandwidth_Bh=self.bandwidth_Bh, carrier_fc=self.carrier_fc,
                      total_power_PT=self.total_power_PT,
                      pulse_spectrum_H=self.pulse_spectrum_H)
        if ("pri_tau" in changes or "bandwidth_Bh" in changes
                or "total_power_PT" in changes) and "pulse_spectrum_H" not in changes:
            fields["pulse_spectrum_H"] = None
        fields.update(changes)
        return RadarConfig(**fields)


@dataclass(frozen=True)
class Target:
    delay_tau_l: float
    doppler_nu_l: float
    amplitude_alpha_l: complex = 1.0
    azimuth_theta_l: float = 0.0


@dataclass(frozen=True)
class ClutterModel:
    count_C: int
    mean_power_sigma_c2: float
    doppler_mean_vd: float = 0.0
    doppler_std_sigma_d: float = 0.0

    def __post_init__(self):
        if self.mean_power_sigma_c2 < 0 or self.doppler_std_sigma_d < 0:
            raise ValueError("clutter power and Doppler spread must be nonnegative")
        if self.count_C < 0:
            raise ValueError("clutter count must be nonnegative")


@dataclass(frozen=True)
class TargetScene:
    targets: tuple[Target, ...] = ()
    clutter: ClutterModel | None = None
    noise_var_sigma_n2: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        if self.noise_var_sigma_n2 < 0:
            raise ValueError("noise variance must be nonnegative")

    @property
    def L(self) -> int:
        return len(self.targets)

    def merged(self, other: "TargetScene") -> "TargetScene":
        return TargetScene(self.targets + other.targets, self.clutter,
                           self.noise_var_sigma_n2)


def on_grid_target(cfg: RadarConfig, r: int, u: int, alpha: complex = 1.0) -> Target:
    return Target(cfg.delay_on_grid(r), cfg.doppler_on_grid(u), alpha)


def random_on_grid_scene(cfg: RadarConfig, L: int, rng: np.random.Generator,
                         noise_var: float = 0.0, unit_amplitude: bool = False,
                         min_amplitude: float = 0.5) -> tuple[TargetScene, list[tuple[int, int]]]:
    """L distinct on-grid targets; returns the scene and their (r, u) cells."""
    N, P = cfg.nyquist_bins_N, cfg.pulses_P
    cells = rng.choice(N * P, size=L, replace=False)
    support = [(int(c // P), int(c % P)) for c in cells]
    targets = []
    for r, u in support:
        if unit_amplitude:
            mag = 1.0
        else:
            mag = rng.uniform(min_amplitude, 1.0)
        alpha = mag * np.exp(1j * rng.uniform(0, 2 * np.pi))
        targets.append(on_grid_target(cfg, r, u, alpha))
    return TargetScene(tuple(targets), noise_var_sigma_n2=noise_var), support


def check_assumptions(cfg: RadarConfig, scene: TargetScene) -> list[str]:
    """Report violations of the unambiguous-region and uniqueness assumptions.

    Far/slow/small-acceleration conditions are not checkable from a static
    scene and are left to the caller.
    """
    problems = []
    tau = cfg.pri_tau
    seen = set()
    for i, t in enumerate(scene.targets):
        if not 0 <= t.delay_tau_l < tau:
            problems.append(f"target {i}: delay outside [0, tau)")
        if not -np.pi / tau <= t.doppler_nu_l < np.pi / tau:
            problems.append(f"target {i}: Doppler outside [-pi/tau, pi/tau)")
        key = (round(t.delay_tau_l / tau, 12), round(t.doppler_nu_l * tau, 12))
        if key in seen:
            problems.append(f"target {i}: duplicate delay-Doppler pair")
        seen.add(key)
    return problems


def _target_coefficients(cfg: RadarConfig, targets: Sequence[Target],
                         kappa: np.ndarray, slow_times: np.ndarray) -> np.ndarray:
    """(1/tau) H[k] sum_l alpha_l exp(-j2pi k tau_l/tau) exp(-j nu_l t_p)."""
    tau = cfg.pri_tau
    out = np.zeros((len(kappa), len(slow_times)), dtype=complex)
    if not targets:
        return out
    delays = np.array([t.delay_tau_l for t in targets])
    dopplers = np.array([t.doppler_nu_l for t in targets])
    amps = np.array([t.amplitude_alpha_l for t in targets], dtype=complex)
    steer_k = np.exp(-2j * np.pi * np.outer(kappa, delays) / tau)       # K x L
    steer_p = np.exp(-1j * np.outer(dopplers, slow_times))              # L x P
    out = (steer_k * amps) @ steer_p
    return out * (cfg.pulse_spectrum_H[kappa] / tau)[:, None]


def _clutter_coefficients(cfg: RadarConfig, clutter: ClutterModel, kappa: np.ndarray,
                          slow_times: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    C = clutter.count_C
    if C == 0 or clutter.mean_power_sigma_c2 == 0:
        return np.zeros((len(kappa), len(slow_times)), dtype=complex)
    tau = cfg.pri_tau
    amps = np.sqrt(clutter.mean_power_sigma_c2 / 2) * (rng.standard_normal(C)
                                                       + 1j * rng.standard_normal(C))
    delays = rng.uniform(0.0, tau, C)
    dopplers = rng.normal(clutter.doppler_mean_vd, clutter.doppler_std_sigma_d, C)
    steer_k = np.exp(-2j * np.pi * np.outer(kappa, delays) / tau)
    steer_p = np.exp(-1j * np.outer(dopplers, slow_times))
    out = (steer_k * amps) @ steer_p
    return out * (cfg.pulse_spectrum_H[kappa] / tau)[:, None]


def _noise_coefficients(cfg: RadarConfig, sigma_n2: float, kappa: np.ndarray,
                        n_pulses: int, rng: np.random.Generator) -> np.ndarray:
    # drawn on the full grid so that restricting kappa is a pure row subset
    N = cfg.nyquist_bins_N
    scale = np.sqrt(sigma_n2 / cfg.pri_tau / 2)
    full = scale * (rng.standard_normal((N, n_pulses)) + 1j * rng.standard_normal((N, n_pulses)))
    return full[kappa]


def fourier_coefficients(cfg: RadarConfig, scene: TargetScene, kappa,
                         slow_times: np.ndarray, rng_seed: int = 0) -> np.ndarray:
    """K x len(slow_times) coefficient matrix for arbitrary pulse epochs."""
    kappa = _as_index_array(kappa, cfg.nyquist_bins_N)
    slow_times = np.asarray(slow_times, dtype=float)
    out = _target_coefficients(cfg, scene.targets, kappa, slow_times)
    if scene.clutter is not None:
        out += _clutter_coefficients(cfg, scene.clutter, kappa, slow_times,
                                     rng_stream(rng_seed, _STREAM_CLUTTER))
    if scene.noise_var_sigma_n2 > 0:
        out += _noise_coefficients(cfg, scene.noise_var_sigma_n2, kappa, len(slow_times),
                                   rng_stream(rng_seed, _STREAM_NOISE))
    return out


def _as_index_array(kappa, N: int) -> np.ndarray:
    idx = np.asarray(getattr(kappa, "indices_kappa", kappa), dtype=int)
    if idx.ndim != 1:
        raise ValueError("kappa must be one-dimensional")
    if idx.size and (idx.min() < 0 or idx.max() > N - 1):
        bad = idx[(idx < 0) | (idx > N - 1)]
        raise ValueError(f"kappa indices outside [0, {N - 1}]: {bad.tolist()}")
    return idx


def synthesize_fourier(cfg: RadarConfig, scene: TargetScene, kappa, rng_seed: int = 0):
    """Fourier coefficients c_p[k] of the aligned pulse frames, k in kappa.

    Targets are evaluated in closed form.  Clutter and noise are drawn from
    two disjoint streams of ``rng_seed``; noise coefficients are white with
    variance sigma_n^2 / tau.
    """
    from .xampling import FrequencyIndexSet, XampledData

    if not isinstance(kappa, FrequencyIndexSet):
        kappa = FrequencyIndexSet(np.asarray(kappa, dtype=int), "direct",
                                  N=cfg.nyquist_bins_N)
    slow = np.arange(cfg.pulses_P) * cfg.pri_tau
    coeffs = fourier_coefficients(cfg, scene, kappa.indices_kappa, slow, rng_seed)
    return XampledData(coeffs, kappa, cfg)


def synthesize_time(cfg: RadarConfig, scene: TargetScene, sample_rate: float,
                    rng_seed: int = 0) -> np.ndarray:
    """Aligned time frames r^p(t + p tau), one row per pulse.

    Frames are synthesised from the full set of N Fourier coefficients
    (the band-limited pulse), zero-padded when ``sample_rate > B_h``.  Noise
    is added per sample with the variance that maps to sigma_n^2/tau per
    coefficient under ``fft(frame) / n_samples``.
    """
    if sample_rate < cfg.bandwidth_Bh * (1 - 1e-12):
        raise ValueError("sample_rate must be at least the pulse bandwidth B_h")
    N = cfg.nyquist_bins_N
    ns = int(round(cfg.pri_tau * sample_rate))
    ns = max(ns, N)
    clean = TargetScene(scene.targets, scene.clutter, 0.0)
    coeffs = synthesize_fourier(cfg, clean, np.arange(N), rng_seed).coeffs   # N x P
    spec = np.zeros((ns, cfg.pulses_P), dtype=complex)
    spec[:N] = coeffs
    frames = (np.fft.ifft(spec, axis=0) * ns).T
    if scene.noise_var_sigma_n2 > 0:
        rng = rng_stream(rng_seed, _STREAM_NOISE)
        scale = np.sqrt(ns * scene.noise_var_sigma_n2 / cfg.pri_tau / 2)
        frames = frames + scale * (rng.standard_normal(frames.shape)
                                   + 1j * rng.standard_normal(frames.shape))
    return frames


# -- scene files ----------------------------------------------------------

def _complex_from(v) -> complex:
    if isinstance(v, (list, tuple)):
        return complex(v[0], v[1])
    return complex(v)


def radar_config_from_dict(d: dict) -> RadarConfig:
    N = int(round(d["pri_tau"] * d["bandwidth_Bh"]))
    pt = float(d.get("total_power_PT", 1.0))
    spec = d.get("pulse_spectrum", "flat")
    if spec == "flat":
        H = None
    elif spec == "raised_cosine":
        H = raised_cosine_spectrum(N, d["pri_tau"], pt, d.get("rolloff", 0.25))
    else:
        H = np.array([_complex_from(v) for v in spec])
    return RadarConfig(float(d["pri_tau"]), int(d["pulses_P"]), float(d["bandwidth_Bh"]),
                       float(d.get("carrier_fc", 10e9)), pt, H)


def scene_from_dict(d: dict, cfg: RadarConfig | None = None) -> TargetScene:
    """Build a scene from a mapping; targets may use grid indices (r, u)."""
    targets = []
    for t in d.get("targets", []):
        alpha = _complex_from(t.get("amplitude", 1.0))
        if "r" in t:
            if cfg is None:
                raise ValueError("grid-indexed targets need a radar config")
            targets.append(Target(cfg.delay_on_grid(t["r"]), cfg.doppler_on_grid(t["u"]),
                                  alpha, float(t.get("azimuth", 0.0))))
        else:
            targets.append(Target(float(t["delay"]), float(t["doppler"]), alpha,
                                  float(t.get("azimuth", 0.0))))
    clutter = None
    if d.get("clutter"):
        c = d["clutter"]
        clutter = ClutterModel(int(c["count"]), float(c["power"]),
                               float(c.get("doppler_mean", 0.0)),
                               float(c.get("doppler_std", 0.0)))
    return TargetScene(tuple(targets), clutter, float(d.get("noise_var", 0.0)))


def load_config_file(path) -> dict:
    """Read a YAML or JSON scenario/scene file into a dict."""
    path = Path(path)
    text = path.read_text()
    if path.suffix in (".yaml", ".yml"):
        import yaml
        return yaml.safe_load(text)
    return json.loads(text)
