"""Reduced time-on-target: non-uniform pulse schedules and 2D recovery."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .clutter import delay_dictionary
from .focusing import annotate_temporal
from .pursuit import kron_omp
from .results import RecoveryResult
from .scene import RadarConfig, TargetScene, fourier_coefficients, rng_stream
from .xampling import FrequencyIndexSet, XampledData

MODES = ("random", "prefix", "split")


@dataclass(frozen=True)
class PulseSchedule:
    m_p: tuple[int, ...]
    P1: int

    def __post_init__(self):
        m = tuple(int(x) for x in self.m_p)
        object.__setattr__(self, "m_p", m)
        a = np.asarray(m)
        if a.size and (a.min() < 0 or a.max() >= self.P1):
            raise ValueError(f"pulse indices must lie in [0, {self.P1 - 1}]")
        if np.any(np.diff(a) <= 0):
            raise ValueError("schedule must be strictly increasing")

    @property
    def P2(self) -> int:
        return len(self.m_p)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.m_p, dtype=int)

    def complement(self) -> "PulseSchedule":
        rest = sorted(set(range(self.P1)) - set(self.m_p))
        return PulseSchedule(tuple(rest), self.P1)


def schedule(P1: int, P2: int, mode: str = "random", rng_seed: int = 0,
             fraction: float | None = None) -> PulseSchedule:
    """Pulse transmission times m_p (in PRIs) within a CPI of P1 slots.

    ``split`` interleaves two beam directions: it returns the direction that
    receives P2 pulses (or round(fraction * P1) if ``fraction`` is given),
    spread evenly over the CPI; the other direction is its complement.
    """
    if fraction is not None:
        P2 = int(np.ceil(fraction * P1 - 1e-12))
    if P2 > P1:
        raise ValueError(f"P2={P2} exceeds P1={P1}")
    if P2 < 2:
        raise ValueError("need at least two pulses")
    if mode == "prefix":
        return PulseSchedule(tuple(range(P2)), P1)
    if mode == "random":
        rng = rng_stream(rng_seed, 11)
        rest = np.sort(rng.choice(np.arange(1, P1), size=P2 - 1, replace=False))
        return PulseSchedule((0, *rest.tolist()), P1)
    if mode == "split":
        m = np.round(np.linspace(0, P1, P2, endpoint=False)).astype(int)
        return PulseSchedule(tuple(m.tolist()), P1)
    raise ValueError(f"unknown schedule mode {mode!r}")


def doppler_grid(cfg: RadarConfig, P1: int) -> np.ndarray:
    """Doppler bins -pi/tau + 2 pi u/(P1 tau), u = 0..P1-1."""
    return -np.pi / cfg.pri_tau + 2 * np.pi * np.arange(P1) / (P1 * cfg.pri_tau)


def slow_time_matrix(cfg: RadarConfig, sched: PulseSchedule) -> np.ndarray:
    """G[u, p] = exp(-j nu_u m_p tau): right factor of the 2D model."""
    nu = doppler_grid(cfg, sched.P1)
    return np.exp(-1j * np.outer(nu, sched.as_array() * cfg.pri_tau))


def synthesize_rtot(cfg: RadarConfig, scene: TargetScene, sched: PulseSchedule,
                    kappa, rng_seed: int = 0) -> XampledData:
    if not isinstance(kappa, FrequencyIndexSet):
        kappa = FrequencyIndexSet(np.asarray(kappa, int), "direct", N=cfg.nyquist_bins_N)
    slow = sched.as_array() * cfg.pri_tau
    coeffs = fourier_coefficients(cfg, scene, kappa.indices_kappa, slow, rng_seed)
    return XampledData(coeffs, kappa, cfg.replace(pulses_P=sched.P1))


def recover_2d(data: XampledData, sched: PulseSchedule, L_max: int,
               gamma: float = 0.0, sigma2: float = 1.0) -> RecoveryResult:
    """Matrix OMP on X = D1 A G with D1 = diag(H/tau) F_kappa.

    Support entries are (delay bin, Doppler bin on the P1 grid).
    """
    if data.K < 2 or sched.P2 < 2:
        raise ValueError("need K >= 2 and P2 >= 2")
    if data.P != sched.P2:
        raise ValueError("data columns do not match the schedule length")
    cfg = data.cfg_ref.replace(pulses_P=sched.P1)
    D1 = delay_dictionary(cfg, data.kappa)
    D2 = slow_time_matrix(cfg, sched)
    res = kron_omp(data.coeffs, D1, D2, max_iter=L_max, gamma=gamma, sigma2=sigma2)
    return annotate_temporal(res, cfg, doppler_grid(cfg, sched.P1))


def nonuniform_focus(data: XampledData, sched: PulseSchedule, nu: float) -> np.ndarray:
    """Psi_nu[k] = sum_p X_p[k] exp(j nu m_p tau)."""
    tau = data.cfg_ref.pri_tau
    w = np.exp(1j * nu * sched.as_array() * tau)
    return data.coeffs @ w


def sidelobe_level(sched: PulseSchedule, oversample: int = 8) -> float:
    """Peak sidelobe of |sum_p exp(j dnu m_p tau)| relative to its peak P2.

    The pattern is evaluated over one Doppler period on an
    ``oversample``-times finer grid than the P1 cells; the main lobe runs
    from dnu = 0 out to the first local minimum on either side.
    """
    m = sched.as_array()
    n = oversample * sched.P1
    x = np.arange(n) / n           # dnu tau / 2pi over one period
    pattern = np.abs(np.exp(2j * np.pi * np.outer(x, m)).sum(axis=1))
    right = 1
    while right < n // 2 and pattern[right + 1] < pattern[right]:
        right += 1
    left = n - 1
    while left > n // 2 and pattern[left - 1] < pattern[left]:
        left -= 1
    side = pattern[right:left + 1]
    return float(side.max() / sched.P2) if side.size else 0.0
