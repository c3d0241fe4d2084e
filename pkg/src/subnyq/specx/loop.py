"""Spectrum-sharing session: sense, select bands, recover targets, repeat."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..focusing import recover_temporal
from ..metrics import MatchReport, match_detections
from ..results import RecoveryResult
from ..scene import C_LIGHT, RadarConfig, TargetScene, rng_stream, synthesize_fourier
from ..xampling import bin_frequencies, kappa_from_bands
from .bands import REM, SpectralMap, band_select, shape_transmit_spectrum
from .mwc import (MWCConfig, ctf_frame, multiband_spectrum, mwc_sample, radar_slice_support,
                  slice_signal, slices_to_bands, support_recover_known)


@dataclass
class SpecxConfig:
    radar: RadarConfig
    mwc: MWCConfig
    Nb: int = 4
    p: int = 125
    budget_cells: int | None = 4
    sigma_n2: float = 0.0
    Pfa: float = 1e-6
    sensing_bins: int = 64

    @property
    def extent(self) -> tuple[float, float]:
        B = self.radar.bandwidth_Bh
        return (-B / 2, B / 2)


@dataclass
class EpochRecord:
    epoch: int
    F_C: SpectralMap
    F_R: SpectralMap
    reselected: bool
    result: RecoveryResult | None = None
    report: MatchReport | None = None
    sensing_error: str | None = None
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {"epoch": self.epoch, "F_C": self.F_C.to_list(), "F_R": self.F_R.to_list(),
             "reselected": self.reselected,
             "detections": [list(s) for s in self.result.support] if self.result else [],
             "RMSLE": self.report.rmsle if self.report else None}
        if self.report:
            d["hits"] = self.report.hits
            d["false_alarms"] = self.report.false_alarms
        if self.sensing_error:
            d["sensing_error"] = self.sensing_error
        return d

    def to_json_line(self) -> str:
        return json.dumps(self.to_dict())


def sense(comm_bands, FR: SpectralMap | None, cfg: SpecxConfig, seed: int) -> SpectralMap:
    """Spectrum sensing on x_C (+ x_R when the radar is already on air)."""
    rng = rng_stream(seed, 31)
    bands = list(comm_bands)
    radar = list(FR.bands) if FR is not None else []
    X = multiband_spectrum(bands + radar, rng)
    x = slice_signal(X, cfg.mwc, cfg.sensing_bins)
    z = mwc_sample(x, cfg.mwc)
    if not np.any(z):
        return SpectralMap((), "F_C")
    S_R = radar_slice_support(radar, cfg.mwc) if radar else []
    S_C = support_recover_known(ctf_frame(z), cfg.mwc.sensing_matrix, S_R)
    return SpectralMap(tuple(slices_to_bands(S_C, cfg.mwc)), "F_C")


def shaped_radar(cfg: SpecxConfig, FR: SpectralMap) -> RadarConfig:
    radar = cfg.radar
    H_R, _ = shape_transmit_spectrum(radar.pulse_spectrum_H, bin_frequencies(radar), FR,
                                     radar.total_power_PT, df=1.0 / radar.pri_tau)
    return radar.replace(pulse_spectrum_H=H_R)


def radar_epoch(cfg: SpecxConfig, FR: SpectralMap, scene: TargetScene, seed: int,
                truth=None) -> tuple[RecoveryResult, MatchReport | None]:
    cfg_r = shaped_radar(cfg, FR)
    kappa = kappa_from_bands(FR.bands, cfg_r)
    scene = TargetScene(scene.targets, scene.clutter, cfg.sigma_n2)
    data = synthesize_fourier(cfg_r, scene, kappa, seed)
    res = recover_temporal(data, cfg.sigma_n2, cfg.Pfa, L_expected=scene.L)
    report = None
    if truth is not None:
        cell_m = C_LIGHT * cfg_r.delay_cell / 2
        report = match_detections(res, truth, (1, 1), range_cell=cell_m)
    return res, report


def specx_loop(comm_signal, rem: REM, cfg: SpecxConfig, scene: TargetScene,
               epochs: int, truth=None, seed: int = 0, log=None) -> list[EpochRecord]:
    """Run the coexistence loop for ``epochs`` epochs.

    ``comm_signal(epoch)`` returns the active communication bands.  Epoch 0
    senses the communication signal alone; later epochs sense it together
    with the radar transmission, whose slices are known.  Bands are
    re-selected whenever the sensed F_C differs from the previous epoch.
    ``log`` is an optional text stream receiving one JSON line per epoch.
    """
    records: list[EpochRecord] = []
    FC_prev: SpectralMap | None = None
    FR: SpectralMap | None = None
    for e in range(epochs):
        err = None
        try:
            FC = sense(comm_signal(e), FR, cfg, seed * 1000 + e)
        except (RuntimeError, ValueError) as exc:
            # keep the last map; an unreliable sensing pass never moves the radar
            if FC_prev is None:
                raise
            FC, err = FC_prev, str(exc)
        reselect = FC_prev is None or FC.bands != FC_prev.bands
        if reselect:
            _, FR, _ = band_select(rem, FC, cfg.Nb, cfg.p, budget_cells=cfg.budget_cells)
        if FR.overlaps(FC):
            raise AssertionError("selected radar bands overlap the communication support")
        res, rep = radar_epoch(cfg, FR, scene, seed * 1000 + e, truth)
        rec = EpochRecord(e, FC, FR, reselect, res, rep, err)
        records.append(rec)
        if log is not None:
            log.write(rec.to_json_line() + "\n")
        FC_prev = FC
    return records


# -- desk replica of the nine-target cognitive radar demo --------------------

DEMO_RANGES_KM = (6.097, 31.764, 35.046, 35.451, 35.479, 81.049, 81.570, 121.442, 120.922)
DEMO_RMSLE_KM = 0.34
DEMO_RANGE_CELL_M = 75.0


def desk_config(sigma_n2: float = 0.0, seed: int = 0) -> SpecxConfig:
    radar = RadarConfig(10e-6, 50, 20e6)
    mwc = MWCConfig(20, 0.25e6, 0.25e6, 20e6, seed=seed)
    return SpecxConfig(radar, mwc, Nb=4, p=125, budget_cells=4, sigma_n2=sigma_n2)


def desk_scene(cfg: RadarConfig, seed: int = 0):
    """Nine targets at the demo ranges mapped onto the delay grid.

    Ranges are scaled so the farthest target sits near the end of the
    unambiguous window; targets that collapse onto neighbouring cells keep
    distinct Doppler bins.  Returns (scene, truth cells).
    """
    from ..scene import on_grid_target

    N, P = cfg.nyquist_bins_N, cfg.pulses_P
    rng = rng_stream(seed, 41)
    scale = 0.95 * N / max(DEMO_RANGES_KM)
    rs = [int(round(d * scale)) for d in DEMO_RANGES_KM]
    us = rng.choice(P, size=len(rs), replace=False)
    truth = [(r, int(u)) for r, u in zip(rs, us)]
    targets = tuple(on_grid_target(cfg, r, u, np.exp(1j * rng.uniform(0, 2 * np.pi)))
                    for r, u in truth)
    return TargetScene(targets), truth


def desk_rem(q: int = 25, seed: int = 0) -> REM:
    rng = rng_stream(seed, 42)
    return REM(rng.uniform(1.0, 10.0, q), (-10e6, 10e6))


def desk_comm(epoch: int) -> list[tuple[float, float]]:
    return [(-4.1e6, -3.8e6), (2.2e6, 2.5e6)]


def rmsle_threshold_m(cfg: RadarConfig) -> float:
    """The demo's 0.34 km expressed in desk range cells."""
    desk_cell = C_LIGHT * cfg.delay_cell / 2
    return DEMO_RMSLE_KM * 1e3 * desk_cell / DEMO_RANGE_CELL_M
