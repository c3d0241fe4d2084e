"""Scenario runner: seeded trials, reports and plot-ready artifacts."""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import rtot, sar, summer
from .focusing import recover_temporal
from .metrics import match_detections
from .oracles import nyquist_reference
from .scene import (C_LIGHT, RadarConfig, TargetScene, load_config_file, on_grid_target,
                    random_on_grid_scene, rng_stream, synthesize_fourier)
from .xampling import select_kappa

MODULES = ("temporal", "rtot", "specx", "summer", "sar", "sweep")


class ScenarioError(ValueError):
    pass


_DEFAULTS = {
    "temporal": dict(pri_tau=10e-6, pulses_P=50, bandwidth_Bh=20e6, K=20, scheme="direct",
                     L=3, targets=None, snr_db=None, Pfa=1e-6, max_iter=None),
    "rtot": dict(pri_tau=1e-6, bandwidth_Bh=16e6, P1=16, P2=4, schedule="random", K=4, L=2),
    "specx": dict(epochs=3, Nb=4, snr_db=None, budget_cells=4),
    "summer": dict(mode=3, pri_tau=1e-6, pulses_P=4, bandwidth_Bh=8e6, K=4, L=2,
                   snr_db=None, min_az_sep=0, geometry_seed=0),
    "sar": dict(N=64, M=32, scale_a=2.44e-4, targets=[[40, 16, 1.0]], W=10, fraction=1.0,
                bands=4),
    "sweep": dict(pri_tau=1e-6, bandwidth_Bh=16e6, K=[4, 8], P=[2, 4], L=[1, 2]),
}

_EXPECT_KEYS = {"min_success_rate", "min_hit_rate", "max_false_alarms", "max_rmsle"}


@dataclass
class Scenario:
    module: str
    params: dict
    trials: int = 1
    seed: int = 0
    name: str = ""
    expect: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.module not in MODULES:
            raise ScenarioError(f"unknown module {self.module!r}; expected one of {MODULES}")
        unknown = set(self.params) - set(_DEFAULTS[self.module])
        if unknown:
            raise ScenarioError(f"unknown {self.module} parameters: {sorted(unknown)}")
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ScenarioError("trials must be a positive integer")
        bad = set(self.expect) - _EXPECT_KEYS
        if bad:
            raise ScenarioError(f"unknown expectations: {sorted(bad)}")
        self.params = {**_DEFAULTS[self.module], **self.params}

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        if not isinstance(d, dict) or "module" not in d:
            raise ScenarioError("scenario must be a mapping with a 'module' key")
        extra = set(d) - {"module", "params", "trials", "seed", "name", "expect"}
        if extra:
            raise ScenarioError(f"unknown scenario keys: {sorted(extra)}")
        return cls(d["module"], dict(d.get("params", {})), int(d.get("trials", 1)),
                   int(d.get("seed", 0)), str(d.get("name", "")), dict(d.get("expect", {})))

    def to_dict(self) -> dict:
        return {"module": self.module, "name": self.name, "trials": self.trials,
                "seed": self.seed, "params": self.params, "expect": self.expect}


# seven targets with two close pairs on a 210-bin, 50-pulse grid
DEMO_TARGETS = [[20, 10], [21, 30], [80, 25], [82, 26], [130, 5], [170, 40], [171, 12]]

BUILTIN = {
    "temporal-demo": dict(module="temporal", name="seven targets at 1/30 rate", trials=1,
                          params=dict(pri_tau=10.5e-6, pulses_P=50, bandwidth_Bh=20e6, K=7,
                                      targets=DEMO_TARGETS, snr_db=20.0),
                          expect=dict(min_hit_rate=1.0, max_false_alarms=0)),
    "empty": dict(module="temporal", name="no targets", trials=5,
                  params=dict(L=0, snr_db=0.0, K=20), expect=dict(max_false_alarms=0)),
    "minimal-samples": dict(module="temporal", name="minimal samples", trials=500,
                     params=dict(pri_tau=1e-6, pulses_P=4, bandwidth_Bh=16e6, K=8, L=2),
                     expect=dict(min_success_rate=0.99)),
    "rtot": dict(module="rtot", trials=500, expect=dict(min_success_rate=0.99)),
    "specx": dict(module="specx", trials=1, params=dict(epochs=3, snr_db=10.0)),
    "summer": dict(module="summer", trials=500, expect=dict(min_success_rate=0.99)),
    "sar": dict(module="sar", trials=1, params=dict(fraction=0.25),
                expect=dict(min_hit_rate=1.0)),
    "sweep": dict(module="sweep", trials=50),
}


def load_scenario(ref) -> Scenario:
    """A builtin name, a YAML/JSON file path, or a mapping."""
    if isinstance(ref, dict):
        return Scenario.from_dict(ref)
    if str(ref) in BUILTIN:
        return Scenario.from_dict(BUILTIN[str(ref)])
    path = Path(ref)
    if not path.exists():
        raise ScenarioError(f"no builtin or file named {ref!r}")
    return Scenario.from_dict(load_config_file(path))


@dataclass
class TrialReport:
    scenario: Scenario
    trials: list[dict]
    aggregate: dict
    artifacts: dict = field(default_factory=dict)
    runtimes: list[float] = field(default_factory=list)

    def passed(self) -> bool:
        e, a = self.scenario.expect, self.aggregate
        checks = {"min_success_rate": lambda v: a.get("success_rate", 0) >= v,
                  "min_hit_rate": lambda v: a.get("hit_rate", 0) >= v,
                  "max_false_alarms": lambda v: a.get("false_alarms", 0) <= v,
                  "max_rmsle": lambda v: a.get("mean_rmsle", np.inf) <= v}
        return all(checks[k](v) for k, v in e.items())

    def to_dict(self) -> dict:
        """Deterministic part of the report (runtimes are kept separately)."""
        return {"scenario": self.scenario.to_dict(), "aggregate": self.aggregate,
                "passed": self.passed(), "trials": self.trials,
                "artifacts": dict(sorted(self.artifacts.items()))}

    def to_json(self) -> str:
        return json.dumps(_plain(self.to_dict()), indent=1, sort_keys=True)


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj


def _noise_from_snr(snr_db, PT: float, N: int) -> float:
    """Per-coefficient SNR of a unit-amplitude target under a flat spectrum."""
    if snr_db is None:
        return 0.0
    return PT / (N * 10 ** (snr_db / 10))


def _trial_row(i: int, det, truth, bins, range_cell=1.0, extra=None) -> dict:
    rep = match_detections(det, truth, bins, range_cell)
    row = {"trial": i, "detections": [list(d) for d in getattr(det, "support", det)],
           "truth": [list(t) for t in truth], "hits": rep.hits, "misses": rep.misses,
           "false_alarms": rep.false_alarms, "rmsle": rep.rmsle,
           "exact": rep.hits == len(truth) and rep.false_alarms == 0
           and set(map(tuple, getattr(det, "support", det))) == set(map(tuple, truth))}
    if extra:
        row.update(extra)
    return row


# -- per-module trials -----------------------------------------------------

def _temporal_cfg(p) -> RadarConfig:
    return RadarConfig(p["pri_tau"], p["pulses_P"], p["bandwidth_Bh"])


def _temporal_scene(cfg, p, rng, s2):
    if p["targets"] is not None:
        truth = [tuple(int(v) for v in t[:2]) for t in p["targets"]]
        tg = tuple(on_grid_target(cfg, r, u, np.exp(1j * rng.uniform(0, 2 * np.pi)))
                   for r, u in truth)
        return TargetScene(tg, noise_var_sigma_n2=s2), truth
    if p["L"] == 0:
        return TargetScene((), noise_var_sigma_n2=s2), []
    return random_on_grid_scene(cfg, p["L"], rng, noise_var=s2)


def _trial_temporal(sc: Scenario, i: int) -> dict:
    p = sc.params
    cfg = _temporal_cfg(p)
    seed = sc.seed * 100003 + i
    s2 = _noise_from_snr(p["snr_db"], cfg.total_power_PT, cfg.nyquist_bins_N)
    scene, truth = _temporal_scene(cfg, p, rng_stream(seed, 2), s2)
    kap = select_kappa(cfg, p["K"], p["scheme"], seed)
    data = synthesize_fourier(cfg, scene, kap, seed)
    L = len(truth)
    res = recover_temporal(data, s2, p["Pfa"], p["max_iter"] or (L if s2 == 0 else None),
                           L_expected=L)
    err = float(np.max(np.abs(_amp_errors(res, scene, cfg)))) if s2 == 0 and L else 0.0
    return _trial_row(i, res, truth, (1, 1), C_LIGHT * cfg.delay_cell / 2,
                      {"max_amplitude_error": err})


def _amp_errors(res, scene, cfg):
    truth = {(int(round(t.delay_tau_l / cfg.delay_cell)),
              int(round((t.doppler_nu_l + np.pi / cfg.pri_tau) / cfg.doppler_cell))): t
             for t in scene.targets}
    out = []
    for s, a in zip(res.support, res.amplitudes):
        t = truth.get(tuple(s))
        out.append(abs(a - t.amplitude_alpha_l) if t else np.inf)
    return out or [0.0]


def _trial_rtot(sc: Scenario, i: int) -> dict:
    p = sc.params
    seed = sc.seed * 100003 + i
    cfg = RadarConfig(p["pri_tau"], p["P1"], p["bandwidth_Bh"])
    sched = rtot.schedule(p["P1"], p["P2"], p["schedule"], seed)
    scene, truth = random_on_grid_scene(cfg, p["L"], rng_stream(seed, 2))
    kap = select_kappa(cfg, p["K"], "direct", seed)
    data = rtot.synthesize_rtot(cfg, scene, sched, kap, seed)
    res = rtot.recover_2d(data, sched, p["L"])
    return _trial_row(i, res, truth, (1, 1))


def _trial_summer(sc: Scenario, i: int, cache: dict) -> dict:
    p = sc.params
    seed = sc.seed * 100003 + i
    cfg = RadarConfig(p["pri_tau"], p["pulses_P"], p["bandwidth_Bh"])
    g = summer.mode_geometry(p["mode"], p["geometry_seed"])
    cm = summer.make_mimo(cfg, g, p["K"], seed,
                          carriers="ordered" if p["mode"] == 1 else "random")
    noise = 0.0 if p["snr_db"] is None else 10 ** (-p["snr_db"] / 10)
    scene, truth = summer.random_grid_scene(cm, p["L"], rng_stream(seed, 2), noise,
                                            p["min_az_sep"])
    y = summer.synthesize_mimo(cm, scene, seed)
    res = summer.omp3d(y, cm, p["L"])
    return _trial_row(i, res, truth, (1, 1, 1))


def _trial_specx(sc: Scenario, i: int) -> dict:
    from .specx import loop

    p = sc.params
    seed = sc.seed * 100003 + i
    cfg0 = loop.desk_config(seed=seed)
    s2 = _noise_from_snr(p["snr_db"], cfg0.radar.total_power_PT, cfg0.radar.nyquist_bins_N)
    cfg = loop.desk_config(sigma_n2=s2, seed=seed)
    cfg.Nb, cfg.budget_cells = p["Nb"], p["budget_cells"]
    scene, truth = loop.desk_scene(cfg.radar, seed)
    rem = loop.desk_rem(seed=seed)
    recs = loop.specx_loop(loop.desk_comm, rem, cfg, scene, p["epochs"], truth, seed)
    last = recs[-1]
    row = _trial_row(i, last.result, truth, (1, 1), C_LIGHT * cfg.radar.delay_cell / 2)
    row["epochs"] = [r.to_dict() for r in recs]
    row["rmsle_threshold_m"] = loop.rmsle_threshold_m(cfg.radar)
    row["rem"] = rem.y.tolist()
    return row


def _trial_sar(sc: Scenario, i: int) -> dict:
    p = sc.params
    g = sar.desk_geometry(p["M"], p["scale_a"])
    N = p["N"]
    H = sar.gaussian_pulse_spectrum(N)
    tg = [tuple(t) for t in p["targets"]]
    D = sar.simulate_point_targets(g, N, tg, H)
    keep = None
    if p["fraction"] < 1:
        keep = sar.multiband_mask(N, p["fraction"], p["bands"])
    img = sar.rda_fourier(D, H, g, p["W"], keep)
    truth = [(int(round(t[0])), int(round(t[1]))) for t in tg]
    dets = _image_peaks(np.abs(img), len(truth))
    row = _trial_row(i, dets, truth, (1, 1))
    row["image"] = np.abs(img)
    return row


def _image_peaks(mag: np.ndarray, n: int) -> list[tuple[int, int]]:
    peak = np.ones_like(mag, dtype=bool)
    for dr in (-1, 0, 1):
        for dm in (-1, 0, 1):
            if dr or dm:
                peak &= mag >= np.roll(np.roll(mag, dr, 0), dm, 1)
    cells = np.argwhere(peak)
    order = np.argsort(-mag[cells[:, 0], cells[:, 1]], kind="stable")
    return [(int(a), int(b)) for a, b in cells[order][:n]]


def _sweep(sc: Scenario, out: Path | None, workers: int) -> TrialReport:
    p = sc.params
    table = []
    for K in p["K"]:
        for P in p["P"]:
            for L in p["L"]:
                sub = Scenario("temporal", dict(pri_tau=p["pri_tau"], bandwidth_Bh=p["bandwidth_Bh"],
                                                pulses_P=P, K=K, L=L),
                               sc.trials, sc.seed)
                rows = _run_trials(sub, workers)
                rate = float(np.mean([r["exact"] for r in rows]))
                table.append({"K": K, "P": P, "L": L, "success_rate": rate})
    agg = {"cells": len(table), "success_rate": min(t["success_rate"] for t in table)}
    rep = TrialReport(sc, table, agg)
    if out is not None:
        rep.artifacts["success_table"] = _write_csv(
            out / "success_table.csv", [[t["K"], t["P"], t["L"], t["success_rate"]] for t in table],
            "K,P,L,success_rate")
    return rep


# -- execution -------------------------------------------------------------

def worker_count() -> int:
    env = os.environ.get("SUBNYQ_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ScenarioError(f"SUBNYQ_THREADS must be an integer, got {env!r}") from None
        return max(1, n)
    return max(1, min(8, os.cpu_count() or 1))


def _run_trials(sc: Scenario, workers: int) -> list[dict]:
    cache: dict = {}
    fn = {"temporal": _trial_temporal, "rtot": _trial_rtot, "specx": _trial_specx,
          "sar": _trial_sar, "summer": lambda s, i: _trial_summer(s, i, cache)}[sc.module]

    def timed(i):
        t0 = time.perf_counter()
        try:
            row = fn(sc, i)
        except Exception as exc:
            raise RuntimeError(f"{sc.module} trial {i} failed: {exc}") from exc
        row["_runtime"] = time.perf_counter() - t0
        return row

    if workers == 1 or sc.trials == 1:
        rows = [timed(i) for i in range(sc.trials)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(timed, range(sc.trials)))
    return sorted(rows, key=lambda r: r["trial"])


def _aggregate(rows: list[dict]) -> dict:
    L = sum(r["hits"] + r["misses"] for r in rows)
    agg = {"trials": len(rows),
           "success_rate": float(np.mean([r["exact"] for r in rows])),
           "hit_rate": float(sum(r["hits"] for r in rows) / L) if L else 1.0,
           "false_alarms": int(sum(r["false_alarms"] for r in rows)),
           "mean_rmsle": float(np.mean([r["rmsle"] for r in rows]))}
    if "max_amplitude_error" in rows[0]:
        agg["max_amplitude_error"] = float(max(r["max_amplitude_error"] for r in rows))
    return agg


def _write_csv(path: Path, rows, header: str | None = None) -> str:
    arr = np.asarray(rows, dtype=float)
    np.savetxt(path, np.atleast_2d(arr), delimiter=",", fmt="%.10g",
               header=header or "", comments="")
    return path.name


def write_pgm(path: Path, img: np.ndarray) -> str:
    """8-bit binary PGM of |img| scaled to its maximum."""
    mag = np.abs(np.asarray(img, dtype=complex))
    top = mag.max()
    pix = np.zeros(mag.shape, np.uint8) if top == 0 else np.round(255 * mag / top).astype(np.uint8)
    h, w = pix.shape
    path.write_bytes(f"P5\n{w} {h}\n255\n".encode() + pix.tobytes())
    return path.name


def _artifacts(sc: Scenario, rows: list[dict], out: Path) -> dict:
    art = {}
    first = rows[0]
    if sc.module == "temporal":
        p = sc.params
        cfg = _temporal_cfg(p)
        seed = sc.seed * 100003
        s2 = _noise_from_snr(p["snr_db"], cfg.total_power_PT, cfg.nyquist_bins_N)
        scene, _ = _temporal_scene(cfg, p, rng_stream(seed, 2), s2)
        ref = nyquist_reference(cfg, scene, seed)
        art["delay_doppler_map"] = _write_csv(out / "delay_doppler_map.csv", ref.power)
        art["detections"] = _write_csv(out / "detections.csv", first["detections"] or [[]],
                                       "delay_bin,doppler_bin")
    elif sc.module == "sar":
        img = first.pop("image")
        art["image_pgm"] = write_pgm(out / "image.pgm", img)
        art["image_csv"] = _write_csv(out / "image.csv", img)
    elif sc.module == "specx":
        art["rem"] = _write_csv(out / "rem.csv", first.pop("rem"), "y")
        bands = [[e["epoch"], 0, lo, hi] for e in first["epochs"] for lo, hi in e["F_C"]]
        bands += [[e["epoch"], 1, lo, hi] for e in first["epochs"] for lo, hi in e["F_R"]]
        art["spectra"] = _write_csv(out / "spectra.csv", bands, "epoch,is_radar,lo_hz,hi_hz")
    elif sc.module in ("rtot", "summer"):
        art["detections"] = _write_csv(out / "detections.csv", first["detections"] or [[]])
    return art


def run(scenario, out_dir=None, workers: int | None = None) -> TrialReport:
    """Run every trial of a scenario and write its artifacts under ``out_dir``."""
    sc = scenario if isinstance(scenario, Scenario) else load_scenario(scenario)
    workers = worker_count() if workers is None else workers
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    if sc.module == "sweep":
        rep = _sweep(sc, out, workers)
    else:
        rows = _run_trials(sc, workers)
        runtimes = [r.pop("_runtime") for r in rows]
        art = _artifacts(sc, rows, out) if out is not None else {}
        for r in rows:
            r.pop("image", None)
            r.pop("rem", None)
        rep = TrialReport(sc, rows, _aggregate(rows), art, runtimes)
    if out is not None:
        (out / "report.json").write_text(rep.to_json())
        (out / "runtimes.json").write_text(json.dumps(rep.runtimes))
    return rep
