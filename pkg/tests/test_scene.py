import numpy as np
import pytest

from subnyq.scene import (ClutterModel, RadarConfig, Target, TargetScene, check_assumptions,
                          on_grid_target, radar_config_from_dict, random_on_grid_scene,
                          raised_cosine_spectrum, rng_stream, scene_from_dict,
                          synthesize_fourier, synthesize_time)


def naive_coefficients(cfg, scene, kappa):
    tau = cfg.pri_tau
    out = np.zeros((len(kappa), cfg.pulses_P), complex)
    for i, k in enumerate(kappa):
        for p in range(cfg.pulses_P):
            acc = 0
            for t in scene.targets:
                acc += (t.amplitude_alpha_l * np.exp(-2j * np.pi * k * t.delay_tau_l / tau)
                        * np.exp(-1j * t.doppler_nu_l * p * tau))
            out[i, p] = cfg.pulse_spectrum_H[k] / tau * acc
    return out


def test_config_bins_and_power():
    cfg = RadarConfig(10e-6, 50, 20e6)
    assert cfg.nyquist_bins_N == 200
    assert cfg.transmit_power() == pytest.approx(cfg.total_power_PT, rel=1e-12)
    assert np.allclose(np.abs(cfg.pulse_spectrum_H) ** 2, cfg.total_power_PT * cfg.pri_tau / 200)


def test_raised_cosine_keeps_power():
    H = raised_cosine_spectrum(64, 1e-6, 2.0, 0.5)
    assert np.sum(np.abs(H) ** 2) / 1e-6 == pytest.approx(2.0)
    assert np.all(np.abs(H) > 0)


@pytest.mark.parametrize("bad", [dict(pri_tau=0), dict(bandwidth_Bh=-1), dict(pulses_P=0)])
def test_config_rejects(bad):
    args = dict(pri_tau=1e-6, pulses_P=4, bandwidth_Bh=16e6) | bad
    with pytest.raises(ValueError):
        RadarConfig(**args)


def test_empty_scene_is_zero(small_cfg):
    d = synthesize_fourier(small_cfg, TargetScene(), np.arange(16), 0)
    assert np.all(d.coeffs == 0)


def test_dc_target_gives_spectrum(small_cfg):
    sc = TargetScene((Target(0.0, 0.0, 1.0),))
    d = synthesize_fourier(small_cfg, sc, np.arange(16), 0)
    expect = small_cfg.pulse_spectrum_H / small_cfg.pri_tau
    assert np.allclose(d.coeffs, expect[:, None], rtol=1e-14)


def test_matches_naive_sum(small_cfg):
    sc, _ = random_on_grid_scene(small_cfg, 3, rng_stream(5, 2))
    kap = np.array([0, 3, 7, 11, 15])
    d = synthesize_fourier(small_cfg, sc, kap, 0)
    ref = naive_coefficients(small_cfg, sc, kap)
    assert np.linalg.norm(d.coeffs - ref) / np.linalg.norm(ref) < 1e-12


def test_off_grid_matches_naive(small_cfg):
    sc = TargetScene((Target(0.37e-6, 1.1e5, 0.5 - 0.2j), Target(0.81e-6, -2.2e6, 1j)))
    kap = np.arange(16)
    ref = naive_coefficients(small_cfg, sc, kap)
    assert np.allclose(synthesize_fourier(small_cfg, sc, kap).coeffs, ref, rtol=1e-12)


def test_rejects_kappa_out_of_range(small_cfg):
    with pytest.raises(ValueError):
        synthesize_fourier(small_cfg, TargetScene(), [0, 16])


def test_time_frames_match_fourier(small_cfg):
    sc = TargetScene((Target(small_cfg.pri_tau / 2, 0.0, 1.0),))
    frames = synthesize_time(small_cfg, sc, small_cfg.bandwidth_Bh)
    spec = np.fft.fft(frames, axis=1) / frames.shape[1]
    ref = synthesize_fourier(small_cfg, sc, np.arange(16)).coeffs
    assert np.allclose(spec.T, ref, atol=1e-9 * np.abs(ref).max())


def test_time_oversampled_and_empty(small_cfg):
    frames = synthesize_time(small_cfg, TargetScene(), 2 * small_cfg.bandwidth_Bh)
    assert frames.shape == (4, 32) and np.all(frames == 0)
    with pytest.raises(ValueError):
        synthesize_time(small_cfg, TargetScene(), small_cfg.bandwidth_Bh / 2)


def test_demo_bins():
    cfg = RadarConfig(10e-6, 50, 20e6)
    assert cfg.nyquist_bins_N == round(cfg.pri_tau * cfg.bandwidth_Bh)


def test_parseval(small_cfg):
    sc, _ = random_on_grid_scene(small_cfg, 2, rng_stream(9, 2))
    frames = synthesize_time(small_cfg, sc, small_cfg.bandwidth_Bh)
    c = synthesize_fourier(small_cfg, sc, np.arange(16)).coeffs
    ns = frames.shape[1]
    # frame energy (per-sample sum / ns) equals the coefficient energy
    assert np.sum(np.abs(frames) ** 2) / ns == pytest.approx(np.sum(np.abs(c) ** 2), rel=1e-6)


def test_noise_whiteness(small_cfg):
    s2 = 2.0
    sc = TargetScene(noise_var_sigma_n2=s2)
    draws = np.concatenate([synthesize_fourier(small_cfg, sc, np.arange(16), s).coeffs
                            for s in range(2500)], axis=1)      # 16 x 10^4
    C = draws @ draws.conj().T / draws.shape[1]
    ref = s2 / small_cfg.pri_tau * np.eye(16)
    assert np.linalg.norm(C - ref) / np.linalg.norm(ref) < 0.05


def test_seeded_streams_are_disjoint(small_cfg):
    sc = TargetScene(clutter=ClutterModel(5, 1.0), noise_var_sigma_n2=1.0)
    a = synthesize_fourier(small_cfg, sc, np.arange(16), 3).coeffs
    b = synthesize_fourier(small_cfg, sc, np.arange(16), 3).coeffs
    assert np.array_equal(a, b)
    c = synthesize_fourier(small_cfg, sc, np.arange(16), 4).coeffs
    assert not np.allclose(a, c)


def test_assumption_checker(small_cfg):
    tau = small_cfg.pri_tau
    sc = TargetScene((Target(1.5 * tau, 0.0), Target(0.0, 4 / tau), Target(0.0, 4 / tau)))
    msgs = check_assumptions(small_cfg, sc)
    assert any("delay" in m for m in msgs)
    assert any("Doppler" in m for m in msgs)
    assert any("duplicate" in m for m in msgs)
    assert check_assumptions(small_cfg, TargetScene((on_grid_target(small_cfg, 3, 1),))) == []


def test_scene_from_dict(small_cfg):
    d = {"targets": [{"r": 2, "u": 1, "amplitude": [0, 1]}, {"delay": 1e-7, "doppler": 0.0}],
         "clutter": {"count": 3, "power": 0.5}, "noise_var": 0.1}
    sc = scene_from_dict(d, small_cfg)
    assert sc.L == 2 and sc.targets[0].amplitude_alpha_l == 1j
    assert sc.clutter.count_C == 3 and sc.noise_var_sigma_n2 == 0.1
    cfg = radar_config_from_dict({"pri_tau": 1e-6, "pulses_P": 4, "bandwidth_Bh": 16e6,
                                  "pulse_spectrum": "raised_cosine"})
    assert cfg.nyquist_bins_N == 16
