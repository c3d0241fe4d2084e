import numpy as np
import pytest

from subnyq.clutter import (clutter_covariance, covariance_lags, scnr_focused, scnr_input,
                            scnr_scenario, scnr_whitened, unwhiten, unwhitened_recover, whiten,
                            whitened_recover)
from subnyq.focusing import recover_temporal
from subnyq.metrics import match_detections
from subnyq.scene import (ClutterModel, RadarConfig, TargetScene, random_on_grid_scene,
                          rng_stream, synthesize_fourier)
from subnyq.xampling import FrequencyIndexSet, XampledData, select_kappa


@pytest.fixture
def cfg():
    return RadarConfig(1e-6, 8, 16e6)


def test_clutter_free_is_scaled_identity(cfg):
    cov = clutter_covariance(ClutterModel(10, 0.0), 2.0, cfg)
    assert np.allclose(cov.M, 2.0 / cfg.pri_tau * np.eye(8))


def test_static_clutter_rank_one(cfg):
    cl = ClutterModel(4, 0.5)
    cov = clutter_covariance(cl, 1e-6, cfg)
    g = np.mean(np.abs(cfg.pulse_spectrum_H) ** 2) / cfg.pri_tau**2
    ref = 4 * 0.5 * g * np.ones((8, 8)) + 1e-6 / cfg.pri_tau * np.eye(8)
    assert np.allclose(cov.M, ref)


def test_hermitian_toeplitz(cfg):
    cov = clutter_covariance(ClutterModel(5, 1.0, 3e5, 2e5), 1e-7, cfg)
    M = cov.M
    assert np.array_equal(M, M.conj().T)
    for d in range(-7, 8):
        assert np.ptp(np.diagonal(M, d)) < 1e-12 * abs(M[0, 0])


def test_covariance_matches_monte_carlo(cfg):
    cl = ClutterModel(20, 0.05, 2e5, 1e5)
    s2 = 1e-7
    sc = TargetScene(clutter=cl, noise_var_sigma_n2=s2)
    rows = [synthesize_fourier(cfg, sc, [3], seed).coeffs[0] for seed in range(10000)]
    X = np.array(rows)                    # draws x P
    # M[p1, p2] = E c_{p1} conj(c_{p2})
    emp = X.T @ X.conj() / len(X)
    M = clutter_covariance(cl, s2, cfg).M
    assert np.linalg.norm(emp - M) / np.linalg.norm(M) < 0.05


def test_whiten_identity_is_noop(cfg):
    cov = clutter_covariance(None, cfg.pri_tau, cfg)
    x = rng_stream(0, 9).standard_normal((3, 8)) + 0j
    assert np.allclose(whiten(x, cov), x)


def test_whitened_disturbance_is_white():
    data, cov, _ = scnr_scenario(0)
    draws = []
    for seed in range(625):              # 16 tones each -> 10^4 rows
        d, _, _ = scnr_scenario(seed, scnr_db=-300)
        draws.append(whiten(d, cov))
    W = np.concatenate(draws)
    emp = W.T @ W.conj() / len(W)
    assert np.linalg.norm(emp - np.eye(16)) / 4.0 < 0.05


def test_whiten_roundtrip(cfg):
    cov = clutter_covariance(ClutterModel(8, 1.0, 1e5, 5e4), 1e-6, cfg)
    x = rng_stream(1, 9).standard_normal((4, 8)) * (1 + 1j)
    assert np.allclose(unwhiten(whiten(x, cov), cov), x, atol=1e-9)


def test_non_pd_rejected(cfg):
    cov = clutter_covariance(ClutterModel(4, 1.0), 0.0, cfg)    # rank one
    with pytest.raises(ValueError):
        cov.inv_sqrt()


def test_no_clutter_matches_focusing(cfg):
    sc, _ = random_on_grid_scene(cfg, 2, rng_stream(6, 2))
    d = synthesize_fourier(cfg, sc, select_kappa(cfg, 8, "direct", 6))
    cov = clutter_covariance(None, 3.0 * cfg.pri_tau, cfg)
    a = whitened_recover(d, cov, max_iter=2)
    b = recover_temporal(d, L_expected=2, max_iter=2)
    assert a.support_set() == b.support_set()


def test_zero_input_empty(cfg):
    d = XampledData(np.zeros((4, 8)), FrequencyIndexSet([0, 1, 2, 3], N=16), cfg)
    cov = clutter_covariance(ClutterModel(4, 1.0), 1e-6, cfg)
    assert whitened_recover(d, cov, gamma=1.0).support == []


def test_whitening_beats_plain_focusing():
    hw = hu = 0
    for seed in range(200):
        d, cov, truth = scnr_scenario(seed)
        hw += match_detections(whitened_recover(d, cov, max_iter=2), truth).hits
        hu += match_detections(unwhitened_recover(d, max_iter=2), truth).hits
    assert hw / 400 >= 0.9 and hu / 400 <= 0.5


def test_scnr_improves():
    gains = []
    for seed in range(50):
        d, cov, truth = scnr_scenario(seed, scnr_db=-300)
        cfg = d.cfg_ref
        r, u = truth[0]
        s = np.exp(-1j * cfg.doppler_on_grid(u) * np.arange(16) * cfg.pri_tau)
        gains.append(scnr_whitened(s, cov) / scnr_input(s, cov))
        assert scnr_whitened(s, cov) >= scnr_focused(s, cov, u, cfg) * (1 - 1e-9)
    assert np.mean(gains) >= 1.0


def test_lags_shape(cfg):
    assert covariance_lags(None, 1.0, cfg).shape == (8,)
