import numpy as np
import pytest

from subnyq.oracles import brute_force_sparse
from subnyq.scene import RadarConfig, Target, TargetScene, rng_stream
from subnyq.summer import (MODES, ArrayGeometry, MimoConfig, build_dictionaries, doppler_steering,
                           grid_target, make_mimo, match_detections, measurement_matrix,
                           mode_geometry, omp3d, random_geometry, random_grid_scene,
                           stacked_dictionary, synthesize_mimo, ula_geometry)


@pytest.fixture
def cfg8():
    # N = 8 bins, P = 4 pulses
    return RadarConfig(1e-6, 4, 8e6)


@pytest.fixture
def mimo(cfg8):
    return make_mimo(cfg8, random_geometry(4, 5, 8, 10, seed=0), 4, seed=0)


def _naive(cfgM, scene):
    g, cfg = cfgM.geometry, cfgM.cfg
    tau = cfg.pri_tau
    y = np.zeros((g.M, g.Q, cfg.pulses_P, cfgM.K), complex)
    for t in scene.targets:
        th, fd = np.sin(t.azimuth_theta_l), t.doppler_nu_l / (2 * np.pi)
        for m in range(g.M):
            fm = cfgM.per_tx_carriers_fm[m]
            for q in range(g.Q):
                b = g.tx_positions[m] + g.rx_positions[q]
                for p in range(cfg.pulses_P):
                    for k, kap in enumerate(cfgM.kappa):
                        y[m, q, p, k] += (t.amplitude_alpha_l * np.exp(2j * np.pi * b * th)
                                          * np.exp(2j * np.pi * fd * p * tau)
                                          * np.exp(-2j * np.pi * (kap / tau + fm) * t.delay_tau_l))
    return y


def test_geometry_validation():
    with pytest.raises(ValueError):
        ArrayGeometry((0.0, 1.0, 2.0), (0.0,), 2, 4)
    with pytest.raises(ValueError):
        ArrayGeometry((0.0, 9.0), (0.0,), 2, 4)


def test_ula_virtual_positions():
    g = ula_geometry(4, 5)
    assert np.allclose(np.sort(g.beta().ravel()), np.arange(20) / 2)


def test_mode_presets():
    for mode, p in MODES.items():
        g = mode_geometry(mode, seed=1)
        assert (g.M, g.Q, g.virtual_T, g.virtual_R) == (p["M"], p["Q"], p["T"], p["R"])
        assert max(g.tx_positions + g.rx_positions) <= g.aperture
    assert mode_geometry(3, seed=1) == mode_geometry(3, seed=1)


def test_config_validation(cfg8):
    g = ula_geometry(2, 2)
    with pytest.raises(ValueError):
        MimoConfig(cfg8, g, (0, 0), 2, (0, 1))
    with pytest.raises(ValueError):
        MimoConfig(cfg8, g, (0, 1), 9, tuple(range(9)))
    with pytest.raises(ValueError):
        MimoConfig(cfg8, g, (0, 1), 1, (4,))


def test_kappa_alias_free(cfg8):
    for seed in range(50):
        m = make_mimo(cfg8, ula_geometry(2, 2), 3, seed)
        assert np.gcd.reduce(np.diff(m.kappa)) == 1
        assert len(set(m.carrier_index)) == 2


def test_empty_scene_zero(mimo):
    assert not np.any(synthesize_mimo(mimo, TargetScene(())))


def test_origin_target_all_ones(mimo):
    y = synthesize_mimo(mimo, TargetScene((Target(0.0, 0.0, 1.0, 0.0),)))
    assert np.allclose(y, 1.0)


def test_matches_naive_loop(mimo):
    rng = np.random.default_rng(3)
    tg = tuple(Target(rng.uniform(0, 1e-6), rng.uniform(-1e6, 1e6), complex(*rng.standard_normal(2)),
                      rng.uniform(-1.5, 1.5)) for _ in range(2))
    sc = TargetScene(tg)
    assert np.allclose(synthesize_mimo(mimo, sc), _naive(mimo, sc), atol=1e-12)


def test_azimuth_out_of_range(mimo):
    with pytest.raises(ValueError):
        synthesize_mimo(mimo, TargetScene((Target(0.0, 0.0, 1.0, 2.0),)))


def test_partial_dft_for_zero_carrier(cfg8):
    m = make_mimo(cfg8, ula_geometry(4, 5), 4, seed=2, carriers="ordered")
    A, B = build_dictionaries(m)
    n = np.arange(m.TN)
    F = np.exp(-2j * np.pi * np.outer(np.arange(m.TN), n) / m.TN)
    assert np.allclose(A[0], F[np.asarray(m.kappa) % m.TN])
    for Am in A:
        assert np.allclose(np.linalg.norm(Am, axis=0), np.sqrt(4))


def test_kronecker_consistency(mimo):
    D1, D2 = stacked_dictionary(mimo), doppler_steering(mimo)
    for s, r, u in [(0, 0, 0), (5, 13, 2), (31, 79, 3)]:
        y = synthesize_mimo(mimo, TargetScene((grid_target(mimo, s, r, u),)))
        model = np.outer(D1[:, r * mimo.TN + s], D2[u])
        assert np.allclose(measurement_matrix(y), model, atol=1e-9)


def test_resolution_grids(mimo):
    assert np.allclose(np.diff(mimo.delay_grid()), 1 / (mimo.T * mimo.cfg.bandwidth_Bh))
    assert np.allclose(np.diff(mimo.azimuth_grid()), 2 / mimo.TR)
    tau, P = mimo.cfg.pri_tau, mimo.cfg.pulses_P
    assert np.allclose(np.diff(mimo.doppler_grid()), 1 / (P * tau))


def test_single_target_minimal():
    cfg = RadarConfig(1e-6, 2, 4e6)
    hits = 0
    for seed in range(200):
        g = random_geometry(2, 1, 2, 1, seed)
        m = make_mimo(cfg, g, 2, seed)
        sc, truth = random_grid_scene(m, 1, rng_stream(seed, 9))
        hits += omp3d(synthesize_mimo(m, sc), m, 1).support == truth
    assert hits == 200


def test_empty_support_zero_iterations(mimo):
    res = omp3d(synthesize_mimo(mimo, TargetScene(())), mimo, 0)
    assert res.support == [] and res.delays.size == 0


def test_two_targets_vs_brute_force(cfg8):
    m = make_mimo(cfg8, random_geometry(4, 5, 4, 5, seed=0), 4, seed=0)
    D1, D2 = stacked_dictionary(m), doppler_steering(m)
    full = np.kron(D1, D2.T)
    nu = D2.shape[0]
    for seed in range(3):
        sc, truth = random_grid_scene(m, 2, rng_stream(seed, 9))
        y = synthesize_mimo(m, sc)
        sol = brute_force_sparse(measurement_matrix(y).reshape(-1), full, 2,
                                 max_combinations=4 * 10**6)
        bf = sorted((c // nu % m.TN, c // nu // m.TN, c % nu) for c in sol.support)
        assert sorted(omp3d(y, m, 2, D1=D1).support) == bf == sorted(truth)


def test_estimates_on_grid(mimo):
    sc, truth = random_grid_scene(mimo, 2, rng_stream(4, 9))
    res = omp3d(synthesize_mimo(mimo, sc), mimo, 2)
    for (s, r, u), d, a, f in zip(res.support, res.delays, res.azimuths, res.dopplers):
        assert d == pytest.approx(mimo.cfg.pri_tau * s / mimo.TN)
        assert a == pytest.approx(-1 + 2 * r / mimo.TR)
        assert f == pytest.approx(mimo.doppler_grid()[u])


def test_identifiability_regime_small_run(cfg8):
    ok = 0
    for seed in range(100):
        m = make_mimo(cfg8, random_geometry(4, 5, 8, 10, seed), 4, seed)
        sc, truth = random_grid_scene(m, 2, rng_stream(seed, 9))
        ok += sorted(omp3d(synthesize_mimo(m, sc), m, 2).support) == sorted(truth)
    assert ok >= 99


def test_noise_variance():
    cfg = RadarConfig(1e-6, 4, 8e6)
    m = make_mimo(cfg, ula_geometry(4, 5), 4)
    y = synthesize_mimo(m, TargetScene((), noise_var_sigma_n2=2.0), seed=3)
    assert np.mean(np.abs(y) ** 2) == pytest.approx(2.0, rel=0.15)


def test_matching_rules():
    truth = [(10, 4, 2), (20, 8, 1)]
    rep = match_detections(truth, truth, (1, 1, 1))
    assert rep.hits == 2 and rep.rmsle == 0
    rep = match_detections([(11, 4, 2)], [(10, 4, 2)], (1, 1, 1))
    assert rep.hits == 1 and rep.rmsle == pytest.approx(1.0)
    rep = match_detections([(12, 4, 2)], [(10, 4, 2)], (1, 1, 1))
    assert (rep.hits, rep.misses, rep.false_alarms) == (0, 1, 1)
    with pytest.raises(ValueError):
        match_detections([], [], (0, 1, 1))
