import math

import numpy as np
import pytest
from scipy import stats

from fdcache.analytics import laplace_I_dx, p_hit_of, p_suc_lower_bound, transform_arguments
from fdcache.core import ScenarioConfig, split_stream
from fdcache.geometry import MarkedNetwork
from fdcache.montecarlo import (LaplaceTarget, Snapshot, estimate_laplace, estimate_p_suc,
                                interference_at_dl, interference_at_sbs, run_snapshot, simulate,
                                write_samples_csv)


@pytest.fixture
def cfg():
    return ScenarioConfig.table1()


def _snapshot(cfg, miss, others=(), ul_angle=math.pi / 3, gains=None):
    """Hand-built snapshot: typical SBS at the origin plus ``others``.

    ``others`` holds (sbs_xy, ul_xy, miss) tuples; all fading gains are 1.
    """
    n = len(others)
    sbs = [[0.0, 0.0]] + [list(o[0]) for o in others]
    ul = [[cfg.r_ul * math.cos(ul_angle), cfg.r_ul * math.sin(ul_angle)]] + [list(o[1]) for o in others]
    dl = [[cfg.r_dl, 0.0]] + [[o[0][0], o[0][1] + cfg.r_dl] for o in others]
    net = MarkedNetwork(np.array(sbs).reshape(-1, 2), np.array(ul).reshape(-1, 2),
                        np.array(dl).reshape(-1, 2), np.array([miss] + [o[2] for o in others]), 300.0)
    g = dict(sbs_to_sbs=np.ones(n), ul_to_sbs=np.ones(n), sbs_to_dl=np.ones(n), ul_to_dl=np.ones(n),
             si=2e-6, ini=1.0, desired_ul=1.0, desired_dl=1.0)
    g.update(gains or {})
    return Snapshot(net, g, miss, None, math.nan)


def test_hit_without_interferers_has_no_ul_hop(cfg):
    snap = _snapshot(cfg, miss=False)
    with pytest.raises(ValueError):
        interference_at_sbs(snap, cfg)
    assert interference_at_dl(snap, cfg) == 0.0


def test_miss_without_interferers_is_pure_si(cfg):
    snap = _snapshot(cfg, miss=True)
    assert interference_at_sbs(snap, cfg) == pytest.approx(cfg.rho_dl * 2e-6, rel=1e-15)


def test_ini_only_uses_law_of_cosines(cfg):
    phi = 2.0
    snap = _snapshot(cfg, miss=True, ul_angle=phi)
    # angle between the typical UL and DL nodes seen from the SBS
    d2 = cfg.r_ul**2 + cfg.r_dl**2 - 2 * cfg.r_ul * cfg.r_dl * math.cos(phi)
    assert interference_at_dl(snap, cfg) == pytest.approx(cfg.rho_ul * d2 ** (-cfg.alpha2 / 2),
                                                          rel=1e-12)


def test_single_interferer_hand_computed(cfg):
    y, u = (100.0, 0.0), (100.0, 20.0)
    snap = _snapshot(cfg, miss=True, others=[(y, u, True)])
    r_yx, r_ux = 100.0, math.hypot(100, 20)
    expect_x = cfg.rho_dl * r_yx**-3 + cfg.rho_ul * r_ux**-3 + cfg.rho_dl * 2e-6
    assert interference_at_sbs(snap, cfg) == pytest.approx(expect_x, rel=1e-12)
    d = (cfg.r_dl, 0.0)
    r_yd = math.hypot(100 - d[0], 0)
    r_ud = math.hypot(100 - d[0], 20)
    r_ini = math.dist(snap.network.ul[0], d)
    expect_d = cfg.rho_dl * r_yd**-3 + cfg.rho_ul * r_ud**-4 + cfg.rho_ul * r_ini**-4
    assert interference_at_dl(snap, cfg) == pytest.approx(expect_d, rel=1e-12)


def test_hit_interferers_only_contribute_sbs_terms(cfg):
    others = [((80.0, 10.0), (80.0, 30.0), False), ((-50.0, 60.0), (-70.0, 60.0), False)]
    snap = _snapshot(cfg, miss=False, others=others)
    d = np.array([cfg.r_dl, 0.0])
    expect = sum(cfg.rho_dl * np.linalg.norm(np.array(o[0]) - d) ** -3 for o in others)
    assert interference_at_dl(snap, cfg) == pytest.approx(expect, rel=1e-12)


def test_run_snapshot_full_hit(cfg):
    rng = np.random.default_rng(0)
    for _ in range(20):
        snap = run_snapshot(cfg, 1.0, rng)
        assert not snap.typical_miss and snap.sir_ul is None
        assert snap.sir_dl >= 0


def test_run_snapshot_deterministic(cfg):
    a = run_snapshot(cfg, 0.3, np.random.default_rng(42))
    b = run_snapshot(cfg, 0.3, np.random.default_rng(42))
    assert a.sir_dl == b.sir_dl and a.sir_ul == b.sir_ul
    assert np.array_equal(a.network.sbs, b.network.sbs)
    assert np.array_equal(a.network.cache_miss, b.network.cache_miss)


def test_run_snapshot_marks(cfg):
    snap = run_snapshot(cfg, 0.0, np.random.default_rng(3))
    net = snap.network
    assert np.allclose(np.hypot(*(net.ul - net.sbs).T), cfg.r_ul, atol=1e-9, rtol=0)
    assert np.allclose(np.hypot(*(net.dl - net.sbs).T), cfg.r_dl, atol=1e-9, rtol=0)
    assert snap.typical_miss and snap.sir_ul is not None
    sir = cfg.rho_ul * cfg.r_ul**-3 * snap.gains["desired_ul"] / interference_at_sbs(snap, cfg)
    assert snap.sir_ul == pytest.approx(sir, rel=1e-12)


def test_sparse_network_always_succeeds():
    cfg = ScenarioConfig.table1(lambda_sbs=1e-9, sim_window_radius=300.0)
    ok = [run_snapshot(cfg, 1.0, np.random.default_rng(i)).sir_dl > cfg.theta for i in range(200)]
    assert all(ok)


def test_interference_drops_with_hits(cfg):
    means = []
    for p in (0.0, 0.25, 0.5, 0.75, 1.0):
        # common random numbers: the same uniforms decide every cache state
        vals = [interference_at_dl(run_snapshot(cfg, p, np.random.default_rng(i)), cfg)
                for i in range(300)]
        means.append(np.mean(vals))
    assert all(b <= a for a, b in zip(means, means[1:]))


def test_dl_orientation_is_immaterial(cfg):
    s = transform_arguments(cfg)[1]
    a, b = [], []
    for i in range(800):
        snap = run_snapshot(cfg, 1.0, np.random.default_rng(i))
        a.append(interference_at_dl(snap, cfg))
        snap = run_snapshot(cfg, 1.0, np.random.default_rng(10_000 + i))
        snap.network.dl[0] = (0.0, cfg.r_dl)
        b.append(interference_at_dl(snap, cfg))
    assert stats.ks_2samp(np.exp(-s * np.array(a)), np.exp(-s * np.array(b))).pvalue > 0.01


def test_small_threshold_gives_success(cfg):
    est = estimate_p_suc(cfg.replace(theta_db=-80.0), seed=1, n=2000)
    assert est.mean > 0.999


def test_requires_enough_snapshots(cfg):
    with pytest.raises(ValueError):
        estimate_p_suc(cfg, n=99)


def test_ci_shrinks_with_root_n(cfg):
    small = estimate_p_suc(cfg, seed=5, n=2048)
    large = estimate_p_suc(cfg, seed=5, n=4 * 2048)
    assert small.ci_halfwidth / large.ci_halfwidth == pytest.approx(2.0, rel=0.2)


def test_estimators_agree(cfg):
    ind = estimate_p_suc(cfg, seed=2, n=8192, mode="uncorrelated")
    cond = estimate_p_suc(cfg, seed=2, n=8192, mode="uncorrelated", estimator="conditional")
    assert cond.ci_halfwidth < ind.ci_halfwidth
    assert abs(ind.mean - cond.mean) < 3 * ind.ci_halfwidth


def test_uncorrelated_matches_bound_at_small_n(cfg):
    c = cfg.with_kappa(0.6)
    est = estimate_p_suc(c, seed=9, n=8192, mode="uncorrelated", estimator="conditional")
    assert est.agrees_with(p_suc_lower_bound(c))


def test_laplace_at_zero(cfg):
    for t in LaplaceTarget:
        assert estimate_laplace(cfg, 0.3, 0.0, t, seed=1, n=500).mean == 1.0


def test_laplace_reject_and_force_agree(cfg):
    s = transform_arguments(cfg)[1]
    rej = estimate_laplace(cfg, 0.3, s, "I_dx_miss", seed=4, n=8192)
    force = estimate_laplace(cfg, 0.3, s, "I_dx_miss", seed=4, n=8192, conditioning="force")
    assert abs(rej.mean - force.mean) < 3 * math.hypot(rej.ci_halfwidth, force.ci_halfwidth)


def test_laplace_without_si_matches_dl_field(cfg):
    # equal exponents and no SI: the SBS and the DL node see the same field law
    c = cfg.replace(alpha2=cfg.alpha1, si_attenuation_db=400.0)
    s = transform_arguments(c)[1]
    x = estimate_laplace(c, 0.3, s, "I_x_miss", seed=6, n=8192, conditioning="force")
    d = estimate_laplace(c, 0.3, s, "I_dx", seed=7, n=8192, conditioning="force")
    assert abs(x.mean - d.mean) < x.ci_halfwidth + d.ci_halfwidth
    assert d.agrees_with(laplace_I_dx(s, c, 0.3))


def test_parallel_determinism(cfg):
    one = simulate(cfg, seed=3, n=5000, workers=1)
    three = simulate(cfg, seed=3, n=5000, workers=3)
    for key in one:
        assert np.array_equal(one[key], three[key], equal_nan=True)
    assert estimate_p_suc(cfg, seed=3, n=5000) == estimate_p_suc(cfg, seed=3, n=5000, workers=4)


def test_window_growth_keeps_inner_points(cfg):
    small = run_snapshot(cfg.replace(sim_window_radius=300.0), 0.3, np.random.default_rng(1))
    assert small.network.window_radius == 300.0
    a = simulate(cfg.replace(sim_window_radius=300.0), seed=8, n=1024)
    b = simulate(cfg.replace(sim_window_radius=600.0), seed=8, n=1024)
    # a wider window only adds interferers
    assert np.all(b["sir_dl"] <= a["sir_dl"] * (1 + 1e-12))
    assert np.array_equal(a["typical_miss"], b["typical_miss"])


def test_geographic_cache_mode(cfg):
    c = cfg.replace(cache_sampling_mode="geographic")
    res = simulate(c, seed=2, n=20_000)
    miss = res["typical_miss"]
    p = p_hit_of(c)
    assert abs((1 - miss.mean()) - p) < 3 * math.sqrt(p * (1 - p) / miss.size)


def test_sample_dump(tmp_path, cfg):
    res = simulate(cfg, seed=0, n=200)
    path = tmp_path / "samples.csv"
    write_samples_csv(path, res)
    lines = path.read_text().splitlines()
    assert lines[0] == "snapshot_index,typical_miss,sir_ul_db,sir_dl_db,success"
    assert len(lines) == 201


def test_split_stream_contract():
    assert np.array_equal(split_stream(5, 0).random(1000), split_stream(5, 0).random(1000))
