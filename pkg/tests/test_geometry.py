import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from fdcache.caching import zipf_catalog
from fdcache.geometry import (MarkedNetwork, attach_marks, distance, sample_file_process,
                              sample_ppp, write_snapshot_csv)


def test_zero_density_is_empty():
    assert sample_ppp(0.0, 300, np.random.default_rng(0)).shape == (0, 2)


def test_negative_density_rejected():
    with pytest.raises(ValueError):
        sample_ppp(-1e-4, 300, np.random.default_rng(0))


def test_ppp_mean_count():
    rng = np.random.default_rng(3)
    mean = 5e-4 * math.pi * 300**2
    assert round(mean, 2) == 141.37
    counts = np.array([len(sample_ppp(5e-4, 300, rng)) for _ in range(10_000)])
    se = math.sqrt(mean / counts.size)
    assert abs(counts.mean() - mean) < 3 * se


def test_ppp_support():
    pts = sample_ppp(1e-2, 50, np.random.default_rng(4), center=(10.0, -3.0))
    assert np.all(distance(pts, (10.0, -3.0)) <= 50)


def test_ppp_deterministic():
    a = sample_ppp(1e-3, 200, np.random.default_rng(9))
    b = sample_ppp(1e-3, 200, np.random.default_rng(9))
    assert np.array_equal(a, b)


def test_translation_counts():
    # two disjoint equal-area windows: count histograms agree (chi-square)
    rng = np.random.default_rng(5)
    a = [len(sample_ppp(2e-3, 40, rng, (0, 0))) for _ in range(3000)]
    b = [len(sample_ppp(2e-3, 40, rng, (500, 500))) for _ in range(3000)]
    edges = np.array([0, 6, 8, 10, 12, 14, 100])
    ha, _ = np.histogram(a, edges)
    hb, _ = np.histogram(b, edges)
    assert stats.chi2_contingency(np.vstack([ha, hb]))[1] > 0.01


def test_empty_marks():
    net = attach_marks(np.empty((0, 2)), 20, 5, np.random.default_rng(0))
    assert len(net) == 0


def test_mark_distances():
    sbs = sample_ppp(1e-3, 300, np.random.default_rng(1))
    net = attach_marks(sbs, 20.0, 5.0, np.random.default_rng(2))
    assert np.allclose(distance(net.ul, net.sbs), 20.0, atol=1e-9, rtol=0)
    assert np.allclose(distance(net.dl, net.sbs), 5.0, atol=1e-9, rtol=0)
    assert net.cache_miss.all()


def test_mark_angle_uniform():
    sbs = np.zeros((10_000, 2))
    net = attach_marks(sbs, 20.0, 5.0, np.random.default_rng(7))
    ang = np.mod(np.arctan2(net.ul[:, 1], net.ul[:, 0]), 2 * np.pi)
    assert stats.kstest(ang, stats.uniform(0, 2 * np.pi).cdf).pvalue > 0.01


def test_network_length_check():
    with pytest.raises(ValueError):
        MarkedNetwork(np.zeros((2, 2)), np.zeros((2, 2)), np.zeros((1, 2)), np.ones(2, bool), 1.0)


def test_distance_basics():
    assert distance((0, 0), (3, 4)) == 5
    assert distance((1.5, 2), (1.5, 2)) == 0


coords = st.floats(-1e4, 1e4, allow_nan=False)


@given(coords, coords, coords, coords)
def test_distance_symmetric(a, b, c, d):
    assert distance((a, b), (c, d)) == distance((c, d), (a, b))


def test_file_process_empty():
    cat = zipf_catalog(10, 0.7, 0.0)
    fp = sample_file_process(cat, 100, np.random.default_rng(0))
    assert len(fp.points) == 0


def test_file_marks_follow_popularity():
    cat = zipf_catalog(5, 1.0, 0.05)
    rng = np.random.default_rng(8)
    fp = sample_file_process(cat, 200, rng)
    n = len(fp.points)
    for i in range(1, 6):
        frac = np.mean(fp.file_index == i)
        p = cat.request_probs[i - 1]
        assert abs(frac - p) < 3 * math.sqrt(p * (1 - p) / n)


def test_per_file_density():
    cat = zipf_catalog(4, 0.7, 0.01)
    rng = np.random.default_rng(6)
    area = math.pi * 60**2
    counts = np.array([[len(sample_file_process(cat, 60, rng).of_file(i)) for i in range(1, 5)]
                       for _ in range(1000)])
    mean = cat.request_probs * cat.eta_files * area
    se = np.sqrt(mean / len(counts))
    assert np.all(np.abs(counts.mean(axis=0) - mean) < 3 * se)


def test_snapshot_csv(tmp_path):
    rng = np.random.default_rng(0)
    net = attach_marks(sample_ppp(1e-3, 100, rng), 20, 5, rng)
    fp = sample_file_process(zipf_catalog(3, 0.5, 1e-3), 100, rng)
    path = tmp_path / "snap.csv"
    write_snapshot_csv(path, net, fp)
    lines = path.read_text().splitlines()
    assert lines[0] == "kind,index,x,y,mark"
    assert len(lines) == 1 + 3 * len(net) + len(fp.points)
