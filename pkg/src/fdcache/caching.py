"""Zipf catalog, geographic caching policy and the cache-hit probability.

Files are scattered in the plane as a marked PPP of density ``eta``; file
``i`` on its own is a PPP of density ``p_i * eta``. A DL node requests the
files found within ``radius_request`` of it and an SBS caches those of the
``S`` most popular files found within ``radius_cache`` of it.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .core import McEstimate, mc_estimate, split_stream
from .geometry import FileProcess, distance, draw_marks, uniform_in_disc

__all__ = [
    "CatalogModel",
    "CacheRegions",
    "HitReport",
    "OverlapMode",
    "zipf_catalog",
    "catalog_for",
    "cache_hit_probability",
    "assign_cache_states_bernoulli",
    "sample_cache_miss_geographic",
    "geographic_hit_indicator",
    "estimate_p_hit_geographic",
    "lens_area",
]

GEO_BLOCK = 256
_MAX_POINTS_PER_CHUNK = 2_000_000


class OverlapMode(str, enum.Enum):
    #: request and cache balls see two independent file processes
    INDEPENDENT_REGIONS = "independent_regions"
    #: both balls see one shared file process (the balls overlap physically)
    PHYSICAL_OVERLAP = "physical_overlap"


@dataclass(frozen=True)
class CatalogModel:
    catalog_size: int
    request_probs: np.ndarray
    zipf_gamma: float
    eta_files: float

    def __post_init__(self):
        p = np.asarray(self.request_probs, dtype=float)
        if p.shape != (self.catalog_size,):
            raise ValueError("request_probs must have catalog_size entries")
        if abs(math.fsum(p) - 1.0) > 1e-12:
            raise ValueError("request_probs must sum to 1")
        if np.any(np.diff(p) > 0):
            raise ValueError("files must be ordered by decreasing popularity")
        p.setflags(write=False)
        object.__setattr__(self, "request_probs", p)


@dataclass(frozen=True)
class CacheRegions:
    request_center: tuple
    request_radius: float
    cache_center: tuple
    cache_radius: float

    def __post_init__(self):
        if not (self.request_radius > 0 and self.cache_radius > 0):
            raise ValueError("radii must be > 0")


@dataclass(frozen=True)
class HitReport:
    requested_set: frozenset
    cached_set: frozenset
    hit_value: float


def zipf_catalog(catalog_size: int, zipf_gamma: float, eta_files: float) -> CatalogModel:
    """Catalog with ``p_i`` proportional to ``i ** -gamma``."""
    if catalog_size < 1:
        raise ValueError("catalog_size must be >= 1")
    if zipf_gamma < 0:
        raise ValueError("zipf_gamma must be >= 0")
    w = np.arange(1, catalog_size + 1, dtype=float) ** (-float(zipf_gamma))
    p = w / math.fsum(w)
    # exact normalization after rounding, keeping the order
    p[0] += 1.0 - math.fsum(p)
    return CatalogModel(int(catalog_size), p, float(zipf_gamma), float(eta_files))


def catalog_for(config) -> CatalogModel:
    return zipf_catalog(config.catalog_size, config.zipf_gamma, config.eta_files)


def _presence_prob(probs, eta, radius):
    # P(at least one point of file i in a ball)
    return -np.expm1(-probs * eta * math.pi * radius**2)


def cache_hit_probability(catalog: CatalogModel, radius_request, radius_cache, storage_size,
                          cached_files=None) -> float:
    """Average over the catalog of P(file requested) * P(file cacheable).

    ``P_hit = (1/F) sum_{i<=S} (1 - exp(-p_i eta pi R_R^2)) (1 - exp(-p_i eta pi R_C^2))``

    Parameters
    ----------
    catalog : CatalogModel
    radius_request, radius_cache : float
        Ball radii in meters.
    storage_size : int
        Number ``S`` of top-ranked files eligible for caching.
    cached_files : iterable of int, optional
        Replace "rank <= S" by membership in this set of 1-based ranks.
    """
    F = catalog.catalog_size
    if cached_files is None:
        if not 0 <= storage_size <= F:
            raise ValueError("storage_size must lie in [0, catalog_size]")
        idx = np.arange(storage_size)
    else:
        idx = np.asarray(sorted(set(int(i) for i in cached_files)), dtype=int) - 1
        if idx.size and (idx[0] < 0 or idx[-1] >= F):
            raise ValueError("cached file ranks must lie in [1, catalog_size]")
    if idx.size == 0:
        return 0.0
    p = catalog.request_probs[idx]
    terms = _presence_prob(p, catalog.eta_files, radius_request) * _presence_prob(
        p, catalog.eta_files, radius_cache)
    return math.fsum(terms) / F


def assign_cache_states_bernoulli(net, p_hit, rng):
    """Independent cache states: each SBS misses with probability ``1 - p_hit``."""
    if not 0 <= p_hit <= 1:
        raise ValueError("p_hit must lie in [0, 1]")
    miss = rng.random(len(net)) >= p_hit
    return replace(net, cache_miss=miss)


def lens_area(r1, r2, d):
    """Area of the intersection of two discs with centers ``d`` apart."""
    if d >= r1 + r2:
        return 0.0
    if d <= abs(r1 - r2):
        return math.pi * min(r1, r2) ** 2
    a1 = r1**2 * math.acos((d**2 + r1**2 - r2**2) / (2 * d * r1))
    a2 = r2**2 * math.acos((d**2 + r2**2 - r1**2) / (2 * d * r2))
    k = 0.5 * math.sqrt((-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2))
    return a1 + a2 - k


def sample_cache_miss_geographic(catalog, radius_request, radius_cache, storage_size, n, rng,
                                 r_dl=0.0, mode=OverlapMode.INDEPENDENT_REGIONS):
    """Cache-miss flags for ``n`` SBSs under the geographic caching policy.

    Each SBS's DL node requests a rank drawn uniformly from the catalog (the
    ``1/F`` weighting of the hit probability). The request is served from the
    cache iff the rank is ``<= S`` and the file has a point in both the
    request ball and the cache ball. The joint presence probability is exact
    for both overlap modes, so no file points are materialized.
    """
    mode = OverlapMode(mode)
    F = catalog.catalog_size
    i = rng.integers(0, F, n)
    mu = catalog.request_probs[i] * catalog.eta_files
    area_r = math.pi * radius_request**2
    area_c = math.pi * radius_cache**2
    if mode is OverlapMode.INDEPENDENT_REGIONS:
        both = -np.expm1(-mu * area_r) * -np.expm1(-mu * area_c)
    else:
        area_u = area_r + area_c - lens_area(radius_request, radius_cache, r_dl)
        both = 1 - np.exp(-mu * area_r) - np.exp(-mu * area_c) + np.exp(-mu * area_u)
    hit = (i < storage_size) & (rng.random(n) < both)
    return ~hit


def geographic_hit_indicator(files: FileProcess, regions: CacheRegions, storage_size: int,
                             catalog_size: int) -> HitReport:
    """Per-realization hit value for one SBS / DL-node pair.

    ``hit_value`` counts the ranks that are both requested and cached,
    divided by the catalog size.
    """
    in_req = distance(files.points, regions.request_center) <= regions.request_radius
    in_cac = distance(files.points, regions.cache_center) <= regions.cache_radius
    requested = frozenset(int(i) for i in np.unique(files.file_index[in_req]))
    cached = frozenset(int(i) for i in np.unique(files.file_index[in_cac]) if i <= storage_size)
    return HitReport(requested, cached, len(requested & cached) / catalog_size)


# -- batched geographic estimator ------------------------------------------

def _presence_matrix(counts, radius, center, probs, rng, check_center=None, check_radius=None):
    """Boolean (realizations, files) matrix: file has a point in the ball.

    Points for all realizations are drawn in chunks from one stream, in
    realization order.
    """
    nb, nf = len(counts), len(probs)
    out = np.zeros((nb, nf), dtype=bool)
    ends = np.cumsum(counts)
    start_real = 0
    while start_real < nb:
        base = ends[start_real - 1] if start_real else 0
        stop_real = int(np.searchsorted(ends, base + _MAX_POINTS_PER_CHUNK, side="right"))
        stop_real = max(stop_real, start_real + 1)
        c = counts[start_real:stop_real]
        m = int(c.sum())
        pts = uniform_in_disc(m, radius, rng, center)
        marks = draw_marks(probs, m, rng)
        rid = np.repeat(np.arange(start_real, stop_real), c)
        inside = distance(pts, check_center if check_center is not None else center) <= (
            check_radius if check_radius is not None else radius)
        out[rid[inside], marks[inside] - 1] = True
        start_real = stop_real
    return out


def _hit_value_block(catalog, S, radius_request, radius_cache, r_dl, nb, rng, mode):
    F = catalog.catalog_size
    if S == 0 or catalog.eta_files == 0:
        return np.zeros(nb)
    # only ranks <= S can produce a hit: thin the file process to them
    p = catalog.request_probs[:S]
    ps = math.fsum(p)
    cond = p / ps
    eta = catalog.eta_files * ps
    dl = (r_dl, 0.0)
    origin = (0.0, 0.0)
    if mode is OverlapMode.INDEPENDENT_REGIONS:
        # every point of a ball-restricted process lies in its ball, so the
        # presence pattern only depends on the per-rank counts: a Poisson
        # total split multinomially over the ranks
        req_counts = rng.poisson(eta * math.pi * radius_request**2, nb)
        cac_counts = rng.poisson(eta * math.pi * radius_cache**2, nb)
        req = rng.multinomial(req_counts, cond) > 0
        cac = rng.multinomial(cac_counts, cond) > 0
    else:
        big = max(radius_cache, r_dl + radius_request)
        counts = rng.poisson(eta * math.pi * big**2, nb)
        # same stream state for both checks: draw once, test twice
        state = rng.bit_generator.state
        req = _presence_matrix(counts, big, origin, cond, rng, dl, radius_request)
        rng.bit_generator.state = state
        cac = _presence_matrix(counts, big, origin, cond, rng, origin, radius_cache)
    return (req & cac).sum(axis=1) / F


def estimate_p_hit_geographic(config, mode=OverlapMode.INDEPENDENT_REGIONS, seed=None, n=None,
                              catalog=None) -> McEstimate:
    """Monte Carlo cache-hit probability from sampled file locations.

    ``independent_regions`` draws one file process for the request ball and
    another for the cache ball, the independence used by the closed form;
    ``physical_overlap`` draws a single process that both balls share.
    Realizations are generated in blocks of 256, block ``k`` using
    ``split_stream(seed, k)``.
    """
    mode = OverlapMode(mode)
    seed = config.seed if seed is None else seed
    n = config.n_snapshots if n is None else n
    catalog = catalog_for(config) if catalog is None else catalog
    values = []
    for k, start in enumerate(range(0, n, GEO_BLOCK)):
        nb = min(GEO_BLOCK, n - start)
        rng = split_stream(seed, k)
        values.append(_hit_value_block(catalog, config.storage_size, config.radius_request,
                                       config.radius_cache, config.r_dl, nb, rng, mode))
    return mc_estimate(np.concatenate(values), seed)
