"""Snapshot simulation of the typical SBS / UL node / DL node triple.

The typical SBS sits at the origin, its DL node at ``(r_dl, 0)`` and its UL
node at distance ``r_ul`` with a uniform angle. Interfering SBSs form a PPP on
a disc window. Each one carries a UL node and a DL node (isotropic marks)
and an independent cache state.

Interference from SBSs beyond the window is not sampled. Its Laplace factor
``exp(-2 pi lam s int_W^inf ...)`` is computed to first order in
``s * rho * W^-alpha`` and applied multiplicatively. For success indicators
this is an extra Bernoulli thinning, which is exact because the desired
link gain is memoryless.

Randomness layout (fixed, independent of worker count and window size):
snapshots are grouped in blocks of :data:`BLOCK`. Within block ``k``, field
``f`` (0 = shared, 1 = independent DL-hop field in uncorrelated mode) draws
the typical node's variates from ``split_stream(seed, k, f, 0)``. Ring ``j``
(``[j, j+1) * RING_WIDTH`` meters) draws from ``split_stream(seed, k, f, j + 1)``.
Points of the last ring beyond the window are discarded. A larger window
therefore keeps every point of a smaller one.
"""

from __future__ import annotations

import concurrent.futures as cf
import csv
import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .analytics import p_hit_of, transform_arguments
from .caching import catalog_for, sample_cache_miss_geographic
from .channel import LinkKind, link_exponent, si_gamma_params
from .core import CacheSamplingMode, CorrelationMode, McEstimate, linear_to_db, mc_estimate, split_stream
from .geometry import MarkedNetwork, distance

__all__ = [
    "BLOCK",
    "RING_WIDTH",
    "Snapshot",
    "LaplaceTarget",
    "split_stream",
    "far_field_exponent",
    "run_snapshot",
    "interference_at_sbs",
    "interference_at_dl",
    "simulate",
    "estimate_p_suc",
    "estimate_laplace",
    "write_samples_csv",
]

BLOCK = 1024
RING_WIDTH = 100.0
MIN_SNAPSHOTS = 100


class LaplaceTarget(str, enum.Enum):
    I_DX = "I_dx"
    I_X_MISS = "I_x_miss"
    I_DX_MISS = "I_dx_miss"


@dataclass
class Snapshot:
    """One realization around the typical triple.

    ``network`` holds the typical SBS at index 0 followed by the interferers.
    ``gains`` holds the fading power gains: per-interferer arrays
    ``sbs_to_sbs``, ``ul_to_sbs``, ``sbs_to_dl``, ``ul_to_dl`` and scalars
    ``si``, ``ini``, ``desired_ul``, ``desired_dl``.
    ``sir_ul`` is None on a cache hit (no UL hop).
    """

    network: MarkedNetwork
    gains: dict
    typical_miss: bool
    sir_ul: float | None
    sir_dl: float
    far_field: dict = field(default_factory=dict)

    @property
    def dl_node(self):
        return self.network.dl[0]


def _tail_series(alpha, r_ul, W, terms=8):
    # int_W^inf E_phi[(r^2 + r_ul^2 + 2 r r_ul cos phi)^(-alpha/2)] r dr, using
    # E_phi[...] = r^-alpha 2F1(alpha/2, alpha/2; 1; r_ul^2 / r^2)
    total, coef = 0.0, 1.0
    h = alpha / 2.0
    for k in range(terms):
        if k:
            coef *= ((h + k - 1) / k) ** 2
        total += coef * r_ul ** (2 * k) * W ** (2 - alpha - 2 * k) / (alpha + 2 * k - 2)
    return total


def far_field_exponent(s, config, p_hit, ul_alpha, window_radius=None):
    """``-log`` of the Laplace factor of interferers outside the window.

    First order in ``s rho W^-alpha``, which is below 1e-3 for every Laplace
    argument used here at the default 300 m window.
    """
    c = config
    W = c.window_radius if window_radius is None else window_radius
    sbs = c.rho_dl * W ** (2 - c.alpha1) / (c.alpha1 - 2)
    ul = (1.0 - p_hit) * c.rho_ul * _tail_series(ul_alpha, c.r_ul, W)
    return 2.0 * math.pi * c.lambda_sbs * s * (sbs + ul)


class _Model:
    """Per-call constants shared by every block."""

    def __init__(self, config, p_hit):
        c = config
        self.c = c
        self.geographic = c.cache_sampling_mode is CacheSamplingMode.GEOGRAPHIC
        self.p_hit = p_hit_of(c) if (p_hit is None or self.geographic) else float(p_hit)
        if not 0 <= self.p_hit <= 1:
            raise ValueError("p_hit must lie in [0, 1]")
        self.catalog = catalog_for(c) if self.geographic else None
        self.W = c.window_radius
        self.n_rings = int(math.ceil(self.W / RING_WIDTH))
        self.si = si_gamma_params(c.rician_k, c.omega)
        self.a_ul_sbs = link_exponent(LinkKind.UL_TO_SBS, c.alpha1, c.alpha2)
        self.a_ul_dl = link_exponent(LinkKind.UL_TO_DL, c.alpha1, c.alpha2)
        self.s_ul, self.s_dl = transform_arguments(c)
        self.dl_pos = np.array([c.r_dl, 0.0])

    def far(self, s, at_sbs):
        a = self.a_ul_sbs if at_sbs else self.a_ul_dl
        return math.exp(-far_field_exponent(s, self.c, self.p_hit, a, self.W))

    def miss_flags(self, n, rng):
        if self.geographic:
            c = self.c
            return sample_cache_miss_geographic(self.catalog, c.radius_request, c.radius_cache,
                                                c.storage_size, n, rng, r_dl=c.r_dl)
        return rng.random(n) >= self.p_hit


def _sample_ring(model, j, nb, rng):
    """Interferers of ring ``j`` for ``nb`` snapshots (flat arrays + owner ids)."""
    c = model.c
    lo, hi = j * RING_WIDTH, (j + 1) * RING_WIDTH
    counts = rng.poisson(c.lambda_sbs * math.pi * (hi**2 - lo**2), nb)
    m = int(counts.sum())
    rad = np.sqrt(lo**2 + rng.random(m) * (hi**2 - lo**2))
    ang = rng.random(m) * (2 * np.pi)
    ang_ul = rng.random(m) * (2 * np.pi)
    ang_dl = rng.random(m) * (2 * np.pi)
    miss = model.miss_flags(m, rng)
    h = rng.standard_exponential((4, m))
    keep = rad <= model.W
    owner = np.repeat(np.arange(nb), counts)[keep]
    sbs = np.column_stack((rad * np.cos(ang), rad * np.sin(ang)))[keep]
    ang_ul, ang_dl = ang_ul[keep], ang_dl[keep]
    ul = sbs + c.r_ul * np.column_stack((np.cos(ang_ul), np.sin(ang_ul)))
    dl = sbs + c.r_dl * np.column_stack((np.cos(ang_dl), np.sin(ang_dl)))
    return owner, sbs, ul, dl, miss[keep], h[:, keep]


def _field_terms(model, sbs, ul, miss, h):
    """Per-interferer received powers at the typical SBS and DL node."""
    c = model.c
    at_x = c.rho_dl * distance(sbs, 0.0) ** -c.alpha1 * h[0]
    at_x += miss * c.rho_ul * distance(ul, 0.0) ** -model.a_ul_sbs * h[1]
    at_d = c.rho_dl * distance(sbs, model.dl_pos) ** -c.alpha1 * h[2]
    at_d += miss * c.rho_ul * distance(ul, model.dl_pos) ** -model.a_ul_dl * h[3]
    return at_x, at_d


def _simulate_field(model, nb, typ_rng, ring_rngs, keep_points=False):
    c = model.c
    typ_miss = model.miss_flags(nb, typ_rng)
    ang_u = typ_rng.random(nb) * (2 * np.pi)
    g = typ_rng.standard_exponential((3, nb))  # desired UL, desired DL, INI
    h_si = typ_rng.gamma(model.si.shape_a, model.si.scale_b, nb)
    u_thin = typ_rng.random((2, nb))

    i_x = np.zeros(nb)
    i_d = np.zeros(nb)
    points = []
    for j, rng in enumerate(ring_rngs):
        owner, sbs, ul, dl, miss, h = _sample_ring(model, j, nb, rng)
        at_x, at_d = _field_terms(model, sbs, ul, miss, h)
        i_x += np.bincount(owner, at_x, nb)
        i_d += np.bincount(owner, at_d, nb)
        if keep_points:
            points.append((owner, sbs, ul, dl, miss, h))

    u_typ = c.r_ul * np.column_stack((np.cos(ang_u), np.sin(ang_u)))
    ini = c.rho_ul * distance(u_typ, model.dl_pos) ** -model.a_ul_dl * g[2]
    out = dict(
        typical_miss=typ_miss,
        ul_angle=ang_u,
        desired_ul=g[0],
        desired_dl=g[1],
        h_ini=g[2],
        h_si=h_si,
        u_thin=u_thin,
        i_x_field=i_x,
        si_term=c.rho_dl * h_si,
        i_d_field=i_d,
        ini_term=ini,
    )
    if keep_points:
        out["points"] = points
    return out


def _block_streams(model, seed, k, f):
    return split_stream(seed, k, f, 0), [split_stream(seed, k, f, j + 1) for j in range(model.n_rings)]


def _evaluate(model, fa, fb):
    """Per-snapshot SIRs, success flags and conditional success values."""
    c = model.c
    miss = fa["typical_miss"]
    i_x = fa["i_x_field"] + miss * fa["si_term"]
    i_d = fb["i_d_field"] + miss * fb["ini_term"]
    with np.errstate(divide="ignore"):
        sir_ul = c.rho_ul * c.r_ul ** -c.alpha1 * fa["desired_ul"] / i_x
        sir_dl = c.rho_dl * c.r_dl ** -c.alpha1 * fb["desired_dl"] / i_d
    far_x, far_d = model.far(model.s_ul, True), model.far(model.s_dl, False)
    ul_ok = (sir_ul > c.theta) & (fa["u_thin"][0] < far_x)
    dl_ok = (sir_dl > c.theta) & (fb["u_thin"][1] < far_d)
    success = dl_ok & (~miss | ul_ok)
    p_ul = np.exp(-model.s_ul * i_x) * far_x
    p_dl = np.exp(-model.s_dl * i_d) * far_d
    cond = np.where(miss, p_ul * p_dl, p_dl)
    return dict(typical_miss=miss, sir_ul=sir_ul, sir_dl=sir_dl, success=success, conditional=cond)


def _run_block(model, seed, k, nb, uncorrelated):
    fa = _simulate_field(model, nb, *_block_streams(model, seed, k, 0))
    fb = _simulate_field(model, nb, *_block_streams(model, seed, k, 1)) if uncorrelated else fa
    if uncorrelated:
        # the typical triple (state, UL-node angle, INI and desired DL gains)
        # is shared; only the interferer field differs
        for key in ("typical_miss", "ul_angle", "desired_dl", "h_ini", "ini_term", "u_thin"):
            fb[key] = fa[key]
    return fa, fb


def _map_blocks(fn, n, workers):
    starts = list(range(0, n, BLOCK))
    args = [(k, min(BLOCK, n - s)) for k, s in enumerate(starts)]
    if workers and workers > 1:
        with cf.ThreadPoolExecutor(workers) as ex:
            return list(ex.map(lambda a: fn(*a), args))
    return [fn(*a) for a in args]


def simulate(config, p_hit=None, mode=None, seed=None, n=None, workers=1):
    """Raw per-snapshot results as a dict of arrays.

    Keys: ``typical_miss``, ``sir_ul`` (inf/NaN meaningless on hits),
    ``sir_dl``, ``success`` (indicator) and ``conditional`` (success
    probability given all interferer variates).
    """
    model = _Model(config, p_hit)
    mode = CorrelationMode(mode or config.correlation_mode)
    seed = config.seed if seed is None else int(seed)
    n = config.n_snapshots if n is None else int(n)
    unc = mode is CorrelationMode.UNCORRELATED

    def one(k, nb):
        return _evaluate(model, *_run_block(model, seed, k, nb, unc))

    blocks = _map_blocks(one, n, workers)
    return {key: np.concatenate([b[key] for b in blocks]) for key in blocks[0]}


def estimate_p_suc(config, p_hit=None, mode=None, seed=None, n=None, workers=1,
                   estimator="indicator") -> McEstimate:
    """Monte Carlo success probability of a requested file.

    On a hit the DL hop must succeed; on a miss both hops must. In
    ``correlated`` mode both hops see the same interferer realization; in
    ``uncorrelated`` mode the DL hop sees an independent one.

    ``estimator="indicator"`` averages success indicators;
    ``"conditional"`` averages the success probability given the interferer
    variates (same mean, lower variance).
    """
    n = config.n_snapshots if n is None else int(n)
    if n < MIN_SNAPSHOTS:
        raise ValueError(f"need at least {MIN_SNAPSHOTS} snapshots, got {n}")
    seed = config.seed if seed is None else int(seed)
    res = simulate(config, p_hit, mode, seed, n, workers)
    key = {"indicator": "success", "conditional": "conditional"}[estimator]
    return mc_estimate(res[key], seed)


def estimate_laplace(config, p_hit, s, target, seed=None, n=None, conditioning="reject",
                     workers=1) -> McEstimate:
    """Empirical ``E[exp(-s I)]`` of one interference term.

    ``I_dx`` is the interference at the typical DL node on a cache hit,
    ``I_x_miss`` at the typical SBS on a miss (with residual SI) and
    ``I_dx_miss`` at the DL node on a miss (with INI). With
    ``conditioning="reject"`` only snapshots whose typical state matches
    the target are kept; ``"force"`` uses every snapshot with the typical
    state set to the target (valid because the typical state is independent
    of the field).
    """
    if s < 0:
        raise ValueError("s must be >= 0")
    target = LaplaceTarget(target)
    model = _Model(config, p_hit)
    seed = config.seed if seed is None else int(seed)
    n = config.n_snapshots if n is None else int(n)
    at_sbs = target is LaplaceTarget.I_X_MISS
    far = model.far(s, at_sbs)

    def one(k, nb):
        f = _simulate_field(model, nb, *_block_streams(model, seed, k, 0))
        if target is LaplaceTarget.I_DX:
            i, want_miss = f["i_d_field"], False
        elif target is LaplaceTarget.I_X_MISS:
            i, want_miss = f["i_x_field"] + f["si_term"], True
        else:
            i, want_miss = f["i_d_field"] + f["ini_term"], True
        v = np.exp(-s * i) * far
        if conditioning == "reject":
            v = v[f["typical_miss"] == want_miss]
        elif conditioning != "force":
            raise ValueError("conditioning must be 'reject' or 'force'")
        return v

    vals = np.concatenate(_map_blocks(one, n, workers))
    if vals.size == 0:
        raise ValueError("no snapshot matched the conditioning; use conditioning='force'")
    return mc_estimate(vals, seed)


# -- single snapshots ---------------------------------------------------------

def run_snapshot(config, p_hit, rng) -> Snapshot:
    """One full realization drawn from ``rng`` (bit-reproducible)."""
    model = _Model(config, p_hit)
    f = _simulate_field(model, 1, rng, [rng] * model.n_rings, keep_points=True)
    owner, sbs, ul, dl, miss, h = zip(*f["points"])
    sbs, ul, dl, miss = (np.concatenate(a) for a in (sbs, ul, dl, miss))
    h = np.concatenate(h, axis=1)  # (4, n) gains
    c = config
    ang = f["ul_angle"][0]
    typ_ul = np.array([[c.r_ul * math.cos(ang), c.r_ul * math.sin(ang)]])
    typical_miss = bool(f["typical_miss"][0])
    net = MarkedNetwork(
        sbs=np.vstack(([[0.0, 0.0]], sbs)),
        ul=np.vstack((typ_ul, ul)),
        dl=np.vstack(([model.dl_pos], dl)),
        cache_miss=np.concatenate(([typical_miss], miss)),
        window_radius=model.W,
    )
    gains = dict(
        sbs_to_sbs=h[0], ul_to_sbs=h[1], sbs_to_dl=h[2], ul_to_dl=h[3],
        si=float(f["h_si"][0]), ini=float(f["h_ini"][0]),
        desired_ul=float(f["desired_ul"][0]), desired_dl=float(f["desired_dl"][0]),
    )
    snap = Snapshot(net, gains, typical_miss, None, math.nan,
                    far_field=dict(at_sbs=model.far(model.s_ul, True), at_dl=model.far(model.s_dl, False)))
    snap.sir_dl = _sir(c.rho_dl * c.r_dl ** -c.alpha1 * gains["desired_dl"], interference_at_dl(snap, c))
    if typical_miss:
        snap.sir_ul = _sir(c.rho_ul * c.r_ul ** -c.alpha1 * gains["desired_ul"], interference_at_sbs(snap, c))
    return snap


def _sir(signal, interference):
    return signal / interference if interference > 0 else math.inf


def interference_at_sbs(snapshot: Snapshot, config) -> float:
    """Aggregate interference at the typical SBS, including residual SI.

    Only meaningful on a cache miss; on a hit there is no UL hop and a
    ValueError is raised.
    """
    if not snapshot.typical_miss:
        raise ValueError("typical SBS hit its cache: there is no UL hop to interfere with")
    c = config
    net, g = snapshot.network, snapshot.gains
    a_ul = link_exponent(LinkKind.UL_TO_SBS, c.alpha1, c.alpha2)
    x = net.sbs[0]
    total = math.fsum(c.rho_dl * distance(net.sbs[1:], x) ** -c.alpha1 * g["sbs_to_sbs"])
    total += math.fsum((net.cache_miss[1:] * c.rho_ul) * distance(net.ul[1:], x) ** -a_ul * g["ul_to_sbs"])
    return total + c.rho_dl * g["si"]


def interference_at_dl(snapshot: Snapshot, config) -> float:
    """Aggregate interference at the typical DL node (INI included on a miss)."""
    c = config
    net, g = snapshot.network, snapshot.gains
    a_ul = link_exponent(LinkKind.UL_TO_DL, c.alpha1, c.alpha2)
    d = net.dl[0]
    total = math.fsum(c.rho_dl * distance(net.sbs[1:], d) ** -c.alpha1 * g["sbs_to_dl"])
    total += math.fsum((net.cache_miss[1:] * c.rho_ul) * distance(net.ul[1:], d) ** -a_ul * g["ul_to_dl"])
    if snapshot.typical_miss:
        total += c.rho_ul * distance(net.ul[0], d) ** -a_ul * g["ini"]
    return total


def write_samples_csv(path, results):
    """Raw per-snapshot dump: index, typical_miss, SIRs in dB, success."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["snapshot_index", "typical_miss", "sir_ul_db", "sir_dl_db", "success"])
        for i, (m, su, sd, ok) in enumerate(zip(results["typical_miss"], results["sir_ul"],
                                                 results["sir_dl"], results["success"])):
            w.writerow([i, int(m), repr(linear_to_db(su)) if m else "", repr(linear_to_db(sd)), int(ok)])
