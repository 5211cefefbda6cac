"""Point-process sampling on a disc window: SBSs, their UL/DL marks, files.

Points are stored as ``(n, 2)`` float arrays in meters rather than lists of
point objects.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "MarkedNetwork",
    "FileProcess",
    "sample_ppp",
    "uniform_in_disc",
    "attach_marks",
    "distance",
    "sample_file_process",
    "write_snapshot_csv",
]


def _as_points(a):
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        return np.zeros((0, 2))
    return a.reshape(-1, 2)


@dataclass(frozen=True)
class MarkedNetwork:
    """One realization of SBSs with their UL node, DL node and cache state.

    ``cache_miss[i]`` is True when SBS ``i`` does not hold the requested file
    (its UL hop is active).
    """

    sbs: np.ndarray
    ul: np.ndarray
    dl: np.ndarray
    cache_miss: np.ndarray
    window_radius: float

    def __post_init__(self):
        sbs, ul, dl = _as_points(self.sbs), _as_points(self.ul), _as_points(self.dl)
        miss = np.asarray(self.cache_miss, dtype=bool).ravel()
        if not (len(sbs) == len(ul) == len(dl) == len(miss)):
            raise ValueError("sbs, ul, dl and cache_miss must have equal length")
        object.__setattr__(self, "sbs", sbs)
        object.__setattr__(self, "ul", ul)
        object.__setattr__(self, "dl", dl)
        object.__setattr__(self, "cache_miss", miss)

    def __len__(self):
        return len(self.sbs)


@dataclass(frozen=True)
class FileProcess:
    """Marked file locations; ``file_index`` holds 1-based catalog ranks."""

    points: np.ndarray
    file_index: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    def __post_init__(self):
        pts = _as_points(self.points)
        idx = np.asarray(self.file_index, dtype=np.int64).ravel()
        if len(pts) != len(idx):
            raise ValueError("points and file_index must have equal length")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "file_index", idx)

    def __len__(self):
        return len(self.points)

    def of_file(self, i: int) -> np.ndarray:
        return self.points[self.file_index == i]


def uniform_in_disc(n, radius, rng, center=(0.0, 0.0)):
    """``n`` i.i.d. points uniform on a disc."""
    r = radius * np.sqrt(rng.random(n))
    phi = rng.random(n) * (2 * np.pi)
    return np.column_stack((center[0] + r * np.cos(phi), center[1] + r * np.sin(phi)))


def sample_ppp(density, window_radius, rng, center=(0.0, 0.0)):
    """Homogeneous PPP of the given density on a disc.

    Parameters
    ----------
    density : float
        Points per square meter, >= 0.
    window_radius : float
        Disc radius in meters, > 0.
    rng : numpy.random.Generator
    center : pair of float, optional

    Returns
    -------
    (n, 2) ndarray
        ``n`` is Poisson with mean ``density * pi * window_radius**2``.
    """
    if not density >= 0:
        raise ValueError(f"density must be >= 0, got {density!r}")
    if not window_radius > 0:
        raise ValueError(f"window_radius must be > 0, got {window_radius!r}")
    n = rng.poisson(density * np.pi * window_radius**2)
    return uniform_in_disc(n, window_radius, rng, center)


def _at_angle(origin, radius, angles):
    return origin + radius * np.column_stack((np.cos(angles), np.sin(angles)))


def attach_marks(sbs, r_ul, r_dl, rng, window_radius=np.inf):
    """Give every SBS a UL node at ``r_ul`` and a DL node at ``r_dl``.

    Angles are independent and uniform on ``[0, 2*pi)``. All SBSs start in
    the cache-miss state.
    """
    if not (r_ul > 0 and r_dl > 0):
        raise ValueError("r_ul and r_dl must be > 0")
    sbs = _as_points(sbs)
    n = len(sbs)
    ul = _at_angle(sbs, r_ul, rng.random(n) * (2 * np.pi))
    dl = _at_angle(sbs, r_dl, rng.random(n) * (2 * np.pi))
    return MarkedNetwork(sbs, ul, dl, np.ones(n, dtype=bool), float(window_radius))


def distance(a, b):
    """Euclidean distance along the last axis (broadcasts)."""
    d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    return np.hypot(d[..., 0], d[..., 1])


def sample_file_process(catalog, window_radius, rng, center=(0.0, 0.0)):
    """Sample the marked file process on a disc.

    The ground process has density ``catalog.eta_files`` and each point's
    file rank is drawn i.i.d. from ``catalog.request_probs``; by the thinning
    theorem file ``i`` alone then forms a PPP of density ``p_i * eta``.
    """
    pts = sample_ppp(catalog.eta_files, window_radius, rng, center)
    marks = draw_marks(catalog.request_probs, len(pts), rng)
    return FileProcess(pts, marks)


def draw_marks(probs, n, rng):
    """``n`` i.i.d. 1-based ranks with the given probabilities."""
    cdf = np.cumsum(probs)
    cdf /= cdf[-1]
    return np.searchsorted(cdf, rng.random(n), side="right").clip(max=len(cdf) - 1) + 1


def write_snapshot_csv(path, network: MarkedNetwork | None = None, files: FileProcess | None = None):
    """Dump points as CSV with columns ``kind,index,x,y,mark``.

    For SBS rows ``mark`` is 1 on cache miss, 0 on hit; for file rows it is
    the file rank; UL/DL rows carry the index of their SBS.
    """
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["kind", "index", "x", "y", "mark"])
        if network is not None:
            for i, (p, m) in enumerate(zip(network.sbs, network.cache_miss)):
                w.writerow(["sbs", i, repr(float(p[0])), repr(float(p[1])), int(m)])
            for kind, arr in (("ul", network.ul), ("dl", network.dl)):
                for i, p in enumerate(arr):
                    w.writerow([kind, i, repr(float(p[0])), repr(float(p[1])), i])
        if files is not None:
            for i, (p, m) in enumerate(zip(files.points, files.file_index)):
                w.writerow(["file", i, repr(float(p[0])), repr(float(p[1])), int(m)])
