"""Pathloss, Rayleigh fading and the Gamma residual self-interference model."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "LinkKind",
    "SiGammaParams",
    "link_exponent",
    "pathloss",
    "sample_rayleigh_power",
    "si_gamma_params",
    "sample_si_power",
]


class LinkKind(enum.Enum):
    """Transmitter/receiver pairs that occur in the interference sums."""

    UL_TO_SBS = "ul_to_sbs"
    SBS_TO_DL = "sbs_to_dl"
    SBS_TO_SBS = "sbs_to_sbs"
    UL_TO_DL = "ul_to_dl"


def link_exponent(kind: LinkKind, alpha1: float, alpha2: float) -> float:
    """UL-node to DL-node links (non line-of-sight) use ``alpha2``, all
    others ``alpha1``."""
    kind = LinkKind(kind)
    return alpha2 if kind is LinkKind.UL_TO_DL else alpha1


def pathloss(r, alpha):
    """``r ** -alpha``; raises ValueError for non-positive distances."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("pathloss is singular at r <= 0")
    out = r ** (-alpha)
    return float(out) if out.ndim == 0 else out


def sample_rayleigh_power(rng, size=None):
    """Unit-mean exponential power gain(s)."""
    return rng.standard_exponential(size)


@dataclass(frozen=True)
class SiGammaParams:
    """Shape ``a`` and scale ``b`` of the residual SI power gain."""

    shape_a: float
    scale_b: float

    def __post_init__(self):
        if not (self.shape_a > 0 and self.scale_b > 0):
            raise ValueError("Gamma shape and scale must be > 0")

    @property
    def mean(self):
        return self.shape_a * self.scale_b

    @property
    def variance(self):
        return self.shape_a * self.scale_b**2

    def laplace(self, s):
        """``E[exp(-s * h_SI)] = (1 + s b) ** -a``."""
        return (1.0 + np.asarray(s, dtype=float) * self.scale_b) ** (-self.shape_a)


def si_gamma_params(rician_k: float, omega_linear: float) -> SiGammaParams:
    """Moment-match a Gamma law to a squared Rician envelope.

    The power of a Rician channel with K-factor ``K`` and mean ``m`` has
    variance ``m**2 (2K + 1) / (K + 1)**2``. Matching mean and variance with
    ``m = 1 / omega_linear`` gives

        a = (K + 1)**2 / (2K + 1),   b = 1 / (a * omega_linear).

    ``K = 0`` recovers the exponential (Rayleigh) case ``a = 1``.
    """
    if not (rician_k >= 0 and math.isfinite(rician_k)):
        raise ValueError("rician_k must be finite and >= 0")
    if not (omega_linear >= 1 and math.isfinite(omega_linear)):
        raise ValueError("omega_linear must be finite and >= 1")
    a = (rician_k + 1.0) ** 2 / (2.0 * rician_k + 1.0)
    return SiGammaParams(a, 1.0 / (a * omega_linear))


def sample_si_power(params: SiGammaParams, rng, size=None):
    return rng.gamma(params.shape_a, params.scale_b, size)
