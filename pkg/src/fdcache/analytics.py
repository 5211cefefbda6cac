"""Analytic success probability of the cache-aided FD network.

The interference seen by a receiver (the typical SBS or the typical DL node)
comes from two independent thinnings of the SBS process: SBSs that hit their
cache transmit alone, SBSs that miss also activate their UL node. With
Rayleigh fading the probability generating functional gives

    L(s) = exp(-2 pi lam [P_hit * Uhat(s) + (1 - P_hit) * Utilde(s)])

where ``Uhat`` has a closed form and ``Utilde`` needs a radial integral of
an angular average ``xi`` over the UL-node position.
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np
from scipy import integrate, special

from .caching import cache_hit_probability, catalog_for
from .channel import LinkKind, link_exponent, si_gamma_params

__all__ = [
    "QuadraturePolicy",
    "QuadratureError",
    "AnalyticReport",
    "upsilon_hat",
    "xi",
    "upsilon_tilde",
    "laplace_interference",
    "laplace_I_dx",
    "laplace_I_x_miss",
    "laplace_I_dx_miss",
    "transform_arguments",
    "p_hit_of",
    "p_suc_lower_bound",
    "ase",
    "outage",
    "fd_throughput_gain",
    "hd_exponent",
    "analyze",
]


@dataclass(frozen=True)
class QuadraturePolicy:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    #: meters, or "adaptive" to pick the cut-off from the tail bound
    radial_truncation: float | str = "adaptive"
    max_subdivisions: int = 400

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")
        if self.radial_truncation != "adaptive" and not float(self.radial_truncation) > 0:
            raise ValueError("radial_truncation must be 'adaptive' or a positive length")


DEFAULT_POLICY = QuadraturePolicy()


class QuadratureError(ArithmeticError):
    """Radial quadrature did not reach the requested tolerance."""

    def __init__(self, component, estimate, error):
        super().__init__(f"{component}: quadrature did not converge "
                         f"(estimate {estimate!r}, error {error!r})")
        self.component = component
        self.estimate = estimate
        self.error = error


# -- building blocks -------------------------------------------------------

def upsilon_hat(s, rho_dl, alpha1):
    """Closed form of ``int_0^inf (1 - 1/(1 + s rho r^-alpha)) r dr``.

    Equals ``pi (s rho)^(2/alpha) csc(2 pi / alpha) / alpha``.
    """
    if not alpha1 > 2:
        raise ValueError("alpha1 must exceed 2")
    if s < 0:
        raise ValueError("s must be >= 0")
    return math.pi * (s * rho_dl) ** (2.0 / alpha1) / math.sin(2.0 * math.pi / alpha1) / alpha1


@functools.lru_cache(maxsize=16)
def _gl_half(n):
    # Gauss-Legendre nodes on [0, pi]; the integrand is even about pi
    # scipy's banded eigen-solver; numpy's leggauss is dense and cubic in n
    x, w = special.roots_legendre(n)
    return (x + 1.0) * (math.pi / 2.0), w * (math.pi / 2.0)


def _xi_complement(s, r, rho_ul, r_ul, alpha, rel_tol=1e-12, max_order=8192, floor=0.0):
    """``1 - xi`` computed without cancellation; ``r`` may be an array.

    Order escalation stops once successive orders agree to ``rel_tol``
    relative to ``|value| + floor``.
    """
    r = np.asarray(r, dtype=float)
    sr = s * rho_ul
    if sr == 0:
        return np.zeros_like(r)

    def at(n):
        phi, w = _gl_half(n)
        d2 = r_ul**2 + r[..., None] ** 2 + 2.0 * r_ul * r[..., None] * np.cos(phi)
        da = np.maximum(d2, 0.0) ** (alpha / 2.0)
        # y/(1+y) with y = sr * d^-alpha, written to stay finite at d = 0
        return (w / (1.0 + da / sr)).sum(axis=-1) / math.pi

    n = 32
    prev = at(n)
    while True:
        n *= 2
        cur = at(n)
        if np.all(np.abs(cur - prev) <= rel_tol * (np.abs(cur) + floor) + 1e-300) or n >= max_order:
            return cur
        prev = cur


def xi(s, r, rho_ul, r_ul, alpha2, rel_tol=1e-12):
    """Angular average of ``1 / (1 + s rho_ul d^-alpha2)`` over the UL node.

    ``d`` is the distance from a receiver at distance ``r`` from an SBS to
    that SBS's UL node, placed at distance ``r_ul`` with a uniform angle:
    ``d^2 = r_ul^2 + r^2 + 2 r_ul r cos(phi)``. Returns a value in (0, 1].
    """
    if not alpha2 > 2:
        raise ValueError("alpha2 must exceed 2")
    if s < 0 or np.any(np.asarray(r) < 0):
        raise ValueError("s and r must be >= 0")
    out = 1.0 - _xi_complement(s, r, rho_ul, r_ul, alpha2, rel_tol)
    return float(out) if np.ndim(out) == 0 else out


def _tail_bound(R, s, rho_dl, rho_ul, r_ul, alpha1, ul_alpha):
    # integrand <= s rho_dl r^-a1 * r + s rho_ul (r - r_ul)^-a * r for r > r_ul
    t = s * rho_dl * R ** (2 - alpha1) / (alpha1 - 2)
    if rho_ul > 0:
        q = R - r_ul
        t += s * rho_ul * (q ** (2 - ul_alpha) / (ul_alpha - 2) + r_ul * q ** (1 - ul_alpha) / (ul_alpha - 1))
    return t


def _tail_estimate(R, s, rho_dl, rho_ul, alpha1, ul_alpha):
    # leading-order value of the integral over [R, inf)
    return s * rho_dl * R ** (2 - alpha1) / (alpha1 - 2) + s * rho_ul * R ** (2 - ul_alpha) / (ul_alpha - 2)


@functools.lru_cache(maxsize=4096)
def _upsilon_tilde_cached(s, rho_dl, rho_ul, r_ul, alpha1, ul_alpha, policy):
    if s == 0:
        return 0.0, 0.0
    sr = s * rho_dl

    def g(r):
        # 1 - xi/(1 + x) = (x + c)/(1 + x), x = sr r^-a1, c = 1 - xi;
        # written with q = 1/x so that r -> 0 stays finite
        q = r**alpha1 / sr
        # only c + 1/q matters, so 1/q sets the scale of the angular tolerance
        c = _xi_complement(s, r, rho_ul, r_ul, ul_alpha, floor=1.0 / q if q > 0 else math.inf)
        return (1.0 + c * q) / (1.0 + q)

    floor = upsilon_hat(s, rho_dl, alpha1)  # lower bound of the result
    tail_tol = max(policy.abs_tol, 0.01 * policy.rel_tol * floor)
    r_knee = sr ** (1.0 / alpha1)
    inner = max(4.0 * r_knee, 3.0 * r_ul, 1.0)
    if policy.radial_truncation == "adaptive":
        R = 2.0 * inner
        while _tail_bound(R, s, rho_dl, rho_ul, r_ul, alpha1, ul_alpha) > tail_tol:
            R *= 2.0
    else:
        R = max(float(policy.radial_truncation), 2.0 * inner)

    eps_rel = policy.rel_tol / 4
    pieces = []
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            pts = sorted({p for p in (r_knee, r_ul, 2 * r_ul) if 0 < p < inner})
            edges = [0.0, *pts, inner]
            for lo, hi in zip(edges[:-1], edges[1:]):
                pieces.append(integrate.quad(lambda r: g(r) * r, lo, hi, epsabs=policy.abs_tol,
                                             epsrel=eps_rel, limit=policy.max_subdivisions))
            # far field in log-radius, one decade per piece
            t_edges = np.arange(math.log(inner), math.log(R), math.log(10.0))
            t_edges = [*t_edges, math.log(R)]
            for lo, hi in zip(t_edges[:-1], t_edges[1:]):
                pieces.append(integrate.quad(lambda t: g(math.exp(t)) * math.exp(2 * t), lo, hi,
                                             epsabs=policy.abs_tol, epsrel=eps_rel,
                                             limit=policy.max_subdivisions))
        except integrate.IntegrationWarning:
            est = math.fsum(p[0] for p in pieces)
            raise QuadratureError("upsilon_tilde", est, math.inf) from None
    value = math.fsum(p[0] for p in pieces) + _tail_estimate(R, s, rho_dl, rho_ul, alpha1, ul_alpha)
    err = math.fsum(p[1] for p in pieces) + _tail_bound(R, s, rho_dl, rho_ul, r_ul, alpha1, ul_alpha)
    if err > max(policy.abs_tol, policy.rel_tol * abs(value)) * 10:
        raise QuadratureError("upsilon_tilde", value, err)
    return value, err


def upsilon_tilde(s, rho_dl, rho_ul, r_ul, alpha1, alpha2, policy=None, full_output=False):
    """``int_0^inf (1 - xi(s, r) / (1 + s rho_dl r^-alpha1)) r dr``.

    The integral is cut at a radius where an analytic bound on the remainder
    drops below the tolerance, and the leading-order remainder is added
    back.

    Parameters
    ----------
    s : float
        Laplace argument, >= 0.
    rho_dl, rho_ul : float
        SBS and UL-node transmit powers in watts.
    r_ul : float
        SBS to UL-node distance in meters.
    alpha1 : float
        Exponent of SBS-to-receiver links.
    alpha2 : float
        Exponent of UL-node-to-receiver links (the ``xi`` exponent).
    policy : QuadraturePolicy, optional
    full_output : bool
        Also return the absolute error estimate.

    Raises
    ------
    QuadratureError
        If the quadrature cannot meet the policy tolerances; the exception
        carries the partial estimate.
    """
    if not (alpha1 > 2 and alpha2 > 2):
        raise ValueError("exponents must exceed 2")
    if s < 0:
        raise ValueError("s must be >= 0")
    policy = policy or DEFAULT_POLICY
    val, err = _upsilon_tilde_cached(float(s), float(rho_dl), float(rho_ul), float(r_ul),
                                     float(alpha1), float(alpha2), policy)
    return (val, err) if full_output else val


def laplace_interference(s, lam, p_hit, rho_dl, rho_ul, r_ul, alpha1, ul_alpha, policy=None):
    """Laplace transform of the aggregate out-of-cell interference."""
    if s == 0:
        return 1.0
    expo = p_hit * upsilon_hat(s, rho_dl, alpha1)
    if p_hit < 1:
        expo += (1 - p_hit) * upsilon_tilde(s, rho_dl, rho_ul, r_ul, alpha1, ul_alpha, policy)
    return math.exp(-2.0 * math.pi * lam * expo)


def p_hit_of(config):
    return cache_hit_probability(catalog_for(config), config.radius_request, config.radius_cache,
                                 config.storage_size)


def laplace_I_dx(s, config, p_hit, policy=None):
    """Interference transform at the typical DL node without its own INI."""
    c = config
    ul_alpha = link_exponent(LinkKind.UL_TO_DL, c.alpha1, c.alpha2)
    return laplace_interference(s, c.lambda_sbs, p_hit, c.rho_dl, c.rho_ul, c.r_ul, c.alpha1,
                                ul_alpha, policy)


def laplace_I_x_miss(s, config, p_hit, policy=None, ul_alpha=None):
    """Interference transform at the typical SBS on a cache miss.

    Residual SI contributes the factor ``(1 + s rho_dl b) ** -a``. Interfering
    UL nodes reach the SBS over UL-to-SBS links, so the angular average uses
    ``alpha1`` unless ``ul_alpha`` overrides it (passing ``alpha2`` reuses the
    DL-node transform unchanged).
    """
    c = config
    if ul_alpha is None:
        ul_alpha = link_exponent(LinkKind.UL_TO_SBS, c.alpha1, c.alpha2)
    si = si_gamma_params(c.rician_k, c.omega)
    field = laplace_interference(s, c.lambda_sbs, p_hit, c.rho_dl, c.rho_ul, c.r_ul, c.alpha1,
                                 ul_alpha, policy)
    return float(si.laplace(s * c.rho_dl)) * field


def laplace_I_dx_miss(s, config, p_hit, policy=None):
    """Interference transform at the typical DL node on a cache miss
    (adds the INI from the typical UL node)."""
    c = config
    ini = xi(s, c.r_dl, c.rho_ul, c.r_ul, link_exponent(LinkKind.UL_TO_DL, c.alpha1, c.alpha2))
    return ini * laplace_I_dx(s, config, p_hit, policy)


def transform_arguments(config):
    """``(s_ul, s_dl)``: Laplace arguments of the UL and DL hops.

    With a unit-mean exponential desired gain, ``P(SIR > theta) = L(s)`` at
    ``s = theta * R^alpha1 / rho``.
    """
    c = config
    return c.theta * c.r_ul**c.alpha1 / c.rho_ul, c.theta * c.r_dl**c.alpha1 / c.rho_dl


def _lower_bound_parts(config, p_hit, policy):
    s_ul, s_dl = transform_arguments(config)
    l_dx = laplace_I_dx(s_dl, config, p_hit, policy)
    ini = xi(s_dl, config.r_dl, config.rho_ul, config.r_ul,
             link_exponent(LinkKind.UL_TO_DL, config.alpha1, config.alpha2))
    l_dx_miss = ini * l_dx
    l_x_miss = laplace_I_x_miss(s_ul, config, p_hit, policy)
    p = p_hit * l_dx
    if p_hit < 1:
        p += (1 - p_hit) * l_x_miss * l_dx_miss
    return min(max(p, 0.0), 1.0), l_dx, l_x_miss, l_dx_miss


def p_suc_lower_bound(config, p_hit=None, policy=None) -> float:
    """Success probability with independent UL/DL interference fields.

    ``P_hit L_dx(s_dl) + (1 - P_hit) L_x^miss(s_ul) L_dx^miss(s_dl)``; it is a
    lower bound for the physical (correlated) network and exact when the two
    hops see independent node locations. ``p_hit`` defaults to the
    geographic cache-hit probability of ``config``.
    """
    if p_hit is None:
        p_hit = p_hit_of(config)
    return _lower_bound_parts(config, p_hit, policy)[0]


def outage(p_suc):
    return 1.0 - p_suc


def ase(theta, lam, p_suc):
    """Area spectral efficiency in bps/Hz/m^2."""
    return lam * p_suc * math.log2(1.0 + theta)


def hd_exponent(theta, lam, r_ul, r_dl, alpha1):
    """Exponent of the half-duplex normalizer in the FD throughput gain."""
    if not alpha1 > 2:
        raise ValueError("alpha1 must exceed 2")
    return (2.0 * math.pi * lam * math.pi * theta ** (2.0 / alpha1) * (r_ul**2 + r_dl**2)
            / math.sin(2.0 * math.pi / alpha1) / alpha1)


def fd_throughput_gain(theta, lam, p_suc, r_ul, r_dl, alpha1):
    """FD throughput gain over a cache-free HD network; > 1 means FD wins."""
    if not theta > 0:
        raise ValueError("theta must be > 0")
    return 2.0 * p_suc * math.exp(hd_exponent(theta, lam, r_ul, r_dl, alpha1))


@dataclass(frozen=True)
class AnalyticReport:
    p_hit: float
    p_suc_lower: float
    outage: float
    ase: float
    tg_fd: float
    L_dx: float
    L_x_miss: float
    L_dx_miss: float

    def as_dict(self):
        return asdict(self)


def analyze(config, p_hit=None, policy=None) -> AnalyticReport:
    """Every analytic metric at one operating point."""
    if p_hit is None:
        p_hit = p_hit_of(config)
    p, l_dx, l_x_miss, l_dx_miss = _lower_bound_parts(config, p_hit, policy)
    c = config
    return AnalyticReport(
        p_hit=p_hit,
        p_suc_lower=p,
        outage=outage(p),
        ase=ase(c.theta, c.lambda_sbs, p),
        tg_fd=fd_throughput_gain(c.theta, c.lambda_sbs, p, c.r_ul, c.r_dl, c.alpha1),
        L_dx=l_dx,
        L_x_miss=l_x_miss,
        L_dx_miss=l_dx_miss,
    )
