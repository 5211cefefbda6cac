"""Scenario configuration, unit conversions and shared numeric policy.

Everything downstream works in linear units (watts, meters, plain ratios);
dB and dBm only appear in :class:`ScenarioConfig` fields and in reports.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "CorrelationMode",
    "CacheSamplingMode",
    "ScenarioConfig",
    "McEstimate",
    "ScenarioFileError",
    "dbm_to_watts",
    "db_to_linear",
    "linear_to_db",
    "validate",
    "soft_warnings",
    "load_scenario",
    "dump_scenario",
    "split_stream",
    "mc_estimate",
    "Z95",
]

#: two-sided 95% normal quantile used for every reported confidence interval
Z95 = 1.959963984540054

MIN_WINDOW_RADIUS = 300.0


class CorrelationMode(str, enum.Enum):
    CORRELATED = "correlated"
    UNCORRELATED = "uncorrelated"


class CacheSamplingMode(str, enum.Enum):
    BERNOULLI = "bernoulli"
    GEOGRAPHIC = "geographic"


class ScenarioFileError(ValueError):
    """Malformed scenario file (unknown key, bad value, missing key)."""


def _finite(x, name):
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"{name} must be finite, got {x!r}")
    return x


def dbm_to_watts(p_dbm: float) -> float:
    """Convert a power in dBm to watts."""
    p_dbm = _finite(p_dbm, "power")
    return 10.0 ** ((p_dbm - 30.0) / 10.0)


def db_to_linear(x_db: float) -> float:
    """Convert a ratio in dB to a linear ratio."""
    x_db = _finite(x_db, "ratio")
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    if x <= 0:
        return -math.inf
    return 10.0 * math.log10(x)


@dataclass(frozen=True)
class ScenarioConfig:
    """All network, caching, channel and simulation parameters.

    Defaults describe the reference deployment. The
    catalog size, storage size, file density and SBS density have no
    defaults because they define the operating point.

    ``sim_window_radius = 0`` selects the automatic window,
    ``max(6 / sqrt(pi * lambda_sbs), 300)`` meters.
    """

    lambda_sbs: float
    eta_files: float
    catalog_size: int
    storage_size: int
    zipf_gamma: float = 0.7
    radius_request: float = 8.0
    radius_cache: float = 40.0
    r_ul: float = 20.0
    r_dl: float = 5.0
    rho_ul_dbm: float = 30.0
    rho_dl_dbm: float = 24.0
    alpha1: float = 3.0
    alpha2: float = 4.0
    theta_db: float = 0.0
    rician_k: float = 1.0
    si_attenuation_db: float = 60.0
    sim_window_radius: float = 0.0
    n_snapshots: int = 100_000
    seed: int = 0
    correlation_mode: CorrelationMode = CorrelationMode.CORRELATED
    cache_sampling_mode: CacheSamplingMode = CacheSamplingMode.BERNOULLI

    def __post_init__(self):
        # coerce enums given as strings (scenario files, kwargs)
        object.__setattr__(self, "correlation_mode", CorrelationMode(self.correlation_mode))
        object.__setattr__(self, "cache_sampling_mode", CacheSamplingMode(self.cache_sampling_mode))

    # -- linear views -----------------------------------------------------
    @property
    def rho_ul(self) -> float:
        return dbm_to_watts(self.rho_ul_dbm)

    @property
    def rho_dl(self) -> float:
        return dbm_to_watts(self.rho_dl_dbm)

    @property
    def theta(self) -> float:
        return db_to_linear(self.theta_db)

    @property
    def omega(self) -> float:
        return db_to_linear(self.si_attenuation_db)

    @property
    def kappa(self) -> float:
        return self.storage_size / self.catalog_size

    @property
    def window_radius(self) -> float:
        if self.sim_window_radius > 0:
            return float(self.sim_window_radius)
        return max(6.0 / math.sqrt(self.lambda_sbs * math.pi), MIN_WINDOW_RADIUS)

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    def with_kappa(self, kappa: float) -> "ScenarioConfig":
        """Same scenario with ``storage_size = round(kappa * catalog_size)``."""
        return self.replace(storage_size=int(round(kappa * self.catalog_size)))

    @classmethod
    def table1(cls, lambda_sbs=5e-4, eta_files=1.0, catalog_size=100, kappa=0.35, **kw):
        """Reference deployment at the given density and storage ratio.

        The reference parameter set leaves the catalog size open; it is
        pinned to 100 here.
        """
        return cls(
            lambda_sbs=lambda_sbs,
            eta_files=eta_files,
            catalog_size=catalog_size,
            storage_size=int(round(kappa * catalog_size)),
            **kw,
        )


def validate(config: ScenarioConfig) -> list[str]:
    """Return every violated invariant as ``"<field>: <message>"``.

    An empty list means the configuration is valid.
    """
    c = config
    out = []

    def bad(name, msg):
        out.append(f"{name}: {msg}")

    for name in (
        "lambda_sbs", "eta_files", "zipf_gamma", "radius_request", "radius_cache",
        "r_ul", "r_dl", "rho_ul_dbm", "rho_dl_dbm", "alpha1", "alpha2", "theta_db",
        "rician_k", "si_attenuation_db", "sim_window_radius",
    ):
        v = getattr(c, name)
        if not isinstance(v, (int, float)) or not math.isfinite(v):
            bad(name, "must be a finite number")
    if out:
        return out

    for name in ("lambda_sbs", "eta_files", "radius_request", "radius_cache", "r_ul", "r_dl"):
        if getattr(c, name) <= 0:
            bad(name, "must be > 0")
    if c.alpha1 <= 2:
        bad("alpha1", "alpha1 must exceed 2")
    if c.alpha2 < c.alpha1:
        bad("alpha2", "alpha2 must be >= alpha1")
    if c.zipf_gamma < 0:
        bad("zipf_gamma", "must be >= 0")
    if c.catalog_size < 1:
        bad("catalog_size", "must be >= 1")
    if c.storage_size < 0:
        bad("storage_size", "must be >= 0")
    if c.storage_size >= c.catalog_size:
        bad("storage_size", "storage_size must be < catalog_size")
    if c.r_ul <= c.r_dl:
        bad("r_ul", "r_ul must exceed r_dl")
    if c.rician_k < 0:
        bad("rician_k", "must be >= 0")
    if c.si_attenuation_db < 0:
        bad("si_attenuation_db", "must be >= 0 dB")
    if c.sim_window_radius < 0:
        bad("sim_window_radius", "must be >= 0 (0 selects the automatic window)")
    if c.n_snapshots < 1:
        bad("n_snapshots", "must be >= 1")
    if not (0 <= c.seed < 2**64):
        bad("seed", "must be an unsigned 64-bit integer")
    return out


def soft_warnings(config: ScenarioConfig) -> list[str]:
    """Non-fatal remarks about a (valid) configuration."""
    out = []
    if config.r_dl < config.r_ul < 2 * config.r_dl:
        out.append("r_ul: r_ul < 2 * r_dl; the UL link is not much longer than the DL link")
    if config.sim_window_radius and config.sim_window_radius < MIN_WINDOW_RADIUS:
        out.append(f"sim_window_radius: below {MIN_WINDOW_RADIUS:g} m, truncation bias may be visible")
    return out


# -- scenario files -------------------------------------------------------

_FIELDS = {f.name: f for f in dataclasses.fields(ScenarioConfig)}
_REQUIRED = [f.name for f in dataclasses.fields(ScenarioConfig) if f.default is dataclasses.MISSING]
_INT_FIELDS = {"catalog_size", "storage_size", "n_snapshots", "seed"}
_ENUM_FIELDS = {"correlation_mode": CorrelationMode, "cache_sampling_mode": CacheSamplingMode}


def _parse_value(key, raw):
    try:
        if key in _INT_FIELDS:
            try:
                return int(raw)
            except ValueError:
                f = float(raw)  # allow 1e5
                if not f.is_integer():
                    raise
                return int(f)
        if key in _ENUM_FIELDS:
            return _ENUM_FIELDS[key](raw)
        return float(raw)
    except ValueError:
        raise ScenarioFileError(f"{key}: cannot parse value {raw!r}") from None


def parse_scenario(text: str) -> ScenarioConfig:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioFileError(f"line {lineno}: expected 'key = value'")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in _FIELDS:
            raise ScenarioFileError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ScenarioFileError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _parse_value(key, raw)
    missing = [k for k in _REQUIRED if k not in values]
    if missing:
        raise ScenarioFileError("missing required keys: " + ", ".join(missing))
    return ScenarioConfig(**values)


def load_scenario(path) -> ScenarioConfig:
    """Read a ``key = value`` scenario file (``#`` starts a comment).

    Raises OSError if the file cannot be read and ScenarioFileError if its
    content is malformed. Range checks are left to :func:`validate`.
    """
    return parse_scenario(Path(path).read_text(encoding="utf-8"))


def dump_scenario(config: ScenarioConfig) -> str:
    lines = []
    for name in _FIELDS:
        v = getattr(config, name)
        if isinstance(v, enum.Enum):
            v = v.value
        elif isinstance(v, float):
            v = repr(v)
        lines.append(f"{name} = {v}")
    return "\n".join(lines) + "\n"


# -- randomness and estimates --------------------------------------------

def split_stream(seed: int, *key: int) -> np.random.Generator:
    """Independent, reproducible random stream for ``(seed, *key)``.

    Streams are derived with :class:`numpy.random.SeedSequence` spawn keys, so
    distinct keys give statistically independent PCG64 streams and the same
    key always gives the same stream.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class McEstimate:
    """Monte Carlo mean with a 95% normal-approximation confidence interval."""

    mean: float
    ci_halfwidth: float
    n: int
    seed: int
    std: float = field(default=0.0, repr=False)

    @property
    def stderr(self) -> float:
        return self.std / math.sqrt(self.n) if self.n else math.nan

    def agrees_with(self, value: float, k: float = 3.0) -> bool:
        return abs(self.mean - value) <= k * self.ci_halfwidth


def mc_estimate(samples, seed: int) -> McEstimate:
    """Build an estimate from per-sample values using compensated summation."""
    x = np.asarray(samples, dtype=float).ravel()
    n = x.size
    if n == 0:
        raise ValueError("no samples")
    mean = math.fsum(x) / n
    if n > 1:
        var = math.fsum((x - mean) ** 2) / (n - 1)
    else:
        var = 0.0
    std = math.sqrt(var)
    return McEstimate(mean=mean, ci_halfwidth=Z95 * std / math.sqrt(n), n=n, seed=int(seed), std=std)
