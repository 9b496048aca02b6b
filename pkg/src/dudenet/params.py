"""System parameters: JSON configuration, unit conversion and derived constants.

Everything inside :class:`SystemParams` is SI and linear (W, Hz, m, 1/m^2,
linear gains, radians).  Configuration documents use the conventional units
listed in :data:`CONFIG_UNITS`; any value may instead be given as a string
with an explicit unit, e.g. ``"30 dBm"``, ``"1 W"``, ``"50 /km2"``.
"""

from __future__ import annotations

import dataclasses
import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

SPEED_OF_LIGHT = 299_792_458.0
THERMAL_NOISE_DBM_HZ = -174.0

__all__ = [
    "SystemParams",
    "DerivedConstants",
    "ConfigError",
    "ConfigWarning",
    "CONFIG_UNITS",
    "TABLE_I",
    "load_config",
    "emit_config",
    "derive",
    "db_to_linear",
    "linear_to_db",
    "dbm_to_watt",
    "watt_to_dbm",
]


class ConfigError(ValueError):
    """Invalid configuration value; ``field`` names the offending key."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class ConfigWarning(UserWarning):
    pass


def db_to_linear(x):
    return 10.0 ** (x / 10.0)


def linear_to_db(x):
    return 10.0 * math.log10(x)


def dbm_to_watt(x):
    return 10.0 ** ((x - 30.0) / 10.0)


def watt_to_dbm(x):
    return 10.0 * math.log10(x) + 30.0


@dataclass(frozen=True)
class SystemParams:
    """Two-tier network parameters in SI-linear units.

    ``joint_bias`` switches on the LTE-style rule in which the UL association
    re-uses the DL biased received power: the UL biases are then derived as
    ``t_s_ul = p_s t_s / p_us`` and ``t_m_ul = p_m t_m / p_um`` and the stored
    ``t_*_ul`` values are ignored.
    """

    lambda_m: float = 5e-6
    lambda_s: float = 50e-6
    lambda_u: float = 200e-6
    p_m: float = dbm_to_watt(46.0)
    p_s: float = dbm_to_watt(30.0)
    p_um: float = dbm_to_watt(23.0)
    p_us: float = dbm_to_watt(23.0)
    f_m: float = 2e9
    f_s: float = 70e9
    w_m: float = 20e6
    w_s: float = 1e9
    t_m: float = 1.0
    t_s: float = 1.0
    t_m_ul: float = 1.0
    t_s_ul: float = 1.0
    alpha_m: float = 3.0
    alpha_l: float = 2.0
    alpha_n: float = 4.0
    g_s_max: float = db_to_linear(18.0)
    g_s_min: float = db_to_linear(-2.0)
    g_m: float = 1.0
    theta_s: float = math.radians(10.0)
    omega: float = 0.11
    mu: float = 200.0
    noise_figure: float = db_to_linear(10.0)
    epsilon: float = 0.0
    joint_bias: bool = False

    def __post_init__(self):
        for name in ("lambda_s", "lambda_u"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v >= 0):
                raise ConfigError(name, f"must be a finite non-negative density, got {v!r}")
        for name in ("lambda_m", "p_m", "p_s", "p_um", "p_us",
                     "f_m", "f_s", "w_m", "w_s", "t_m", "t_s", "t_m_ul", "t_s_ul",
                     "g_s_max", "g_s_min", "g_m", "noise_figure"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ConfigError(name, f"must be a finite positive number, got {v!r}")
        for name in ("alpha_m", "alpha_n"):
            if not getattr(self, name) > 2:
                raise ConfigError(name, "pathloss exponent must exceed 2")
        if not self.alpha_l > 0:
            raise ConfigError("alpha_l", "pathloss exponent must be positive")
        if self.alpha_l > self.alpha_n:
            raise ConfigError("alpha_l", "LOS exponent must not exceed the NLOS exponent")
        if not 0.0 <= self.omega <= 1.0:
            raise ConfigError("omega", f"LOS probability must lie in [0, 1], got {self.omega}")
        # Below 1 m the LOS-ball breakpoints mu^alpha_l and mu^alpha_n swap order.
        if not self.mu >= 1.0:
            raise ConfigError("mu", f"LOS ball radius must be >= 1 m, got {self.mu}")
        if not 0.0 < self.theta_s < 2 * math.pi:
            raise ConfigError("theta_s", "beamwidth must lie in (0, 2*pi)")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ConfigError("epsilon", "compensation factor must lie in [0, 1]")

    def replace(self, **changes) -> "SystemParams":
        return dataclasses.replace(self, **changes)

    @property
    def geometry(self) -> tuple:
        """Fields that determine the sampled point patterns and blockage."""
        return (self.lambda_m, self.lambda_s, self.lambda_u, self.omega, self.mu,
                self.alpha_m, self.alpha_l, self.alpha_n)


TABLE_I = SystemParams()


@dataclass(frozen=True)
class DerivedConstants:
    beta_m: float
    beta_s: float
    sigma2_m: float
    sigma2_s: float
    psi_m: float
    psi_s: float
    a_dl: float
    a_ul: float
    t_m_ul: float
    t_s_ul: float


def near_field_loss(freq: float) -> float:
    """Free-space pathloss at 1 m, (wavelength / 4 pi)^2."""
    return (SPEED_OF_LIGHT / (4.0 * math.pi * freq)) ** 2


def noise_power(bandwidth: float, noise_figure: float) -> float:
    """Thermal noise in W: -174 dBm/Hz + 10 log10(W) + NF."""
    dbm = THERMAL_NOISE_DBM_HZ + 10.0 * math.log10(bandwidth) + linear_to_db(noise_figure)
    return dbm_to_watt(dbm)


def derive(params: SystemParams) -> DerivedConstants:
    beta_m = near_field_loss(params.f_m)
    beta_s = near_field_loss(params.f_s)
    psi_m = params.g_m * beta_m
    psi_s = params.g_s_max * beta_s
    if params.joint_bias:
        t_s_ul = params.p_s * params.t_s / params.p_us
        t_m_ul = params.p_m * params.t_m / params.p_um
    else:
        t_s_ul, t_m_ul = params.t_s_ul, params.t_m_ul
    a_dl = (params.p_s * params.t_s * psi_s) / (params.p_m * params.t_m * psi_m)
    a_ul = (params.p_us * t_s_ul * psi_s) / (params.p_um * t_m_ul * psi_m)
    return DerivedConstants(
        beta_m=beta_m,
        beta_s=beta_s,
        sigma2_m=noise_power(params.w_m, params.noise_figure),
        sigma2_s=noise_power(params.w_s, params.noise_figure),
        psi_m=psi_m,
        psi_s=psi_s,
        a_dl=a_dl,
        a_ul=a_ul,
        t_m_ul=t_m_ul,
        t_s_ul=t_s_ul,
    )


# ---------------------------------------------------------------------------
# configuration documents

# field -> (config unit, unit kind)
CONFIG_UNITS: dict[str, tuple[str, str]] = {
    "lambda_m": ("/km2", "density"),
    "lambda_s": ("/km2", "density"),
    "lambda_u": ("/km2", "density"),
    "p_m": ("dBm", "power"),
    "p_s": ("dBm", "power"),
    "p_um": ("dBm", "power"),
    "p_us": ("dBm", "power"),
    "f_m": ("Hz", "frequency"),
    "f_s": ("Hz", "frequency"),
    "w_m": ("Hz", "frequency"),
    "w_s": ("Hz", "frequency"),
    "t_m": ("dB", "ratio"),
    "t_s": ("dB", "ratio"),
    "t_m_ul": ("dB", "ratio"),
    "t_s_ul": ("dB", "ratio"),
    "alpha_m": ("", "plain"),
    "alpha_l": ("", "plain"),
    "alpha_n": ("", "plain"),
    "g_s_max": ("dBi", "ratio"),
    "g_s_min": ("dBi", "ratio"),
    "g_m": ("dBi", "ratio"),
    "theta_s": ("deg", "angle"),
    "omega": ("", "plain"),
    "mu": ("m", "length"),
    "noise_figure": ("dB", "ratio"),
    "epsilon": ("", "plain"),
    "joint_bias": ("", "flag"),
}

# unit -> (kind, converter to SI-linear)
_UNITS = {
    "/km2": ("density", lambda v: v * 1e-6),
    "/m2": ("density", lambda v: v),
    "dbm": ("power", dbm_to_watt),
    "dbw": ("power", lambda v: db_to_linear(v)),
    "w": ("power", lambda v: v),
    "mw": ("power", lambda v: v * 1e-3),
    "hz": ("frequency", lambda v: v),
    "khz": ("frequency", lambda v: v * 1e3),
    "mhz": ("frequency", lambda v: v * 1e6),
    "ghz": ("frequency", lambda v: v * 1e9),
    "db": ("ratio", db_to_linear),
    "dbi": ("ratio", db_to_linear),
    "lin": ("ratio", lambda v: v),
    "deg": ("angle", math.radians),
    "rad": ("angle", lambda v: v),
    "m": ("length", lambda v: v),
    "km": ("length", lambda v: v * 1e3),
    "": ("plain", lambda v: v),
}


def _parse_value(field: str, raw: Any) -> Any:
    if field not in CONFIG_UNITS:
        raise ConfigError(field, "unknown configuration key")
    unit, kind = CONFIG_UNITS[field]
    if kind == "flag":
        if not isinstance(raw, bool):
            raise ConfigError(field, f"expected true/false, got {raw!r}")
        return raw
    if isinstance(raw, bool):
        raise ConfigError(field, f"expected a number, got {raw!r}")
    if isinstance(raw, (int, float)):
        number = float(raw)
    elif isinstance(raw, str):
        parts = raw.strip().split(None, 1)
        try:
            number = float(parts[0])
        except (ValueError, IndexError):
            raise ConfigError(field, f"cannot parse {raw!r}") from None
        if len(parts) == 2:
            unit = parts[1].strip()
    else:
        raise ConfigError(field, f"unsupported value {raw!r}")
    key = unit.lower().replace("²", "2").replace(" ", "")
    if key not in _UNITS:
        raise ConfigError(field, f"unknown unit {unit!r}")
    unit_kind, convert = _UNITS[key]
    if unit_kind != kind:
        raise ConfigError(field, f"unit {unit!r} is not a {kind} unit")
    if not math.isfinite(number):
        raise ConfigError(field, f"value must be finite, got {raw!r}")
    return convert(number)


def load_config(source: Mapping[str, Any] | str | Path | None = None) -> SystemParams:
    """Build validated :class:`SystemParams` from a JSON document.

    ``source`` may be a mapping, a path to a JSON file, or a JSON string.
    Missing keys take the Table-I defaults.  Unknown keys are reported with a
    :class:`ConfigWarning` and otherwise ignored.
    """
    if source is None:
        doc: Mapping[str, Any] = {}
    elif isinstance(source, Mapping):
        doc = source
    elif isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith("{")):
        doc = json.loads(Path(source).read_text(encoding="utf-8"))
    else:
        doc = json.loads(source)
    if not isinstance(doc, Mapping):
        raise ConfigError("<document>", "configuration must be a JSON object")

    values = {}
    for key, raw in doc.items():
        if key not in CONFIG_UNITS:
            warnings.warn(f"unknown configuration key {key!r} ignored", ConfigWarning, stacklevel=2)
            continue
        values[key] = _parse_value(key, raw)
    return SystemParams(**values)


def emit_config(params: SystemParams) -> dict[str, Any]:
    """Inverse of :func:`load_config`: a document in the conventional units."""
    out: dict[str, Any] = {}
    for field, (unit, kind) in CONFIG_UNITS.items():
        v = getattr(params, field)
        if kind == "density":
            out[field] = v * 1e6
        elif kind == "power":
            out[field] = watt_to_dbm(v)
        elif kind == "ratio":
            out[field] = linear_to_db(v)
        elif kind == "angle":
            out[field] = math.degrees(v)
        else:
            out[field] = v
    return out
