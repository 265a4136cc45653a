"""TOML scenario and sweep files.

Scenario file (every key optional)::

    p_source_dbm = 20.0       # dBm, source power P_s
    p_uav_dbm = 20.0          # dBm, UAV power P_u; defaults to p_source_dbm
    noise_uav_dbm = -100.0    # dBm, noise at the UAV
    noise_dest_dbm = -100.0   # dBm, noise at the destination
    inr = 1.0                 # linear residual self-interference to noise ratio
    m = 2                     # Nakagami shape (integer)
    n_antennas = 2            # destination MRC antennas
    sigma2_s = 1.0            # Nakagami scale, source-UAV hop
    sigma2_d = 1.0            # Nakagami scale, UAV-destination hop

    [environment]             # urban defaults
    omega = 9.61
    beta = 0.16               # 1/degree
    eta_los_db = 1.0
    eta_nlos_db = 20.0
    alpha = 2.0
    carrier_hz = 2e9

    [placement]               # generated geometry ...
    scheme = "equal_division" # or "midpoint_stacked"
    distance_m = 200.0        # source-destination distance L
    num_uavs = 2
    altitude_m = 100.0        # common / base altitude

    [[uav]]                   # ... or explicit nodes (not both)
    altitude_m = 100.0
    d_source_m = 100.0
    d_dest_m = 100.0

Without ``[placement]`` or ``[[uav]]`` the network is two co-located UAVs at
100 m altitude above the midpoint of a 200 m source-destination span.

Sweep file::

    variable = "p_source_dbm"   # p_source_dbm | altitude_m | sd_distance_m |
                                # num_uavs | num_antennas | power_split_a
    values = [0, 5, 10, 15, 20]
    outputs = ["sop_analytic_approx", "sop_mc"]
    placement = "explicit"      # explicit | equal_division | midpoint_stacked
    distance_m = 200.0          # L for generated placements
    base_altitude_m = 100.0     # altitude (ladder step) for generated placements
    num_uavs = 2                # UAV count for generated placements
    tie_uav_power = true        # P_u follows P_s in p_source_dbm sweeps

    [simulation]
    selection = "best"          # best | random | UAV index
    power_policy = "optimal"    # optimal | split a in [0, 1]
    antenna_sampling = "aggregate"
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .channel import EnvironmentParams, Scenario, UavNode

SWEEP_VARIABLES = ("p_source_dbm", "altitude_m", "sd_distance_m", "num_uavs",
                   "num_antennas", "power_split_a")
SWEEP_OUTPUTS = ("sop_analytic_exact", "sop_analytic_approx", "sop_mc", "sop_bounds",
                 "asr_analytic", "asr_mc")
PLACEMENTS = ("explicit", "equal_division", "midpoint_stacked")

_SCALAR_KEYS = {
    "p_source_dbm": float, "p_uav_dbm": float, "noise_uav_dbm": float,
    "noise_dest_dbm": float, "inr": float, "m": int, "n_antennas": int,
    "sigma2_s": float, "sigma2_d": float,
}
_ENV_KEYS = {"omega", "beta", "eta_los_db", "eta_nlos_db", "alpha", "carrier_hz"}
_PLACEMENT_KEYS = {"scheme", "distance_m", "num_uavs", "altitude_m"}
_UAV_KEYS = {"altitude_m", "d_source_m", "d_dest_m"}

DEFAULT_UAVS = (UavNode(100.0, 100.0, 100.0), UavNode(100.0, 100.0, 100.0))


class ConfigError(ValueError):
    """Invalid scenario or sweep file; the message names the offending key."""


def _check_keys(table: dict, allowed, where: str) -> None:
    for key in table:
        if key not in allowed:
            raise ConfigError(f"{where}: unknown key {key!r}")


def _number(value: Any, kind: type, key: str):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key}: expected a number, got {value!r}")
    if kind is int:
        if int(value) != value:
            raise ConfigError(f"{key}: expected an integer, got {value!r}")
        return int(value)
    return float(value)


def _read(path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def scenario_from_dict(data: dict) -> Scenario:
    top_allowed = set(_SCALAR_KEYS) | {"environment", "placement", "uav"}
    _check_keys(data, top_allowed, "scenario")
    kwargs = {k: _number(data[k], kind, k) for k, kind in _SCALAR_KEYS.items() if k in data}
    if "p_uav_dbm" not in kwargs and "p_source_dbm" in kwargs:
        kwargs["p_uav_dbm"] = kwargs["p_source_dbm"]

    env_table = data.get("environment", {})
    _check_keys(env_table, _ENV_KEYS, "environment")
    try:
        env = EnvironmentParams(**{k: _number(v, float, f"environment.{k}")
                                   for k, v in env_table.items()})
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"environment: {exc}") from exc

    if "placement" in data and "uav" in data:
        raise ConfigError("scenario: use either [placement] or [[uav]], not both")
    if "placement" in data:
        from .experiments import placement_geometry

        pl = data["placement"]
        _check_keys(pl, _PLACEMENT_KEYS, "placement")
        scheme = pl.get("scheme", "equal_division")
        if scheme not in PLACEMENTS[1:]:
            raise ConfigError(f"placement.scheme: must be one of {PLACEMENTS[1:]}, got {scheme!r}")
        try:
            uavs = placement_geometry(_number(pl.get("distance_m", 200.0), float, "placement.distance_m"),
                                      _number(pl.get("num_uavs", 2), int, "placement.num_uavs"),
                                      scheme,
                                      _number(pl.get("altitude_m", 100.0), float, "placement.altitude_m"))
        except ValueError as exc:
            raise ConfigError(f"placement: {exc}") from exc
    elif "uav" in data:
        uavs = []
        for i, node in enumerate(data["uav"]):
            _check_keys(node, _UAV_KEYS, f"uav[{i}]")
            missing = _UAV_KEYS - set(node)
            if missing:
                raise ConfigError(f"uav[{i}]: missing key(s) {sorted(missing)}")
            try:
                uavs.append(UavNode(**{k: _number(v, float, f"uav[{i}].{k}")
                                       for k, v in node.items()}))
            except ValueError as exc:
                if isinstance(exc, ConfigError):
                    raise
                raise ConfigError(f"uav[{i}]: {exc}") from exc
    else:
        uavs = list(DEFAULT_UAVS)

    try:
        return Scenario(uavs=tuple(uavs), env=env, **kwargs)
    except ValueError as exc:
        raise ConfigError(f"scenario: {exc}") from exc


def load_scenario(path) -> Scenario:
    """Parse and validate a scenario file; missing keys take the defaults."""
    return scenario_from_dict(_read(path))


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    values: tuple
    outputs: tuple[str, ...]
    placement: str = "explicit"
    distance_m: float = 200.0
    base_altitude_m: float = 100.0
    num_uavs: int | None = None
    tie_uav_power: bool = True
    simulation: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        if self.variable not in SWEEP_VARIABLES:
            raise ConfigError(f"variable: must be one of {SWEEP_VARIABLES}, got {self.variable!r}")
        if not self.values:
            raise ConfigError("values: must be non-empty")
        if not self.outputs:
            raise ConfigError("outputs: must be non-empty")
        for out in self.outputs:
            if out not in SWEEP_OUTPUTS:
                raise ConfigError(f"outputs: unknown output {out!r}; choose from {SWEEP_OUTPUTS}")
        if self.placement not in PLACEMENTS:
            raise ConfigError(f"placement: must be one of {PLACEMENTS}, got {self.placement!r}")
        if self.variable == "sd_distance_m" and self.placement == "explicit":
            raise ConfigError("placement: an sd_distance_m sweep needs a generated placement")

    def to_dict(self) -> dict:
        return {
            "variable": self.variable, "values": list(self.values),
            "outputs": list(self.outputs), "placement": self.placement,
            "distance_m": self.distance_m, "base_altitude_m": self.base_altitude_m,
            "num_uavs": self.num_uavs, "tie_uav_power": self.tie_uav_power,
            "simulation": dict(self.simulation),
        }


_SWEEP_KEYS = {"variable", "values", "outputs", "placement", "distance_m",
               "base_altitude_m", "num_uavs", "tie_uav_power", "simulation"}
_SIM_KEYS = {"selection", "power_policy", "antenna_sampling"}


def sweep_from_dict(data: dict) -> SweepSpec:
    _check_keys(data, _SWEEP_KEYS, "sweep")
    for key in ("variable", "values", "outputs"):
        if key not in data:
            raise ConfigError(f"sweep: missing required key {key!r}")
    sim = data.get("simulation", {})
    _check_keys(sim, _SIM_KEYS, "simulation")
    values = data["values"]
    if not isinstance(values, list):
        raise ConfigError("values: expected a list")
    values = [_number(v, float, "values") for v in values]
    if data["variable"] in ("num_uavs", "num_antennas"):
        values = [_number(v, int, "values") for v in values]
    kwargs = {k: data[k] for k in ("placement", "tie_uav_power") if k in data}
    for k in ("distance_m", "base_altitude_m"):
        if k in data:
            kwargs[k] = _number(data[k], float, k)
    if "num_uavs" in data:
        kwargs["num_uavs"] = _number(data["num_uavs"], int, "num_uavs")
    return SweepSpec(variable=data["variable"], values=tuple(values),
                     outputs=tuple(data["outputs"]), simulation=dict(sim), **kwargs)


def load_sweep(path) -> SweepSpec:
    return sweep_from_dict(_read(path))


def scenario_to_dict(scn: Scenario) -> dict:
    """Plain-data snapshot of a scenario (round-trips through scenario_from_dict)."""
    out = {k: getattr(scn, k) for k in _SCALAR_KEYS}
    out["environment"] = {k: getattr(scn.env, k) for k in sorted(_ENV_KEYS)}
    out["uav"] = [{"altitude_m": u.altitude_m, "d_source_m": u.d_source_m,
                   "d_dest_m": u.d_dest_m} for u in scn.uavs]
    return out


def write_text(path, text: str) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(text)
